//! Ehrlich-Aberth driver.
//!
//! One sweep updates every active point simultaneously by
//! `x_i ← x_i - N_i / (1 - N_i a_i)` with `N_i = p(x_i)/p'(x_i)` and the
//! Aberth correction `a_i` taken from the snapshot before the sweep. A point
//! whose `|N_i|` is at most `guard_factor · ε` is frozen where it stands; it
//! keeps acting as a source for the others.
//!
//! Roots of `p_k` are seeded from the roots of `p_{k-2}`: four points on a
//! small circle around each old root, plus a few on a large circle when the
//! degree is not exactly four times the old one.

use std::time::Instant;

use num_complex::{Complex, Complex64};

use crate::cauchyfield::{aberth_blocked_targets, aberth_fmm_targets, find_duplicate, FieldConfig};
use crate::neighbors::all_nearest_distances;
use crate::numeric::{cabs, from_c64, is_finite_c, NumericContext, Real};
use crate::polyfam::{eval_unchecked, NewtonStatus, PolynomialFamily};
use crate::rootset::{ConvergenceRecord, FamilyTag, Phase, PhaseTimings, RootSet, SweepStat};
use crate::{par, DoubleDouble, Error};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Multiplier of `ε` in the stop criterion `|N(x_i)| ≤ guard_factor · ε`.
    pub guard_factor: f64,
    pub max_sweeps: usize,
    pub fmm: FieldConfig,
    /// Number of index groups for the blocked Aberth evaluation; 1 disables it.
    pub split_q: usize,
    /// Seed circle radius as a fraction of the nearest-neighbour distance.
    pub seed_circle_fraction: f64,
    pub outer_radius: f64,
    /// Angle of the first of the four seeds around each old root.
    pub seed_offset: f64,
    /// Angle of the first root of unity in the base case.
    pub base_rotation: f64,
    pub freeze_converged: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            guard_factor: 1024.0,
            max_sweeps: 200,
            fmm: FieldConfig::default(),
            split_q: 1,
            seed_circle_fraction: 0.25,
            outer_radius: 2.0,
            seed_offset: 0.3,
            base_rotation: 0.1,
            freeze_converged: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.guard_factor.is_nan() || self.guard_factor < 1.0 {
            return Err(Error::Validation(format!("guard_factor must be >= 1, got {}", self.guard_factor)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Validation("max_sweeps must be positive".into()));
        }
        if self.split_q == 0 {
            return Err(Error::Validation("split_q must be positive".into()));
        }
        if !(self.seed_circle_fraction > 0.0 && self.seed_circle_fraction <= 0.25) {
            return Err(Error::Validation(format!(
                "seed_circle_fraction must lie in (0, 1/4], got {}",
                self.seed_circle_fraction
            )));
        }
        if !(self.outer_radius > 0.0 && self.outer_radius.is_finite()) {
            return Err(Error::Validation(format!("outer_radius must be positive, got {}", self.outer_radius)));
        }
        if !(self.seed_offset.is_finite() && self.base_rotation.is_finite()) {
            return Err(Error::Validation("seed angles must be finite".into()));
        }
        self.fmm.validate()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult<T: Real = f64> {
    pub roots: RootSet<T>,
    pub record: ConvergenceRecord,
    /// Largest `|N(x_i)|` over the points still active; 0 on success.
    pub residual_max: f64,
}

/// Outcome of one sweep applied in place.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SweepOutcome {
    pub stat: SweepStat,
    pub residual_max: f64,
}

/// One simultaneous update. Returns the updated set; the input is untouched.
pub fn ea_sweep<T: Real>(
    family: &PolynomialFamily,
    k: u32,
    rs: &RootSet<T>,
    cfg: &SolverConfig,
) -> Result<RootSet<T>, Error> {
    cfg.validate()?;
    check_degree(family, k, rs.degree())?;
    let mut out = rs.clone();
    sweep_in_place(family, k, &mut out, cfg)?;
    Ok(out)
}

fn check_degree(family: &PolynomialFamily, k: u32, n: usize) -> Result<(), Error> {
    let want = family.degree(k)?;
    if n != want {
        return Err(Error::Validation(format!(
            "{} member k = {k} has degree {want}, root set has {n} points",
            family.description()
        )));
    }
    Ok(())
}

pub(crate) fn sweep_in_place<T: Real>(
    family: &PolynomialFamily,
    k: u32,
    rs: &mut RootSet<T>,
    cfg: &SolverConfig,
) -> Result<SweepOutcome, Error> {
    let n = rs.degree();
    let eps = rs.context().epsilon();
    let tol = cfg.guard_factor * eps;
    let mut timings = PhaseTimings::default();

    let targets: Vec<bool> = if cfg.freeze_converged {
        rs.status().iter().map(|s| *s == crate::PointStatus::Active).collect()
    } else {
        vec![true; n]
    };
    let idx: Vec<usize> = (0..n).filter(|&i| targets[i]).collect();

    let t0 = Instant::now();
    let pts64 = rs.points_f64();
    let a = if cfg.split_q > 1 {
        aberth_blocked_targets(&pts64, &targets, &cfg.fmm, cfg.split_q)?
    } else {
        aberth_fmm_targets(&pts64, &targets, &cfg.fmm)?
    };
    timings.aberth = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let pts = rs.points();
    let evals = par::map_collect(&idx, |_, &i| eval_unchecked(family, k, pts[i]));
    timings.newton = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let mut moved = 0usize;
    let mut residual_max = 0.0f64;
    let mut moved_idx = Vec::new();
    for (&i, e) in idx.iter().zip(&evals) {
        let x = rs.points()[i];
        let nabs = e.abs();
        if e.status == NewtonStatus::ExactRoot || (e.status == NewtonStatus::Ok && nabs <= tol) {
            rs.freeze(i, nabs);
            continue;
        }
        if !cfg.freeze_converged {
            rs.activate(i);
        }
        let ai: Complex<T> = from_c64(a[i]);
        let xn = match e.status {
            NewtonStatus::DerivativeZero => {
                if a[i] == Complex64::new(0.0, 0.0) {
                    nudge(x)
                } else {
                    // limit of x - N/(1 - N a) as N grows without bound
                    x + Complex::new(T::one(), T::zero()) / ai
                }
            }
            _ => {
                let nc = e.correction;
                let denom = Complex::new(T::one(), T::zero()) - nc * ai;
                if denom.re == T::zero() && denom.im == T::zero() {
                    x - nc
                } else {
                    x - nc / denom
                }
            }
        };
        residual_max = residual_max.max(if e.status == NewtonStatus::DerivativeZero { f64::INFINITY } else { nabs });
        if is_finite_c(xn) && xn != x {
            rs.points_mut()[i] = xn;
            moved += 1;
            moved_idx.push(i);
        }
    }
    if !moved_idx.is_empty() {
        separate_duplicates(rs);
    }
    timings.other = t2.elapsed().as_secs_f64();

    Ok(SweepOutcome {
        stat: SweepStat {
            active: rs.active_count(),
            moved,
            timings,
        },
        residual_max: if rs.active_count() == 0 { 0.0 } else { residual_max },
    })
}

fn nudge<T: Real>(x: Complex<T>) -> Complex<T> {
    let e = T::from_f64(f64::EPSILON) * (T::one() + cabs(x));
    Complex::new(x.re + e, x.im)
}

/// Moves the later point of every coincident pair (as seen in double
/// precision, which is what the field evaluation uses) by `ε (1 + |x|)`
/// along the real axis, preferring a point that is still active.
fn separate_duplicates<T: Real>(rs: &mut RootSet<T>) {
    for _ in 0..64 {
        let pts = rs.points_f64();
        let Some((i, j)) = find_duplicate(&pts) else {
            return;
        };
        let active = |m: usize| rs.status()[m] == crate::PointStatus::Active;
        let m = if active(j) || !active(i) { j } else { i };
        let x = pts[m];
        let step = f64::EPSILON * (1.0 + x.norm());
        let mut xn = Complex64::new(x.re + step, x.im);
        if xn == x {
            xn = Complex64::new(next_up(x.re), x.im);
        }
        rs.points_mut()[m] = from_c64(xn);
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

/// Iterates sweeps from `start` until every point is frozen.
pub fn solve_from<T: Real>(
    family: &PolynomialFamily,
    k: u32,
    start: RootSet<T>,
    cfg: &SolverConfig,
) -> Result<SweepResult<T>, Error> {
    cfg.validate()?;
    check_degree(family, k, start.degree())?;
    let mut rs = start;
    if rs.tag().is_none() {
        rs.set_tag(Some(FamilyTag {
            family: family.description(),
            k,
        }));
    }
    let mut record = ConvergenceRecord::default();
    let mut residual_max = f64::INFINITY;
    while record.sweeps_total() < cfg.max_sweeps {
        let out = sweep_in_place(family, k, &mut rs, cfg)?;
        residual_max = out.residual_max;
        record.push(out.stat);
        if out.stat.active == 0 {
            return Ok(SweepResult {
                roots: rs,
                record,
                residual_max: 0.0,
            });
        }
    }
    let active: Vec<usize> = (0..rs.degree())
        .filter(|&i| rs.status()[i] == crate::PointStatus::Active)
        .collect();
    Err(Error::NonConverged {
        k,
        active,
        residual_max,
        partial_points: rs.points_f64(),
    })
}

/// Seeds for `p_k` from the converged roots of `p_{k-2}`.
pub fn expand_seed(
    prev: &RootSet<f64>,
    family: &PolynomialFamily,
    k: u32,
    cfg: &SolverConfig,
) -> Result<RootSet<f64>, Error> {
    if k < 3 {
        return Err(Error::Domain(format!("seeding needs k >= 3, got {k}")));
    }
    check_degree(family, k - 2, prev.degree())?;
    if !prev.is_converged() {
        return Err(Error::State(format!(
            "roots for k = {} are not converged ({} active)",
            k - 2,
            prev.active_count()
        )));
    }
    let n = family.degree(k)?;
    let m = prev.degree();
    if 4 * m > n {
        return Err(Error::Validation(format!(
            "degree {n} for k = {k} is less than four times {m}"
        )));
    }
    let pts = prev.points();
    let dist: Vec<f64> = match prev.neighbor_dist().iter().copied().collect::<Option<Vec<f64>>>() {
        Some(d) => d,
        None if m == 1 => vec![cfg.outer_radius],
        None => all_nearest_distances(pts)?,
    };
    let mut out = Vec::with_capacity(n);
    let dirs: Vec<Complex64> = (0..4)
        .map(|j| Complex64::from_polar(1.0, cfg.seed_offset + j as f64 * std::f64::consts::FRAC_PI_2))
        .collect();
    for (&x, &d) in pts.iter().zip(&dist) {
        let r = cfg.seed_circle_fraction * d;
        out.extend(dirs.iter().map(|u| x + u * r));
    }
    let extras = n - 4 * m;
    for j in 0..extras {
        let t = 2.0 * std::f64::consts::PI * j as f64 / extras as f64;
        out.push(Complex64::from_polar(cfg.outer_radius, t));
    }
    Ok(RootSet::new(out, NumericContext::double()).with_tag(FamilyTag {
        family: family.description(),
        k,
    }))
}

/// Degree-`n` roots of unity scaled to `radius` and turned by `rotation`.
pub fn unity_start(n: usize, radius: f64, rotation: f64) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(radius, rotation + 2.0 * std::f64::consts::PI * j as f64 / n as f64))
        .collect()
}

/// Solves `p_{k0}, p_{k0+2}, …, p_{k_target}` with `k0 = 4` or `5` by parity.
pub fn solve_ladder(family: &PolynomialFamily, k_target: u32, cfg: &SolverConfig) -> Result<SweepResult, Error> {
    solve_ladder_with(family, k_target, cfg, |_, _| {})
}

/// As [`solve_ladder`], handing each finished rung to `on_rung`. The record
/// of a rung includes the time spent seeding it.
pub fn solve_ladder_with<F>(
    family: &PolynomialFamily,
    k_target: u32,
    cfg: &SolverConfig,
    mut on_rung: F,
) -> Result<SweepResult, Error>
where
    F: FnMut(u32, &SweepResult),
{
    if k_target < 4 {
        return Err(Error::Domain(format!("the ladder starts at k = 4, got k = {k_target}")));
    }
    cfg.validate()?;
    let k0 = if k_target.is_multiple_of(2) { 4 } else { 5 };
    let t = Instant::now();
    let start = RootSet::new(
        unity_start(family.degree(k0)?, cfg.outer_radius / 2.0, cfg.base_rotation),
        NumericContext::double(),
    );
    let setup = t.elapsed();
    let mut res = solve_from(family, k0, start, cfg)?;
    res.record.add_time(Phase::Other, setup);
    on_rung(k0, &res);
    let mut k = k0;
    while k < k_target {
        k += 2;
        let mut prev = res.roots;
        let t = Instant::now();
        let d = all_nearest_distances(prev.points())?;
        prev.set_neighbor_dist(&d);
        let t_nn = t.elapsed();
        let t = Instant::now();
        let seed = expand_seed(&prev, family, k, cfg)?;
        let t_seed = t.elapsed();
        res = solve_from(family, k, seed, cfg)?;
        res.record.add_time(Phase::Neighbors, t_nn);
        res.record.add_time(Phase::Other, t_seed);
        on_rung(k, &res);
    }
    Ok(res)
}

/// Re-runs the iteration on a converged double-precision set in double-double
/// arithmetic until the stop criterion of `high_ctx` holds.
pub fn refine(
    rs: &RootSet<f64>,
    family: &PolynomialFamily,
    k: u32,
    high_ctx: NumericContext,
    cfg: &SolverConfig,
) -> Result<SweepResult<DoubleDouble>, Error> {
    if !rs.is_converged() {
        return Err(Error::State(format!(
            "refinement needs a converged set; {} of {} points are active",
            rs.active_count(),
            rs.degree()
        )));
    }
    refine_any(rs, family, k, high_ctx, cfg)
}

/// [`refine`] for input already held in double-double.
pub fn refine_any<T: Real>(
    rs: &RootSet<T>,
    family: &PolynomialFamily,
    k: u32,
    high_ctx: NumericContext,
    cfg: &SolverConfig,
) -> Result<SweepResult<DoubleDouble>, Error> {
    let mut hp: RootSet<DoubleDouble> = rs.convert(high_ctx);
    hp.reset_status();
    solve_from(family, k, hp, cfg)
}

/// Residual `|N(x_i)|` of every point, recomputed.
pub fn newton_residuals<T: Real>(family: &PolynomialFamily, k: u32, pts: &[Complex<T>]) -> Vec<f64> {
    par::map_collect(pts, |_, &z| {
        let e = eval_unchecked(family, k, z);
        match e.status {
            NewtonStatus::DerivativeZero => f64::INFINITY,
            _ => e.abs(),
        }
    })
}
