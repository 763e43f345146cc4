//! Checks and statistics on converged root sets: the global δ residual,
//! the real-root asymptotics of Mandelbrot polynomials, and separation.

use std::io::{self, Write};

use num_complex::{Complex, Complex64};

use crate::neighbors::{nearest_neighbors, rsep_from, separation_from, RsepDenominator};
use crate::numeric::{cabs, from_c64, to_c64, Real};
use crate::polyfam::{eval_unchecked, NewtonStatus, PolynomialFamily};
use crate::rootset::{ConvergenceRecord, RootSet};
use crate::{DoubleDouble, Error};

/// `-(cos 0.7 + i sin 0.7) / 2`.
pub fn default_probe() -> Complex64 {
    let (s, c) = 0.7f64.sin_cos();
    Complex64::new(-0.5 * c, -0.5 * s)
}

/// `|p'(w)/p(w) - Σ_i 1/(w - x_i)|`, zero exactly when the `x_i` are the roots.
pub fn delta_indicator<T: Real>(
    rs: &RootSet<T>,
    family: &PolynomialFamily,
    k: u32,
    probe: Complex64,
) -> Result<f64, Error> {
    let w: Complex<T> = from_c64(probe);
    if let Some(i) = rs.points().iter().position(|&x| x == w) {
        return Err(Error::ProbeCollision(i));
    }
    let e = eval_unchecked(family, k, w);
    let lhs = match e.status {
        NewtonStatus::Ok => Complex::new(T::one(), T::zero()) / e.correction,
        NewtonStatus::ExactRoot => return Ok(f64::INFINITY),
        NewtonStatus::DerivativeZero => Complex::new(T::zero(), T::zero()),
    };
    let terms = rs.points().iter().map(|&x| Complex::new(T::one(), T::zero()) / (w - x));
    let sum = Complex::new(neumaier(terms.clone().map(|z| z.re)), neumaier(terms.map(|z| z.im)));
    Ok(cabs(lhs - sum).to_f64())
}

fn neumaier<T: Real>(xs: impl Iterator<Item = T>) -> T {
    let mut s = T::zero();
    let mut c = T::zero();
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c = c + ((s - t) + x);
        } else {
            c = c + ((x - t) + s);
        }
        s = t;
    }
    s + c
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealRootTable {
    pub k: u32,
    /// Real roots in ascending order.
    pub eta: Vec<f64>,
    pub gamma_hat: Vec<f64>,
    /// `max_j |γ̂_j|`.
    pub psi: f64,
    pub n_r: usize,
}

/// Default `im_tol = 2^12 · ε · n`.
pub fn default_im_tol<T: Real>(rs: &RootSet<T>) -> f64 {
    4096.0 * rs.context().epsilon() * rs.degree() as f64
}

/// Double precision resolves `γ̂` only up to this index.
pub const DOUBLE_GAMMA_MAX_K: u32 = 14;

/// Real roots `η_j` of `p_k` with the normalised remainders
/// `γ̂_j = (η_j + 2 - (2j-1)^2 (3/2) π^2 4^{-k-1}) / (j^5 k^2 16^{-k})`.
pub fn real_root_table<T: Real>(rs: &RootSet<T>, k: u32, im_tol: Option<f64>) -> Result<RealRootTable, Error> {
    if T::EPSILON >= f64::EPSILON && k > DOUBLE_GAMMA_MAX_K {
        return Err(Error::PrecisionRequired(format!(
            "real-root remainders for k = {k} > {DOUBLE_GAMMA_MAX_K} need refined roots"
        )));
    }
    let tol = im_tol.unwrap_or_else(|| default_im_tol(rs));
    let mut eta: Vec<DoubleDouble> = rs
        .points()
        .iter()
        .filter(|z| z.im.abs().to_f64() <= tol)
        .map(|z| z.re.to_dd())
        .collect();
    eta.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));

    let dd = DoubleDouble::from_f64;
    let kk = dd(f64::from(k));
    let pi2 = DoubleDouble::PI * DoubleDouble::PI;
    let four_pow = dd(4.0).powi(-(k as i32) - 1);
    let sixteen_pow = dd(16.0).powi(-(k as i32));
    let lead = dd(1.5) * pi2 * four_pow;
    let gamma_hat: Vec<f64> = eta
        .iter()
        .enumerate()
        .map(|(idx, &e)| {
            let j = dd((idx + 1) as f64);
            let odd = dd(2.0) * j - dd(1.0);
            let num = e + dd(2.0) - odd * odd * lead;
            let den = j.powi(5) * kk * kk * sixteen_pow;
            (num / den).to_f64()
        })
        .collect();
    let psi = gamma_hat.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    Ok(RealRootTable {
        k,
        n_r: eta.len(),
        eta: eta.iter().map(|e| e.to_f64()).collect(),
        gamma_hat,
        psi,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SepReport {
    pub k: u32,
    pub sep: f64,
    /// Relative separation with the larger modulus of the pair as denominator.
    pub rsep: f64,
    /// Same with the smaller modulus.
    pub rsep_smaller: f64,
    pub pair: (usize, usize),
    /// `3π^2 4^{-k}` (even k) or `(3/2)π^2 4^{-k}` (odd k).
    pub predicted: f64,
    pub excess: f64,
    /// `33 k^2 16^{-k}` for even k; odd k has no fixed constant.
    pub bound: Option<f64>,
    /// `sep > 2^11 n ε`, so the inclusion disks are disjoint.
    pub precision_ok: bool,
}

pub fn predicted_sep(k: u32) -> f64 {
    let base = 3.0 * std::f64::consts::PI.powi(2) * 4f64.powi(-(k as i32));
    if k.is_multiple_of(2) {
        base
    } else {
        0.5 * base
    }
}

pub fn even_sep_bound(k: u32) -> f64 {
    33.0 * f64::from(k * k) * 16f64.powi(-(k as i32))
}

/// `k^2 8^{-k}`, the odd-k remainder scale.
pub fn odd_sep_scale(k: u32) -> f64 {
    f64::from(k * k) * 8f64.powi(-(k as i32))
}

pub fn sep_report<T: Real>(rs: &RootSet<T>, k: u32) -> Result<SepReport, Error> {
    let pts = rs.points_f64();
    let nn = nearest_neighbors(&pts)?;
    let s = separation_from(&nn);
    // recompute the winning distance in working precision
    let (a, b) = s.pair;
    let sep = cabs(rs.points()[a] - rs.points()[b]).to_f64();
    let predicted = predicted_sep(k);
    let excess = (sep - predicted).abs();
    let n = rs.degree() as f64;
    Ok(SepReport {
        k,
        sep,
        rsep: rsep_from(&pts, &nn, RsepDenominator::Larger),
        rsep_smaller: rsep_from(&pts, &nn, RsepDenominator::Smaller),
        pair: s.pair,
        predicted,
        excess,
        bound: k.is_multiple_of(2).then(|| even_sep_bound(k)),
        precision_ok: sep > 2048.0 * n * rs.context().epsilon(),
    })
}

/// Least-squares `θ` in `excess ≈ θ k^2 8^{-k}` over odd-k reports.
pub fn odd_theta_least_squares(reports: &[SepReport]) -> Option<f64> {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for r in reports.iter().filter(|r| r.k % 2 == 1) {
        let x = odd_sep_scale(r.k);
        sxy += x * r.excess;
        sxx += x * x;
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Smallest `C` with `excess ≤ C k^2 8^{-k}` for every odd-k report.
pub fn odd_theta_envelope(reports: &[SepReport]) -> Option<f64> {
    reports
        .iter()
        .filter(|r| r.k % 2 == 1)
        .map(|r| r.excess / odd_sep_scale(r.k))
        .reduce(f64::max)
}

/// Fits `sep_k ≈ γ σ^{-k}` by least squares on `ln sep_k`, with one slope
/// shared by both parities and a separate intercept for even and odd `k`.
/// Returns `σ`.
pub fn fit_sep_decay(samples: &[(u32, f64)]) -> Option<f64> {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for parity in 0..2 {
        let group: Vec<(f64, f64)> = samples
            .iter()
            .filter(|(k, s)| k % 2 == parity && *s > 0.0)
            .map(|&(k, s)| (f64::from(k), s.ln()))
            .collect();
        if group.len() < 2 {
            continue;
        }
        let m = group.len() as f64;
        let kx = group.iter().map(|g| g.0).sum::<f64>() / m;
        let ky = group.iter().map(|g| g.1).sum::<f64>() / m;
        for (x, y) in group {
            sxy += (x - kx) * (y - ky);
            sxx += (x - kx) * (x - kx);
        }
    }
    (sxx > 0.0).then(|| (-sxy / sxx).exp())
}

pub const REAL_ROOT_CSV_HEADER: &str = "j,eta,gamma_hat";
pub const SEP_CSV_HEADER: &str = "k,sep,rsep,predicted,excess,rsep_smaller,pair_i,pair_j";
pub const RECORD_CSV_HEADER: &str = "sweep,active,moved,aberth_s,newton_s,neighbors_s,other_s";

pub fn write_real_root_csv<W: Write>(w: &mut W, table: &RealRootTable) -> io::Result<()> {
    writeln!(w, "{REAL_ROOT_CSV_HEADER}")?;
    for (j, (e, g)) in table.eta.iter().zip(&table.gamma_hat).enumerate() {
        writeln!(w, "{},{:.17e},{:.17e}", j + 1, e, g)?;
    }
    Ok(())
}

pub fn write_sep_csv<W: Write>(w: &mut W, reports: &[SepReport]) -> io::Result<()> {
    writeln!(w, "{SEP_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
            r.k, r.sep, r.rsep, r.predicted, r.excess, r.rsep_smaller, r.pair.0, r.pair.1
        )?;
    }
    Ok(())
}

pub fn write_record_csv<W: Write>(w: &mut W, record: &ConvergenceRecord) -> io::Result<()> {
    writeln!(w, "{RECORD_CSV_HEADER}")?;
    for (i, s) in record.sweeps.iter().enumerate() {
        let t = &s.timings;
        writeln!(
            w,
            "{},{},{},{:.6e},{:.6e},{:.6e},{:.6e}",
            i + 1,
            s.active,
            s.moved,
            t.aberth,
            t.newton,
            t.neighbors,
            t.other
        )?;
    }
    Ok(())
}

/// Largest recorded a-posteriori radius `n |N(x_i)|`, or `None` if some
/// point never converged.
pub fn max_apost_radius<T: Real>(rs: &RootSet<T>) -> Option<f64> {
    rs.max_apost_radius()
}

/// `f64` copy of the points, for callers that only need positions.
pub fn points_f64<T: Real>(pts: &[Complex<T>]) -> Vec<Complex64> {
    pts.iter().map(|&z| to_c64(z)).collect()
}
