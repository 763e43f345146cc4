use std::time::Duration;

use num_complex::Complex;

use crate::numeric::{cabs, to_c64, NumericContext, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Active,
    Converged,
}

/// Which polynomial a root set approximates.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyTag {
    pub family: String,
    pub k: u32,
}

/// Approximations to all roots of one polynomial, with per-point state.
#[derive(Debug, Clone)]
pub struct RootSet<T: Real = f64> {
    points: Vec<Complex<T>>,
    status: Vec<PointStatus>,
    neighbor_dist: Vec<Option<f64>>,
    /// |N(x_i)| recorded when point i was frozen.
    newton_abs: Vec<Option<f64>>,
    tag: Option<FamilyTag>,
    ctx: NumericContext,
}

impl<T: Real> RootSet<T> {
    /// All points start `Active` with no recorded distances.
    pub fn new(points: Vec<Complex<T>>, ctx: NumericContext) -> Self {
        let n = points.len();
        Self {
            points,
            status: vec![PointStatus::Active; n],
            neighbor_dist: vec![None; n],
            newton_abs: vec![None; n],
            tag: None,
            ctx,
        }
    }

    pub fn with_tag(mut self, tag: FamilyTag) -> Self {
        self.tag = Some(tag);
        self
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn points_f64(&self) -> Vec<Complex<f64>> {
        self.points.iter().map(|&z| to_c64(z)).collect()
    }

    pub fn status(&self) -> &[PointStatus] {
        &self.status
    }

    pub fn tag(&self) -> Option<&FamilyTag> {
        self.tag.as_ref()
    }

    pub fn set_tag(&mut self, tag: Option<FamilyTag>) {
        self.tag = tag;
    }

    pub fn context(&self) -> NumericContext {
        self.ctx
    }

    pub fn neighbor_dist(&self) -> &[Option<f64>] {
        &self.neighbor_dist
    }

    /// Stores nearest-neighbour distances; `dist.len()` must equal the degree.
    pub fn set_neighbor_dist(&mut self, dist: &[f64]) {
        assert_eq!(dist.len(), self.points.len());
        self.neighbor_dist = dist.iter().map(|&d| Some(d)).collect();
    }

    pub fn active_count(&self) -> usize {
        self.status
            .iter()
            .filter(|s| **s == PointStatus::Active)
            .count()
    }

    pub fn is_converged(&self) -> bool {
        !self.points.is_empty() && self.status.iter().all(|s| *s == PointStatus::Converged)
    }

    pub fn newton_abs(&self) -> &[Option<f64>] {
        &self.newton_abs
    }

    /// Radius n·|N(x_i)| of a disk around point `i` that contains a root.
    pub fn apost_radius(&self, i: usize) -> Option<f64> {
        self.newton_abs[i].map(|a| a * self.points.len() as f64)
    }

    pub fn max_apost_radius(&self) -> Option<f64> {
        (0..self.points.len())
            .map(|i| self.apost_radius(i))
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
    }

    pub(crate) fn points_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.points
    }

    pub(crate) fn freeze(&mut self, i: usize, newton_abs: f64) {
        self.status[i] = PointStatus::Converged;
        self.newton_abs[i] = Some(newton_abs);
    }

    pub(crate) fn activate(&mut self, i: usize) {
        self.status[i] = PointStatus::Active;
        self.newton_abs[i] = None;
    }

    /// Marks every point active again and forgets recorded residuals.
    pub fn reset_status(&mut self) {
        self.status.fill(PointStatus::Active);
        self.newton_abs.fill(None);
    }

    pub fn all_finite(&self) -> bool {
        self.points
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Converts to another working precision, keeping per-point state.
    pub fn convert<U: Real>(&self, ctx: NumericContext) -> RootSet<U> {
        RootSet {
            points: self
                .points
                .iter()
                .map(|z| {
                    Complex::new(
                        widen::<T, U>(z.re),
                        widen::<T, U>(z.im),
                    )
                })
                .collect(),
            status: self.status.clone(),
            neighbor_dist: self.neighbor_dist.clone(),
            newton_abs: self.newton_abs.clone(),
            tag: self.tag.clone(),
            ctx,
        }
    }

    /// Largest modulus among the points, in f64.
    pub fn max_modulus(&self) -> f64 {
        self.points
            .iter()
            .map(|&z| cabs(z).to_f64())
            .fold(0.0, f64::max)
    }
}

// Exact when widening f64 -> DoubleDouble; rounds to nearest when narrowing.
fn widen<T: Real, U: Real>(x: T) -> U {
    U::from_dd(x.to_dd())
}

/// Seconds spent in each phase of the solver.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub aberth: f64,
    pub newton: f64,
    pub neighbors: f64,
    pub other: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.aberth + self.newton + self.neighbors + self.other
    }

    pub fn add(&mut self, other: &PhaseTimings) {
        self.aberth += other.aberth;
        self.newton += other.newton;
        self.neighbors += other.neighbors;
        self.other += other.other;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStat {
    /// Points still active after the sweep.
    pub active: usize,
    /// Points whose position changed during the sweep.
    pub moved: usize,
    pub timings: PhaseTimings,
}

/// Per-sweep bookkeeping of one solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub sweeps: Vec<SweepStat>,
    pub timings: PhaseTimings,
    pub delta_indicator: Option<f64>,
}

impl ConvergenceRecord {
    pub fn push(&mut self, stat: SweepStat) {
        self.timings.add(&stat.timings);
        self.sweeps.push(stat);
    }

    pub fn per_sweep_active(&self) -> Vec<usize> {
        self.sweeps.iter().map(|s| s.active).collect()
    }

    pub fn sweeps_total(&self) -> usize {
        self.sweeps.len()
    }

    /// Sweeps that moved at least one point; the final sweep of a successful
    /// run usually only confirms the stop criterion.
    pub fn moving_sweeps(&self) -> usize {
        self.sweeps.iter().filter(|s| s.moved > 0).count()
    }

    pub fn add_time(&mut self, phase: Phase, d: Duration) {
        let s = d.as_secs_f64();
        match phase {
            Phase::Aberth => self.timings.aberth += s,
            Phase::Newton => self.timings.newton += s,
            Phase::Neighbors => self.timings.neighbors += s,
            Phase::Other => self.timings.other += s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Aberth,
    Newton,
    Neighbors,
    Other,
}
