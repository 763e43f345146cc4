//! All roots of Mandelbrot polynomials and related doubling-recurrence
//! families by Ehrlich-Aberth iteration.
//!
//! Per sweep the Aberth corrections come from a fast multipole evaluation
//! ([`cauchyfield`]) and the Newton corrections from an overflow-free scaled
//! recurrence ([`polyfam`]), so one sweep over degree `n = 2^k` costs
//! `O(n k)`. Starting points for `p_k` are placed around the roots of
//! `p_{k-2}` using exact nearest-neighbour distances ([`neighbors`]).
//!
//! ```
//! use mandelroots::{solve_ladder, PolynomialFamily, SolverConfig};
//!
//! let res = solve_ladder(&PolynomialFamily::Mandelbrot, 6, &SolverConfig::default()).unwrap();
//! assert_eq!(res.roots.degree(), 63);
//! assert!(res.roots.is_converged());
//! ```

pub mod aberth;
pub mod analysis;
pub mod cauchyfield;
mod ddouble;
pub mod io;
pub mod neighbors;
pub mod numeric;
mod par;
pub mod polyfam;
pub mod quadtree;
pub mod rootset;

use std::path::PathBuf;

use num_complex::Complex64;

pub use aberth::{ea_sweep, expand_seed, refine, solve_from, solve_ladder, SolverConfig, SweepResult};
pub use cauchyfield::{aberth_blocked, aberth_direct, aberth_fmm, FieldConfig};
pub use ddouble::{DoubleDouble, ParseDoubleDoubleError};
pub use io::{load_rootset, load_rootset_as, save_rootset, Format};
pub use neighbors::{all_nearest_distances, separation};
pub use numeric::{NumericContext, PrecisionMode, Real};
pub use polyfam::{newton_correction, newton_correction_batch, FamilyEvaluator, NewtonEval, NewtonStatus, PolynomialFamily};
pub use rootset::{ConvergenceRecord, FamilyTag, PhaseTimings, PointStatus, RootSet, SweepStat};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed root set: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("points {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },
    #[error("k = {k}: {} points still active after the sweep limit (max |N| = {residual_max:e})", active.len())]
    NonConverged {
        k: u32,
        active: Vec<usize>,
        residual_max: f64,
        partial_points: Vec<Complex64>,
    },
    #[error("{0}")]
    PrecisionRequired(String),
    #[error("probe coincides with point {0}")]
    ProbeCollision(usize),
    #[error("bad state: {0}")]
    State(String),
}
