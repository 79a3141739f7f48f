//! Numerical machinery for nonsmooth vector optimization over cell-based
//! feasible sets.
//!
//! The crate is organized around a handful of computable objects:
//!
//! * [`dsl`] — a small expression language (variables, arithmetic, `sin`,
//!   `cos`, `exp`, `abs`, `max`, `min`, `norm2`) with evaluation, symbolic
//!   differentiation of smooth trees, and subdifferential hulls at a point.
//! * [`feasible`] — closed feasible sets as finite unions of cells
//!   (box ∩ affine ∩ smooth inequalities), optionally extended by a periodic
//!   translation family; membership, grids, and limiting normal cones.
//! * [`minnorm`] — the distance from the origin to `conv(G) + C` for a finite
//!   generator list `G` and a finitely generated cone `C`, solved by
//!   Frank-Wolfe with away steps.
//! * [`stationarity`] — the extended Rabier residual `ν`, its restriction to
//!   an index set over a sublevel set, and tangency-variety membership.
//! * [`sections`] — sublevel sets, image sections, index sets of objectives
//!   constant on a sublevel set, descent chains, and brute-force Pareto
//!   front oracles on grids.
//! * [`asymptotics`] — limit-set estimation along declared probe paths and
//!   the properness / Palais-Smale / weak Palais-Smale / M-tameness
//!   checkers, plus an Ekeland refinement step.
//! * [`existence`] — theorem-level existence checkers assembling the above
//!   into three-valued reports.
//! * [`reference`] — slow, independent reference implementations (dense
//!   oracles) used by the test suites to cross-check the fast paths.
//!
//! All operations are pure over immutable inputs and safe to call
//! concurrently. Grid sweeps use `rayon`; cap the worker count by building a
//! global thread pool before first use (the CLI does this from the
//! `PARETO_TAME_THREADS` environment variable).

pub mod asymptotics;
pub mod dsl;
pub mod existence;
pub mod feasible;
pub mod linalg;
pub mod minnorm;
pub mod reference;
pub mod sections;
pub mod stationarity;

pub use dsl::{Expression, HullRep, VectorObjective};
pub use feasible::{Cell, ConeRep, FeasibleSet, Region};
pub use minnorm::MinNormResult;
pub use stationarity::{NuValue, TangencyCertificate};

/// Absolute tolerance deciding whether an inequality constraint is active at
/// a point. Constraint values within this distance of their bound contribute
/// their normals to the cone.
pub const ACTIVE_CONSTRAINT_TOL: f64 = 1e-7;

/// Absolute tolerance deciding whether a `max`/`min` argument or an `abs`
/// argument sits at its kink. Tighter than [`ACTIVE_CONSTRAINT_TOL`] because
/// kink detection feeds exactness flags, not just cone generation.
pub const KINK_TOL: f64 = 1e-9;

/// Default membership / verdict tolerance. Residuals at or below this count
/// as zero; values in `(tol, 10·tol]` are reported as marginal.
pub const DEFAULT_TOL: f64 = 1e-7;

/// Default convergence tolerance of the min-norm solver (duality-gap units).
pub const MINNORM_TOL: f64 = 1e-9;

/// Default iteration cap of the min-norm solver.
pub const MINNORM_MAX_ITER: usize = 50_000;

/// Tolerance used when matching a limit witness against a stationary-value
/// set member, in objective space.
pub const INCLUSION_MATCH_TOL: f64 = 1e-4;

/// Errors shared across the numerical modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Expression-level failure (parsing, differentiation, hull rules).
    #[error(transparent)]
    Dsl(#[from] dsl::DslError),
    /// Feasible-set failure (dimension mismatch, degenerate corner).
    #[error(transparent)]
    Feasible(#[from] feasible::FeasibleError),
    /// Sublevel-set construction failure (branch-splitting explosion).
    #[error(transparent)]
    Sections(#[from] sections::SectionsError),
    /// Probe-path failure (all paths rejected, bad schedule).
    #[error(transparent)]
    Asymptotics(#[from] asymptotics::AsymptoticsError),
}
