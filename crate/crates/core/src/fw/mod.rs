//! Frank-Wolfe machinery over contracted marginal polytopes.

mod bound;
mod delta;
mod diagnostics;
mod engine;
mod gaps;
mod line_search;
mod mfw;

pub use bound::logz_upper_bound;
pub use delta::{adaptive_delta_update, rescale_alpha};
pub use diagnostics::{diagnostics_rate_constants, RateConstants};
pub use engine::{
    fcfw_inner_loop, local_search, trw_barrier_fw, DeltaMode, EngineConfig, EngineEvent, GapSnapshot,
    InnerSummary, OuterConfig, RhoIterationSummary, SolverState, StepInfo, TraceRecord, TrwBarrierResult,
};
pub use gaps::{compute_gaps, Gaps};
pub use line_search::{line_search, line_search_along, LineFunction, Ray};
pub use mfw::{away_step_frank_wolfe, AtomSet, ContractedVertices, DenseAtoms, MfwOutcome};

/// A convex function over flat arrays, with the pieces Frank-Wolfe needs.
pub trait ConvexObjective {
    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient at `x` into `out`.
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// Directional derivative `<grad f(x + gamma d), d>`.
    fn slope(&self, x: &[f64], d: &[f64], gamma: f64) -> f64;
}
