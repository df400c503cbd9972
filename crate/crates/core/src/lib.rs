//! Marginal inference in pairwise discrete Markov random fields by
//! maximising the tree-reweighted (TRW) upper bound on `log Z` over the
//! marginal polytope.
//!
//! The optimiser runs Frank-Wolfe over contractions `(1 - delta) M + delta u0`
//! of the marginal polytope, with a MAP solver as the linear oracle, a fully
//! corrective step over the visited vertices (away-step Frank-Wolfe), an
//! adaptive rule for `delta`, and an outer Frank-Wolfe loop over the spanning
//! tree polytope for the edge appearance probabilities.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod exact;
pub mod fw;
pub mod marginals;
mod math;
pub mod mrf;
pub mod objective;
pub mod oracle;
pub mod tree;

#[cfg(test)]
mod tests_support;

pub use error::{Error, Result};
pub use marginals::{
    block_norm_inf1, contract, uniform_point, vertex_from_assignment, BlockVector, MarginalVector,
    PotentialVector,
};
pub use math::{entropy, log_sum_exp};
pub use mrf::{Assignment, BlockLayout, MarkovRandomField};
pub use objective::{trw_gradient, trw_value, EdgeAppearance, EntropyCoefficients, TrwObjective};
pub use oracle::{BruteForceOracle, IcmOracle, MapOracle, OracleResult, Portfolio};
