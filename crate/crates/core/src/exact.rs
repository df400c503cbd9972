//! Exhaustive enumeration: exact `log Z` and exact marginals for models
//! whose joint state space fits under a cap.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::marginals::{BlockVector, MarginalVector};
use crate::math::exp;
use crate::mrf::{Assignment, BlockLayout, MarkovRandomField};

/// Default cap on the number of joint states visited by enumeration.
pub const DEFAULT_STATE_CAP: u128 = 1 << 24;

pub(crate) fn check_cap(layout: &BlockLayout, cap: u128) -> Result<()> {
    let states = layout.state_space();
    if states > cap {
        return Err(Error::StateSpaceCap { states, cap });
    }
    Ok(())
}

/// Calls `visit` on every joint assignment in lexicographic order (the last
/// variable changes fastest).
pub fn for_each_assignment(cards: &[usize], mut visit: impl FnMut(&[usize])) {
    let mut x = vec![0usize; cards.len()];
    loop {
        visit(&x);
        let mut i = cards.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            x[i] += 1;
            if x[i] < cards[i] {
                break;
            }
            x[i] = 0;
        }
    }
}

/// Exact `log Z` and marginals from a single enumeration pass.
pub fn exact_inference(mrf: &MarkovRandomField, cap: u128) -> Result<(f64, MarginalVector)> {
    let layout = mrf.layout();
    check_cap(layout, cap)?;
    let theta = mrf.theta();

    // first pass: max energy for shifting
    let mut max = f64::NEG_INFINITY;
    let mut a = Assignment(vec![0; mrf.num_vars()]);
    for_each_assignment(layout.cardinalities(), |x| {
        a.0.copy_from_slice(x);
        max = max.max(theta.eval_assignment(&a));
    });

    let mut acc = BlockVector::zeros(layout);
    let mut total = 0.0;
    for_each_assignment(layout.cardinalities(), |x| {
        a.0.copy_from_slice(x);
        let w = exp(theta.eval_assignment(&a) - max);
        total += w;
        acc.add_vertex(&a, w);
    });
    for v in acc.as_mut_slice() {
        *v /= total;
    }
    Ok((max + crate::math::ln(total), acc))
}

/// `log sum_x exp(<theta, vertex(x)>)` by enumeration.
pub fn brute_force_logz(mrf: &MarkovRandomField, cap: u128) -> Result<f64> {
    let layout = mrf.layout();
    check_cap(layout, cap)?;
    let theta = mrf.theta();
    let mut energies = Vec::new();
    let mut a = Assignment(vec![0; mrf.num_vars()]);
    for_each_assignment(layout.cardinalities(), |x| {
        a.0.copy_from_slice(x);
        energies.push(theta.eval_assignment(&a));
    });
    Ok(crate::math::log_sum_exp(&energies))
}

/// Exact node and edge marginals by enumeration.
pub fn brute_force_marginals(mrf: &MarkovRandomField, cap: u128) -> Result<MarginalVector> {
    exact_inference(mrf, cap).map(|(_, mu)| mu)
}
