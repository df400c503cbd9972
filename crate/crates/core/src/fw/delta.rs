//! Adaptive contraction updates and the matching change of barycentric
//! coordinates.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One adaptive update of the contraction amount after a MAP call.
///
/// Only shrinks when the uniform gap is negative: the proposal is
/// `fw_gap / (-4 uniform_gap)`, and an accepted proposal shrinks by at
/// least a factor of two.
pub fn adaptive_delta_update(fw_gap: f64, uniform_gap: f64, delta_prev: f64) -> Result<f64> {
    if !(uniform_gap < 0.0) {
        return Ok(delta_prev);
    }
    if !(fw_gap > 0.0) {
        return Err(Error::Domain(format!(
            "nonpositive gap {fw_gap} with negative uniform gap {uniform_gap}; the MAP oracle missed a descent vertex"
        )));
    }
    let proposal = fw_gap / (-4.0 * uniform_gap);
    if proposal < delta_prev {
        Ok(proposal.min(delta_prev / 2.0))
    } else {
        Ok(delta_prev)
    }
}

/// Coordinates of the same point after the contraction goes from
/// `delta_old` to `delta_new`: vertex weights scale by
/// `(1 - delta_old) / (1 - delta_new)` and the uniform point takes the rest.
pub fn rescale_alpha(alpha: &[f64], delta_old: f64, delta_new: f64, u0_index: usize) -> Result<Vec<f64>> {
    if delta_new > delta_old {
        return Err(Error::Domain(format!("contraction can only shrink, got {delta_old} -> {delta_new}")));
    }
    if u0_index >= alpha.len() {
        return Err(Error::Domain(format!("uniform index {u0_index} out of {} coordinates", alpha.len())));
    }
    let scale = (1.0 - delta_old) / (1.0 - delta_new);
    let mut out: Vec<f64> = alpha.iter().map(|&a| a * scale).collect();
    let rest: f64 = out.iter().enumerate().filter(|&(i, _)| i != u0_index).map(|(_, &a)| a).sum();
    out[u0_index] = 1.0 - rest;
    Ok(out)
}
