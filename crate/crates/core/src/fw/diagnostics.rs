//! Closed-form constants of the adaptive-contraction convergence rate, for
//! reporting only.

use crate::error::{Error, Result};
use crate::math::ln;
use crate::mrf::MarkovRandomField;
use crate::objective::{lipschitz_base, uniform_gap_bound};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    /// `L = 4 |V| max_c n_c`; the gradient is `L / delta`-Lipschitz on the
    /// contraction by `delta`.
    pub lipschitz: f64,
    /// Bound on the negative uniform gap, `2 ||theta||_{1,inf}`.
    pub uniform_gap_bound: f64,
    /// Eight times the above, the constant the rate statement uses.
    pub rate_bound: f64,
    /// Curvature constant `L diam^2 = 16 |V| max_c n_c`.
    pub curvature: f64,
    pub delta_init: f64,
    /// Suboptimality above which the geometric stage applies.
    pub stage_one_threshold: f64,
    /// Suboptimality below which the slowest stage applies.
    pub stage_three_threshold: f64,
    /// Bound on the iterations to leave the geometric stage, when the
    /// initial suboptimality is known.
    pub stage_two_start: Option<u64>,
    /// Bound on the iterations to reach the slowest stage.
    pub stage_three_start: Option<u64>,
}

/// Constants for `mrf` with initial contraction `delta_init` and, if known,
/// initial suboptimality `initial_suboptimality`.
pub fn diagnostics_rate_constants(
    mrf: &MarkovRandomField,
    delta_init: f64,
    initial_suboptimality: Option<f64>,
) -> Result<RateConstants> {
    if !(delta_init > 0.0 && delta_init <= 0.25) {
        return Err(Error::DeltaOutOfRange(delta_init));
    }
    let lipschitz = lipschitz_base(mrf);
    let curvature = 4.0 * lipschitz;
    let b = uniform_gap_bound(mrf);
    let rate_bound = 8.0 * b;
    let d0 = delta_init;
    let stage_two_start = initial_suboptimality.map(|h0| {
        if h0 <= 0.0 {
            0
        } else {
            let k = libm::ceil(ln(h0 * d0 / curvature) / core::f64::consts::LN_2);
            if k > 0.0 {
                k as u64
            } else {
                0
            }
        }
    });
    let stage_three_start = if rate_bound > 0.0 {
        let extra = libm::ceil(8.0 * curvature / (rate_bound * d0 * d0)) - 4.0;
        let extra = if extra > 0.0 { extra as u64 } else { 0 };
        stage_two_start.map(|k0| k0 + extra)
    } else {
        None
    };
    Ok(RateConstants {
        lipschitz,
        uniform_gap_bound: b,
        rate_bound,
        curvature,
        delta_init,
        stage_one_threshold: (rate_bound * d0).max(2.0 * curvature / d0),
        stage_three_threshold: rate_bound * d0,
        stage_two_start,
        stage_three_start,
    })
}
