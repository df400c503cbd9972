//! Exact line search for convex one-dimensional restrictions, by bisection on
//! the sign of the directional derivative.

use alloc::vec::Vec;

use super::ConvexObjective;

const MAX_BISECTIONS: usize = 64;
const INTERVAL_TOL: f64 = 1e-10;

/// A convex function of the step size.
pub trait LineFunction {
    fn value(&self, gamma: f64) -> f64;
    fn slope(&self, gamma: f64) -> f64;
}

/// Minimises `phi` over `[0, gamma_max]`. A NaN slope counts as positive,
/// so a derivative that blows up at the far end only pushes the search back.
/// The returned step never increases `phi` over `phi(0)`.
pub fn line_search(phi: &impl LineFunction, gamma_max: f64) -> f64 {
    if !(gamma_max > 0.0) {
        return 0.0;
    }
    if !(phi.slope(0.0) < 0.0) {
        return 0.0;
    }
    let end = phi.slope(gamma_max);
    let gamma = if end <= 0.0 {
        gamma_max
    } else {
        let (mut lo, mut hi) = (0.0, gamma_max);
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= INTERVAL_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if phi.slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if phi.value(gamma) <= phi.value(0.0) {
        gamma
    } else {
        0.0
    }
}

/// The restriction `gamma -> f(x + gamma d)`.
pub struct Ray<'a, O: ?Sized> {
    pub objective: &'a O,
    pub x: &'a [f64],
    pub d: &'a [f64],
}

impl<O: ConvexObjective + ?Sized> LineFunction for Ray<'_, O> {
    fn value(&self, gamma: f64) -> f64 {
        let p: Vec<f64> = self.x.iter().zip(self.d).map(|(&a, &b)| a + gamma * b).collect();
        self.objective.value(&p)
    }

    fn slope(&self, gamma: f64) -> f64 {
        self.objective.slope(self.x, self.d, gamma)
    }
}

/// Line search for `objective` from `x` along `d`; zero when `d` vanishes.
pub fn line_search_along<O: ConvexObjective + ?Sized>(objective: &O, x: &[f64], d: &[f64], gamma_max: f64) -> f64 {
    if d.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    line_search(&Ray { objective, x, d }, gamma_max)
}
