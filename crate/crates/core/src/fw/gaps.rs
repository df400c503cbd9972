//! Duality gaps over the marginal polytope, towards the uniform point, and
//! over its contraction.

use crate::error::Result;
use crate::marginals::{dot, BlockVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaps {
    /// `<-grad, s - x>`, the gap over the uncontracted polytope.
    pub fw: f64,
    /// `<-grad, u0 - x>`.
    pub uniform: f64,
    /// `(1 - delta) fw + delta uniform`, the gap over the contraction.
    pub contracted: f64,
}

/// Gaps at `x` for the gradient `gradient` of the minimised function and the
/// Frank-Wolfe vertex `fw_vertex`.
pub fn compute_gaps(
    gradient: &BlockVector,
    x: &BlockVector,
    fw_vertex: &BlockVector,
    u0: &BlockVector,
    delta: f64,
) -> Result<Gaps> {
    gradient.check_structure(x)?;
    gradient.check_structure(fw_vertex)?;
    gradient.check_structure(u0)?;
    let g = gradient.as_slice();
    let gx = dot(g, x.as_slice());
    let fw = gx - dot(g, fw_vertex.as_slice());
    let uniform = gx - dot(g, u0.as_slice());
    Ok(Gaps { fw, uniform, contracted: (1.0 - delta) * fw + delta * uniform })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::{contract, uniform_point, vertex_from_assignment};
    use crate::mrf::Assignment;
    use crate::tests_support::grid_mrf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gap_at_the_vertex_itself_is_zero() {
        let mrf = grid_mrf(2, 2);
        let s = vertex_from_assignment(&mrf, &Assignment(alloc::vec![0, 1, 1, 0])).unwrap();
        let g = BlockVector::from_vec(mrf.layout(), (0..s.len()).map(|i| i as f64 * 0.1).collect()).unwrap();
        let u0 = uniform_point(&mrf);
        assert_eq!(compute_gaps(&g, &s, &s, &u0, 0.1).unwrap().fw, 0.0);
        let at_u0 = compute_gaps(&g, &u0, &s, &u0, 0.1).unwrap();
        assert_eq!(at_u0.uniform, 0.0);
        assert_eq!(at_u0.contracted, 0.9 * at_u0.fw);
    }

    #[test]
    fn decomposition_matches_the_contracted_vertex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mrf = grid_mrf(2, 2);
        let u0 = uniform_point(&mrf);
        for _ in 0..20 {
            let a = Assignment((0..4).map(|_| rng.gen_range(0..2)).collect());
            let b = Assignment((0..4).map(|_| rng.gen_range(0..2)).collect());
            let x = contract(&vertex_from_assignment(&mrf, &a).unwrap(), 0.3, &u0).unwrap();
            let s = vertex_from_assignment(&mrf, &b).unwrap();
            let g = BlockVector::from_vec(mrf.layout(), (0..s.len()).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
            let delta = rng.gen_range(0.0..0.25);
            let gaps = compute_gaps(&g, &x, &s, &u0, delta).unwrap();
            let s_delta = contract(&s, delta, &u0).unwrap();
            let direct: f64 = g.as_slice().iter().zip(x.as_slice().iter().zip(s_delta.as_slice())).map(|(g, (x, s))| -g * (s - x)).sum();
            assert!((direct - gaps.contracted).abs() < 1e-12);
        }
    }
}
