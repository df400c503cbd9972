//! The tree-reweighted (TRW) objective, its gradient and the closed-form
//! constants used for convergence diagnostics.
//!
//! `TRW(mu) = <theta, mu> + sum_i K_i H(mu_i) + sum_ij rho_ij H(mu_ij)` with
//! `K_i = 1 - sum_{j ~ i} rho_ij`. The optimiser minimises `f = -TRW`, so the
//! gradient exposed here is that of `f`: `-theta_c + K_c (1 + ln mu_c)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fw::ConvexObjective;
use crate::marginals::{BlockVector, MarginalVector, PotentialVector};
use crate::math::{ln, xlogx};
use crate::mrf::{BlockLayout, MarkovRandomField};

/// Tolerance on `sum rho = |V| - 1`.
pub const EDGE_SUM_TOL: f64 = 1e-9;

/// Edge appearance probabilities, a point of the spanning tree polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAppearance(Vec<f64>);

impl EdgeAppearance {
    /// Validates range and edge count against `mrf`.
    pub fn new(mrf: &MarkovRandomField, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != mrf.num_edges() {
            return Err(Error::InvalidEdgeAppearance(format!(
                "{} probabilities for {} edges",
                rho.len(),
                mrf.num_edges()
            )));
        }
        if let Some((e, v)) = rho.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidEdgeAppearance(format!("rho[{e}] = {v} outside [0, 1]")));
        }
        let sum: f64 = rho.iter().sum();
        let expected = (mrf.num_vars() - 1) as f64;
        if (sum - expected).abs() > EDGE_SUM_TOL {
            return Err(Error::InvalidEdgeAppearance(format!(
                "probabilities sum to {sum}, spanning trees have {expected} edges"
            )));
        }
        Ok(Self(rho))
    }

    /// The indicator of a spanning tree given per-edge membership.
    pub fn from_tree(mrf: &MarkovRandomField, in_tree: &[bool]) -> Result<Self> {
        Self::new(mrf, in_tree.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Entropy weights: `K_i` per node and `K_ij = rho_ij` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCoefficients {
    pub node: Vec<f64>,
    pub edge: Vec<f64>,
}

pub fn entropy_coefficients(mrf: &MarkovRandomField, rho: &EdgeAppearance) -> EntropyCoefficients {
    let mut node = alloc::vec![1.0; mrf.num_vars()];
    for (e, &(a, b)) in mrf.edges().iter().enumerate() {
        node[a] -= rho.0[e];
        node[b] -= rho.0[e];
    }
    EntropyCoefficients { node, edge: rho.0.clone() }
}

impl EntropyCoefficients {
    /// `K_c` repeated over every entry of block `c`.
    pub fn per_entry(&self, layout: &BlockLayout) -> Vec<f64> {
        let mut out = Vec::with_capacity(layout.dim());
        for (b, &k) in self.node.iter().chain(self.edge.iter()).enumerate() {
            out.extend(core::iter::repeat_n(k, layout.block_size(b)));
        }
        out
    }
}

/// `f = -TRW` over flat pseudomarginal arrays, for the Frank-Wolfe machinery.
#[derive(Debug, Clone)]
pub struct TrwObjective {
    theta: Vec<f64>,
    coeff: Vec<f64>,
}

impl TrwObjective {
    pub fn new(mrf: &MarkovRandomField, rho: &EdgeAppearance) -> Self {
        let coeff = entropy_coefficients(mrf, rho).per_entry(mrf.layout());
        Self { theta: mrf.theta().as_slice().to_vec(), coeff }
    }

    /// The TRW value (`-f`).
    pub fn trw(&self, x: &[f64]) -> f64 {
        -self.value(x)
    }
}

impl ConvexObjective for TrwObjective {
    fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.theta)
            .zip(&self.coeff)
            .map(|((&m, &t), &k)| k * xlogx(m) - t * m)
            .sum()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (((g, &m), &t), &k) in out.iter_mut().zip(x).zip(&self.theta).zip(&self.coeff) {
            *g = k * (1.0 + ln(m)) - t;
        }
    }

    fn slope(&self, x: &[f64], d: &[f64], gamma: f64) -> f64 {
        let mut s = 0.0;
        for (((&xi, &di), &t), &k) in x.iter().zip(d).zip(&self.theta).zip(&self.coeff) {
            if di != 0.0 {
                s += di * (k * (1.0 + ln(xi + gamma * di)) - t);
            }
        }
        s
    }
}

/// Evaluates `TRW(mu; theta, rho)`; finite on the whole local polytope.
pub fn trw_value(mu: &MarginalVector, mrf: &MarkovRandomField, rho: &EdgeAppearance) -> Result<f64> {
    check_inputs(mu, mrf, rho)?;
    let k = entropy_coefficients(mrf, rho);
    let l = mrf.layout();
    let mut total = mu.dot(mrf.theta())?;
    for i in 0..l.num_vars() {
        total -= k.node[i] * mu.node(i).iter().map(|&v| xlogx(v)).sum::<f64>();
    }
    for e in 0..l.num_edges() {
        total -= k.edge[e] * mu.edge(e).iter().map(|&v| xlogx(v)).sum::<f64>();
    }
    Ok(total)
}

/// Gradient of `f = -TRW` at a strictly positive `mu`.
pub fn trw_gradient(
    mu: &MarginalVector,
    mrf: &MarkovRandomField,
    rho: &EdgeAppearance,
) -> Result<PotentialVector> {
    check_inputs(mu, mrf, rho)?;
    if let Some((index, &value)) = mu.as_slice().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::BoundaryGradient { index, value });
    }
    let obj = TrwObjective::new(mrf, rho);
    let mut g = BlockVector::zeros(mrf.layout());
    obj.gradient(mu.as_slice(), g.as_mut_slice());
    Ok(g)
}

fn check_inputs(mu: &MarginalVector, mrf: &MarkovRandomField, rho: &EdgeAppearance) -> Result<()> {
    mu.check_layout(mrf.layout())?;
    if rho.len() != mrf.num_edges() {
        return Err(Error::StructureMismatch(format!(
            "{} edge probabilities for {} edges",
            rho.len(),
            mrf.num_edges()
        )));
    }
    Ok(())
}

/// `4 |V| max_c n_c`, the growth constant of the gradient's Lipschitz bound.
pub fn lipschitz_base(mrf: &MarkovRandomField) -> f64 {
    4.0 * mrf.num_vars() as f64 * mrf.layout().max_block_size() as f64
}

/// Lipschitz bound `L / delta` on the gradient over the contraction by
/// `delta`, measured in the l-inf/l-1 block norm and its dual.
pub fn lipschitz_growth_bound(mrf: &MarkovRandomField, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    Ok(lipschitz_base(mrf) / delta)
}

/// `sum_c max_x |theta_c(x)|`.
pub fn theta_norm_1_inf(mrf: &MarkovRandomField) -> f64 {
    let theta = mrf.theta();
    (0..mrf.layout().num_blocks())
        .map(|b| theta.block(b).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .sum()
}

/// `sum |theta|` over every entry.
pub fn theta_norm_1(mrf: &MarkovRandomField) -> f64 {
    mrf.theta().as_slice().iter().map(|v| v.abs()).sum()
}

/// `sigma * theta_l1 + 2 sigma k_tilde max(-ln(2 sigma), 1)`.
pub fn modulus_of_continuity_with(sigma: f64, theta_l1: f64, k_tilde: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    Ok(sigma * theta_l1 + 2.0 * sigma * k_tilde * (-ln(2.0 * sigma)).max(1.0))
}

/// Modulus of continuity of the TRW objective over the marginal polytope in
/// the l-inf norm, with `K~ = 4 |V| max_c n_c`.
pub fn modulus_of_continuity(sigma: f64, mrf: &MarkovRandomField) -> Result<f64> {
    modulus_of_continuity_with(sigma, theta_norm_1(mrf), lipschitz_base(mrf))
}

/// Bound on the negative uniform gap: `2 sum_c max_x |theta_c(x)|`.
pub fn uniform_gap_bound(mrf: &MarkovRandomField) -> f64 {
    2.0 * theta_norm_1_inf(mrf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::marginals::{uniform_point, vertex_from_assignment};
    use crate::mrf::Assignment;
    use core::f64::consts::{E, LN_2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(theta: [f64; 2]) -> MarkovRandomField {
        MarkovRandomField::new(vec![2], vec![], vec![theta.to_vec()], vec![]).unwrap()
    }

    fn random_mrf(rng: &mut ChaCha8Rng, cards: Vec<usize>, edges: Vec<(usize, usize)>) -> MarkovRandomField {
        let nodes = cards.iter().map(|&c| (0..c).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let tables = edges
            .iter()
            .map(|&(a, b)| (0..cards[a] * cards[b]).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        MarkovRandomField::new(cards, edges, nodes, tables).unwrap()
    }

    /// A random strictly positive point of the local polytope built from a
    /// product distribution per edge perturbed along a consistent direction.
    fn random_local_point(rng: &mut ChaCha8Rng, mrf: &MarkovRandomField) -> MarginalVector {
        // mixture of vertices is in M (hence in L) and strictly positive once mixed with u0
        let mut mu = uniform_point(mrf);
        let w0: f64 = rng.gen_range(0.05..0.5);
        for v in mu.as_mut_slice() {
            *v *= w0;
        }
        let k = 6;
        let mut weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let s: f64 = weights.iter().sum();
        for w in &mut weights {
            *w *= (1.0 - w0) / s;
        }
        for w in weights {
            let a = Assignment(mrf.cardinalities().iter().map(|&c| rng.gen_range(0..c)).collect());
            mu.add_vertex(&a, w);
        }
        mu
    }

    #[test]
    fn entropy_coefficient_examples() {
        let pair = MarkovRandomField::new(vec![2, 2], vec![(0, 1)], vec![vec![0.0; 2]; 2], vec![vec![0.0; 4]]).unwrap();
        let k = entropy_coefficients(&pair, &EdgeAppearance::new(&pair, vec![1.0]).unwrap());
        assert_eq!(k.node, vec![0.0, 0.0]);
        assert_eq!(k.edge, vec![1.0]);

        let star = MarkovRandomField::new(
            vec![2; 4],
            vec![(0, 1), (0, 2), (0, 3)],
            vec![vec![0.0; 2]; 4],
            vec![vec![0.0; 4]; 3],
        )
        .unwrap();
        let k = entropy_coefficients(&star, &EdgeAppearance::new(&star, vec![1.0; 3]).unwrap());
        assert_eq!(k.node[0], -2.0);

        let tri = MarkovRandomField::new(
            vec![2; 3],
            vec![(0, 1), (1, 2), (0, 2)],
            vec![vec![0.0; 2]; 3],
            vec![vec![0.0; 4]; 3],
        )
        .unwrap();
        let k = entropy_coefficients(&tri, &EdgeAppearance::new(&tri, vec![2.0 / 3.0; 3]).unwrap());
        for ki in k.node {
            assert!((ki + 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_appearance_validation() {
        let tri = MarkovRandomField::new(
            vec![2; 3],
            vec![(0, 1), (1, 2), (0, 2)],
            vec![vec![0.0; 2]; 3],
            vec![vec![0.0; 4]; 3],
        )
        .unwrap();
        assert!(EdgeAppearance::new(&tri, vec![1.0, 1.0, 1.0]).is_err());
        assert!(EdgeAppearance::new(&tri, vec![1.5, 0.5, 0.0]).is_err());
        assert!(EdgeAppearance::new(&tri, vec![1.0, 1.0]).is_err());
        assert!(EdgeAppearance::new(&tri, vec![1.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn value_at_uniform_single_node_is_ln2() {
        let mrf = single([0.0, 0.0]);
        let rho = EdgeAppearance::new(&mrf, vec![]).unwrap();
        let v = trw_value(&uniform_point(&mrf), &mrf, &rho).unwrap();
        assert!((v - LN_2).abs() < 1e-15);
        let g = trw_gradient(&uniform_point(&mrf), &mrf, &rho).unwrap();
        assert_eq!(g.as_slice(), &[1.0 + 0.5f64.ln(), 1.0 + 0.5f64.ln()]);
    }

    #[test]
    fn value_at_vertex_is_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mrf = random_mrf(&mut rng, vec![2, 3, 2], vec![(0, 1), (1, 2), (0, 2)]);
        let rho = EdgeAppearance::new(&mrf, vec![2.0 / 3.0; 3]).unwrap();
        for s in 0..12 {
            let a = Assignment(vec![s % 2, (s / 2) % 3, s / 6]);
            let v = vertex_from_assignment(&mrf, &a).unwrap();
            assert_eq!(trw_value(&v, &mrf, &rho).unwrap(), mrf.energy(&a).unwrap());
        }
    }

    #[test]
    fn gradient_refuses_boundary_points() {
        let mrf = single([0.0, 1.0]);
        let rho = EdgeAppearance::new(&mrf, vec![]).unwrap();
        let v = vertex_from_assignment(&mrf, &Assignment(vec![0])).unwrap();
        assert_eq!(trw_gradient(&v, &mrf, &rho).unwrap_err(), Error::BoundaryGradient { index: 1, value: 0.0 });
        assert!(trw_value(&v, &mrf, &rho).unwrap().is_finite());
    }

    #[test]
    fn uniform_is_stationary_for_the_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mrf = random_mrf(&mut rng, vec![2, 2, 3, 2], vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
        let rho = EdgeAppearance::new(&mrf, vec![0.75; 4]).unwrap();
        let u0 = uniform_point(&mrf);
        let g = trw_gradient(&u0, &mrf, &rho).unwrap();
        for _ in 0..20 {
            let v = random_local_point(&mut rng, &mrf);
            let lhs: f64 = g.as_slice().iter().zip(v.as_slice()).zip(u0.as_slice()).map(|((g, v), u)| g * (v - u)).sum();
            let rhs: f64 = -mrf.theta().as_slice().iter().zip(v.as_slice()).zip(u0.as_slice()).map(|((t, v), u)| t * (v - u)).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn gradient_matches_central_differences_on_2x2_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mrf = random_mrf(&mut rng, vec![2; 4], vec![(0, 1), (2, 3), (0, 2), (1, 3)]);
        let rho = EdgeAppearance::new(&mrf, vec![0.75; 4]).unwrap();
        let h = 1e-6;
        for _ in 0..10 {
            let mu = random_local_point(&mut rng, &mrf);
            let g = trw_gradient(&mu, &mrf, &rho).unwrap();
            for i in 0..mu.len() {
                let mut plus = mu.clone();
                plus.as_mut_slice()[i] += h;
                let mut minus = mu.clone();
                minus.as_mut_slice()[i] -= h;
                let fd = -(trw_value(&plus, &mrf, &rho).unwrap() - trw_value(&minus, &mrf, &rho).unwrap()) / (2.0 * h);
                let an = g.as_slice()[i];
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "coord {i}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn trw_is_concave_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mrf = random_mrf(&mut rng, vec![2; 4], vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let rho = EdgeAppearance::new(&mrf, vec![0.6; 5]).unwrap();
        for _ in 0..50 {
            let a = random_local_point(&mut rng, &mrf);
            let b = random_local_point(&mut rng, &mrf);
            let t: f64 = rng.gen_range(0.0..1.0);
            let mix: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let mix = BlockVector::from_vec(mrf.layout(), mix).unwrap();
            let lhs = trw_value(&mix, &mrf, &rho).unwrap();
            let rhs = t * trw_value(&a, &mrf, &rho).unwrap() + (1.0 - t) * trw_value(&b, &mrf, &rho).unwrap();
            assert!(lhs >= rhs - 1e-10);
        }
    }

    #[test]
    fn lipschitz_examples() {
        let grid = crate::tests_support::grid_mrf(5, 5);
        assert_eq!(lipschitz_growth_bound(&grid, 1.0).unwrap(), 400.0);
        assert_eq!(lipschitz_growth_bound(&grid, 0.5).unwrap(), 800.0);
        let clique = crate::tests_support::clique_mrf(10);
        assert_eq!(lipschitz_growth_bound(&clique, 1.0).unwrap(), 160.0);
        assert!(lipschitz_growth_bound(&clique, 0.0).is_err());
        assert!(lipschitz_growth_bound(&clique, -1.0).is_err());
    }

    #[test]
    fn modulus_examples() {
        let mrf = single([0.0, 0.0]);
        assert_eq!(modulus_of_continuity(0.0, &mrf).unwrap(), 0.0);
        let sigma = (-1.0f64).exp() / 2.0;
        let w = modulus_of_continuity_with(sigma, 0.0, 4.0).unwrap();
        assert!((w - 4.0 / E).abs() < 1e-15);
        assert!(modulus_of_continuity(-0.1, &mrf).is_err());
        // nondecreasing near zero
        let mut prev = 0.0;
        for k in 1..200 {
            let w = modulus_of_continuity(k as f64 * 1e-3, &mrf).unwrap();
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn modulus_bounds_objective_variation() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mrf = random_mrf(&mut rng, vec![2; 4], vec![(0, 1), (2, 3), (0, 2), (1, 3)]);
        let rho = EdgeAppearance::new(&mrf, vec![0.75; 4]).unwrap();
        for _ in 0..200 {
            let a = random_local_point(&mut rng, &mrf);
            let t: f64 = rng.gen_range(0.0..1.0);
            let b = random_local_point(&mut rng, &mrf);
            // shrink the pair together so that ||a - c||_inf is small
            let c: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (1.0 - t * 0.1) * x + t * 0.1 * y).collect();
            let c = BlockVector::from_vec(mrf.layout(), c).unwrap();
            let sigma = a.as_slice().iter().zip(c.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let diff = (trw_value(&a, &mrf, &rho).unwrap() - trw_value(&c, &mrf, &rho).unwrap()).abs();
            assert!(diff <= modulus_of_continuity(sigma, &mrf).unwrap() + 1e-12);
        }
    }

    #[test]
    fn uniform_gap_bound_examples() {
        let zero = single([0.0, 0.0]);
        assert_eq!(uniform_gap_bound(&zero), 0.0);
        assert_eq!(uniform_gap_bound(&single([-3.0, 1.0])), 6.0);
    }

    #[test]
    fn uniform_gap_bound_holds_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let mrf = if trial % 2 == 0 {
                random_mrf(&mut rng, vec![2, 3, 2], vec![(0, 1), (1, 2), (0, 2)])
            } else {
                random_mrf(&mut rng, vec![2; 4], vec![(0, 1), (1, 2), (2, 3)])
            };
            let rho = if trial % 2 == 0 {
                EdgeAppearance::new(&mrf, vec![2.0 / 3.0; 3]).unwrap()
            } else {
                EdgeAppearance::new(&mrf, vec![1.0; 3]).unwrap()
            };
            let b = uniform_gap_bound(&mrf);
            let u0 = uniform_point(&mrf);
            for _ in 0..10 {
                let mu = random_local_point(&mut rng, &mrf);
                let g = trw_gradient(&mu, &mrf, &rho).unwrap();
                let neg_ug: f64 = g.as_slice().iter().zip(u0.as_slice()).zip(mu.as_slice()).map(|((g, u), m)| g * (u - m)).sum();
                assert!(neg_ug <= b + 1e-12, "{neg_ug} > {b}");
            }
        }
    }

    #[test]
    fn coefficient_mass_bounds() {
        let clique = crate::tests_support::clique_mrf(6);
        let rho = EdgeAppearance::new(&clique, vec![5.0 / 15.0; 15]).unwrap();
        let k = entropy_coefficients(&clique, &rho);
        let n = 6.0;
        assert!(k.node.iter().map(|v| v.abs()).sum::<f64>() <= 3.0 * n);
        assert!(k.edge.iter().map(|v| v.abs()).sum::<f64>() <= n);
    }
}
