//! Block-structured vectors: pseudomarginals, log-potentials and gradients.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mrf::{Assignment, BlockLayout, MarkovRandomField};

/// Tolerance on block normalisation.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance on the local consistency (marginalisation) constraints.
pub const CONSISTENCY_TOL: f64 = 1e-10;

/// A flat vector split into one block per node and one per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    layout: Arc<BlockLayout>,
    data: Vec<f64>,
}

/// Pseudomarginals `mu`: one distribution per node and per edge.
pub type MarginalVector = BlockVector;
/// Perturbed potentials (MAP objectives, gradients).
pub type PotentialVector = BlockVector;

impl BlockVector {
    pub(crate) fn from_parts(layout: Arc<BlockLayout>, data: Vec<f64>) -> Self {
        debug_assert_eq!(layout.dim(), data.len());
        Self { layout, data }
    }

    pub fn zeros(layout: &Arc<BlockLayout>) -> Self {
        Self { layout: layout.clone(), data: vec![0.0; layout.dim()] }
    }

    /// Wraps `data` after checking its length against `layout`.
    pub fn from_vec(layout: &Arc<BlockLayout>, data: Vec<f64>) -> Result<Self> {
        if data.len() != layout.dim() {
            return Err(Error::StructureMismatch(format!(
                "vector of length {} for layout of dimension {}",
                data.len(),
                layout.dim()
            )));
        }
        Ok(Self { layout: layout.clone(), data })
    }

    pub fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn node(&self, var: usize) -> &[f64] {
        &self.data[self.layout.node_range(var)]
    }

    pub fn node_mut(&mut self, var: usize) -> &mut [f64] {
        let r = self.layout.node_range(var);
        &mut self.data[r]
    }

    /// Row-major table of edge `e`.
    pub fn edge(&self, e: usize) -> &[f64] {
        &self.data[self.layout.edge_range(e)]
    }

    pub fn edge_mut(&mut self, e: usize) -> &mut [f64] {
        let r = self.layout.edge_range(e);
        &mut self.data[r]
    }

    pub fn block(&self, b: usize) -> &[f64] {
        &self.data[self.layout.block_range(b)]
    }

    pub fn same_structure(&self, other: &BlockVector) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout
    }

    pub(crate) fn check_structure(&self, other: &BlockVector) -> Result<()> {
        if self.same_structure(other) {
            Ok(())
        } else {
            Err(Error::StructureMismatch("block layouts differ".into()))
        }
    }

    pub(crate) fn check_layout(&self, layout: &BlockLayout) -> Result<()> {
        if *self.layout == *layout {
            Ok(())
        } else {
            Err(Error::StructureMismatch("vector does not match the model layout".into()))
        }
    }

    /// Euclidean inner product.
    pub fn dot(&self, other: &BlockVector) -> Result<f64> {
        self.check_structure(other)?;
        Ok(dot(&self.data, &other.data))
    }

    /// `<self, vertex(a)>`: sums one entry per block. `a` must be valid.
    pub fn eval_assignment(&self, a: &Assignment) -> f64 {
        let l = &*self.layout;
        let x = a.values();
        let mut total = 0.0;
        for (var, &s) in x.iter().enumerate() {
            total += self.data[l.node_index(var, s)];
        }
        for (e, &(i, j)) in l.edges().iter().enumerate() {
            total += self.data[l.edge_index(e, x[i], x[j])];
        }
        total
    }

    /// `self += weight * vertex(a)`. `a` must be valid.
    pub fn add_vertex(&mut self, a: &Assignment, weight: f64) {
        add_vertex_to(&self.layout, &mut self.data, a, weight);
    }

    /// Checks nonnegativity, normalisation and local consistency.
    pub fn check_marginal(&self) -> Result<()> {
        let l = &*self.layout;
        if let Some((i, v)) = self.data.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::InvalidMarginals(format!("entry {i} is {v}")));
        }
        for b in 0..l.num_blocks() {
            let s: f64 = self.block(b).iter().sum();
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidMarginals(format!("block {b} sums to {s}")));
            }
        }
        self.check_local_consistency(CONSISTENCY_TOL)
    }

    /// Row sums of every edge block match the first endpoint's block and
    /// column sums match the second's.
    pub fn check_local_consistency(&self, tol: f64) -> Result<()> {
        let l = &*self.layout;
        for (e, &(a, b)) in l.edges().iter().enumerate() {
            let table = self.edge(e);
            let (ca, cb) = (l.card(a), l.card(b));
            for xa in 0..ca {
                let row: f64 = table[xa * cb..(xa + 1) * cb].iter().sum();
                if (row - self.node(a)[xa]).abs() > tol {
                    return Err(Error::InvalidMarginals(format!(
                        "edge {e} row {xa} sums to {row}, node {a} has {}",
                        self.node(a)[xa]
                    )));
                }
            }
            for xb in 0..cb {
                let col: f64 = (0..ca).map(|xa| table[xa * cb + xb]).sum();
                if (col - self.node(b)[xb]).abs() > tol {
                    return Err(Error::InvalidMarginals(format!(
                        "edge {e} column {xb} sums to {col}, node {b} has {}",
                        self.node(b)[xb]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Smallest entry of the vector.
    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn add_vertex_to(layout: &BlockLayout, data: &mut [f64], a: &Assignment, weight: f64) {
    let x = a.values();
    for (var, &s) in x.iter().enumerate() {
        data[layout.node_index(var, s)] += weight;
    }
    for (e, &(i, j)) in layout.edges().iter().enumerate() {
        data[layout.edge_index(e, x[i], x[j])] += weight;
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The marginal-polytope vertex of assignment `a`: indicator blocks.
pub fn vertex_from_assignment(mrf: &MarkovRandomField, a: &Assignment) -> Result<MarginalVector> {
    a.validate(mrf.layout())?;
    let mut v = BlockVector::zeros(mrf.layout());
    v.add_vertex(a, 1.0);
    Ok(v)
}

/// The uniform point `u0`.
pub fn uniform_point(mrf: &MarkovRandomField) -> MarginalVector {
    uniform_for_layout(mrf.layout())
}

pub(crate) fn uniform_for_layout(layout: &Arc<BlockLayout>) -> BlockVector {
    let mut data = Vec::with_capacity(layout.dim());
    for b in 0..layout.num_blocks() {
        let n = layout.block_size(b);
        data.extend(core::iter::repeat_n(1.0 / n as f64, n));
    }
    BlockVector { layout: layout.clone(), data }
}

/// `(1 - delta) mu + delta u0`.
pub fn contract(mu: &MarginalVector, delta: f64, u0: &MarginalVector) -> Result<MarginalVector> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    mu.check_structure(u0)?;
    let data = mu
        .data
        .iter()
        .zip(&u0.data)
        .map(|(m, u)| (1.0 - delta) * m + delta * u)
        .collect();
    Ok(BlockVector { layout: mu.layout.clone(), data })
}

/// `max_c || a_c - b_c ||_1`, the l-inf/l-1 block norm of the difference.
pub fn block_norm_inf1(a: &MarginalVector, b: &MarginalVector) -> Result<f64> {
    a.check_structure(b)?;
    let l = &*a.layout;
    Ok((0..l.num_blocks())
        .map(|blk| {
            a.block(blk)
                .iter()
                .zip(b.block(blk))
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(c0: usize, c1: usize) -> MarkovRandomField {
        MarkovRandomField::new(
            vec![c0, c1],
            vec![(0, 1)],
            vec![vec![0.0; c0], vec![0.0; c1]],
            vec![vec![0.0; c0 * c1]],
        )
        .unwrap()
    }

    fn single(card: usize) -> MarkovRandomField {
        MarkovRandomField::new(vec![card], vec![], vec![vec![0.0; card]], vec![]).unwrap()
    }

    fn all_assignments(cards: &[usize]) -> Vec<Assignment> {
        let mut out = vec![Assignment(vec![])];
        for &c in cards {
            out = out
                .into_iter()
                .flat_map(|a| {
                    (0..c).map(move |s| {
                        let mut v = a.0.clone();
                        v.push(s);
                        Assignment(v)
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn vertex_of_binary_pair() {
        let mrf = pair(2, 2);
        let v = vertex_from_assignment(&mrf, &Assignment(vec![0, 1])).unwrap();
        assert_eq!(v.node(0), &[1.0, 0.0]);
        assert_eq!(v.node(1), &[0.0, 1.0]);
        assert_eq!(v.edge(0), &[0.0, 1.0, 0.0, 0.0]);
        let v = vertex_from_assignment(&mrf, &Assignment(vec![0, 0])).unwrap();
        assert_eq!(v.edge(0), &[1.0, 0.0, 0.0, 0.0]);
        v.check_marginal().unwrap();
    }

    #[test]
    fn vertex_rejects_out_of_range_state() {
        let mrf = pair(2, 2);
        let err = vertex_from_assignment(&mrf, &Assignment(vec![2, 0])).unwrap_err();
        assert_eq!(err, Error::StateOutOfRange { var: 0, value: 2, card: 2 });
    }

    #[test]
    fn uniform_points() {
        assert_eq!(uniform_point(&single(2)).as_slice(), &[0.5, 0.5]);
        let u = uniform_point(&single(3));
        assert!(u.as_slice().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-16));
        let u = uniform_point(&pair(2, 2));
        assert_eq!(u.edge(0), &[0.25; 4]);
        u.check_marginal().unwrap();
        uniform_point(&pair(2, 3)).check_marginal().unwrap();
    }

    #[test]
    fn contract_endpoints_and_midpoint() {
        let mrf = single(2);
        let u0 = uniform_point(&mrf);
        let v = vertex_from_assignment(&mrf, &Assignment(vec![0])).unwrap();
        assert_eq!(contract(&v, 0.0, &u0).unwrap(), v);
        assert_eq!(contract(&v, 1.0, &u0).unwrap(), u0);
        assert_eq!(contract(&v, 0.5, &u0).unwrap().as_slice(), &[0.75, 0.25]);
        assert_eq!(contract(&v, 1.5, &u0).unwrap_err(), Error::DeltaOutOfRange(1.5));
        assert!(contract(&v, -0.1, &u0).is_err());
    }

    #[test]
    fn block_norm_examples() {
        let mrf = single(2);
        let a = vertex_from_assignment(&mrf, &Assignment(vec![0])).unwrap();
        let b = vertex_from_assignment(&mrf, &Assignment(vec![1])).unwrap();
        assert_eq!(block_norm_inf1(&a, &a).unwrap(), 0.0);
        assert_eq!(block_norm_inf1(&a, &b).unwrap(), 2.0);
        let other = uniform_point(&pair(2, 2));
        assert!(block_norm_inf1(&a, &other).is_err());
    }

    #[test]
    fn check_marginal_detects_violations() {
        let mrf = pair(2, 2);
        let mut v = uniform_point(&mrf);
        v.edge_mut(0)[0] += 0.1;
        v.edge_mut(0)[1] -= 0.1;
        assert!(matches!(v.check_marginal(), Err(Error::InvalidMarginals(_))));
        let mut v = uniform_point(&mrf);
        v.node_mut(0)[0] = 0.7;
        assert!(v.check_marginal().is_err());
    }

    #[test]
    fn diameter_is_at_most_two_exhaustively() {
        // every connected graph on 4 binary nodes below is checked over all vertex pairs
        let graphs: Vec<Vec<(usize, usize)>> = vec![
            vec![(0, 1), (1, 2), (2, 3)],
            vec![(0, 1), (0, 2), (0, 3)],
            vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        ];
        for edges in graphs {
            let m = edges.len();
            let mrf = MarkovRandomField::new(vec![2; 4], edges, vec![vec![0.0; 2]; 4], vec![vec![0.0; 4]; m])
                .unwrap();
            let verts: Vec<_> = all_assignments(mrf.cardinalities())
                .iter()
                .map(|a| vertex_from_assignment(&mrf, a).unwrap())
                .collect();
            for a in &verts {
                a.check_marginal().unwrap();
                for b in &verts {
                    assert!(block_norm_inf1(a, b).unwrap() <= 2.0);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn vertices_are_valid_marginals(c0 in 1usize..4, c1 in 1usize..4, s0 in 0usize..4, s1 in 0usize..4) {
            let mrf = pair(c0, c1);
            let a = Assignment(vec![s0 % c0, s1 % c1]);
            let v = vertex_from_assignment(&mrf, &a).unwrap();
            prop_assert!(v.check_marginal().is_ok());
        }

        #[test]
        fn contract_is_affine(t in 0.0f64..1.0, delta in 0.0f64..1.0, s in 0usize..4, r in 0usize..4) {
            let mrf = pair(2, 2);
            let u0 = uniform_point(&mrf);
            let a = vertex_from_assignment(&mrf, &Assignment(vec![s % 2, s / 2])).unwrap();
            let b = vertex_from_assignment(&mrf, &Assignment(vec![r % 2, r / 2])).unwrap();
            let mix: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let mix = BlockVector::from_vec(mrf.layout(), mix).unwrap();
            let lhs = contract(&mix, delta, &u0).unwrap();
            let ca = contract(&a, delta, &u0).unwrap();
            let cb = contract(&b, delta, &u0).unwrap();
            for i in 0..lhs.len() {
                let rhs = t * ca.as_slice()[i] + (1.0 - t) * cb.as_slice()[i];
                prop_assert!((lhs.as_slice()[i] - rhs).abs() < 1e-14);
                prop_assert!(lhs.as_slice()[i] >= delta * u0.as_slice()[i] - 1e-15);
            }
        }

        #[test]
        fn block_norm_is_a_metric(s in 0usize..8, r in 0usize..8, q in 0usize..8) {
            let mrf = MarkovRandomField::new(vec![2; 3], vec![(0, 1), (1, 2)], vec![vec![0.0; 2]; 3], vec![vec![0.0; 4]; 2]).unwrap();
            let v = |k: usize| vertex_from_assignment(&mrf, &Assignment(vec![k & 1, (k >> 1) & 1, (k >> 2) & 1])).unwrap();
            let (a, b, c) = (v(s), v(r), v(q));
            let ab = block_norm_inf1(&a, &b).unwrap();
            prop_assert_eq!(ab, block_norm_inf1(&b, &a).unwrap());
            prop_assert!(ab <= block_norm_inf1(&a, &c).unwrap() + block_norm_inf1(&c, &b).unwrap() + 1e-15);
            prop_assert_eq!(ab == 0.0, s == r);
        }
    }
}
