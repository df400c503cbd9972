//! The spanning tree polytope: edge mutual information, minimum spanning
//! trees, step updates of the edge appearance probabilities and their
//! Matrix-Tree initialisation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::marginals::{MarginalVector, CONSISTENCY_TOL};
use crate::math::xlogx;
use crate::mrf::{count_components, DisjointSets, MarkovRandomField};
use crate::objective::EdgeAppearance;

/// `H(mu_i) + H(mu_j) - H(mu_ij)` for every edge.
pub fn edges_mutual_information(mu: &MarginalVector) -> Result<Vec<f64>> {
    mu.check_local_consistency(CONSISTENCY_TOL)?;
    let layout = mu.layout();
    let h = |p: &[f64]| -p.iter().map(|&v| xlogx(v)).sum::<f64>();
    Ok(layout
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| h(mu.node(a)) + h(mu.node(b)) - h(mu.edge(e)))
        .collect())
}

/// Per-edge membership of a spanning tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTreeIndicator {
    edge_in_tree: Vec<bool>,
}

impl SpanningTreeIndicator {
    /// Checks that the selected edges form a spanning tree of `mrf`.
    pub fn new(mrf: &MarkovRandomField, edge_in_tree: Vec<bool>) -> Result<Self> {
        if edge_in_tree.len() != mrf.num_edges() {
            return Err(Error::StructureMismatch(format!(
                "{} flags for {} edges",
                edge_in_tree.len(),
                mrf.num_edges()
            )));
        }
        let chosen = edge_in_tree.iter().filter(|&&b| b).count();
        if chosen + 1 != mrf.num_vars() {
            return Err(Error::InvalidEdgeAppearance(format!(
                "{chosen} edges selected, a spanning tree of {} nodes has {}",
                mrf.num_vars(),
                mrf.num_vars() - 1
            )));
        }
        let mut sets = DisjointSets::new(mrf.num_vars());
        for (e, &(a, b)) in mrf.edges().iter().enumerate() {
            if edge_in_tree[e] && !sets.union(a, b) {
                return Err(Error::InvalidEdgeAppearance(format!("edge {e} closes a cycle")));
            }
        }
        Ok(Self { edge_in_tree })
    }

    pub fn edges(&self) -> &[bool] {
        &self.edge_in_tree
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edge_in_tree[e]
    }

    /// The tree as a vertex of the spanning tree polytope.
    pub fn to_edge_appearance(&self, mrf: &MarkovRandomField) -> Result<EdgeAppearance> {
        EdgeAppearance::from_tree(mrf, &self.edge_in_tree)
    }
}

/// Minimum-weight spanning tree by Kruskal; equal weights are taken in edge
/// order.
pub fn min_spanning_tree(mrf: &MarkovRandomField, weights: &[f64]) -> Result<SpanningTreeIndicator> {
    if weights.len() != mrf.num_edges() {
        return Err(Error::StructureMismatch(format!(
            "{} weights for {} edges",
            weights.len(),
            mrf.num_edges()
        )));
    }
    if let Some(e) = weights.iter().position(|w| w.is_nan()) {
        return Err(Error::Domain(format!("weight of edge {e} is NaN")));
    }
    let components = count_components(mrf.num_vars(), mrf.edges());
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    let mut sets = DisjointSets::new(mrf.num_vars());
    let mut chosen = vec![false; weights.len()];
    for e in order {
        let (a, b) = mrf.edges()[e];
        if sets.union(a, b) {
            chosen[e] = true;
        }
    }
    SpanningTreeIndicator::new(mrf, chosen)
}

/// Step size schedule for the Frank-Wolfe update of the edge appearances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoStepSchedule {
    /// `i / (i + 2)`: zero on the first update and tending to one.
    #[default]
    Literal,
    /// `2 / (i + 3)`: the usual decreasing schedule, shifted so that no step
    /// reaches a vertex and the iterate stays in the relative interior.
    Standard,
}

impl RhoStepSchedule {
    pub fn step(self, outer_iter: usize) -> f64 {
        let i = outer_iter as f64;
        match self {
            Self::Literal => i / (i + 2.0),
            Self::Standard => 2.0 / (i + 3.0),
        }
    }
}

/// `rho + step(i) (tree - rho)`.
pub fn rho_fw_update(
    mrf: &MarkovRandomField,
    rho: &EdgeAppearance,
    tree: &SpanningTreeIndicator,
    outer_iter: usize,
    schedule: RhoStepSchedule,
) -> Result<EdgeAppearance> {
    if rho.len() != tree.edges().len() {
        return Err(Error::StructureMismatch(format!(
            "{} probabilities against a tree over {} edges",
            rho.len(),
            tree.edges().len()
        )));
    }
    let step = schedule.step(outer_iter);
    let next = rho
        .as_slice()
        .iter()
        .zip(tree.edges())
        .map(|(&r, &t)| {
            let v = if t { 1.0 } else { 0.0 };
            (r + step * (v - r)).clamp(0.0, 1.0)
        })
        .collect();
    EdgeAppearance::new(mrf, next)
}

/// `1 + sum |theta_ij|` per edge.
pub fn default_matrix_tree_weights(mrf: &MarkovRandomField) -> Vec<f64> {
    (0..mrf.num_edges())
        .map(|e| 1.0 + mrf.edge_potential(e).iter().map(|v| v.abs()).sum::<f64>())
        .collect()
}

/// Probability that each edge belongs to a random spanning tree drawn with
/// probability proportional to the product of its edge weights:
/// `w_ij` times the effective resistance between `i` and `j`.
pub fn matrix_tree_init(mrf: &MarkovRandomField, weights: &[f64]) -> Result<EdgeAppearance> {
    if weights.len() != mrf.num_edges() {
        return Err(Error::StructureMismatch(format!(
            "{} weights for {} edges",
            weights.len(),
            mrf.num_edges()
        )));
    }
    if let Some((e, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::Domain(format!("edge weight {e} is {w}, weights must be positive")));
    }
    let n = mrf.num_vars();
    if n == 1 {
        return EdgeAppearance::new(mrf, Vec::new());
    }
    // Laplacian with the last node grounded
    let m = n - 1;
    let mut lap = vec![0.0; m * m];
    for (&(a, b), &w) in mrf.edges().iter().zip(weights) {
        for &(p, q) in &[(a, a), (b, b)] {
            if p < m {
                lap[p * m + q] += w;
            }
        }
        if a < m && b < m {
            lap[a * m + b] -= w;
            lap[b * m + a] -= w;
        }
    }
    let lu = LuFactors::new(lap, m)?;
    let mut rhs = vec![0.0; m];
    let mut rho = Vec::with_capacity(weights.len());
    for (&(a, b), &w) in mrf.edges().iter().zip(weights) {
        rhs.iter_mut().for_each(|v| *v = 0.0);
        if a < m {
            rhs[a] = 1.0;
        }
        if b < m {
            rhs[b] = -1.0;
        }
        let sol = lu.solve(&rhs);
        let resistance: f64 = rhs.iter().zip(&sol).map(|(r, s)| r * s).sum();
        rho.push((w * resistance).clamp(0.0, 1.0));
    }
    EdgeAppearance::new(mrf, rho)
}

/// LU factorisation with partial pivoting of a dense square matrix.
struct LuFactors {
    lu: Vec<f64>,
    perm: Vec<usize>,
    n: usize,
}

impl LuFactors {
    fn new(mut a: Vec<f64>, n: usize) -> Result<Self> {
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap_or(k);
            if !(a[p * n + k].abs() > 1e-13 * scale) {
                return Err(Error::SingularLaplacian);
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for r in k + 1..n {
                let factor = a[r * n + k] / pivot;
                a[r * n + k] = factor;
                if factor != 0.0 {
                    for c in k + 1..n {
                        a[r * n + c] -= factor * a[k * n + c];
                    }
                }
            }
        }
        Ok(Self { lu: a, perm, n })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                y[r] -= self.lu[r * n + c] * y[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                y[r] -= self.lu[r * n + c] * y[c];
            }
            y[r] /= self.lu[r * n + r];
        }
        y
    }
}
