//! Pairwise Markov random fields and the block layout shared by every
//! node/edge-indexed vector in the crate.
//!
//! A vector over the model (log-potentials, pseudomarginals, gradients) is a
//! flat array split into one block per node followed by one block per edge,
//! in construction order. Edge `(a, b)` stores its table row-major with the
//! state of `a` as the row index.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::marginals::BlockVector;

/// Sizes and offsets of the node and edge blocks of a pairwise model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    cards: Vec<usize>,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
}

impl BlockLayout {
    fn new(cards: Vec<usize>, edges: Vec<(usize, usize)>) -> Self {
        let mut offsets = Vec::with_capacity(cards.len() + edges.len() + 1);
        let mut at = 0;
        offsets.push(at);
        for &c in &cards {
            at += c;
            offsets.push(at);
        }
        for &(a, b) in &edges {
            at += cards[a] * cards[b];
            offsets.push(at);
        }
        Self { cards, edges, offsets }
    }

    pub fn num_vars(&self) -> usize {
        self.cards.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of blocks (nodes plus edges).
    pub fn num_blocks(&self) -> usize {
        self.cards.len() + self.edges.len()
    }

    /// Total length of the flat vector.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn card(&self, var: usize) -> usize {
        self.cards[var]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn block_range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn node_range(&self, var: usize) -> Range<usize> {
        self.block_range(var)
    }

    pub fn edge_range(&self, e: usize) -> Range<usize> {
        self.block_range(self.cards.len() + e)
    }

    pub fn block_size(&self, block: usize) -> usize {
        self.offsets[block + 1] - self.offsets[block]
    }

    /// Flat index of `mu_var(state)`.
    #[inline]
    pub fn node_index(&self, var: usize, state: usize) -> usize {
        self.offsets[var] + state
    }

    /// Flat index of `mu_e(state_a, state_b)` for edge `e = (a, b)`.
    #[inline]
    pub fn edge_index(&self, e: usize, state_a: usize, state_b: usize) -> usize {
        let (_, b) = self.edges[e];
        self.offsets[self.cards.len() + e] + state_a * self.cards[b] + state_b
    }

    /// For every flat entry, the size of the block it belongs to.
    pub fn block_sizes_per_entry(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for b in 0..self.num_blocks() {
            let n = self.block_size(b);
            out.extend(core::iter::repeat_n(n, n));
        }
        out
    }

    /// Number of joint assignments, saturating at `u128::MAX`.
    pub fn state_space(&self) -> u128 {
        self.cards
            .iter()
            .fold(1u128, |acc, &c| acc.saturating_mul(c as u128))
    }

    /// Maximum block size `max_c n_c`; for models with edges this is the
    /// largest `card_i * card_j` over edges.
    pub fn max_block_size(&self) -> usize {
        (0..self.num_blocks())
            .map(|b| self.block_size(b))
            .max()
            .unwrap_or(0)
    }
}

/// A joint configuration of all variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn zeros(num_vars: usize) -> Self {
        Self(vec![0; num_vars])
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks length and state ranges against `layout`.
    pub fn validate(&self, layout: &BlockLayout) -> Result<()> {
        if self.0.len() != layout.num_vars() {
            return Err(Error::AssignmentLength {
                expected: layout.num_vars(),
                got: self.0.len(),
            });
        }
        for (var, &value) in self.0.iter().enumerate() {
            let card = layout.card(var);
            if value >= card {
                return Err(Error::StateOutOfRange { var, value, card });
            }
        }
        Ok(())
    }
}

impl From<Vec<usize>> for Assignment {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Edge incident to a variable, seen from that variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub other: usize,
    /// True when the variable is the row (first) endpoint of the edge.
    pub is_first: bool,
}

/// A connected pairwise MRF with natural-log potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovRandomField {
    layout: Arc<BlockLayout>,
    theta: BlockVector,
    incidence: Vec<Vec<Incidence>>,
}

impl MarkovRandomField {
    /// Builds a model from cardinalities, edges and potential tables.
    ///
    /// `edge_potentials[e]` is row-major over `card[a] x card[b]` for
    /// `edges[e] = (a, b)`. Rejects self-loops, duplicate edges (in either
    /// orientation), shape mismatches and disconnected graphs.
    pub fn new(
        cardinalities: Vec<usize>,
        edges: Vec<(usize, usize)>,
        node_potentials: Vec<Vec<f64>>,
        edge_potentials: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = cardinalities.len();
        if n == 0 {
            return Err(Error::InvalidModel("model has no variables".into()));
        }
        if let Some(i) = cardinalities.iter().position(|&c| c == 0) {
            return Err(Error::InvalidModel(format!("variable {i} has cardinality 0")));
        }
        if node_potentials.len() != n {
            return Err(Error::InvalidModel(format!(
                "{} node tables for {n} variables",
                node_potentials.len()
            )));
        }
        if edge_potentials.len() != edges.len() {
            return Err(Error::InvalidModel(format!(
                "{} edge tables for {} edges",
                edge_potentials.len(),
                edges.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::InvalidModel(format!(
                    "edge {e} = ({a}, {b}) references a variable >= {n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidModel(format!("edge {e} is a self-loop on {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidModel(format!("duplicate edge ({a}, {b})")));
            }
        }
        for (i, table) in node_potentials.iter().enumerate() {
            if table.len() != cardinalities[i] {
                return Err(Error::InvalidModel(format!(
                    "node table {i} has {} entries, expected {}",
                    table.len(),
                    cardinalities[i]
                )));
            }
        }
        for (e, table) in edge_potentials.iter().enumerate() {
            let (a, b) = edges[e];
            if table.len() != cardinalities[a] * cardinalities[b] {
                return Err(Error::InvalidModel(format!(
                    "edge table {e} has {} entries, expected {}",
                    table.len(),
                    cardinalities[a] * cardinalities[b]
                )));
            }
        }
        if node_potentials
            .iter()
            .chain(edge_potentials.iter())
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidModel("non-finite log-potential".into()));
        }

        let components = count_components(n, &edges);
        if components != 1 {
            return Err(Error::Disconnected { components });
        }

        let layout = Arc::new(BlockLayout::new(cardinalities, edges));
        let mut data = Vec::with_capacity(layout.dim());
        for t in node_potentials.iter().chain(edge_potentials.iter()) {
            data.extend_from_slice(t);
        }
        let theta = BlockVector::from_parts(layout.clone(), data);

        let mut incidence = vec![Vec::new(); n];
        for (e, &(a, b)) in layout.edges().iter().enumerate() {
            incidence[a].push(Incidence { edge: e, other: b, is_first: true });
            incidence[b].push(Incidence { edge: e, other: a, is_first: false });
        }
        Ok(Self { layout, theta, incidence })
    }

    pub fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    pub fn num_vars(&self) -> usize {
        self.layout.num_vars()
    }

    pub fn num_edges(&self) -> usize {
        self.layout.num_edges()
    }

    pub fn cardinalities(&self) -> &[usize] {
        self.layout.cardinalities()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        self.layout.edges()
    }

    /// The log-potentials as a block vector.
    pub fn theta(&self) -> &BlockVector {
        &self.theta
    }

    pub fn node_potential(&self, var: usize) -> &[f64] {
        self.theta.node(var)
    }

    pub fn edge_potential(&self, e: usize) -> &[f64] {
        self.theta.edge(e)
    }

    pub fn incidence(&self, var: usize) -> &[Incidence] {
        &self.incidence[var]
    }

    pub fn degree(&self, var: usize) -> usize {
        self.incidence[var].len()
    }

    /// `<theta, vertex(a)>`, the unnormalised log-probability of `a`.
    pub fn energy(&self, a: &Assignment) -> Result<f64> {
        a.validate(&self.layout)?;
        Ok(self.theta.eval_assignment(a))
    }

    /// True when the graph has exactly `num_vars - 1` edges (it is connected
    /// by construction).
    pub fn is_tree(&self) -> bool {
        self.num_edges() + 1 == self.num_vars()
    }
}

/// Union-find over `n` elements with path halving.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            core::cmp::Ordering::Less => self.parent[ra] = rb,
            core::cmp::Ordering::Greater => self.parent[rb] = ra,
            core::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

pub(crate) fn count_components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut sets = DisjointSets::new(n);
    let mut components = n;
    for &(a, b) in edges {
        if sets.union(a, b) {
            components -= 1;
        }
    }
    components
}
