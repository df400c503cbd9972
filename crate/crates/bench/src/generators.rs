//! Synthetic binary instances: complete graphs and grids with Ising-style
//! potentials.
//!
//! Node tables are `(-t_i, t_i)` with `t_i ~ U[-1, 1]`; edge tables are
//! `(t_ij, -t_ij; -t_ij, t_ij)` with `t_ij ~ U[-c, c]` for coupling strength
//! `c`. Node values are drawn first, then edges in edge order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trwfw_core::MarkovRandomField;

use crate::BenchError;

/// Default coupling range for grids.
pub const GRID_COUPLING: f64 = 4.0;

/// Independent generator for one trial of a run seeded with `master`.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

fn check_coupling(coupling: f64) -> Result<(), BenchError> {
    if !(coupling >= 0.0 && coupling.is_finite()) {
        return Err(BenchError::Spec(format!("coupling strength must be finite and nonnegative, got {coupling}")));
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, range: f64) -> f64 {
    if range == 0.0 {
        0.0
    } else {
        rng.gen_range(-range..=range)
    }
}

fn ising(n: usize, edges: Vec<(usize, usize)>, coupling: f64, rng: &mut ChaCha8Rng) -> Result<MarkovRandomField, BenchError> {
    let nodes = (0..n)
        .map(|_| {
            let t = draw(rng, 1.0);
            vec![-t, t]
        })
        .collect();
    let tables = (0..edges.len())
        .map(|_| {
            let t = draw(rng, coupling);
            vec![t, -t, -t, t]
        })
        .collect();
    Ok(MarkovRandomField::new(vec![2; n], edges, nodes, tables)?)
}

/// Complete graph on `n >= 2` binary variables, edges `(a, b)` with `a < b`
/// in lexicographic order.
pub fn gen_clique(n: usize, coupling: f64, rng: &mut ChaCha8Rng) -> Result<MarkovRandomField, BenchError> {
    if n < 2 {
        return Err(BenchError::Spec(format!("a clique needs at least 2 nodes, got {n}")));
    }
    check_coupling(coupling)?;
    let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    ising(n, edges, coupling, rng)
}

/// `rows x cols` grid; node `r * cols + c`, edges to the right neighbour then
/// the one below, scanning nodes in order.
pub fn gen_grid(rows: usize, cols: usize, coupling: f64, rng: &mut ChaCha8Rng) -> Result<MarkovRandomField, BenchError> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(BenchError::Spec(format!("degenerate grid {rows}x{cols}")));
    }
    check_coupling(coupling)?;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    ising(rows * cols, edges, coupling, rng)
}
