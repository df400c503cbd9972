use alloc::vec;
use alloc::vec::Vec;

use crate::mrf::MarkovRandomField;

pub(crate) fn grid_mrf(rows: usize, cols: usize) -> MarkovRandomField {
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
    let m = edges.len();
    let n = rows * cols;
    MarkovRandomField::new(vec![2; n], edges, vec![vec![0.0; 2]; n], vec![vec![0.0; 4]; m]).unwrap()
}

pub(crate) fn clique_mrf(n: usize) -> MarkovRandomField {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b));
        }
    }
    let m = edges.len();
    MarkovRandomField::new(vec![2; n], edges, vec![vec![0.0; 2]; n], vec![vec![0.0; 4]; m]).unwrap()
}
