//! Frank-Wolfe with away steps over the convex hull of a finite atom set,
//! used as the approximate correction step.

use alloc::vec;
use alloc::vec::Vec;

use super::line_search::line_search_along;
use super::ConvexObjective;
use crate::error::{Error, Result};
use crate::marginals::{add_vertex_to, dot};
use crate::mrf::{Assignment, BlockLayout};

const DRIFT_TOL: f64 = 1e-8;

/// A finite set of points given implicitly.
pub trait AtomSet {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out[i] = <g, atom_i>` for every atom.
    fn dots(&self, g: &[f64], out: &mut Vec<f64>);

    /// `out += scale * atom_i`.
    fn add_scaled(&self, i: usize, scale: f64, out: &mut [f64]);
}

/// Atoms stored as dense rows.
#[derive(Debug, Clone)]
pub struct DenseAtoms(pub Vec<Vec<f64>>);

impl AtomSet for DenseAtoms {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn dots(&self, g: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.0.iter().map(|a| dot(a, g)));
    }

    fn add_scaled(&self, i: usize, scale: f64, out: &mut [f64]) {
        for (o, &a) in out.iter_mut().zip(&self.0[i]) {
            *o += scale * a;
        }
    }
}

/// The uniform point (atom 0) followed by contractions
/// `(1 - delta) v + delta u0` of the given vertices.
pub struct ContractedVertices<'a> {
    pub layout: &'a BlockLayout,
    pub vertices: &'a [Assignment],
    pub uniform: &'a [f64],
    pub delta: f64,
}

impl AtomSet for ContractedVertices<'_> {
    fn len(&self) -> usize {
        self.vertices.len() + 1
    }

    fn dots(&self, g: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let gu = dot(g, self.uniform);
        out.push(gu);
        for v in self.vertices {
            let mut gv = 0.0;
            for (var, &state) in v.0.iter().enumerate() {
                gv += g[self.layout.node_index(var, state)];
            }
            for (e, &(a, b)) in self.layout.edges().iter().enumerate() {
                gv += g[self.layout.edge_index(e, v.0[a], v.0[b])];
            }
            out.push((1.0 - self.delta) * gv + self.delta * gu);
        }
    }

    fn add_scaled(&self, i: usize, scale: f64, out: &mut [f64]) {
        let on_uniform = if i == 0 { scale } else { scale * self.delta };
        for (o, &u) in out.iter_mut().zip(self.uniform) {
            *o += on_uniform * u;
        }
        if i > 0 {
            add_vertex_to(self.layout, out, &self.vertices[i - 1], scale * (1.0 - self.delta));
        }
    }
}

/// Result of one correction run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfwOutcome {
    pub iterations: usize,
    /// Last computed pairwise gap (Frank-Wolfe plus away gap).
    pub pairwise_gap: f64,
    /// Last computed Frank-Wolfe gap over the atom hull; nonnegative.
    pub fw_gap: f64,
    pub value_before: f64,
    pub value_after: f64,
    pub converged: bool,
}

/// Minimises `objective` over the hull of `atoms`, starting from
/// `x = sum_i alpha_i atom_i`, until the pairwise gap drops to `tol` or
/// `max_iters` steps were taken. Updates `x` and `alpha` in place.
pub fn away_step_frank_wolfe<O, A>(
    objective: &O,
    atoms: &A,
    x: &mut [f64],
    alpha: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<MfwOutcome>
where
    O: ConvexObjective + ?Sized,
    A: AtomSet + ?Sized,
{
    if alpha.len() != atoms.len() {
        return Err(Error::Invariant(alloc::format!(
            "{} coordinates for {} atoms",
            alpha.len(),
            atoms.len()
        )));
    }
    let n = x.len();
    let mut grad = vec![0.0; n];
    let mut scores = Vec::with_capacity(atoms.len());
    let mut d = vec![0.0; n];
    let value_before = objective.value(x);
    let mut out = MfwOutcome {
        iterations: 0,
        pairwise_gap: f64::INFINITY,
        fw_gap: 0.0,
        value_before,
        value_after: value_before,
        converged: false,
    };

    loop {
        objective.gradient(x, &mut grad);
        atoms.dots(&grad, &mut scores);
        let gx = dot(&grad, x);
        let fw_atom = (0..scores.len()).fold(0, |b, i| if scores[i] < scores[b] { i } else { b });
        let away_atom = (0..scores.len())
            .filter(|&i| alpha[i] > 0.0)
            .fold(None, |b: Option<usize>, i| match b {
                Some(j) if scores[j] >= scores[i] => Some(j),
                _ => Some(i),
            })
            .ok_or_else(|| Error::Invariant("empty active set".into()))?;
        let fw_part = gx - scores[fw_atom];
        let away_part = scores[away_atom] - gx;
        out.fw_gap = fw_part.max(0.0);
        out.pairwise_gap = fw_part + away_part;
        if out.pairwise_gap <= tol {
            out.converged = true;
            break;
        }
        if out.iterations == max_iters {
            break;
        }
        out.iterations += 1;

        let take_fw = fw_part >= away_part;
        let gamma_max;
        if take_fw {
            for (di, &xi) in d.iter_mut().zip(x.iter()) {
                *di = -xi;
            }
            atoms.add_scaled(fw_atom, 1.0, &mut d);
            gamma_max = 1.0;
        } else {
            d.copy_from_slice(x);
            atoms.add_scaled(away_atom, -1.0, &mut d);
            let a = alpha[away_atom];
            gamma_max = if a < 1.0 { a / (1.0 - a) } else { f64::INFINITY };
        }
        let gamma_max = if gamma_max.is_finite() { gamma_max } else { 1e12 };
        let gamma = line_search_along(objective, x, &d, gamma_max);
        if gamma == 0.0 {
            // no progress possible along the chosen direction
            break;
        }
        for (xi, &di) in x.iter_mut().zip(&d) {
            *xi += gamma * di;
        }
        if take_fw {
            for a in alpha.iter_mut() {
                *a *= 1.0 - gamma;
            }
            alpha[fw_atom] += gamma;
        } else {
            for a in alpha.iter_mut() {
                *a *= 1.0 + gamma;
            }
            if gamma >= gamma_max {
                alpha[away_atom] = 0.0;
            } else {
                alpha[away_atom] -= gamma;
            }
        }
        for a in alpha.iter_mut() {
            if *a < 0.0 {
                *a = 0.0;
            }
        }
    }
    out.value_after = objective.value(x);

    let drift = reconstruction_error(atoms, alpha, x);
    if drift > DRIFT_TOL {
        return Err(Error::CoordinateDrift(drift));
    }
    Ok(out)
}

/// `max_j |x_j - sum_i alpha_i atom_i[j]|`.
pub(crate) fn reconstruction_error<A: AtomSet + ?Sized>(atoms: &A, alpha: &[f64], x: &[f64]) -> f64 {
    let mut r = vec![0.0; x.len()];
    for (i, &a) in alpha.iter().enumerate() {
        if a != 0.0 {
            atoms.add_scaled(i, a, &mut r);
        }
    }
    r.iter().zip(x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}
