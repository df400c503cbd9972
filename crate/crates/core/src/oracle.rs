//! MAP solvers used as the linear minimisation oracle.
//!
//! An oracle maximises `sum_i t_i(x_i) + sum_ij t_ij(x_i, x_j)` for a vector
//! of perturbed potentials `t` laid out like the model. With `t = -grad f` the
//! maximiser is the Frank-Wolfe vertex of the marginal polytope.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::{check_cap, for_each_assignment, DEFAULT_STATE_CAP};
use crate::marginals::PotentialVector;
use crate::mrf::{Assignment, MarkovRandomField};

/// Outcome of a MAP call.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub assignment: Assignment,
    /// Linear objective at the returned vertex.
    pub energy: f64,
    /// Certified upper bound on the maximum, when the solver has one.
    pub upper_bound: Option<f64>,
}

/// A (possibly approximate) MAP solver.
pub trait MapOracle: Send + Sync {
    fn name(&self) -> String;

    /// Maximises `objective` over joint assignments of `mrf`.
    fn solve(
        &self,
        mrf: &MarkovRandomField,
        objective: &PotentialVector,
        warm_start: Option<&Assignment>,
    ) -> Result<OracleResult>;
}

/// Runs `oracle` after checking the objective layout, then checks the
/// result's invariants.
pub fn solve_map(
    oracle: &dyn MapOracle,
    mrf: &MarkovRandomField,
    objective: &PotentialVector,
    warm_start: Option<&Assignment>,
) -> Result<OracleResult> {
    objective.check_layout(mrf.layout())?;
    if let Some(w) = warm_start {
        w.validate(mrf.layout())?;
    }
    let res = oracle.solve(mrf, objective, warm_start)?;
    res.assignment.validate(mrf.layout())?;
    let recomputed = objective.eval_assignment(&res.assignment);
    if (recomputed - res.energy).abs() > 1e-9 * recomputed.abs().max(1.0) {
        return Err(Error::Oracle(format!(
            "{} reported energy {} but the assignment scores {recomputed}",
            oracle.name(),
            res.energy
        )));
    }
    if let Some(ub) = res.upper_bound {
        if ub < res.energy - 1e-9 * res.energy.abs().max(1.0) {
            return Err(Error::Oracle(format!(
                "{} certified bound {ub} below its own energy {}",
                oracle.name(),
                res.energy
            )));
        }
    }
    Ok(res)
}

/// Exhaustive search; ties go to the lexicographically smallest assignment.
pub fn brute_force_map(objective: &PotentialVector, mrf: &MarkovRandomField, cap: u128) -> Result<OracleResult> {
    objective.check_layout(mrf.layout())?;
    check_cap(mrf.layout(), cap)?;
    let mut best = Assignment::zeros(mrf.num_vars());
    let mut best_energy = f64::NEG_INFINITY;
    let mut cur = Assignment::zeros(mrf.num_vars());
    for_each_assignment(mrf.cardinalities(), |x| {
        cur.0.copy_from_slice(x);
        let e = objective.eval_assignment(&cur);
        if e > best_energy {
            best_energy = e;
            best.0.copy_from_slice(x);
        }
    });
    Ok(OracleResult { assignment: best, energy: best_energy, upper_bound: Some(best_energy) })
}

/// Iterated conditional modes: single-variable coordinate ascent in index
/// order until a sweep changes nothing or `max_sweeps` sweeps ran. A
/// variable only moves to a strictly better state.
pub fn icm_solve(
    objective: &PotentialVector,
    mrf: &MarkovRandomField,
    init: &Assignment,
    max_sweeps: usize,
) -> Result<OracleResult> {
    objective.check_layout(mrf.layout())?;
    init.validate(mrf.layout())?;
    let layout = mrf.layout();
    let mut x = init.clone();
    let mut scores = Vec::new();
    for _ in 0..max_sweeps {
        let mut changed = false;
        for var in 0..mrf.num_vars() {
            scores.clear();
            scores.extend_from_slice(objective.node(var));
            for inc in mrf.incidence(var) {
                let other = x.0[inc.other];
                for (s, score) in scores.iter_mut().enumerate() {
                    *score += if inc.is_first {
                        objective.as_slice()[layout.edge_index(inc.edge, s, other)]
                    } else {
                        objective.as_slice()[layout.edge_index(inc.edge, other, s)]
                    };
                }
            }
            let current = x.0[var];
            let mut best = current;
            for (s, &score) in scores.iter().enumerate() {
                if score > scores[best] {
                    best = s;
                }
            }
            if best != current {
                x.0[var] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let energy = objective.eval_assignment(&x);
    Ok(OracleResult { assignment: x, energy, upper_bound: None })
}

/// Runs every member and keeps the highest-energy result (earliest member on
/// ties). The certificate is the largest certificate among members.
pub fn portfolio_solve(
    oracles: &[&dyn MapOracle],
    mrf: &MarkovRandomField,
    objective: &PotentialVector,
    warm_start: Option<&Assignment>,
) -> Result<OracleResult> {
    let mut best: Option<OracleResult> = None;
    let mut bound: Option<f64> = None;
    for o in oracles {
        let r = o.solve(mrf, objective, warm_start)?;
        if let Some(ub) = r.upper_bound {
            bound = Some(bound.map_or(ub, |b: f64| b.max(ub)));
        }
        if best.as_ref().is_none_or(|b| r.energy > b.energy) {
            best = Some(r);
        }
    }
    let mut best = best.ok_or(Error::EmptyPortfolio)?;
    best.upper_bound = bound;
    Ok(best)
}

/// Exact MAP by enumeration, for desk-scale models.
#[derive(Debug, Clone)]
pub struct BruteForceOracle {
    pub cap: u128,
}

impl Default for BruteForceOracle {
    fn default() -> Self {
        Self { cap: DEFAULT_STATE_CAP }
    }
}

impl MapOracle for BruteForceOracle {
    fn name(&self) -> String {
        "exact".into()
    }

    fn solve(&self, mrf: &MarkovRandomField, objective: &PotentialVector, _: Option<&Assignment>) -> Result<OracleResult> {
        brute_force_map(objective, mrf, self.cap)
    }
}

/// ICM started from a fixed assignment when one is set, otherwise from the
/// warm start, otherwise from all zeros.
#[derive(Debug, Clone)]
pub struct IcmOracle {
    pub max_sweeps: usize,
    pub start: Option<Assignment>,
}

impl Default for IcmOracle {
    fn default() -> Self {
        Self { max_sweeps: 100, start: None }
    }
}

impl IcmOracle {
    pub fn new(max_sweeps: usize) -> Self {
        Self { max_sweeps, start: None }
    }

    pub fn with_start(mut self, start: Assignment) -> Self {
        self.start = Some(start);
        self
    }
}

impl MapOracle for IcmOracle {
    fn name(&self) -> String {
        match &self.start {
            Some(_) => "icm(fixed start)".into(),
            None => "icm".into(),
        }
    }

    fn solve(
        &self,
        mrf: &MarkovRandomField,
        objective: &PotentialVector,
        warm_start: Option<&Assignment>,
    ) -> Result<OracleResult> {
        let zeros;
        let init = match (&self.start, warm_start) {
            (Some(s), _) => s,
            (None, Some(w)) => w,
            (None, None) => {
                zeros = Assignment::zeros(mrf.num_vars());
                &zeros
            }
        };
        icm_solve(objective, mrf, init, self.max_sweeps)
    }
}

/// ICM started at the assignment maximising each unary term on its own.
#[derive(Debug, Clone, Default)]
pub struct UnaryIcmOracle {
    pub max_sweeps: usize,
}

impl MapOracle for UnaryIcmOracle {
    fn name(&self) -> String {
        "icm(unary start)".into()
    }

    fn solve(&self, mrf: &MarkovRandomField, objective: &PotentialVector, _: Option<&Assignment>) -> Result<OracleResult> {
        let init = Assignment(
            (0..mrf.num_vars())
                .map(|v| {
                    let t = objective.node(v);
                    (0..t.len()).fold(0, |b, s| if t[s] > t[b] { s } else { b })
                })
                .collect(),
        );
        icm_solve(objective, mrf, &init, self.max_sweeps.max(1))
    }
}

/// A best-of portfolio over owned oracles.
pub struct Portfolio {
    members: Vec<Box<dyn MapOracle>>,
}

impl Portfolio {
    pub fn new(members: Vec<Box<dyn MapOracle>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyPortfolio);
        }
        Ok(Self { members })
    }

    /// ICM from the warm start, from all zeros, and from the unary argmax.
    pub fn approximate(max_sweeps: usize, num_vars: usize) -> Self {
        Self {
            members: vec![
                Box::new(IcmOracle::new(max_sweeps)),
                Box::new(IcmOracle::new(max_sweeps).with_start(Assignment::zeros(num_vars))),
                Box::new(UnaryIcmOracle { max_sweeps }),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl MapOracle for Portfolio {
    fn name(&self) -> String {
        let names: Vec<String> = self.members.iter().map(|m| m.name()).collect();
        format!("portfolio[{}]", names.join(", "))
    }

    fn solve(
        &self,
        mrf: &MarkovRandomField,
        objective: &PotentialVector,
        warm_start: Option<&Assignment>,
    ) -> Result<OracleResult> {
        let refs: Vec<&dyn MapOracle> = self.members.iter().map(|m| m.as_ref()).collect();
        portfolio_solve(&refs, mrf, objective, warm_start)
    }
}

impl core::fmt::Debug for Portfolio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.name())
    }
}
