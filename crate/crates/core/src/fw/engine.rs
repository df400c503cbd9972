//! Fully corrective Frank-Wolfe over contracted marginal polytopes, and the
//! outer loop over edge appearance probabilities.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::delta::{adaptive_delta_update, rescale_alpha};
use super::line_search::line_search_along;
use super::mfw::{away_step_frank_wolfe, reconstruction_error, ContractedVertices, MfwOutcome};
use super::ConvexObjective;
use crate::error::{Error, Result};
use crate::marginals::{add_vertex_to, dot, uniform_for_layout, BlockVector, MarginalVector};
use crate::mrf::{Assignment, BlockLayout, MarkovRandomField};
use crate::objective::{EdgeAppearance, TrwObjective};
use crate::oracle::{icm_solve, solve_map, MapOracle};
use crate::tree::{edges_mutual_information, min_spanning_tree, rho_fw_update, RhoStepSchedule};

const SIMPLEX_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-8;
const GAP_IDENTITY_TOL: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-12;

/// How the contraction amount evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaMode {
    /// Keep `delta_fixed` throughout.
    Fixed,
    /// Start at `delta_init` and shrink after MAP calls when the uniform gap
    /// says the contraction blocks progress.
    #[default]
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub mode: DeltaMode,
    pub delta_init: f64,
    pub delta_fixed: f64,
    /// Inner loop stops once the gap is at most this.
    pub inner_gap_tol: f64,
    /// Pairwise gap tolerance of the correction; `None` means
    /// `min(inner_gap_tol / 10, 1e-3)`.
    pub correction_tol: Option<f64>,
    pub max_inner_iters: usize,
    pub max_correction_iters: usize,
    pub use_correction: bool,
    pub use_local_search: bool,
    pub local_search_iters: usize,
    pub icm_max_sweeps: usize,
    /// Check state invariants after every step and fail hard on violation.
    pub check_invariants: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            mode: DeltaMode::Adaptive,
            delta_init: 0.01,
            delta_fixed: 1e-4,
            inner_gap_tol: 0.5,
            correction_tol: None,
            max_inner_iters: 200,
            max_correction_iters: 1000,
            use_correction: true,
            use_local_search: false,
            local_search_iters: 5,
            icm_max_sweeps: 100,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_init > 0.0 && self.delta_init <= 0.25) {
            return Err(Error::DeltaOutOfRange(self.delta_init));
        }
        if !(self.delta_fixed > 0.0 && self.delta_fixed < 1.0) {
            return Err(Error::DeltaOutOfRange(self.delta_fixed));
        }
        if !(self.inner_gap_tol > 0.0) {
            return Err(Error::Config(format!("gap tolerance must be positive, got {}", self.inner_gap_tol)));
        }
        if !(self.correction_tolerance() > 0.0) {
            return Err(Error::Config(format!(
                "correction tolerance must be positive, got {}",
                self.correction_tolerance()
            )));
        }
        Ok(())
    }

    pub fn correction_tolerance(&self) -> f64 {
        self.correction_tol.unwrap_or((self.inner_gap_tol / 10.0).min(1e-3))
    }

    pub fn initial_delta(&self) -> f64 {
        match self.mode {
            DeltaMode::Fixed => self.delta_fixed,
            DeltaMode::Adaptive => self.delta_init,
        }
    }
}

/// Gaps and energies measured at one iterate, after the contraction update
/// of that iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSnapshot {
    /// `f(x) = -TRW(x)`.
    pub objective: f64,
    pub fw_gap: f64,
    pub uniform_gap: f64,
    /// `<-grad, s_delta - x>`, measured directly on the contracted vertex.
    pub contracted_gap: f64,
    /// Gap used for the stopping test and the contraction update; differs
    /// from `fw_gap` only when an approximate oracle finds no descent vertex.
    pub working_gap: f64,
    /// `<-grad f(x), s>` for the returned vertex `s`.
    pub vertex_energy: f64,
    /// `<-grad f(x), x>`.
    pub iterate_energy: f64,
    pub delta: f64,
    /// Oracle certificate on `max_v <-grad f(x), v>`, if any.
    pub certificate: Option<f64>,
}

impl GapSnapshot {
    /// `TRW(x)`.
    pub fn primal(&self) -> f64 {
        -self.objective
    }
}

/// What happened after the gap was measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub delta_prev: f64,
    pub gamma: f64,
    pub objective_after_step: f64,
    pub correction: Option<MfwOutcome>,
    pub objective_after_local_search: Option<f64>,
    pub local_search_vertices: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub rho_iteration: usize,
    pub iteration: usize,
    pub snapshot: GapSnapshot,
    pub map_calls: u64,
    pub icm_calls: u64,
    pub vertices: usize,
    /// `None` on the iteration that ended the inner loop.
    pub step: Option<StepInfo>,
}

impl TraceRecord {
    pub fn step_taken(&self) -> bool {
        self.step.is_some()
    }
}

/// Outcome of one inner loop.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSummary {
    pub iterations: usize,
    pub converged: bool,
    pub snapshot: GapSnapshot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoIterationSummary {
    pub rho_iteration: usize,
    pub rho: EdgeAppearance,
    pub marginals: MarginalVector,
    pub snapshot: GapSnapshot,
    pub inner_iterations: usize,
    pub converged: bool,
    pub map_calls: u64,
    pub icm_calls: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineEvent {
    Iteration(TraceRecord),
    /// Correction of the iterate under freshly updated edge appearances.
    Reinit { rho_iteration: usize, objective_before: f64, correction: MfwOutcome },
    RhoIteration(RhoIterationSummary),
}

/// Iterate, contraction and correction polytope of a run.
///
/// The iterate always equals `alpha[0] u0 + sum_i alpha[i + 1] v_i(delta)`
/// with `v_i(delta) = (1 - delta) v_i + delta u0`.
#[derive(Debug, Clone)]
pub struct SolverState {
    iterate: MarginalVector,
    uniform: MarginalVector,
    delta: f64,
    vertices: Vec<Assignment>,
    lookup: BTreeMap<Assignment, usize>,
    alpha: Vec<f64>,
    last_vertex: Option<Assignment>,
    snapshot: Option<GapSnapshot>,
    map_calls: u64,
    icm_calls: u64,
    last_correction_gap: f64,
}

impl SolverState {
    /// Starts at the uniform point with an empty correction set.
    pub fn new(mrf: &MarkovRandomField, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::DeltaOutOfRange(delta));
        }
        let uniform = uniform_for_layout(mrf.layout());
        Ok(Self {
            iterate: uniform.clone(),
            uniform,
            delta,
            vertices: Vec::new(),
            lookup: BTreeMap::new(),
            alpha: vec![1.0],
            last_vertex: None,
            snapshot: None,
            map_calls: 0,
            icm_calls: 0,
            last_correction_gap: 0.0,
        })
    }

    pub fn iterate(&self) -> &MarginalVector {
        &self.iterate
    }

    pub fn uniform(&self) -> &MarginalVector {
        &self.uniform
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Uncontracted vertices of the correction polytope, in insertion order.
    pub fn vertices(&self) -> &[Assignment] {
        &self.vertices
    }

    /// Coordinates: index 0 is the uniform point, index `i + 1` is vertex `i`.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn snapshot(&self) -> Option<&GapSnapshot> {
        self.snapshot.as_ref()
    }

    pub fn map_calls(&self) -> u64 {
        self.map_calls
    }

    pub fn icm_calls(&self) -> u64 {
        self.icm_calls
    }

    pub fn last_correction_gap(&self) -> f64 {
        self.last_correction_gap
    }

    fn layout(&self) -> &Arc<BlockLayout> {
        self.iterate.layout()
    }

    /// Changes the contraction, rescaling coordinates so the iterate stays put.
    fn shrink_delta(&mut self, delta_new: f64) -> Result<()> {
        self.alpha = rescale_alpha(&self.alpha, self.delta, delta_new, 0)?;
        self.delta = delta_new;
        Ok(())
    }

    /// Coordinates after `x <- (1 - gamma) x + gamma v(delta)`.
    fn record_step(&mut self, vertex: &Assignment, gamma: f64) {
        let idx = match self.lookup.get(vertex) {
            Some(&i) => i,
            None => {
                self.vertices.push(vertex.clone());
                self.alpha.push(0.0);
                self.lookup.insert(vertex.clone(), self.vertices.len());
                self.vertices.len()
            }
        };
        if gamma > 0.0 {
            for a in self.alpha.iter_mut() {
                *a *= 1.0 - gamma;
            }
            self.alpha[idx] += gamma;
        }
    }

    fn atoms(&self) -> ContractedVertices<'_> {
        ContractedVertices {
            layout: self.iterate.layout(),
            vertices: &self.vertices,
            uniform: self.uniform.as_slice(),
            delta: self.delta,
        }
    }

    /// Re-optimises over the contracted correction polytope.
    fn correct(&mut self, objective: &TrwObjective, tol: f64, max_iters: usize) -> Result<MfwOutcome> {
        let layout = self.iterate.layout().clone();
        let atoms = ContractedVertices {
            layout: &layout,
            vertices: &self.vertices,
            uniform: self.uniform.as_slice(),
            delta: self.delta,
        };
        let out = away_step_frank_wolfe(objective, &atoms, self.iterate.as_mut_slice(), &mut self.alpha, tol, max_iters)?;
        self.last_correction_gap = out.fw_gap;
        Ok(out)
    }

    /// `x <- x + gamma (v(delta) - x)` with the step from exact line search.
    fn fw_step(&mut self, objective: &TrwObjective, vertex: &Assignment) -> f64 {
        let dim = self.iterate.len();
        let mut target = vec![0.0; dim];
        for (t, &u) in target.iter_mut().zip(self.uniform.as_slice()) {
            *t = self.delta * u;
        }
        add_vertex_to(self.layout(), &mut target, vertex, 1.0 - self.delta);
        let x = self.iterate.as_slice();
        let d: Vec<f64> = target.iter().zip(x).map(|(t, x)| t - x).collect();
        let gamma = line_search_along(objective, x, &d, 1.0);
        if gamma > 0.0 {
            for (xi, &di) in self.iterate.as_mut_slice().iter_mut().zip(&d) {
                *xi += gamma * di;
            }
        }
        self.record_step(vertex, gamma);
        gamma
    }

    /// Checks the simplex, reconstruction, feasibility and gap-identity
    /// invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let sum: f64 = self.alpha.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Invariant(format!("coordinates sum to {sum}")));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a >= 0.0)) {
            return Err(Error::Invariant(format!("negative coordinate {a}")));
        }
        let err = reconstruction_error(&self.atoms(), &self.alpha, self.iterate.as_slice());
        if err > RECONSTRUCTION_TOL {
            return Err(Error::Invariant(format!("iterate is {err} away from its coordinates")));
        }
        let layout = self.layout();
        for b in 0..layout.num_blocks() {
            let floor = self.delta / layout.block_size(b) as f64 - FEASIBILITY_TOL;
            if let Some(v) = self.iterate.block(b).iter().find(|v| **v < floor) {
                return Err(Error::Invariant(format!("entry {v} of block {b} below delta / n_c = {floor}")));
            }
        }
        if let Some(s) = &self.snapshot {
            let expected = (1.0 - s.delta) * s.fw_gap + s.delta * s.uniform_gap;
            let scale = s.fw_gap.abs().max(s.uniform_gap.abs()).max(1.0);
            if (s.contracted_gap - expected).abs() > GAP_IDENTITY_TOL * scale {
                return Err(Error::Invariant(format!(
                    "contracted gap {} but decomposition gives {expected}",
                    s.contracted_gap
                )));
            }
        }
        Ok(())
    }
}

fn check_descent(before: f64, after: f64, what: &str) -> Result<()> {
    if after > before + 1e-12 * before.abs().max(1.0) {
        return Err(Error::Invariant(format!("{what} increased the objective from {before} to {after}")));
    }
    Ok(())
}

/// Frank-Wolfe steps with ICM as the oracle, warm-started at the previously
/// found vertex. Returns the assignments found; they join the correction set.
pub fn local_search(
    mrf: &MarkovRandomField,
    rho: &EdgeAppearance,
    state: &mut SolverState,
    start: &Assignment,
    iters: usize,
    icm_max_sweeps: usize,
) -> Result<Vec<Assignment>> {
    state.iterate.check_layout(mrf.layout())?;
    let objective = TrwObjective::new(mrf, rho);
    let mut found = Vec::with_capacity(iters);
    let mut prev = start.clone();
    let mut grad = vec![0.0; state.iterate.len()];
    for _ in 0..iters {
        objective.gradient(state.iterate.as_slice(), &mut grad);
        let potentials = BlockVector::from_parts(mrf.layout().clone(), grad.iter().map(|g| -g).collect());
        let r = icm_solve(&potentials, mrf, &prev, icm_max_sweeps)?;
        state.icm_calls += 1;
        state.fw_step(&objective, &r.assignment);
        prev = r.assignment.clone();
        found.push(r.assignment);
    }
    if let Some(last) = found.last() {
        state.last_vertex = Some(last.clone());
    }
    Ok(found)
}

/// Inner loop: Frank-Wolfe with correction over the contracted marginal
/// polytope for fixed edge appearances, until the gap is at most
/// `inner_gap_tol` or `max_inner_iters` steps were taken.
pub fn fcfw_inner_loop(
    mrf: &MarkovRandomField,
    rho: &EdgeAppearance,
    oracle: &dyn MapOracle,
    config: &EngineConfig,
    state: &mut SolverState,
    rho_iteration: usize,
    observer: &mut dyn FnMut(&EngineEvent),
) -> Result<InnerSummary> {
    config.validate()?;
    state.iterate.check_layout(mrf.layout())?;
    if rho.len() != mrf.num_edges() {
        return Err(Error::StructureMismatch(format!(
            "{} edge probabilities for {} edges",
            rho.len(),
            mrf.num_edges()
        )));
    }
    let objective = TrwObjective::new(mrf, rho);
    let layout = mrf.layout().clone();
    let dim = layout.dim();
    let mut grad = vec![0.0; dim];
    let mut s_delta = vec![0.0; dim];
    let mut k = 0;
    loop {
        let x = state.iterate.as_slice();
        let value = objective.value(x);
        objective.gradient(x, &mut grad);
        let potentials = BlockVector::from_parts(layout.clone(), grad.iter().map(|g| -g).collect());
        let res = solve_map(oracle, mrf, &potentials, state.last_vertex.as_ref())?;
        state.map_calls += 1;

        let t = potentials.as_slice();
        let iterate_energy = dot(t, x);
        let fw_gap = res.energy - iterate_energy;
        let uniform_gap = dot(t, state.uniform.as_slice()) - iterate_energy;
        let working_gap = if res.upper_bound.is_none() && fw_gap <= 0.0 {
            state.last_correction_gap.max(fw_gap)
        } else {
            fw_gap
        };
        let converged = working_gap <= config.inner_gap_tol;
        let stop = converged || k >= config.max_inner_iters;

        let delta_prev = state.delta;
        if !stop && config.mode == DeltaMode::Adaptive {
            let next = adaptive_delta_update(working_gap, uniform_gap, delta_prev)?;
            if next < delta_prev {
                state.shrink_delta(next)?;
            }
        }
        let delta = state.delta;
        for (sd, &u) in s_delta.iter_mut().zip(state.uniform.as_slice()) {
            *sd = delta * u;
        }
        add_vertex_to(&layout, &mut s_delta, &res.assignment, 1.0 - delta);
        let x = state.iterate.as_slice();
        let contracted_gap: f64 = t.iter().zip(s_delta.iter().zip(x)).map(|(t, (s, x))| t * (s - x)).sum();
        let snapshot = GapSnapshot {
            objective: value,
            fw_gap,
            uniform_gap,
            contracted_gap,
            working_gap,
            vertex_energy: res.energy,
            iterate_energy,
            delta,
            certificate: res.upper_bound,
        };
        state.snapshot = Some(snapshot);

        if stop {
            if config.check_invariants {
                state.check_invariants()?;
            }
            observer(&EngineEvent::Iteration(TraceRecord {
                rho_iteration,
                iteration: k,
                snapshot,
                map_calls: state.map_calls,
                icm_calls: state.icm_calls,
                vertices: state.vertices.len(),
                step: None,
            }));
            return Ok(InnerSummary { iterations: k, converged, snapshot });
        }

        let gamma = state.fw_step(&objective, &res.assignment);
        let objective_after_step = objective.value(state.iterate.as_slice());
        let mut current = objective_after_step;
        if config.check_invariants {
            check_descent(value, current, "the Frank-Wolfe step")?;
        }

        let correction = if config.use_correction {
            let out = state.correct(&objective, config.correction_tolerance(), config.max_correction_iters)?;
            if config.check_invariants {
                check_descent(current, out.value_after, "the correction")?;
            }
            current = out.value_after;
            Some(out)
        } else {
            None
        };

        state.last_vertex = Some(res.assignment.clone());
        let mut objective_after_local_search = None;
        let mut local_search_vertices = 0;
        if config.use_local_search && config.local_search_iters > 0 {
            let found = local_search(mrf, rho, state, &res.assignment, config.local_search_iters, config.icm_max_sweeps)?;
            local_search_vertices = found.len();
            let after = objective.value(state.iterate.as_slice());
            if config.check_invariants {
                check_descent(current, after, "the local search")?;
            }
            objective_after_local_search = Some(after);
        }

        if config.check_invariants {
            state.check_invariants()?;
        }
        observer(&EngineEvent::Iteration(TraceRecord {
            rho_iteration,
            iteration: k,
            snapshot,
            map_calls: state.map_calls,
            icm_calls: state.icm_calls,
            vertices: state.vertices.len(),
            step: Some(StepInfo {
                delta_prev,
                gamma,
                objective_after_step,
                correction,
                objective_after_local_search,
                local_search_vertices,
            }),
        }));
        k += 1;
    }
}

/// Configuration of the outer loop over edge appearance probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterConfig {
    pub engine: EngineConfig,
    /// Number of edge appearance updates; the inner loop runs one more time
    /// than this.
    pub max_rho_iters: usize,
    pub rho_step: RhoStepSchedule,
}

impl Default for OuterConfig {
    fn default() -> Self {
        Self { engine: EngineConfig::default(), max_rho_iters: 10, rho_step: RhoStepSchedule::Literal }
    }
}

#[derive(Debug, Clone)]
pub struct TrwBarrierResult {
    pub state: SolverState,
    pub rho: EdgeAppearance,
    pub summaries: Vec<RhoIterationSummary>,
}

impl TrwBarrierResult {
    pub fn marginals(&self) -> &MarginalVector {
        self.state.iterate()
    }

    pub fn last(&self) -> &RhoIterationSummary {
        self.summaries.last().expect("at least one inner loop runs")
    }
}

/// Full optimisation: alternate inner loops over marginals with Frank-Wolfe
/// updates of the edge appearances toward the spanning tree of maximum
/// mutual information, re-correcting the iterate after each update.
pub fn trw_barrier_fw(
    mrf: &MarkovRandomField,
    rho_init: EdgeAppearance,
    oracle: &dyn MapOracle,
    config: &OuterConfig,
    observer: &mut dyn FnMut(&EngineEvent),
) -> Result<TrwBarrierResult> {
    config.engine.validate()?;
    let mut state = SolverState::new(mrf, config.engine.initial_delta())?;
    let mut rho = rho_init;
    let mut summaries = Vec::with_capacity(config.max_rho_iters + 1);
    for i in 0..=config.max_rho_iters {
        let inner = fcfw_inner_loop(mrf, &rho, oracle, &config.engine, &mut state, i, observer)?;
        let summary = RhoIterationSummary {
            rho_iteration: i,
            rho: rho.clone(),
            marginals: state.iterate.clone(),
            snapshot: inner.snapshot,
            inner_iterations: inner.iterations,
            converged: inner.converged,
            map_calls: state.map_calls,
            icm_calls: state.icm_calls,
        };
        observer(&EngineEvent::RhoIteration(summary.clone()));
        summaries.push(summary);
        if i == config.max_rho_iters {
            break;
        }
        let mi = edges_mutual_information(&state.iterate)?;
        let weights: Vec<f64> = mi.iter().map(|v| -v).collect();
        let tree = min_spanning_tree(mrf, &weights)?;
        rho = rho_fw_update(mrf, &rho, &tree, i, config.rho_step)?;
        if config.engine.use_correction {
            let objective = TrwObjective::new(mrf, &rho);
            let before = objective.value(state.iterate.as_slice());
            let out = state.correct(&objective, config.engine.correction_tolerance(), config.engine.max_correction_iters)?;
            observer(&EngineEvent::Reinit { rho_iteration: i + 1, objective_before: before, correction: out });
        }
    }
    Ok(TrwBarrierResult { state, rho, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{brute_force_logz, DEFAULT_STATE_CAP};
    use crate::oracle::BruteForceOracle;
    use crate::tests_support::grid_mrf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rows: usize, cols: usize, seed: u64) -> MarkovRandomField {
        let base = grid_mrf(rows, cols);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = (0..base.num_vars())
            .map(|_| {
                let t: f64 = rng.gen_range(-1.0..1.0);
                vec![-t, t]
            })
            .collect();
        let edges = (0..base.num_edges())
            .map(|_| {
                let t: f64 = rng.gen_range(-4.0..4.0);
                vec![t, -t, -t, t]
            })
            .collect();
        MarkovRandomField::new(base.cardinalities().to_vec(), base.edges().to_vec(), nodes, edges).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(EngineConfig::default().validate().is_ok());
        let bad = EngineConfig { delta_init: 0.3, ..EngineConfig::default() };
        assert_eq!(bad.validate(), Err(Error::DeltaOutOfRange(0.3)));
        assert_eq!(EngineConfig::default().correction_tolerance(), 1e-3);
        let fine = EngineConfig { inner_gap_tol: 1e-3, ..EngineConfig::default() };
        assert!((fine.correction_tolerance() - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn zero_potentials_stop_at_the_uniform_point() {
        let mrf = grid_mrf(2, 2);
        let rho = EdgeAppearance::from_tree(&mrf, &[true, true, true, false]).unwrap();
        let mut state = SolverState::new(&mrf, 0.01).unwrap();
        let config = EngineConfig { inner_gap_tol: 1e-9, ..EngineConfig::default() };
        let s = fcfw_inner_loop(&mrf, &rho, &BruteForceOracle::default(), &config, &mut state, 0, &mut |_| {}).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations, 0);
        assert_eq!(state.map_calls(), 1);
    }

    #[test]
    fn gap_bound_holds_and_objective_decreases() {
        let mrf = random_grid(3, 3, 3);
        let truth = brute_force_logz(&mrf, DEFAULT_STATE_CAP).unwrap();
        let rho = crate::tree::matrix_tree_init(&mrf, &crate::tree::default_matrix_tree_weights(&mrf)).unwrap();
        let mut state = SolverState::new(&mrf, 0.25).unwrap();
        let config = EngineConfig { delta_init: 0.25, inner_gap_tol: 1e-2, ..EngineConfig::default() };
        let mut records = Vec::new();
        fcfw_inner_loop(&mrf, &rho, &BruteForceOracle::default(), &config, &mut state, 0, &mut |e| {
            if let EngineEvent::Iteration(r) = e {
                records.push(r.clone());
            }
        })
        .unwrap();
        assert!(records.len() > 1);
        for w in records.windows(2) {
            assert!(w[1].snapshot.objective <= w[0].snapshot.objective);
            assert!(w[1].snapshot.delta <= w[0].snapshot.delta);
        }
        for r in &records {
            assert!(r.snapshot.primal() + r.snapshot.fw_gap >= truth - 1e-8);
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mrf = random_grid(2, 3, 9);
        let rho = crate::tree::matrix_tree_init(&mrf, &[1.0; 7]).unwrap();
        let mut state = SolverState::new(&mrf, 0.01).unwrap();
        let config = EngineConfig { inner_gap_tol: 1e-12, max_inner_iters: 3, ..EngineConfig::default() };
        let s = fcfw_inner_loop(&mrf, &rho, &BruteForceOracle::default(), &config, &mut state, 0, &mut |_| {}).unwrap();
        assert!(!s.converged);
        assert_eq!(s.iterations, 3);
        assert_eq!(state.map_calls(), 4);
    }

    #[test]
    fn fixed_mode_keeps_delta() {
        let mrf = random_grid(2, 2, 4);
        let rho = crate::tree::matrix_tree_init(&mrf, &[1.0; 4]).unwrap();
        let mut state = SolverState::new(&mrf, 1e-4).unwrap();
        let config = EngineConfig { mode: DeltaMode::Fixed, inner_gap_tol: 1e-3, ..EngineConfig::default() };
        let mut deltas = Vec::new();
        fcfw_inner_loop(&mrf, &rho, &BruteForceOracle::default(), &config, &mut state, 0, &mut |e| {
            if let EngineEvent::Iteration(r) = e {
                deltas.push(r.snapshot.delta);
            }
        })
        .unwrap();
        assert!(deltas.iter().all(|&d| d == 1e-4));
    }

    #[test]
    fn local_search_with_zero_iterations_is_a_no_op() {
        let mrf = random_grid(2, 2, 5);
        let rho = crate::tree::matrix_tree_init(&mrf, &[1.0; 4]).unwrap();
        let mut state = SolverState::new(&mrf, 0.1).unwrap();
        let before = state.iterate().clone();
        let found = local_search(&mrf, &rho, &mut state, &Assignment::zeros(4), 0, 10).unwrap();
        assert!(found.is_empty());
        assert_eq!(state.iterate(), &before);
    }

    #[test]
    fn outer_loop_emits_one_summary_per_rho_iteration() {
        let mrf = random_grid(2, 2, 6);
        let rho = crate::tree::matrix_tree_init(&mrf, &[1.0; 4]).unwrap();
        let config = OuterConfig { max_rho_iters: 3, ..OuterConfig::default() };
        let r = trw_barrier_fw(&mrf, rho, &BruteForceOracle::default(), &config, &mut |_| {}).unwrap();
        assert_eq!(r.summaries.len(), 4);
        for (i, s) in r.summaries.iter().enumerate() {
            assert_eq!(s.rho_iteration, i);
        }
        // the literal schedule leaves rho unchanged on the first update
        assert_eq!(r.summaries[0].rho, r.summaries[1].rho);
    }
}
