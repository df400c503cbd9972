//! Experiment orchestration: instance generation, edge appearance
//! initialisation, the optimiser run, and metric records.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use trwfw_core::exact::{exact_inference, DEFAULT_STATE_CAP};
use trwfw_core::fw::{trw_barrier_fw, EngineEvent, OuterConfig};
use trwfw_core::tree::{default_matrix_tree_weights, matrix_tree_init};
use trwfw_core::{BruteForceOracle, IcmOracle, MapOracle, MarginalVector, MarkovRandomField, Portfolio};

use crate::generators::{gen_clique, gen_grid, trial_rng};
use crate::metrics::{zeta_logz, zeta_mu};
use crate::uai::read_uai;
use crate::BenchError;

/// Version of the record layout in every output line and CSV row.
pub const SCHEMA_VERSION: u32 = 1;

/// ICM sweep cap used by the approximate oracles.
pub const ICM_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Clique { n: usize },
    Grid { rows: usize, cols: usize },
    Uai { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    /// Exhaustive search.
    Exact,
    /// ICM warm-started at the previous vertex.
    Icm,
    /// Best of several ICM starts.
    Portfolio,
}

impl OracleKind {
    pub fn is_exact(self) -> bool {
        self == Self::Exact
    }

    pub fn build(self, mrf: &MarkovRandomField) -> Box<dyn MapOracle> {
        match self {
            Self::Exact => Box::new(BruteForceOracle { cap: DEFAULT_STATE_CAP }),
            Self::Icm => Box::new(IcmOracle::new(ICM_SWEEPS)),
            Self::Portfolio => Box::new(Portfolio::approximate(ICM_SWEEPS, mrf.num_vars())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub family: Family,
    /// Coupling strength: edge values are drawn from `U[-theta, theta]`.
    pub theta: f64,
    pub trials: usize,
    pub seed: u64,
    pub oracle: OracleKind,
    pub config: OuterConfig,
    /// Largest joint state space for which exact metrics are computed.
    pub truth_cap: u128,
    /// Record wall-clock times; off makes output bit-reproducible.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(family: Family, theta: f64) -> Self {
        Self {
            family,
            theta,
            trials: 1,
            seed: 0,
            oracle: OracleKind::Exact,
            config: OuterConfig::default(),
            truth_cap: DEFAULT_STATE_CAP,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Spec("trial count must be at least 1".into()));
        }
        self.config.engine.validate()?;
        Ok(())
    }

    /// The instance of trial `trial`.
    pub fn instance(&self, trial: usize) -> Result<MarkovRandomField, BenchError> {
        let mut rng = trial_rng(self.seed, trial as u64);
        match &self.family {
            Family::Clique { n } => gen_clique(*n, self.theta, &mut rng),
            Family::Grid { rows, cols } => gen_grid(*rows, *cols, self.theta, &mut rng),
            Family::Uai { path } => Ok(read_uai(path)?),
        }
    }
}

/// Metrics after one inner loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub schema_version: u32,
    pub trial: usize,
    pub rho_iteration: usize,
    pub zeta_mu: Option<f64>,
    pub zeta_logz: Option<f64>,
    pub logz_true: Option<f64>,
    /// TRW value at the iterate.
    pub primal: f64,
    pub fw_gap: f64,
    /// `primal + fw_gap`; an upper bound on `log Z` for exact oracles.
    pub bound: f64,
    pub delta: f64,
    pub map_calls: u64,
    pub icm_calls: u64,
    pub inner_iterations: usize,
    pub converged: bool,
    pub wall_time: f64,
}

/// One inner iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceLine {
    pub schema_version: u32,
    pub trial: usize,
    pub rho_iteration: usize,
    pub iteration: usize,
    pub delta: f64,
    pub fw_gap: f64,
    pub contracted_gap: f64,
    pub uniform_gap: f64,
    pub primal: f64,
    pub bound: f64,
    pub map_calls: u64,
    pub icm_calls: u64,
    pub step_size: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutput {
    pub trial: usize,
    pub records: Vec<MetricsRecord>,
    pub traces: Vec<TraceLine>,
    pub logz_true: Option<f64>,
    /// Node marginals at the end of the run.
    pub node_marginals: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
}

/// Runs one trial of `spec`.
pub fn run_trial(spec: &ExperimentSpec, trial: usize) -> Result<TrialOutput, BenchError> {
    let mrf = spec.instance(trial)?;
    let truth = if mrf.layout().state_space() <= spec.truth_cap {
        Some(exact_inference(&mrf, spec.truth_cap)?)
    } else {
        None
    };
    let rho = matrix_tree_init(&mrf, &default_matrix_tree_weights(&mrf))?;
    let oracle = spec.oracle.build(&mrf);
    let binary = mrf.cardinalities().iter().all(|&c| c == 2);
    let exact = spec.oracle.is_exact();
    let start = Instant::now();
    let elapsed = |start: &Instant| if spec.timing { start.elapsed().as_secs_f64() } else { 0.0 };

    let mut traces = Vec::new();
    let mut records = Vec::new();
    let mut metric_error = None;
    let mut observer = |event: &EngineEvent| match event {
        EngineEvent::Iteration(r) => {
            let s = &r.snapshot;
            traces.push(TraceLine {
                schema_version: SCHEMA_VERSION,
                trial,
                rho_iteration: r.rho_iteration,
                iteration: r.iteration,
                delta: s.delta,
                fw_gap: s.fw_gap,
                contracted_gap: s.contracted_gap,
                uniform_gap: s.uniform_gap,
                primal: s.primal(),
                bound: s.primal() + s.fw_gap,
                map_calls: r.map_calls,
                icm_calls: r.icm_calls,
                step_size: r.step.map(|st| st.gamma),
                wall_time: elapsed(&start),
            });
        }
        EngineEvent::RhoIteration(summary) => {
            let s = &summary.snapshot;
            let (zm, zl) = match &truth {
                Some((logz, mu_star)) => {
                    let zm = if binary {
                        match zeta_mu(&summary.marginals, mu_star) {
                            Ok(v) => Some(v),
                            Err(e) => {
                                metric_error.get_or_insert(e);
                                None
                            }
                        }
                    } else {
                        None
                    };
                    (zm, Some(zeta_logz(s.primal(), s.fw_gap, *logz, exact)))
                }
                None => (None, None),
            };
            records.push(MetricsRecord {
                schema_version: SCHEMA_VERSION,
                trial,
                rho_iteration: summary.rho_iteration,
                zeta_mu: zm,
                zeta_logz: zl,
                logz_true: truth.as_ref().map(|t| t.0),
                primal: s.primal(),
                fw_gap: s.fw_gap,
                bound: s.primal() + s.fw_gap,
                delta: s.delta,
                map_calls: summary.map_calls,
                icm_calls: summary.icm_calls,
                inner_iterations: summary.inner_iterations,
                converged: summary.converged,
                wall_time: elapsed(&start),
            });
        }
        EngineEvent::Reinit { .. } => {}
    };
    let result = trw_barrier_fw(&mrf, rho, oracle.as_ref(), &spec.config, &mut observer)?;
    if let Some(e) = metric_error {
        return Err(e);
    }
    Ok(TrialOutput {
        trial,
        records,
        traces,
        logz_true: truth.map(|t| t.0),
        node_marginals: node_marginals(result.marginals()),
        rho: result.rho.into_vec(),
    })
}

fn node_marginals(mu: &MarginalVector) -> Vec<Vec<f64>> {
    (0..mu.layout().num_vars()).map(|v| mu.node(v).to_vec()).collect()
}

/// Runs every trial, in parallel, returning per-trial results in trial order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Result<TrialOutput, BenchError>>, BenchError> {
    spec.validate()?;
    Ok((0..spec.trials).into_par_iter().map(|t| run_trial(spec, t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_are_rejected() {
        let spec = ExperimentSpec { trials: 0, ..ExperimentSpec::new(Family::Clique { n: 3 }, 1.0) };
        assert!(run_experiment(&spec).is_err());
    }

    #[test]
    fn single_inner_loop_gives_one_record() {
        let mut spec = ExperimentSpec::new(Family::Grid { rows: 2, cols: 2 }, 1.0);
        spec.config.max_rho_iters = 0;
        let out = run_trial(&spec, 0).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.records[0].zeta_logz.unwrap() >= -1e-8);
        assert!(!out.traces.is_empty());
    }
}
