use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use trwfw_bench::experiment::{run_experiment, run_trial, ExperimentSpec, Family, OracleKind};
use trwfw_bench::output::{run_metadata, write_csv, write_meta, write_trial};
use trwfw_bench::uai::save_uai;
use trwfw_bench::BenchError;
use trwfw_core::fw::{DeltaMode, EngineConfig, OuterConfig};
use trwfw_core::tree::RhoStepSchedule;

#[derive(Parser)]
#[command(name = "trwfw", version, about = "TRW marginal inference with Frank-Wolfe over contracted marginal polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance in UAI format.
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run inference on one instance and print a JSON summary.
    Infer {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write records and per-iteration traces as JSON lines here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run repeated trials and write JSON lines plus a CSV summary.
    Bench {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON lines output; the CSV summary goes next to it with a `.csv`
        /// extension.
        #[arg(long)]
        out: PathBuf,
        /// Leave per-iteration traces out of the JSON lines.
        #[arg(long)]
        no_traces: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Clique,
    Grid,
    Uai,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Clique)]
    family: FamilyArg,
    /// Clique size.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    /// Coupling strength; edge values are drawn from U[-theta, theta].
    #[arg(long, default_value_t = 4.0)]
    theta: f64,
    /// UAI file for `--family uai`.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl InstanceArgs {
    fn family(&self) -> Result<Family, BenchError> {
        Ok(match self.family {
            FamilyArg::Clique => Family::Clique { n: self.n },
            FamilyArg::Grid => Family::Grid { rows: self.rows, cols: self.cols },
            FamilyArg::Uai => Family::Uai {
                path: self.input.clone().ok_or_else(|| BenchError::Spec("--family uai needs --input".into()))?,
            },
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Adaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhoStepArg {
    Literal,
    Standard,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = OracleKind::Exact)]
    oracle: OracleKind,
    #[arg(long, value_enum, default_value_t = ModeArg::Adaptive)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.01)]
    delta_init: f64,
    #[arg(long, default_value_t = 1e-4)]
    delta_fixed: f64,
    /// Inner loop gap tolerance.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    correction_tol: Option<f64>,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Number of edge appearance updates.
    #[arg(long, default_value_t = 10)]
    rho_iters: usize,
    #[arg(long, value_enum, default_value_t = RhoStepArg::Literal)]
    rho_step: RhoStepArg,
    #[arg(long, overrides_with = "no_correction")]
    correction: bool,
    #[arg(long)]
    no_correction: bool,
    #[arg(long, overrides_with = "no_local_search")]
    local_search: bool,
    #[arg(long)]
    no_local_search: bool,
    #[arg(long, default_value_t = 5)]
    local_search_iters: usize,
    /// Write zero wall times so that output is reproducible.
    #[arg(long)]
    no_timing: bool,
}

impl EngineArgs {
    fn apply(&self, spec: &mut ExperimentSpec) {
        let engine = EngineConfig {
            mode: match self.mode {
                ModeArg::Fixed => DeltaMode::Fixed,
                ModeArg::Adaptive => DeltaMode::Adaptive,
            },
            delta_init: self.delta_init,
            delta_fixed: self.delta_fixed,
            inner_gap_tol: self.eps,
            correction_tol: self.correction_tol,
            max_inner_iters: self.max_iters,
            use_correction: !self.no_correction,
            use_local_search: self.local_search && !self.no_local_search,
            local_search_iters: self.local_search_iters,
            ..EngineConfig::default()
        };
        spec.config = OuterConfig {
            engine,
            max_rho_iters: self.rho_iters,
            rho_step: match self.rho_step {
                RhoStepArg::Literal => RhoStepSchedule::Literal,
                RhoStepArg::Standard => RhoStepSchedule::Standard,
            },
        };
        spec.oracle = self.oracle;
        spec.timing = !self.no_timing;
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, BenchError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Gen { instance, seed, out } => {
            let spec = ExperimentSpec { seed, ..ExperimentSpec::new(instance.family()?, instance.theta) };
            let mrf = spec.instance(0)?;
            match out {
                Some(path) => save_uai(&mrf, &path)?,
                None => print!("{}", trwfw_bench::uai::write_uai(&mrf)),
            }
        }
        Command::Infer { instance, engine, seed, out } => {
            let mut spec = ExperimentSpec { seed, ..ExperimentSpec::new(instance.family()?, instance.theta) };
            engine.apply(&mut spec);
            spec.validate()?;
            let trial = run_trial(&spec, 0)?;
            if let Some(path) = out {
                let mut w = create(&path)?;
                write_meta(&mut w, &run_metadata(&spec))?;
                write_trial(&mut w, &trial, true)?;
                w.flush()?;
            }
            let last = trial.records.last().expect("one record per inner loop");
            let summary = json!({
                "primal": last.primal,
                "fw_gap": last.fw_gap,
                "bound": last.bound,
                "logz_true": trial.logz_true,
                "zeta_mu": last.zeta_mu,
                "zeta_logz": last.zeta_logz,
                "map_calls": last.map_calls,
                "icm_calls": last.icm_calls,
                "rho_iterations": trial.records.len(),
                "rho": trial.rho,
                "node_marginals": trial.node_marginals,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Bench { instance, engine, trials, seed, out, no_traces } => {
            let mut spec = ExperimentSpec { seed, trials, ..ExperimentSpec::new(instance.family()?, instance.theta) };
            engine.apply(&mut spec);
            let results = run_experiment(&spec)?;
            let mut w = create(&out)?;
            write_meta(&mut w, &run_metadata(&spec))?;
            let mut records = Vec::new();
            let mut failure = None;
            for r in results {
                match r {
                    Ok(trial) => {
                        write_trial(&mut w, &trial, !no_traces)?;
                        records.extend(trial.records);
                    }
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            w.flush()?;
            write_csv(create(&out.with_extension("csv"))?, &records)?;
            if let Some(e) = failure {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
