//! Line-delimited JSON and CSV emission.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::experiment::{ExperimentSpec, Family, MetricsRecord, TraceLine, TrialOutput, SCHEMA_VERSION};
use crate::BenchError;

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line<'a> {
    Meta(&'a Value),
    Record(&'a MetricsRecord),
    Trace(&'a TraceLine),
}

/// Description of the run, written as the first output line.
pub fn run_metadata(spec: &ExperimentSpec) -> Value {
    let family = match &spec.family {
        Family::Clique { n } => json!({ "name": "clique", "n": n }),
        Family::Grid { rows, cols } => json!({ "name": "grid", "rows": rows, "cols": cols }),
        Family::Uai { path } => json!({ "name": "uai", "path": path.display().to_string() }),
    };
    let e = &spec.config.engine;
    json!({
        "schema_version": SCHEMA_VERSION,
        "family": family,
        "theta": spec.theta,
        "node_potentials": "(-t, t) with t ~ U[-1, 1]",
        "edge_potentials": format!("(t, -t; -t, t) with t ~ U[-{0}, {0}]", spec.theta),
        "trials": spec.trials,
        "seed": spec.seed,
        "oracle": spec.oracle,
        "mode": format!("{:?}", e.mode).to_lowercase(),
        "delta_init": e.delta_init,
        "delta_fixed": e.delta_fixed,
        "eps": e.inner_gap_tol,
        "correction_tol": e.correction_tolerance(),
        "max_inner_iters": e.max_inner_iters,
        "correction": e.use_correction,
        "local_search": e.use_local_search,
        "local_search_iters": e.local_search_iters,
        "rho_iters": spec.config.max_rho_iters,
        "rho_step": format!("{:?}", spec.config.rho_step).to_lowercase(),
        "rho_init": "matrix-tree, weights 1 + sum |theta_ij|",
    })
}

pub fn write_meta(out: &mut impl Write, meta: &Value) -> Result<(), BenchError> {
    serde_json::to_writer(&mut *out, &Line::Meta(meta))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes the trial's records, then its traces when `traces` is set.
pub fn write_trial(out: &mut impl Write, trial: &TrialOutput, traces: bool) -> Result<(), BenchError> {
    for r in &trial.records {
        serde_json::to_writer(&mut *out, &Line::Record(r))?;
        out.write_all(b"\n")?;
    }
    if traces {
        for t in &trial.traces {
            serde_json::to_writer(&mut *out, &Line::Trace(t))?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// One CSV row per metrics record.
pub fn write_csv<'a>(out: impl Write, records: impl IntoIterator<Item = &'a MetricsRecord>) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
