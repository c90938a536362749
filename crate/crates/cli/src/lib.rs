//! Scenario runner for `landscape-core`: JSON scenarios in, CSV tables and
//! SVG plots out, with a nonzero exit status when a requested check fails.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod figures;
pub mod output;
pub mod run;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub use output::{emit_csv, emit_svg, read_csv, PlotSpec, ResultTable};
pub use run::{run_scenario, Certification, RunOutput};
pub use scenario::{parse_scenario, parse_scenario_str, Figure, Scenario, ScenarioError, Task};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "LANDSCAPE_LAB_THREADS";

/// Merge the command-line target into a scenario document. `target` is a task
/// name or a figure alias; a task already in the document must agree with it.
pub fn apply_target(doc: Option<Value>, target: &str) -> Result<Value> {
    let mut doc = doc.unwrap_or_else(|| Value::Object(Map::new()));
    let Some(obj) = doc.as_object_mut() else { bail!("scenario document must be a JSON object") };
    let given = obj.get("task").and_then(Value::as_str).map(str::to_owned);
    let given_figure = obj.get("figure").and_then(Value::as_str).map(str::to_owned);
    if let Some(f) = Figure::parse(target) {
        let agrees = match given.as_deref() {
            None => given_figure.as_deref().is_none_or(|g| g == f.name()),
            Some("figure") => given_figure.as_deref().is_none_or(|g| g == f.name()),
            Some(t) => t == f.name() && given_figure.is_none(),
        };
        if !agrees {
            bail!("scenario task {:?} / figure {:?} conflicts with `{target}`", given, given_figure);
        }
        obj.insert("task".into(), Value::from("figure"));
        obj.insert("figure".into(), Value::from(f.name()));
    } else {
        if !Task::NAMES.contains(&target) || target == "figure" {
            bail!("unknown task `{target}`; expected one of {} or fig1..fig6", Task::NAMES[..7].join(", "));
        }
        if let Some(t) = given.as_deref().filter(|t| *t != target) {
            bail!("scenario task `{t}` conflicts with `{target}`");
        }
        obj.insert("task".into(), Value::from(target));
    }
    Ok(doc)
}

/// SHA-256 of the compact serialization (keys sorted) of a scenario document.
pub fn scenario_digest(doc: &Value) -> String {
    let text = serde_json::to_string(doc).expect("JSON values serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn provenance(task: &str, digest: &str, table: &str, reproducible: bool) -> Vec<String> {
    let mut lines = vec![
        format!("landscape-lab {}", env!("CARGO_PKG_VERSION")),
        format!("landscape-core {}", landscape_core::VERSION),
        format!("task {task}"),
        format!("table {table}"),
        format!("scenario-sha256 {digest}"),
    ];
    if !reproducible {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        lines.push(format!("generated-unix {secs}"));
    }
    lines
}

/// Write every table as `<name>.csv`, plus `<name>.svg` where a plot is attached.
pub fn write_outputs(
    run: &RunOutput,
    dir: &Path,
    task: &str,
    digest: &str,
    reproducible: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for a in &run.artifacts {
        let csv = dir.join(format!("{}.csv", a.table.name));
        emit_csv(&a.table, &csv, &provenance(task, digest, &a.table.name, reproducible))?;
        written.push(csv);
        if let Some(plot) = &a.plot {
            let svg = dir.join(format!("{}.svg", a.table.name));
            emit_svg(&a.table, &svg, plot)?;
            written.push(svg);
        }
    }
    Ok(written)
}
