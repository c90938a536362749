use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use landscape_lab::{apply_target, parse_scenario, run_scenario, scenario_digest, write_outputs};

/// Run a landscape scenario or reproduce a figure.
#[derive(Debug, Parser)]
#[command(name = "landscape-lab", version)]
struct Args {
    /// Task (spectrum, landscape, verify, lowerbound, heatkernel, plap,
    /// magnetic) or figure alias (fig1..fig6).
    target: String,
    /// Scenario JSON file; optional for figures.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory; overrides the scenario's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp from provenance lines so reruns are byte-identical.
    #[arg(long)]
    reproducible: bool,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(landscape_lab::THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{} must be a positive integer, got {raw:?}", landscape_lab::THREADS_ENV))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().context("configuring the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main_inner(args: Args) -> Result<bool> {
    configure_threads()?;
    let doc = match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
        }
        None => None,
    };
    if doc.is_none() && landscape_lab::Figure::parse(&args.target).is_none() {
        anyhow::bail!("task `{}` needs --scenario", args.target);
    }
    let doc = apply_target(doc, &args.target)?;
    let scenario = parse_scenario(&doc)?;
    let result = run_scenario(&scenario)?;
    let dir = args.out.clone().or_else(|| scenario.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let written = write_outputs(&result, &dir, scenario.task.name(), &scenario_digest(&doc), args.reproducible)?;
    for note in &result.notes {
        eprintln!("note: {note}");
    }
    for c in &result.certifications {
        println!("{} {}: {}", if c.certified { "PASS" } else { "FAIL" }, c.label, c.detail);
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(result.all_certified())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
