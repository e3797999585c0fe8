use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cbx::{run_benchmark, BenchReport, ObjectiveKind, RunResult, Solver};
use serde::Serialize;

use crate::config::{parse_config, ConfigFile, Resolved};
use crate::error::{CliError, ConfigError};

/// Default success radius for `bench`.
pub const DEFAULT_TOLERANCE: f64 = 0.1;

#[derive(Clone, Debug, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct BenchArgs {
    pub config: PathBuf,
    pub runs: usize,
    pub base_seed: Option<u64>,
    pub tolerance: f64,
    pub report: Option<PathBuf>,
}

/// Final line of `run`.
#[derive(Debug, Serialize)]
pub struct RunOutput {
    #[serde(flatten)]
    pub result: RunResult<f64>,
    pub effective_config: ConfigFile,
}

/// Document written by `bench`.
#[derive(Debug, Serialize)]
pub struct BenchOutput {
    #[serde(flatten)]
    pub report: BenchReport,
    pub effective_config: ConfigFile,
}

pub fn load_config(path: &Path) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_config(&text)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Runs one optimization, streaming the trace as JSON Lines when requested,
/// and writes the single-line result to `out`.
pub fn cmd_run(args: &RunArgs, out: &mut impl Write) -> Result<RunOutput, CliError> {
    let mut resolved = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        resolved.config.seed = seed;
    }
    let trace_path = args.trace.clone().or_else(|| resolved.output.trace.clone());
    let mut trace = trace_path.as_deref().map(create).transpose()?;

    let objective = resolved.objective.handle::<f64>();
    let mut solver = Solver::new(resolved.config.clone(), &objective)?;
    let stop = loop {
        if let Some(reason) = solver.stop_reason() {
            break reason;
        }
        let record = solver.step()?;
        if let (Some(w), Some(path)) = (trace.as_mut(), trace_path.as_deref()) {
            serde_json::to_writer(&mut *w, record).map_err(|e| CliError::io(path, e.into()))?;
            w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
        }
    };
    if let (Some(mut w), Some(path)) = (trace, trace_path.as_deref()) {
        w.flush().map_err(|e| CliError::io(path, e))?;
    }

    let output = RunOutput {
        result: solver.result(stop),
        effective_config: resolved.echo(),
    };
    write_line(out, &output)?;
    Ok(output)
}

/// Runs a benchmark campaign and writes the report to `--report` (or the
/// config's `output.report`), falling back to `out`. The one-line summary
/// always goes to `out`.
pub fn cmd_bench(args: &BenchArgs, out: &mut impl Write) -> Result<BenchOutput, CliError> {
    if args.runs == 0 {
        return Err(ConfigError {
            key: "runs".into(),
            line: None,
            reason: "must be at least 1".into(),
        }
        .into());
    }
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(ConfigError {
            key: "tolerance".into(),
            line: None,
            reason: "must be >= 0".into(),
        }
        .into());
    }
    let mut resolved = load_config(&args.config)?;
    let base_seed = args.base_seed.unwrap_or(resolved.config.seed);
    resolved.config.seed = base_seed;
    let report = run_benchmark::<f64>(
        &resolved.config,
        &resolved.objective,
        args.runs,
        base_seed,
        args.tolerance,
    )?;
    let summary = format!(
        "{}: success_rate {:.3} ({}/{}), mean evals {:.1}, mean wall {:.3} ms",
        resolved.objective.name(),
        report.success_rate,
        report.successes,
        report.runs,
        report.mean_evals(),
        report.mean_wall_ms()
    );
    let output = BenchOutput {
        report,
        effective_config: resolved.echo(),
    };

    match args
        .report
        .clone()
        .or_else(|| resolved.output.report.clone())
    {
        Some(path) => {
            let mut w = create(&path)?;
            serde_json::to_writer_pretty(&mut w, &output)
                .map_err(|e| CliError::io(&path, e.into()))?;
            w.write_all(b"\n")
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&path, e))?;
        }
        None => write_line(out, &output)?,
    }
    writeln!(out, "{summary}").map_err(|e| CliError::io("<stdout>", e))?;
    Ok(output)
}

/// Prints the built-in objectives.
pub fn cmd_list(out: &mut impl Write) -> Result<(), CliError> {
    let mut text = String::from("name       dimensions  minimizer  minimum\n");
    for kind in ObjectiveKind::ALL {
        text.push_str(&format!(
            "{:<10} {:<11} {:<10} {}\n",
            kind.name(),
            "any >= 1",
            "origin",
            0.0
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}

fn write_line(out: &mut impl Write, value: &impl Serialize) -> Result<(), CliError> {
    let line = serde_json::to_string(value).map_err(|e| CliError::io("<stdout>", e.into()))?;
    writeln!(out, "{line}").map_err(|e| CliError::io("<stdout>", e))
}
