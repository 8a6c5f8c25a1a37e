//! File-level front end: loads a JSON simulation config, runs single
//! simulations or sweeps, and writes CSV/JSON results.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;
use urllc_core::{
    run_simulation, run_sweep, FrameTrace, SimConfig, SimRun, SimSummary, SweepRow, SweepSpec,
};

pub const TRACE_HEADER: &str = "frame,generated,allocated,r,alpha_f,theta_f,u_size";
pub const SWEEP_HEADER: &str = "p,p_hat,scheduler,seed,reliability_rate,embb_efficiency";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<urllc_core::Error> for CliError {
    fn from(e: urllc_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: SimConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// Runs one simulation and writes its per-frame trace and summary.
pub fn cmd_run(
    config_path: &Path,
    seed_override: Option<u64>,
    outputs: &OutputPaths,
) -> Result<SimRun, CliError> {
    let mut config = load_config(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let run = run_simulation(&config)?;
    write_file(&outputs.trace_path, &trace_csv(&run.traces))?;
    write_file(&outputs.summary_path, &summary_json(&run.summary))?;
    Ok(run)
}

/// Runs the `(p, p_hat)` grid for both schedulers and writes the table.
pub fn cmd_sweep(
    config_path: &Path,
    p_grid: &[f64],
    p_hat_grid: &[f64],
    seeds: &[u64],
    sweep_path: &Path,
) -> Result<Vec<SweepRow>, CliError> {
    let spec = SweepSpec {
        base: load_config(config_path)?,
        p_grid: p_grid.to_vec(),
        p_hat_grid: p_hat_grid.to_vec(),
        seeds: seeds.to_vec(),
    };
    let rows = run_sweep(&spec)?;
    write_file(sweep_path, &sweep_csv(&rows))?;
    Ok(rows)
}

pub fn trace_csv(traces: &[FrameTrace]) -> String {
    let mut out = String::with_capacity(32 * (traces.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for t in traces {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.frame_index,
            t.generated,
            t.allocated,
            t.reliability,
            format_real(t.alpha_f),
            format_real(t.theta_f),
            t.allocated_count
        );
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_real(r.p),
            format_real(r.p_hat),
            r.scheduler,
            r.seed,
            format_real(r.reliability_rate),
            format_real(r.embb_efficiency)
        );
    }
    out
}

pub fn summary_json(summary: &SimSummary) -> String {
    #[derive(Serialize)]
    struct Out {
        frames: usize,
        reliability_rate: f64,
        embb_efficiency: f64,
        trailing_200_reliability: f64,
    }
    let out = Out {
        frames: summary.num_frames,
        reliability_rate: round_real(summary.reliability_rate),
        embb_efficiency: round_real(summary.embb_efficiency),
        trailing_200_reliability: round_real(summary.trailing_reliability),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("plain struct serializes");
    s.push('\n');
    s
}

/// Formats a real with 9 significant digits, `%g` style: trailing zeros
/// dropped, scientific notation only for very small or large magnitudes.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round_real(v: f64) -> f64 {
    format_real(v).parse().expect("formatted real parses")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(path, contents).map_err(io_err)
}

/// Parses a comma-separated list of grid values in `[0, 0.5]`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|tok| {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("not a number: {tok:?}")))?;
            if !(0.0..=0.5).contains(&v) {
                return Err(CliError::Config(format!("grid value {v} outside [0, 0.5]")));
            }
            Ok(v)
        })
        .collect()
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("not a seed: {tok:?}")))
        })
        .collect()
}
