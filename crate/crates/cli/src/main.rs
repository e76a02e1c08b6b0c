//! `qcontrol`: runs the quantum-controlled delayed-choice and CHSH
//! experiments and writes CSV/JSON plot data and reports.
//!
//! Exit status is 0 when every internal check passes, 2 when a check fails
//! (each failing check is named on stderr) and 1 on invalid input or I/O
//! errors.

mod args;
mod commands;

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use qcontrol::delayed_choice::default_alpha_grid;

use args::{Cli, Command, Defaults, Format, RunConfig, OUT_DIR_ENV};
use commands::Output;

const EXIT_INPUT: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(failed) if failed.is_empty() => ExitCode::SUCCESS,
        Ok(failed) => {
            for name in failed {
                eprintln!("check failed: {name}");
            }
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

/// Runs the command, writes its output and returns the names of failed checks.
fn run(cli: Cli) -> Result<Vec<&'static str>> {
    let all_slices: Vec<f64> = default_alpha_grid().into_iter().map(|a| a.0).collect();
    let (cfg, output) = match &cli.command {
        Command::Morphing(a) => {
            let cfg = RunConfig::from_common(
                &a.common,
                Defaults { experiment: "morphing", alphas: all_slices, format: Format::Csv },
            )?;
            let out = commands::morphing(&cfg)?;
            (cfg, out)
        }
        Command::DelayedChoice(a) => {
            let cfg = RunConfig::from_common(
                &a.common,
                Defaults { experiment: "delayed-choice", alphas: vec![FRAC_PI_4], format: Format::Json },
            )?;
            let out = commands::delayed_choice(a, &cfg)?;
            (cfg, out)
        }
        Command::HvReport(a) => {
            let cfg = RunConfig::from_common(
                &a.common,
                Defaults { experiment: "hv-report", alphas: vec![FRAC_PI_4], format: Format::Json },
            )?;
            let out = commands::hv_report(a, &cfg)?;
            (cfg, out)
        }
        Command::Chsh(a) => {
            let cfg = RunConfig::from_common(
                &a.common,
                Defaults { experiment: "chsh", alphas: vec![FRAC_PI_4], format: Format::Json },
            )?;
            let out = commands::chsh(a, &cfg)?;
            (cfg, out)
        }
    };
    emit(&cfg, &output)?;
    for c in &output.checks {
        eprintln!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(output.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect())
}

fn destination(cfg: &RunConfig) -> Result<Option<PathBuf>> {
    if let Some(path) = &cfg.out {
        return Ok(Some(path.clone()));
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => {
            let dir = PathBuf::from(dir);
            fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let ext = match cfg.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            Ok(Some(dir.join(format!("{}.{ext}", cfg.experiment))))
        }
        _ => Ok(None),
    }
}

fn emit(cfg: &RunConfig, output: &Output) -> Result<()> {
    match destination(cfg)? {
        Some(path) => {
            fs::write(&path, &output.body).with_context(|| format!("cannot write {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(output.body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
