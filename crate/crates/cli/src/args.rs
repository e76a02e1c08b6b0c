use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI, TAU};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QCONTROL_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "qcontrol", version, about = "Quantum-controlled delayed-choice and CHSH experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wave-particle morphing surface I(φ, α) as plot data.
    Morphing(MorphingArgs),
    /// Joint tables, conditional patterns, visibilities and equivalence checks.
    DelayedChoice(DelayedChoiceArgs),
    /// Hidden-variable solution families and the classical-control analysis.
    HvReport(HvReportArgs),
    /// Quantum-controlled CHSH experiment.
    Chsh(ChshArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Single interferometer phase.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Phase sweep `START:END:STEP` over the half-open range [START, END).
    #[arg(long, value_name = "START:END:STEP", allow_hyphen_values = true)]
    pub phi_range: Option<String>,
    /// Ancilla bias; repeat for several slices.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    /// Interpret every angle argument in degrees.
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo shots per grid point (0 disables sampling).
    #[arg(long, default_value_t = 0)]
    pub samples: u64,
    /// Output file; defaults to $QCONTROL_OUT_DIR/<command>.<ext> or stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct MorphingArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Single,
    Entangled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    PhotonFirst,
    AncillaFirst,
}

#[derive(Debug, Args)]
pub struct DelayedChoiceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Variant::Single)]
    pub variant: Variant,
    /// Which qubit is read out first when tabulating the quantum-controlled circuit.
    #[arg(long, value_enum, default_value_t = Order::PhotonFirst)]
    pub order: Order,
    /// Number of φ samples used for numeric visibility (minimum 256).
    #[arg(long, default_value_t = 256)]
    pub visibility_grid: usize,
}

#[derive(Debug, Args)]
pub struct HvReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Impose v = z (spacelike-separated classical control) and re-solve.
    #[arg(long)]
    pub classical: bool,
    /// Accept cos²α ∈ {0, 1} and report the collapsed system.
    #[arg(long)]
    pub allow_degenerate: bool,
    /// Cross-check the families by exhaustive grid search with this many steps per axis (0 skips).
    #[arg(long, default_value_t = 0)]
    pub grid_steps: usize,
}

#[derive(Debug, Args)]
pub struct ChshArgs {
    #[command(flatten)]
    pub common: Common,
    /// Alice's setting on ancilla 0 (default 0).
    #[arg(long = "a", allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Alice's setting on ancilla 1 (default π/2).
    #[arg(long = "a-prime", allow_hyphen_values = true)]
    pub a_prime: Option<f64>,
    /// Bob's setting on ancilla 0 (default π/4).
    #[arg(long = "b", allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Bob's setting on ancilla 1 (default −π/4).
    #[arg(long = "b-prime", allow_hyphen_values = true)]
    pub b_prime: Option<f64>,
    /// Bias of Alice's ancilla (default π/4).
    #[arg(long, allow_hyphen_values = true)]
    pub bias_alice: Option<f64>,
    /// Bias of Bob's ancilla (default π/4).
    #[arg(long, allow_hyphen_values = true)]
    pub bias_bob: Option<f64>,
    /// Use the product state |00⟩ instead of the Bell pair.
    #[arg(long)]
    pub separable: bool,
}

impl ChshArgs {
    /// `[a, a′, b, b′, bias_alice, bias_bob]` in radians.
    pub fn angles(&self) -> [f64; 6] {
        let unit = if self.common.degrees { PI / 180.0 } else { 1.0 };
        let pick = |v: Option<f64>, default: f64| v.map_or(default, |v| v * unit);
        [
            pick(self.a, 0.0),
            pick(self.a_prime, PI / 2.0),
            pick(self.b, FRAC_PI_4),
            pick(self.b_prime, -FRAC_PI_4),
            pick(self.bias_alice, FRAC_PI_4),
            pick(self.bias_bob, FRAC_PI_4),
        ]
    }
}

/// Validated run parameters shared by every subcommand, angles in radians.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub experiment: &'static str,
    pub phi_start: f64,
    pub phi_end: f64,
    pub phi_step: f64,
    pub phi: f64,
    pub alphas: Vec<f64>,
    pub seed: u64,
    pub samples: u64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub struct Defaults {
    pub experiment: &'static str,
    pub alphas: Vec<f64>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_common(c: &Common, defaults: Defaults) -> Result<Self> {
        let unit = if c.degrees { PI / 180.0 } else { 1.0 };
        let (phi_start, phi_end, phi_step) = match &c.phi_range {
            Some(spec) => {
                let (s, e, st) = parse_range(spec)?;
                (s * unit, e * unit, st * unit)
            }
            None => (0.0, TAU, PI / 64.0),
        };
        if phi_step.is_nan() || phi_step <= 0.0 || !phi_step.is_finite() {
            bail!("phi step must be positive, got {phi_step}");
        }
        if phi_end.is_nan() || phi_start.is_nan() || phi_end <= phi_start {
            bail!("phi range is empty: [{phi_start}, {phi_end})");
        }
        let alphas = if c.alpha.is_empty() { defaults.alphas } else { c.alpha.iter().map(|a| a * unit).collect() };
        if alphas.iter().any(|a| !a.is_finite()) {
            bail!("alpha values must be finite");
        }
        let phi = c.phi.map(|p| p * unit).unwrap_or(FRAC_PI_3);
        if !phi.is_finite() {
            bail!("phi must be finite");
        }
        Ok(Self {
            experiment: defaults.experiment,
            phi_start,
            phi_end,
            phi_step,
            phi,
            alphas,
            seed: c.seed,
            samples: c.samples,
            format: c.format.unwrap_or(defaults.format),
            out: c.out.clone(),
        })
    }

    /// `start + k·step` for every `k` keeping the value below `end`.
    pub fn phi_grid(&self) -> Vec<f64> {
        let n = ((self.phi_end - self.phi_start) / self.phi_step - 1e-9).ceil().max(1.0) as usize;
        (0..n).map(|k| self.phi_start + k as f64 * self.phi_step).collect()
    }
}

fn parse_range(spec: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("--phi-range expects START:END:STEP, got {spec:?}");
    }
    let num = |s: &str| s.trim().parse::<f64>().with_context(|| format!("invalid number {s:?} in --phi-range"));
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?))
}
