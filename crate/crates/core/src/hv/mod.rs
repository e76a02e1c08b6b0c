//! Binary hidden-variable models of the biased delayed-choice interferometer.
//!
//! The hidden variable `λ` says whether the source emitted a particle (`p`)
//! or a wave (`w`). Realism pins two of the four photon conditionals:
//! a particle in the open interferometer (`b = 0`) exits either port with
//! probability ½, and a wave in the closed one (`b = 1`) follows
//! `(cos²(φ/2), sin²(φ/2))`. The remaining unknowns are
//!
//! | scalar | meaning |
//! |---|---|
//! | `f` | `p(λ = p)` |
//! | `x` | `p(a = 0 | b = 0, λ = w)` |
//! | `y` | `p(a = 0 | b = 1, λ = p)` |
//! | `z` | `p(b = 0 | λ = p)` |
//! | `v` | `p(b = 0 | λ = w)` |
//!
//! A model is *adequate* when its joint `p(a, b)` equals the quantum one,
//! which reduces to three polynomial residuals vanishing (see
//! [`adequacy_residuals`]).

mod families;
mod grid;
mod theory;

use serde::{Deserialize, Serialize};

pub use families::{
    classical_control_analysis, enumerate_solution_families, ClassicalControlReport, Constraint,
    FamilyReport, Interpretation, Reachability, SolutionFamily, SpecialCase, Var,
};
pub use grid::{grid_search, GridConstraint, GridSearch};
pub use theory::{HvTheory, Verdict};

pub use crate::joint::JointDistribution;
use crate::delayed_choice::{BiasAngle, PhaseAngle};
use crate::error::{Error, Result};
use crate::quantum::EXACT_TOL;

/// Residual threshold below which a model counts as adequate.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// A probability pair `(p₀, p₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryDistribution {
    pub p0: f64,
    pub p1: f64,
}

impl BinaryDistribution {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        for (name, value) in [("p0", p0), ("p1", p1)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        if (p0 + p1 - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(p0 + p1));
        }
        Ok(Self { p0, p1 })
    }

    /// `(p, 1 − p)`.
    pub fn with_first(p0: f64) -> Result<Self> {
        Self::new(p0, 1.0 - p0)
    }

    pub fn get(&self, k: usize) -> f64 {
        if k == 0 { self.p0 } else { self.p1 }
    }
}

/// The five scalars of a candidate hidden-variable theory together with the
/// experimental context `(φ, α)` they are meant to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvModel {
    pub f: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v: f64,
    pub phi: f64,
    pub alpha: f64,
}

impl HvModel {
    pub fn new(f: f64, x: f64, y: f64, z: f64, v: f64, phi: PhaseAngle, alpha: BiasAngle) -> Result<Self> {
        let model = Self { f, x, y, z, v, phi: phi.0, alpha: alpha.0 };
        model.validate()?;
        Ok(model)
    }

    /// `v = 0, z = 1, f = cos²α` with the unconstrained `x`, `y` supplied.
    pub fn conspiratorial(phi: PhaseAngle, alpha: BiasAngle, x: f64, y: f64) -> Result<Self> {
        Self::new(alpha.open_probability(), x, y, 1.0, 0.0, phi, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named_scalars() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        if !self.phi.is_finite() || !self.alpha.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn get(&self, var: Var) -> f64 {
        match var {
            Var::F => self.f,
            Var::X => self.x,
            Var::Y => self.y,
            Var::Z => self.z,
            Var::V => self.v,
        }
    }

    pub fn set(&mut self, var: Var, value: f64) {
        match var {
            Var::F => self.f = value,
            Var::X => self.x = value,
            Var::Y => self.y = value,
            Var::Z => self.z = value,
            Var::V => self.v = value,
        }
    }

    fn named_scalars(&self) -> [(&'static str, f64); 5] {
        [("f", self.f), ("x", self.x), ("y", self.y), ("z", self.z), ("v", self.v)]
    }

    /// `p(λ) = (f, 1 − f)` over (particle, wave).
    pub fn lambda_distribution(&self) -> BinaryDistribution {
        BinaryDistribution { p0: self.f, p1: 1.0 - self.f }
    }

    /// `p(a | b, λ)`; `lambda_wave` selects `λ = w`.
    pub fn photon_conditional(&self, b: usize, lambda_wave: bool) -> BinaryDistribution {
        let c2 = cos2_half(self.phi);
        let p0 = match (b, lambda_wave) {
            (0, false) => 0.5,
            (0, true) => self.x,
            (_, false) => self.y,
            (_, true) => c2,
        };
        BinaryDistribution { p0, p1: 1.0 - p0 }
    }

    /// `p(b | λ)`.
    pub fn ancilla_conditional(&self, lambda_wave: bool) -> BinaryDistribution {
        let p0 = if lambda_wave { self.v } else { self.z };
        BinaryDistribution { p0, p1: 1.0 - p0 }
    }

    /// Probability mass on `λ` agreeing with the configuration
    /// (`λ = p` with `b = 0`, `λ = w` with `b = 1`).
    pub fn configuration_correlation(&self) -> f64 {
        self.f * self.z + (1.0 - self.f) * (1.0 - self.v)
    }

    /// True when, on every ancilla branch both `λ` values reach with nonzero
    /// probability, the photon conditionals of the two agree.
    pub fn behaviour_lambda_independent(&self, tol: f64) -> bool {
        (0..2).all(|b| {
            let reach_p = self.f * self.ancilla_conditional(false).get(b);
            let reach_w = (1.0 - self.f) * self.ancilla_conditional(true).get(b);
            if reach_p <= tol || reach_w <= tol {
                return true;
            }
            (self.photon_conditional(b, false).p0 - self.photon_conditional(b, true).p0).abs() <= tol
        })
    }
}

pub(crate) fn cos2_half(phi: f64) -> f64 {
    (phi / 2.0).cos().powi(2)
}

/// Born-rule joint of photon and ancilla for the biased quantum-controlled
/// interferometer: `p(·, 0) = cos²α (½, ½)`, `p(·, 1) = sin²α (cos²(φ/2), sin²(φ/2))`.
pub fn quantum_joint(phi: PhaseAngle, alpha: BiasAngle) -> JointDistribution {
    let (open, closed) = (alpha.open_probability(), alpha.closed_probability());
    let c2 = cos2_half(phi.0);
    JointDistribution { table: [[0.5 * open, closed * c2], [0.5 * open, closed * (1.0 - c2)]] }
}

/// `p(a, b) = Σ_λ p(a | b, λ) p(b | λ) p(λ)`.
pub fn hv_joint(model: &HvModel) -> Result<JointDistribution> {
    model.validate()?;
    let lambda = model.lambda_distribution();
    let mut table = [[0.0; 2]; 2];
    for (lambda_wave, p_lambda) in [(false, lambda.p0), (true, lambda.p1)] {
        let p_b = model.ancilla_conditional(lambda_wave);
        for (b, p_b_given) in [p_b.p0, p_b.p1].into_iter().enumerate() {
            let p_a = model.photon_conditional(b, lambda_wave);
            table[0][b] += p_a.p0 * p_b_given * p_lambda;
            table[1][b] += p_a.p1 * p_b_given * p_lambda;
        }
    }
    Ok(JointDistribution { table })
}

/// The adequacy system reduced to three residuals:
///
/// * `r₁ = v(1 − f)(x − ½)`
/// * `r₂ = f(1 − z)(y − cos²(φ/2))`
/// * `r₃ = z f + v(1 − f) − cos²α`
///
/// The joint difference `hv_joint − quantum_joint` is a linear image of
/// these, so they vanish exactly when the model is adequate.
pub fn adequacy_residuals(model: &HvModel) -> [f64; 3] {
    let HvModel { f, x, y, z, v, phi, alpha } = *model;
    [
        v * (1.0 - f) * (x - 0.5),
        f * (1.0 - z) * (y - cos2_half(phi)),
        z * f + v * (1.0 - f) - alpha.cos().powi(2),
    ]
}

pub fn max_residual(model: &HvModel) -> f64 {
    adequacy_residuals(model).iter().map(|r| r.abs()).fold(0.0, f64::max)
}

pub fn is_adequate(model: &HvModel) -> bool {
    max_residual(model) < RESIDUAL_TOL
}
