//! Case split of the adequacy system into solution families.
//!
//! `r₁` and `r₂` are products of single-variable factors, so each vanishes
//! through one of three atoms (`v = 0 | f = 1 | x = ½` and
//! `f = 0 | z = 1 | y = cos²(φ/2)`). Picking one atom from each gives a 3×3
//! grid of cases. For a non-degenerate bias the linear-in-each-variable
//! residual `r₃ = z f + v(1 − f) − κ` (`κ = cos²α`) is then solved for any
//! variable it pins down, or kept as a coupling between the rest. When
//! `κ ∈ {0, 1}` the convex combination `z f + v(1 − f)` can only reach the
//! boundary if both terms do, so `r₃` itself splits into two more
//! factor clauses and the whole system becomes atomic.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use super::{adequacy_residuals, cos2_half, HvModel, RESIDUAL_TOL};
use crate::delayed_choice::{BiasAngle, PhaseAngle};
use crate::error::{Error, Result};
use crate::quantum::EXACT_TOL;
use crate::rng;

/// Member samples drawn per family when bounding its residuals.
const SOUNDNESS_SAMPLES: usize = 1000;
const SAMPLE_ATTEMPTS: usize = 64;
const SOUNDNESS_SEED: u64 = 0x5eed_f00d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    F,
    X,
    Y,
    Z,
    V,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::F, Var::X, Var::Y, Var::Z, Var::V];

    fn name(self) -> &'static str {
        match self {
            Var::F => "f",
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::V => "v",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Constraint {
    /// Pinned to `value`; `symbol` is its closed form.
    Fixed { value: f64, symbol: String },
    /// Tied to the other coupled variables by `z f + v(1 − f) = cos²α`.
    Coupled,
    /// Undetermined by adequacy.
    Free,
}

impl Constraint {
    pub fn fixed_value(&self) -> Option<f64> {
        match self {
            Constraint::Fixed { value, .. } => Some(*value),
            _ => None,
        }
    }

    fn is_fixed_at(&self, target: f64) -> bool {
        self.fixed_value().is_some_and(|v| (v - target).abs() <= EXACT_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpretation {
    /// Photon behaviour on every exercised branch is fixed to the classical
    /// particle/wave value, independent of `λ`.
    DualityRestoring,
    /// `λ` is perfectly correlated with the interferometer configuration.
    Conspiratorial,
}

/// Which parts of the model carry probability in every member of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Reachability {
    pub particles_emitted: bool,
    pub waves_emitted: bool,
    /// `p(b = 0, λ = w) = v(1 − f)` is not identically zero.
    pub x_exercised: bool,
    /// `p(b = 1, λ = p) = f(1 − z)` is not identically zero.
    pub y_exercised: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionFamily {
    /// The vanishing factors that define the family, e.g. `v=0 ∧ z=1`.
    pub label: String,
    pub constraints: BTreeMap<Var, Constraint>,
    /// `κ` of the coupling `z f + v(1 − f) = κ` when any variable is coupled.
    pub coupling: Option<f64>,
    pub interpretation: Interpretation,
    pub reachability: Reachability,
    pub free: Vec<Var>,
    /// Largest `|rᵢ|` over sampled members.
    pub residual_bound: f64,
    phi: f64,
    alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialCase {
    /// `cos²α = 1`: the interferometer is always open.
    AlwaysOpen,
    /// `cos²α = 0`: the interferometer is always closed.
    AlwaysClosed,
    /// `cos²(φ/2) ∈ {0, 1}`: the wave conditional is deterministic.
    DeterministicWave,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub phi: f64,
    pub alpha: f64,
    pub cos2_alpha: f64,
    pub cos2_half_phi: f64,
    pub special_cases: Vec<SpecialCase>,
    pub families: Vec<SolutionFamily>,
    pub duality_restoring: usize,
    pub conspiratorial: usize,
}

impl FamilyReport {
    pub fn is_degenerate(&self) -> bool {
        self.special_cases.iter().any(|c| matches!(c, SpecialCase::AlwaysOpen | SpecialCase::AlwaysClosed))
    }

    pub fn conspiratorial_family(&self) -> Option<&SolutionFamily> {
        self.families.iter().find(|f| f.interpretation == Interpretation::Conspiratorial)
    }

    /// Index of the first family containing `model`.
    pub fn covering_family(&self, model: &HvModel, tol: f64) -> Option<usize> {
        self.families.iter().position(|f| f.contains(model, tol))
    }
}

/// Result of imposing `v = z`, the independence of `λ` from the ancilla that
/// spacelike-separated classical control enforces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalControlReport {
    pub phi: f64,
    pub alpha: f64,
    /// `z = v = cos²α`, forced by `r₃`.
    pub forced_z: f64,
    pub families: Vec<SolutionFamily>,
    pub conspiratorial_absent: bool,
    /// Every family pins each exercised photon conditional to its classical value.
    pub behaviour_lambda_independent: bool,
}

impl ClassicalControlReport {
    /// Whether `model` is an adequate model satisfying `v = z`.
    pub fn admits(&self, model: &HvModel) -> bool {
        (model.v - model.z).abs() <= EXACT_TOL && self.families.iter().any(|f| f.contains(model, RESIDUAL_TOL))
    }
}

#[derive(Debug, Clone)]
struct Atom {
    var: Var,
    value: f64,
    symbol: String,
}

impl Atom {
    fn new(var: Var, value: f64, symbol: &str) -> Self {
        Self { var, value, symbol: symbol.to_string() }
    }
}

#[derive(Debug, Clone)]
struct Case {
    atoms: Vec<Atom>,
    fixed: BTreeMap<Var, (f64, String)>,
}

impl Case {
    fn assign(&mut self, atom: &Atom) -> bool {
        match self.fixed.get(&atom.var) {
            Some((v, _)) => (v - atom.value).abs() <= EXACT_TOL,
            None => {
                self.fixed.insert(atom.var, (atom.value, atom.symbol.clone()));
                true
            }
        }
    }
}

struct Context {
    phi: f64,
    alpha: f64,
    kappa: f64,
    c2: f64,
}

impl Context {
    fn new(phi: PhaseAngle, alpha: BiasAngle) -> Self {
        Self { phi: phi.0, alpha: alpha.0, kappa: alpha.open_probability(), c2: cos2_half(phi.0) }
    }

    fn degenerate_bias(&self) -> Option<SpecialCase> {
        if self.kappa >= 1.0 - EXACT_TOL {
            Some(SpecialCase::AlwaysOpen)
        } else if self.kappa <= EXACT_TOL {
            Some(SpecialCase::AlwaysClosed)
        } else {
            None
        }
    }

    fn special_cases(&self) -> Vec<SpecialCase> {
        let mut cases: Vec<_> = self.degenerate_bias().into_iter().collect();
        if self.c2 <= EXACT_TOL || self.c2 >= 1.0 - EXACT_TOL {
            cases.push(SpecialCase::DeterministicWave);
        }
        cases
    }

    fn factor_clauses(&self) -> Vec<Vec<Atom>> {
        let mut clauses = vec![
            vec![Atom::new(Var::V, 0.0, "0"), Atom::new(Var::F, 1.0, "1"), Atom::new(Var::X, 0.5, "1/2")],
            vec![Atom::new(Var::F, 0.0, "0"), Atom::new(Var::Z, 1.0, "1"), Atom::new(Var::Y, self.c2, "cos²(φ/2)")],
        ];
        match self.degenerate_bias() {
            Some(SpecialCase::AlwaysClosed) => {
                // z f = 0 and v(1 − f) = 0
                clauses.push(vec![Atom::new(Var::F, 0.0, "0"), Atom::new(Var::Z, 0.0, "0")]);
                clauses.push(vec![Atom::new(Var::F, 1.0, "1"), Atom::new(Var::V, 0.0, "0")]);
            }
            Some(SpecialCase::AlwaysOpen) => {
                // f(1 − z) = 0 and (1 − f)(1 − v) = 0
                clauses.push(vec![Atom::new(Var::F, 0.0, "0"), Atom::new(Var::Z, 1.0, "1")]);
                clauses.push(vec![Atom::new(Var::F, 1.0, "1"), Atom::new(Var::V, 1.0, "1")]);
            }
            _ => {}
        }
        clauses
    }
}

/// Outcome of solving `z f + v(1 − f) = κ` given the case's fixed values.
enum Coupling {
    Infeasible,
    Solved(Vec<(Var, f64)>),
    Coupled(Vec<Var>),
}

fn solve_coupling(fixed: &BTreeMap<Var, (f64, String)>, kappa: f64) -> Coupling {
    let get = |v: Var| fixed.get(&v).map(|(x, _)| *x);
    let in_unit = |x: f64| (-EXACT_TOL..=1.0 + EXACT_TOL).contains(&x);
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    match (get(Var::F), get(Var::Z), get(Var::V)) {
        (Some(f), Some(z), Some(v)) => {
            if (z * f + v * (1.0 - f) - kappa).abs() <= EXACT_TOL {
                Coupling::Solved(vec![])
            } else {
                Coupling::Infeasible
            }
        }
        (Some(f), z, v) => {
            // linear in the unknowns among z (coefficient f) and v (coefficient 1 − f)
            let unknown: Vec<(Var, f64)> =
                [(Var::Z, z, f), (Var::V, v, 1.0 - f)].into_iter().filter(|(_, val, _)| val.is_none()).map(|(var, _, c)| (var, c)).collect();
            let constant = z.unwrap_or(0.0) * f + v.unwrap_or(0.0) * (1.0 - f);
            let live: Vec<(Var, f64)> = unknown.iter().copied().filter(|(_, c)| c.abs() > EXACT_TOL).collect();
            match live.as_slice() {
                [] => {
                    if (constant - kappa).abs() <= EXACT_TOL {
                        Coupling::Solved(vec![])
                    } else {
                        Coupling::Infeasible
                    }
                }
                [(var, c)] => {
                    let value = (kappa - constant) / c;
                    if in_unit(value) {
                        Coupling::Solved(vec![(*var, clamp(value))])
                    } else {
                        Coupling::Infeasible
                    }
                }
                _ => Coupling::Coupled(live.iter().map(|(v, _)| *v).collect()),
            }
        }
        (None, Some(z), Some(v)) => {
            if (z - v).abs() <= EXACT_TOL {
                if (v - kappa).abs() <= EXACT_TOL {
                    Coupling::Solved(vec![])
                } else {
                    Coupling::Infeasible
                }
            } else {
                let f = (kappa - v) / (z - v);
                if in_unit(f) {
                    Coupling::Solved(vec![(Var::F, clamp(f))])
                } else {
                    Coupling::Infeasible
                }
            }
        }
        (None, z, v) => {
            let mut vars = vec![Var::F];
            if z.is_none() {
                vars.push(Var::Z);
            }
            if v.is_none() {
                vars.push(Var::V);
            }
            // Only reachable with z or v fixed at 0 or 1 (or neither), where
            // the relation always has solutions in the unit cube for κ ∈ (0, 1).
            Coupling::Coupled(vars)
        }
    }
}

fn cartesian_cases(base: &[Atom], clauses: &[Vec<Atom>]) -> Vec<Case> {
    let mut start = Case { atoms: vec![], fixed: BTreeMap::new() };
    for atom in base {
        if !start.assign(atom) {
            return vec![];
        }
    }
    let mut cases = vec![start];
    for clause in clauses {
        let mut next = Vec::new();
        for case in &cases {
            for atom in clause {
                let mut c = case.clone();
                if c.assign(atom) {
                    if !c.atoms.iter().any(|a| a.var == atom.var) && !base.iter().any(|a| a.var == atom.var) {
                        c.atoms.push(atom.clone());
                    }
                    next.push(c);
                }
            }
        }
        cases = next;
    }
    cases
}

fn symbol_for_solved(value: f64, ctx: &Context) -> String {
    let close = |t: f64| (value - t).abs() <= EXACT_TOL;
    if close(0.0) {
        "0".into()
    } else if close(1.0) {
        "1".into()
    } else if close(ctx.kappa) {
        "cos²α".into()
    } else {
        format!("{value:.15}")
    }
}

fn build_families(ctx: &Context, base: &[Atom], use_coupling: bool) -> Vec<SolutionFamily> {
    let clauses = ctx.factor_clauses();
    let mut families: Vec<(Vec<Atom>, SolutionFamily)> = Vec::new();

    for case in cartesian_cases(base, &clauses) {
        let mut fixed = case.fixed.clone();
        let mut coupled: Vec<Var> = Vec::new();
        let mut derived: Vec<String> = Vec::new();
        if use_coupling {
            match solve_coupling(&fixed, ctx.kappa) {
                Coupling::Infeasible => continue,
                Coupling::Solved(values) => {
                    for (var, value) in values {
                        let symbol = symbol_for_solved(value, ctx);
                        derived.push(format!("{var}={symbol}"));
                        fixed.insert(var, (value, symbol));
                    }
                }
                Coupling::Coupled(vars) => coupled = vars,
            }
        }

        let constraints: BTreeMap<Var, Constraint> = Var::ALL
            .iter()
            .map(|&var| {
                let c = if let Some((value, symbol)) = fixed.get(&var) {
                    Constraint::Fixed { value: *value, symbol: symbol.clone() }
                } else if coupled.contains(&var) {
                    Constraint::Coupled
                } else {
                    Constraint::Free
                };
                (var, c)
            })
            .collect();

        // Identical constraint sets arise when two atom choices coincide.
        if families.iter().any(|(_, f)| f.constraints == constraints) {
            continue;
        }

        let mut label = case.atoms.iter().map(|a| format!("{}={}", a.var, a.symbol)).collect::<Vec<_>>().join(" ∧ ");
        if !derived.is_empty() {
            label = format!("{label} ⇒ {}", derived.join(" ∧ "));
        }
        let family = finish_family(ctx, label, constraints, (!coupled.is_empty()).then_some(ctx.kappa));
        families.push((case.atoms, family));
    }

    // Drop families contained in a coupling-free family with a subset of its pins.
    let subsumed: Vec<bool> = families
        .iter()
        .enumerate()
        .map(|(i, (_, a))| {
            families.iter().enumerate().any(|(j, (_, b))| {
                i != j
                    && b.coupling.is_none()
                    && pins_subset(b, a)
                    && (!pins_subset(a, b) || a.coupling.is_some() || j < i)
            })
        })
        .collect();

    families.into_iter().zip(subsumed).filter(|(_, s)| !s).map(|((_, f), _)| f).collect()
}

/// Every variable `b` pins is pinned to the same value in `a`.
fn pins_subset(b: &SolutionFamily, a: &SolutionFamily) -> bool {
    b.constraints.iter().all(|(var, c)| match c.fixed_value() {
        Some(value) => a.constraints[var].is_fixed_at(value),
        None => true,
    })
}

fn finish_family(ctx: &Context, label: String, constraints: BTreeMap<Var, Constraint>, coupling: Option<f64>) -> SolutionFamily {
    let fixed_at = |var: Var, value: f64| constraints[&var].is_fixed_at(value);
    let reachability = Reachability {
        particles_emitted: !fixed_at(Var::F, 0.0),
        waves_emitted: !fixed_at(Var::F, 1.0),
        x_exercised: !(fixed_at(Var::V, 0.0) || fixed_at(Var::F, 1.0)),
        y_exercised: !(fixed_at(Var::F, 0.0) || fixed_at(Var::Z, 1.0)),
    };
    // Perfect λ/configuration correlation with a genuinely random λ.
    let conspiratorial = fixed_at(Var::V, 0.0)
        && fixed_at(Var::Z, 1.0)
        && constraints[&Var::F].fixed_value().is_some_and(|f| f > EXACT_TOL && f < 1.0 - EXACT_TOL);
    let free = constraints.iter().filter(|(_, c)| matches!(c, Constraint::Free)).map(|(v, _)| *v).collect();

    let mut family = SolutionFamily {
        label,
        constraints,
        coupling,
        interpretation: if conspiratorial { Interpretation::Conspiratorial } else { Interpretation::DualityRestoring },
        reachability,
        free,
        residual_bound: f64::NAN,
        phi: ctx.phi,
        alpha: ctx.alpha,
    };
    let mut rng = rng::seeded(SOUNDNESS_SEED);
    family.residual_bound = (0..SOUNDNESS_SAMPLES)
        .filter_map(|_| family.sample(&mut rng))
        .map(|m| adequacy_residuals(&m).iter().map(|r| r.abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    family
}

impl SolutionFamily {
    pub fn constraint(&self, var: Var) -> &Constraint {
        &self.constraints[&var]
    }

    pub fn is_free(&self, var: Var) -> bool {
        matches!(self.constraints[&var], Constraint::Free)
    }

    /// Whether every exercised photon conditional is pinned to its realist
    /// value (`x = ½`, `y = cos²(φ/2)`).
    pub fn exercised_behaviour_classical(&self) -> bool {
        let c2 = cos2_half(self.phi);
        (!self.reachability.x_exercised || self.constraints[&Var::X].is_fixed_at(0.5))
            && (!self.reachability.y_exercised || self.constraints[&Var::Y].is_fixed_at(c2))
    }

    /// Membership test: pinned values within `tol` and the coupling residual
    /// within `tol`. The model's context must match the family's.
    pub fn contains(&self, model: &HvModel, tol: f64) -> bool {
        if (model.phi - self.phi).abs() > EXACT_TOL || (model.alpha - self.alpha).abs() > EXACT_TOL {
            return false;
        }
        let pins_ok = self.constraints.iter().all(|(var, c)| match c.fixed_value() {
            Some(value) => (model.get(*var) - value).abs() <= tol,
            None => true,
        });
        let coupling_ok = self
            .coupling
            .is_none_or(|kappa| (model.z * model.f + model.v * (1.0 - model.f) - kappa).abs() <= tol);
        pins_ok && coupling_ok
    }

    /// Draws a member: free variables uniformly, then the coupled variables
    /// on the solution set of `z f + v(1 − f) = κ`, by drawing all but one
    /// from the range that keeps the last one in `[0, 1]` and solving for it.
    /// Returns `None` only if the coupling has no solution in the unit cube.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<HvModel> {
        let mut model = HvModel { f: 0.0, x: 0.0, y: 0.0, z: 0.0, v: 0.0, phi: self.phi, alpha: self.alpha };
        let mut coupled = Vec::new();
        for (&var, c) in &self.constraints {
            match c {
                Constraint::Fixed { value, .. } => model.set(var, *value),
                Constraint::Free => model.set(var, rng.gen()),
                Constraint::Coupled => coupled.push(var),
            }
        }
        let Some(kappa) = self.coupling else {
            return Some(model);
        };
        for _ in 0..SAMPLE_ATTEMPTS {
            if sample_coupling(&mut model, &coupled, kappa, rng) {
                return Some(model);
            }
        }
        None
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo { rng.gen_range(lo..=hi) } else { lo }
}

/// Value on the far side of `kappa` from `other`, so that `kappa` lies between them.
fn opposite_side<R: Rng + ?Sized>(rng: &mut R, other: f64, kappa: f64) -> f64 {
    if other >= kappa { uniform(rng, 0.0, kappa) } else { uniform(rng, kappa, 1.0) }
}

/// `f` solving `z f + v(1 − f) = κ`, if it lies in `[0, 1]`.
fn solve_f(z: f64, v: f64, kappa: f64) -> Option<f64> {
    let f = (kappa - v) / (z - v);
    (f.is_finite() && (-EXACT_TOL..=1.0 + EXACT_TOL).contains(&f)).then(|| f.clamp(0.0, 1.0))
}

fn sample_coupling<R: Rng + ?Sized>(model: &mut HvModel, coupled: &[Var], kappa: f64, rng: &mut R) -> bool {
    let has = |v: Var| coupled.contains(&v);
    match (has(Var::F), has(Var::Z), has(Var::V)) {
        (false, true, true) => {
            let f = model.f;
            let lo = ((kappa - (1.0 - f)) / f).max(0.0);
            let hi = (kappa / f).min(1.0);
            if !(f > 0.0 && f < 1.0) || lo > hi + EXACT_TOL {
                return false;
            }
            model.z = uniform(rng, lo, hi.max(lo));
            model.v = ((kappa - f * model.z) / (1.0 - f)).clamp(0.0, 1.0);
            true
        }
        (true, true, true) => {
            model.z = rng.gen();
            model.v = opposite_side(rng, model.z, kappa);
            if (model.z - model.v).abs() <= EXACT_TOL {
                model.z = kappa;
                model.v = kappa;
                model.f = rng.gen();
                return true;
            }
            solve_f(model.z, model.v, kappa).map(|f| model.f = f).is_some()
        }
        (true, true, false) => {
            model.z = opposite_side(rng, model.v, kappa);
            solve_f(model.z, model.v, kappa).map(|f| model.f = f).is_some()
        }
        (true, false, true) => {
            model.v = opposite_side(rng, model.z, kappa);
            solve_f(model.z, model.v, kappa).map(|f| model.f = f).is_some()
        }
        _ => false,
    }
}

/// Enumerates every family of adequate models at `(φ, α)`.
///
/// Degenerate biases (`cos²α ∈ {0, 1}`) produce their own atomic case split
/// and are flagged in [`FamilyReport::special_cases`].
pub fn enumerate_solution_families(phi: PhaseAngle, alpha: BiasAngle) -> FamilyReport {
    let ctx = Context::new(phi, alpha);
    let families = build_families(&ctx, &[], ctx.degenerate_bias().is_none());
    let conspiratorial = families.iter().filter(|f| f.interpretation == Interpretation::Conspiratorial).count();
    FamilyReport {
        phi: phi.0,
        alpha: alpha.0,
        cos2_alpha: ctx.kappa,
        cos2_half_phi: ctx.c2,
        special_cases: ctx.special_cases(),
        duality_restoring: families.len() - conspiratorial,
        conspiratorial,
        families,
    }
}

/// Re-solves the adequacy system under `v = z`.
pub fn classical_control_analysis(phi: PhaseAngle, alpha: BiasAngle) -> Result<ClassicalControlReport> {
    let ctx = Context::new(phi, alpha);
    if ctx.degenerate_bias().is_some() {
        return Err(Error::DegenerateBias(ctx.kappa));
    }
    // With v = z, r₃ collapses to z − κ.
    let base = [Atom::new(Var::Z, ctx.kappa, "cos²α"), Atom::new(Var::V, ctx.kappa, "cos²α")];
    let families = build_families(&ctx, &base, true);
    Ok(ClassicalControlReport {
        phi: phi.0,
        alpha: alpha.0,
        forced_z: ctx.kappa,
        conspiratorial_absent: families.iter().all(|f| f.interpretation != Interpretation::Conspiratorial),
        behaviour_lambda_independent: families.iter().all(SolutionFamily::exercised_behaviour_classical),
        families,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    use super::*;
    use crate::hv::{is_adequate, max_residual};

    fn report(phi: f64, alpha: f64) -> FamilyReport {
        enumerate_solution_families(PhaseAngle(phi), BiasAngle(alpha))
    }

    #[test]
    fn six_families_at_generic_bias() {
        let r = report(FRAC_PI_3, FRAC_PI_4);
        assert!(r.special_cases.is_empty());
        assert_eq!(r.families.len(), 6, "{:#?}", r.families.iter().map(|f| &f.label).collect::<Vec<_>>());
        assert_eq!(r.conspiratorial, 1);
        assert_eq!(r.duality_restoring, 5);
    }

    #[test]
    fn conspiratorial_family_shape() {
        let r = report(FRAC_PI_3, FRAC_PI_4);
        let c = r.conspiratorial_family().unwrap();
        assert!(c.constraint(Var::V).is_fixed_at(0.0));
        assert!(c.constraint(Var::Z).is_fixed_at(1.0));
        assert!((c.constraint(Var::F).fixed_value().unwrap() - 0.5).abs() < 1e-12);
        assert!(c.is_free(Var::X) && c.is_free(Var::Y));
        assert!(!c.reachability.x_exercised && !c.reachability.y_exercised);
        assert_eq!(c.label, "v=0 ∧ z=1 ⇒ f=cos²α");
    }

    #[test]
    fn duality_families_pin_exercised_behaviour() {
        for (phi, alpha) in [(FRAC_PI_3, FRAC_PI_4), (1.0, 0.3), (4.0, -1.2)] {
            let r = report(phi, alpha);
            for f in r.families.iter().filter(|f| f.interpretation == Interpretation::DualityRestoring) {
                assert!(f.exercised_behaviour_classical(), "{}", f.label);
            }
        }
    }

    #[test]
    fn members_are_adequate() {
        let r = report(2.1, 0.9);
        let mut rng = rng::seeded(3);
        for fam in &r.families {
            assert!(fam.residual_bound < RESIDUAL_TOL, "{}: {}", fam.label, fam.residual_bound);
            for _ in 0..200 {
                let m = fam.sample(&mut rng).expect("sampling succeeds");
                assert!(is_adequate(&m), "{} {:?} {}", fam.label, m, max_residual(&m));
                assert!(fam.contains(&m, 1e-9));
            }
        }
    }

    #[test]
    fn f_one_family_leaves_waves_unreachable() {
        let r = report(FRAC_PI_3, FRAC_PI_4);
        let fam = r.families.iter().find(|f| f.constraint(Var::F).is_fixed_at(1.0)).unwrap();
        assert!(!fam.reachability.waves_emitted);
        assert!(!fam.reachability.x_exercised);
        assert!(fam.is_free(Var::X) && fam.is_free(Var::V));
        assert!((fam.constraint(Var::Z).fixed_value().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_biases_are_flagged() {
        let open = report(1.0, 0.0);
        assert_eq!(open.special_cases, vec![SpecialCase::AlwaysOpen]);
        assert!(open.is_degenerate());
        assert_eq!(open.conspiratorial, 0);
        let mut rng = rng::seeded(9);
        for fam in &open.families {
            assert!(fam.coupling.is_none());
            for _ in 0..100 {
                assert!(is_adequate(&fam.sample(&mut rng).unwrap()), "{}", fam.label);
            }
        }
        let closed = report(1.0, FRAC_PI_2);
        assert_eq!(closed.special_cases, vec![SpecialCase::AlwaysClosed]);
        for fam in &closed.families {
            for _ in 0..100 {
                assert!(is_adequate(&fam.sample(&mut rng).unwrap()), "{}", fam.label);
            }
        }
        assert_eq!(report(PI, 0.4).special_cases, vec![SpecialCase::DeterministicWave]);
    }

    #[test]
    fn classical_control_excludes_conspiracy() {
        let r = classical_control_analysis(PhaseAngle(FRAC_PI_3), BiasAngle(FRAC_PI_4)).unwrap();
        assert!((r.forced_z - 0.5).abs() < 1e-12);
        assert!(r.conspiratorial_absent);
        assert!(r.behaviour_lambda_independent);
        assert_eq!(r.families.len(), 3);
        let c2 = cos2_half(FRAC_PI_3);
        let (p, a) = (PhaseAngle(FRAC_PI_3), BiasAngle(FRAC_PI_4));
        assert!(r.admits(&HvModel::new(0.5, 0.5, c2, 0.5, 0.5, p, a).unwrap()));
        assert!(!r.admits(&HvModel::conspiratorial(p, a, 0.3, 0.3).unwrap()));
    }

    #[test]
    fn classical_control_rejects_degenerate_bias() {
        assert!(matches!(
            classical_control_analysis(PhaseAngle(1.0), BiasAngle(0.0)).unwrap_err(),
            Error::DegenerateBias(_)
        ));
    }
}
