use std::f64::consts::SQRT_2;

use anyhow::{bail, Context, Result};
use qcontrol::chsh::{quantum_controlled_chsh_on, ChshSettings, ChshResult};
use qcontrol::delayed_choice::{
    deferred_measurement_check, entangled_state, entangled_variant, intensity, qdc_record, qdc_state, sample_clicks,
    sequential_joint, BiasAngle, MeasurementOrder, PhaseAngle, VisibilitySummary, ANCILLA, HERALD, PHOTON,
};
use qcontrol::hv::{
    adequacy_residuals, classical_control_analysis, enumerate_solution_families, grid_search, hv_joint, quantum_joint,
    GridConstraint, GridSearch, HvModel, Interpretation, SolutionFamily, RESIDUAL_TOL,
};
use qcontrol::quantum::{StateVector, EXACT_TOL};
use qcontrol::report::{write_csv, CsvRow};
use qcontrol::rng;
use qcontrol::JointDistribution;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{ChshArgs, DelayedChoiceArgs, Format, HvReportArgs, Order, RunConfig, Variant};

/// Tolerance for numerically estimated visibilities.
const VISIBILITY_TOL: f64 = 1e-6;
const CHSH_TOL: f64 = 1e-9;
const SIGMA_BOUND: f64 = 5.0;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }

    fn within(name: &'static str, deviation: f64, tol: f64) -> Self {
        Self::new(name, deviation <= tol, format!("max deviation {deviation:.3e} (tolerance {tol:.0e})"))
    }
}

/// Rendered output of one command plus the checks it ran.
pub struct Output {
    pub body: String,
    pub checks: Vec<Check>,
}

fn json_output(cfg: &RunConfig, results: Value, checks: Vec<Check>) -> Result<Output> {
    let all = checks.iter().all(|c| c.passed);
    let doc = json!({
        "experiment": cfg.experiment,
        "config": cfg,
        "results": results,
        "checks": checks,
        "all_checks_pass": all,
    });
    let mut body = serde_json::to_string_pretty(&doc)?;
    body.push('\n');
    Ok(Output { body, checks })
}

fn csv_output(header: &[&str], rows: &[CsvRow], checks: Vec<Check>) -> Result<Output> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(Output { body: String::from_utf8(buf)?, checks })
}

fn phases(cfg: &RunConfig) -> Vec<PhaseAngle> {
    cfg.phi_grid().into_iter().map(PhaseAngle).collect()
}

fn biases(cfg: &RunConfig) -> Vec<BiasAngle> {
    cfg.alphas.iter().copied().map(BiasAngle).collect()
}

#[derive(Serialize)]
struct MorphingRow {
    phi: f64,
    alpha: f64,
    intensity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z_score: Option<f64>,
}

pub fn morphing(cfg: &RunConfig) -> Result<Output> {
    let phis = phases(cfg);
    let cells: Vec<(PhaseAngle, BiasAngle)> =
        biases(cfg).into_iter().flat_map(|a| phis.iter().map(move |&p| (p, a))).collect();
    let shots = cfg.samples;
    let rows = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(phi, alpha))| -> Result<MorphingRow> {
            let exact = intensity(phi, alpha);
            let (empirical, z_score) = if shots > 0 {
                let mut r = rng::stream(cfg.seed, i as u64);
                let clicks = sample_clicks(phi, alpha, shots, &mut r)?;
                let freq = clicks as f64 / shots as f64;
                let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
                let z = if sigma > 0.0 {
                    (freq - exact) / sigma
                } else if (freq - exact).abs() <= EXACT_TOL {
                    0.0
                } else {
                    f64::INFINITY
                };
                (Some(freq), Some(z))
            } else {
                (None, None)
            };
            Ok(MorphingRow { phi: phi.0, alpha: alpha.0, intensity: exact, empirical, z_score })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut checks = Vec::new();
    if shots > 0 {
        let worst = rows.iter().filter_map(|r| r.z_score).map(f64::abs).fold(0.0, f64::max);
        checks.push(Check::new(
            "monte-carlo-agreement",
            worst <= SIGMA_BOUND,
            format!("largest |z| = {worst:.3} over {} cells of {shots} shots", rows.len()),
        ));
    }

    match cfg.format {
        Format::Json => json_output(cfg, json!({ "points": rows }), checks),
        Format::Csv => {
            let header: &[&str] =
                if shots > 0 { &["phi", "alpha", "intensity", "empirical"] } else { &["phi", "alpha", "intensity"] };
            let table: Vec<CsvRow> = rows
                .iter()
                .map(|r| {
                    let mut row = vec![Some(r.phi), Some(r.alpha), Some(r.intensity)];
                    if shots > 0 {
                        row.push(r.empirical);
                    }
                    row
                })
                .collect();
            csv_output(header, &table, checks)
        }
    }
}

#[derive(Serialize)]
struct DelayedChoicePoint {
    phi: f64,
    joint: JointDistribution,
    /// `p(a = 1 | b)`.
    conditional_patterns: [Option<f64>; 2],
}

#[derive(Serialize)]
struct DelayedChoiceSlice {
    alpha: f64,
    visibility: VisibilitySummary,
    /// Full record at the configured single phase.
    record: Value,
    deferred_max_deviation: f64,
    order_max_deviation: f64,
    closed_form_max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    entangled_max_deviation: Option<f64>,
    /// Spread of the unheralded photon/control joint across the slices' α.
    #[serde(skip_serializing_if = "Option::is_none")]
    unheralded_spread: Option<f64>,
    points: Vec<DelayedChoicePoint>,
}

fn photon_ancilla_state(variant: Variant, phi: PhaseAngle, alpha: BiasAngle) -> Result<StateVector> {
    Ok(match variant {
        Variant::Single => qdc_state(phi, alpha),
        Variant::Entangled => entangled_state(phi, alpha, false)?.post_select(HERALD, 0)?,
    })
}

fn measurement_order(order: Order) -> MeasurementOrder {
    match order {
        Order::PhotonFirst => MeasurementOrder::PhotonFirst,
        Order::AncillaFirst => MeasurementOrder::AncillaFirst,
    }
}

fn delayed_choice_slice(
    args: &DelayedChoiceArgs,
    cfg: &RunConfig,
    phis: &[PhaseAngle],
    alpha: BiasAngle,
    unheralded_reference: Option<&[JointDistribution]>,
) -> Result<DelayedChoiceSlice> {
    let order = measurement_order(args.order);
    let mut points = Vec::with_capacity(phis.len());
    let (mut deferred, mut order_dev, mut closed_dev) = (0.0f64, 0.0f64, 0.0f64);
    let mut entangled_dev = 0.0f64;
    let mut spread = 0.0f64;
    for (k, &phi) in phis.iter().enumerate() {
        let state = photon_ancilla_state(args.variant, phi, alpha)?;
        let joint = sequential_joint(&state, PHOTON, ANCILLA, order)?;
        let other = match order {
            MeasurementOrder::PhotonFirst => MeasurementOrder::AncillaFirst,
            MeasurementOrder::AncillaFirst => MeasurementOrder::PhotonFirst,
        };
        order_dev = order_dev.max(joint.max_abs_diff(&sequential_joint(&state, PHOTON, ANCILLA, other)?));
        closed_dev = closed_dev.max(joint.max_abs_diff(&quantum_joint(phi, alpha)));
        deferred = deferred.max(deferred_measurement_check(phi, alpha)?.max_deviation);
        if args.variant == Variant::Entangled {
            let ev = entangled_variant(phi, alpha, args.visibility_grid)?;
            entangled_dev = entangled_dev.max(ev.max_deviation).max(ev.bias_order_deviation);
            if let Some(reference) = unheralded_reference {
                spread = spread.max(ev.unheralded_joint.max_abs_diff(&reference[k]));
            }
        }
        let conditional_patterns = [0, 1].map(|b| joint.conditional_on_ancilla(b).map(|p| p[1]));
        points.push(DelayedChoicePoint { phi: phi.0, joint, conditional_patterns });
    }
    let phi = PhaseAngle(cfg.phi);
    let (record, visibility) = match args.variant {
        Variant::Single => {
            let r = qdc_record(phi, alpha, args.visibility_grid)?;
            let v = r.visibility.clone();
            (serde_json::to_value(r)?, v)
        }
        Variant::Entangled => {
            let r = entangled_variant(phi, alpha, args.visibility_grid)?;
            let v = r.record.visibility.clone();
            (serde_json::to_value(r)?, v)
        }
    };
    let entangled = args.variant == Variant::Entangled;
    Ok(DelayedChoiceSlice {
        alpha: alpha.0,
        visibility,
        record,
        deferred_max_deviation: deferred,
        order_max_deviation: order_dev,
        closed_form_max_deviation: closed_dev,
        entangled_max_deviation: entangled.then_some(entangled_dev),
        unheralded_spread: (entangled && unheralded_reference.is_some()).then_some(spread),
        points,
    })
}

pub fn delayed_choice(args: &DelayedChoiceArgs, cfg: &RunConfig) -> Result<Output> {
    let phis = phases(cfg);
    let alphas = biases(cfg);
    // The unheralded joint is compared against the first slice's.
    let reference: Option<Vec<JointDistribution>> = if args.variant == Variant::Entangled {
        Some(
            phis.iter()
                .map(|&phi| Ok(entangled_variant(phi, alphas[0], args.visibility_grid)?.unheralded_joint))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let slices = alphas
        .par_iter()
        .map(|&alpha| delayed_choice_slice(args, cfg, &phis, alpha, reference.as_deref()))
        .collect::<Result<Vec<_>>>()?;

    let fold = |f: &dyn Fn(&DelayedChoiceSlice) -> f64| slices.iter().map(f).fold(0.0, f64::max);
    let mut checks = vec![
        Check::within("deferred-measurement", fold(&|s| s.deferred_max_deviation), EXACT_TOL),
        Check::within("measurement-order", fold(&|s| s.order_max_deviation), EXACT_TOL),
        Check::within("closed-form-joint", fold(&|s| s.closed_form_max_deviation), EXACT_TOL),
    ];
    let vis_dev = fold(&|s| {
        let v = &s.visibility;
        let particle = v.particle_branch.map_or(0.0, f64::abs);
        let wave = v.wave_branch.map_or(0.0, |w| (w - 1.0).abs());
        (v.unconditioned - v.analytic).abs().max(particle).max(wave)
    });
    checks.push(Check::within("visibility", vis_dev, VISIBILITY_TOL));
    if args.variant == Variant::Entangled {
        checks.push(Check::within("entangled-equivalence", fold(&|s| s.entangled_max_deviation.unwrap_or(0.0)), EXACT_TOL));
        checks.push(Check::within("no-signaling", fold(&|s| s.unheralded_spread.unwrap_or(0.0)), EXACT_TOL));
    }

    match cfg.format {
        Format::Json => {
            let results = json!({
                "variant": args.variant,
                "order": args.order,
                "visibility_grid": args.visibility_grid,
                "slices": slices,
            });
            json_output(cfg, results, checks)
        }
        Format::Csv => {
            let header = ["phi", "alpha", "p_a0_b0", "p_a0_b1", "p_a1_b0", "p_a1_b1", "pattern_b0", "pattern_b1"];
            let rows: Vec<CsvRow> = slices
                .iter()
                .flat_map(|s| {
                    s.points.iter().map(move |p| {
                        let t = p.joint.table;
                        vec![
                            Some(p.phi),
                            Some(s.alpha),
                            Some(t[0][0]),
                            Some(t[0][1]),
                            Some(t[1][0]),
                            Some(t[1][1]),
                            p.conditional_patterns[0],
                            p.conditional_patterns[1],
                        ]
                    })
                })
                .collect();
            csv_output(&header, &rows, checks)
        }
    }
}

#[derive(Serialize)]
struct FamilyVerification<'a> {
    label: &'a str,
    interpretation: Interpretation,
    residual_bound: f64,
    sound: bool,
}

fn verify_families(families: &[SolutionFamily]) -> Vec<FamilyVerification<'_>> {
    families
        .iter()
        .map(|f| FamilyVerification {
            label: &f.label,
            interpretation: f.interpretation,
            residual_bound: f.residual_bound,
            sound: f.residual_bound < RESIDUAL_TOL,
        })
        .collect()
}

#[derive(Serialize)]
struct ConspiratorialSignature {
    model: HvModel,
    residuals: [f64; 3],
    joint_deviation: f64,
    /// `f = cos²α`.
    f_matches_bias: bool,
    /// `λ = p` always yields `b = 0` and `λ = w` always `b = 1`.
    lambda_fixes_ancilla: bool,
    /// Probability that `λ` agrees with the configuration actually chosen.
    configuration_correlation: f64,
}

fn conspiratorial_signature(phi: PhaseAngle, alpha: BiasAngle) -> Result<ConspiratorialSignature> {
    let c2 = (phi.0 / 2.0).cos().powi(2);
    let model = HvModel::conspiratorial(phi, alpha, 0.5, c2)?;
    let ones = |p: f64| (p - 1.0).abs() <= EXACT_TOL;
    Ok(ConspiratorialSignature {
        residuals: adequacy_residuals(&model),
        joint_deviation: hv_joint(&model)?.max_abs_diff(&quantum_joint(phi, alpha)),
        f_matches_bias: (model.f - alpha.open_probability()).abs() <= EXACT_TOL,
        lambda_fixes_ancilla: ones(model.ancilla_conditional(false).p0) && ones(model.ancilla_conditional(true).p1),
        configuration_correlation: model.configuration_correlation(),
        model,
    })
}

#[derive(Serialize)]
struct GridSummary {
    steps: usize,
    constraint: GridConstraint,
    triples_visited: u64,
    triples_kept: u64,
    adequate_points: usize,
    uncovered: Vec<HvModel>,
}

fn grid_summary(search: GridSearch, constraint: GridConstraint, covered: impl Fn(&HvModel) -> bool) -> GridSummary {
    let uncovered = search.adequate.iter().filter(|m| !covered(m)).copied().collect();
    GridSummary {
        steps: search.steps,
        constraint,
        triples_visited: search.triples_visited,
        triples_kept: search.triples_kept,
        adequate_points: search.adequate.len(),
        uncovered,
    }
}

pub fn hv_report(args: &HvReportArgs, cfg: &RunConfig) -> Result<Output> {
    if cfg.format != Format::Json {
        bail!("hv-report emits JSON only");
    }
    let phi = PhaseAngle(cfg.phi);
    let alpha = match cfg.alphas.as_slice() {
        [a] => BiasAngle(*a),
        _ => bail!("hv-report takes exactly one --alpha"),
    };
    let kappa = alpha.open_probability();
    let degenerate = kappa <= EXACT_TOL || kappa >= 1.0 - EXACT_TOL;
    if degenerate && !args.allow_degenerate {
        bail!("cos²α = {kappa} is degenerate; pass --allow-degenerate to report the collapsed system");
    }
    if args.grid_steps == 1 {
        bail!("--grid-steps must be 0 (skip) or at least 2");
    }

    let mut checks = Vec::new();
    let results = if args.classical {
        let report = classical_control_analysis(phi, alpha).context("classical-control analysis")?;
        let verification = verify_families(&report.families);
        checks.push(Check::new(
            "family-soundness",
            verification.iter().all(|v| v.sound),
            format!("{} families", verification.len()),
        ));
        checks.push(Check::new(
            "classical-no-conspiracy",
            report.conspiratorial_absent
                && report.families.iter().all(|f| f.interpretation == Interpretation::DualityRestoring),
            format!("{} families, all duality-restoring: {}", report.families.len(), report.conspiratorial_absent),
        ));
        checks.push(Check::new(
            "classical-behaviour",
            report.behaviour_lambda_independent,
            "photon behaviour independent of λ on every reachable branch",
        ));
        let grid = (args.grid_steps > 0).then(|| {
            let search = grid_search(phi, alpha, args.grid_steps, GridConstraint::VEqualsZ);
            grid_summary(search, GridConstraint::VEqualsZ, |m| report.admits(m))
        });
        if let Some(g) = &grid {
            checks.push(Check::new(
                "grid-completeness",
                g.uncovered.is_empty(),
                format!("{} adequate grid points, {} outside the families", g.adequate_points, g.uncovered.len()),
            ));
        }
        json!({
            "mode": "classical",
            "report": report,
            "residual_verification": verification,
            "grid": grid,
        })
    } else {
        let report = enumerate_solution_families(phi, alpha);
        let verification = verify_families(&report.families);
        checks.push(Check::new(
            "family-soundness",
            verification.iter().all(|v| v.sound),
            format!("{} families", verification.len()),
        ));
        let signature = if degenerate {
            None
        } else {
            let sig = conspiratorial_signature(phi, alpha)?;
            let residual = sig.residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
            checks.push(Check::new(
                "conspiratorial-family",
                report.conspiratorial == 1
                    && report.conspiratorial_family().is_some_and(|f| f.contains(&sig.model, RESIDUAL_TOL)),
                format!("{} conspiratorial families", report.conspiratorial),
            ));
            checks.push(Check::new(
                "conspiratorial-signature",
                residual < RESIDUAL_TOL
                    && sig.f_matches_bias
                    && sig.lambda_fixes_ancilla
                    && (sig.configuration_correlation - 1.0).abs() <= EXACT_TOL,
                format!("max residual {residual:.3e}, correlation {}", sig.configuration_correlation),
            ));
            Some(sig)
        };
        let grid = (args.grid_steps > 0).then(|| {
            let search = grid_search(phi, alpha, args.grid_steps, GridConstraint::None);
            grid_summary(search, GridConstraint::None, |m| report.covering_family(m, RESIDUAL_TOL).is_some())
        });
        if let Some(g) = &grid {
            checks.push(Check::new(
                "grid-completeness",
                g.uncovered.is_empty(),
                format!("{} adequate grid points, {} outside the families", g.adequate_points, g.uncovered.len()),
            ));
        }
        json!({
            "mode": "quantum-control",
            "degenerate": degenerate,
            "report": report,
            "residual_verification": verification,
            "conspiratorial_signature": signature,
            "grid": grid,
        })
    };
    json_output(cfg, results, checks)
}

const BRANCH_NAMES: [[&str; 2]; 2] = [["AB", "AB'"], ["A'B", "A'B'"]];

pub fn chsh(args: &ChshArgs, cfg: &RunConfig) -> Result<Output> {
    if cfg.format != Format::Json {
        bail!("chsh emits JSON only");
    }
    let [a, a_prime, b, b_prime, bias_alice, bias_bob] = args.angles();
    if [a, a_prime, b, b_prime, bias_alice, bias_bob].iter().any(|v| !v.is_finite()) {
        bail!("angles must be finite");
    }
    let settings = ChshSettings::new(a, a_prime, b, b_prime);
    let pair = if args.separable { StateVector::zero(2)? } else { qcontrol::chsh::bell_pair() };
    let result: ChshResult = quantum_controlled_chsh_on(&pair, &settings, BiasAngle(bias_alice), BiasAngle(bias_bob))?;
    let undefined: Vec<&str> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .filter(|&(i, j)| result.correlators[i][j].is_none())
        .map(|(i, j)| BRANCH_NAMES[i][j])
        .collect();

    let mut checks = vec![
        Check::within("conditioning-equivalence", result.conditioning_deviation, EXACT_TOL),
        Check::within("measurement-order", result.order_deviation, EXACT_TOL),
        Check::within("no-signaling", result.signaling_deviation, EXACT_TOL),
    ];
    if let Some(s) = result.s {
        let (name, bound) = if args.separable { ("local-bound", 2.0) } else { ("tsirelson-bound", 2.0 * SQRT_2) };
        checks.push(Check::new(name, s.abs() <= bound + CHSH_TOL, format!("|S| = {:.10} (bound {bound:.10})", s.abs())));
    }
    let results = json!({
        "input": if args.separable { "separable" } else { "bell" },
        "correlators": {
            "AB": result.correlators[0][0],
            "AB'": result.correlators[0][1],
            "A'B": result.correlators[1][0],
            "A'B'": result.correlators[1][1],
        },
        "s": result.s,
        "undefined_correlators": undefined,
        "detail": result,
    });
    json_output(cfg, results, checks)
}
