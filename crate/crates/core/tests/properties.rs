use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use qcontrol::chsh::{bell_pair, quantum_controlled_chsh, quantum_controlled_chsh_on, ChshSettings};
use qcontrol::delayed_choice::{
    conditional_pattern, intensity, overlap_pw, qdc_state, simulated_intensity, visibility_numeric, BiasAngle,
    PhaseAngle, ANCILLA, PHOTON,
};
use qcontrol::hv::{
    adequacy_residuals, classical_control_analysis, enumerate_solution_families, hv_joint, quantum_joint, HvModel,
    HvTheory, Verdict,
};
use qcontrol::quantum::{controlled, StateVector, Unitary};
use qcontrol::rng;
use rand::Rng;

fn random_state(rng: &mut impl Rng, n: usize) -> StateVector {
    let raw: Vec<Complex64> = (0..1 << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(raw.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// Random single-qubit unitary `e^{iγ} Rz(β) Ry(θ) Rz(δ)`.
fn random_qubit_gate(rng: &mut impl Rng) -> Unitary {
    let [g, b, t, d]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..TAU));
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let e = |x: f64| Complex64::from_polar(1.0, x);
    Unitary::new(vec![
        e(g - b / 2.0 - d / 2.0) * c,
        -e(g - b / 2.0 + d / 2.0) * s,
        e(g + b / 2.0 - d / 2.0) * s,
        e(g + b / 2.0 + d / 2.0) * c,
    ])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), n in 1usize..6, depth in 1usize..12) {
        let mut r = rng::seeded(seed);
        let mut s = random_state(&mut r, n);
        for _ in 0..depth {
            let g = random_qubit_gate(&mut r);
            let q = r.gen_range(0..n);
            s = if n > 1 && r.gen_bool(0.5) {
                let mut c = r.gen_range(0..n);
                while c == q { c = r.gen_range(0..n); }
                s.apply_gate(&controlled(&g), &[q, c]).unwrap()
            } else {
                s.apply_gate(&g, &[q]).unwrap()
            };
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_unitary_matrices_are_rejected(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let m = [a, b, c, d];
        // Mᵀ M for a real 2×2
        let gram = [a * a + c * c, a * b + c * d, b * b + d * d];
        let deviation = (gram[0] - 1.0).abs().max(gram[1].abs()).max((gram[2] - 1.0).abs());
        let built = Unitary::from_real(&m);
        if deviation > 1e-9 {
            prop_assert!(built.is_err());
        }
    }

    #[test]
    fn controlled_matches_explicit_block(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let u = random_qubit_gate(&mut r);
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        // diag(I, U) with the control as the high local bit
        let explicit = Unitary::new(vec![
            one, zero, zero, zero,
            zero, one, zero, zero,
            zero, zero, u.get(0, 0), u.get(0, 1),
            zero, zero, u.get(1, 0), u.get(1, 1),
        ]).unwrap();
        prop_assert!(controlled(&u).approx_eq(&explicit, 1e-12));
        let s = random_state(&mut r, 3);
        let a = s.apply_gate(&controlled(&u), &[2, 0]).unwrap();
        let b = s.apply_gate(&explicit, &[2, 0]).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        // control 0 → the target is untouched in that half of the register
        for label in 0..8usize {
            if label & 1 == 0 {
                prop_assert!((a.amplitude(label) - s.amplitude(label)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_is_a_state(seed in any::<u64>(), n in 2usize..5, mask in 1usize..15) {
        let mut r = rng::seeded(seed);
        let s = random_state(&mut r, n);
        let keep: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let rho = s.partial_trace(&keep).unwrap();
        prop_assert!((rho.trace() - 1.0).norm() < 1e-12);
        prop_assert!(rho.hermiticity_deviation() < 1e-12);
        prop_assert!(rho.is_positive_semidefinite());
        // diagonal equals the marginal Born probabilities
        let p = s.probabilities(&keep).unwrap();
        for (d, q) in rho.diagonal().iter().zip(&p) {
            prop_assert!((d - q).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_law(phi in -10.0f64..10.0) {
        prop_assert!((overlap_pw(PhaseAngle(phi)).norm() - phi.cos().abs() * FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn residuals_vanish_on_sampled_family_members(phi in 0.0f64..TAU, alpha in -PI..PI, seed in any::<u64>()) {
        let (phi, alpha) = (PhaseAngle(phi), BiasAngle(alpha));
        let report = enumerate_solution_families(phi, alpha);
        let mut r = rng::seeded(seed);
        for fam in &report.families {
            for _ in 0..20 {
                if let Some(m) = fam.sample(&mut r) {
                    let res = adequacy_residuals(&m);
                    prop_assert!(res.iter().all(|x| x.abs() < 1e-9), "{} {:?}", fam.label, res);
                }
            }
        }
    }
}

#[test]
fn measurement_frequencies_follow_born_rule() {
    let mut r = rng::seeded(2024);
    let draws = 1_000_000u64;
    let plus = StateVector::zero(1).unwrap().apply_gate(&Unitary::hadamard(), &[0]).unwrap();
    let ones = (0..draws).filter(|_| plus.measure(0, &mut r).unwrap().bit == 1).count() as f64 / draws as f64;
    assert!((ones - 0.5).abs() < 0.002, "{ones}");

    let s = random_state(&mut r, 3);
    for q in 0..3 {
        let p1 = s.outcome_probability(q, 1).unwrap();
        let hits = (0..draws).filter(|_| s.measure(q, &mut r).unwrap().bit == 1).count() as f64;
        let sigma = (draws as f64 * p1 * (1.0 - p1)).sqrt();
        assert!((hits - draws as f64 * p1).abs() <= 5.0 * sigma, "qubit {q}");
    }
}

#[test]
fn intensity_law_on_random_points() {
    let mut r = rng::seeded(7);
    for _ in 0..10_000 {
        let phi = r.gen_range(0.0..TAU);
        let alpha = r.gen_range(-PI..PI);
        let expected = 0.5 * alpha.cos().powi(2) + (phi / 2.0).sin().powi(2) * alpha.sin().powi(2);
        let s = qdc_state(PhaseAngle(phi), BiasAngle(alpha));
        let p1 = s.outcome_probability(PHOTON, 1).unwrap();
        assert!((p1 - expected).abs() < 1e-12);
        assert!((intensity(PhaseAngle(phi), BiasAngle(alpha)) - expected).abs() < 1e-12);
        let pb = s.probabilities(&[ANCILLA]).unwrap();
        assert!((pb[0] - alpha.cos().powi(2)).abs() < 1e-12);
        assert!((pb[1] - alpha.sin().powi(2)).abs() < 1e-12);
    }
}

fn own_visibility(pattern: impl Fn(f64) -> f64) -> f64 {
    let values: Vec<f64> = (0..512).map(|k| pattern(k as f64 * TAU / 512.0)).collect();
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / (max + min)
}

#[test]
fn conditioned_and_unconditioned_visibility() {
    let mut r = rng::seeded(8);
    for _ in 0..50 {
        let alpha = BiasAngle(r.gen_range(-PI..PI));
        if alpha.closed_probability() > 1e-6 {
            let v = visibility_numeric(|p| conditional_pattern(p, alpha, 1).unwrap(), 256).unwrap();
            assert!((v - 1.0).abs() < 1e-6);
        }
        if alpha.open_probability() > 1e-6 {
            let v = visibility_numeric(|p| conditional_pattern(p, alpha, 0).unwrap(), 256).unwrap();
            assert!(v.abs() < 1e-6);
        }
        let v = own_visibility(|p| simulated_intensity(PhaseAngle(p), alpha));
        assert!((v - alpha.0.sin().powi(2)).abs() < 1e-6);
    }
}

#[test]
fn residuals_track_joint_differences() {
    let mut r = rng::seeded(9);
    let mut adequate = 0;
    let check = |m: &HvModel| {
        let res = adequacy_residuals(m);
        let small_res = res.iter().all(|x| x.abs() < 1e-9);
        let diff = hv_joint(m).unwrap().max_abs_diff(&quantum_joint(PhaseAngle(m.phi), BiasAngle(m.alpha)));
        // joint differences are a bounded linear image of the residuals
        let (c2, s2) = ((m.phi / 2.0).cos().powi(2), (m.phi / 2.0).sin().powi(2));
        let bound = (res[0].abs() + res[2].abs() / 2.0)
            .max(res[1].abs() + res[2].abs() * c2.max(s2));
        assert!(diff <= bound + 1e-15);
        assert_eq!(small_res, diff < 1e-8, "{m:?}");
        small_res
    };
    for _ in 0..10_000 {
        let [f, x, y, z, v]: [f64; 5] = std::array::from_fn(|_| r.gen());
        let m = HvModel::new(f, x, y, z, v, PhaseAngle(r.gen_range(0.0..TAU)), BiasAngle(r.gen_range(-PI..PI))).unwrap();
        check(&m);
    }
    for _ in 0..2_000 {
        let phi = PhaseAngle(r.gen_range(0.0..TAU));
        let alpha = BiasAngle(r.gen_range(0.1..1.4));
        let report = enumerate_solution_families(phi, alpha);
        let fam = &report.families[r.gen_range(0..report.families.len())];
        if let Some(m) = fam.sample(&mut r) {
            adequate += usize::from(check(&m));
        }
    }
    assert!(adequate > 1_500);
}

#[test]
fn family_members_are_adequate() {
    let mut r = rng::seeded(10);
    let cases = [(PI / 3.0, PI / 4.0), (1.0, 0.3), (PI, 1.2), (0.0, 0.7), (2.0, 0.0), (2.0, PI / 2.0)];
    for (phi, alpha) in cases {
        let report = enumerate_solution_families(PhaseAngle(phi), BiasAngle(alpha));
        for fam in &report.families {
            let mut drawn = 0;
            for _ in 0..1_000 {
                let Some(m) = fam.sample(&mut r) else { continue };
                drawn += 1;
                let res = adequacy_residuals(&m);
                assert!(res.iter().all(|x| x.abs() < 1e-9), "{}: {res:?}", fam.label);
            }
            assert!(drawn >= 900, "{}", fam.label);
        }
    }
}

fn residuals(m: [f64; 5], c2: f64, kappa: f64) -> [f64; 3] {
    let [f, x, y, z, v] = m;
    [v * (1.0 - f) * (x - 0.5), f * (1.0 - z) * (y - c2), z * f + v * (1.0 - f) - kappa]
}

/// Adequate points of the `1/steps` grid, found independently of the library.
fn adequate_grid(phi: f64, alpha: f64, steps: usize, v_equals_z: bool) -> Vec<[f64; 5]> {
    let c2 = (phi / 2.0).cos().powi(2);
    let kappa = alpha.cos().powi(2);
    let at = |k: usize| k as f64 / steps as f64;
    let mut hits = Vec::new();
    for fi in 0..=steps {
        for zi in 0..=steps {
            for vi in 0..=steps {
                let (f, z, v) = (at(fi), at(zi), at(vi));
                if v_equals_z && vi != zi {
                    continue;
                }
                if residuals([f, 0.5, c2, z, v], c2, kappa)[2].abs() >= 1e-9 {
                    continue;
                }
                for xi in 0..=steps {
                    for yi in 0..=steps {
                        let m = [f, at(xi), at(yi), z, v];
                        if residuals(m, c2, kappa).iter().all(|r| r.abs() < 1e-9) {
                            hits.push(m);
                        }
                    }
                }
            }
        }
    }
    hits
}

#[test]
fn families_cover_the_coarse_grid() {
    let cases = [(PI / 3.0, PI / 4.0), (PI / 2.0, PI / 3.0), (PI, PI / 4.0), (PI / 3.0, 0.0), (PI / 3.0, PI / 2.0)];
    for (phi, alpha) in cases {
        let report = enumerate_solution_families(PhaseAngle(phi), BiasAngle(alpha));
        let hits = adequate_grid(phi, alpha, 32, false);
        assert!(!hits.is_empty());
        for [f, x, y, z, v] in hits {
            let m = HvModel { f, x, y, z, v, phi, alpha };
            assert!(report.covering_family(&m, 1.0 / 16.0).is_some(), "({phi}, {alpha}): {m:?} uncovered");
        }
    }
}

#[test]
fn conspiratorial_signature() {
    let mut r = rng::seeded(11);
    for _ in 0..200 {
        let phi = PhaseAngle(r.gen_range(0.0..TAU));
        let alpha = BiasAngle(r.gen_range(0.05..1.5));
        let report = enumerate_solution_families(phi, alpha);
        let fam = report.conspiratorial_family().expect("one conspiratorial family");
        let m = fam.sample(&mut r).unwrap();
        assert_eq!((m.ancilla_conditional(false).p0, m.ancilla_conditional(true).p1), (1.0, 1.0));
        let correlated = m.f * m.ancilla_conditional(false).p0 + (1.0 - m.f) * m.ancilla_conditional(true).p1;
        assert!((correlated - 1.0).abs() < 1e-12);
        assert!((m.configuration_correlation() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn classical_control_forces_classical_behaviour() {
    let mut r = rng::seeded(12);
    for _ in 0..100 {
        let (phi, alpha) = (r.gen_range(0.0..TAU), r.gen_range(0.05..1.5));
        let report = classical_control_analysis(PhaseAngle(phi), BiasAngle(alpha)).unwrap();
        assert!(report.conspiratorial_absent);
        for fam in &report.families {
            for _ in 0..50 {
                let m = fam.sample(&mut r).unwrap();
                assert!((m.v - m.z).abs() < 1e-12);
                assert!(adequacy_residuals(&m).iter().all(|x| x.abs() < 1e-9));
                assert!(m.behaviour_lambda_independent(1e-9), "{}: {m:?}", fam.label);
            }
        }
    }
}

/// Two sites, two setups and two outcomes each; every `(setups, λ)` gets a
/// point-mass outcome pair chosen at random, so outcomes may depend on the
/// remote setup.
fn random_weakly_deterministic(r: &mut impl Rng, lambdas: usize) -> HvTheory {
    let choice: Vec<usize> = (0..4 * lambdas).map(|_| r.gen_range(0..4)).collect();
    let weights: Vec<f64> = (0..lambdas).map(|_| r.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    HvTheory::new(
        vec![2, 2],
        vec![2, 2],
        lambdas,
        |s, l| {
            let mut row = vec![0.0; 4];
            row[choice[(s[0] + 2 * s[1]) * lambdas + l]] = 1.0;
            row
        },
        |_| weights.iter().map(|w| w / total).collect(),
    )
    .unwrap()
}

#[test]
fn strong_determinism_implies_parameter_independence() {
    let mut r = rng::seeded(13);
    let (mut strong, mut weak_violations) = (0, 0);
    for i in 0..1_000 {
        let lambdas = r.gen_range(1..4);
        let theory = if i % 2 == 0 {
            let table: Vec<usize> = (0..2 * 2 * lambdas).map(|_| r.gen_range(0..2)).collect();
            let dist = vec![1.0 / lambdas as f64; lambdas];
            HvTheory::deterministic(vec![2, 2], vec![2, 2], dist, |site, a, l| table[(site * 2 + a) * lambdas + l]).unwrap()
        } else {
            random_weakly_deterministic(&mut r, lambdas)
        };
        assert!(theory.check_weak_determinism_everywhere());
        if theory.check_strong_determinism() {
            strong += 1;
            assert_eq!(theory.check_parameter_independence(), Verdict::Holds);
        } else if theory.check_parameter_independence() == Verdict::Fails {
            weak_violations += 1;
        }
    }
    assert!(strong >= 500);
    assert!(weak_violations > 0);
}

#[test]
fn chsh_is_bounded_and_conditioning_is_exact() {
    let mut r = rng::seeded(14);
    for _ in 0..1_000 {
        let q: [f64; 4] = std::array::from_fn(|_| r.gen_range(-PI..PI));
        let settings = ChshSettings::new(q[0], q[1], q[2], q[3]);
        let res = quantum_controlled_chsh(&settings, BiasAngle(PI / 4.0), BiasAngle(PI / 4.0)).unwrap();
        assert!(res.s.unwrap().abs() <= 2.0 * SQRT_2 + 1e-9);
        assert!(res.conditioning_deviation < 1e-12);
        assert!(res.order_deviation < 1e-12);
        assert!(res.signaling_deviation < 1e-12);
        for i in 0..2 {
            for j in 0..2 {
                let e = (settings.alice(i).0 - settings.bob(j).0).cos();
                assert!((res.correlator(i, j).unwrap() - e).abs() < 1e-12);
            }
        }
        let sep = quantum_controlled_chsh_on(&StateVector::zero(2).unwrap(), &settings, BiasAngle(0.4), BiasAngle(1.1)).unwrap();
        assert!(sep.s.unwrap().abs() <= 2.0 + 1e-9);
    }
    let _ = bell_pair();
}
