//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N (<name>): PASS` line (visible with `-- --nocapture`).
//!
//! Run with `cargo test -p biasbound-cli --test acceptance`.

use std::process::Command;
use std::time::Instant;

use biasbound::{
    check_linear_identity, check_logistic_identity, classify, decomposition, derive_assumptions,
    simulate_study, verify_result, AppliedResult, BoundDirection, Constraint, InteractionScale,
    InteractionSign, IntervalEstimate, LogisticParams, MonotoneSign, QualitativeAssumptions,
    ResultId, SamplerConfig, SelectionModel, TargetJoint, Variable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXAMPLE1: [f64; 4] = [0.8, 0.6, 0.4, 0.1];
const EXAMPLE1_MODIFIED: [f64; 4] = [0.8, 0.6, 0.4, 0.25];

fn sel(cells: [f64; 4]) -> SelectionModel {
    SelectionModel::new(cells).unwrap()
}

fn pass(n: u32, name: &str) {
    println!("criterion {n} ({name}): PASS");
}

/// Criterion 1: the worked example's interaction values are reproduced to
/// high precision on all three scales.
#[test]
fn criterion_1_example_exactness() {
    assert!((sel(EXAMPLE1).inter_rr().unwrap() - 1.0 / 3.0).abs() <= 1e-12);
    assert!((sel(EXAMPLE1_MODIFIED).inter_rr().unwrap() - 5.0 / 6.0).abs() <= 1e-12);
    // risk-difference interactions, exact up to one rounding of the sums
    assert!((sel(EXAMPLE1).inter_rd() - (-0.1)).abs() <= 1e-15);
    assert!((sel(EXAMPLE1_MODIFIED).inter_rd() - 0.05).abs() <= 1e-15);
    pass(1, "example exactness");
}

/// Criterion 2: the example classifies as a lower bound on the risk
/// difference scale, and the modified table shows the hypotheses are not
/// necessary: positive interaction, indeterminate verdict, multiplier still
/// below one.
#[test]
fn criterion_2_example_classification_and_nonnecessity() {
    let a = derive_assumptions(&sel(EXAMPLE1), InteractionScale::RiskDifference, 1e-9).unwrap();
    let v = classify(&a);
    assert_eq!(v.direction, BoundDirection::SelectedIsLowerBound);
    assert_eq!(v.applied_result, AppliedResult::R4a);

    let a = derive_assumptions(
        &sel(EXAMPLE1_MODIFIED),
        InteractionScale::RiskDifference,
        1e-9,
    )
    .unwrap();
    assert_eq!(a.interaction_sign, InteractionSign::NonNegative);
    assert_eq!(classify(&a).direction, BoundDirection::Indeterminate);
    assert!(sel(EXAMPLE1_MODIFIED).inter_rr().unwrap() < 1.0);
    pass(2, "example classification and non-necessity");
}

/// Criterion 3: the case-control illustration: same-direction monotonicity
/// with non-positive risk-ratio interaction turns the observed 1.42 into a
/// lower bound for the true odds ratio.
#[test]
fn criterion_3_case_control_illustration() {
    let v = classify(&QualitativeAssumptions::new(
        MonotoneSign::NonDecreasing,
        MonotoneSign::NonDecreasing,
        InteractionScale::RiskRatio,
        InteractionSign::NonPositive,
    ));
    assert_eq!(v.direction, BoundDirection::SelectedIsLowerBound);
    let est = IntervalEstimate::degenerate(1.42, 0.95).unwrap();
    let report = biasbound::bound_report(&est, &v);
    assert_eq!(report.point_statement, "OR_true >= 1.42");
    pass(3, "case-control illustration");
}

/// Criterion 4: the decomposition identity holds to 1e-10 relative accuracy
/// over 10^4 random (target, selection) pairs, in under five seconds.
#[test]
fn criterion_4_decomposition_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let raw: [f64; 4] = std::array::from_fn(|_| 1e-6 + rng.random::<f64>());
        let total: f64 = raw.iter().sum();
        let t = TargetJoint::new(raw.map(|x| x / total)).unwrap();
        let s = sel(std::array::from_fn(|_| {
            1e-6 + (1.0 - 2e-6) * rng.random::<f64>()
        }));
        let d = decomposition(&t, &s).unwrap();
        let rel = (d.selected_or - d.true_or * d.inter_rr).abs() / d.selected_or;
        assert!(rel <= 1e-10, "relative error {rel}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(4, "decomposition identity over 10^4 pairs");
}

/// Criterion 5: every bound rule verifies over 10^5 hypothesis-satisfying
/// models with zero violations, all eleven within a minute.
#[test]
fn criterion_5_result_verification_suite() {
    let start = Instant::now();
    for id in ResultId::ALL {
        let cfg = SamplerConfig::random(100_000, 5, Constraint::Result(id));
        let report = verify_result(id, &cfg).unwrap();
        assert_eq!(report.models_satisfying_conditions, 100_000, "{id}");
        assert_eq!(report.violations, 0, "{id}: {:?}", report.first_violation);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(5, "verification of all eleven rules over 10^5 models each");
}

/// Criterion 6: the closed-form identities behind the proofs hold to 1e-12
/// scaled residual over 10^4 random parameter draws, and the directional
/// inequalities hold for signed interactions.
#[test]
fn criterion_6_closed_form_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let b = LogisticParams::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            0.0,
        )
        .unwrap();
        let check = check_logistic_identity(&b, 1e-12);
        assert!(check.pass, "residual {}", check.residual);
    }
    for i in 0..10_000 {
        let b0 = rng.random_range(-3.0..3.0);
        let mag1 = rng.random_range(0.0..3.0);
        let mag2 = rng.random_range(0.0..3.0);
        let mag3 = rng.random_range(1e-6..3.0);
        let b = if i % 2 == 0 {
            // beta3 < 0 with same-sign main effects
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            LogisticParams::new(b0, s * mag1, s * mag2, -mag3).unwrap()
        } else {
            // beta3 > 0 with opposite-sign main effects
            LogisticParams::new(b0, mag1, -mag2, mag3).unwrap()
        };
        let check = check_logistic_identity(&b, 1e-12);
        assert!(check.applicable);
        assert!(check.pass, "residual {}", check.residual);
    }
    let mut accepted = 0;
    while accepted < 10_000 {
        let cells: [f64; 4] = std::array::from_fn(|_| rng.random_range(1e-6..1.0));
        let Ok(m) = SelectionModel::new(cells) else {
            continue;
        };
        accepted += 1;
        let check = check_linear_identity(&m.fit_linear(), 1e-12).unwrap();
        assert!(check.pass, "residual {}", check.residual);
    }
    pass(6, "closed-form identities over 10^4 draws each");
}

/// Criterion 7: recoding the exposure inverts the multiplier and mirrors
/// every derived verdict, over 10^3 random models.
#[test]
fn criterion_7_recoding_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1_000 {
        let s = sel(std::array::from_fn(|_| {
            1e-6 + (1.0 - 2e-6) * rng.random::<f64>()
        }));
        let r = s.recode(Variable::Exposure);
        let product = r.inter_rr().unwrap() * s.inter_rr().unwrap();
        assert!((product - 1.0).abs() <= 1e-10, "product {product}");
        for scale in [
            InteractionScale::RiskRatio,
            InteractionScale::OddsRatio,
            InteractionScale::RiskDifference,
        ] {
            let v = classify(&derive_assumptions(&s, scale, 0.0).unwrap()).direction;
            let vr = classify(&derive_assumptions(&r, scale, 0.0).unwrap()).direction;
            let expected = match v {
                BoundDirection::SelectedIsLowerBound => BoundDirection::SelectedIsUpperBound,
                BoundDirection::SelectedIsUpperBound => BoundDirection::SelectedIsLowerBound,
                other => other,
            };
            assert_eq!(vr, expected);
        }
    }
    pass(7, "recoding duality over 10^3 models");
}

/// Criterion 8: a simulated study of 10^6 individuals from an independence
/// target with the example selection lands within 5% of the predicted
/// selected-population odds ratio of 1/3.
#[test]
fn criterion_8_simulator_convergence() {
    let sample = simulate_study(&TargetJoint::uniform(), &sel(EXAMPLE1), 1_000_000, 42).unwrap();
    let rel = (sample.empirical_selected_or - 1.0 / 3.0).abs() / (1.0 / 3.0);
    assert!(
        rel <= 0.05,
        "empirical {} deviates {rel}",
        sample.empirical_selected_or
    );
    pass(8, "simulator convergence at n = 10^6");
}

/// Criterion 9: verify reports are byte-identical across repeated runs and
/// across worker counts.
#[test]
fn criterion_9_byte_identical_verify_reports() {
    let args = ["verify", "--result", "R2a", "--n", "100000", "--seed", "42"];
    let run = |extra: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_biasbound"))
            .args(args)
            .args(extra)
            .output()
            .expect("binary runs");
        assert!(out.status.success());
        out.stdout
    };
    let base = run(&[]);
    assert_eq!(base, run(&[]), "repeated run differs");
    assert_eq!(base, run(&["--threads", "1"]), "single-thread run differs");
    assert_eq!(base, run(&["--threads", "4"]), "four-thread run differs");
    pass(
        9,
        "byte-identical verify reports across runs and worker counts",
    );
}
