//! Property tests for the algebraic invariants the modules promise.

use biasbound::{
    adjust_or, classify, decomposition, derive_assumptions, selected_or, BoundDirection,
    InteractionScale, SelectionModel, TargetJoint, Variable, RATIO_REL_TOL,
};
use proptest::prelude::*;

fn open_unit() -> impl Strategy<Value = f64> {
    (1e-6..=1.0 - 1e-6).prop_map(|x: f64| x)
}

fn selection_model() -> impl Strategy<Value = SelectionModel> {
    [open_unit(), open_unit(), open_unit(), open_unit()]
        .prop_map(|cells| SelectionModel::new(cells).unwrap())
}

fn target_joint() -> impl Strategy<Value = TargetJoint> {
    [open_unit(), open_unit(), open_unit(), open_unit()].prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        TargetJoint::new(raw.map(|x| x / total)).unwrap()
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    /// The decomposition identity: OR_selected = OR_true * Inter_RR.
    #[test]
    fn decomposition_identity(t in target_joint(), s in selection_model()) {
        let d = decomposition(&t, &s).unwrap();
        prop_assert!(
            (d.selected_or - d.true_or * d.inter_rr).abs()
                <= RATIO_REL_TOL * d.selected_or.abs()
        );
    }

    /// A common sampling fraction cancels from the multiplicative measure and
    /// scales the additive one.
    #[test]
    fn overall_sampling_fraction_scaling(s in selection_model(), c in 0.01f64..=1.0) {
        let scaled = SelectionModel::new(s.cells().map(|x| c * x)).unwrap();
        prop_assert!(rel_close(scaled.inter_rr().unwrap(), s.inter_rr().unwrap(), 1e-12));
        prop_assert!((scaled.inter_rd() - c * s.inter_rd()).abs() <= 1e-12);
    }

    /// Each interaction measure is symmetric in the roles of d and e.
    #[test]
    fn role_symmetry(s in selection_model()) {
        let w = s.swap_roles();
        prop_assert_eq!(w.inter_rr().unwrap(), s.inter_rr().unwrap());
        prop_assert_eq!(w.inter_or().unwrap(), s.inter_or().unwrap());
        prop_assert_eq!(w.inter_rd(), s.inter_rd());
    }

    /// The interaction measures agree with the saturated-model coefficients.
    #[test]
    fn fits_are_consistent_with_measures(s in selection_model()) {
        let b = s.fit_logistic().unwrap();
        let io = s.inter_or().unwrap();
        prop_assert!(rel_close(io, b.beta3.exp(), 1e-12));
        prop_assert_eq!(s.fit_linear().gamma3, s.inter_rd());
    }

    /// Round trips through the saturated parametrizations reproduce the
    /// table.
    #[test]
    fn saturated_fits_round_trip(s in selection_model()) {
        let back = s.fit_logistic().unwrap().selection_model();
        for (a, b) in back.cells().iter().zip(s.cells()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let back = s.fit_linear().selection_model().unwrap();
        for (a, b) in back.cells().iter().zip(s.cells()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    /// Constancy in either argument collapses the selected odds ratio onto
    /// the true one.
    #[test]
    fn collapsibility_special_case(
        t in target_joint(),
        hi in open_unit(),
        lo in open_unit(),
        in_e in any::<bool>(),
    ) {
        let cells = if in_e { [hi, hi, lo, lo] } else { [hi, lo, hi, lo] };
        let s = SelectionModel::new(cells).unwrap();
        prop_assert_eq!(s.inter_rr().unwrap(), 1.0);
        prop_assert!(rel_close(
            selected_or(&t, &s).unwrap(),
            t.odds_ratio().unwrap(),
            RATIO_REL_TOL
        ));
    }

    /// Under independence in the target, the selected odds ratio *is* the
    /// interaction multiplier.
    #[test]
    fn berkson_case(pe in 0.05f64..=0.95, pd in 0.05f64..=0.95, s in selection_model()) {
        let t = TargetJoint::independent(pe, pd).unwrap();
        prop_assert!(rel_close(
            selected_or(&t, &s).unwrap(),
            s.inter_rr().unwrap(),
            RATIO_REL_TOL
        ));
    }

    /// Soundness of the classifier on derived assumptions: whenever a bound
    /// direction is claimed, the multiplier obeys it.
    #[test]
    fn classifier_soundness(s in selection_model()) {
        let inter_rr = s.inter_rr().unwrap();
        for scale in [
            InteractionScale::RiskRatio,
            InteractionScale::OddsRatio,
            InteractionScale::RiskDifference,
        ] {
            let verdict = classify(&derive_assumptions(&s, scale, 0.0).unwrap());
            match verdict.direction {
                BoundDirection::SelectedIsLowerBound => {
                    prop_assert!(inter_rr <= 1.0 + RATIO_REL_TOL)
                }
                BoundDirection::SelectedIsUpperBound => {
                    prop_assert!(inter_rr >= 1.0 - RATIO_REL_TOL)
                }
                BoundDirection::Equal => {
                    prop_assert!((inter_rr - 1.0).abs() <= RATIO_REL_TOL)
                }
                BoundDirection::Indeterminate => {}
            }
        }
    }

    /// Recoding a variable inverts the multiplier and mirrors the verdict.
    #[test]
    fn recoding_duality(s in selection_model(), which in prop_oneof![
        Just(Variable::Exposure),
        Just(Variable::Outcome),
    ]) {
        let r = s.recode(which);
        prop_assert!(rel_close(
            r.inter_rr().unwrap() * s.inter_rr().unwrap(),
            1.0,
            RATIO_REL_TOL
        ));
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
            prop_assert_eq!(vr, expected);
        }
    }

    /// Dividing the selected odds ratio by the multiplier recovers the true
    /// one.
    #[test]
    fn adjustment_round_trip(t in target_joint(), s in selection_model()) {
        let adjusted = adjust_or(selected_or(&t, &s).unwrap(), s.inter_rr().unwrap()).unwrap();
        prop_assert!(rel_close(adjusted, t.odds_ratio().unwrap(), RATIO_REL_TOL));
    }
}
