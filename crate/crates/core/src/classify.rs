//! Rule engine mapping qualitative assumptions about the selection mechanism
//! to a bound direction for the true odds ratio.
//!
//! The inputs are three-valued-ish monotonicity signs for the selection
//! probability in `d` and in `e`, the scale on which an interaction
//! assumption is stated, and the assumed interaction sign. The output is a
//! [`BoundVerdict`]: whether the selected-population odds ratio equals,
//! bounds from below, or bounds from above the true odds ratio, or whether
//! nothing follows.
//!
//! [`derive_assumptions`] extracts the qualitative signs from a concrete
//! [`SelectionModel`] numerically, and [`classify_numeric`] composes the two,
//! cross-checking the verdict against the exact decomposition multiplier.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::measures::{SelectionModel, TargetJoint};
use crate::RATIO_REL_TOL;

/// Monotonicity of the selection probability in one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotoneSign {
    NonDecreasing,
    NonIncreasing,
    /// No dependence on the argument at all. Satisfies both non-decreasing
    /// and non-increasing.
    Flat,
    Unknown,
}

impl MonotoneSign {
    pub fn is_non_decreasing(self) -> bool {
        matches!(self, MonotoneSign::NonDecreasing | MonotoneSign::Flat)
    }

    pub fn is_non_increasing(self) -> bool {
        matches!(self, MonotoneSign::NonIncreasing | MonotoneSign::Flat)
    }

    /// The sign after relabeling the argument `1 <-> 0`.
    pub fn flip(self) -> Self {
        match self {
            MonotoneSign::NonDecreasing => MonotoneSign::NonIncreasing,
            MonotoneSign::NonIncreasing => MonotoneSign::NonDecreasing,
            other => other,
        }
    }
}

/// Scale on which the interaction assumption is stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionScale {
    #[serde(alias = "rr")]
    RiskRatio,
    #[serde(alias = "or")]
    OddsRatio,
    #[serde(alias = "rd")]
    RiskDifference,
}

/// Assumed sign of the exposure-outcome interaction on selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionSign {
    NonPositive,
    /// No interaction. Satisfies both non-positive and non-negative.
    Zero,
    NonNegative,
    Unknown,
}

impl InteractionSign {
    pub fn is_non_positive(self) -> bool {
        matches!(self, InteractionSign::NonPositive | InteractionSign::Zero)
    }

    pub fn is_non_negative(self) -> bool {
        matches!(self, InteractionSign::NonNegative | InteractionSign::Zero)
    }

    /// The sign after relabeling either variable `1 <-> 0` (the interaction
    /// measure inverts on every scale).
    pub fn flip(self) -> Self {
        match self {
            InteractionSign::NonPositive => InteractionSign::NonNegative,
            InteractionSign::NonNegative => InteractionSign::NonPositive,
            other => other,
        }
    }
}

/// Qualitative knowledge about the selection mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualitativeAssumptions {
    /// Monotonicity of `pi(d, e)` in `d`.
    pub sign_d: MonotoneSign,
    /// Monotonicity of `pi(d, e)` in `e`.
    pub sign_e: MonotoneSign,
    pub scale: InteractionScale,
    pub interaction_sign: InteractionSign,
}

impl QualitativeAssumptions {
    pub fn new(
        sign_d: MonotoneSign,
        sign_e: MonotoneSign,
        scale: InteractionScale,
        interaction_sign: InteractionSign,
    ) -> Self {
        QualitativeAssumptions {
            sign_d,
            sign_e,
            scale,
            interaction_sign,
        }
    }

    /// Assumptions describing the table with one variable relabeled
    /// `1 <-> 0`: the corresponding monotone sign and the interaction sign
    /// both flip.
    pub fn recode(&self, which: crate::measures::Variable) -> Self {
        let mut out = *self;
        match which {
            crate::measures::Variable::Exposure => out.sign_e = out.sign_e.flip(),
            crate::measures::Variable::Outcome => out.sign_d = out.sign_d.flip(),
        }
        out.interaction_sign = out.interaction_sign.flip();
        out
    }
}

/// True when the two arguments certifiedly move selection in the same
/// direction. `Flat` means the table is constant in that argument, which
/// forces the decomposition multiplier to one regardless of the partner, so
/// it matches any partner (including `Unknown`). `Unknown` certifies nothing
/// on its own.
pub fn same_direction(a: MonotoneSign, b: MonotoneSign) -> bool {
    if a == MonotoneSign::Flat || b == MonotoneSign::Flat {
        return true;
    }
    (a == MonotoneSign::NonDecreasing && b == MonotoneSign::NonDecreasing)
        || (a == MonotoneSign::NonIncreasing && b == MonotoneSign::NonIncreasing)
}

/// True when the two arguments certifiedly move selection in opposite
/// directions. `Flat` matches any partner; `Unknown` none.
pub fn opposite_direction(a: MonotoneSign, b: MonotoneSign) -> bool {
    if a == MonotoneSign::Flat || b == MonotoneSign::Flat {
        return true;
    }
    (a == MonotoneSign::NonDecreasing && b == MonotoneSign::NonIncreasing)
        || (a == MonotoneSign::NonIncreasing && b == MonotoneSign::NonDecreasing)
}

/// Relation between the selected-population and true odds ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundDirection {
    /// `OR_selected = OR_true`.
    Equal,
    /// `OR_selected <= OR_true`.
    SelectedIsLowerBound,
    /// `OR_selected >= OR_true`.
    SelectedIsUpperBound,
    /// No conclusion follows from the stated assumptions.
    Indeterminate,
}

/// Which bound rule produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AppliedResult {
    R1,
    R2a,
    R2b,
    R3a,
    R3b,
    R4a,
    R4b,
    None,
}

/// Structured record of which hypotheses the verdict used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rationale {
    pub scale: InteractionScale,
    pub interaction_sign: InteractionSign,
    pub sign_d: MonotoneSign,
    pub sign_e: MonotoneSign,
    /// Whether the monotonicity signs entered the decision. On the risk
    /// ratio scale they never do.
    pub monotonicity_used: bool,
    pub notes: Vec<String>,
}

/// Qualitative conclusion about the direction of selection bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub direction: BoundDirection,
    pub applied_result: AppliedResult,
    pub rationale: Rationale,
}

/// Decides the bound direction from qualitative assumptions.
///
/// On the risk ratio scale the interaction sign alone is decisive: the
/// multiplicative interaction *is* the multiplier linking the two odds
/// ratios, so monotonicity is not needed. On the odds ratio and risk
/// difference scales a non-positive interaction with same-direction
/// monotonicity bounds from below, and a non-negative interaction with
/// opposite-direction monotonicity bounds from above; zero interaction picks
/// the no-interaction rules. When both branches fire (possible with flat
/// signs or zero interaction) the conjunction is equality.
pub fn classify(a: &QualitativeAssumptions) -> BoundVerdict {
    let mut notes = Vec::new();
    let make = |direction, applied_result, monotonicity_used, notes: Vec<String>| BoundVerdict {
        direction,
        applied_result,
        rationale: Rationale {
            scale: a.scale,
            interaction_sign: a.interaction_sign,
            sign_d: a.sign_d,
            sign_e: a.sign_e,
            monotonicity_used,
            notes,
        },
    };

    if a.scale == InteractionScale::RiskRatio {
        notes.push(
            "risk-ratio scale: the interaction sign is decisive; monotonicity not used".into(),
        );
        return match a.interaction_sign {
            InteractionSign::Zero => make(BoundDirection::Equal, AppliedResult::R1, false, notes),
            InteractionSign::NonPositive => {
                notes.push(
                    "non-positive risk-ratio interaction alone implies the lower bound; \
                     monotonicity was not consulted"
                        .into(),
                );
                make(
                    BoundDirection::SelectedIsLowerBound,
                    AppliedResult::R4a,
                    false,
                    notes,
                )
            }
            InteractionSign::NonNegative => {
                notes.push(
                    "non-negative risk-ratio interaction alone implies the upper bound; \
                     monotonicity was not consulted"
                        .into(),
                );
                make(
                    BoundDirection::SelectedIsUpperBound,
                    AppliedResult::R4b,
                    false,
                    notes,
                )
            }
            InteractionSign::Unknown => {
                notes.push("missing: sign of the interaction on the risk ratio scale".into());
                make(
                    BoundDirection::Indeterminate,
                    AppliedResult::None,
                    false,
                    notes,
                )
            }
        };
    }

    // Odds ratio or risk difference scale.
    let zero = a.interaction_sign == InteractionSign::Zero;
    let lower_fires = a.interaction_sign.is_non_positive() && same_direction(a.sign_d, a.sign_e);
    let upper_fires =
        a.interaction_sign.is_non_negative() && opposite_direction(a.sign_d, a.sign_e);
    let (lower_rule, upper_rule) = match (a.scale, zero) {
        (InteractionScale::OddsRatio, true) => (AppliedResult::R2a, AppliedResult::R2b),
        (InteractionScale::RiskDifference, true) => (AppliedResult::R3a, AppliedResult::R3b),
        _ => (AppliedResult::R4a, AppliedResult::R4b),
    };

    match (lower_fires, upper_fires) {
        (true, true) => {
            notes.push(format!(
                "lower rule {:?} and upper rule {:?} both fire; the conjunction is equality",
                lower_rule, upper_rule
            ));
            make(BoundDirection::Equal, lower_rule, true, notes)
        }
        (true, false) => make(
            BoundDirection::SelectedIsLowerBound,
            lower_rule,
            true,
            notes,
        ),
        (false, true) => make(
            BoundDirection::SelectedIsUpperBound,
            upper_rule,
            true,
            notes,
        ),
        (false, false) => {
            if !a.interaction_sign.is_non_positive() && !a.interaction_sign.is_non_negative() {
                notes.push(format!(
                    "missing: sign of the interaction on the {:?} scale",
                    a.scale
                ));
            } else if a.interaction_sign.is_non_positive() && !same_direction(a.sign_d, a.sign_e) {
                notes.push(
                    "missing: same-direction monotonicity in d and e to pair with the \
                     non-positive interaction"
                        .into(),
                );
            } else {
                notes.push(
                    "missing: opposite-direction monotonicity in d and e to pair with the \
                     non-negative interaction"
                        .into(),
                );
            }
            make(
                BoundDirection::Indeterminate,
                AppliedResult::None,
                true,
                notes,
            )
        }
    }
}

fn direction_from_diffs(a: f64, b: f64, tol: f64) -> MonotoneSign {
    if a.abs() <= tol && b.abs() <= tol {
        MonotoneSign::Flat
    } else if a >= -tol && b >= -tol {
        MonotoneSign::NonDecreasing
    } else if a <= tol && b <= tol {
        MonotoneSign::NonIncreasing
    } else {
        MonotoneSign::Unknown
    }
}

/// Extracts qualitative assumptions from a concrete selection model.
///
/// A monotone direction is reported only when it is consistent across both
/// slices; ties within `tol` count as flat. The interaction sign comes from
/// the chosen scale's measure with `|measure| <= tol` mapped to zero. `tol`
/// is meant for numerical noise (typically 1e-12 to 1e-6), not for modeling
/// slack.
pub fn derive_assumptions(
    sel: &SelectionModel,
    scale: InteractionScale,
    tol: f64,
) -> Result<QualitativeAssumptions, Error> {
    let sign_d = direction_from_diffs(
        sel.prob(1, 1) - sel.prob(0, 1),
        sel.prob(1, 0) - sel.prob(0, 0),
        tol,
    );
    let sign_e = direction_from_diffs(
        sel.prob(1, 1) - sel.prob(1, 0),
        sel.prob(0, 1) - sel.prob(0, 0),
        tol,
    );
    let x = match scale {
        InteractionScale::RiskRatio => sel.inter_rr()? - 1.0,
        InteractionScale::OddsRatio => sel.inter_or()? - 1.0,
        InteractionScale::RiskDifference => sel.inter_rd(),
    };
    let interaction_sign = if x.abs() <= tol {
        InteractionSign::Zero
    } else if x < 0.0 {
        InteractionSign::NonPositive
    } else {
        InteractionSign::NonNegative
    };
    Ok(QualitativeAssumptions {
        sign_d,
        sign_e,
        scale,
        interaction_sign,
    })
}

/// Slack for the numeric cross-check: certified hypotheses are only known up
/// to `tol`, which translates into a bounded perturbation of the multiplier.
fn cross_check_slack(sel: &SelectionModel, scale: InteractionScale, tol: f64) -> f64 {
    let slack = match scale {
        InteractionScale::RiskRatio => tol,
        InteractionScale::RiskDifference => 2.0 * tol / (sel.prob(1, 0) * sel.prob(0, 1)),
        InteractionScale::OddsRatio => {
            let m = crate::measures::CELL_ORDER
                .iter()
                .map(|&(d, e)| {
                    let p = sel.prob(d, e);
                    p * (1.0 - p)
                })
                .fold(f64::INFINITY, f64::min);
            2.0 * tol + 4.0 * tol / m
        }
    };
    RATIO_REL_TOL + slack
}

/// Derives assumptions numerically, classifies them, and cross-checks the
/// verdict against the exact inequality the decomposition implies for the
/// multiplier. A cross-check failure signals an implementation bug.
///
/// When a target joint is supplied the selected and true odds ratios are
/// also compared directly, when defined.
pub fn classify_numeric(
    target: Option<&TargetJoint>,
    sel: &SelectionModel,
    scale: InteractionScale,
    tol: f64,
) -> Result<BoundVerdict, Error> {
    let assumptions = derive_assumptions(sel, scale, tol)?;
    let verdict = classify(&assumptions);

    if verdict.direction != BoundDirection::Indeterminate {
        if let Ok(inter_rr) = sel.inter_rr() {
            let slack = cross_check_slack(sel, scale, tol);
            let ok = match verdict.direction {
                BoundDirection::SelectedIsLowerBound => inter_rr <= 1.0 + slack,
                BoundDirection::SelectedIsUpperBound => inter_rr >= 1.0 - slack,
                BoundDirection::Equal => (inter_rr - 1.0).abs() <= slack,
                BoundDirection::Indeterminate => true,
            };
            if !ok {
                return Err(Error::InternalConsistency(format!(
                    "verdict {:?} contradicts Inter_RR = {inter_rr}",
                    verdict.direction
                )));
            }
            if let Some(t) = target {
                if let (Ok(or_sel), Ok(or_true)) =
                    (crate::measures::selected_or(t, sel), t.odds_ratio())
                {
                    let rel_slack = slack * or_true.max(or_sel);
                    let ok = match verdict.direction {
                        BoundDirection::SelectedIsLowerBound => or_sel <= or_true + rel_slack,
                        BoundDirection::SelectedIsUpperBound => or_sel >= or_true - rel_slack,
                        BoundDirection::Equal => (or_sel - or_true).abs() <= rel_slack,
                        BoundDirection::Indeterminate => true,
                    };
                    if !ok {
                        return Err(Error::InternalConsistency(format!(
                            "verdict {:?} contradicts OR_selected = {or_sel}, OR_true = {or_true}",
                            verdict.direction
                        )));
                    }
                }
            }
        }
    }
    Ok(verdict)
}

/// Classifies each stratum independently. Odds ratios are non-collapsible,
/// so no pooled verdict is offered.
pub fn stratified_classify(
    strata: &[(String, QualitativeAssumptions)],
) -> Result<Vec<(String, BoundVerdict)>, Error> {
    if strata.is_empty() {
        return Err(Error::EmptyStrata);
    }
    Ok(strata
        .iter()
        .map(|(label, a)| (label.clone(), classify(a)))
        .collect())
}
