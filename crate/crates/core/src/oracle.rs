//! Brute-force verification of the bound rules.
//!
//! The bound rules are inequalities about the decomposition multiplier
//! `Inter_RR` under hypotheses on a selection model. This module samples
//! selection models satisfying each hypothesis set — uniformly at random or
//! on a grid — and counts violations of the claimed conclusion
//! ([`verify_result`]). It also searches for models that violate the
//! hypotheses while still satisfying the conclusion
//! ([`find_nonnecessity_witness`]), checks the closed-form identities that
//! the proofs rest on ([`check_logistic_identity`], [`check_linear_identity`]),
//! and simulates finite studies ([`simulate_study`]).
//!
//! # Determinism
//!
//! Every model index derives its own RNG stream from `(seed, index)`, and
//! aggregation is order-independent (sums and the minimum-index violation),
//! so reports are byte-identical for any degree of parallelism. The
//! rejection cap applies per index for the same reason.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{opposite_direction, same_direction, InteractionScale};
use crate::error::Error;
use crate::measures::{
    expit, logit, LinearParams, LogisticParams, SelectionModel, TargetJoint, Variable, CELL_ORDER,
};

/// Open-interval clamp for sampled probabilities.
pub const EPSILON: f64 = 1e-6;

/// Rejection cap per model index.
pub const MAX_ATTEMPTS: u64 = 10_000_000;

/// Tolerance for "zero interaction" hypotheses and for conclusions asserted
/// via the multiplier.
pub const VERIFY_TOL: f64 = 1e-9;

/// Identifier of a verifiable bound rule. The `R4` rules split by the scale
/// the interaction hypothesis is stated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResultId {
    R1,
    R2a,
    R2b,
    R3a,
    R3b,
    #[serde(rename = "R4a-RR")]
    R4aRr,
    #[serde(rename = "R4a-OR")]
    R4aOr,
    #[serde(rename = "R4a-RD")]
    R4aRd,
    #[serde(rename = "R4b-RR")]
    R4bRr,
    #[serde(rename = "R4b-OR")]
    R4bOr,
    #[serde(rename = "R4b-RD")]
    R4bRd,
}

/// Direction a rule claims for the multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Claim {
    /// `Inter_RR = 1`
    Equal,
    /// `Inter_RR <= 1`
    AtMostOne,
    /// `Inter_RR >= 1`
    AtLeastOne,
}

impl ResultId {
    /// All eleven verifiable rule identifiers.
    pub const ALL: [ResultId; 11] = [
        ResultId::R1,
        ResultId::R2a,
        ResultId::R2b,
        ResultId::R3a,
        ResultId::R3b,
        ResultId::R4aRr,
        ResultId::R4aOr,
        ResultId::R4aRd,
        ResultId::R4bRr,
        ResultId::R4bOr,
        ResultId::R4bRd,
    ];

    /// Scale of the rule's interaction hypothesis.
    pub fn scale(self) -> InteractionScale {
        match self {
            ResultId::R1 | ResultId::R4aRr | ResultId::R4bRr => InteractionScale::RiskRatio,
            ResultId::R2a | ResultId::R2b | ResultId::R4aOr | ResultId::R4bOr => {
                InteractionScale::OddsRatio
            }
            ResultId::R3a | ResultId::R3b | ResultId::R4aRd | ResultId::R4bRd => {
                InteractionScale::RiskDifference
            }
        }
    }

    /// Whether the hypothesis pins the interaction to zero (the
    /// no-interaction rules R1-R3).
    fn zero_interaction(self) -> bool {
        matches!(
            self,
            ResultId::R1 | ResultId::R2a | ResultId::R2b | ResultId::R3a | ResultId::R3b
        )
    }

    /// Monotonicity requirement: `Some(true)` for same-direction,
    /// `Some(false)` for opposite-direction, `None` when the rule needs no
    /// monotonicity (R1, and R4 on the risk ratio scale where the
    /// interaction sign alone decides).
    fn direction_requirement(self) -> Option<bool> {
        match self {
            ResultId::R1 | ResultId::R4aRr | ResultId::R4bRr => None,
            ResultId::R2a | ResultId::R3a | ResultId::R4aOr | ResultId::R4aRd => Some(true),
            ResultId::R2b | ResultId::R3b | ResultId::R4bOr | ResultId::R4bRd => Some(false),
        }
    }

    fn claim(self) -> Claim {
        match self {
            ResultId::R1 => Claim::Equal,
            ResultId::R2a | ResultId::R3a | ResultId::R4aRr | ResultId::R4aOr | ResultId::R4aRd => {
                Claim::AtMostOne
            }
            ResultId::R2b | ResultId::R3b | ResultId::R4bRr | ResultId::R4bOr | ResultId::R4bRd => {
                Claim::AtLeastOne
            }
        }
    }

    /// The signed interaction measure on this rule's scale.
    fn interaction_measure(self, sel: &SelectionModel) -> Result<f64, Error> {
        Ok(match self.scale() {
            InteractionScale::RiskRatio => sel.inter_rr()? - 1.0,
            InteractionScale::OddsRatio => sel.inter_or()? - 1.0,
            InteractionScale::RiskDifference => sel.inter_rd(),
        })
    }

    /// Whether `sel` satisfies this rule's hypothesis set.
    pub fn hypotheses_hold(self, sel: &SelectionModel) -> Result<bool, Error> {
        let x = self.interaction_measure(sel)?;
        let interaction_ok = if self.zero_interaction() {
            x.abs() <= VERIFY_TOL
        } else if matches!(self.claim(), Claim::AtMostOne) {
            x <= 0.0
        } else {
            x >= 0.0
        };
        if !interaction_ok {
            return Ok(false);
        }
        match self.direction_requirement() {
            None => Ok(true),
            Some(same) => {
                let a = crate::classify::derive_assumptions(
                    sel,
                    InteractionScale::RiskDifference,
                    0.0,
                )?;
                Ok(if same {
                    same_direction(a.sign_d, a.sign_e)
                } else {
                    opposite_direction(a.sign_d, a.sign_e)
                })
            }
        }
    }

    /// Whether `sel` satisfies this rule's conclusion, asserted through the
    /// multiplier within [`VERIFY_TOL`].
    pub fn conclusion_holds(self, sel: &SelectionModel) -> Result<bool, Error> {
        let inter_rr = sel.inter_rr()?;
        Ok(match self.claim() {
            Claim::Equal => (inter_rr - 1.0).abs() <= VERIFY_TOL,
            Claim::AtMostOne => inter_rr <= 1.0 + VERIFY_TOL,
            Claim::AtLeastOne => inter_rr >= 1.0 - VERIFY_TOL,
        })
    }
}

impl fmt::Display for ResultId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ResultId::R1 => "R1",
            ResultId::R2a => "R2a",
            ResultId::R2b => "R2b",
            ResultId::R3a => "R3a",
            ResultId::R3b => "R3b",
            ResultId::R4aRr => "R4a-RR",
            ResultId::R4aOr => "R4a-OR",
            ResultId::R4aRd => "R4a-RD",
            ResultId::R4bRr => "R4b-RR",
            ResultId::R4bOr => "R4b-OR",
            ResultId::R4bRd => "R4b-RD",
        };
        f.write_str(s)
    }
}

impl FromStr for ResultId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "R1" => Ok(ResultId::R1),
            "R2A" => Ok(ResultId::R2a),
            "R2B" => Ok(ResultId::R2b),
            "R3A" => Ok(ResultId::R3a),
            "R3B" => Ok(ResultId::R3b),
            "R4A-RR" => Ok(ResultId::R4aRr),
            "R4A-OR" => Ok(ResultId::R4aOr),
            "R4A-RD" => Ok(ResultId::R4aRd),
            "R4B-RR" => Ok(ResultId::R4bRr),
            "R4B-OR" => Ok(ResultId::R4bOr),
            "R4B-RD" => Ok(ResultId::R4bRd),
            other => Err(Error::InvalidConfig(format!(
                "unknown result identifier '{other}'"
            ))),
        }
    }
}

/// Hypothesis set a sampler enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// No constraint: any table in the open hypercube.
    None,
    /// The hypothesis set of one bound rule.
    Result(ResultId),
    /// Exploration of the region the bound rules leave open: positive
    /// risk-ratio interaction with same-direction monotonicity. Nothing is
    /// asserted there.
    PositiveRrSameDirection,
}

impl Constraint {
    /// Whether `sel` satisfies the constraint.
    pub fn satisfied_by(self, sel: &SelectionModel) -> Result<bool, Error> {
        match self {
            Constraint::None => Ok(true),
            Constraint::Result(id) => id.hypotheses_hold(sel),
            Constraint::PositiveRrSameDirection => {
                if sel.inter_rr()? <= 1.0 {
                    return Ok(false);
                }
                let a = crate::classify::derive_assumptions(
                    sel,
                    InteractionScale::RiskDifference,
                    0.0,
                )?;
                Ok(same_direction(a.sign_d, a.sign_e))
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::None => f.write_str("none"),
            Constraint::Result(id) => write!(f, "{id}"),
            Constraint::PositiveRrSameDirection => f.write_str("explore-rr-positive"),
        }
    }
}

impl FromStr for Constraint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        if s.eq_ignore_ascii_case("none") {
            Ok(Constraint::None)
        } else if s.eq_ignore_ascii_case("explore-rr-positive") {
            Ok(Constraint::PositiveRrSameDirection)
        } else {
            Ok(Constraint::Result(s.parse()?))
        }
    }
}

impl Serialize for Constraint {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Constraint {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How models are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMode {
    UniformRandom,
    Grid,
}

/// Sampler configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub mode: SamplerMode,
    /// Number of models for [`SamplerMode::UniformRandom`]; per-axis
    /// resolution for [`SamplerMode::Grid`].
    pub count: u64,
    pub seed: u64,
    pub constraint: Constraint,
}

impl SamplerConfig {
    /// Random sampling of `count` models under `constraint`.
    pub fn random(count: u64, seed: u64, constraint: Constraint) -> Self {
        SamplerConfig {
            mode: SamplerMode::UniformRandom,
            count,
            seed,
            constraint,
        }
    }

    /// Grid enumeration at the given per-axis resolution.
    pub fn grid(resolution: u64, constraint: Constraint) -> Self {
        SamplerConfig {
            mode: SamplerMode::Grid,
            count: resolution,
            seed: 0,
            constraint,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        match self.mode {
            SamplerMode::UniformRandom if self.count < 1 => {
                Err(Error::InvalidConfig("count must be at least 1".to_string()))
            }
            SamplerMode::Grid if self.count < 2 => Err(Error::InvalidConfig(
                "grid resolution must be at least 2".to_string(),
            )),
            SamplerMode::Grid if self.count.checked_pow(4).is_none() => Err(Error::InvalidConfig(
                "grid resolution overflows the lattice index".to_string(),
            )),
            _ => Ok(()),
        }
    }

    /// Number of lattice points in grid mode.
    fn lattice_size(&self) -> u64 {
        self.count.pow(4)
    }
}

/// SplitMix64-style combination of the run seed and a model index; bijective
/// in the index for a fixed seed, so every index owns a distinct stream.
fn stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        ^ index
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, index))
}

fn draw_open_unit(rng: &mut ChaCha8Rng) -> f64 {
    EPSILON + (1.0 - 2.0 * EPSILON) * rng.random::<f64>()
}

fn in_open_unit(x: f64) -> bool {
    x > EPSILON && x < 1.0 - EPSILON
}

/// One proposal; `None` means rejected.
fn propose(rng: &mut ChaCha8Rng, constraint: Constraint) -> Option<SelectionModel> {
    let model = match constraint {
        Constraint::Result(id) if id.zero_interaction() => {
            // The zero-interaction hypothesis set has measure zero, so the
            // constrained cell is solved from the other three.
            let p10 = draw_open_unit(rng);
            let p01 = draw_open_unit(rng);
            let p00 = draw_open_unit(rng);
            let p11 = match id.scale() {
                InteractionScale::RiskRatio => p10 * p01 / p00,
                InteractionScale::OddsRatio => expit(logit(p10) + logit(p01) - logit(p00)),
                InteractionScale::RiskDifference => p10 + p01 - p00,
            };
            if !in_open_unit(p11) {
                return None;
            }
            SelectionModel::from_cells_unchecked([p11, p10, p01, p00])
        }
        _ => {
            let cells: [f64; 4] = std::array::from_fn(|_| draw_open_unit(rng));
            SelectionModel::from_cells_unchecked(cells)
        }
    };
    match constraint.satisfied_by(&model) {
        Ok(true) => Some(model),
        _ => None,
    }
}

/// The model at a given index of a random-mode sampler, independent of any
/// other index.
fn nth_model(seed: u64, index: u64, constraint: Constraint) -> Result<SelectionModel, Error> {
    let mut rng = stream_rng(seed, index);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(m) = propose(&mut rng, constraint) {
            return Ok(m);
        }
    }
    Err(Error::RejectionExhausted {
        attempts: MAX_ATTEMPTS,
    })
}

/// The lattice point at a given linear index: each cell runs over
/// `i / (resolution + 1)`, `i = 1..=resolution`.
fn grid_model(resolution: u64, index: u64) -> SelectionModel {
    let mut digits = [0u64; 4];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = rest % resolution;
        rest /= resolution;
    }
    let step = 1.0 / (resolution as f64 + 1.0);
    SelectionModel::from_cells_unchecked(digits.map(|i| (i as f64 + 1.0) * step))
}

/// Materializes the sampler output. Random mode applies rejection per index;
/// grid mode enumerates the lattice and filters by the constraint.
pub fn sample_models(cfg: &SamplerConfig) -> Result<Vec<SelectionModel>, Error> {
    cfg.validate()?;
    match cfg.mode {
        SamplerMode::UniformRandom => (0..cfg.count)
            .map(|i| nth_model(cfg.seed, i, cfg.constraint))
            .collect(),
        SamplerMode::Grid => {
            let total = cfg.lattice_size();
            let mut out = Vec::new();
            for i in 0..total {
                let m = grid_model(cfg.count, i);
                if cfg.constraint.satisfied_by(&m)? {
                    out.push(m);
                }
            }
            Ok(out)
        }
    }
}

/// Outcome of verifying one rule over sampled models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub result_id: ResultId,
    pub seed: u64,
    /// Models emitted by the sampler.
    pub models_tested: u64,
    /// Of those, models satisfying the rule's hypothesis set.
    pub models_satisfying_conditions: u64,
    /// Hypothesis-satisfying models whose conclusion failed.
    pub violations: u64,
    pub first_violation_index: Option<u64>,
    pub first_violation: Option<SelectionModel>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    tested: u64,
    satisfying: u64,
    violations: u64,
    first: Option<(u64, SelectionModel)>,
}

impl Tally {
    fn merge(a: Tally, b: Tally) -> Tally {
        Tally {
            tested: a.tested + b.tested,
            satisfying: a.satisfying + b.satisfying,
            violations: a.violations + b.violations,
            first: match (a.first, b.first) {
                (Some(x), Some(y)) => Some(if x.0 <= y.0 { x } else { y }),
                (x, y) => x.or(y),
            },
        }
    }
}

fn eval_model(result_id: ResultId, index: u64, model: &SelectionModel) -> Result<Tally, Error> {
    let satisfies = result_id.hypotheses_hold(model)?;
    if !satisfies {
        return Ok(Tally {
            tested: 1,
            ..Tally::default()
        });
    }
    let ok = result_id.conclusion_holds(model)?;
    Ok(Tally {
        tested: 1,
        satisfying: 1,
        violations: u64::from(!ok),
        first: (!ok).then_some((index, *model)),
    })
}

/// Samples models under `cfg` and asserts `result_id`'s conclusion on every
/// model satisfying its hypotheses.
///
/// Runs on the current rayon thread pool; the report is identical for any
/// worker count.
pub fn verify_result(
    result_id: ResultId,
    cfg: &SamplerConfig,
) -> Result<VerificationReport, Error> {
    cfg.validate()?;
    let tally = match cfg.mode {
        SamplerMode::UniformRandom => (0..cfg.count)
            .into_par_iter()
            .map(|i| {
                let m = nth_model(cfg.seed, i, cfg.constraint)?;
                eval_model(result_id, i, &m)
            })
            .try_reduce(Tally::default, |a, b| Ok(Tally::merge(a, b)))?,
        SamplerMode::Grid => (0..cfg.lattice_size())
            .into_par_iter()
            .map(|i| {
                let m = grid_model(cfg.count, i);
                if !cfg.constraint.satisfied_by(&m)? {
                    return Ok(Tally::default());
                }
                eval_model(result_id, i, &m)
            })
            .try_reduce(Tally::default, |a, b| Ok(Tally::merge(a, b)))?,
    };
    Ok(VerificationReport {
        result_id,
        seed: cfg.seed,
        models_tested: tally.tested,
        models_satisfying_conditions: tally.satisfying,
        violations: tally.violations,
        first_violation_index: tally.first.map(|(i, _)| i),
        first_violation: tally.first.map(|(_, m)| m),
    })
}

/// Searches for a model that violates the rule's hypotheses while satisfying
/// its conclusion, demonstrating that the hypotheses are sufficient but not
/// necessary. Returns the first (lowest-index) witness, or `None` if the
/// scan found none — for R4 on the risk ratio scale the hypothesis *is* the
/// conclusion, so no witness can exist.
///
/// For R1 the interesting near-misses are models with zero risk-ratio
/// interaction that nonetheless violate the collapsibility conditions, so
/// the scan runs over zero-interaction constructions.
pub fn find_nonnecessity_witness(
    result_id: ResultId,
    cfg: &SamplerConfig,
) -> Result<Option<SelectionModel>, Error> {
    cfg.validate()?;
    let is_witness = |m: &SelectionModel| -> Result<bool, Error> {
        if result_id == ResultId::R1 {
            // Hypothesis set for non-necessity: the collapsibility special
            // case (constant in d or in e).
            let collapsible = m.constant_in(Variable::Exposure, VERIFY_TOL)
                || m.constant_in(Variable::Outcome, VERIFY_TOL);
            return Ok(!collapsible && (m.inter_rr()? - 1.0).abs() <= VERIFY_TOL);
        }
        if result_id.hypotheses_hold(m)? {
            return Ok(false);
        }
        let inter_rr = m.inter_rr()?;
        Ok(match result_id.claim() {
            Claim::Equal => (inter_rr - 1.0).abs() <= VERIFY_TOL,
            Claim::AtMostOne => inter_rr <= 1.0,
            Claim::AtLeastOne => inter_rr >= 1.0,
        })
    };

    let constraint = if result_id == ResultId::R1 {
        Constraint::Result(ResultId::R1)
    } else {
        Constraint::None
    };
    match cfg.mode {
        SamplerMode::UniformRandom => {
            for i in 0..cfg.count {
                let m = nth_model(cfg.seed, i, constraint)?;
                if is_witness(&m)? {
                    return Ok(Some(m));
                }
            }
            Ok(None)
        }
        SamplerMode::Grid => {
            for i in 0..cfg.lattice_size() {
                let m = grid_model(cfg.count, i);
                if is_witness(&m)? {
                    return Ok(Some(m));
                }
            }
            Ok(None)
        }
    }
}

/// Outcome of a closed-form identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub pass: bool,
    /// Scaled residual `|lhs - rhs| / max(1, |lhs|, |rhs|)` for equalities;
    /// the scaled amount by which an inequality is breached (0 when it
    /// holds).
    pub residual: f64,
    /// False when the parameter signs match none of the asserted patterns,
    /// in which case nothing is claimed and `pass` is vacuously true.
    pub applicable: bool,
}

/// Checks the odds-scale identity behind the no-interaction bound and, for
/// nonzero `beta3`, the directional inequality behind the signed-interaction
/// bound.
///
/// With `beta3 = 0`, asserts
/// `1/A - 1/B = exp(-b0) (1 - exp(-b1)) (1 - exp(-b2))` where
/// `A = expit(b0) expit(b0+b1+b2)` and `B = expit(b0+b1) expit(b0+b2)`.
/// With `beta3 < 0` and `b1 b2 >= 0`, asserts `1/A' - 1/B' >= 0` (so the
/// multiplier is at most one); mirrored for `beta3 > 0` and `b1 b2 <= 0`.
pub fn check_logistic_identity(b: &LogisticParams, tol: f64) -> IdentityCheck {
    let (b0, b1, b2, b3) = (b.beta0, b.beta1, b.beta2, b.beta3);
    if b3 == 0.0 {
        let a = expit(b0) * expit(b0 + b1 + b2);
        let bb = expit(b0 + b1) * expit(b0 + b2);
        let lhs = 1.0 / a - 1.0 / bb;
        let rhs = (-b0).exp() * (1.0 - (-b1).exp()) * (1.0 - (-b2).exp());
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        let residual = (lhs - rhs).abs() / scale;
        return IdentityCheck {
            pass: residual <= tol,
            residual,
            applicable: true,
        };
    }
    let a = expit(b0) * expit(b0 + b1 + b2 + b3);
    let bb = expit(b0 + b1) * expit(b0 + b2);
    let diff = 1.0 / a - 1.0 / bb;
    let scale = (1.0 / a).max(1.0 / bb).max(1.0);
    let (residual, applicable) = if b3 < 0.0 && b1 * b2 >= 0.0 {
        ((-diff).max(0.0) / scale, true)
    } else if b3 > 0.0 && b1 * b2 <= 0.0 {
        (diff.max(0.0) / scale, true)
    } else {
        (0.0, false)
    };
    IdentityCheck {
        pass: residual <= tol,
        residual,
        applicable,
    }
}

/// Checks the linear-scale closed form of the multiplier:
/// `Inter_RR = 1 - g1 g2 / D + g0 g3 / D` with `D = (g0+g1)(g0+g2)`.
pub fn check_linear_identity(g: &LinearParams, tol: f64) -> Result<IdentityCheck, Error> {
    if g.gamma0 + g.gamma1 <= 0.0 {
        return Err(Error::ZeroSelectionCell { d: 1, e: 0 });
    }
    if g.gamma0 + g.gamma2 <= 0.0 {
        return Err(Error::ZeroSelectionCell { d: 0, e: 1 });
    }
    let model = g.selection_model()?;
    let lhs = model.inter_rr()?;
    let denom = (g.gamma0 + g.gamma1) * (g.gamma0 + g.gamma2);
    let rhs = 1.0 - g.gamma1 * g.gamma2 / denom + g.gamma0 * g.gamma3 / denom;
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    let residual = (lhs - rhs).abs() / scale;
    Ok(IdentityCheck {
        pass: residual <= tol,
        residual,
        applicable: true,
    })
}

/// A simulated study: individuals drawn from the target joint, selected per
/// the selection model, tabulated by (e, d, s).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudySample {
    pub n: u64,
    pub seed: u64,
    /// `counts[e][d][s]`
    pub counts: [[[u64; 2]; 2]; 2],
    pub selected: u64,
    pub empirical_selected_or: f64,
}

impl StudySample {
    pub fn count(&self, e: u8, d: u8, s: u8) -> u64 {
        self.counts[e as usize][d as usize][s as usize]
    }
}

/// Draws `n` individuals from `target`, selects each with probability
/// `pi(d, e)`, and computes the empirical odds ratio among the selected.
/// Deterministic given the seed; single sequential stream.
pub fn simulate_study(
    target: &TargetJoint,
    sel: &SelectionModel,
    n: u64,
    seed: u64,
) -> Result<StudySample, Error> {
    if n < 1 {
        return Err(Error::InvalidConfig("n must be at least 1".to_string()));
    }
    let cells = target.cells();
    let mut counts = [[[0u64; 2]; 2]; 2];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut picked = CELL_ORDER[3];
        for (i, &(d, e)) in CELL_ORDER.iter().enumerate() {
            cum += cells[i];
            if u < cum {
                picked = (d, e);
                break;
            }
        }
        let (d, e) = picked;
        let s = rng.random::<f64>() < sel.prob(d, e);
        counts[e as usize][d as usize][usize::from(s)] += 1;
    }
    for (d, e) in CELL_ORDER {
        if counts[e as usize][d as usize][1] == 0 {
            return Err(Error::DegenerateSample { d, e });
        }
    }
    let sel_count = |d: usize, e: usize| counts[e][d][1] as f64;
    let empirical = (sel_count(1, 1) * sel_count(0, 0)) / (sel_count(1, 0) * sel_count(0, 1));
    let selected = counts
        .iter()
        .flat_map(|by_d| by_d.iter())
        .map(|by_s| by_s[1])
        .sum();
    Ok(StudySample {
        n,
        seed,
        counts,
        selected,
        empirical_selected_or: empirical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::derive_assumptions;

    const EXAMPLE1: [f64; 4] = [0.8, 0.6, 0.4, 0.1];
    const EXAMPLE1_MODIFIED: [f64; 4] = [0.8, 0.6, 0.4, 0.25];

    fn sel(cells: [f64; 4]) -> SelectionModel {
        SelectionModel::new(cells).unwrap()
    }

    #[test]
    fn sampler_is_deterministic() {
        let cfg = SamplerConfig::random(5, 99, Constraint::None);
        let a = sample_models(&cfg).unwrap();
        let b = sample_models(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }

    #[test]
    fn sampler_enforces_r2a_constraint() {
        let cfg = SamplerConfig::random(200, 3, Constraint::Result(ResultId::R2a));
        for m in sample_models(&cfg).unwrap() {
            assert!((m.inter_or().unwrap() - 1.0).abs() <= VERIFY_TOL);
            let a = derive_assumptions(&m, InteractionScale::RiskDifference, 0.0).unwrap();
            assert!(same_direction(a.sign_d, a.sign_e));
        }
    }

    #[test]
    fn grid_resolution_five_yields_625_tables() {
        let cfg = SamplerConfig::grid(5, Constraint::None);
        assert_eq!(sample_models(&cfg).unwrap().len(), 625);
    }

    #[test]
    fn grid_models_lie_on_the_open_lattice() {
        let cfg = SamplerConfig::grid(3, Constraint::None);
        for m in sample_models(&cfg).unwrap() {
            for c in m.cells() {
                assert!(c > 0.0 && c < 1.0);
                assert!([0.25, 0.5, 0.75].iter().any(|&x| (c - x).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn verify_all_results_on_small_runs() {
        for id in ResultId::ALL {
            let cfg = SamplerConfig::random(2_000, 17, Constraint::Result(id));
            let report = verify_result(id, &cfg).unwrap();
            assert_eq!(report.models_tested, 2_000);
            assert_eq!(report.models_satisfying_conditions, 2_000);
            assert_eq!(report.violations, 0, "violations for {id}");
            assert!(report.first_violation.is_none());
        }
    }

    #[test]
    fn verify_with_unconstrained_sampler_counts_the_satisfying_subset() {
        let cfg = SamplerConfig::random(2_000, 5, Constraint::None);
        let report = verify_result(ResultId::R4aRd, &cfg).unwrap();
        assert_eq!(report.models_tested, 2_000);
        assert!(report.models_satisfying_conditions < 2_000);
        assert!(report.models_satisfying_conditions > 0);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn verify_report_identical_across_worker_counts() {
        for cfg in [
            SamplerConfig::random(5_000, 42, Constraint::Result(ResultId::R2a)),
            SamplerConfig::grid(7, Constraint::Result(ResultId::R2a)),
        ] {
            let reports: Vec<VerificationReport> = [1usize, 4]
                .iter()
                .map(|&threads| {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(threads)
                        .build()
                        .unwrap()
                        .install(|| verify_result(ResultId::R2a, &cfg).unwrap())
                })
                .collect();
            assert_eq!(reports[0], reports[1]);
            assert_eq!(
                serde_json::to_string(&reports[0]).unwrap(),
                serde_json::to_string(&reports[1]).unwrap()
            );
        }
    }

    #[test]
    fn witness_found_for_r4a_rd() {
        let cfg = SamplerConfig::random(10_000, 1, Constraint::None);
        let w = find_nonnecessity_witness(ResultId::R4aRd, &cfg)
            .unwrap()
            .expect("witness exists");
        assert!(!ResultId::R4aRd.hypotheses_hold(&w).unwrap());
        assert!(w.inter_rr().unwrap() <= 1.0);
    }

    #[test]
    fn modified_example_is_itself_a_witness() {
        let m = sel(EXAMPLE1_MODIFIED);
        assert!(!ResultId::R4aRd.hypotheses_hold(&m).unwrap());
        assert!((m.inter_rr().unwrap() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn witness_for_r1_breaks_collapsibility() {
        let cfg = SamplerConfig::random(1_000, 2, Constraint::None);
        let w = find_nonnecessity_witness(ResultId::R1, &cfg)
            .unwrap()
            .expect("witness exists");
        assert!((w.inter_rr().unwrap() - 1.0).abs() <= VERIFY_TOL);
        assert!(!w.constant_in(Variable::Exposure, VERIFY_TOL));
        assert!(!w.constant_in(Variable::Outcome, VERIFY_TOL));
    }

    #[test]
    fn impossible_witness_search_returns_none() {
        // For R4a-RR the hypothesis is the conclusion, so a model violating
        // the one cannot satisfy the other.
        let cfg = SamplerConfig::random(5_000, 3, Constraint::None);
        assert_eq!(
            find_nonnecessity_witness(ResultId::R4aRr, &cfg).unwrap(),
            None
        );
    }

    #[test]
    fn exploration_mode_samples_the_open_region() {
        let cfg = SamplerConfig::random(50, 8, Constraint::PositiveRrSameDirection);
        for m in sample_models(&cfg).unwrap() {
            assert!(m.inter_rr().unwrap() > 1.0);
        }
    }

    #[test]
    fn logistic_identity_zero_params() {
        let b = LogisticParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let check = check_logistic_identity(&b, 1e-12);
        assert!(check.pass);
        assert_eq!(check.residual, 0.0);
    }

    #[test]
    fn logistic_identity_random_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1_000 {
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
    }

    #[test]
    fn logistic_directional_inequality_example() {
        let b = LogisticParams::new(1.0, 0.5, 0.5, -0.3).unwrap();
        let check = check_logistic_identity(&b, 1e-12);
        assert!(check.applicable);
        assert!(check.pass);
        assert!(b.selection_model().inter_rr().unwrap() <= 1.0);
    }

    #[test]
    fn logistic_directional_not_applicable_pattern() {
        let b = LogisticParams::new(0.0, 1.0, -1.0, -0.5).unwrap();
        let check = check_logistic_identity(&b, 1e-12);
        assert!(!check.applicable);
        assert!(check.pass);
    }

    #[test]
    fn linear_identity_constant_model() {
        let g = LinearParams::new(0.5, 0.0, 0.0, 0.0).unwrap();
        let check = check_linear_identity(&g, 1e-12).unwrap();
        assert!(check.pass);
        let m = g.selection_model().unwrap();
        assert_eq!(m.inter_rr().unwrap(), 1.0);
    }

    #[test]
    fn linear_identity_example1_gives_one_third() {
        let g = LinearParams::new(0.1, 0.5, 0.3, -0.1).unwrap();
        let check = check_linear_identity(&g, 1e-12).unwrap();
        assert!(check.pass);
        let denom: f64 = 0.6 * 0.4;
        let closed_form: f64 = 1.0 - (0.5 * 0.3) / denom + (0.1 * -0.1) / denom;
        assert!((closed_form - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_identity_random_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut accepted = 0;
        while accepted < 1_000 {
            let cells: [f64; 4] = std::array::from_fn(|_| rng.random_range(1e-3..1.0));
            let Ok(m) = SelectionModel::new(cells) else {
                continue;
            };
            accepted += 1;
            let check = check_linear_identity(&m.fit_linear(), 1e-12).unwrap();
            assert!(check.pass, "residual {}", check.residual);
        }
    }

    #[test]
    fn linear_identity_rejects_zero_denominator() {
        let g = LinearParams {
            gamma0: 0.0,
            gamma1: 0.0,
            gamma2: 0.5,
            gamma3: 0.0,
        };
        assert_eq!(
            check_linear_identity(&g, 1e-12),
            Err(Error::ZeroSelectionCell { d: 1, e: 0 })
        );
    }

    #[test]
    fn simulate_is_deterministic_and_counts_add_up() {
        let t = TargetJoint::uniform();
        let s = sel(EXAMPLE1);
        let a = simulate_study(&t, &s, 50_000, 7).unwrap();
        let b = simulate_study(&t, &s, 50_000, 7).unwrap();
        assert_eq!(a, b);
        let total: u64 = a
            .counts
            .iter()
            .flat_map(|x| x.iter())
            .flat_map(|x| x.iter())
            .sum();
        assert_eq!(total, 50_000);
    }

    #[test]
    fn simulate_full_selection_recovers_true_or() {
        let t = TargetJoint::new([0.4, 0.1, 0.1, 0.4]).unwrap();
        let s = sel([1.0; 4]);
        let sample = simulate_study(&t, &s, 200_000, 11).unwrap();
        assert_eq!(sample.selected, 200_000);
        let rel = (sample.empirical_selected_or - 16.0).abs() / 16.0;
        assert!(rel < 0.05, "empirical {}", sample.empirical_selected_or);
    }

    #[test]
    fn simulate_single_draw_is_degenerate() {
        let t = TargetJoint::uniform();
        assert!(matches!(
            simulate_study(&t, &sel(EXAMPLE1), 1, 0),
            Err(Error::DegenerateSample { .. })
        ));
    }

    #[test]
    fn result_id_round_trips_through_strings() {
        for id in ResultId::ALL {
            assert_eq!(id.to_string().parse::<ResultId>().unwrap(), id);
        }
        assert!("R9".parse::<ResultId>().is_err());
        assert_eq!("r4a-rd".parse::<ResultId>().unwrap(), ResultId::R4aRd);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(SamplerConfig::random(0, 0, Constraint::None)
            .validate()
            .is_err());
        assert!(SamplerConfig::grid(1, Constraint::None).validate().is_err());
        assert!(matches!(
            sample_models(&SamplerConfig::grid(1, Constraint::None)),
            Err(Error::InvalidConfig(_))
        ));
    }
}
