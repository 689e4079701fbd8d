//! Association and interaction measures on binary joint distributions and
//! selection models.
//!
//! [`TargetJoint`] holds the joint law of exposure and outcome in the target
//! population; [`SelectionModel`] holds the four selection probabilities
//! `pi(d, e) = P(S=1 | D=d, E=e)`. The central fact is the decomposition
//! `OR_selected = OR_true * Inter_RR`, computed by [`decomposition`]. The
//! interaction measures on the three scales come with their saturated model
//! parametrizations ([`LogisticParams`], [`LinearParams`]).
//!
//! All four-cell constructors and serializations use the cell order
//! `(d=1,e=1), (d=1,e=0), (d=0,e=1), (d=0,e=0)`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::PROB_ABS_TOL;

/// Inverse logit: `1 / (1 + exp(-x))`.
pub fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Log odds: `ln(p / (1 - p))`. Finite only for `p` strictly inside (0, 1).
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}

/// One of the two binary variables in a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variable {
    /// The exposure `E`.
    #[serde(rename = "E")]
    Exposure,
    /// The outcome `D`.
    #[serde(rename = "D")]
    Outcome,
}

/// Joint law of `(E, D)` in the target population: four cell probabilities.
///
/// Cells are non-negative and sum to one (absolute tolerance 1e-12). Zero
/// cells are allowed at construction; odds-ratio queries check positivity at
/// query time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct TargetJoint {
    /// p[e][d] = P(E=e, D=d)
    p: [[f64; 2]; 2],
}

impl TargetJoint {
    /// Builds a joint law from cells in the order (d=1,e=1), (d=1,e=0),
    /// (d=0,e=1), (d=0,e=0).
    pub fn new(cells: [f64; 4]) -> Result<Self, Error> {
        for (i, &c) in cells.iter().enumerate() {
            if !c.is_finite() || !(0.0..=1.0).contains(&c) {
                let (d, e) = CELL_ORDER[i];
                return Err(Error::ProbabilityOutOfRange {
                    name: format!("target cell (d={d}, e={e})"),
                    value: c,
                });
            }
        }
        let sum: f64 = cells.iter().sum();
        if (sum - 1.0).abs() > PROB_ABS_TOL {
            return Err(Error::DistributionNotNormalized { sum });
        }
        Ok(Self::from_cells_unchecked(cells))
    }

    fn from_cells_unchecked(cells: [f64; 4]) -> Self {
        let mut p = [[0.0; 2]; 2];
        for (i, &(d, e)) in CELL_ORDER.iter().enumerate() {
            p[e as usize][d as usize] = cells[i];
        }
        TargetJoint { p }
    }

    /// The uniform joint law, `p = 1/4` in every cell.
    pub fn uniform() -> Self {
        Self::from_cells_unchecked([0.25; 4])
    }

    /// An independence joint with `P(E=1) = pe` and `P(D=1) = pd`.
    pub fn independent(pe: f64, pd: f64) -> Result<Self, Error> {
        for (name, v) in [("P(E=1)", pe), ("P(D=1)", pd)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::ProbabilityOutOfRange {
                    name: name.to_string(),
                    value: v,
                });
            }
        }
        Ok(Self::from_cells_unchecked([
            pe * pd,
            (1.0 - pe) * pd,
            pe * (1.0 - pd),
            (1.0 - pe) * (1.0 - pd),
        ]))
    }

    /// `P(E=e, D=d)`.
    pub fn prob(&self, d: u8, e: u8) -> f64 {
        self.p[e as usize][d as usize]
    }

    /// Cells in the order (d=1,e=1), (d=1,e=0), (d=0,e=1), (d=0,e=0).
    pub fn cells(&self) -> [f64; 4] {
        CELL_ORDER.map(|(d, e)| self.prob(d, e))
    }

    /// The odds ratio `OR_ED` of exposure and outcome.
    ///
    /// Requires all four cells strictly positive; the error names the first
    /// offending cell.
    pub fn odds_ratio(&self) -> Result<f64, Error> {
        for (d, e) in CELL_ORDER {
            if self.prob(d, e) <= 0.0 {
                return Err(Error::ZeroCell { d, e });
            }
        }
        Ok((self.prob(1, 1) * self.prob(0, 0)) / (self.prob(1, 0) * self.prob(0, 1)))
    }

    /// The risk ratio `RR_ED = P(D=1|E=1) / P(D=1|E=0)`.
    pub fn risk_ratio(&self) -> Result<f64, Error> {
        let r1 = self.risk_given_exposure(1)?;
        let r0 = self.risk_given_exposure(0)?;
        if r0 <= 0.0 {
            return Err(Error::ZeroCell { d: 1, e: 0 });
        }
        Ok(r1 / r0)
    }

    /// The risk difference `RD_ED = P(D=1|E=1) - P(D=1|E=0)`.
    pub fn risk_difference(&self) -> Result<f64, Error> {
        Ok(self.risk_given_exposure(1)? - self.risk_given_exposure(0)?)
    }

    fn risk_given_exposure(&self, e: u8) -> Result<f64, Error> {
        let margin = self.prob(1, e) + self.prob(0, e);
        if margin <= 0.0 {
            return Err(Error::ProbabilityOutOfRange {
                name: format!("P(E={e})"),
                value: 0.0,
            });
        }
        Ok(self.prob(1, e) / margin)
    }

    /// Relabels one variable `1 <-> 0`.
    pub fn recode(&self, which: Variable) -> Self {
        let f = |d: u8, e: u8| match which {
            Variable::Exposure => self.prob(d, 1 - e),
            Variable::Outcome => self.prob(1 - d, e),
        };
        Self::from_cells_unchecked(CELL_ORDER.map(|(d, e)| f(d, e)))
    }
}

impl TryFrom<[f64; 4]> for TargetJoint {
    type Error = Error;
    fn try_from(cells: [f64; 4]) -> Result<Self, Error> {
        TargetJoint::new(cells)
    }
}

impl From<TargetJoint> for [f64; 4] {
    fn from(t: TargetJoint) -> [f64; 4] {
        t.cells()
    }
}

/// Cell order used in every four-value constructor and serialization.
pub const CELL_ORDER: [(u8, u8); 4] = [(1, 1), (1, 0), (0, 1), (0, 0)];

/// The four selection probabilities `pi(d, e) = P(S=1 | D=d, E=e)`.
///
/// Each lies in [0, 1] and at least one is positive. Boundary values are
/// legal (a design may select every case); odds-scale queries reject them at
/// query time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct SelectionModel {
    /// pi[d][e] = P(S=1 | D=d, E=e)
    pi: [[f64; 2]; 2],
}

impl SelectionModel {
    /// Builds a selection model from cells in the order (d=1,e=1), (d=1,e=0),
    /// (d=0,e=1), (d=0,e=0).
    pub fn new(cells: [f64; 4]) -> Result<Self, Error> {
        for (i, &c) in cells.iter().enumerate() {
            if !c.is_finite() || !(0.0..=1.0).contains(&c) {
                let (d, e) = CELL_ORDER[i];
                return Err(Error::ProbabilityOutOfRange {
                    name: format!("selection cell (d={d}, e={e})"),
                    value: c,
                });
            }
        }
        if cells.iter().all(|&c| c <= 0.0) {
            return Err(Error::AllZeroSelection);
        }
        Ok(Self::from_cells_unchecked(cells))
    }

    pub(crate) fn from_cells_unchecked(cells: [f64; 4]) -> Self {
        let mut pi = [[0.0; 2]; 2];
        for (i, &(d, e)) in CELL_ORDER.iter().enumerate() {
            pi[d as usize][e as usize] = cells[i];
        }
        SelectionModel { pi }
    }

    /// `P(S=1 | D=d, E=e)`.
    pub fn prob(&self, d: u8, e: u8) -> f64 {
        self.pi[d as usize][e as usize]
    }

    /// Cells in the order (d=1,e=1), (d=1,e=0), (d=0,e=1), (d=0,e=0).
    pub fn cells(&self) -> [f64; 4] {
        CELL_ORDER.map(|(d, e)| self.prob(d, e))
    }

    /// Multiplicative interaction of exposure and outcome on selection, on
    /// the risk ratio scale:
    /// `pi(1,1) * pi(0,0) / (pi(1,0) * pi(0,1))`.
    ///
    /// This is the exact multiplier linking the selected-population odds
    /// ratio to the true one.
    pub fn inter_rr(&self) -> Result<f64, Error> {
        for (d, e) in [(1, 0), (0, 1)] {
            if self.prob(d, e) <= 0.0 {
                return Err(Error::ZeroSelectionCell { d, e });
            }
        }
        Ok((self.prob(1, 1) * self.prob(0, 0)) / (self.prob(1, 0) * self.prob(0, 1)))
    }

    /// Interaction on the odds ratio scale: `OR_ES|D=1 / OR_ES|D=0`, equal to
    /// `exp(beta3)` of the saturated logistic fit. Symmetric in the roles of
    /// `d` and `e`.
    pub fn inter_or(&self) -> Result<f64, Error> {
        self.require_interior()?;
        Ok((odds(self.prob(1, 1)) * odds(self.prob(0, 0)))
            / (odds(self.prob(1, 0)) * odds(self.prob(0, 1))))
    }

    /// Interaction on the risk difference scale:
    /// `RD_ES|D=1 - RD_ES|D=0`, equal to `gamma3` of the saturated linear
    /// fit. Symmetric in the roles of `d` and `e`.
    pub fn inter_rd(&self) -> f64 {
        // Grouped so that swapping the roles of d and e is bitwise exact,
        // and identical to fit_linear().gamma3.
        (self.prob(1, 1) + self.prob(0, 0)) - (self.prob(1, 0) + self.prob(0, 1))
    }

    /// All three interaction measures at once. `inter_or` is `None` when a
    /// boundary cell makes it undefined.
    pub fn interaction_summary(&self) -> Result<InteractionSummary, Error> {
        Ok(InteractionSummary {
            inter_rr: self.inter_rr()?,
            inter_or: self.inter_or().ok(),
            inter_rd: self.inter_rd(),
        })
    }

    /// Fits the saturated logistic model
    /// `logit pi(d,e) = beta0 + beta1*d + beta2*e + beta3*d*e`.
    ///
    /// Requires all cells strictly inside (0, 1).
    pub fn fit_logistic(&self) -> Result<LogisticParams, Error> {
        self.require_interior()?;
        let l11 = logit(self.prob(1, 1));
        let l10 = logit(self.prob(1, 0));
        let l01 = logit(self.prob(0, 1));
        let l00 = logit(self.prob(0, 0));
        Ok(LogisticParams {
            beta0: l00,
            beta1: l10 - l00,
            beta2: l01 - l00,
            beta3: (l11 + l00) - (l10 + l01),
        })
    }

    /// Fits the saturated linear-probability model
    /// `pi(d,e) = gamma0 + gamma1*d + gamma2*e + gamma3*d*e`.
    pub fn fit_linear(&self) -> LinearParams {
        LinearParams {
            gamma0: self.prob(0, 0),
            gamma1: self.prob(1, 0) - self.prob(0, 0),
            gamma2: self.prob(0, 1) - self.prob(0, 0),
            gamma3: self.inter_rd(),
        }
    }

    /// Relabels one variable `1 <-> 0`.
    pub fn recode(&self, which: Variable) -> Self {
        let f = |d: u8, e: u8| match which {
            Variable::Exposure => self.prob(d, 1 - e),
            Variable::Outcome => self.prob(1 - d, e),
        };
        Self::from_cells_unchecked(CELL_ORDER.map(|(d, e)| f(d, e)))
    }

    /// Swaps the roles of `d` and `e` in the table.
    pub fn swap_roles(&self) -> Self {
        Self::from_cells_unchecked(CELL_ORDER.map(|(d, e)| self.prob(e, d)))
    }

    /// True when `pi` does not vary in the given argument beyond `tol`, i.e.
    /// the corresponding conditional independence (`S ⊥ E | D` for
    /// [`Variable::Exposure`], `S ⊥ D | E` for [`Variable::Outcome`]) holds.
    /// Either one collapses the selected odds ratio onto the true one.
    pub fn constant_in(&self, which: Variable, tol: f64) -> bool {
        match which {
            Variable::Exposure => (0..2).all(|d| (self.prob(d, 1) - self.prob(d, 0)).abs() <= tol),
            Variable::Outcome => (0..2).all(|e| (self.prob(1, e) - self.prob(0, e)).abs() <= tol),
        }
    }

    fn require_interior(&self) -> Result<(), Error> {
        for (d, e) in CELL_ORDER {
            let v = self.prob(d, e);
            if v <= 0.0 || v >= 1.0 {
                return Err(Error::BoundaryProbability { d, e, value: v });
            }
        }
        Ok(())
    }
}

impl TryFrom<[f64; 4]> for SelectionModel {
    type Error = Error;
    fn try_from(cells: [f64; 4]) -> Result<Self, Error> {
        SelectionModel::new(cells)
    }
}

impl From<SelectionModel> for [f64; 4] {
    fn from(s: SelectionModel) -> [f64; 4] {
        s.cells()
    }
}

/// Coefficients of the saturated logistic model for selection,
/// `logit pi(d,e) = beta0 + beta1*d + beta2*e + beta3*d*e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl LogisticParams {
    pub fn new(beta0: f64, beta1: f64, beta2: f64, beta3: f64) -> Result<Self, Error> {
        for (name, v) in [
            ("beta0", beta0),
            ("beta1", beta1),
            ("beta2", beta2),
            ("beta3", beta3),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFiniteParameter { name, value: v });
            }
        }
        Ok(LogisticParams {
            beta0,
            beta1,
            beta2,
            beta3,
        })
    }

    /// `pi(d, e)` under these coefficients.
    pub fn predict(&self, d: u8, e: u8) -> f64 {
        let (d, e) = (f64::from(d), f64::from(e));
        expit(self.beta0 + self.beta1 * d + self.beta2 * e + self.beta3 * d * e)
    }

    /// The selection model these coefficients parametrize.
    pub fn selection_model(&self) -> SelectionModel {
        SelectionModel::from_cells_unchecked(CELL_ORDER.map(|(d, e)| self.predict(d, e)))
    }
}

/// Coefficients of the saturated linear-probability model for selection,
/// `pi(d,e) = gamma0 + gamma1*d + gamma2*e + gamma3*d*e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl LinearParams {
    /// Validates that every implied cell value lies in [0, 1].
    pub fn new(gamma0: f64, gamma1: f64, gamma2: f64, gamma3: f64) -> Result<Self, Error> {
        let params = LinearParams {
            gamma0,
            gamma1,
            gamma2,
            gamma3,
        };
        for (d, e) in CELL_ORDER {
            let v = params.predict(d, e);
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::ProbabilityOutOfRange {
                    name: format!("linear-model cell (d={d}, e={e})"),
                    value: v,
                });
            }
        }
        Ok(params)
    }

    /// `pi(d, e)` under these coefficients.
    pub fn predict(&self, d: u8, e: u8) -> f64 {
        let (d, e) = (f64::from(d), f64::from(e));
        self.gamma0 + self.gamma1 * d + self.gamma2 * e + self.gamma3 * d * e
    }

    /// The selection model these coefficients parametrize.
    pub fn selection_model(&self) -> Result<SelectionModel, Error> {
        SelectionModel::new(CELL_ORDER.map(|(d, e)| self.predict(d, e)))
    }
}

/// The three interaction measures of a selection model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionSummary {
    pub inter_rr: f64,
    /// `None` when a boundary cell makes the odds-scale measure undefined.
    pub inter_or: Option<f64>,
    pub inter_rd: f64,
}

/// The conditional law of `(E, D)` given selection: Bayes step
/// `q(e,d) ∝ p(e,d) * pi(d,e)`.
pub fn selected_joint(target: &TargetJoint, sel: &SelectionModel) -> Result<TargetJoint, Error> {
    let weighted = CELL_ORDER.map(|(d, e)| target.prob(d, e) * sel.prob(d, e));
    let normalizer: f64 = weighted.iter().sum();
    if normalizer <= 0.0 {
        return Err(Error::EmptySelectedPopulation);
    }
    Ok(TargetJoint::from_cells_unchecked(
        weighted.map(|w| w / normalizer),
    ))
}

/// The odds ratio of exposure and outcome among the selected.
pub fn selected_or(target: &TargetJoint, sel: &SelectionModel) -> Result<f64, Error> {
    selected_joint(target, sel)?.odds_ratio()
}

/// The decomposition `OR_selected = OR_true * Inter_RR`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub selected_or: f64,
    pub true_or: f64,
    pub inter_rr: f64,
}

/// Computes the three factors of the decomposition identity. The identity
/// holds to relative accuracy ~1e-15; callers may rely on
/// [`crate::RATIO_REL_TOL`].
pub fn decomposition(target: &TargetJoint, sel: &SelectionModel) -> Result<Decomposition, Error> {
    let d = Decomposition {
        selected_or: selected_or(target, sel)?,
        true_or: target.odds_ratio()?,
        inter_rr: sel.inter_rr()?,
    };
    debug_assert!(
        (d.selected_or - d.true_or * d.inter_rr).abs() <= crate::RATIO_REL_TOL * d.selected_or
    );
    Ok(d)
}
