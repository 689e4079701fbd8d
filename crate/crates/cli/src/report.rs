//! Report envelope and per-subcommand bodies.
//!
//! Every report is a JSON object with `schema_version` and `command` at the
//! top, followed by the body fields. The schema is documented in
//! `docs/report-schema.md`. Struct field order fixes the key order, and
//! floats serialize in shortest-round-trip form, so a report is a pure
//! function of its inputs, byte for byte.

use biasbound::{
    AdjustedRange, BoundReport, BoundVerdict, Decomposition, IntervalEstimate, ResultId,
    SamplerMode, SelectionModel, StudySample, VerificationReport,
};
use serde::Serialize;

use crate::input::InputDocument;

/// Version embedded in every report.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize)]
struct Report<T: Serialize> {
    schema_version: &'static str,
    command: &'static str,
    #[serde(flatten)]
    body: T,
}

/// Renders a report to the output stream.
pub fn print_report<T: Serialize>(command: &'static str, body: &T) {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command,
        body,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
}

/// OR/RR/RD of a joint law; `null` where a zero cell leaves one undefined.
#[derive(Serialize)]
pub struct AssociationMeasures {
    pub or: Option<f64>,
    pub rr: Option<f64>,
    pub rd: Option<f64>,
}

impl AssociationMeasures {
    pub fn of(t: &biasbound::TargetJoint) -> Self {
        AssociationMeasures {
            or: t.odds_ratio().ok(),
            rr: t.risk_ratio().ok(),
            rd: t.risk_difference().ok(),
        }
    }
}

/// The three interaction measures; `null` where undefined.
#[derive(Serialize)]
pub struct InteractionMeasures {
    pub inter_rr: Option<f64>,
    pub inter_or: Option<f64>,
    pub inter_rd: f64,
}

#[derive(Serialize)]
pub struct MeasuresBody {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<AssociationMeasures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<AssociationMeasures>,
    pub interaction: InteractionMeasures,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Decomposition>,
}

#[derive(Serialize)]
pub struct StratumVerdict {
    pub label: String,
    /// Whether the assumptions were derived numerically from a selection
    /// block (as opposed to stated in an assumptions block).
    pub derived: bool,
    pub verdict: BoundVerdict,
}

#[derive(Serialize)]
pub struct ClassifyBody {
    /// Whether the assumptions were derived numerically from a selection
    /// block; absent for stratified runs, which record it per stratum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<BoundVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strata: Option<Vec<StratumVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundReport>,
}

#[derive(Serialize)]
pub struct AdjustBody {
    pub estimate: IntervalEstimate,
    pub inter_rr_lo: f64,
    pub inter_rr_hi: f64,
    pub adjusted: AdjustedRange,
}

#[derive(Serialize)]
pub struct VerifyBody {
    pub mode: SamplerMode,
    pub requested: u64,
    pub constraint: String,
    #[serde(flatten)]
    pub report: VerificationReport,
}

#[derive(Serialize)]
pub struct WitnessBody {
    pub result_id: ResultId,
    pub mode: SamplerMode,
    pub requested: u64,
    pub seed: u64,
    /// A model violating the rule's hypotheses yet satisfying its
    /// conclusion, if the scan found one.
    pub witness: Option<SelectionModel>,
}

#[derive(Serialize)]
pub struct SimulateBody {
    pub n: u64,
    pub seed: u64,
    /// Counts among the selected (s=1), cell order (d=1,e=1), (d=1,e=0),
    /// (d=0,e=1), (d=0,e=0).
    pub selected_counts: [u64; 4],
    /// Counts among the unselected (s=0), same order.
    pub unselected_counts: [u64; 4],
    pub selected_total: u64,
    pub empirical_selected_or: f64,
    /// Population value the empirical odds ratio estimates, when defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_selected_or: Option<f64>,
}

impl SimulateBody {
    pub fn from_sample(sample: &StudySample, expected: Option<f64>) -> Self {
        let by_s = |s: u8| [(1u8, 1u8), (1, 0), (0, 1), (0, 0)].map(|(d, e)| sample.count(e, d, s));
        SimulateBody {
            n: sample.n,
            seed: sample.seed,
            selected_counts: by_s(1),
            unselected_counts: by_s(0),
            selected_total: sample.selected,
            empirical_selected_or: sample.empirical_selected_or,
            expected_selected_or: expected,
        }
    }
}

#[derive(Serialize)]
pub struct RecodeBody {
    pub which: biasbound::Variable,
    pub document: InputDocument,
}
