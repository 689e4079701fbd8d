use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split into two families: malformed inputs (construction-time
/// invariant breaches) and quantities that are mathematically undefined for
/// an otherwise valid input (zero cells, boundary probabilities, empty
/// samples). [`Error::is_undefined_quantity`] distinguishes the two.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability lies outside [0, 1].
    #[error("probability out of range: {name} = {value}")]
    ProbabilityOutOfRange { name: String, value: f64 },

    /// Joint cell probabilities do not sum to one.
    #[error("joint probabilities sum to {sum}; expected 1 within 1e-12")]
    DistributionNotNormalized { sum: f64 },

    /// Every selection probability is zero, so nobody can be selected.
    #[error("all selection probabilities are zero; the selected population is empty")]
    AllZeroSelection,

    /// A joint cell needed by an odds ratio is zero.
    #[error("joint cell (d={d}, e={e}) is zero; odds ratio undefined")]
    ZeroCell { d: u8, e: u8 },

    /// The selected population has probability zero under this target and
    /// selection model.
    #[error("selected population has probability zero")]
    EmptySelectedPopulation,

    /// A selection probability needed in a denominator is zero.
    #[error("selection probability pi(d={d}, e={e}) is zero; ratio undefined")]
    ZeroSelectionCell { d: u8, e: u8 },

    /// A selection probability sits on the boundary of (0, 1), where odds
    /// are undefined.
    #[error("selection probability pi(d={d}, e={e}) = {value} is on the boundary; odds-scale quantity undefined")]
    BoundaryProbability { d: u8, e: u8, value: f64 },

    /// A model parameter is not finite.
    #[error("parameter {name} = {value} is not finite")]
    NonFiniteParameter { name: &'static str, value: f64 },

    /// A stratified operation received no strata.
    #[error("stratified classification requires at least one stratum")]
    EmptyStrata,

    /// A numeric verdict contradicts the exact decomposition identity. This
    /// signals an implementation bug, not bad input.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    /// An input that must be strictly positive is not.
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// An interval specification has lo > hi or a non-positive endpoint.
    #[error("invalid range: lo = {lo}, hi = {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    /// An interval estimate violates lo <= point <= hi.
    #[error("invalid interval estimate: lo = {lo}, point = {point}, hi = {hi}")]
    InvalidInterval { lo: f64, point: f64, hi: f64 },

    /// A confidence level lies outside (0, 1).
    #[error("confidence level {level} must lie strictly between 0 and 1")]
    InvalidLevel { level: f64 },

    /// An observed table has no counts at all.
    #[error("observed table is empty; total count must be positive")]
    EmptyTable,

    /// A count cell needed by the interval is zero and continuity correction
    /// is disabled.
    #[error(
        "count cell (d={d}, e={e}) is zero; enable continuity correction or supply positive counts"
    )]
    ZeroCount { d: u8, e: u8 },

    /// Sampler configuration is invalid.
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),

    /// Rejection sampling failed to satisfy the constraint within the cap.
    #[error("rejection sampling exhausted {attempts} attempts without satisfying the constraint")]
    RejectionExhausted { attempts: u64 },

    /// A simulated study left a selected cell empty, so the empirical odds
    /// ratio is undefined.
    #[error("degenerate sample: selected cell (d={d}, e={e}) is empty; retry with a larger n")]
    DegenerateSample { d: u8, e: u8 },
}

impl Error {
    /// True when the input was valid but the requested quantity is
    /// mathematically undefined for it.
    pub fn is_undefined_quantity(&self) -> bool {
        matches!(
            self,
            Error::ZeroCell { .. }
                | Error::EmptySelectedPopulation
                | Error::ZeroSelectionCell { .. }
                | Error::BoundaryProbability { .. }
                | Error::ZeroCount { .. }
                | Error::DegenerateSample { .. }
        )
    }
}
