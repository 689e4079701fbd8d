//! CLI error type with machine-readable codes and exit-code mapping.
//!
//! Exit codes: 0 success, 1 input/validation error, 2 undefined-quantity
//! error (zero cells, boundary probabilities, degenerate samples),
//! 3 verification failure (reported by the verify subcommand, not through
//! this type).

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Malformed input bytes.
    Parse {
        message: String,
    },
    /// Well-formed input violating a block invariant.
    Validation {
        code: &'static str,
        message: String,
    },
    /// Missing block or flag for the invoked subcommand.
    Usage {
        message: String,
    },
    /// Error from the underlying library.
    Core(biasbound::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "E_PARSE",
            CliError::Validation { code, .. } => code,
            CliError::Usage { .. } => "E_USAGE",
            CliError::Core(e) => core_code(e),
            CliError::Io(_) => "E_IO",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_undefined_quantity() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: ", self.code())?;
        match self {
            CliError::Parse { message }
            | CliError::Validation { message, .. }
            | CliError::Usage { message } => f.write_str(message),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<biasbound::Error> for CliError {
    fn from(e: biasbound::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Machine-readable code for each library error.
pub fn core_code(e: &biasbound::Error) -> &'static str {
    use biasbound::Error::*;
    match e {
        ProbabilityOutOfRange { .. } => "E_PROB_RANGE",
        DistributionNotNormalized { .. } => "E_NOT_NORMALIZED",
        AllZeroSelection => "E_ALL_ZERO_SELECTION",
        ZeroCell { .. } => "E_ZERO_CELL",
        EmptySelectedPopulation => "E_EMPTY_SELECTED",
        ZeroSelectionCell { .. } => "E_ZERO_SELECTION_CELL",
        BoundaryProbability { .. } => "E_BOUNDARY",
        NonFiniteParameter { .. } => "E_NON_FINITE",
        EmptyStrata => "E_EMPTY_STRATA",
        InternalConsistency(_) => "E_INTERNAL",
        NonPositive { .. } => "E_NON_POSITIVE",
        InvalidRange { .. } => "E_INVALID_RANGE",
        InvalidInterval { .. } => "E_INVALID_INTERVAL",
        InvalidLevel { .. } => "E_INVALID_LEVEL",
        EmptyTable => "E_EMPTY_TABLE",
        ZeroCount { .. } => "E_ZERO_COUNT",
        InvalidConfig(_) => "E_CONFIG",
        RejectionExhausted { .. } => "E_REJECTION_EXHAUSTED",
        DegenerateSample { .. } => "E_DEGENERATE_SAMPLE",
    }
}
