//! The self-describing input document and its two wire formats.
//!
//! A document carries up to five blocks: `target` and `selection` (four
//! probabilities each), `counts` (four non-negative integers), `assumptions`
//! (qualitative signs as strings), and `strata` (a list of labeled blocks of
//! the same shape). Every four-value tuple is ordered
//! `(d=1,e=1), (d=1,e=0), (d=0,e=1), (d=0,e=0)`.
//!
//! The JSON format is the primary one and round-trips exactly. The CSV
//! format covers the numeric blocks only: a header row
//! `block,d1e1,d1e0,d0e1,d0e0` followed by one row per block.

use biasbound::{ObservedTable, QualitativeAssumptions, SelectionModel, TargetJoint, Variable};
use serde::{Deserialize, Serialize};

use crate::error::{core_code, CliError};

/// Input wire format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Self-describing JSON document (structured text).
    #[value(alias = "structured-text")]
    Json,
    /// Delimited table with a header row.
    #[value(alias = "delimited-table")]
    Csv,
}

/// One labeled stratum, same block shape as the top-level document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stratum {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<[u64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<QualitativeAssumptions>,
}

/// A parsed, not-yet-validated input document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<[u64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<QualitativeAssumptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strata: Option<Vec<Stratum>>,
}

const CSV_HEADER: [&str; 5] = ["block", "d1e1", "d1e0", "d0e1", "d0e0"];

impl InputDocument {
    /// Parses a document from raw bytes and validates every present block.
    pub fn parse(bytes: &[u8], format: Format) -> Result<Self, CliError> {
        let doc = match format {
            Format::Json => Self::parse_json(bytes)?,
            Format::Csv => Self::parse_csv(bytes)?,
        };
        doc.validate()?;
        Ok(doc)
    }

    fn parse_json(bytes: &[u8]) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_slice(bytes);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let inner = e.inner();
            CliError::Parse {
                message: format!(
                    "{inner} (field path '{}', line {}, column {})",
                    e.path(),
                    inner.line(),
                    inner.column()
                ),
            }
        })
    }

    fn parse_csv(bytes: &[u8]) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(bytes);
        let headers = reader
            .headers()
            .map_err(|e| CliError::Parse {
                message: e.to_string(),
            })?
            .clone();
        if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(CliError::Parse {
                message: format!(
                    "expected header '{}', got '{}'",
                    CSV_HEADER.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut doc = InputDocument::default();
        for record in reader.records() {
            let record = record.map_err(|e| CliError::Parse {
                message: e.to_string(),
            })?;
            let line = record
                .position()
                .map(|p| p.line().to_string())
                .unwrap_or_else(|| "?".to_string());
            if record.len() != 5 {
                return Err(CliError::Parse {
                    message: format!("line {line}: expected 5 fields, got {}", record.len()),
                });
            }
            let block = &record[0];
            let parse_cells = |kind: &str| -> Result<[f64; 4], CliError> {
                let mut cells = [0.0; 4];
                for (i, cell) in cells.iter_mut().enumerate() {
                    *cell = record[i + 1].parse().map_err(|_| CliError::Parse {
                        message: format!(
                            "line {line}: {kind} cell '{}' is not a number",
                            &record[i + 1]
                        ),
                    })?;
                }
                Ok(cells)
            };
            match block {
                "target" | "selection" => {
                    let cells = parse_cells(block)?;
                    let slot = if block == "target" {
                        &mut doc.target
                    } else {
                        &mut doc.selection
                    };
                    if slot.replace(cells).is_some() {
                        return Err(CliError::Parse {
                            message: format!("line {line}: duplicate '{block}' row"),
                        });
                    }
                }
                "counts" => {
                    let mut cells = [0u64; 4];
                    for (i, cell) in cells.iter_mut().enumerate() {
                        *cell = record[i + 1].parse().map_err(|_| CliError::Parse {
                            message: format!(
                                "line {line}: counts cell '{}' is not a non-negative integer",
                                &record[i + 1]
                            ),
                        })?;
                    }
                    if doc.counts.replace(cells).is_some() {
                        return Err(CliError::Parse {
                            message: format!("line {line}: duplicate 'counts' row"),
                        });
                    }
                }
                other => {
                    return Err(CliError::Parse {
                        message: format!(
                            "line {line}: unknown block '{other}' (expected target, selection or counts)"
                        ),
                    });
                }
            }
        }
        Ok(doc)
    }

    /// Checks the invariants of every present block.
    pub fn validate(&self) -> Result<(), CliError> {
        self.target()?;
        self.selection()?;
        self.counts()?;
        if let Some(strata) = &self.strata {
            for s in strata {
                let in_stratum = |e: biasbound::Error| CliError::Validation {
                    code: core_code(&e),
                    message: format!("in stratum '{}': {e}", s.label),
                };
                if let Some(cells) = s.target {
                    TargetJoint::new(cells).map_err(in_stratum)?;
                }
                if let Some(cells) = s.selection {
                    SelectionModel::new(cells).map_err(in_stratum)?;
                }
                if let Some(cells) = s.counts {
                    ObservedTable::new(cells).map_err(in_stratum)?;
                }
            }
        }
        Ok(())
    }

    pub fn target(&self) -> Result<Option<TargetJoint>, CliError> {
        self.target
            .map(|cells| {
                TargetJoint::new(cells).map_err(|e| CliError::Validation {
                    code: core_code(&e),
                    message: format!("in target block: {e}"),
                })
            })
            .transpose()
    }

    pub fn selection(&self) -> Result<Option<SelectionModel>, CliError> {
        self.selection
            .map(|cells| {
                SelectionModel::new(cells).map_err(|e| CliError::Validation {
                    code: core_code(&e),
                    message: format!("in selection block: {e}"),
                })
            })
            .transpose()
    }

    pub fn counts(&self) -> Result<Option<ObservedTable>, CliError> {
        self.counts
            .map(|cells| {
                ObservedTable::new(cells).map_err(|e| CliError::Validation {
                    code: core_code(&e),
                    message: format!("in counts block: {e}"),
                })
            })
            .transpose()
    }

    pub fn require_selection(&self) -> Result<SelectionModel, CliError> {
        self.selection()?.ok_or_else(|| CliError::Usage {
            message: "this subcommand needs a 'selection' block in the input document".to_string(),
        })
    }

    pub fn require_target(&self) -> Result<TargetJoint, CliError> {
        self.target()?.ok_or_else(|| CliError::Usage {
            message: "this subcommand needs a 'target' block in the input document".to_string(),
        })
    }

    pub fn require_counts(&self) -> Result<ObservedTable, CliError> {
        self.counts()?.ok_or_else(|| CliError::Usage {
            message: "this subcommand needs a 'counts' block in the input document (or --point)"
                .to_string(),
        })
    }

    /// Relabels one variable `1 <-> 0` in every block, including assumption
    /// signs and strata.
    pub fn recode(&self, which: Variable) -> Result<Self, CliError> {
        self.validate()?;
        let recode_target =
            |cells: [f64; 4]| TargetJoint::new(cells).unwrap().recode(which).cells();
        let recode_selection =
            |cells: [f64; 4]| SelectionModel::new(cells).unwrap().recode(which).cells();
        let recode_counts =
            |cells: [u64; 4]| ObservedTable::new(cells).unwrap().recode(which).cells();
        Ok(InputDocument {
            target: self.target.map(recode_target),
            selection: self.selection.map(recode_selection),
            counts: self.counts.map(recode_counts),
            assumptions: self.assumptions.map(|a| a.recode(which)),
            strata: self.strata.as_ref().map(|strata| {
                strata
                    .iter()
                    .map(|s| Stratum {
                        label: s.label.clone(),
                        target: s.target.map(recode_target),
                        selection: s.selection.map(recode_selection),
                        counts: s.counts.map(recode_counts),
                        assumptions: s.assumptions.map(|a| a.recode(which)),
                    })
                    .collect()
            }),
        })
    }
}
