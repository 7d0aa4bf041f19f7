use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dataset validation failed: {0}")]
    Validation(ValidationReport),

    #[error(
        "no shapelet reached the quality threshold {quality_threshold} \
         ({candidates_evaluated} candidates evaluated, best IG {best_ig})"
    )]
    EmptyResult {
        candidates_evaluated: u64,
        best_ig: f64,
        quality_threshold: f64,
    },

    #[error("series `{series_id}` has length {series_len}, shorter than shapelet {shapelet_index} (length {shapelet_len})")]
    ShapeletTooLong {
        series_id: String,
        series_len: usize,
        shapelet_index: usize,
        shapelet_len: usize,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

/// Itemized list of problems found while validating a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    SingleClass { classes: usize },
    EmptySeries { series_id: String },
    TooShort { series_id: String, len: usize, min_len: usize },
    DuplicateId { series_id: String },
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    /// Ids of the series named by at least one issue, in report order.
    pub fn offending_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for issue in &self.issues {
            let id = match issue {
                ValidationIssue::SingleClass { .. } => continue,
                ValidationIssue::EmptySeries { series_id }
                | ValidationIssue::TooShort { series_id, .. }
                | ValidationIssue::DuplicateId { series_id } => series_id.as_str(),
            };
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        ids
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::SingleClass { classes } => {
                write!(f, "single-class dataset ({classes} distinct label(s), need at least 2)")
            }
            ValidationIssue::EmptySeries { series_id } => write!(f, "series `{series_id}` is empty"),
            ValidationIssue::TooShort { series_id, len, min_len } => {
                write!(f, "series `{series_id}` has length {len}, below the minimum {min_len}")
            }
            ValidationIssue::DuplicateId { series_id } => {
                write!(f, "series id `{series_id}` appears more than once")
            }
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}
