use super::protocol::inverted_sampler;
use crate::domain::{CategoryFilter, ScoreMode};
use crate::error::Result;
use crate::ingest::Dataset;
use crate::priors::{expected_accuracy, PriorSampler, PriorTable, DEFAULT_RETAINED_ANSWERS};
use crate::splitter::{measure_shift, ShiftReport};

pub const DEFAULT_AUDIT_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOptions {
    /// YesNo points by which the inverted prior must beat the plain prior.
    pub margin: f64,
    pub min_count: Option<u64>,
    pub target_retained: usize,
    pub score_mode: ScoreMode,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            margin: DEFAULT_AUDIT_MARGIN,
            min_count: None,
            target_retained: DEFAULT_RETAINED_ANSWERS,
            score_mode: ScoreMode::Simple,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub shift: ShiftReport,
    pub min_count: u64,
    /// Expected YesNo accuracy on the test split; `None` without YesNo questions.
    pub random_yes_no: Option<f64>,
    pub inverted_yes_no: Option<f64>,
    pub margin: f64,
    pub exploitable: bool,
}

/// Prior shift between the splits plus a probe of whether inverting the
/// training prior pays off on the test split.
pub fn audit_split(train: &Dataset, test: &Dataset, opts: &AuditOptions) -> Result<AuditReport> {
    let shift = measure_shift(train, test)?;
    let random = PriorSampler::new(&PriorTable::accumulate(train));
    let (inverted, min_count) = inverted_sampler(train, opts.min_count, opts.target_retained)?;
    let has_yes_no = test.instances.iter().any(|i| CategoryFilter::YesNo.matches(i.category));
    let (random_yes_no, inverted_yes_no) = if has_yes_no {
        (
            Some(expected_accuracy(&random, test, CategoryFilter::YesNo, opts.score_mode)?),
            Some(expected_accuracy(&inverted, test, CategoryFilter::YesNo, opts.score_mode)?),
        )
    } else {
        (None, None)
    };
    let exploitable = matches!((random_yes_no, inverted_yes_no), (Some(r), Some(i)) if i - r >= opts.margin);
    Ok(AuditReport {
        shift,
        min_count,
        random_yes_no,
        inverted_yes_no,
        margin: opts.margin,
        exploitable,
    })
}
