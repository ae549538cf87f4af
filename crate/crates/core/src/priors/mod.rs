//! Per-question-type answer priors: counting, thresholded inversion,
//! sampling and the closed-form accuracy of a prior sampler.

mod inverted;
mod sampler;
mod table;

pub use inverted::{calibrate_min_count, retained_count, InvertedPriorTable};
pub use sampler::{expected_accuracy, expected_score, sample_prediction, AnswerPrior, ExpectedScore, PriorSampler};
pub use table::PriorTable;

/// Retained-answer count the inversion threshold is calibrated to by default.
pub const DEFAULT_RETAINED_ANSWERS: usize = 1105;
