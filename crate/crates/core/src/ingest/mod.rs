//! Loading data: VQA v2 / VQA-CP files, synthetic generation, and the
//! on-disk dataset and feature formats.

mod dataset;
mod features;
mod records;
mod synthetic;
mod vqa;

pub use dataset::Dataset;
pub use features::{attach_features, load_features, FeatureRows, read_features, save_features, write_features, FEATURE_MAGIC};
pub use records::{load_dataset, read_dataset, save_dataset, write_dataset, DATASET_FORMAT};
pub use synthetic::{
    generate_synthetic, generate_with_priors, reciprocal_normalized, BiasProfile, SyntheticConfig, SyntheticPriors,
};
pub use vqa::{
    join_to_dataset, join_with_vocabulary, parse_annotations, parse_questions, read_annotations, read_questions,
    AnnotationRecord, JoinOptions, QuestionRecord, ANSWERS_PER_QUESTION,
};
