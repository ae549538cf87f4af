//! Domain types shared by every other module: answer vocabulary, question
//! types, instances and the soft accuracy metric.

mod instance;
mod metric;
mod question_types;
mod text;
mod vocab;

pub use instance::{category_of, Category, CategoryFilter, Instance, SplitTag};
pub use metric::{score_from_count, soft_score, ScoreMode, SoftScoreVector};
pub use question_types::{MatchMode, QuestionTypeTable, DEFAULT_QUESTION_TYPES};
pub use text::{is_numeric, normalize, tokenize};
pub use vocab::AnswerVocabulary;
