use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::text::is_numeric;
use crate::error::{Error, Result};

/// Answer category used for the per-column breakdown of accuracy tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    YesNo,
    Number,
    Other,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::YesNo, Category::Number, Category::Other];

    /// Maps an annotation `answer_type` field (`yes/no`, `number`, `other`).
    pub fn from_answer_type(answer_type: &str) -> Option<Category> {
        match answer_type.trim().to_ascii_lowercase().as_str() {
            "yes/no" | "yesno" | "yes_no" => Some(Category::YesNo),
            "number" | "nb" => Some(Category::Number),
            "other" => Some(Category::Other),
            _ => None,
        }
    }

    pub fn answer_type(self) -> &'static str {
        match self {
            Category::YesNo => "yes/no",
            Category::Number => "number",
            Category::Other => "other",
        }
    }
}

/// Which instances an accuracy is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CategoryFilter {
    All,
    YesNo,
    Number,
    Other,
}

impl CategoryFilter {
    /// Column order of accuracy tables.
    pub const COLUMNS: [CategoryFilter; 4] = [
        CategoryFilter::All,
        CategoryFilter::YesNo,
        CategoryFilter::Number,
        CategoryFilter::Other,
    ];

    pub fn matches(self, c: Category) -> bool {
        match self {
            CategoryFilter::All => true,
            CategoryFilter::YesNo => c == Category::YesNo,
            CategoryFilter::Number => c == Category::Number,
            CategoryFilter::Other => c == Category::Other,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CategoryFilter::All => "All",
            CategoryFilter::YesNo => "YesNo",
            CategoryFilter::Number => "Nb",
            CategoryFilter::Other => "Other",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::COLUMNS.into_iter().find(|c| c.label().eq_ignore_ascii_case(s))
    }
}

impl From<Category> for CategoryFilter {
    fn from(c: Category) -> Self {
        match c {
            Category::YesNo => CategoryFilter::YesNo,
            Category::Number => CategoryFilter::Number,
            Category::Other => CategoryFilter::Other,
        }
    }
}

/// Category of an instance: the source annotation wins, otherwise the rule
/// `yes`/`no` → YesNo, numeric → Number, anything else → Other.
pub fn category_of(annotated: Option<Category>, top_answer: &str) -> Category {
    if let Some(c) = annotated {
        return c;
    }
    match top_answer {
        "yes" | "no" => Category::YesNo,
        a if is_numeric(a) => Category::Number,
        _ => Category::Other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
        })
    }
}

impl FromStr for SplitTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitTag::Train),
            "val" => Ok(SplitTag::Val),
            "test" => Ok(SplitTag::Test),
            other => Err(Error::invalid(format!("unknown split tag {other:?}"))),
        }
    }
}

/// One question/answer example.
///
/// `tokens`, `human_answers` and `top_answer` are stored normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub question_id: u64,
    pub image_id: u64,
    pub tokens: Vec<String>,
    pub type_id: usize,
    pub category: Category,
    pub human_answers: Vec<String>,
    pub top_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<f64>>,
}

impl Instance {
    /// Most common human answer; ties go to the answer that appears first.
    pub fn mode_of(answers: &[String]) -> Option<&str> {
        let mut best: Option<(&str, usize)> = None;
        for a in answers {
            let c = answers.iter().filter(|b| *b == a).count();
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((a, c));
            }
        }
        best.map(|(a, _)| a)
    }

    pub fn answer_count(&self, answer: &str) -> usize {
        self.human_answers.iter().filter(|a| *a == answer).count()
    }

    pub fn question_text(&self) -> String {
        self.tokens.join(" ")
    }
}
