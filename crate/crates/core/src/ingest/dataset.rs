use std::collections::HashSet;

use crate::domain::{AnswerVocabulary, Category, Instance, QuestionTypeTable, SplitTag};
use crate::error::{Error, Result};

/// A named split of instances sharing one vocabulary and question-type table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub tag: SplitTag,
    pub vocabulary: AnswerVocabulary,
    pub type_table: QuestionTypeTable,
    pub instances: Vec<Instance>,
}

impl Dataset {
    /// Validates type ids and question-id uniqueness.
    pub fn new(
        name: impl Into<String>,
        tag: SplitTag,
        vocabulary: AnswerVocabulary,
        type_table: QuestionTypeTable,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(instances.len());
        for inst in &instances {
            if inst.type_id >= type_table.len() {
                return Err(Error::integrity(format!(
                    "question {} has type id {} but the table has {} types",
                    inst.question_id,
                    inst.type_id,
                    type_table.len()
                )));
            }
            if !seen.insert(inst.question_id) {
                return Err(Error::integrity(format!("duplicate question_id {}", inst.question_id)));
            }
        }
        Ok(Dataset {
            name: name.into(),
            tag,
            vocabulary,
            type_table,
            instances,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn n_types(&self) -> usize {
        self.type_table.len()
    }

    pub fn n_answers(&self) -> usize {
        self.vocabulary.len()
    }

    /// Vocabulary id of an instance's top answer, `None` when out of vocabulary.
    pub fn answer_id(&self, inst: &Instance) -> Option<usize> {
        self.vocabulary.id(&inst.top_answer)
    }

    /// Copy keeping only instances for which `keep` holds.
    pub fn filtered(&self, name: impl Into<String>, tag: SplitTag, keep: impl Fn(&Instance) -> bool) -> Dataset {
        Dataset {
            name: name.into(),
            tag,
            vocabulary: self.vocabulary.clone(),
            type_table: self.type_table.clone(),
            instances: self.instances.iter().filter(|i| keep(i)).cloned().collect(),
        }
    }

    pub fn only_category(&self, category: Category) -> Dataset {
        self.filtered(self.name.clone(), self.tag, |i| i.category == category)
    }

    /// True when both datasets index answers and types identically.
    pub fn compatible_with(&self, other: &Dataset) -> bool {
        self.vocabulary == other.vocabulary && self.type_table == other.type_table
    }

    pub fn ensure_compatible(&self, other: &Dataset) -> Result<()> {
        if self.compatible_with(other) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "datasets {:?} and {:?} do not share a vocabulary and question-type table",
                self.name, other.name
            )))
        }
    }

    /// Concatenation of compatible datasets (ids must stay unique).
    pub fn pooled(name: impl Into<String>, parts: &[&Dataset]) -> Result<Dataset> {
        let first = parts.first().ok_or_else(|| Error::invalid("pooling zero datasets"))?;
        for p in &parts[1..] {
            first.ensure_compatible(p)?;
        }
        let instances = parts.iter().flat_map(|p| p.instances.iter().cloned()).collect();
        Dataset::new(
            name,
            SplitTag::Train,
            first.vocabulary.clone(),
            first.type_table.clone(),
            instances,
        )
    }

    /// Instance counts per category in `Category::ALL` order.
    pub fn category_counts(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for i in &self.instances {
            out[i.category as usize] += 1;
        }
        out
    }
}
