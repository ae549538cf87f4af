//! Streaming readers for VQA v2 and VQA-CP question / annotation files.
//!
//! VQA v2 wraps its records in an object (`{"questions": [...]}` or
//! `{"annotations": [...]}`), VQA-CP ships the same records as a bare
//! top-level list. Both are accepted; records are decoded one at a time.

use std::cell::{Cell, RefCell};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read};
use std::marker::PhantomData;
use std::path::Path;
use std::rc::Rc;

use serde::de::{self, DeserializeOwned, DeserializeSeed, IgnoredAny, MapAccess, SeqAccess, Visitor};
use serde::Deserialize;

use super::dataset::Dataset;
use crate::domain::{
    category_of, normalize, AnswerVocabulary, Category, Instance, MatchMode, QuestionTypeTable, SplitTag,
};
use crate::domain::tokenize;
use crate::error::{Error, Result};

/// Human answers per annotation record.
pub const ANSWERS_PER_QUESTION: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct QuestionRecord {
    pub question_id: u64,
    pub image_id: u64,
    pub question: String,
}

/// One annotation with normalized answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub question_id: u64,
    pub category: Category,
    pub top_answer: String,
    pub human_answers: Vec<String>,
    pub question_type: Option<String>,
}

#[derive(Deserialize)]
struct RawAnswer {
    answer: String,
}

#[derive(Deserialize)]
struct RawAnnotation {
    question_id: u64,
    answer_type: String,
    multiple_choice_answer: String,
    answers: Vec<RawAnswer>,
    #[serde(default)]
    question_type: Option<String>,
}

struct CountingReader<R> {
    inner: R,
    consumed: Rc<Cell<u64>>,
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.consumed.set(self.consumed.get() + n as u64);
        Ok(n)
    }
}

/// Feeds each element of the record list to a callback.
struct RecordStream<'a, T, F> {
    key: &'static str,
    sink: &'a RefCell<F>,
    failure: &'a RefCell<Option<Error>>,
    count: &'a Cell<usize>,
    _record: PhantomData<T>,
}

impl<T, F> Clone for RecordStream<'_, T, F> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T, F> Copy for RecordStream<'_, T, F> {}

impl<'de, T, F> Visitor<'de> for RecordStream<'_, T, F>
where
    T: DeserializeOwned,
    F: FnMut(T) -> Result<()>,
{
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a list of records or an object with a {:?} list", self.key)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<(), A::Error> {
        while let Some(record) = seq.next_element::<T>()? {
            self.count.set(self.count.get() + 1);
            if let Err(e) = (self.sink.borrow_mut())(record) {
                *self.failure.borrow_mut() = Some(e);
                return Err(de::Error::custom("record rejected"));
            }
        }
        Ok(())
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<(), A::Error> {
        let mut found = false;
        while let Some(k) = map.next_key::<String>()? {
            if k == self.key && !found {
                map.next_value_seed(ListSeed(self))?;
                found = true;
            } else {
                map.next_value::<IgnoredAny>()?;
            }
        }
        if !found {
            return Err(de::Error::missing_field(self.key));
        }
        Ok(())
    }
}

impl<'de, T, F> DeserializeSeed<'de> for RecordStream<'_, T, F>
where
    T: DeserializeOwned,
    F: FnMut(T) -> Result<()>,
{
    type Value = ();

    fn deserialize<D: de::Deserializer<'de>>(self, d: D) -> std::result::Result<(), D::Error> {
        d.deserialize_any(self)
    }
}

struct ListSeed<'a, T, F>(RecordStream<'a, T, F>);

impl<'de, T, F> DeserializeSeed<'de> for ListSeed<'_, T, F>
where
    T: DeserializeOwned,
    F: FnMut(T) -> Result<()>,
{
    type Value = ();

    fn deserialize<D: de::Deserializer<'de>>(self, d: D) -> std::result::Result<(), D::Error> {
        d.deserialize_seq(self.0)
    }
}

/// Decodes every record of `reader` in order, returning how many were seen.
fn stream_records<T, R, F>(reader: R, path: &Path, key: &'static str, sink: F) -> Result<usize>
where
    T: DeserializeOwned,
    R: Read,
    F: FnMut(T) -> Result<()>,
{
    let consumed = Rc::new(Cell::new(0));
    let counting = CountingReader {
        inner: BufReader::with_capacity(1 << 16, reader),
        consumed: Rc::clone(&consumed),
    };
    let sink = RefCell::new(sink);
    let failure = RefCell::new(None);
    let count = Cell::new(0);
    let stream = RecordStream::<T, F> {
        key,
        sink: &sink,
        failure: &failure,
        count: &count,
        _record: PhantomData,
    };
    let mut de = serde_json::Deserializer::from_reader(counting);
    let outcome = stream.deserialize(&mut de).and_then(|()| de.end());
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    outcome.map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        offset: consumed.get(),
        message: e.to_string(),
    })?;
    Ok(count.get())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads a questions file.
pub fn parse_questions(path: &Path) -> Result<Vec<QuestionRecord>> {
    read_questions(open(path)?, path)
}

pub fn read_questions<R: Read>(reader: R, path: &Path) -> Result<Vec<QuestionRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    stream_records(reader, path, "questions", |q: QuestionRecord| {
        if !seen.insert(q.question_id) {
            return Err(Error::integrity(format!(
                "{}: duplicate question_id {}",
                path.display(),
                q.question_id
            )));
        }
        out.push(q);
        Ok(())
    })?;
    Ok(out)
}

/// Reads an annotations file. Every record must carry exactly ten answers.
pub fn parse_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    read_annotations(open(path)?, path)
}

pub fn read_annotations<R: Read>(reader: R, path: &Path) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    stream_records(reader, path, "annotations", |raw: RawAnnotation| {
        if raw.answers.len() != ANSWERS_PER_QUESTION {
            return Err(Error::integrity(format!(
                "{}: question_id {} has {} answers, expected {}",
                path.display(),
                raw.question_id,
                raw.answers.len(),
                ANSWERS_PER_QUESTION
            )));
        }
        let category = Category::from_answer_type(&raw.answer_type).ok_or_else(|| {
            Error::integrity(format!(
                "{}: question_id {} has unknown answer_type {:?}",
                path.display(),
                raw.question_id,
                raw.answer_type
            ))
        })?;
        if !seen.insert(raw.question_id) {
            return Err(Error::integrity(format!(
                "{}: duplicate annotation for question_id {}",
                path.display(),
                raw.question_id
            )));
        }
        out.push(AnnotationRecord {
            question_id: raw.question_id,
            category,
            top_answer: normalize(&raw.multiple_choice_answer),
            human_answers: raw.answers.iter().map(|a| normalize(&a.answer)).collect(),
            question_type: raw.question_type,
        });
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct JoinOptions {
    pub name: String,
    pub tag: SplitTag,
    pub match_mode: MatchMode,
    /// Size `K` of the answer vocabulary built from this data.
    pub vocab_size: usize,
}

impl Default for JoinOptions {
    fn default() -> Self {
        JoinOptions {
            name: "dataset".into(),
            tag: SplitTag::Train,
            match_mode: MatchMode::TokenBoundary,
            vocab_size: 3000,
        }
    }
}

/// Joins annotations with their questions; the vocabulary is the
/// `vocab_size` most frequent top answers of this data.
pub fn join_to_dataset(
    questions: &[QuestionRecord],
    annotations: &[AnnotationRecord],
    type_table: &QuestionTypeTable,
    opts: &JoinOptions,
) -> Result<Dataset> {
    let vocab = AnswerVocabulary::most_frequent(annotations.iter().map(|a| a.top_answer.as_str()), opts.vocab_size)?;
    join_with_vocabulary(questions, annotations, type_table, vocab, opts)
}

/// Joins annotations with their questions under a given vocabulary (used for
/// test splits, which must index answers like their training split).
pub fn join_with_vocabulary(
    questions: &[QuestionRecord],
    annotations: &[AnnotationRecord],
    type_table: &QuestionTypeTable,
    vocabulary: AnswerVocabulary,
    opts: &JoinOptions,
) -> Result<Dataset> {
    let by_id: HashMap<u64, &QuestionRecord> = questions.iter().map(|q| (q.question_id, q)).collect();
    let mut instances = Vec::with_capacity(annotations.len());
    for a in annotations {
        let q = by_id.get(&a.question_id).ok_or_else(|| {
            Error::integrity(format!("annotation for question_id {} has no matching question", a.question_id))
        })?;
        let tokens = tokenize(&q.question);
        let type_id = a
            .question_type
            .as_deref()
            .and_then(|qt| type_table.index_of(qt))
            .unwrap_or_else(|| match opts.match_mode {
                MatchMode::TokenBoundary => type_table.match_tokens(&tokens),
                mode => type_table.match_prefix(&q.question, mode),
            });
        instances.push(Instance {
            question_id: a.question_id,
            image_id: q.image_id,
            tokens,
            type_id,
            category: category_of(Some(a.category), &a.top_answer),
            human_answers: a.human_answers.clone(),
            top_answer: a.top_answer.clone(),
            features: None,
        });
    }
    Dataset::new(opts.name.clone(), opts.tag, vocabulary, type_table.clone(), instances)
}
