use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::Dataset;

const TABLE_MAGIC: &str = "# priorshift prior-table v1";

/// Histogram of top answers per question type, shape `n_types × n_answers`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorTable {
    n_types: usize,
    n_answers: usize,
    counts: Vec<u64>,
}

impl PriorTable {
    pub fn zeros(n_types: usize, n_answers: usize) -> Self {
        PriorTable {
            n_types,
            n_answers,
            counts: vec![0; n_types * n_answers],
        }
    }

    /// Counts each instance's top answer once under its type. Top answers
    /// outside the vocabulary are skipped.
    pub fn accumulate(data: &Dataset) -> Self {
        let (n_types, k) = (data.n_types(), data.n_answers());
        let counts = data
            .instances
            .par_chunks(4096)
            .fold(
                || vec![0u64; n_types * k],
                |mut acc, chunk| {
                    for inst in chunk {
                        if let Some(a) = data.answer_id(inst) {
                            acc[inst.type_id * k + a] += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; n_types * k],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        PriorTable {
            n_types,
            n_answers: k,
            counts,
        }
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn n_answers(&self) -> usize {
        self.n_answers
    }

    pub fn count(&self, type_id: usize, answer_id: usize) -> u64 {
        self.counts[type_id * self.n_answers + answer_id]
    }

    pub fn add(&mut self, type_id: usize, answer_id: usize, n: u64) {
        self.counts[type_id * self.n_answers + answer_id] += n;
    }

    pub fn row(&self, type_id: usize) -> &[u64] {
        &self.counts[type_id * self.n_answers..(type_id + 1) * self.n_answers]
    }

    pub fn row_total(&self, type_id: usize) -> u64 {
        self.row(type_id).iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Column sums: answer counts ignoring type.
    pub fn marginal_counts(&self) -> Vec<u64> {
        let mut m = vec![0; self.n_answers];
        for t in 0..self.n_types {
            m.iter_mut().zip(self.row(t)).for_each(|(a, &c)| *a += c);
        }
        m
    }

    /// `p(answer | type)`; `None` for an unseen type.
    pub fn probabilities(&self, type_id: usize) -> Option<Vec<f64>> {
        normalize_counts(self.row(type_id))
    }

    /// Adds another table of the same shape.
    pub fn merge(&mut self, other: &PriorTable) -> Result<()> {
        if (self.n_types, self.n_answers) != (other.n_types, other.n_answers) {
            return Err(Error::invalid("merging prior tables of different shapes"));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// Sparse text form: a header, the shape, then one
    /// `type_id<TAB>answer_id<TAB>count` line per nonzero bin in row-major order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{TABLE_MAGIC}").unwrap();
        writeln!(out, "n_types\t{}", self.n_types).unwrap();
        writeln!(out, "n_answers\t{}", self.n_answers).unwrap();
        for t in 0..self.n_types {
            for (k, &c) in self.row(t).iter().enumerate() {
                if c > 0 {
                    writeln!(out, "{t}\t{k}\t{c}").unwrap();
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::invalid(format!("prior table line {}: {msg}", line + 1));
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l == TABLE_MAGIC => {}
            _ => return Err(bad(0, "missing header")),
        }
        let mut dim = |name: &str| -> Result<usize> {
            let (i, l) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            let v = l
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix('\t'))
                .ok_or_else(|| bad(i, &format!("expected {name}")))?;
            v.parse().map_err(|_| bad(i, "bad integer"))
        };
        let n_types = dim("n_types")?;
        let n_answers = dim("n_answers")?;
        let mut table = PriorTable::zeros(n_types, n_answers);
        let mut last: Option<(usize, usize)> = None;
        for (i, l) in lines {
            if l.is_empty() {
                continue;
            }
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 3 {
                return Err(bad(i, "expected three tab-separated fields"));
            }
            let t: usize = f[0].parse().map_err(|_| bad(i, "bad type id"))?;
            let k: usize = f[1].parse().map_err(|_| bad(i, "bad answer id"))?;
            let c: u64 = f[2].parse().map_err(|_| bad(i, "bad count"))?;
            if t >= n_types || k >= n_answers {
                return Err(bad(i, "index out of range"));
            }
            if last.is_some_and(|p| p >= (t, k)) {
                return Err(bad(i, "entries out of order"));
            }
            last = Some((t, k));
            table.counts[t * n_answers + k] = c;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn normalize_counts(row: &[u64]) -> Option<Vec<f64>> {
    let total: u64 = row.iter().sum();
    if total == 0 {
        return None;
    }
    Some(row.iter().map(|&c| c as f64 / total as f64).collect())
}
