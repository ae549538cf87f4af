//! Text manifest for a [`SplitAssignment`].
//!
//! ```text
//! # priorshift split manifest v1
//! seed<TAB>42
//! test_fraction<TAB>0.33
//! coverage_threshold<TAB>0.95
//! max_repair_iterations<TAB>100
//! coverage<TAB>0.97
//! single_cluster_types<TAB>3,17
//! warning<TAB>...            (zero or more)
//! clusters<TAB>N
//! type_id<TAB>answer_id<TAB>train|test    (N lines, key order)
//! val_ids<TAB>M
//! question_id                              (M lines, ascending)
//! ```
//!
//! Floats are written in shortest round-trip form, so parsing and
//! re-serializing reproduces the file byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use super::cp::{ClusterKey, SplitAssignment, SplitParams};
use crate::domain::SplitTag;
use crate::error::{Error, Result};

const MANIFEST_MAGIC: &str = "# priorshift split manifest v1";

pub fn manifest_to_string(a: &SplitAssignment) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "{MANIFEST_MAGIC}").unwrap();
    writeln!(w, "seed\t{}", a.seed).unwrap();
    writeln!(w, "test_fraction\t{}", a.params.test_fraction).unwrap();
    writeln!(w, "coverage_threshold\t{}", a.params.coverage_threshold).unwrap();
    writeln!(w, "max_repair_iterations\t{}", a.params.max_repair_iterations).unwrap();
    writeln!(w, "coverage\t{}", a.coverage).unwrap();
    let singles: Vec<String> = a.single_cluster_types.iter().map(ToString::to_string).collect();
    writeln!(w, "single_cluster_types\t{}", singles.join(",")).unwrap();
    for warning in &a.warnings {
        writeln!(w, "warning\t{}", warning.replace(['\t', '\n', '\r'], " ")).unwrap();
    }
    writeln!(w, "clusters\t{}", a.cluster_to_split.len()).unwrap();
    for (k, tag) in &a.cluster_to_split {
        writeln!(w, "{}\t{}\t{}", k.type_id, k.answer_id, tag).unwrap();
    }
    writeln!(w, "val_ids\t{}", a.val_ids.len()).unwrap();
    for id in &a.val_ids {
        writeln!(w, "{id}").unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn err(line: usize, msg: impl std::fmt::Display) -> Error {
        Error::invalid(format!("split manifest line {}: {msg}", line + 1))
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.inner.next().ok_or_else(|| Error::invalid("split manifest truncated"))
    }

    fn field(&mut self, name: &str) -> Result<(usize, &'a str)> {
        let (i, l) = self.next()?;
        l.strip_prefix(name)
            .and_then(|r| r.strip_prefix('\t'))
            .map(|v| (i, v))
            .ok_or_else(|| Self::err(i, format!("expected {name}")))
    }

    fn parsed<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let (i, v) = self.field(name)?;
        v.parse().map_err(|_| Self::err(i, format!("bad value for {name}")))
    }
}

pub fn parse_manifest(text: &str) -> Result<SplitAssignment> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (i, first) = lines.next()?;
    if first != MANIFEST_MAGIC {
        return Err(Lines::err(i, "missing manifest header"));
    }
    let seed: u64 = lines.parsed("seed")?;
    let params = SplitParams {
        test_fraction: lines.parsed("test_fraction")?,
        coverage_threshold: lines.parsed("coverage_threshold")?,
        max_repair_iterations: lines.parsed("max_repair_iterations")?,
    };
    let coverage: f64 = lines.parsed("coverage")?;
    let (i, singles) = lines.field("single_cluster_types")?;
    let single_cluster_types = if singles.is_empty() {
        Vec::new()
    } else {
        singles
            .split(',')
            .map(|s| s.parse().map_err(|_| Lines::err(i, "bad type id")))
            .collect::<Result<_>>()?
    };
    let mut warnings = Vec::new();
    let n_clusters: usize = loop {
        let (i, l) = lines.next()?;
        if let Some(w) = l.strip_prefix("warning\t") {
            warnings.push(w.to_string());
        } else if let Some(n) = l.strip_prefix("clusters\t") {
            break n.parse().map_err(|_| Lines::err(i, "bad cluster count"))?;
        } else {
            return Err(Lines::err(i, "expected warning or clusters"));
        }
    };
    let mut cluster_to_split = BTreeMap::new();
    for _ in 0..n_clusters {
        let (i, l) = lines.next()?;
        let f: Vec<&str> = l.split('\t').collect();
        let bad = || Lines::err(i, "expected type_id, answer_id, split");
        if f.len() != 3 {
            return Err(bad());
        }
        let key = ClusterKey {
            type_id: f[0].parse().map_err(|_| bad())?,
            answer_id: f[1].parse().map_err(|_| bad())?,
        };
        let tag: SplitTag = f[2].parse()?;
        if tag == SplitTag::Val {
            return Err(Lines::err(i, "clusters are assigned to train or test only"));
        }
        if cluster_to_split.insert(key, tag).is_some() {
            return Err(Lines::err(i, "duplicate cluster"));
        }
    }
    let n_val: usize = lines.parsed("val_ids")?;
    let mut val_ids = BTreeSet::new();
    for _ in 0..n_val {
        let (i, l) = lines.next()?;
        val_ids.insert(l.parse().map_err(|_| Lines::err(i, "bad question id"))?);
    }
    if let Ok((i, _)) = lines.next() {
        return Err(Lines::err(i, "trailing content"));
    }
    Ok(SplitAssignment {
        cluster_to_split,
        val_ids,
        seed,
        params,
        coverage,
        single_cluster_types,
        warnings,
    })
}

pub fn save_manifest(path: &Path, a: &SplitAssignment) -> Result<()> {
    std::fs::write(path, manifest_to_string(a)).map_err(|e| Error::io(path, e))
}

pub fn load_manifest(path: &Path) -> Result<SplitAssignment> {
    parse_manifest(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
