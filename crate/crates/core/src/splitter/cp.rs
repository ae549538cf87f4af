//! Changing-priors split construction.
//!
//! Instances are clustered by (question type, top answer). Cluster keys are
//! sorted, shuffled with a ChaCha8 generator seeded by `seed`, and assigned
//! to Test in that order while the Test instance count is below
//! `test_fraction · N`; the rest go to Train. A repair pass then raises the
//! share of test-question word types also seen in training questions: the
//! Test cluster with the most uncovered words is swapped with the
//! nearest-sized Train cluster of the same type, provided the Test count
//! stays within one maximum cluster size of the target. A cluster is
//! swapped at most once; clusters with no eligible partner are skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::SplitTag;
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// (question type, answer) cluster. Out-of-vocabulary top answers get ids
/// from `K` upward in lexicographic order of the answer string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterKey {
    pub type_id: usize,
    pub answer_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    pub test_fraction: f64,
    pub coverage_threshold: f64,
    pub max_repair_iterations: usize,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams {
            test_fraction: 0.33,
            coverage_threshold: 0.95,
            max_repair_iterations: 100,
        }
    }
}

impl SplitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid("test_fraction must lie in (0, 1)"));
        }
        if !(self.coverage_threshold > 0.0 && self.coverage_threshold <= 1.0) {
            return Err(Error::invalid("coverage_threshold must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub cluster_to_split: BTreeMap<ClusterKey, SplitTag>,
    pub val_ids: BTreeSet<u64>,
    pub seed: u64,
    pub params: SplitParams,
    /// Fraction of test-question word types that also occur in training questions.
    pub coverage: f64,
    /// Types with a single cluster, which therefore sit wholly in one split.
    pub single_cluster_types: Vec<usize>,
    pub warnings: Vec<String>,
}

impl SplitAssignment {
    pub fn split_of(&self, key: &ClusterKey) -> Option<SplitTag> {
        self.cluster_to_split.get(key).copied()
    }

    pub fn clusters_in(&self, tag: SplitTag) -> impl Iterator<Item = &ClusterKey> {
        self.cluster_to_split.iter().filter(move |(_, &s)| s == tag).map(|(k, _)| k)
    }
}

/// Cluster key of every instance, in instance order.
pub fn cluster_keys(data: &Dataset) -> Vec<ClusterKey> {
    let k = data.n_answers();
    let oov: BTreeSet<&str> = data
        .instances
        .iter()
        .filter(|i| data.vocabulary.id(&i.top_answer).is_none())
        .map(|i| i.top_answer.as_str())
        .collect();
    let oov_ids: HashMap<&str, usize> = oov.into_iter().enumerate().map(|(i, a)| (a, k + i)).collect();
    data.instances
        .iter()
        .map(|inst| ClusterKey {
            type_id: inst.type_id,
            answer_id: data
                .vocabulary
                .id(&inst.top_answer)
                .unwrap_or_else(|| oov_ids[inst.top_answer.as_str()]),
        })
        .collect()
}

struct Cluster {
    key: ClusterKey,
    size: usize,
    /// (word id, number of questions in the cluster containing it)
    words: Vec<(usize, u32)>,
}

struct Coverage {
    train: Vec<u32>,
    test: Vec<u32>,
}

impl Coverage {
    fn apply(&mut self, c: &Cluster, tag: SplitTag, sign: i64) {
        let side = if tag == SplitTag::Test { &mut self.test } else { &mut self.train };
        for &(w, n) in &c.words {
            side[w] = (side[w] as i64 + sign * n as i64) as u32;
        }
    }

    fn fraction(&self) -> f64 {
        let (mut seen, mut covered) = (0usize, 0usize);
        for (tr, te) in self.train.iter().zip(&self.test) {
            if *te > 0 {
                seen += 1;
                if *tr > 0 {
                    covered += 1;
                }
            }
        }
        if seen == 0 {
            1.0
        } else {
            covered as f64 / seen as f64
        }
    }

    fn uncovered_in(&self, c: &Cluster) -> usize {
        c.words.iter().filter(|&&(w, _)| self.train[w] == 0).count()
    }
}

fn build_clusters(data: &Dataset) -> Vec<Cluster> {
    let keys = cluster_keys(data);
    let mut vocab: HashMap<&str, usize> = HashMap::new();
    let mut grouped: BTreeMap<ClusterKey, (usize, BTreeMap<usize, u32>)> = BTreeMap::new();
    for (inst, key) in data.instances.iter().zip(&keys) {
        let entry = grouped.entry(*key).or_default();
        entry.0 += 1;
        let unique: HashSet<&str> = inst.tokens.iter().map(String::as_str).collect();
        for w in unique {
            let next = vocab.len();
            let id = *vocab.entry(w).or_insert(next);
            *entry.1.entry(id).or_default() += 1;
        }
    }
    grouped
        .into_iter()
        .map(|(key, (size, words))| Cluster {
            key,
            size,
            words: words.into_iter().collect(),
        })
        .collect()
}

/// Builds a changing-priors assignment of `data`'s clusters to Train/Test.
pub fn build_cp_splits(data: &Dataset, params: SplitParams, seed: u64) -> Result<SplitAssignment> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    let clusters = build_clusters(data);
    let n_words = clusters
        .iter()
        .flat_map(|c| c.words.iter().map(|&(w, _)| w + 1))
        .max()
        .unwrap_or(0);

    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let target = params.test_fraction * data.len() as f64;
    let mut tags = vec![SplitTag::Train; clusters.len()];
    let mut test_count = 0usize;
    for &i in &order {
        if (test_count as f64) < target {
            tags[i] = SplitTag::Test;
            test_count += clusters[i].size;
        }
    }

    let mut cov = Coverage {
        train: vec![0; n_words],
        test: vec![0; n_words],
    };
    for (c, &tag) in clusters.iter().zip(&tags) {
        cov.apply(c, tag, 1);
    }

    let max_size = clusters.iter().map(|c| c.size).max().unwrap_or(0) as f64;
    let mut frozen = vec![false; clusters.len()];
    let mut coverage = cov.fraction();
    for _ in 0..params.max_repair_iterations {
        if coverage >= params.coverage_threshold {
            break;
        }
        // Worst remaining Test cluster; clusters are in key order so the
        // first maximum is the lowest key.
        let mut worst: Option<(usize, usize)> = None;
        for (i, c) in clusters.iter().enumerate() {
            if tags[i] != SplitTag::Test || frozen[i] {
                continue;
            }
            let u = cov.uncovered_in(c);
            if u > 0 && worst.is_none_or(|(_, bu)| u > bu) {
                worst = Some((i, u));
            }
        }
        let Some((ti, _)) = worst else { break };
        let t_size = clusters[ti].size as f64;
        let mut partner: Option<(usize, usize)> = None;
        for (j, c) in clusters.iter().enumerate() {
            if tags[j] != SplitTag::Train || frozen[j] || c.key.type_id != clusters[ti].key.type_id {
                continue;
            }
            let after = test_count as f64 - t_size + c.size as f64;
            if (after - target).abs() > max_size {
                continue;
            }
            let gap = c.size.abs_diff(clusters[ti].size);
            if partner.is_none_or(|(_, bg)| gap < bg) {
                partner = Some((j, gap));
            }
        }
        frozen[ti] = true;
        let Some((tj, _)) = partner else { continue };
        frozen[tj] = true;
        cov.apply(&clusters[ti], SplitTag::Test, -1);
        cov.apply(&clusters[tj], SplitTag::Train, -1);
        tags[ti] = SplitTag::Train;
        tags[tj] = SplitTag::Test;
        cov.apply(&clusters[ti], SplitTag::Train, 1);
        cov.apply(&clusters[tj], SplitTag::Test, 1);
        test_count = test_count - clusters[ti].size + clusters[tj].size;
        coverage = cov.fraction();
    }

    let mut warnings = Vec::new();
    if coverage < params.coverage_threshold {
        warnings.push(format!(
            "word coverage {coverage:.4} below threshold {} after repair",
            params.coverage_threshold
        ));
        log::warn!("{}", warnings.last().unwrap());
    }
    let mut per_type: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &clusters {
        *per_type.entry(c.key.type_id).or_default() += 1;
    }
    Ok(SplitAssignment {
        cluster_to_split: clusters.iter().map(|c| c.key).zip(tags).collect(),
        val_ids: BTreeSet::new(),
        seed,
        params,
        coverage,
        single_cluster_types: per_type.into_iter().filter(|&(_, n)| n == 1).map(|(t, _)| t).collect(),
        warnings,
    })
}

/// Samples `n_val` training question ids, uniformly without replacement.
pub fn hold_out_validation(
    assignment: &SplitAssignment,
    data: &Dataset,
    n_val: usize,
    seed: u64,
) -> Result<SplitAssignment> {
    let keys = cluster_keys(data);
    let mut train_ids: Vec<u64> = data
        .instances
        .iter()
        .zip(&keys)
        .filter(|(_, k)| assignment.split_of(k) == Some(SplitTag::Train))
        .map(|(i, _)| i.question_id)
        .collect();
    train_ids.sort_unstable();
    let val_ids = sample_ids(&train_ids, n_val, seed)?;
    Ok(SplitAssignment {
        val_ids,
        ..assignment.clone()
    })
}

/// `n` ids drawn uniformly without replacement; `n` must be below `ids.len()`.
pub fn sample_ids(ids: &[u64], n: usize, seed: u64) -> Result<BTreeSet<u64>> {
    if n > 0 && n >= ids.len() {
        return Err(Error::invalid(format!(
            "cannot hold out {n} of {} training instances",
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, ids.len(), n)
        .into_iter()
        .map(|i| ids[i])
        .collect())
}

/// Train / val / test datasets realized from an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDatasets {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

pub fn materialize(assignment: &SplitAssignment, data: &Dataset) -> Result<SplitDatasets> {
    let keys = cluster_keys(data);
    let mut parts: [Vec<_>; 3] = Default::default();
    for (inst, key) in data.instances.iter().zip(&keys) {
        let slot = match assignment.split_of(key) {
            Some(SplitTag::Test) => 2,
            Some(_) if assignment.val_ids.contains(&inst.question_id) => 1,
            Some(_) => 0,
            None => {
                return Err(Error::integrity(format!(
                    "question {} falls in cluster {key:?}, absent from the assignment",
                    inst.question_id
                )))
            }
        };
        parts[slot].push(inst.clone());
    }
    let [train, val, test] = parts;
    let make = |suffix: &str, tag, instances| {
        Dataset::new(
            format!("{}-{suffix}", data.name),
            tag,
            data.vocabulary.clone(),
            data.type_table.clone(),
            instances,
        )
    };
    Ok(SplitDatasets {
        train: make("train", SplitTag::Train, train)?,
        val: make("val", SplitTag::Val, val)?,
        test: make("test", SplitTag::Test, test)?,
    })
}

/// Uniform per-instance split with exactly `n_test` test instances.
pub fn iid_split(data: &Dataset, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let ids: Vec<u64> = data.instances.iter().map(|i| i.question_id).collect();
    if n_test == 0 || n_test >= ids.len() {
        return Err(Error::invalid(format!("cannot draw {n_test} of {} instances", ids.len())));
    }
    let test_ids = sample_ids(&ids, n_test, seed)?;
    let train = data.filtered(format!("{}-iid-train", data.name), SplitTag::Train, |i| {
        !test_ids.contains(&i.question_id)
    });
    let test = data.filtered(format!("{}-iid-test", data.name), SplitTag::Test, |i| {
        test_ids.contains(&i.question_id)
    });
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{AnswerVocabulary, Category, Instance, QuestionTypeTable};
    use crate::ingest::{generate_synthetic, BiasProfile, SyntheticConfig};

    fn clusters_dataset(spec: &[(usize, &str, usize)], words: impl Fn(usize) -> Vec<String>) -> Dataset {
        let mut answers: Vec<&str> = spec.iter().map(|s| s.1).collect();
        answers.sort();
        answers.dedup();
        if answers.len() < 2 {
            answers.push("zz-unused");
        }
        let vocab = AnswerVocabulary::new(&answers).unwrap();
        let table = QuestionTypeTable::new(&["is", "what", "how"]).unwrap();
        let mut instances = Vec::new();
        for &(t, a, n) in spec {
            for _ in 0..n {
                let id = instances.len() as u64;
                instances.push(Instance {
                    question_id: id,
                    image_id: id,
                    tokens: words(id as usize),
                    type_id: t,
                    category: Category::Other,
                    human_answers: vec![a.to_string(); 10],
                    top_answer: a.to_string(),
                    features: None,
                });
            }
        }
        Dataset::new("clusters", SplitTag::Train, vocab, table, instances).unwrap()
    }

    #[test]
    fn two_equal_clusters_split_one_each() {
        let d = clusters_dataset(&[(0, "yes", 100), (0, "no", 100)], |_| vec!["is".into(), "it".into()]);
        for seed in 0..5 {
            let a = build_cp_splits(&d, SplitParams { test_fraction: 0.5, ..Default::default() }, seed).unwrap();
            assert_eq!(a.clusters_in(SplitTag::Test).count(), 1);
            assert_eq!(a.clusters_in(SplitTag::Train).count(), 1);
            assert_eq!(a.coverage, 1.0);
            assert!(a.single_cluster_types.is_empty());
        }
    }

    #[test]
    fn same_words_everywhere_gives_full_coverage() {
        let d = clusters_dataset(&[(0, "a", 10), (1, "b", 7), (1, "c", 3), (2, "a", 9)], |_| {
            vec!["how".into(), "many".into()]
        });
        let a = build_cp_splits(&d, SplitParams::default(), 3).unwrap();
        assert_eq!(a.coverage, 1.0);
        assert!(a.warnings.is_empty());
        assert_eq!(a.single_cluster_types, vec![0, 2]);
    }

    #[test]
    fn repair_swaps_clusters_to_restore_coverage() {
        // Each cluster has a private word; only swaps can cover test words.
        let spec = [(0, "a", 5), (0, "b", 5), (0, "c", 5), (0, "d", 5)];
        let d = clusters_dataset(&spec, |i| vec![format!("w{}", i / 5)]);
        let params = SplitParams {
            test_fraction: 0.5,
            coverage_threshold: 1.0,
            max_repair_iterations: 10,
        };
        let a = build_cp_splits(&d, params, 0).unwrap();
        // Private words can never be covered; the warning records it.
        assert_eq!(a.coverage, 0.0);
        assert_eq!(a.warnings.len(), 1);
        assert_eq!(a.clusters_in(SplitTag::Test).count(), 2);
    }

    #[test]
    fn deterministic_and_atomic_on_synthetic_data() {
        let (train, test) = generate_synthetic(&SyntheticConfig {
            n_types: 6,
            answers_per_type: 4,
            n_train: 400,
            n_test: 200,
            bias_profile: BiasProfile::Skewed { alpha: 1.0 },
            seed: 9,
            ..Default::default()
        })
        .unwrap();
        let pooled = Dataset::pooled("pool", &[&train, &test]).unwrap();
        let params = SplitParams::default();
        let a = build_cp_splits(&pooled, params, 5).unwrap();
        assert_eq!(a, build_cp_splits(&pooled, params, 5).unwrap());
        let s = materialize(&a, &pooled).unwrap();
        let train_keys: HashSet<ClusterKey> = cluster_keys(&s.train).into_iter().collect();
        let test_keys: HashSet<ClusterKey> = cluster_keys(&s.test).into_iter().collect();
        assert!(train_keys.is_disjoint(&test_keys));
        let max = pooled.len() as f64;
        assert_eq!(s.train.len() + s.test.len(), pooled.len());
        let counts: HashMap<ClusterKey, usize> = cluster_keys(&pooled).into_iter().fold(HashMap::new(), |mut m, k| {
            *m.entry(k).or_default() += 1;
            m
        });
        let biggest = *counts.values().max().unwrap() as f64;
        let target = params.test_fraction * max;
        assert!((s.test.len() as f64 - target).abs() <= biggest);
    }

    #[test]
    fn validation_holdout() {
        let d = clusters_dataset(&[(0, "yes", 30), (0, "no", 10), (1, "a", 20)], |_| vec!["is".into()]);
        let a = build_cp_splits(&d, SplitParams { test_fraction: 0.2, ..Default::default() }, 1).unwrap();
        let n_train = materialize(&a, &d).unwrap().train.len();
        let none = hold_out_validation(&a, &d, 0, 4).unwrap();
        assert!(none.val_ids.is_empty());
        let v1 = hold_out_validation(&a, &d, 8, 4).unwrap();
        let v2 = hold_out_validation(&a, &d, 8, 5).unwrap();
        assert_eq!(v1.val_ids.len(), 8);
        assert_eq!(v1, hold_out_validation(&a, &d, 8, 4).unwrap());
        assert_ne!(v1.val_ids, v2.val_ids);
        let s = materialize(&v1, &d).unwrap();
        assert_eq!(s.val.len(), 8);
        assert_eq!(s.train.len() + 8, n_train);
        assert!(s.val.instances.iter().all(|i| v1.val_ids.contains(&i.question_id)));
        assert!(hold_out_validation(&a, &d, n_train, 4).is_err());
    }

    #[test]
    fn out_of_vocabulary_answers_get_extended_cluster_ids() {
        let mut d = clusters_dataset(&[(0, "yes", 2), (0, "no", 2)], |_| vec![]);
        d.instances[0].top_answer = "zebra".into();
        d.instances[1].top_answer = "ant".into();
        let keys = cluster_keys(&d);
        assert_eq!(keys[0].answer_id, 3);
        assert_eq!(keys[1].answer_id, 2);
        assert_eq!(keys[2].answer_id, 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = clusters_dataset(&[(0, "yes", 2), (0, "no", 2)], |_| vec![]);
        for (f, c) in [(0.0, 0.9), (1.0, 0.9), (0.3, 0.0), (0.3, 1.1)] {
            let p = SplitParams { test_fraction: f, coverage_threshold: c, ..Default::default() };
            assert!(build_cp_splits(&d, p, 0).is_err());
        }
        let empty = d.filtered("e", SplitTag::Train, |_| false);
        assert!(build_cp_splits(&empty, SplitParams::default(), 0).is_err());
    }
}
