use rayon::prelude::*;

use crate::error::Result;
use crate::ingest::Dataset;
use crate::priors::PriorTable;
use crate::stats::{mean, spearman, total_variation};

/// Shift between the train and test answer distributions of one type.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeShift {
    pub type_id: usize,
    pub prefix: String,
    pub n_train: u64,
    pub n_test: u64,
    /// ½·Σ|p_train(a|t) − p_test(a|t)|, in [0, 1].
    pub tv: f64,
    /// Spearman correlation between p_train(a|t) and 1/p_test(a|t) over
    /// answers seen in both splits; `None` with fewer than two such answers
    /// or constant ranks.
    pub inversion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftReport {
    pub per_type: Vec<TypeShift>,
    pub train_only_types: Vec<usize>,
    pub test_only_types: Vec<usize>,
    /// Unweighted mean of per-type TV.
    pub mean_tv: f64,
    /// Per-type TV weighted by test instance count.
    pub weighted_tv: f64,
    pub mean_inversion: Option<f64>,
}

/// Per-type distribution shift between `train` and `test` (in-vocabulary
/// top answers only).
pub fn measure_shift(train: &Dataset, test: &Dataset) -> Result<ShiftReport> {
    train.ensure_compatible(test)?;
    let tr = PriorTable::accumulate(train);
    let te = PriorTable::accumulate(test);
    let per_type: Vec<TypeShift> = (0..tr.n_types())
        .into_par_iter()
        .filter_map(|t| {
            let p = tr.probabilities(t)?;
            let q = te.probabilities(t)?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = p
                .iter()
                .zip(&q)
                .filter(|&(&a, &b)| a > 0.0 && b > 0.0)
                .map(|(&a, &b)| (a, 1.0 / b))
                .unzip();
            Some(TypeShift {
                type_id: t,
                prefix: train.type_table.prefix(t).unwrap_or_default().to_string(),
                n_train: tr.row_total(t),
                n_test: te.row_total(t),
                tv: total_variation(&p, &q).clamp(0.0, 1.0),
                inversion: spearman(&xs, &ys),
            })
        })
        .collect();
    let only = |a: &PriorTable, b: &PriorTable| -> Vec<usize> {
        (0..a.n_types())
            .filter(|&t| a.row_total(t) > 0 && b.row_total(t) == 0)
            .collect()
    };
    let tvs: Vec<f64> = per_type.iter().map(|s| s.tv).collect();
    let test_weight: u64 = per_type.iter().map(|s| s.n_test).sum();
    let weighted_tv = if test_weight == 0 {
        0.0
    } else {
        per_type.iter().map(|s| s.tv * s.n_test as f64).sum::<f64>() / test_weight as f64
    };
    let inversions: Vec<f64> = per_type.iter().filter_map(|s| s.inversion).collect();
    Ok(ShiftReport {
        train_only_types: only(&tr, &te),
        test_only_types: only(&te, &tr),
        mean_tv: mean(&tvs).unwrap_or(0.0),
        weighted_tv,
        mean_inversion: mean(&inversions),
        per_type,
    })
}
