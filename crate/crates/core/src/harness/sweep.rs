use rayon::prelude::*;

use super::protocol::{run_protocol, PredictorSpec, ProtocolOptions};
use super::report::EvalReport;
use crate::domain::CategoryFilter;
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::predictors::Hyper;
use crate::stats::{mean, std_dev};

pub const DEFAULT_LAMBDA_GRID: [f64; 10] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0];

/// Reports of every seed at one regularizer weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub val: Vec<EvalReport>,
    pub test: Vec<EvalReport>,
}

fn summarize(reports: &[EvalReport], filter: CategoryFilter) -> (Option<f64>, Option<f64>) {
    let xs: Vec<f64> = reports.iter().filter_map(|r| r.accuracy(filter)).collect();
    (mean(&xs), std_dev(&xs))
}

impl SweepPoint {
    /// Mean and standard deviation across seeds.
    pub fn val_summary(&self, filter: CategoryFilter) -> (Option<f64>, Option<f64>) {
        summarize(&self.val, filter)
    }

    pub fn test_summary(&self, filter: CategoryFilter) -> (Option<f64>, Option<f64>) {
        summarize(&self.test, filter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    points: Vec<SweepPoint>,
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("the lambda grid is empty"));
    }
    if grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::invalid("lambda values must be finite and non-negative"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("lambda values must be strictly increasing"));
    }
    Ok(())
}

impl SweepCurve {
    pub fn new(points: Vec<SweepPoint>) -> Result<Self> {
        validate_grid(&points.iter().map(|p| p.lambda).collect::<Vec<_>>())?;
        Ok(SweepCurve { points })
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    /// Every report, point by point, seed by seed, val before test.
    pub fn reports(&self) -> Vec<&EvalReport> {
        self.points
            .iter()
            .flat_map(|p| p.val.iter().zip(&p.test).flat_map(|(v, t)| [v, t]))
            .collect()
    }
}

/// Trains one regularized model per `(λ, seed)` concurrently and evaluates
/// each on its validation holdout and on `test`.
pub fn lambda_sweep(
    train: &Dataset,
    test: &Dataset,
    grid: &[f64],
    base: &Hyper,
    seeds: &[u64],
    opts: &ProtocolOptions,
) -> Result<SweepCurve> {
    validate_grid(grid)?;
    if seeds.is_empty() {
        return Err(Error::invalid("the sweep needs at least one seed"));
    }
    let jobs: Vec<(f64, u64)> = grid.iter().flat_map(|&l| seeds.iter().map(move |&s| (l, s))).collect();
    let results: Vec<(EvalReport, EvalReport)> = jobs
        .par_iter()
        .map(|&(lambda, seed)| {
            let spec = PredictorSpec::Regularized(Hyper { lambda, seed, ..base.clone() });
            run_protocol(train, test, &spec, &ProtocolOptions { seed, ..opts.clone() })
        })
        .collect::<Result<_>>()?;
    let mut it = results.into_iter();
    let points = grid
        .iter()
        .map(|&lambda| {
            let (val, test) = it.by_ref().take(seeds.len()).unzip();
            SweepPoint { lambda, val, test }
        })
        .collect();
    SweepCurve::new(points)
}
