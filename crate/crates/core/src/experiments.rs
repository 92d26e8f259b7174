//! Drivers for the toy comparisons, the factorial benchmark and the
//! Monte-Carlo error analysis. Everything here returns plain rows; writing
//! them out is left to the caller.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::adjust::{
    adjusted_batch, AdjustedResult, BatchCell, Comparison, FitCache, ModelFamily, RandomModel,
    Sidedness,
};
use crate::error::Result;
use crate::expectation::McConfig;
use crate::indices::IndexKind;
use crate::membership::MembershipMatrix;
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::synth::{
    generate_pair, toy_allocations, FactorialGrid, FactorialParams, GridCell, ToyName,
    TOY_COMPARISONS,
};

/// Models used by the toy run and the benchmark by default.
pub const DEFAULT_MODELS: [ModelFamily; 4] = [
    ModelFamily::Perm,
    ModelFamily::Fit,
    ModelFamily::Sym,
    ModelFamily::Flat,
];
/// Models covered by the error analysis.
pub const DIRICHLET_MODELS: [ModelFamily; 3] =
    [ModelFamily::Fit, ModelFamily::Sym, ModelFamily::Flat];

/// One toy comparison under one model.
#[derive(Debug)]
pub struct ToyCell<T> {
    /// Comparison id, 1 to 10.
    pub comparison: usize,
    pub first: ToyName,
    pub second: ToyName,
    pub cell: BatchCell<T>,
}

/// All ten toy comparisons under each two-sided model.
pub fn run_toy<T: Scalar>(
    models: &[ModelFamily],
    kind: IndexKind,
    cfg: &McConfig,
) -> Vec<ToyCell<T>> {
    let toy = toy_allocations::<T>();
    let models: Vec<RandomModel> = models.iter().map(|&f| RandomModel::two_sided(f)).collect();
    adjusted_batch(&toy.pairs(), &models, kind, cfg)
        .into_iter()
        .map(|cell| {
            let (first, second) = TOY_COMPARISONS[cell.pair];
            ToyCell {
                comparison: cell.pair + 1,
                first,
                second,
                cell,
            }
        })
        .collect()
}

/// Comparison ids sorted from most to least similar under `model`; failed
/// cells are left out.
pub fn ranking<T: Scalar>(cells: &[ToyCell<T>], model: ModelFamily) -> Vec<usize> {
    let mut scored: Vec<(usize, T)> = cells
        .iter()
        .filter(|c| c.cell.model.family == model)
        .filter_map(|c| {
            c.cell
                .result
                .as_ref()
                .ok()
                .map(|r| (c.comparison, r.adjusted))
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite adjusted values")
            .then(a.0.cmp(&b.0))
    });
    scored.into_iter().map(|(id, _)| id).collect()
}

/// One benchmark output row, in long format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub setting: usize,
    pub replicate: usize,
    pub n_clusters: usize,
    pub n_points: usize,
    pub imbalance: f64,
    pub precision: f64,
    pub randomize_rate: f64,
    pub sided: Sidedness,
    pub data_seed: u64,
    pub model: ModelFamily,
    pub kind: IndexKind,
    pub raw: Option<f64>,
    pub expected: Option<f64>,
    pub adjusted: Option<f64>,
    pub std_error: Option<f64>,
    pub samples: u64,
    pub mc_seed: u64,
    pub flags: String,
    pub error: Option<String>,
}

fn cell_seed(seed: u64, cell: &GridCell, tag: u64) -> u64 {
    derive_seed(seed, &[cell.setting as u64, cell.replicate as u64, tag])
}

/// Adjusts a generated pair. One-sided runs keep the first (unrandomized)
/// clustering as the fixed reference.
fn adjust_generated<T: Scalar>(
    cmp: &Comparison<'_, T>,
    family: ModelFamily,
    sided: Sidedness,
    cache: &FitCache<T>,
    cfg: &McConfig,
) -> Result<AdjustedResult<T>> {
    let model = RandomModel {
        family,
        sided,
        prefer_closed_form: true,
    };
    cmp.adjust(model, cache, cfg)
}

fn prepare<T: Scalar>(p: &FactorialParams) -> Result<(MembershipMatrix<T>, MembershipMatrix<T>)> {
    let (reference, randomized) = generate_pair::<T>(p)?;
    // The comparison randomizes its first argument when one-sided.
    Ok((randomized, reference))
}

/// Runs every grid cell under every model. Cells run in parallel; failures are
/// recorded in the `error` column. Rows come back in cell order, then model order.
pub fn run_benchmark<T: Scalar>(
    grid: &FactorialGrid,
    models: &[ModelFamily],
    kind: IndexKind,
    cfg: &McConfig,
) -> Result<Vec<BenchmarkRow>> {
    grid.validate()?;
    let rows = grid
        .cells()
        .par_iter()
        .flat_map_iter(|cell| {
            let p = &cell.params;
            let data = prepare::<T>(p);
            let cmp = data
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|(a, b)| Comparison::new(a, b, kind));
            let cache = FitCache::new();
            models
                .iter()
                .map(|&family| {
                    let mc_seed = cell_seed(cfg.seed, cell, family as u64);
                    let out = cmp.as_ref().map_err(Clone::clone).and_then(|c| {
                        adjust_generated(c, family, p.sided, &cache, &cfg.with_seed(mc_seed))
                    });
                    let (raw, expected, adjusted, std_error, samples, flags, error) = match out {
                        Ok(r) => (
                            Some(r.raw.to_f64_lossy()),
                            Some(r.expected.to_f64_lossy()),
                            Some(r.adjusted.to_f64_lossy()),
                            Some(r.std_error.to_f64_lossy()),
                            r.provenance.samples,
                            r.provenance.flags.describe(),
                            None,
                        ),
                        Err(e) => (
                            None,
                            None,
                            None,
                            None,
                            0,
                            String::new(),
                            Some(e.to_string()),
                        ),
                    };
                    BenchmarkRow {
                        setting: cell.setting,
                        replicate: cell.replicate,
                        n_clusters: p.n_clusters,
                        n_points: p.n_points,
                        imbalance: p.imbalance,
                        precision: p.precision,
                        randomize_rate: p.randomize_rate,
                        sided: p.sided,
                        data_seed: p.seed,
                        model: family,
                        kind,
                        raw,
                        expected,
                        adjusted,
                        std_error,
                        samples,
                        mc_seed,
                        flags,
                        error,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(rows)
}

/// Benchmark parameter a marginal mean is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Clusters,
    Points,
    Imbalance,
    Precision,
    RandomizeRate,
}

impl Factor {
    fn level(self, row: &BenchmarkRow) -> f64 {
        match self {
            Self::Clusters => row.n_clusters as f64,
            Self::Points => row.n_points as f64,
            Self::Imbalance => row.imbalance,
            Self::Precision => row.precision,
            Self::RandomizeRate => row.randomize_rate,
        }
    }
}

/// Mean adjusted value per level of `factor` for `model`, averaged over all
/// other parameters and replicates. Levels ascend.
pub fn marginal_means(
    rows: &[BenchmarkRow],
    model: ModelFamily,
    factor: Factor,
) -> Vec<(f64, f64)> {
    let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.model == model) {
        if let Some(a) = r.adjusted {
            let level = factor.level(r);
            // Nonnegative levels order the same as their bit patterns.
            let e = acc.entry(level.to_bits()).or_insert((level, 0.0, 0));
            e.1 += a;
            e.2 += 1;
        }
    }
    acc.into_values()
        .map(|(level, sum, n)| (level, sum / n as f64))
        .collect()
}

/// Repeated adjustments of one generated comparison under one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatedCell {
    pub setting: usize,
    pub replicate: usize,
    pub params: FactorialParams,
    pub model: ModelFamily,
    pub values: Vec<f64>,
    /// First failure, if any repetition failed.
    pub error: Option<String>,
}

impl RepeatedCell {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn all_negative(&self) -> bool {
        self.values.iter().all(|&v| v < 0.0)
    }

    /// Largest deviation from the repetition mean.
    pub fn max_abs_error(&self) -> f64 {
        let m = self.mean();
        self.values
            .iter()
            .map(|v| (v - m).abs())
            .fold(0.0, f64::max)
    }
}

/// Adjusts every grid comparison `reps` times with independent seeds.
pub fn repeat_adjustments<T: Scalar>(
    grid: &FactorialGrid,
    models: &[ModelFamily],
    reps: usize,
    kind: IndexKind,
    cfg: &McConfig,
) -> Result<Vec<RepeatedCell>> {
    grid.validate()?;
    Ok(repeat_adjustments_for::<T>(
        &grid.cells(),
        models,
        reps,
        kind,
        cfg,
    ))
}

/// [`repeat_adjustments`] over an explicit list of cells.
pub fn repeat_adjustments_for<T: Scalar>(
    cells: &[GridCell],
    models: &[ModelFamily],
    reps: usize,
    kind: IndexKind,
    cfg: &McConfig,
) -> Vec<RepeatedCell> {
    cells
        .par_iter()
        .flat_map_iter(|cell| {
            let data = prepare::<T>(&cell.params);
            let cmp = data
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|(a, b)| Comparison::new(a, b, kind));
            let cache = FitCache::new();
            models
                .iter()
                .map(|&family| {
                    let mut values = Vec::with_capacity(reps);
                    let mut error = None;
                    for rep in 0..reps {
                        let seed = derive_seed(
                            cfg.seed,
                            &[
                                cell.setting as u64,
                                cell.replicate as u64,
                                family as u64,
                                rep as u64,
                            ],
                        );
                        match cmp.as_ref().map_err(Clone::clone).and_then(|c| {
                            adjust_generated(
                                c,
                                family,
                                cell.params.sided,
                                &cache,
                                &cfg.with_seed(seed),
                            )
                        }) {
                            Ok(r) => values.push(r.adjusted.to_f64_lossy()),
                            Err(e) => {
                                error = Some(e.to_string());
                                break;
                            }
                        }
                    }
                    RepeatedCell {
                        setting: cell.setting,
                        replicate: cell.replicate,
                        params: cell.params,
                        model: family,
                        values,
                        error,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Per-model error summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub model: ModelFamily,
    pub comparisons: usize,
    /// Comparisons whose repetitions were all negative, excluded below.
    pub dropped: usize,
    pub failed: usize,
    pub computations: usize,
    pub within_tolerance: usize,
    /// `None` when every comparison was dropped or failed.
    pub fraction_within: Option<f64>,
    pub max_abs_error: f64,
    pub tolerance: f64,
}

/// Absolute deviations from each comparison's repetition mean, with
/// all-negative comparisons and failed cells dropped.
pub fn summarize_errors(
    cells: &[RepeatedCell],
    models: &[ModelFamily],
    tolerance: f64,
) -> Vec<ErrorSummary> {
    models
        .iter()
        .map(|&model| {
            let mine: Vec<&RepeatedCell> = cells.iter().filter(|c| c.model == model).collect();
            let failed = mine
                .iter()
                .filter(|c| c.error.is_some() || c.values.is_empty())
                .count();
            let ok: Vec<&&RepeatedCell> = mine
                .iter()
                .filter(|c| c.error.is_none() && !c.values.is_empty())
                .collect();
            let kept: Vec<&&RepeatedCell> =
                ok.iter().copied().filter(|c| !c.all_negative()).collect();
            let mut computations = 0;
            let mut within = 0;
            let mut max_abs_error: f64 = 0.0;
            for c in &kept {
                let m = c.mean();
                for v in &c.values {
                    let e = (v - m).abs();
                    computations += 1;
                    within += usize::from(e < tolerance);
                    max_abs_error = max_abs_error.max(e);
                }
            }
            ErrorSummary {
                model,
                comparisons: mine.len(),
                dropped: ok.len() - kept.len(),
                failed,
                computations,
                within_tolerance: within,
                fraction_within: (computations > 0).then(|| within as f64 / computations as f64),
                max_abs_error,
                tolerance,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_run_shapes_and_ranking() {
        let cells = run_toy::<f64>(&DEFAULT_MODELS, IndexKind::Ndc, &McConfig::new(20_000, 1));
        assert_eq!(cells.len(), 40);
        assert!(cells.iter().all(|c| c.cell.result.is_ok()));
        for model in DEFAULT_MODELS {
            let r = ranking(&cells, model);
            assert_eq!(r.len(), 10);
            let mut sorted = r.clone();
            sorted.sort();
            assert_eq!(sorted, (1..=10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn small_benchmark_rows() {
        let grid = FactorialGrid {
            n_clusters: vec![2, 3],
            n_points: vec![20],
            imbalance: vec![0.5],
            precision: vec![0.0, 1.0],
            randomize_rate: vec![0.5],
            replicates: 2,
            sided: Sidedness::Two,
            seed: 3,
        };
        let cfg = McConfig::new(2_000, 5);
        let rows = run_benchmark::<f64>(&grid, &DEFAULT_MODELS, IndexKind::Ndc, &cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 4);
        assert!(rows.iter().all(|r| r.error.is_none()), "{rows:?}");
        assert_eq!(
            rows,
            run_benchmark::<f64>(&grid, &DEFAULT_MODELS, IndexKind::Ndc, &cfg).unwrap()
        );
        let means = marginal_means(&rows, ModelFamily::Perm, Factor::Precision);
        assert_eq!(
            means.iter().map(|m| m.0).collect::<Vec<_>>(),
            vec![0.0, 1.0]
        );
    }

    #[test]
    fn error_summary_drops_negative_comparisons() {
        let params = FactorialParams {
            n_clusters: 2,
            n_points: 10,
            imbalance: 0.5,
            precision: 1.0,
            randomize_rate: 0.5,
            sided: Sidedness::Two,
            seed: 0,
        };
        let cell = |values: Vec<f64>| RepeatedCell {
            setting: 0,
            replicate: 0,
            params,
            model: ModelFamily::Fit,
            values,
            error: None,
        };
        let cells = vec![cell(vec![0.5, 0.52]), cell(vec![-0.1, -0.3])];
        let s = &summarize_errors(&cells, &[ModelFamily::Fit], 0.01)[0];
        assert_eq!((s.comparisons, s.dropped, s.computations), (2, 1, 2));
        assert!((s.max_abs_error - 0.01).abs() < 1e-12);
    }
}
