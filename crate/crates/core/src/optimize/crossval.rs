use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fit::{fit_map, FitConfig};
use crate::error::{Error, Result};
use crate::expfam::{basis_sums, moments, Regularization, SufficientStats};
use crate::manifold::{Manifold, ManifoldPoint};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20180101;

/// Fold label of every point: a seeded shuffle cut into `k` contiguous
/// blocks whose sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::domain("cross-validation needs at least 2 folds"));
    }
    if n < k {
        return Err(Error::domain(format!("{n} points cannot fill {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos * k / n;
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub bandlimit: usize,
    pub reg: f64,
    pub fold: usize,
    pub train_ll: f64,
    pub test_ll: f64,
    pub seconds: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvSummary {
    pub bandlimit: usize,
    pub reg: f64,
    pub train_mean: f64,
    pub train_std: f64,
    pub test_mean: f64,
    pub test_std: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub rows: Vec<FoldResult>,
    pub summaries: Vec<CvSummary>,
}

impl CvReport {
    /// Summary with the highest mean test log-likelihood.
    pub fn best(&self) -> Option<&CvSummary> {
        self.summaries
            .iter()
            .max_by(|a, b| a.test_mean.total_cmp(&b.test_mean))
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// k-fold cross-validation over every `(bandlimit, reg)` pair. A zero
/// regularisation strength fits without a penalty; any positive one uses the
/// Plancherel scheme. `template` supplies the remaining optimiser settings.
pub fn cross_validate(
    points: &[ManifoldPoint],
    folds: usize,
    bandlimits: &[usize],
    regs: &[f64],
    template: &FitConfig,
    seed: u64,
) -> Result<CvReport> {
    let assign = fold_assignment(points.len(), folds, seed)?;
    cross_validate_assigned(points, &assign, folds, bandlimits, regs, template)
}

/// Cross-validation with explicit fold labels in `0..folds`.
pub fn cross_validate_assigned(
    points: &[ManifoldPoint],
    assign: &[usize],
    folds: usize,
    bandlimits: &[usize],
    regs: &[f64],
    template: &FitConfig,
) -> Result<CvReport> {
    let Some(first) = points.first() else {
        return Err(Error::domain("cross-validation of an empty dataset"));
    };
    let manifold: Manifold = first.manifold();
    if folds < 2 {
        return Err(Error::domain("cross-validation needs at least 2 folds"));
    }
    if assign.len() != points.len() || assign.iter().any(|&f| f >= folds) {
        return Err(Error::domain("fold labels must cover every point and lie below the fold count"));
    }
    if bandlimits.is_empty() || regs.is_empty() {
        return Err(Error::domain("need at least one bandlimit and one regularization value"));
    }
    if let Some(r) = regs.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::domain(format!("invalid regularization strength {r}")));
    }
    let lmax = *bandlimits.iter().max().unwrap();

    // Per-fold basis sums at the largest bandlimit; smaller bandlimits use a
    // prefix since the canonical order is degree-major.
    let mut fold_points: Vec<Vec<ManifoldPoint>> = vec![Vec::new(); folds];
    for (p, &f) in points.iter().zip(assign) {
        fold_points[f].push(*p);
    }
    if let Some(f) = fold_points.iter().position(Vec::is_empty) {
        return Err(Error::domain(format!("fold {f} has no points")));
    }
    let sums: Vec<Vec<f64>> = fold_points
        .iter()
        .map(|pts| basis_sums(pts, manifold, lmax))
        .collect::<Result<_>>()?;
    let total: Vec<f64> = (0..sums[0].len())
        .map(|i| sums.iter().map(|s| s[i]).sum())
        .collect();

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &l in bandlimits {
        let width = manifold.num_coeffs(l) - 1;
        for &reg in regs {
            let cfg = FitConfig {
                bandlimit: l,
                regularization: if reg > 0.0 {
                    Regularization::Plancherel(reg)
                } else {
                    Regularization::None
                },
                ..*template
            };
            let mut fold_rows = Vec::with_capacity(folds);
            for f in 0..folds {
                let n_test = fold_points[f].len();
                let n_train = points.len() - n_test;
                let train_sum: Vec<f64> = (0..width).map(|i| total[i] - sums[f][i]).collect();
                let train = SufficientStats::from_sum(manifold, l, n_train, &train_sum)?;
                let test = SufficientStats::from_sum(manifold, l, n_test, &sums[f][..width])?;
                let start = Instant::now();
                let fit = fit_map(&train, &cfg)?;
                let seconds = start.elapsed().as_secs_f64();
                let log_z = moments(&fit.params, cfg.oversample)?.log_z;
                let ll = |s: &SufficientStats| -> f64 {
                    fit.params.eta.iter().zip(&s.mean).map(|(a, b)| a * b).sum::<f64>() - log_z
                };
                fold_rows.push(FoldResult {
                    bandlimit: l,
                    reg,
                    fold: f,
                    train_ll: ll(&train),
                    test_ll: ll(&test),
                    seconds,
                    iterations: fit.iterations,
                    converged: fit.converged,
                });
            }
            let train: Vec<f64> = fold_rows.iter().map(|r| r.train_ll).collect();
            let test: Vec<f64> = fold_rows.iter().map(|r| r.test_ll).collect();
            let (train_mean, train_std) = mean_std(&train);
            let (test_mean, test_std) = mean_std(&test);
            summaries.push(CvSummary {
                bandlimit: l,
                reg,
                train_mean,
                train_std,
                test_mean,
                test_std,
                mean_seconds: fold_rows.iter().map(|r| r.seconds).sum::<f64>() / folds as f64,
            });
            rows.extend(fold_rows);
        }
    }
    Ok(CvReport { rows, summaries })
}
