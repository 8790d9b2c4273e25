//! The harmonic exponential family `p(g | η) = exp(η · T(g)) / Z(η)`.
//!
//! Moments of the density are its Fourier coefficients, so they are computed
//! by synthesising the log-density on an oversampled grid, exponentiating,
//! and analysing the result. The coefficient of the constant function is the
//! normaliser. The log-density is shifted by its grid maximum before
//! exponentiation and the shift is added back to `log Z`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint};
use crate::special_functions::BasisEvaluator;
use crate::transforms::{analyze, make_grid, synthesize, GridFunction, SpectralCoeffs};

/// Default oversampling factor of the moment grid.
pub const DEFAULT_OVERSAMPLE: f64 = 2.0;

/// Natural parameters over degrees `1..=bandlimit` in canonical order. The
/// constant function is left out because it is absorbed by the normaliser.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalParams {
    pub manifold: Manifold,
    pub bandlimit: usize,
    pub eta: Vec<f64>,
}

impl NaturalParams {
    pub fn new(manifold: Manifold, bandlimit: usize, eta: Vec<f64>) -> Result<Self> {
        let want = param_count(manifold, bandlimit);
        if eta.len() != want {
            return Err(Error::domain(format!(
                "{manifold} bandlimit {bandlimit} has {want} parameters, got {}",
                eta.len()
            )));
        }
        if eta.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("natural parameters must be finite"));
        }
        Ok(NaturalParams {
            manifold,
            bandlimit,
            eta,
        })
    }

    pub fn zeros(manifold: Manifold, bandlimit: usize) -> Self {
        NaturalParams {
            manifold,
            bandlimit,
            eta: vec![0.0; param_count(manifold, bandlimit)],
        }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// Degree of parameter `i`.
    pub fn degree_of(&self, i: usize) -> usize {
        self.manifold.degree_of(i + 1)
    }

    /// Full coefficient vector with a zero in the constant slot.
    pub fn to_spectral(&self) -> SpectralCoeffs {
        let mut c = Vec::with_capacity(self.eta.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.eta);
        SpectralCoeffs {
            manifold: self.manifold,
            bandlimit: self.bandlimit,
            coeffs: c,
        }
    }

    /// Drops the constant coefficient.
    pub fn from_spectral(c: &SpectralCoeffs) -> Self {
        NaturalParams {
            manifold: c.manifold,
            bandlimit: c.bandlimit,
            eta: c.coeffs[1..].to_vec(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.eta.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Number of natural parameters, `J(L) - 1`.
pub fn param_count(manifold: Manifold, bandlimit: usize) -> usize {
    manifold.num_coeffs(bandlimit) - 1
}

/// Grid bandlimit used for moments: `ceil(oversample * L) + 1`.
pub fn grid_bandlimit(bandlimit: usize, oversample: f64) -> Result<usize> {
    if !(oversample.is_finite() && oversample >= 1.0) {
        return Err(Error::domain(format!(
            "oversampling factor must be a finite number >= 1, got {oversample}"
        )));
    }
    Ok((oversample * bandlimit as f64).ceil() as usize + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    /// `E[T(g)]` for every parameter slot.
    pub moments: Vec<f64>,
    pub log_z: f64,
}

/// Empirical mean of the sufficient statistics over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub manifold: Manifold,
    pub bandlimit: usize,
    pub count: usize,
    pub mean: Vec<f64>,
}

impl SufficientStats {
    /// Statistics from a sum of basis vectors (constant slot excluded).
    pub fn from_sum(manifold: Manifold, bandlimit: usize, count: usize, sum: &[f64]) -> Result<Self> {
        if count == 0 {
            return Err(Error::domain("sufficient statistics need at least one point"));
        }
        if sum.len() != param_count(manifold, bandlimit) {
            return Err(Error::domain("statistic length does not match the bandlimit"));
        }
        let inv = 1.0 / count as f64;
        Ok(SufficientStats {
            manifold,
            bandlimit,
            count,
            mean: sum.iter().map(|s| s * inv).collect(),
        })
    }

    /// Statistics of the same data at a lower bandlimit.
    pub fn truncated(&self, bandlimit: usize) -> Result<Self> {
        if bandlimit > self.bandlimit {
            return Err(Error::domain("cannot raise the bandlimit of sufficient statistics"));
        }
        Ok(SufficientStats {
            manifold: self.manifold,
            bandlimit,
            count: self.count,
            mean: self.mean[..param_count(self.manifold, bandlimit)].to_vec(),
        })
    }
}

fn check_shapes(eta: &NaturalParams, stats: &SufficientStats) -> Result<()> {
    if eta.manifold != stats.manifold || eta.bandlimit != stats.bandlimit {
        return Err(Error::domain(format!(
            "parameters ({}, L={}) and statistics ({}, L={}) disagree",
            eta.manifold, eta.bandlimit, stats.manifold, stats.bandlimit
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `η · T(p)`.
pub fn log_unnormalized(eta: &NaturalParams, p: &ManifoldPoint) -> Result<f64> {
    if p.manifold() != eta.manifold {
        return Err(Error::domain("point and parameters live on different manifolds"));
    }
    let mut t = vec![0.0; eta.manifold.num_coeffs(eta.bandlimit)];
    BasisEvaluator::new(eta.bandlimit).eval_into(p, &mut t);
    Ok(dot(&eta.eta, &t[1..]))
}

/// Moments and log-normaliser with grid bandlimit `ceil(oversample L) + 1`.
pub fn moments(eta: &NaturalParams, oversample: f64) -> Result<MomentReport> {
    moments_on_grid(eta, grid_bandlimit(eta.bandlimit, oversample)?)
}

/// Moments and log-normaliser computed on the grid of bandlimit
/// `grid_bandlimit`, which must exceed the parameter bandlimit.
pub fn moments_on_grid(eta: &NaturalParams, grid_bandlimit: usize) -> Result<MomentReport> {
    let l = eta.bandlimit;
    if grid_bandlimit <= l {
        return Err(Error::domain(format!(
            "moment grid bandlimit {grid_bandlimit} must exceed the parameter bandlimit {l}"
        )));
    }
    let grid = make_grid(eta.manifold, grid_bandlimit)?;
    let log_phi = synthesize(&eta.to_spectral(), &grid)?;
    let shift = log_phi.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let phi: Vec<f64> = log_phi.values.iter().map(|v| (v - shift).exp()).collect();
    let m = analyze(&GridFunction::new(grid, phi)?, l)?;
    let m0 = m.coeffs[0];
    if !(m0.is_finite() && m0 > 0.0) {
        return Err(Error::internal(format!(
            "normaliser coefficient {m0} is not positive; the grid is aliasing or overflowing"
        )));
    }
    let inv = 1.0 / m0;
    let moments: Vec<f64> = m.coeffs[1..].iter().map(|v| v * inv).collect();
    if moments.iter().any(|v| !v.is_finite()) {
        return Err(Error::internal("non-finite moment"));
    }
    Ok(MomentReport {
        moments,
        log_z: shift + m0.ln(),
    })
}

/// Mean per-point log-likelihood `η · T̄ - log Z(η)` under the normalised
/// invariant measure. The uniform density scores zero.
pub fn log_likelihood(eta: &NaturalParams, stats: &SufficientStats, oversample: f64) -> Result<f64> {
    check_shapes(eta, stats)?;
    let rep = moments(eta, oversample)?;
    Ok(dot(&eta.eta, &stats.mean) - rep.log_z)
}

/// Quadratic penalty on the natural parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    None,
    /// Precision `alpha * dim(l)` on every coefficient of degree `l`.
    Plancherel(f64),
}

impl Regularization {
    /// Per-parameter precision, or `None` when there is no penalty.
    pub fn precision(&self, manifold: Manifold, bandlimit: usize) -> Option<Vec<f64>> {
        match *self {
            Regularization::None => None,
            Regularization::Plancherel(alpha) => Some(
                (1..manifold.num_coeffs(bandlimit))
                    .map(|i| alpha * manifold.rep_dim(manifold.degree_of(i)) as f64)
                    .collect(),
            ),
        }
    }

    pub fn strength(&self) -> f64 {
        match *self {
            Regularization::None => 0.0,
            Regularization::Plancherel(a) => a,
        }
    }
}

/// Negative mean log-posterior `-(η·T̄ - log Z) + ½ Σ β η²` and its gradient
/// `E[T] - T̄ + β ∘ η`, sharing one moment computation.
pub fn objective_and_gradient(
    eta: &NaturalParams,
    stats: &SufficientStats,
    oversample: f64,
    precision: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    check_shapes(eta, stats)?;
    let rep = moments(eta, oversample)?;
    let mut f = rep.log_z - dot(&eta.eta, &stats.mean);
    let mut g: Vec<f64> = rep
        .moments
        .iter()
        .zip(&stats.mean)
        .map(|(m, t)| m - t)
        .collect();
    if let Some(prec) = precision {
        if prec.len() != eta.len() {
            return Err(Error::domain("precision vector has the wrong length"));
        }
        for ((gi, &b), &e) in g.iter_mut().zip(prec).zip(&eta.eta) {
            *gi += b * e;
            f += 0.5 * b * e * e;
        }
    }
    Ok((f, g))
}

/// Gradient of the negative mean log-posterior: the moment discrepancy
/// `E[T] - T̄` plus the penalty term.
pub fn nll_gradient(
    eta: &NaturalParams,
    stats: &SufficientStats,
    oversample: f64,
    precision: Option<&[f64]>,
) -> Result<Vec<f64>> {
    objective_and_gradient(eta, stats, oversample, precision).map(|(_, g)| g)
}

const STATS_CHUNK: usize = 64;

/// Sum of basis vectors over `points`, degrees `1..=bandlimit`. Chunked
/// in a fixed order so the result does not depend on the thread count.
pub fn basis_sums(points: &[ManifoldPoint], manifold: Manifold, bandlimit: usize) -> Result<Vec<f64>> {
    if points.iter().any(|p| p.manifold() != manifold) {
        return Err(Error::domain(format!("every point must lie on {manifold}")));
    }
    let j = manifold.num_coeffs(bandlimit);
    let partial: Vec<Vec<f64>> = points
        .par_chunks(STATS_CHUNK)
        .map(|chunk| {
            let mut ev = BasisEvaluator::new(bandlimit);
            let mut t = vec![0.0; j];
            let mut acc = vec![0.0; j - 1];
            for p in chunk {
                ev.eval_into(p, &mut t);
                for (a, v) in acc.iter_mut().zip(&t[1..]) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; j - 1];
    for part in partial {
        for (a, v) in total.iter_mut().zip(part) {
            *a += v;
        }
    }
    Ok(total)
}

/// Empirical moments `T̄ = (1/N) Σ T(p_i)` for degrees `1..=bandlimit`.
pub fn empirical_moments(points: &[ManifoldPoint], bandlimit: usize) -> Result<SufficientStats> {
    let Some(first) = points.first() else {
        return Err(Error::domain("empirical moments of an empty dataset"));
    };
    let manifold = first.manifold();
    let sum = basis_sums(points, manifold, bandlimit)?;
    SufficientStats::from_sum(manifold, bandlimit, points.len(), &sum)
}

/// Normalised density `exp(η·T - log Z)` on the grid of bandlimit
/// `grid_bandlimit`, with `log Z` taken from the same grid so that the
/// weighted values sum to one.
pub fn density_grid(eta: &NaturalParams, grid_bandlimit: usize) -> Result<GridFunction> {
    if grid_bandlimit <= eta.bandlimit {
        return Err(Error::domain(format!(
            "grid bandlimit {grid_bandlimit} must exceed the parameter bandlimit {}",
            eta.bandlimit
        )));
    }
    let grid = make_grid(eta.manifold, grid_bandlimit)?;
    let log_phi = synthesize(&eta.to_spectral(), &grid)?;
    let shift = log_phi.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mass: f64 = grid
        .weights()
        .iter()
        .zip(&log_phi.values)
        .map(|(w, v)| w * (v - shift).exp())
        .sum();
    let log_z = shift + mass.ln();
    let values = log_phi.values.iter().map(|v| (v - log_z).exp()).collect();
    GridFunction::new(grid, values)
}
