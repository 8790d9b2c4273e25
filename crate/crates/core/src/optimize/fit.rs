use log::{debug, warn};

use super::lbfgs::{inf_norm, minimize, LbfgsOptions};
use crate::error::{Error, Result};
use crate::expfam::{
    objective_and_gradient, NaturalParams, Regularization, SufficientStats, DEFAULT_OVERSAMPLE,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub bandlimit: usize,
    pub oversample: f64,
    pub regularization: Regularization,
    pub max_iterations: usize,
    /// Infinity-norm gradient tolerance.
    pub tolerance: f64,
    /// Number of correction pairs kept by L-BFGS.
    pub history: usize,
}

impl FitConfig {
    pub fn new(bandlimit: usize) -> Self {
        FitConfig {
            bandlimit,
            oversample: DEFAULT_OVERSAMPLE,
            regularization: Regularization::None,
            max_iterations: 500,
            tolerance: 1e-5,
            history: 10,
        }
    }

    pub fn with_regularization(mut self, reg: Regularization) -> Self {
        self.regularization = reg;
        self
    }

    pub fn with_oversample(mut self, oversample: f64) -> Self {
        self.oversample = oversample;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.bandlimit == 0 {
            return Err(Error::domain("bandlimit must be at least 1"));
        }
        if !(self.tolerance > 0.0) || self.history == 0 {
            return Err(Error::domain("tolerance must be positive and history at least 1"));
        }
        if !(self.oversample.is_finite() && self.oversample >= 1.0) {
            return Err(Error::domain("oversampling factor must be >= 1"));
        }
        if let Regularization::Plancherel(a) = self.regularization {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::domain("regularization strength must be >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: NaturalParams,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
    pub diagnostic: Option<String>,
}

/// MAP estimate of the natural parameters starting from the uniform density.
pub fn fit_map(stats: &SufficientStats, cfg: &FitConfig) -> Result<FitResult> {
    fit_map_from(stats, cfg, NaturalParams::zeros(stats.manifold, cfg.bandlimit))
}

/// MAP estimate starting from `init`.
pub fn fit_map_from(stats: &SufficientStats, cfg: &FitConfig, init: NaturalParams) -> Result<FitResult> {
    cfg.validate()?;
    if stats.bandlimit != cfg.bandlimit || init.bandlimit != cfg.bandlimit {
        return Err(Error::domain(format!(
            "fit bandlimit {} does not match statistics ({}) or start ({})",
            cfg.bandlimit, stats.bandlimit, init.bandlimit
        )));
    }
    if init.manifold != stats.manifold {
        return Err(Error::domain("start point and statistics live on different manifolds"));
    }
    let manifold = stats.manifold;
    let l = cfg.bandlimit;
    let precision = cfg.regularization.precision(manifold, l);
    let opts = LbfgsOptions {
        history: cfg.history,
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
        ..Default::default()
    };
    let objective = |x: &[f64]| {
        let eta = NaturalParams {
            manifold,
            bandlimit: l,
            eta: x.to_vec(),
        };
        objective_and_gradient(&eta, stats, cfg.oversample, precision.as_deref())
    };
    let out = minimize(objective, init.eta, &opts)?;
    if let Some(d) = &out.diagnostic {
        warn!("{manifold} L={l}: {d}");
    }
    debug!(
        "{manifold} L={l}: {} iterations, objective {:.6e}",
        out.iterations, out.value
    );
    Ok(FitResult {
        gradient_norm: inf_norm(&out.gradient),
        params: NaturalParams {
            manifold,
            bandlimit: l,
            eta: out.x,
        },
        objective: out.value,
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
        diagnostic: out.diagnostic,
    })
}
