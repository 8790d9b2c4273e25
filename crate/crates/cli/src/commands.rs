use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use hef_core::bayes_rotation::{map_rotation, posterior as rotation_posterior, sphere_analyze};
use hef_core::data_io::{export_grid as write_grid, load_model, save_model, ModelFile};
use hef_core::expfam::{empirical_moments, log_unnormalized, moments, NaturalParams, Regularization};
use hef_core::optimize::{cross_validate, fit_map, FitConfig};
use hef_core::{Manifold, ManifoldPoint};

use crate::input::{load_grid, load_points};
use crate::{CrossvalArgs, EvalArgs, ExportArgs, FitArgs, MapArgs, ModelArgs, PairArgs};

pub enum Failure {
    /// Invalid flags, reported before any work starts.
    Usage(String),
    Run(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn check_model_args(a: &ModelArgs) -> Outcome {
    if !(a.oversample.is_finite() && a.oversample >= 1.0) {
        return usage("--oversample must be a number >= 1");
    }
    if !(a.reg.is_finite() && a.reg >= 0.0) {
        return usage("--reg must be a number >= 0");
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Outcome {
    if !(sigma.is_finite() && sigma > 0.0) {
        return usage(format!("--sigma must be positive, got {sigma}"));
    }
    Ok(())
}

fn regularization(reg: f64) -> Regularization {
    if reg > 0.0 {
        Regularization::Plancherel(reg)
    } else {
        Regularization::None
    }
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn fit(a: FitArgs) -> Outcome {
    check_model_args(&a.model)?;
    if a.bandlimit == 0 {
        return usage("--bandlimit must be at least 1");
    }
    let points = load_points(&a.input, a.model.manifold)?;
    let start = Instant::now();
    let stats = empirical_moments(&points, a.bandlimit)?;
    let cfg = FitConfig {
        max_iterations: a.max_iter,
        ..FitConfig::new(a.bandlimit)
            .with_oversample(a.model.oversample)
            .with_regularization(regularization(a.model.reg))
    };
    let result = fit_map(&stats, &cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let log_z = moments(&result.params, cfg.oversample)?.log_z;
    let train_ll: f64 = result
        .params
        .eta
        .iter()
        .zip(&stats.mean)
        .map(|(e, t)| e * t)
        .sum::<f64>()
        - log_z;
    let model = ModelFile {
        params: result.params,
        oversample: cfg.oversample,
        regularization: cfg.regularization,
    };
    if let Some(p) = &a.output {
        save_model(p, &model).with_context(|| format!("writing {}", p.display()))?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "points={}", points.len())?;
    writeln!(out, "parameters={}", model.params.len())?;
    writeln!(out, "train_ll={train_ll:.12}")?;
    writeln!(out, "iterations={}", result.iterations)?;
    writeln!(out, "converged={}", result.converged)?;
    writeln!(out, "gradient_norm={:e}", result.gradient_norm)?;
    writeln!(out, "seconds={seconds:.3}")?;
    if let Some(d) = result.diagnostic {
        eprintln!("warning: {d}");
    }
    Ok(())
}

/// Per-point log-likelihoods of `points` under `model`.
fn point_log_likelihoods(model: &ModelFile, points: &[ManifoldPoint]) -> anyhow::Result<Vec<f64>> {
    let log_z = moments(&model.params, model.oversample)?.log_z;
    points
        .iter()
        .map(|p| Ok(log_unnormalized(&model.params, p)? - log_z))
        .collect()
}

pub fn eval(a: EvalArgs) -> Outcome {
    let model = load_model(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let points = load_points(&a.input, model.params.manifold)?;
    let ll = point_log_likelihoods(&model, &points)?;
    let n = ll.len() as f64;
    let mean = ll.iter().sum::<f64>() / n;
    let std = if ll.len() > 1 {
        (ll.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut out = io::stdout().lock();
    writeln!(out, "points={}", ll.len())?;
    writeln!(out, "mean_ll={mean:.12}")?;
    writeln!(out, "std_ll={std:.12}")?;
    Ok(())
}

pub fn crossval(a: CrossvalArgs) -> Outcome {
    check_model_args(&a.model)?;
    if a.folds < 2 {
        return usage("--folds must be at least 2");
    }
    if a.bandlimit.contains(&0) {
        return usage("bandlimits must be at least 1");
    }
    let regs = if a.regs.is_empty() { vec![a.model.reg] } else { a.regs.clone() };
    if regs.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return usage("regularization strengths must be >= 0");
    }
    let points = load_points(&a.input, a.model.manifold)?;
    let template = FitConfig {
        max_iterations: a.max_iter,
        ..FitConfig::new(1).with_oversample(a.model.oversample)
    };
    let report = cross_validate(&points, a.folds, &a.bandlimit, &regs, &template, a.seed)?;

    let mut table = sink(a.output.as_deref())?;
    writeln!(table, "bandlimit\treg\tfold\ttrain_ll\ttest_ll\tseconds")?;
    for r in &report.rows {
        writeln!(
            table,
            "{}\t{:?}\t{}\t{:.12}\t{:.12}\t{:.6}",
            r.bandlimit, r.reg, r.fold, r.train_ll, r.test_ll, r.seconds
        )?;
        if !r.converged {
            eprintln!("warning: L={} reg={} fold={} did not converge", r.bandlimit, r.reg, r.fold);
        }
    }
    table.flush()?;
    drop(table);

    let mut summary: Box<dyn Write> = if a.output.is_some() {
        Box::new(io::stdout().lock())
    } else {
        Box::new(io::stderr().lock())
    };
    for s in &report.summaries {
        writeln!(
            summary,
            "bandlimit={} reg={:?} train_mean={:.6} train_std={:.6} test_mean={:.6} test_std={:.6} mean_seconds={:.3}",
            s.bandlimit, s.reg, s.train_mean, s.train_std, s.test_mean, s.test_std, s.mean_seconds
        )?;
    }
    if let Some(b) = report.best() {
        writeln!(summary, "best_bandlimit={} best_reg={:?}", b.bandlimit, b.reg)?;
    }
    Ok(())
}

fn load_prior(path: Option<&Path>) -> anyhow::Result<NaturalParams> {
    match path {
        Some(p) => {
            let m = load_model(p).with_context(|| format!("reading {}", p.display()))?;
            if m.params.manifold != Manifold::SO3 {
                return Err(anyhow!("prior model must live on so3"));
            }
            Ok(m.params)
        }
        None => Ok(NaturalParams::zeros(Manifold::SO3, 1)),
    }
}

fn pair_posterior(
    input: &[std::path::PathBuf],
    sigma: f64,
    bandlimit: Option<usize>,
    prior: Option<&Path>,
) -> anyhow::Result<NaturalParams> {
    let x = load_grid(&input[0])?;
    let y = load_grid(&input[1])?;
    for (g, p) in [(&x, &input[0]), (&y, &input[1])] {
        if g.spec.manifold() != Manifold::S2 {
            return Err(anyhow!("{} is not a sphere grid", p.display()));
        }
    }
    let l = bandlimit.unwrap_or(x.spec.bandlimit().min(y.spec.bandlimit()) - 1);
    if l == 0 {
        return Err(anyhow!("signal bandlimit must be at least 1"));
    }
    let xs = sphere_analyze(&x, l)?;
    let ys = sphere_analyze(&y, l)?;
    let prior = load_prior(prior)?;
    Ok(rotation_posterior(&prior, &xs, &ys, sigma)?)
}

fn save_posterior(path: &Path, post: NaturalParams) -> anyhow::Result<()> {
    let model = ModelFile {
        params: post,
        oversample: hef_core::expfam::DEFAULT_OVERSAMPLE,
        regularization: Regularization::None,
    };
    save_model(path, &model).with_context(|| format!("writing {}", path.display()))
}

pub fn posterior(a: PairArgs) -> Outcome {
    check_sigma(a.sigma)?;
    if a.bandlimit == Some(0) {
        return usage("--bandlimit must be at least 1");
    }
    let post = pair_posterior(&a.input, a.sigma, a.bandlimit, a.model.as_deref())?;
    match &a.output {
        Some(p) => {
            let mut out = io::stdout().lock();
            writeln!(out, "bandlimit={}", post.bandlimit)?;
            writeln!(out, "parameters={}", post.len())?;
            save_posterior(p, post)?;
        }
        None => {
            let model = ModelFile {
                params: post,
                oversample: hef_core::expfam::DEFAULT_OVERSAMPLE,
                regularization: Regularization::None,
            };
            hef_core::data_io::write_model(io::stdout().lock(), &model)?;
        }
    }
    Ok(())
}

pub fn map(a: MapArgs) -> Outcome {
    let pair = !a.input.is_empty();
    if pair {
        match a.sigma {
            Some(s) => check_sigma(s)?,
            None => return usage("--sigma is required with --input"),
        }
    } else if a.model.is_none() {
        return usage("give either two --input grids or a posterior --model");
    }
    if a.bandlimit == Some(0) {
        return usage("--bandlimit must be at least 1");
    }
    let post = if pair {
        pair_posterior(&a.input, a.sigma.unwrap(), a.bandlimit, a.model.as_deref())?
    } else {
        load_prior(a.model.as_deref())?
    };
    let b = a.grid_bandlimit.unwrap_or(2 * post.bandlimit);
    if b <= post.bandlimit {
        return usage(format!(
            "--grid-bandlimit {b} must exceed the posterior bandlimit {}",
            post.bandlimit
        ));
    }
    let est = map_rotation(&post, b, a.refine_steps)?;
    let c = est.point.coords();
    let mut out = io::stdout().lock();
    writeln!(out, "alpha={:.12}", c[0])?;
    writeln!(out, "beta={:.12}", c[1])?;
    writeln!(out, "gamma={:.12}", c[2])?;
    writeln!(out, "log_value={:.12}", est.value)?;
    writeln!(out, "grid_log_value={:.12}", est.grid_value)?;
    if let Some(p) = &a.output {
        save_posterior(p, post)?;
    }
    Ok(())
}

pub fn export_grid(a: ExportArgs) -> Outcome {
    if a.grid_bandlimit == 0 {
        return usage("--grid-bandlimit must be at least 1");
    }
    let model = load_model(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    if a.grid_bandlimit <= model.params.bandlimit {
        return usage(format!(
            "--grid-bandlimit {} must exceed the model bandlimit {}",
            a.grid_bandlimit, model.params.bandlimit
        ));
    }
    let f = hef_core::expfam::density_grid(&model.params, a.grid_bandlimit)?;
    let mut out = sink(a.output.as_deref())?;
    write_grid(&mut out, &f)?;
    Ok(())
}
