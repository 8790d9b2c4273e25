//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub history: usize,
    pub max_iterations: usize,
    /// Stop when the gradient infinity norm falls to this value.
    pub tolerance: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            history: 10,
            max_iterations: 500,
            tolerance: 1e-5,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start and after every accepted step.
    pub trace: Vec<f64>,
    pub diagnostic: Option<String>,
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn checked<F>(f: &mut F, x: &[f64]) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let (v, g) = f(x)?;
    if v.is_nan() || g.iter().any(|x| x.is_nan()) {
        return Err(Error::Optimizer("objective or gradient evaluated to NaN".into()));
    }
    Ok((v, g))
}

struct Probe {
    t: f64,
    f: f64,
    d: f64,
    g: Vec<f64>,
}

/// Minimiser of the cubic through two points with known slopes, clamped to
/// the interval; falls back to bisection when the cubic is degenerate.
fn cubic_step(lo: &Probe, hi: &Probe) -> f64 {
    let (a, b) = if lo.t < hi.t { (lo, hi) } else { (hi, lo) };
    let d1 = a.d + b.d - 3.0 * (a.f - b.f) / (a.t - b.t);
    let disc = d1 * d1 - a.d * b.d;
    let mid = 0.5 * (a.t + b.t);
    if disc < 0.0 || !disc.is_finite() {
        return mid;
    }
    let d2 = disc.sqrt();
    let t = b.t - (b.t - a.t) * (b.d + d2 - d1) / (b.d - a.d + 2.0 * d2);
    let width = b.t - a.t;
    if !t.is_finite() || t < a.t + 0.1 * width || t > b.t - 0.1 * width {
        mid
    } else {
        t
    }
}

/// Minimises `f`, which returns the value and gradient at a point.
pub fn minimize<F>(mut f: F, x0: Vec<f64>, opts: &LbfgsOptions) -> Result<LbfgsOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    if opts.history == 0 || !(opts.tolerance > 0.0) {
        return Err(Error::domain("L-BFGS needs history >= 1 and tolerance > 0"));
    }
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = checked(&mut f, &x)?;
    let mut trace = vec![fx];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.history);
    let mut iterations = 0;
    let mut diagnostic = None;

    while inf_norm(&g) > opts.tolerance {
        if iterations >= opts.max_iterations {
            diagnostic = Some(format!("iteration cap {} reached", opts.max_iterations));
            break;
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = match mem.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / inf_norm(&g).max(1.0),
        };
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut d0 = dot(&g, &dir);
        if !(d0 < 0.0) {
            mem.clear();
            dir = g.iter().map(|v| -v).collect();
            d0 = -dot(&g, &g);
        }

        match line_search(&mut f, &x, fx, d0, &dir, opts)? {
            Some(p) => {
                let s: Vec<f64> = dir.iter().map(|d| p.t * d).collect();
                let y: Vec<f64> = p.g.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                for (xi, si) in x.iter_mut().zip(&s) {
                    *xi += si;
                }
                fx = p.f;
                g = p.g;
                trace.push(fx);
                if sy > 1e-300 {
                    if mem.len() == opts.history {
                        mem.pop_front();
                    }
                    mem.push_back((s, y, 1.0 / sy));
                }
                iterations += 1;
            }
            None => {
                diagnostic = Some(format!(
                    "line search failed at iteration {iterations} with gradient norm {:e}",
                    inf_norm(&g)
                ));
                break;
            }
        }
    }
    debug_assert_eq!(x.len(), n);
    let converged = inf_norm(&g) <= opts.tolerance;
    Ok(LbfgsOutcome {
        x,
        value: fx,
        gradient: g,
        iterations,
        converged,
        trace,
        diagnostic,
    })
}

fn line_search<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    d0: f64,
    dir: &[f64],
    opts: &LbfgsOptions,
) -> Result<Option<Probe>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut eval = |t: f64| -> Result<Probe> {
        let xt: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let (fv, g) = checked(f, &xt)?;
        let d = dot(&g, dir);
        Ok(Probe { t, f: fv, d, g })
    };
    let origin = Probe {
        t: 0.0,
        f: f0,
        d: d0,
        g: Vec::new(),
    };
    let sufficient = |p: &Probe| p.f <= f0 + opts.c1 * p.t * d0;
    let curvature = |p: &Probe| p.d.abs() <= -opts.c2 * d0;

    let mut prev = origin;
    let mut t = 1.0;
    let mut evals = 0;
    // Bracketing phase.
    let (mut lo, mut hi) = loop {
        if evals >= opts.max_line_search {
            return Ok(None);
        }
        let p = eval(t)?;
        evals += 1;
        if !p.f.is_finite() {
            // Overshot into overflow territory: shrink towards the last good point.
            t = 0.5 * (prev.t + t);
            continue;
        }
        if !sufficient(&p) || (evals > 1 && p.f >= prev.f) {
            break (prev, p);
        }
        if curvature(&p) {
            return Ok(Some(p));
        }
        if p.d >= 0.0 {
            break (p, prev);
        }
        t = 2.0 * p.t;
        prev = p;
    };
    // Zoom phase.
    while evals < opts.max_line_search {
        let t = cubic_step(&lo, &hi);
        if (hi.t - lo.t).abs() < 1e-16 * lo.t.abs().max(1.0) {
            break;
        }
        let p = eval(t)?;
        evals += 1;
        if !p.f.is_finite() || !sufficient(&p) || p.f >= lo.f {
            hi = p;
        } else {
            if curvature(&p) {
                return Ok(Some(p));
            }
            if p.d * (hi.t - lo.t) >= 0.0 {
                hi = lo;
            }
            lo = p;
        }
    }
    // Accept a point with sufficient decrease even if curvature failed.
    if lo.t > 0.0 && lo.f < f0 {
        return Ok(Some(lo));
    }
    Ok(None)
}
