//! Evaluation of the real, L2-normalised matrix-element bases.
//!
//! Under the normalised invariant measure (total mass one) every basis
//! function has unit mean square:
//!
//! * circle: `1, √2 cos(lθ), √2 sin(lθ)`;
//! * sphere: `P̄_l^{|m|}(cos β)` times `1`, `√2 cos(mφ)` or `√2 sin(|m|φ)`;
//! * rotations: `√(2l+1) U^l_{mn}(α, β, γ)` with `U^l` the real orthogonal
//!   representation block.

use ndarray::Array2;

use super::legendre::{normalized_legendre, triangle_index, LegendreRecurrence};
use super::wigner::{rotation_block, rotation_blocks};
use crate::error::{Error, Result};
use crate::manifold::{BasisIndex, Manifold, ManifoldPoint};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Value of one basis function at one point.
pub fn eval_basis(idx: &BasisIndex, p: &ManifoldPoint) -> Result<f64> {
    idx.validate()?;
    if idx.manifold != p.manifold() {
        return Err(Error::domain(format!(
            "basis function on {} evaluated at a point on {}",
            idx.manifold,
            p.manifold()
        )));
    }
    let l = idx.degree;
    Ok(match *p {
        ManifoldPoint::S1 { theta } => {
            if l == 0 {
                1.0
            } else if idx.m > 0 {
                SQRT_2 * (l as f64 * theta).cos()
            } else {
                SQRT_2 * (l as f64 * theta).sin()
            }
        }
        ManifoldPoint::S2 { beta, phi } => {
            let k = idx.m.unsigned_abs() as usize;
            let p = normalized_legendre(l, k, beta);
            match idx.m.signum() {
                0 => p,
                1 => SQRT_2 * p * (k as f64 * phi).cos(),
                _ => SQRT_2 * p * (k as f64 * phi).sin(),
            }
        }
        ManifoldPoint::SO3 { alpha, beta, gamma } => {
            let u = rotation_block(l, alpha, beta, gamma);
            let li = l as i32;
            ((2 * l + 1) as f64).sqrt() * u[[(idx.m + li) as usize, (idx.n + li) as usize]]
        }
    })
}

/// Reusable evaluator of every basis function up to a fixed degree. Holds the
/// Legendre recurrence coefficients so repeated sphere evaluations skip their
/// setup.
#[derive(Debug, Clone)]
pub struct BasisEvaluator {
    lmax: usize,
    rec: LegendreRecurrence,
    leg: Vec<f64>,
}

impl BasisEvaluator {
    pub fn new(lmax: usize) -> Self {
        let rec = LegendreRecurrence::new(lmax);
        let leg = vec![0.0; super::legendre::triangle_len(lmax)];
        BasisEvaluator { lmax, rec, leg }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Fill `out` (length `num_coeffs(lmax)`) in canonical order.
    pub fn eval_into(&mut self, p: &ManifoldPoint, out: &mut [f64]) {
        let lmax = self.lmax;
        let manifold = p.manifold();
        assert_eq!(out.len(), manifold.num_coeffs(lmax));
        match *p {
            ManifoldPoint::S1 { theta } => {
                out[0] = 1.0;
                for l in 1..=lmax {
                    let (s, c) = (l as f64 * theta).sin_cos();
                    out[2 * l - 1] = SQRT_2 * c;
                    out[2 * l] = SQRT_2 * s;
                }
            }
            ManifoldPoint::S2 { beta, phi } => {
                let (s, x) = beta.sin_cos();
                self.rec.eval_into(x, s.abs(), &mut self.leg);
                fill_sphere(lmax, &self.leg, phi, out);
            }
            ManifoldPoint::SO3 { alpha, beta, gamma } => {
                let blocks = rotation_blocks(lmax, alpha, beta, gamma);
                for (l, u) in blocks.iter().enumerate() {
                    let off = manifold.degree_offset(l);
                    let scale = ((2 * l + 1) as f64).sqrt();
                    for (k, v) in u.iter().enumerate() {
                        out[off + k] = scale * v;
                    }
                }
            }
        }
    }
}

/// Values of every basis function of degree `<= lmax` at `p`, in canonical
/// order. `out` must have length `manifold.num_coeffs(lmax)`.
pub fn eval_all_into(lmax: usize, p: &ManifoldPoint, out: &mut [f64]) {
    BasisEvaluator::new(lmax).eval_into(p, out);
}

fn fill_sphere(lmax: usize, leg: &[f64], phi: f64, out: &mut [f64]) {
    let trig: Vec<(f64, f64)> = (0..=lmax).map(|k| (k as f64 * phi).sin_cos()).collect();
    for l in 0..=lmax {
        let centre = l * l + l;
        out[centre] = leg[triangle_index(lmax, l, 0)];
        for k in 1..=l {
            let p = SQRT_2 * leg[triangle_index(lmax, l, k)];
            let (s, c) = trig[k];
            out[centre + k] = p * c;
            out[centre - k] = p * s;
        }
    }
}

/// Convenience wrapper around [`eval_all_into`].
pub fn eval_all(lmax: usize, p: &ManifoldPoint) -> Vec<f64> {
    let mut out = vec![0.0; p.manifold().num_coeffs(lmax)];
    eval_all_into(lmax, p, &mut out);
    out
}

/// Basis functions of one degree evaluated at many points: one row per point,
/// columns in canonical order within the degree.
pub fn eval_basis_block(l: usize, points: &[ManifoldPoint]) -> Result<Array2<f64>> {
    let Some(first) = points.first() else {
        return Ok(Array2::zeros((0, 0)));
    };
    let manifold = first.manifold();
    if points.iter().any(|p| p.manifold() != manifold) {
        return Err(Error::domain("points lie on different manifolds"));
    }
    let width = manifold.degree_size(l);
    let mut out = Array2::zeros((points.len(), width));
    match manifold {
        Manifold::S1 | Manifold::SO3 => {
            for (row, p) in points.iter().enumerate() {
                match *p {
                    ManifoldPoint::S1 { theta } => {
                        if l == 0 {
                            out[[row, 0]] = 1.0;
                        } else {
                            let (s, c) = (l as f64 * theta).sin_cos();
                            out[[row, 0]] = SQRT_2 * c;
                            out[[row, 1]] = SQRT_2 * s;
                        }
                    }
                    ManifoldPoint::SO3 { alpha, beta, gamma } => {
                        let u = rotation_block(l, alpha, beta, gamma);
                        let scale = ((2 * l + 1) as f64).sqrt();
                        for (k, v) in u.iter().enumerate() {
                            out[[row, k]] = scale * v;
                        }
                    }
                    ManifoldPoint::S2 { .. } => unreachable!(),
                }
            }
        }
        Manifold::S2 => {
            let rec = LegendreRecurrence::new(l);
            let mut leg = vec![0.0; super::legendre::triangle_len(l)];
            for (row, p) in points.iter().enumerate() {
                let ManifoldPoint::S2 { beta, phi } = *p else {
                    unreachable!()
                };
                let (s, x) = beta.sin_cos();
                rec.eval_into(x, s.abs(), &mut leg);
                out[[row, l]] = leg[triangle_index(l, l, 0)];
                for k in 1..=l {
                    let v = SQRT_2 * leg[triangle_index(l, l, k)];
                    let (sk, ck) = (k as f64 * phi).sin_cos();
                    out[[row, l + k]] = v * ck;
                    out[[row, l - k]] = v * sk;
                }
            }
        }
    }
    Ok(out)
}
