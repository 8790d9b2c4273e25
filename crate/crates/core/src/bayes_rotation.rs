//! Conjugate inference over rotations from a pair of spherical signals.
//!
//! The likelihood of observing `x` given the rotated template `R(g) y` under
//! isotropic Gaussian noise is `exp(-||x̂ - U(g) ŷ||² / 2σ²)`, whose log is
//! linear in the SO(3) matrix elements. Adding it to harmonic-family natural
//! parameters therefore yields natural parameters again.

use nalgebra::{Matrix3, Vector3};
use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::expfam::{density_grid, NaturalParams};
use crate::manifold::{Manifold, ManifoldPoint};
use crate::rotation::Rotation;
use crate::special_functions::wigner::{
    apply_z_left, apply_z_right, wigner_d_all, y_generator, z_generator, z_rotation,
};
use crate::special_functions::{rotation_blocks, wigner_d};
use crate::transforms::{analyze, make_grid, synthesize, GridFunction, SpectralCoeffs};

/// Default number of refinement steps after the grid search.
pub const DEFAULT_REFINE_STEPS: usize = 10;

/// Real spherical-harmonic coefficients of a function on S², constant term
/// included.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSignal {
    pub bandlimit: usize,
    pub coeffs: Vec<f64>,
}

/// Posterior natural parameters over SO(3).
pub type PosteriorParams = NaturalParams;

impl SphericalSignal {
    pub fn new(bandlimit: usize, coeffs: Vec<f64>) -> Result<Self> {
        let want = (bandlimit + 1) * (bandlimit + 1);
        if coeffs.len() != want {
            return Err(Error::domain(format!(
                "spherical signal of bandlimit {bandlimit} needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("spherical signal coefficients must be finite"));
        }
        Ok(SphericalSignal { bandlimit, coeffs })
    }

    pub fn zeros(bandlimit: usize) -> Self {
        SphericalSignal {
            bandlimit,
            coeffs: vec![0.0; (bandlimit + 1) * (bandlimit + 1)],
        }
    }

    pub fn degree_block(&self, l: usize) -> &[f64] {
        &self.coeffs[l * l..(l + 1) * (l + 1)]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn to_spectral(&self) -> SpectralCoeffs {
        SpectralCoeffs {
            manifold: Manifold::S2,
            bandlimit: self.bandlimit,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Samples on the sphere grid of bandlimit `grid_bandlimit`.
    pub fn sample(&self, grid_bandlimit: usize) -> Result<GridFunction> {
        synthesize(&self.to_spectral(), &make_grid(Manifold::S2, grid_bandlimit)?)
    }
}

/// Coefficients of sampled sphere data up to `bandlimit`.
pub fn sphere_analyze(samples: &GridFunction, bandlimit: usize) -> Result<SphericalSignal> {
    if samples.spec.manifold() != Manifold::S2 {
        return Err(Error::domain("sphere_analyze needs samples on S2"));
    }
    let c = analyze(samples, bandlimit)?;
    Ok(SphericalSignal {
        bandlimit,
        coeffs: c.coeffs,
    })
}

/// Coefficients of the rotated signal `p -> x(g⁻¹ p)`.
pub fn rotate_spectral(x: &SphericalSignal, g: &Rotation) -> SphericalSignal {
    let (a, b, c) = g.to_euler_zyz();
    let blocks = rotation_blocks(x.bandlimit, a, b, c);
    let mut out = Vec::with_capacity(x.coeffs.len());
    for (l, u) in blocks.iter().enumerate() {
        out.extend(u.dot(&ArrayView1::from(x.degree_block(l))));
    }
    SphericalSignal {
        bandlimit: x.bandlimit,
        coeffs: out,
    }
}

/// Parameters of the density `p -> φ(g⁻¹ p)` for sphere or rotation
/// parameters. On SO(3) every degree block is multiplied by `U(g)` from the
/// left.
pub fn rotate_params(eta: &NaturalParams, g: &Rotation) -> Result<NaturalParams> {
    let (a, b, c) = g.to_euler_zyz();
    let blocks = rotation_blocks(eta.bandlimit, a, b, c);
    let full = eta.to_spectral();
    let mut out = Vec::with_capacity(full.coeffs.len());
    match eta.manifold {
        Manifold::S1 => {
            return Err(Error::domain("rotations act on S2 and SO3 parameters only"));
        }
        Manifold::S2 => {
            for (l, u) in blocks.iter().enumerate() {
                out.extend(u.dot(&ArrayView1::from(full.degree_block(l))));
            }
        }
        Manifold::SO3 => {
            for (l, u) in blocks.iter().enumerate() {
                let d = 2 * l + 1;
                let m = ArrayView2::from_shape((d, d), full.degree_block(l)).expect("block shape");
                out.extend(u.dot(&m).iter());
            }
        }
    }
    Ok(NaturalParams {
        manifold: eta.manifold,
        bandlimit: eta.bandlimit,
        eta: out[1..].to_vec(),
    })
}

/// `log N(x̂ | U(g) ŷ, σ²)` up to the Gaussian normalising constant.
pub fn pair_log_likelihood(
    x: &SphericalSignal,
    y: &SphericalSignal,
    sigma: f64,
    g: &Rotation,
) -> Result<f64> {
    check_pair(x, y, sigma)?;
    let ry = rotate_spectral(y, g);
    let d2: f64 = x.coeffs.iter().zip(&ry.coeffs).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(-d2 / (2.0 * sigma * sigma))
}

fn check_pair(x: &SphericalSignal, y: &SphericalSignal, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::domain(format!("noise level must be positive, got {sigma}")));
    }
    if x.bandlimit != y.bandlimit {
        return Err(Error::domain(format!(
            "signals have different bandlimits {} and {}",
            x.bandlimit, y.bandlimit
        )));
    }
    Ok(())
}

/// Posterior over the rotation `g` with `x = R(g) y + noise`. The returned
/// bandlimit is the larger of the prior's and the signals'.
pub fn posterior(
    prior: &NaturalParams,
    x: &SphericalSignal,
    y: &SphericalSignal,
    sigma: f64,
) -> Result<PosteriorParams> {
    if prior.manifold != Manifold::SO3 {
        return Err(Error::domain("the rotation prior must live on SO3"));
    }
    check_pair(x, y, sigma)?;
    let lx = x.bandlimit;
    let l = prior.bandlimit.max(lx);
    let mut full = prior.to_spectral().with_bandlimit(l).coeffs;
    let inv_s2 = 1.0 / (sigma * sigma);
    for deg in 1..=lx {
        let d = 2 * deg + 1;
        let off = Manifold::SO3.degree_offset(deg);
        let scale = inv_s2 / (d as f64).sqrt();
        let (xb, yb) = (x.degree_block(deg), y.degree_block(deg));
        for (m, xm) in xb.iter().enumerate() {
            for (n, yn) in yb.iter().enumerate() {
                full[off + m * d + n] += scale * xm * yn;
            }
        }
    }
    Ok(NaturalParams {
        manifold: Manifold::SO3,
        bandlimit: l,
        eta: full[1..].to_vec(),
    })
}

/// Normalised posterior density on the SO(3) grid of bandlimit `grid_bandlimit`.
pub fn posterior_grid(post: &PosteriorParams, grid_bandlimit: usize) -> Result<GridFunction> {
    if post.manifold != Manifold::SO3 {
        return Err(Error::domain("posterior parameters must live on SO3"));
    }
    density_grid(post, grid_bandlimit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEstimate {
    pub point: ManifoldPoint,
    /// Unnormalised log-density at `point`.
    pub value: f64,
    /// Best value on the search grid, before refinement.
    pub grid_value: f64,
    pub grid_index: usize,
    pub grid_point: ManifoldPoint,
}

impl MapEstimate {
    pub fn rotation(&self) -> Rotation {
        self.point.to_rotation().expect("MAP point lies on SO3")
    }
}

/// Grid arg-max of the posterior log-density followed by `refine_steps`
/// damped Newton/gradient steps in Euler coordinates.
pub fn map_rotation(
    post: &PosteriorParams,
    grid_bandlimit: usize,
    refine_steps: usize,
) -> Result<MapEstimate> {
    if post.manifold != Manifold::SO3 {
        return Err(Error::domain("posterior parameters must live on SO3"));
    }
    if grid_bandlimit <= post.bandlimit {
        return Err(Error::domain(format!(
            "search grid bandlimit {grid_bandlimit} must exceed the posterior bandlimit {}",
            post.bandlimit
        )));
    }
    let grid = make_grid(Manifold::SO3, grid_bandlimit)?;
    let f = synthesize(&post.to_spectral(), &grid)?;
    let mut best = 0;
    for (i, v) in f.values.iter().enumerate() {
        if *v > f.values[best] {
            best = i;
        }
    }
    let grid_point = grid.node(best);
    let grid_value = f.values[best];
    let obj = EulerObjective::new(post);
    let c = grid_point.coords();
    let mut q = Vector3::new(c[0], c[1], c[2]);
    let mut value = obj.value(&q);
    for _ in 0..refine_steps {
        match obj.improve(&q, value) {
            Some((nq, nv)) => {
                q = nq;
                value = nv;
            }
            None => break,
        }
    }
    Ok(MapEstimate {
        point: ManifoldPoint::rotation(q[0], q[1], q[2]),
        value: value.max(grid_value),
        grid_value,
        grid_index: best,
        grid_point,
    })
}

/// `Σ_l √(2l+1) <η_l, Dz(α) Dy(β) Dz(γ)>` with its Euler-angle derivatives.
struct EulerObjective {
    blocks: Vec<Array2<f64>>,
    az: Vec<Array2<f64>>,
    ay: Vec<Array2<f64>>,
}

impl EulerObjective {
    fn new(post: &NaturalParams) -> Self {
        let full = post.to_spectral();
        let mut blocks = Vec::new();
        let mut az = Vec::new();
        let mut ay = Vec::new();
        for l in 0..=post.bandlimit {
            let d = 2 * l + 1;
            let scale = (d as f64).sqrt();
            let b = Array2::from_shape_vec((d, d), full.degree_block(l).to_vec())
                .expect("block shape")
                * scale;
            blocks.push(b);
            az.push(z_generator(l));
            ay.push(y_generator(l));
        }
        EulerObjective { blocks, az, ay }
    }

    fn value(&self, q: &Vector3<f64>) -> f64 {
        let dys = wigner_d_all(self.blocks.len() - 1, q[1]);
        self.blocks
            .iter()
            .zip(&dys)
            .map(|(eta, dy)| {
                let u = apply_z_right(&apply_z_left(dy, q[0]), q[2]);
                (eta * &u).sum()
            })
            .sum()
    }

    /// Gradient and Hessian in `(α, β, γ)`.
    fn derivatives(&self, q: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
        let mut g = Vector3::zeros();
        let mut h = Matrix3::zeros();
        for (l, eta) in self.blocks.iter().enumerate().skip(1) {
            let p = z_rotation(l, q[0]);
            let dy = wigner_d(l, q[1]);
            let r = z_rotation(l, q[2]);
            let (az, ay) = (&self.az[l], &self.ay[l]);
            let pa = p.dot(az);
            let paa = pa.dot(az);
            let qa = dy.dot(ay);
            let qaa = qa.dot(ay);
            let ra = r.dot(az);
            let raa = ra.dot(az);
            let ip = |a: &Array2<f64>, b: &Array2<f64>, c: &Array2<f64>| -> f64 {
                (eta * &a.dot(b).dot(c)).sum()
            };
            g[0] += ip(&pa, &dy, &r);
            g[1] += ip(&p, &qa, &r);
            g[2] += ip(&p, &dy, &ra);
            h[(0, 0)] += ip(&paa, &dy, &r);
            h[(1, 1)] += ip(&p, &qaa, &r);
            h[(2, 2)] += ip(&p, &dy, &raa);
            let h01 = ip(&pa, &qa, &r);
            let h02 = ip(&pa, &dy, &ra);
            let h12 = ip(&p, &qa, &ra);
            h[(0, 1)] += h01;
            h[(1, 0)] += h01;
            h[(0, 2)] += h02;
            h[(2, 0)] += h02;
            h[(1, 2)] += h12;
            h[(2, 1)] += h12;
        }
        (g, h)
    }

    /// One ascent step, halved until the objective increases.
    fn improve(&self, q: &Vector3<f64>, value: f64) -> Option<(Vector3<f64>, f64)> {
        let (g, h) = self.derivatives(q);
        if g.norm() == 0.0 {
            return None;
        }
        // Damped Newton: shift the negated Hessian until it is positive
        // definite, which degrades gracefully to a scaled gradient step.
        let neg = -h;
        let scale = neg.norm().max(1e-12);
        let mut mu = 0.0;
        let mut step = g / scale;
        for _ in 0..30 {
            let shifted = neg + Matrix3::identity() * mu;
            if let Some(d) = shifted.cholesky().map(|c| c.solve(&g)) {
                if d.iter().all(|v| v.is_finite()) {
                    step = d;
                    break;
                }
            }
            mu = if mu == 0.0 { 1e-8 * scale } else { mu * 10.0 };
        }
        // Keep steps within a fraction of the grid scale.
        let max_len = 0.5;
        if step.norm() > max_len {
            step *= max_len / step.norm();
        }
        for _ in 0..40 {
            let cand = q + step;
            let v = self.value(&cand);
            if v > value {
                return Some((cand, v));
            }
            step *= 0.5;
        }
        None
    }
}
