//! FFT-accelerated transforms.
//!
//! Azimuthal axes (circle angle, sphere longitude, the two Euler angles about
//! z) go through length-`2B` FFTs. The polar axis is handled by dense
//! application of precomputed Legendre or Wigner-d tables, which gives
//! `O(B^3)` work on the sphere and `O(B^4)` on the rotation group.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::polar_nodes_and_weights;
use crate::manifold::Manifold;
use crate::special_functions::legendre::{triangle_index, triangle_len, LegendreRecurrence};
use crate::special_functions::wigner::wigner_d_all;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

struct FftPair {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPair {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }
}

pub(crate) struct CirclePlan {
    n: usize,
    lmax: usize,
    fft: FftPair,
}

pub(crate) struct SpherePlan {
    n: usize,
    lmax: usize,
    fft: FftPair,
    beta_weights: Vec<f64>,
    /// `P̄_l^m(cos beta_j)` at `triangle_index(lmax, l, m) * n + j`.
    legendre: Vec<f64>,
}

pub(crate) struct RotationPlan {
    n: usize,
    lmax: usize,
    fft: FftPair,
    beta_weights: Vec<f64>,
    /// Real middle-angle blocks, `wigner[j][l]`.
    wigner: Vec<Vec<Array2<f64>>>,
}

pub(crate) enum TransformPlan {
    Circle(CirclePlan),
    Sphere(SpherePlan),
    Rotation(RotationPlan),
}

impl TransformPlan {
    fn build(manifold: Manifold, bandlimit: usize, lmax: usize) -> Self {
        let n = 2 * bandlimit;
        match manifold {
            Manifold::S1 => TransformPlan::Circle(CirclePlan {
                n,
                lmax,
                fft: FftPair::new(n),
            }),
            Manifold::S2 => {
                let (beta, beta_weights) = polar_nodes_and_weights(bandlimit);
                let rec = LegendreRecurrence::new(lmax);
                let cols: Vec<Vec<f64>> = beta
                    .par_iter()
                    .map(|&b| {
                        let (s, x) = b.sin_cos();
                        rec.eval(x, s)
                    })
                    .collect();
                let mut legendre = vec![0.0; triangle_len(lmax) * n];
                for (j, col) in cols.iter().enumerate() {
                    for (t, v) in col.iter().enumerate() {
                        legendre[t * n + j] = *v;
                    }
                }
                TransformPlan::Sphere(SpherePlan {
                    n,
                    lmax,
                    fft: FftPair::new(n),
                    beta_weights,
                    legendre,
                })
            }
            Manifold::SO3 => {
                let (beta, beta_weights) = polar_nodes_and_weights(bandlimit);
                let wigner = beta.par_iter().map(|&b| wigner_d_all(lmax, b)).collect();
                TransformPlan::Rotation(RotationPlan {
                    n,
                    lmax,
                    fft: FftPair::new(n),
                    beta_weights,
                    wigner,
                })
            }
        }
    }

    fn approx_bytes(&self) -> usize {
        match self {
            TransformPlan::Circle(_) => 0,
            TransformPlan::Sphere(p) => p.legendre.len() * 8,
            TransformPlan::Rotation(p) => {
                p.wigner.len() * Manifold::SO3.num_coeffs(p.lmax) * 8
            }
        }
    }

    pub(crate) fn analyze(&self, values: &[f64]) -> Vec<f64> {
        match self {
            TransformPlan::Circle(p) => p.analyze(values),
            TransformPlan::Sphere(p) => p.analyze(values),
            TransformPlan::Rotation(p) => p.analyze(values),
        }
    }

    pub(crate) fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        match self {
            TransformPlan::Circle(p) => p.synthesize(coeffs),
            TransformPlan::Sphere(p) => p.synthesize(coeffs),
            TransformPlan::Rotation(p) => p.synthesize(coeffs),
        }
    }
}

impl CirclePlan {
    fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.fwd.process(&mut buf);
        let inv_n = 1.0 / n as f64;
        let mut out = vec![0.0; Manifold::S1.num_coeffs(self.lmax)];
        out[0] = buf[0].re * inv_n;
        for l in 1..=self.lmax {
            out[2 * l - 1] = SQRT_2 * buf[l].re * inv_n;
            out[2 * l] = -SQRT_2 * buf[l].im * inv_n;
        }
        out
    }

    fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        buf[0] = Complex64::new(coeffs[0], 0.0);
        for l in 1..=self.lmax {
            buf[l] = Complex64::new(SQRT_2 * coeffs[2 * l - 1], -SQRT_2 * coeffs[2 * l]);
        }
        self.fft.inv.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }
}

impl SpherePlan {
    #[inline]
    fn table(&self, l: usize, m: usize) -> &[f64] {
        let t = triangle_index(self.lmax, l, m) * self.n;
        &self.legendre[t..t + self.n]
    }

    fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let (n, lmax) = (self.n, self.lmax);
        // Row spectra, stored m-major: spectra[m * n + j].
        let rows: Vec<Vec<Complex64>> = values
            .par_chunks(n)
            .map(|row| {
                let mut buf: Vec<Complex64> =
                    row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                self.fft.fwd.process(&mut buf);
                buf.truncate(lmax + 1);
                buf
            })
            .collect();
        let inv_n = 1.0 / n as f64;
        let per_m: Vec<Vec<(f64, f64)>> = (0..=lmax)
            .into_par_iter()
            .map(|m| {
                let re: Vec<f64> = (0..n)
                    .map(|j| self.beta_weights[j] * rows[j][m].re * inv_n)
                    .collect();
                let im: Vec<f64> = (0..n)
                    .map(|j| self.beta_weights[j] * rows[j][m].im * inv_n)
                    .collect();
                (m..=lmax)
                    .map(|l| {
                        let p = self.table(l, m);
                        let a: f64 = p.iter().zip(&re).map(|(x, y)| x * y).sum();
                        let b: f64 = p.iter().zip(&im).map(|(x, y)| x * y).sum();
                        (a, b)
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; Manifold::S2.num_coeffs(lmax)];
        for (m, vals) in per_m.iter().enumerate() {
            for (k, &(a, b)) in vals.iter().enumerate() {
                let l = m + k;
                let centre = l * l + l;
                if m == 0 {
                    out[centre] = a;
                } else {
                    out[centre + m] = SQRT_2 * a;
                    out[centre - m] = -SQRT_2 * b;
                }
            }
        }
        out
    }

    fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let (n, lmax) = (self.n, self.lmax);
        // Azimuthal amplitudes per order, across all rows.
        let amps: Vec<Vec<Complex64>> = (0..=lmax)
            .into_par_iter()
            .map(|m| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for l in m..=lmax {
                    let centre = l * l + l;
                    let c = if m == 0 {
                        Complex64::new(coeffs[centre], 0.0)
                    } else {
                        Complex64::new(SQRT_2 * coeffs[centre + m], -SQRT_2 * coeffs[centre - m])
                    };
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    for (a, p) in acc.iter_mut().zip(self.table(l, m)) {
                        *a += c * p;
                    }
                }
                acc
            })
            .collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                for m in 0..=lmax {
                    buf[m] = amps[m][j];
                }
                self.fft.inv.process(&mut buf);
                buf.iter().map(|c| c.re).collect()
            })
            .collect();
        rows.concat()
    }
}

#[derive(Clone, Copy)]
enum Trig {
    Cos = 0,
    Sin = 1,
}

/// Non-zero entries of row `m` of `Dz(a)`: `(column, sign, trig)` so that the
/// entry is `sign * trig(|m| a)`.
fn z_row_terms(m: i64) -> ([(i64, f64, Trig); 2], usize) {
    let k = m.abs();
    if m > 0 {
        ([(m, 1.0, Trig::Cos), (-m, -1.0, Trig::Sin)], 2)
    } else if m < 0 {
        ([(m, 1.0, Trig::Cos), (k, 1.0, Trig::Sin)], 2)
    } else {
        ([(0, 1.0, Trig::Cos), (0, 0.0, Trig::Cos)], 1)
    }
}

/// Non-zero entries of column `n` of `Dz(g)`: `(row, sign, trig)`.
fn z_col_terms(n: i64) -> ([(i64, f64, Trig); 2], usize) {
    let k = n.abs();
    if n > 0 {
        ([(n, 1.0, Trig::Cos), (-n, 1.0, Trig::Sin)], 2)
    } else if n < 0 {
        ([(n, 1.0, Trig::Cos), (k, -1.0, Trig::Sin)], 2)
    } else {
        ([(0, 1.0, Trig::Cos), (0, 0.0, Trig::Cos)], 1)
    }
}

/// Separable trigonometric moments of one polar slice:
/// `moments[a][g][p * (lmax+1) + q] = sum f * a(p alpha) * g(q gamma)`.
type TrigMoments = [[Vec<f64>; 2]; 2];

impl RotationPlan {
    fn fft2(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let fft = if inverse { &self.fft.inv } else { &self.fft.fwd };
        // rows: gamma axis
        fft.process(buf);
        // columns: alpha axis
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            for i in 0..n {
                col[i] = buf[i * n + k];
            }
            fft.process(&mut col);
            for i in 0..n {
                buf[i * n + k] = col[i];
            }
        }
    }

    fn slice_moments(&self, values: &[f64], j: usize) -> TrigMoments {
        let (n, lmax) = (self.n, self.lmax);
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                buf[i * n + k] = Complex64::new(values[(i * n + j) * n + k], 0.0);
            }
        }
        self.fft2(&mut buf, false);
        let w = lmax + 1;
        let mut mom: TrigMoments = Default::default();
        for row in mom.iter_mut() {
            for v in row.iter_mut() {
                *v = vec![0.0; w * w];
            }
        }
        for p in 0..=lmax {
            for q in 0..=lmax {
                let plus = buf[p * n + q];
                let minus = buf[p * n + (n - q) % n];
                let t = p * w + q;
                mom[0][0][t] = 0.5 * (plus.re + minus.re);
                mom[1][1][t] = 0.5 * (minus.re - plus.re);
                mom[1][0][t] = -0.5 * (plus.im + minus.im);
                mom[0][1][t] = 0.5 * (minus.im - plus.im);
            }
        }
        mom
    }

    fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let (n, lmax) = (self.n, self.lmax);
        let w = lmax + 1;
        let slices: Vec<TrigMoments> = (0..n)
            .into_par_iter()
            .map(|j| self.slice_moments(values, j))
            .collect();
        let scale = 1.0 / (n * n) as f64;
        let blocks: Vec<Vec<f64>> = (0..=lmax)
            .into_par_iter()
            .map(|l| {
                let li = l as i64;
                let d = 2 * l + 1;
                let mut block = vec![0.0; d * d];
                for (j, mom) in slices.iter().enumerate() {
                    let dy = &self.wigner[j][l];
                    let wj = self.beta_weights[j] * scale;
                    for m in -li..=li {
                        let (rt, rn) = z_row_terms(m);
                        for n_ in -li..=li {
                            let (ct, cn) = z_col_terms(n_);
                            let t = (m.unsigned_abs() as usize) * w + n_.unsigned_abs() as usize;
                            let mut acc = 0.0;
                            for &(mp, sa, ka) in &rt[..rn] {
                                for &(np, sg, kg) in &ct[..cn] {
                                    acc += sa
                                        * sg
                                        * dy[[(mp + li) as usize, (np + li) as usize]]
                                        * mom[ka as usize][kg as usize][t];
                                }
                            }
                            block[(m + li) as usize * d + (n_ + li) as usize] += wj * acc;
                        }
                    }
                }
                let s = (d as f64).sqrt();
                block.iter_mut().for_each(|v| *v *= s);
                block
            })
            .collect();
        blocks.concat()
    }

    fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let (n, lmax) = (self.n, self.lmax);
        let w = lmax + 1;
        let slices: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut mom: TrigMoments = Default::default();
                for row in mom.iter_mut() {
                    for v in row.iter_mut() {
                        *v = vec![0.0; w * w];
                    }
                }
                for l in 0..=lmax {
                    let li = l as i64;
                    let d = 2 * l + 1;
                    let off = Manifold::SO3.degree_offset(l);
                    let s = (d as f64).sqrt();
                    let dy = &self.wigner[j][l];
                    for m in -li..=li {
                        let (rt, rn) = z_row_terms(m);
                        for n_ in -li..=li {
                            let c = coeffs[off + (m + li) as usize * d + (n_ + li) as usize];
                            if c == 0.0 {
                                continue;
                            }
                            let (ct, cn) = z_col_terms(n_);
                            let t = (m.unsigned_abs() as usize) * w + n_.unsigned_abs() as usize;
                            for &(mp, sa, ka) in &rt[..rn] {
                                for &(np, sg, kg) in &ct[..cn] {
                                    mom[ka as usize][kg as usize][t] += s
                                        * c
                                        * sa
                                        * sg
                                        * dy[[(mp + li) as usize, (np + li) as usize]];
                                }
                            }
                        }
                    }
                }
                let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
                for p in 0..=lmax {
                    for q in 0..=lmax {
                        let t = p * w + q;
                        let (cc, ss) = (mom[0][0][t], mom[1][1][t]);
                        let (sc, cs) = (mom[1][0][t], mom[0][1][t]);
                        buf[p * n + q] += Complex64::new(0.5 * (cc - ss), -0.5 * (sc + cs));
                        buf[p * n + (n - q) % n] +=
                            Complex64::new(0.5 * (cc + ss), 0.5 * (cs - sc));
                    }
                }
                self.fft2(&mut buf, true);
                buf.iter().map(|c| c.re).collect()
            })
            .collect();
        let mut out = vec![0.0; n * n * n];
        for (j, slice) in slices.iter().enumerate() {
            for i in 0..n {
                for k in 0..n {
                    out[(i * n + j) * n + k] = slice[i * n + k];
                }
            }
        }
        out
    }
}

type PlanKey = (Manifold, usize, usize);

struct PlanCache {
    capacity: usize,
    order: VecDeque<PlanKey>,
    plans: HashMap<PlanKey, Arc<TransformPlan>>,
}

fn cache() -> &'static Mutex<PlanCache> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            capacity: 16,
            order: VecDeque::new(),
            plans: HashMap::new(),
        })
    })
}

/// Bound the number of cached transform plans. Zero disables caching.
pub fn set_plan_cache_capacity(capacity: usize) {
    let mut c = cache().lock().unwrap();
    c.capacity = capacity;
    while c.order.len() > capacity {
        if let Some(k) = c.order.pop_front() {
            c.plans.remove(&k);
        }
    }
}

/// Total table memory currently held by the plan cache, in bytes.
pub fn plan_cache_bytes() -> usize {
    let c = cache().lock().unwrap();
    c.plans.values().map(|p| p.approx_bytes()).sum()
}

pub(crate) fn plan(manifold: Manifold, bandlimit: usize, lmax: usize) -> Arc<TransformPlan> {
    let key = (manifold, bandlimit, lmax);
    if let Some(p) = cache().lock().unwrap().plans.get(&key) {
        return p.clone();
    }
    // Built outside the lock; a concurrent builder of the same key produces an
    // identical plan and the first insert wins.
    let built = Arc::new(TransformPlan::build(manifold, bandlimit, lmax));
    let mut c = cache().lock().unwrap();
    if c.capacity == 0 {
        return built;
    }
    if let Some(p) = c.plans.get(&key) {
        return p.clone();
    }
    while c.order.len() >= c.capacity {
        if let Some(k) = c.order.pop_front() {
            c.plans.remove(&k);
        }
    }
    c.order.push_back(key);
    c.plans.insert(key, built.clone());
    built
}
