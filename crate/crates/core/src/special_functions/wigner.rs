//! Wigner small-d matrices and their real-basis counterparts.
//!
//! Complex-basis elements follow `d^l_{m'm}(beta) = <l m'| exp(-i beta J_y) |l m>`
//! and are produced by the three-term recurrence in `l` at fixed `(m', m)`,
//! seeded from the closed-form edge elements evaluated in log space. The real
//! blocks act on real spherical harmonics (cosine for `m > 0`, sine for
//! `m < 0`, no Condon-Shortley phase) and satisfy `y(R p) = D(R) y(p)`.

use std::f64::consts::PI;

use ndarray::Array2;

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// `base^exp` for a non-negative base computed in log space; `0^0 = 1`.
#[inline]
fn ln_pow(ln_base: f64, exp: i64) -> f64 {
    if exp == 0 {
        0.0
    } else {
        exp as f64 * ln_base
    }
}

struct EdgeSeeds {
    lnf: Vec<f64>,
    ln_c: f64,
    ln_s: f64,
}

impl EdgeSeeds {
    fn new(lmax: usize, beta: f64) -> Self {
        let (s, c) = (0.5 * beta).sin_cos();
        EdgeSeeds {
            lnf: ln_factorials(2 * lmax + 1),
            ln_c: c.abs().ln(),
            ln_s: s.abs().ln(),
        }
    }

    /// `sqrt(C(2j, j + k)) c^a s^b`.
    fn term(&self, j: i64, k: i64, a: i64, b: i64) -> f64 {
        let f = &self.lnf;
        let ln_binom = f[(2 * j) as usize] - f[(j + k) as usize] - f[(j - k) as usize];
        (0.5 * ln_binom + ln_pow(self.ln_c, a) + ln_pow(self.ln_s, b)).exp()
    }

    /// `d^j_{mp,m}` where `j = max(|mp|, |m|)`.
    fn seed(&self, mp: i64, m: i64) -> f64 {
        let j = mp.abs().max(m.abs());
        let sign = |e: i64| if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        if mp == j {
            sign(j - m) * self.term(j, m, j + m, j - m)
        } else if mp == -j {
            self.term(j, -m, j - m, j + m)
        } else if m == j {
            self.term(j, mp, j + mp, j - mp)
        } else {
            sign(j + mp) * self.term(j, -mp, j - mp, j + mp)
        }
    }
}

/// Walk the degree recurrence for fixed `(mp, m)` from the seed degree up to
/// `lmax`, handing each value to `sink(l, value)`.
fn recur_degrees(
    seeds: &EdgeSeeds,
    cb: f64,
    mp: i64,
    m: i64,
    lmax: i64,
    mut sink: impl FnMut(i64, f64),
) {
    let l0 = mp.abs().max(m.abs());
    if l0 > lmax {
        return;
    }
    let mut prev = 0.0;
    let mut cur = seeds.seed(mp, m);
    sink(l0, cur);
    let (mf, mpf) = (m as f64, mp as f64);
    for j in l0..lmax {
        let next = if j == 0 {
            cb
        } else {
            let jf = j as f64;
            let j1 = jf + 1.0;
            let norm = jf * ((j1 * j1 - mf * mf) * (j1 * j1 - mpf * mpf)).sqrt();
            let lower = ((jf * jf - mf * mf) * (jf * jf - mpf * mpf)).sqrt();
            ((2.0 * jf + 1.0) * (jf * j1 * cb - mf * mpf) * cur - j1 * lower * prev) / norm
        };
        prev = cur;
        cur = next;
        sink(j + 1, cur);
    }
}

/// Single complex-basis element `d^l_{mp,m}(beta)`.
pub fn wigner_small_d(l: usize, mp: i32, m: i32, beta: f64) -> f64 {
    let (beta, flip) = fold_beta(beta);
    let (mp, m) = if flip { (m, mp) } else { (mp, m) };
    let li = l as i64;
    let (mp, m) = (mp as i64, m as i64);
    assert!(mp.abs() <= li && m.abs() <= li, "order out of range");
    let seeds = EdgeSeeds::new(l, beta);
    let mut out = 0.0;
    recur_degrees(&seeds, beta.cos(), mp, m, li, |j, v| {
        if j == li {
            out = v;
        }
    });
    out
}

/// Complex-basis blocks `d^l(beta)` for every `l <= lmax`, indexed
/// `[mp + l, m + l]`.
pub fn wigner_small_d_all(lmax: usize, beta: f64) -> Vec<Array2<f64>> {
    let (beta, flip) = fold_beta(beta);
    let mut out: Vec<Array2<f64>> = (0..=lmax)
        .map(|l| Array2::zeros((2 * l + 1, 2 * l + 1)))
        .collect();
    let seeds = EdgeSeeds::new(lmax, beta);
    let cb = beta.cos();
    let li = lmax as i64;
    for mp in -li..=li {
        for m in -li..=li {
            recur_degrees(&seeds, cb, mp, m, li, |j, v| {
                out[j as usize][[(mp + j) as usize, (m + j) as usize]] = v;
            });
        }
    }
    if flip {
        out.iter_mut().for_each(|b| *b = b.t().to_owned());
    }
    out
}

/// Reduces `beta` to `[0, pi]`. Since `d(beta + 2 pi) = d(beta)` and
/// `d(-beta) = d(beta)^T`, the flag says whether to transpose.
fn fold_beta(beta: f64) -> (f64, bool) {
    let b = crate::manifold::wrap_angle(beta + PI) - PI;
    if b < 0.0 {
        (-b, true)
    } else {
        (b, false)
    }
}

#[inline]
fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Change a complex-basis block with the small-d symmetries into the real
/// spherical-harmonic basis. Both blocks are indexed `[row + l, col + l]`.
pub fn real_from_complex(d: &Array2<f64>) -> Array2<f64> {
    let l = (d.nrows() as i64 - 1) / 2;
    let at = |mp: i64, m: i64| d[[(mp + l) as usize, (m + l) as usize]];
    let idx = |k: i64| (k + l) as usize;
    let mut r = Array2::zeros(d.dim());
    r[[idx(0), idx(0)]] = at(0, 0);
    let s2 = std::f64::consts::SQRT_2;
    for p in 1..=l {
        r[[idx(p), idx(0)]] = s2 * parity(p) * at(p, 0);
        r[[idx(0), idx(p)]] = s2 * parity(p) * at(0, p);
        for q in 1..=l {
            let a = parity(p + q) * at(p, q);
            let b = parity(p) * at(p, -q);
            r[[idx(p), idx(q)]] = a + b;
            r[[idx(-p), idx(-q)]] = a - b;
        }
    }
    r
}

/// Real middle-angle factor of degree `l`: the orthogonal matrix representing
/// `Ry(beta)` on real spherical harmonics of degree `l`.
pub fn wigner_d(l: usize, beta: f64) -> Array2<f64> {
    let (beta, flip) = fold_beta(beta);
    let li = l as i64;
    let seeds = EdgeSeeds::new(l, beta);
    let cb = beta.cos();
    let mut d = Array2::zeros((2 * l + 1, 2 * l + 1));
    // Only the elements with mp >= 0 enter the real block.
    for mp in 0..=li {
        for m in -li..=li {
            recur_degrees(&seeds, cb, mp, m, li, |j, v| {
                if j == li {
                    d[[(mp + li) as usize, (m + li) as usize]] = v;
                }
            });
        }
    }
    let r = real_from_complex(&d);
    if flip {
        r.t().to_owned()
    } else {
        r
    }
}

/// Real middle-angle factors for every degree `l <= lmax`.
pub fn wigner_d_all(lmax: usize, beta: f64) -> Vec<Array2<f64>> {
    let (b, flip) = fold_beta(beta);
    wigner_small_d_all(lmax, b)
        .iter()
        .map(|d| {
            let r = real_from_complex(d);
            if flip {
                r.t().to_owned()
            } else {
                r
            }
        })
        .collect()
}

/// Real block of a rotation about the z axis: `y(Rz(a) p) = Dz(a) y(p)`.
/// Only entries `(m, m)` and `(m, -m)` are non-zero.
pub fn z_rotation_entries(m: i64, a: f64) -> [(i64, f64); 2] {
    let k = m.abs();
    let (s, c) = (k as f64 * a).sin_cos();
    if m > 0 {
        [(m, c), (-m, -s)]
    } else if m < 0 {
        [(m, c), (k, s)]
    } else {
        [(0, 1.0), (0, 0.0)]
    }
}

/// Dense `Dz(a)` of degree `l`.
pub fn z_rotation(l: usize, a: f64) -> Array2<f64> {
    let li = l as i64;
    let mut r = Array2::zeros((2 * l + 1, 2 * l + 1));
    for m in -li..=li {
        for (col, v) in z_rotation_entries(m, a) {
            r[[(m + li) as usize, (col + li) as usize]] += v;
        }
    }
    r
}

/// Multiply `Dz(a)` on the left of `block` in place of a dense product.
pub(crate) fn apply_z_left(block: &Array2<f64>, a: f64) -> Array2<f64> {
    let l = (block.nrows() as i64 - 1) / 2;
    let mut out = Array2::zeros(block.dim());
    for m in -l..=l {
        for (col, v) in z_rotation_entries(m, a) {
            if v == 0.0 {
                continue;
            }
            let src = block.row((col + l) as usize);
            out.row_mut((m + l) as usize).scaled_add(v, &src);
        }
    }
    out
}

/// Multiply `Dz(g)` on the right of `block`.
pub(crate) fn apply_z_right(block: &Array2<f64>, g: f64) -> Array2<f64> {
    let l = (block.nrows() as i64 - 1) / 2;
    let mut out = Array2::zeros(block.dim());
    // (B Dz)[:, n] = sum_k B[:, k] Dz[k, n]
    for k in -l..=l {
        for (n, v) in z_rotation_entries(k, g) {
            if v == 0.0 {
                continue;
            }
            let src = block.column((k + l) as usize);
            out.column_mut((n + l) as usize).scaled_add(v, &src);
        }
    }
    out
}

/// Real orthogonal representation block `U^l(g) = Dz(alpha) Dy(beta) Dz(gamma)`.
pub fn rotation_block(l: usize, alpha: f64, beta: f64, gamma: f64) -> Array2<f64> {
    apply_z_right(&apply_z_left(&wigner_d(l, beta), alpha), gamma)
}

/// Representation blocks of every degree `l <= lmax` at one group element.
pub fn rotation_blocks(lmax: usize, alpha: f64, beta: f64, gamma: f64) -> Vec<Array2<f64>> {
    wigner_d_all(lmax, beta)
        .iter()
        .map(|dy| apply_z_right(&apply_z_left(dy, alpha), gamma))
        .collect()
}

/// Generator of y-rotations in the real basis: `d/dbeta Dy(beta) = Dy(beta) Ay`.
pub fn y_generator(l: usize) -> Array2<f64> {
    let li = l as i64;
    let mut d = Array2::zeros((2 * l + 1, 2 * l + 1));
    for m in -li..=li {
        let mf = m as f64;
        let lf = l as f64;
        if m < li {
            d[[(m + 1 + li) as usize, (m + li) as usize]] =
                -0.5 * ((lf - mf) * (lf + mf + 1.0)).sqrt();
        }
        if m > -li {
            d[[(m - 1 + li) as usize, (m + li) as usize]] =
                0.5 * ((lf + mf) * (lf - mf + 1.0)).sqrt();
        }
    }
    real_from_complex(&d)
}

/// Generator of z-rotations in the real basis: `d/da Dz(a) = Dz(a) Az`.
pub fn z_generator(l: usize) -> Array2<f64> {
    let li = l as i64;
    let mut r = Array2::zeros((2 * l + 1, 2 * l + 1));
    for p in 1..=li {
        r[[(p + li) as usize, (-p + li) as usize]] = -(p as f64);
        r[[(-p + li) as usize, (p + li) as usize]] = p as f64;
    }
    r
}
