//! Fully normalised associated Legendre functions.
//!
//! `P̄_l^m(x)` is normalised so that `∫_{-1}^{1} P̄_l^m(x)^2 dx / 2 = 1` and
//! carries no Condon-Shortley phase. Values come from the three-term
//! recurrence in `l` at fixed `m`, seeded by the sectoral terms, so no
//! factorials are ever formed.

/// Position of `(l, m)` in the m-major triangular layout used by
/// [`legendre_all`]: all degrees of `m = 0` first, then `m = 1`, and so on.
#[inline]
pub fn triangle_index(lmax: usize, l: usize, m: usize) -> usize {
    m * (lmax + 1) - m * m.saturating_sub(1) / 2 + (l - m)
}

/// Number of `(l, m)` pairs with `0 <= m <= l <= lmax`.
#[inline]
pub fn triangle_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Recurrence coefficients for a fixed maximal degree.
#[derive(Debug, Clone)]
pub struct LegendreRecurrence {
    lmax: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    sectoral: Vec<f64>,
}

impl LegendreRecurrence {
    pub fn new(lmax: usize) -> Self {
        let n = triangle_len(lmax);
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for m in 0..=lmax {
            for l in (m + 2)..=lmax {
                let (lf, mf) = (l as f64, m as f64);
                let i = triangle_index(lmax, l, m);
                a[i] = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let lp = lf - 1.0;
                b[i] = ((lp * lp - mf * mf) / (4.0 * lp * lp - 1.0)).sqrt();
            }
        }
        let sectoral = (0..=lmax)
            .map(|m| {
                if m == 0 {
                    1.0
                } else {
                    let mf = m as f64;
                    ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt()
                }
            })
            .collect();
        LegendreRecurrence {
            lmax,
            a,
            b,
            sectoral,
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Fill `out` (length [`triangle_len`]) with `P̄_l^m(cos beta)`, where
    /// `x = cos beta` and `s = sin beta >= 0`.
    pub fn eval_into(&self, x: f64, s: f64, out: &mut [f64]) {
        let lmax = self.lmax;
        assert_eq!(out.len(), triangle_len(lmax));
        let mut pmm = 1.0;
        for m in 0..=lmax {
            if m > 0 {
                pmm *= self.sectoral[m] * s;
            }
            let base = triangle_index(lmax, m, m);
            out[base] = pmm;
            if m == lmax {
                break;
            }
            let mut p2 = pmm;
            let mut p1 = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
            out[base + 1] = p1;
            for l in (m + 2)..=lmax {
                let i = base + (l - m);
                let p = self.a[i] * (x * p1 - self.b[i] * p2);
                out[i] = p;
                p2 = p1;
                p1 = p;
            }
        }
    }

    pub fn eval(&self, x: f64, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; triangle_len(self.lmax)];
        self.eval_into(x, s, &mut out);
        out
    }
}

/// Single value `P̄_l^m(cos beta)`, `m <= l`.
pub fn normalized_legendre(l: usize, m: usize, beta: f64) -> f64 {
    assert!(m <= l);
    let (s, x) = beta.sin_cos();
    let s = s.abs();
    let mut pmm = 1.0;
    for k in 1..=m {
        let kf = k as f64;
        pmm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mut p2 = pmm;
    let mut p1 = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
    let mf = m as f64;
    for k in (m + 2)..=l {
        let kf = k as f64;
        let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
        let kp = kf - 1.0;
        let b = ((kp * kp - mf * mf) / (4.0 * kp * kp - 1.0)).sqrt();
        let p = a * (x * p1 - b * p2);
        p2 = p1;
        p1 = p;
    }
    p1
}
