#![allow(dead_code)]

use std::f64::consts::PI;

use hef_core::bayes_rotation::SphericalSignal;
use hef_core::{ManifoldPoint, Rotation};
use nalgebra::{Quaternion, UnitQuaternion};
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-uniform rotation from a normalised Gaussian quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Rotation {
    let q = Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    Rotation(UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner())
}

pub fn random_signal<R: Rng>(rng: &mut R, l: usize) -> SphericalSignal {
    let c = (0..(l + 1) * (l + 1)).map(|_| rng.sample(StandardNormal)).collect();
    SphericalSignal::new(l, c).unwrap()
}

/// Uniform point on the sphere from a Gaussian vector.
pub fn random_sphere_point<R: Rng>(rng: &mut R) -> ManifoldPoint {
    let v: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    ManifoldPoint::from_unit_vector(v)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `ln I_0(kappa)` by the trapezoid rule with `n` nodes on the circle.
pub fn log_bessel_i0(kappa: f64, n: usize) -> f64 {
    let s: f64 = (0..n)
        .map(|k| (kappa * ((2.0 * PI * k as f64 / n as f64).cos() - 1.0)).exp())
        .sum();
    kappa + (s / n as f64).ln()
}

/// `I_1(kappa) / I_0(kappa)` by the same rule.
pub fn bessel_ratio(kappa: f64, n: usize) -> f64 {
    let (mut a, mut b) = (0.0, 0.0);
    for k in 0..n {
        let t = 2.0 * PI * k as f64 / n as f64;
        let e = (kappa * (t.cos() - 1.0)).exp();
        a += e * t.cos();
        b += e;
    }
    a / b
}
