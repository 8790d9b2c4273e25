//! Rotation matrices in ZYZ Euler parameterisation.

use nalgebra::{Matrix3, Vector3};

use crate::manifold::ManifoldPoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub Matrix3<f64>);

fn rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn ry(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// `Rz(alpha) Ry(beta) Rz(gamma)`.
    pub fn from_euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Self {
        Rotation(rz(alpha) * ry(beta) * rz(gamma))
    }

    /// Rotation by `angle` about the (not necessarily unit) `axis`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let ax = nalgebra::Unit::new_normalize(Vector3::from(axis));
        Rotation(*nalgebra::Rotation3::from_axis_angle(&ax, angle).matrix())
    }

    /// ZYZ Euler angles with `beta` in `[0, pi]`. At the poles of the
    /// parameterisation `gamma` is set to zero.
    pub fn to_euler_zyz(&self) -> (f64, f64, f64) {
        let m = &self.0;
        let beta = m[(2, 2)].clamp(-1.0, 1.0).acos();
        let sb = (m[(0, 2)].powi(2) + m[(1, 2)].powi(2)).sqrt();
        if sb > 1e-12 {
            let alpha = m[(1, 2)].atan2(m[(0, 2)]);
            let gamma = m[(2, 1)].atan2(-m[(2, 0)]);
            (alpha, beta, gamma)
        } else if m[(2, 2)] > 0.0 {
            (m[(1, 0)].atan2(m[(0, 0)]), 0.0, 0.0)
        } else {
            // Rz(a) Ry(pi) = [[-cos a, -sin a, 0], [-sin a, cos a, 0], ...]
            ((-m[(0, 1)]).atan2(m[(1, 1)]), std::f64::consts::PI, 0.0)
        }
    }

    pub fn to_point(&self) -> ManifoldPoint {
        let (a, b, g) = self.to_euler_zyz();
        ManifoldPoint::rotation(a, b, g)
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    pub fn inverse(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let r = self.0 * Vector3::from(v);
        [r[0], r[1], r[2]]
    }

    /// Angle of the relative rotation `self^-1 other`, in `[0, pi]`.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        let rel = self.0.transpose() * other.0;
        ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

/// Geodesic distance between two group elements given as points.
pub fn geodesic_distance(a: &ManifoldPoint, b: &ManifoldPoint) -> Option<f64> {
    Some(a.to_rotation()?.angle_to(&b.to_rotation()?))
}
