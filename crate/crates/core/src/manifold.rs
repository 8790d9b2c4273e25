//! Manifold tags, basis indexing and points.
//!
//! Every coefficient vector in the crate is laid out in one canonical order:
//! degree ascending, then row `m` ascending, then column `n` ascending. On the
//! circle the two functions of a degree are ordered cosine first, sine second.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rotation::Rotation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manifold {
    /// The circle, homogeneous space of SO(2).
    S1,
    /// The two-sphere, homogeneous space of SO(3).
    S2,
    /// The rotation group itself.
    SO3,
}

impl Manifold {
    pub const ALL: [Manifold; 3] = [Manifold::S1, Manifold::S2, Manifold::SO3];

    /// Number of basis functions of degree exactly `l`.
    pub fn degree_size(self, l: usize) -> usize {
        match self {
            Manifold::S1 => {
                if l == 0 {
                    1
                } else {
                    2
                }
            }
            Manifold::S2 => 2 * l + 1,
            Manifold::SO3 => (2 * l + 1) * (2 * l + 1),
        }
    }

    /// Offset of the first basis function of degree `l` in canonical order.
    pub fn degree_offset(self, l: usize) -> usize {
        match self {
            Manifold::S1 => {
                if l == 0 {
                    0
                } else {
                    2 * l - 1
                }
            }
            Manifold::S2 => l * l,
            Manifold::SO3 => (4 * l * l * l - l) / 3,
        }
    }

    /// Total number of basis functions with degree at most `bandlimit`.
    pub fn num_coeffs(self, bandlimit: usize) -> usize {
        self.degree_offset(bandlimit + 1)
    }

    /// Dimension of the irreducible representation labelled `l`. This is the
    /// discrete Plancherel weight of the degree.
    pub fn rep_dim(self, l: usize) -> usize {
        match self {
            Manifold::S1 => 1,
            Manifold::S2 | Manifold::SO3 => 2 * l + 1,
        }
    }

    /// Degree of the basis function at canonical position `i`.
    pub fn degree_of(self, i: usize) -> usize {
        let mut l = match self {
            Manifold::S1 => return (i + 1) / 2,
            Manifold::S2 => (i as f64).sqrt() as usize,
            Manifold::SO3 => (0.75 * i as f64).cbrt() as usize,
        };
        while l > 0 && self.degree_offset(l) > i {
            l -= 1;
        }
        while self.degree_offset(l + 1) <= i {
            l += 1;
        }
        l
    }

    /// Basis index at canonical position `i`.
    pub fn index_at(self, i: usize) -> BasisIndex {
        let l = self.degree_of(i);
        let r = i - self.degree_offset(l);
        let li = l as i32;
        match self {
            Manifold::S1 => BasisIndex {
                manifold: self,
                degree: l,
                m: if l == 0 || r == 0 { 1 } else { -1 },
                n: 0,
            },
            Manifold::S2 => BasisIndex {
                manifold: self,
                degree: l,
                m: r as i32 - li,
                n: 0,
            },
            Manifold::SO3 => {
                let w = 2 * l + 1;
                BasisIndex {
                    manifold: self,
                    degree: l,
                    m: (r / w) as i32 - li,
                    n: (r % w) as i32 - li,
                }
            }
        }
    }

    /// Short lower-case tag used in files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Manifold::S1 => "s1",
            Manifold::S2 => "s2",
            Manifold::SO3 => "so3",
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Manifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Manifold::S1),
            "s2" => Ok(Manifold::S2),
            "so3" => Ok(Manifold::SO3),
            other => Err(Error::domain(format!("unknown manifold tag `{other}`"))),
        }
    }
}

/// Label of one real basis function.
///
/// On the circle `m` is `+1` for the cosine and `-1` for the sine of the
/// degree (the constant has `m = +1`). On the sphere `n` is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub manifold: Manifold,
    pub degree: usize,
    pub m: i32,
    pub n: i32,
}

impl BasisIndex {
    pub fn new(manifold: Manifold, degree: usize, m: i32, n: i32) -> Result<Self> {
        let idx = BasisIndex {
            manifold,
            degree,
            m,
            n,
        };
        idx.validate()?;
        Ok(idx)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.degree as i64;
        let (m, n) = (self.m as i64, self.n as i64);
        let ok = match self.manifold {
            Manifold::S1 => n == 0 && (m == 1 || (m == -1 && l > 0)),
            Manifold::S2 => n == 0 && m.abs() <= l,
            Manifold::SO3 => m.abs() <= l && n.abs() <= l,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "basis index (l={}, m={}, n={}) out of range on {}",
                self.degree, self.m, self.n, self.manifold
            )))
        }
    }

    /// Position in canonical order.
    pub fn position(&self) -> usize {
        let l = self.degree;
        let off = self.manifold.degree_offset(l);
        match self.manifold {
            Manifold::S1 => off + usize::from(self.m < 0),
            Manifold::S2 => off + (self.m + l as i32) as usize,
            Manifold::SO3 => {
                let w = 2 * l + 1;
                off + (self.m + l as i32) as usize * w + (self.n + l as i32) as usize
            }
        }
    }
}

/// A point on one of the supported manifolds, with coordinates reduced into
/// their canonical ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManifoldPoint {
    /// Angle in `[0, 2pi)`.
    S1 { theta: f64 },
    /// Colatitude in `[0, pi]` and longitude in `[0, 2pi)`.
    S2 { beta: f64, phi: f64 },
    /// ZYZ Euler angles, `R = Rz(alpha) Ry(beta) Rz(gamma)`.
    SO3 { alpha: f64, beta: f64, gamma: f64 },
}

pub(crate) fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce a polar angle into [0, pi]; returns the angle and whether the
/// azimuth has to be flipped by pi.
fn reflect_polar(beta: f64) -> (f64, bool) {
    let b = wrap_angle(beta);
    if b > PI {
        (TAU - b, true)
    } else {
        (b, false)
    }
}

impl ManifoldPoint {
    pub fn circle(theta: f64) -> Self {
        ManifoldPoint::S1 {
            theta: wrap_angle(theta),
        }
    }

    pub fn sphere(beta: f64, phi: f64) -> Self {
        let (b, flip) = reflect_polar(beta);
        let phi = if flip { phi + PI } else { phi };
        ManifoldPoint::S2 {
            beta: b,
            phi: wrap_angle(phi),
        }
    }

    pub fn rotation(alpha: f64, beta: f64, gamma: f64) -> Self {
        // Ry(-b) = Rz(pi) Ry(b) Rz(-pi)
        let (b, flip) = reflect_polar(beta);
        let (a, g) = if flip {
            (alpha + PI, gamma - PI)
        } else {
            (alpha, gamma)
        };
        ManifoldPoint::SO3 {
            alpha: wrap_angle(a),
            beta: b,
            gamma: wrap_angle(g),
        }
    }

    /// Sphere point from geographic latitude and east-positive longitude in
    /// degrees.
    pub fn from_lat_lon_degrees(lat: f64, lon: f64) -> Self {
        ManifoldPoint::sphere((90.0 - lat).to_radians(), lon.to_radians())
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            ManifoldPoint::S1 { .. } => Manifold::S1,
            ManifoldPoint::S2 { .. } => Manifold::S2,
            ManifoldPoint::SO3 { .. } => Manifold::SO3,
        }
    }

    /// Coordinates as a slice-like array, padded with zeros.
    pub fn coords(&self) -> Vec<f64> {
        match *self {
            ManifoldPoint::S1 { theta } => vec![theta],
            ManifoldPoint::S2 { beta, phi } => vec![beta, phi],
            ManifoldPoint::SO3 { alpha, beta, gamma } => vec![alpha, beta, gamma],
        }
    }

    pub fn from_coords(manifold: Manifold, c: &[f64]) -> Result<Self> {
        let want = match manifold {
            Manifold::S1 => 1,
            Manifold::S2 => 2,
            Manifold::SO3 => 3,
        };
        if c.len() != want {
            return Err(Error::domain(format!(
                "{manifold} point needs {want} coordinates, got {}",
                c.len()
            )));
        }
        Ok(match manifold {
            Manifold::S1 => ManifoldPoint::circle(c[0]),
            Manifold::S2 => ManifoldPoint::sphere(c[0], c[1]),
            Manifold::SO3 => ManifoldPoint::rotation(c[0], c[1], c[2]),
        })
    }

    /// Unit vector of a sphere point.
    pub fn unit_vector(&self) -> Option<[f64; 3]> {
        match *self {
            ManifoldPoint::S2 { beta, phi } => Some([
                beta.sin() * phi.cos(),
                beta.sin() * phi.sin(),
                beta.cos(),
            ]),
            _ => None,
        }
    }

    pub fn from_unit_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let beta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        ManifoldPoint::sphere(beta, phi)
    }

    pub fn to_rotation(&self) -> Option<Rotation> {
        match *self {
            ManifoldPoint::SO3 { alpha, beta, gamma } => {
                Some(Rotation::from_euler_zyz(alpha, beta, gamma))
            }
            _ => None,
        }
    }

    /// Action of a rotation on sphere points or left multiplication on group
    /// elements. Circle points are left untouched.
    pub fn rotated_by(&self, g: &Rotation) -> Self {
        match self {
            ManifoldPoint::S1 { .. } => *self,
            ManifoldPoint::S2 { .. } => {
                ManifoldPoint::from_unit_vector(g.apply(self.unit_vector().unwrap()))
            }
            ManifoldPoint::SO3 { .. } => {
                let h = self.to_rotation().unwrap();
                g.compose(&h).to_point()
            }
        }
    }
}
