use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint};

/// One coordinate axis of a product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: &'static str,
    pub nodes: Vec<f64>,
}

#[derive(Debug)]
struct GridInner {
    manifold: Manifold,
    bandlimit: usize,
    axes: Vec<Axis>,
    beta_weights: Vec<f64>,
    weights: Vec<f64>,
}

/// Equiangular sampling grid of bandlimit `B` with quadrature weights that
/// integrate every basis function of degree `< 2B` exactly against the
/// normalised invariant measure.
///
/// Node order: circle `k`; sphere `(beta j, phi k)` as `j * 2B + k`;
/// rotations `(alpha i, beta j, gamma k)` as `(i * 2B + j) * 2B + k`.
#[derive(Debug, Clone)]
pub struct GridSpec {
    inner: Arc<GridInner>,
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.manifold() == other.manifold() && self.bandlimit() == other.bandlimit()
    }
}

/// Polar nodes `(2j+1) pi / 4B` and their normalised weights (sum one).
///
/// These are Fejér's first-rule weights in `cos(beta)`, exact for polynomials
/// of degree `< 2B`.
pub fn polar_nodes_and_weights(bandlimit: usize) -> (Vec<f64>, Vec<f64>) {
    let n = 2 * bandlimit;
    let nodes: Vec<f64> = (0..n)
        .map(|j| PI * (2 * j + 1) as f64 / (2 * n) as f64)
        .collect();
    let weights = nodes
        .iter()
        .map(|&t| {
            let s: f64 = (1..=n / 2)
                .map(|k| {
                    let kf = k as f64;
                    (2.0 * kf * t).cos() / (4.0 * kf * kf - 1.0)
                })
                .sum();
            (1.0 - 2.0 * s) / n as f64
        })
        .collect();
    (nodes, weights)
}

fn uniform_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Build the sampling grid of bandlimit `bandlimit` on `manifold`.
pub fn make_grid(manifold: Manifold, bandlimit: usize) -> Result<GridSpec> {
    if bandlimit == 0 {
        return Err(Error::domain("grid bandlimit must be at least 1"));
    }
    let n = 2 * bandlimit;
    let (axes, beta_weights, weights) = match manifold {
        Manifold::S1 => (
            vec![Axis {
                name: "theta",
                nodes: uniform_nodes(n),
            }],
            Vec::new(),
            vec![1.0 / n as f64; n],
        ),
        Manifold::S2 => {
            let (beta, bw) = polar_nodes_and_weights(bandlimit);
            let w = bw
                .iter()
                .flat_map(|&v| std::iter::repeat_n(v / n as f64, n))
                .collect();
            (
                vec![
                    Axis {
                        name: "beta",
                        nodes: beta,
                    },
                    Axis {
                        name: "phi",
                        nodes: uniform_nodes(n),
                    },
                ],
                bw,
                w,
            )
        }
        Manifold::SO3 => {
            let (beta, bw) = polar_nodes_and_weights(bandlimit);
            let nn = (n * n) as f64;
            let mut w = Vec::with_capacity(n * n * n);
            for _ in 0..n {
                for &v in &bw {
                    w.extend(std::iter::repeat_n(v / nn, n));
                }
            }
            (
                vec![
                    Axis {
                        name: "alpha",
                        nodes: uniform_nodes(n),
                    },
                    Axis {
                        name: "beta",
                        nodes: beta,
                    },
                    Axis {
                        name: "gamma",
                        nodes: uniform_nodes(n),
                    },
                ],
                bw,
                w,
            )
        }
    };
    Ok(GridSpec {
        inner: Arc::new(GridInner {
            manifold,
            bandlimit,
            axes,
            beta_weights,
            weights,
        }),
    })
}

impl GridSpec {
    pub fn manifold(&self) -> Manifold {
        self.inner.manifold
    }

    pub fn bandlimit(&self) -> usize {
        self.inner.bandlimit
    }

    /// Samples per axis, `2B`.
    pub fn axis_len(&self) -> usize {
        2 * self.inner.bandlimit
    }

    pub fn axes(&self) -> &[Axis] {
        &self.inner.axes
    }

    pub fn weights(&self) -> &[f64] {
        &self.inner.weights
    }

    /// Normalised weights of the polar axis (empty on the circle).
    pub fn beta_weights(&self) -> &[f64] {
        &self.inner.beta_weights
    }

    pub fn num_nodes(&self) -> usize {
        self.inner.weights.len()
    }

    /// Axis coordinates of node `i`.
    pub fn node_coords(&self, i: usize) -> Vec<f64> {
        let n = self.axis_len();
        let ax = &self.inner.axes;
        match self.manifold() {
            Manifold::S1 => vec![ax[0].nodes[i]],
            Manifold::S2 => vec![ax[0].nodes[i / n], ax[1].nodes[i % n]],
            Manifold::SO3 => vec![
                ax[0].nodes[i / (n * n)],
                ax[1].nodes[(i / n) % n],
                ax[2].nodes[i % n],
            ],
        }
    }

    pub fn node(&self, i: usize) -> ManifoldPoint {
        let c = self.node_coords(i);
        match self.manifold() {
            Manifold::S1 => ManifoldPoint::S1 { theta: c[0] },
            Manifold::S2 => ManifoldPoint::S2 {
                beta: c[0],
                phi: c[1],
            },
            Manifold::SO3 => ManifoldPoint::SO3 {
                alpha: c[0],
                beta: c[1],
                gamma: c[2],
            },
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = ManifoldPoint> + '_ {
        (0..self.num_nodes()).map(move |i| self.node(i))
    }
}

/// Real samples of a function on a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.num_nodes() {
            return Err(Error::domain(format!(
                "grid has {} nodes but {} values were given",
                spec.num_nodes(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("grid function values must be finite"));
        }
        Ok(GridFunction { spec, values })
    }

    pub fn from_fn(spec: &GridSpec, f: impl Fn(&ManifoldPoint) -> f64) -> Result<Self> {
        let values = spec.nodes().map(|p| f(&p)).collect();
        GridFunction::new(spec.clone(), values)
    }

    /// Quadrature estimate of the integral under the normalised measure.
    pub fn integral(&self) -> f64 {
        self.spec
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum()
    }
}
