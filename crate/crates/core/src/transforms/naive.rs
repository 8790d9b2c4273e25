//! Reference transforms by direct summation over grid nodes. Quadratic in the
//! grid size; used to validate the fast path.

use rayon::prelude::*;

use super::{GridFunction, GridSpec, SpectralCoeffs};
use crate::error::{Error, Result};
use crate::special_functions::eval_all;

pub fn naive_analyze(f: &GridFunction, bandlimit: usize) -> Result<SpectralCoeffs> {
    let spec = &f.spec;
    if bandlimit >= spec.bandlimit() {
        return Err(Error::domain("analysis bandlimit must be below the grid bandlimit"));
    }
    let manifold = spec.manifold();
    let j = manifold.num_coeffs(bandlimit);
    let rows: Vec<Vec<f64>> = (0..spec.num_nodes())
        .into_par_iter()
        .map(|i| eval_all(bandlimit, &spec.node(i)))
        .collect();
    let mut out = vec![0.0; j];
    for (i, row) in rows.iter().enumerate() {
        let wf = spec.weights()[i] * f.values[i];
        for (o, t) in out.iter_mut().zip(row) {
            *o += wf * t;
        }
    }
    SpectralCoeffs::new(manifold, bandlimit, out)
}

pub fn naive_synthesize(c: &SpectralCoeffs, spec: &GridSpec) -> Result<GridFunction> {
    if c.manifold != spec.manifold() {
        return Err(Error::domain("manifold mismatch"));
    }
    let values = (0..spec.num_nodes())
        .into_par_iter()
        .map(|i| {
            eval_all(c.bandlimit, &spec.node(i))
                .iter()
                .zip(&c.coeffs)
                .map(|(t, a)| t * a)
                .sum()
        })
        .collect();
    GridFunction::new(spec.clone(), values)
}
