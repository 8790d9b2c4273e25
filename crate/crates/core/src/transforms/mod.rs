//! Forward (analysis) and inverse (synthesis) Fourier transforms on the
//! circle, the sphere and SO(3), exact for bandlimited functions.

mod grid;
mod naive;
mod plan;
mod spectral;

pub use grid::{make_grid, polar_nodes_and_weights, Axis, GridFunction, GridSpec};
pub use naive::{naive_analyze, naive_synthesize};
pub use plan::{plan_cache_bytes, set_plan_cache_capacity};
pub use spectral::SpectralCoeffs;

use crate::error::{Error, Result};

/// Coefficients `f̂_i = Σ_nodes w f T_i` for every basis function of degree
/// `<= bandlimit`.
pub fn analyze(f: &GridFunction, bandlimit: usize) -> Result<SpectralCoeffs> {
    let spec = &f.spec;
    if bandlimit >= spec.bandlimit() {
        return Err(Error::domain(format!(
            "analysis bandlimit {bandlimit} must be below the grid bandlimit {}",
            spec.bandlimit()
        )));
    }
    let p = plan::plan(spec.manifold(), spec.bandlimit(), bandlimit);
    let coeffs = p.analyze(&f.values);
    SpectralCoeffs::new(spec.manifold(), bandlimit, coeffs)
}

/// Samples of `Σ_i c_i T_i` at every grid node.
pub fn synthesize(c: &SpectralCoeffs, spec: &GridSpec) -> Result<GridFunction> {
    if c.manifold != spec.manifold() {
        return Err(Error::domain(format!(
            "coefficients on {} cannot be synthesised on a {} grid",
            c.manifold,
            spec.manifold()
        )));
    }
    if c.bandlimit >= spec.bandlimit() {
        return Err(Error::domain(format!(
            "coefficient bandlimit {} must be below the grid bandlimit {}",
            c.bandlimit,
            spec.bandlimit()
        )));
    }
    let p = plan::plan(spec.manifold(), spec.bandlimit(), c.bandlimit);
    let values = p.synthesize(&c.coeffs);
    GridFunction::new(spec.clone(), values)
}
