use crate::error::{Error, Result};
use crate::manifold::{BasisIndex, Manifold};

/// Real expansion coefficients in canonical order, degree `0..=bandlimit`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    pub manifold: Manifold,
    pub bandlimit: usize,
    pub coeffs: Vec<f64>,
}

impl SpectralCoeffs {
    pub fn new(manifold: Manifold, bandlimit: usize, coeffs: Vec<f64>) -> Result<Self> {
        let want = manifold.num_coeffs(bandlimit);
        if coeffs.len() != want {
            return Err(Error::domain(format!(
                "{manifold} bandlimit {bandlimit} needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        Ok(SpectralCoeffs {
            manifold,
            bandlimit,
            coeffs,
        })
    }

    pub fn zeros(manifold: Manifold, bandlimit: usize) -> Self {
        SpectralCoeffs {
            manifold,
            bandlimit,
            coeffs: vec![0.0; manifold.num_coeffs(bandlimit)],
        }
    }

    /// A single unit coefficient.
    pub fn unit(idx: BasisIndex, bandlimit: usize) -> Result<Self> {
        idx.validate()?;
        if idx.degree > bandlimit {
            return Err(Error::domain("basis index above the bandlimit"));
        }
        let mut c = SpectralCoeffs::zeros(idx.manifold, bandlimit);
        c.coeffs[idx.position()] = 1.0;
        Ok(c)
    }

    /// Coefficients of one degree.
    pub fn degree_block(&self, l: usize) -> &[f64] {
        let off = self.manifold.degree_offset(l);
        &self.coeffs[off..off + self.manifold.degree_size(l)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Copy truncated or zero-padded to another bandlimit.
    pub fn with_bandlimit(&self, bandlimit: usize) -> SpectralCoeffs {
        let mut out = SpectralCoeffs::zeros(self.manifold, bandlimit);
        let k = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..k].copy_from_slice(&self.coeffs[..k]);
        out
    }
}
