use num_complex::Complex64;

use super::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};

/// Generalized Gell-Mann generators of SU(d), normalized to `tr(Λ_j Λ_k) = 2δ_jk`.
///
/// Ordering is fixed: the `d(d−1)/2` symmetric generators, then the
/// antisymmetric ones, both over pairs `j < k` in lexicographic order, then
/// the `d − 1` diagonal generators by increasing size of their support.
/// For `d = 2` this is `σx, σy, σz`.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<HermitianMatrix>,
}

impl GeneratorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators, `d² − 1`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[HermitianMatrix] {
        &self.generators
    }

    pub fn get(&self, k: usize) -> &CMatrix {
        self.generators[k].entries()
    }

    /// `m·Λ` for a real coefficient vector.
    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (g, &w) in self.generators.iter().zip(coeffs) {
            if w != 0.0 {
                out += g.entries().scale(w);
            }
        }
        out
    }
}

pub fn build_generators(dim: usize) -> Result<GeneratorBasis> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "SU(d) generators need d >= 2",
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut generators = Vec::with_capacity(dim * dim - 1);

    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|j| (j + 1..dim).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(dim, dim);
        m[(j, k)] = one;
        m[(k, j)] = one;
        generators.push(HermitianMatrix::new(m)?);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(dim, dim);
        m[(j, k)] = -i;
        m[(k, j)] = i;
        generators.push(HermitianMatrix::new(m)?);
    }
    for l in 1..dim {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..l {
            m[(j, j)] = Complex64::new(norm, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        generators.push(HermitianMatrix::new(m)?);
    }
    Ok(GeneratorBasis { dim, generators })
}
