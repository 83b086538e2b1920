//! Finite-dimensional states: Hermitian operators, density matrices and the
//! single-outcome measurement update.

mod bloch;
mod generators;
mod measurement;

pub use bloch::{
    bloch_conditioned_vector, local_bloch_vector, decompose, reconstruct, BlochRepresentation, Reconstruction,
};
pub use generators::{build_generators, GeneratorBasis};
pub use measurement::{conditioned_state, conditioned_state_by_operator, MeasurementElement};

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest local dimension accepted for bipartite states.
pub const MAX_LOCAL_DIM: usize = 8;

/// Which subsystem of a bipartite state an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

fn hermiticity_residue(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Sorted (ascending) eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `tr(AB)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Square matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: CMatrix,
}

impl HermitianMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Shape(format!(
                "expected a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let residue = hermiticity_residue(&entries);
        if residue > tolerance::HERMITIAN_CONSTRUCTION {
            return Err(Error::NonHermitian {
                residue,
                tolerance: tolerance::HERMITIAN_CONSTRUCTION,
            });
        }
        Ok(Self {
            entries: hermitize(&entries),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }
}

/// Unit-trace positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates and stores a state, removing the anti-Hermitian residue.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Shape(format!(
                "density matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let residue = hermiticity_residue(&entries);
        if residue > tolerance::HERMITIAN_VALIDATION {
            return Err(Error::NonHermitian {
                residue,
                tolerance: tolerance::HERMITIAN_VALIDATION,
            });
        }
        let entries = hermitize(&entries);
        let trace = entries.trace().re;
        if (trace - 1.0).abs() > tolerance::TRACE_VALIDATION {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let min_ev = hermitian_eigenvalues(&entries)[0];
        if min_ev < tolerance::MIN_EIGENVALUE {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_ev:.3e} is negative"
            )));
        }
        Ok(Self { entries })
    }

    /// Skips the eigenvalue check; for operators already known to be states.
    pub(crate) fn from_trusted(entries: CMatrix) -> Self {
        Self {
            entries: hermitize(&entries),
        }
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero vector.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self::from_trusted(&v * v.adjoint()))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "state dimension must be positive",
            });
        }
        let scale = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self::from_trusted(CMatrix::identity(dim, dim) * scale))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.entries, &self.entries).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self::from_trusted(self.entries.kronecker(&other.entries))
    }

    /// `U ρ U†` for a unitary of matching dimension.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<DensityMatrix> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "unitary is {}x{}, state is {}x{}",
                unitary.nrows(),
                unitary.ncols(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(Self::from_trusted(unitary * &self.entries * unitary.adjoint()))
    }

    /// Local dimension `d` of a `d²×d²` bipartite state.
    pub fn local_dim(&self) -> Result<usize> {
        let n = self.dim();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Shape(format!(
                "dimension {n} does not factor as d×d"
            )));
        }
        if !(2..=MAX_LOCAL_DIM).contains(&d) {
            return Err(Error::InvalidDimension {
                dim: d,
                reason: "local dimension must lie in 2..=8",
            });
        }
        Ok(d)
    }

    /// Exchanges the roles of the two subsystems.
    pub fn swap_subsystems(&self) -> Result<DensityMatrix> {
        let d = self.local_dim()?;
        let n = d * d;
        let out = CMatrix::from_fn(n, n, |r, c| {
            let (i, k) = (r / d, r % d);
            let (j, l) = (c / d, c % d);
            self.entries[(k * d + i, l * d + j)]
        });
        Ok(Self::from_trusted(out))
    }

    pub fn to_json(&self) -> DensityMatrixJson {
        let n = self.dim();
        DensityMatrixJson {
            dim: n,
            re: (0..n)
                .map(|i| (0..n).map(|j| self.entries[(i, j)].re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| self.entries[(i, j)].im).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &DensityMatrixJson) -> Result<Self> {
        let n = json.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if n == 0 || !rows_ok(&json.re) || !rows_ok(&json.im) {
            return Err(Error::Shape(format!(
                "\"re\" and \"im\" must both be {n}x{n} arrays"
            )));
        }
        let entries = CMatrix::from_fn(n, n, |i, j| Complex64::new(json.re[i][j], json.im[i][j]));
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let json: DensityMatrixJson = serde_json::from_str(&text)?;
        Self::from_json(&json)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// On-disk form of a density matrix: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Traces out `traced` from an operator on `C^{dim_a} ⊗ C^{dim_b}`.
pub(crate) fn partial_trace_dims(m: &CMatrix, dim_a: usize, dim_b: usize, traced: Side) -> CMatrix {
    match traced {
        Side::A => CMatrix::from_fn(dim_b, dim_b, |k, l| {
            (0..dim_a)
                .map(|i| m[(i * dim_b + k, i * dim_b + l)])
                .sum()
        }),
        Side::B => CMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b)
                .map(|k| m[(i * dim_b + k, j * dim_b + k)])
                .sum()
        }),
    }
}

/// Reduced state after tracing out `traced`.
pub fn partial_trace(rho: &DensityMatrix, traced: Side) -> Result<DensityMatrix> {
    let d = rho.local_dim()?;
    Ok(DensityMatrix::from_trusted(partial_trace_dims(
        rho.entries(),
        d,
        d,
        traced,
    )))
}

/// `D(ρ) = sqrt((d·tr ρ² − 1)/(d − 1))`.
pub fn degree_of_coherence(rho: &DensityMatrix) -> Result<f64> {
    degree_from_purity(rho.purity(), rho.dim())
}

pub(crate) fn degree_from_purity(purity: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "degree of coherence needs d >= 2",
        });
    }
    let d = dim as f64;
    let radicand = (d * purity - 1.0) / (d - 1.0);
    if radicand < tolerance::RADICAND_REJECT {
        return Err(Error::InvalidState(format!(
            "purity {purity} is below 1/d"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Brukner–Zeilinger invariant information, `tr ρ² − 1/d`.
pub fn bz_information(rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim() as f64;
    let dc = degree_of_coherence(rho)?;
    Ok((d - 1.0) / d * dc * dc)
}
