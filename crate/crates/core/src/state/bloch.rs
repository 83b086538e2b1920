use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{
    hermitian_eigenvalues, hermitize, partial_trace_dims, trace_of_product, CMatrix,
    DensityMatrix, GeneratorBasis, Side,
};
use crate::error::{Error, Result};
use crate::tolerance;

/// Local Bloch vectors and correlation matrix of a bipartite state:
/// `a_k = tr((Λ_k⊗I)ρ)`, `b_k = tr((I⊗Λ_k)ρ)`, `t_ij = tr((Λ_i⊗Λ_j)ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochRepresentation {
    pub dim: usize,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub t: DMatrix<f64>,
}

impl BlochRepresentation {
    pub fn new(dim: usize, a: DVector<f64>, b: DVector<f64>, t: DMatrix<f64>) -> Result<Self> {
        let n = dim * dim - 1;
        if dim < 2 || a.len() != n || b.len() != n || t.nrows() != n || t.ncols() != n {
            return Err(Error::Shape(format!(
                "Bloch data for d={dim} needs vectors of length {n} and a {n}x{n} matrix"
            )));
        }
        Ok(Self { dim, a, b, t })
    }

    /// Representation with vanishing local vectors.
    pub fn centered(dim: usize, t: DMatrix<f64>) -> Result<Self> {
        let n = dim * dim - 1;
        Self::new(dim, DVector::zeros(n), DVector::zeros(n), t)
    }

    /// The same state with Alice and Bob exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            dim: self.dim,
            a: self.b.clone(),
            b: self.a.clone(),
            t: self.t.transpose(),
        }
    }

    /// Largest admissible Bloch vector length, `sqrt(2(d−1)/d)`.
    pub fn max_radius(&self) -> f64 {
        let d = self.dim as f64;
        (2.0 * (d - 1.0) / d).sqrt()
    }
}

/// `tr_A((op ⊗ I) ρ)` for an operator on Alice's factor.
pub(crate) fn contract_alice(op: &CMatrix, rho: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |k, l| {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                let w = op[(a, b)];
                if w != Complex64::new(0.0, 0.0) {
                    acc += w * rho[(b * d + k, a * d + l)];
                }
            }
        }
        acc
    })
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > tolerance::IMAGINARY_RESIDUE {
        return Err(Error::NonHermitian {
            residue: z.im.abs(),
            tolerance: tolerance::IMAGINARY_RESIDUE,
        });
    }
    Ok(z.re)
}

/// `b_k = tr(Λ_k ρ)` for a single-system state.
pub fn local_bloch_vector(rho: &DensityMatrix, basis: &GeneratorBasis) -> Result<DVector<f64>> {
    if rho.dim() != basis.dim() {
        return Err(Error::Shape(format!(
            "state has dimension {}, generators are for d={}",
            rho.dim(),
            basis.dim()
        )));
    }
    let mut b = DVector::zeros(basis.len());
    for k in 0..basis.len() {
        b[k] = real_part(trace_of_product(basis.get(k), rho.entries()))?;
    }
    Ok(b)
}

pub fn decompose(rho: &DensityMatrix, basis: &GeneratorBasis) -> Result<BlochRepresentation> {
    let d = rho.local_dim()?;
    if d != basis.dim() {
        return Err(Error::Shape(format!(
            "state has local dimension {d}, generators are for d={}",
            basis.dim()
        )));
    }
    let n = basis.len();
    let m = rho.entries();
    let rho_a = partial_trace_dims(m, d, d, Side::B);
    let rho_b = partial_trace_dims(m, d, d, Side::A);

    let mut a = DVector::zeros(n);
    let mut b = DVector::zeros(n);
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        a[i] = real_part(trace_of_product(basis.get(i), &rho_a))?;
        b[i] = real_part(trace_of_product(basis.get(i), &rho_b))?;
        let reduced = contract_alice(basis.get(i), m, d);
        for j in 0..n {
            t[(i, j)] = real_part(trace_of_product(basis.get(j), &reduced))?;
        }
    }
    Ok(BlochRepresentation { dim: d, a, b, t })
}

/// Operator assembled from Bloch data, plus its smallest eigenvalue.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub matrix: CMatrix,
    pub min_eigenvalue: f64,
}

impl Reconstruction {
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= tolerance::RECONSTRUCT_MIN_EIGENVALUE
    }

    /// Converts into a validated state, failing for unphysical data.
    pub fn into_state(self) -> Result<DensityMatrix> {
        if !self.is_physical() {
            return Err(Error::InvalidState(format!(
                "reconstructed operator has eigenvalue {:.3e}",
                self.min_eigenvalue
            )));
        }
        if self.min_eigenvalue < 0.0 {
            return DensityMatrix::new(self.matrix);
        }
        Ok(DensityMatrix::from_trusted(self.matrix))
    }
}

/// Assembles `I/d⊗I/d + ½a·Λ⊗I/d + ½I/d⊗b·Λ + ¼Σ t_ij Λ_i⊗Λ_j`.
///
/// Arbitrary `(a, b, T)` need not describe a state; the result carries the
/// minimum eigenvalue and a warning is logged when it is below `-1e-8`.
pub fn reconstruct(bloch: &BlochRepresentation, basis: &GeneratorBasis) -> Result<Reconstruction> {
    let d = bloch.dim;
    if basis.dim() != d {
        return Err(Error::Shape(format!(
            "Bloch data for d={d}, generators for d={}",
            basis.dim()
        )));
    }
    let n = basis.len();
    if bloch.a.len() != n || bloch.b.len() != n || bloch.t.shape() != (n, n) {
        return Err(Error::Shape("Bloch vector lengths do not match d²−1".into()));
    }
    let id = CMatrix::identity(d, d);
    let inv_d = Complex64::new(1.0 / d as f64, 0.0);
    let a_op = basis.combine(bloch.a.as_slice());
    let b_op = basis.combine(bloch.b.as_slice());

    let mut out = id.kronecker(&id) * (inv_d * inv_d);
    out += a_op.kronecker(&id) * (inv_d * 0.5);
    out += id.kronecker(&b_op) * (inv_d * 0.5);
    for i in 0..n {
        let row: Vec<f64> = bloch.t.row(i).iter().copied().collect();
        if row.iter().all(|&x| x == 0.0) {
            continue;
        }
        let right = basis.combine(&row);
        out += basis.get(i).kronecker(&right) * Complex64::new(0.25, 0.0);
    }
    let matrix = hermitize(&out);
    let min_eigenvalue = hermitian_eigenvalues(&matrix)[0];
    let rec = Reconstruction {
        matrix,
        min_eigenvalue,
    };
    if !rec.is_physical() {
        warn!("reconstructed operator is not a state: minimum eigenvalue {min_eigenvalue:.3e}");
    }
    Ok(rec)
}

/// Bob's Bloch vector after Alice's outcome `M ∝ I + m·Λ`: `(b + Tᵀm)/(1 + a·m)`.
pub fn bloch_conditioned_vector(bloch: &BlochRepresentation, m: &DVector<f64>) -> Result<DVector<f64>> {
    if m.len() != bloch.a.len() {
        return Err(Error::Shape(format!(
            "measurement direction has length {}, expected {}",
            m.len(),
            bloch.a.len()
        )));
    }
    let denom = 1.0 + bloch.a.dot(m);
    if denom <= tolerance::ZERO_PROBABILITY {
        return Err(Error::ZeroProbability { probability: denom });
    }
    Ok((&bloch.b + bloch.t.tr_mul(m)) / denom)
}
