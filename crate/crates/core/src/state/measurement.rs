use nalgebra::DVector;
use num_complex::Complex64;

use super::bloch::contract_alice;
use super::{trace_of_product, CMatrix, CVector, DensityMatrix, GeneratorBasis, HermitianMatrix};
use crate::error::{Error, Result};
use crate::tolerance;

/// Rank-1 measurement element `M = |φ⟩⟨φ| = c(I + m·Λ)` on Alice's side.
#[derive(Debug, Clone)]
pub struct MeasurementElement {
    pub dim: usize,
    pub state_vector: CVector,
    /// Bloch direction of `M`.
    pub m: DVector<f64>,
    /// Overall scale; it cancels in the conditioned state.
    pub c: f64,
}

impl MeasurementElement {
    /// Builds the projector onto `psi`, normalizing it first.
    pub fn from_state(psi: &CVector, basis: &GeneratorBasis) -> Result<Self> {
        let d = basis.dim();
        if psi.len() != d {
            return Err(Error::Shape(format!(
                "measurement vector has length {}, expected {d}",
                psi.len()
            )));
        }
        let norm = psi.norm();
        if norm.is_nan() || norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("measurement vector is zero".into()));
        }
        let state_vector = psi.unscale(norm);
        debug_assert!((state_vector.norm() - 1.0).abs() < tolerance::UNIT_NORM);
        let projector = &state_vector * state_vector.adjoint();
        let half_d = d as f64 / 2.0;
        let m = DVector::from_iterator(
            basis.len(),
            basis
                .generators()
                .iter()
                .map(|g| half_d * trace_of_product(g.entries(), &projector).re),
        );
        Ok(Self {
            dim: d,
            state_vector,
            m,
            c: 1.0 / d as f64,
        })
    }

    pub fn operator(&self) -> CMatrix {
        &self.state_vector * self.state_vector.adjoint()
    }
}

/// Bob's state after Alice obtains outcome `M`, together with its probability.
pub fn conditioned_state(
    rho: &DensityMatrix,
    element: &MeasurementElement,
) -> Result<(DensityMatrix, f64)> {
    condition(rho, &element.operator(), element.dim)
}

/// As [`conditioned_state`] for a general element `0 ≤ M ≤ I`.
pub fn conditioned_state_by_operator(
    rho: &DensityMatrix,
    element: &HermitianMatrix,
) -> Result<(DensityMatrix, f64)> {
    let ev = element.eigenvalues();
    let tol = tolerance::MIN_EIGENVALUE.abs();
    if ev[0] < -tol || ev[ev.len() - 1] > 1.0 + tol {
        return Err(Error::InvalidState(format!(
            "measurement element eigenvalues [{:.3e}, {:.3e}] leave [0, 1]",
            ev[0],
            ev[ev.len() - 1]
        )));
    }
    condition(rho, element.entries(), element.dim())
}

fn condition(rho: &DensityMatrix, op: &CMatrix, op_dim: usize) -> Result<(DensityMatrix, f64)> {
    let d = rho.local_dim()?;
    if op_dim != d {
        return Err(Error::Shape(format!(
            "measurement acts on dimension {op_dim}, Alice has {d}"
        )));
    }
    let unnormalized = contract_alice(op, rho.entries(), d);
    let p = unnormalized.trace().re;
    if p <= tolerance::ZERO_PROBABILITY {
        return Err(Error::ZeroProbability { probability: p });
    }
    let state = DensityMatrix::from_trusted(unnormalized * Complex64::new(1.0 / p, 0.0));
    Ok((state, p))
}
