//! Correlation-induced coherence: the largest increase of one party's degree
//! of coherence that a single measurement outcome on the other party can
//! produce.
//!
//! In Bloch form the forward quantity is
//! `max_m sqrt(d/(2(d−1))) (|b_M| − |b|)` with `b_M = (b + Tᵀm)/(1 + a·m)`.
//! The search runs over rank-1 projectors `|φ⟩⟨φ|`: the conditioned state is
//! unchanged by rescaling `M`, and the extreme values of `|b_M|` over the
//! convex set of elements `0 ≤ M ≤ I` sit at its extreme points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::random::{haar_pure_state, seeded};
use crate::state::{
    build_generators, conditioned_state, decompose, degree_of_coherence, partial_trace, CVector,
    DensityMatrix, GeneratorBasis, MeasurementElement, Side,
};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    pub n_starts: usize,
    pub max_iters: usize,
    pub step_tolerance: f64,
    pub value_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            n_starts: 64,
            max_iters: 500,
            step_tolerance: 1e-10,
            value_tolerance: 1e-12,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 || self.max_iters == 0 {
            return Err(Error::Config("optimizer counts must be positive".into()));
        }
        if !(self.step_tolerance > 0.0 && self.value_tolerance > 0.0) {
            return Err(Error::Config("optimizer tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CicDiagnostics {
    /// Local searches performed, random plus axis-aligned.
    pub starts: usize,
    /// Best increment found over projectors, before clamping at zero.
    pub best_raw: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct CicResult {
    pub value: f64,
    pub argmax_m: DVector<f64>,
    pub argmax_state: CVector,
    pub diagnostics: CicDiagnostics,
}

/// `sqrt(d/(2(d−1)))`, converting Bloch length to degree of coherence.
pub fn coherence_scale(dim: usize) -> f64 {
    let d = dim as f64;
    (d / (2.0 * (d - 1.0))).sqrt()
}

/// Increment of Bob's degree of coherence for Alice's element with Bloch
/// direction `m`; `None` if the outcome has (numerically) zero probability.
pub fn raw_increment(a: &DVector<f64>, b: &DVector<f64>, t: &DMatrix<f64>, m: &DVector<f64>, dim: usize) -> Option<f64> {
    let p = (1.0 + a.dot(m)) / dim as f64;
    if p <= tolerance::ZERO_PROBABILITY {
        return None;
    }
    let bm = (b + t.tr_mul(m)) * (1.0 / (1.0 + a.dot(m)));
    Some(coherence_scale(dim) * (bm.norm() - b.norm()))
}

/// Unit vector from `2d − 2` angles: `d − 1` hyperspherical magnitudes
/// followed by `d − 1` relative phases.
pub fn state_from_angles(angles: &[f64], dim: usize) -> CVector {
    let (mags, phases) = angles.split_at(dim - 1);
    let mut out = CVector::zeros(dim);
    let mut sin_prod = 1.0;
    for k in 0..dim {
        let r = if k + 1 < dim {
            let r = sin_prod * mags[k].cos();
            sin_prod *= mags[k].sin();
            r
        } else {
            sin_prod
        };
        let phase = if k == 0 { 0.0 } else { phases[k - 1] };
        out[k] = Complex64::from_polar(r, phase);
    }
    out
}

/// Inverse of [`state_from_angles`] up to a global phase.
pub fn angles_from_state(psi: &CVector) -> Vec<f64> {
    let dim = psi.len();
    let r: Vec<f64> = psi.iter().map(|z| z.norm()).collect();
    let mut angles = Vec::with_capacity(2 * dim - 2);
    for i in 0..dim - 1 {
        let tail: f64 = r[i + 1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        angles.push(tail.atan2(r[i]));
    }
    let ref_phase = psi[0].arg();
    for k in 1..dim {
        angles.push(psi[k].arg() - ref_phase);
    }
    angles
}

fn expectation_bloch(psi: &CVector, basis: &GeneratorBasis) -> DVector<f64> {
    let half_d = basis.dim() as f64 / 2.0;
    DVector::from_iterator(
        basis.len(),
        basis.generators().iter().map(|g| {
            let gpsi = g.entries() * psi;
            half_d * psi.dotc(&gpsi).re
        }),
    )
}

fn axis_starts(dim: usize) -> Vec<CVector> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::new();
    for k in 0..dim {
        let mut v = CVector::zeros(dim);
        v[k] = one;
        out.push(v);
    }
    for j in 0..dim {
        for k in j + 1..dim {
            for phase in [one, i] {
                let mut v = CVector::zeros(dim);
                v[j] = one;
                v[k] = phase;
                out.push(v.unscale(2f64.sqrt()));
            }
        }
    }
    out
}

/// Multi-start maximization of the forward increment for given Bloch data.
pub fn maximize_increment(
    a: &DVector<f64>,
    b: &DVector<f64>,
    t: &DMatrix<f64>,
    basis: &GeneratorBasis,
    opts: &OptimizerOptions,
) -> Result<CicResult> {
    opts.validate()?;
    let dim = basis.dim();
    let objective = |x: &[f64]| -> f64 {
        let psi = state_from_angles(x, dim);
        let m = expectation_bloch(&psi, basis);
        match raw_increment(a, b, t, &m, dim) {
            Some(v) => -v,
            None => f64::INFINITY,
        }
    };
    let simplex = SimplexOptions {
        max_iters: opts.max_iters,
        step_tolerance: opts.step_tolerance,
        value_tolerance: opts.value_tolerance,
        initial_step: 0.3,
    };

    let mut rng = seeded(opts.seed);
    let mut starts = axis_starts(dim);
    starts.extend((0..opts.n_starts).map(|_| haar_pure_state(dim, &mut rng)));

    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for start in &starts {
        let r = nelder_mead(objective, &angles_from_state(start), &simplex);
        if !r.value.is_finite() {
            continue;
        }
        let raw = -r.value;
        if best.as_ref().is_none_or(|(v, _, _)| raw > *v) {
            best = Some((raw, r.x, r.converged));
        }
    }
    let (best_raw, x, converged) = best.ok_or_else(|| {
        Error::Optimizer("no start produced an outcome with nonzero probability".into())
    })?;
    let argmax_state = state_from_angles(&x, dim);
    let argmax_m = expectation_bloch(&argmax_state, basis);
    Ok(CicResult {
        value: best_raw.max(0.0),
        argmax_m,
        argmax_state,
        diagnostics: CicDiagnostics {
            starts: starts.len(),
            best_raw,
            converged,
        },
    })
}

/// `C→`: Alice measures, Bob's coherence is tracked.
pub fn cic_forward(rho: &DensityMatrix, opts: &OptimizerOptions) -> Result<CicResult> {
    let d = rho.local_dim()?;
    let basis = build_generators(d)?;
    let bloch = decompose(rho, &basis)?;
    maximize_increment(&bloch.a, &bloch.b, &bloch.t, &basis, opts)
}

/// `C←`: Bob measures, Alice's coherence is tracked.
pub fn cic_backward(rho: &DensityMatrix, opts: &OptimizerOptions) -> Result<CicResult> {
    let d = rho.local_dim()?;
    let basis = build_generators(d)?;
    let bloch = decompose(rho, &basis)?.swapped();
    maximize_increment(&bloch.a, &bloch.b, &bloch.t, &basis, opts)
}

/// Exact CIC of a two-qubit state with `a = b = 0`: the largest singular value of `T`.
pub fn cic_exact_centered_qubit(t: &DMatrix<f64>) -> Result<f64> {
    if t.shape() != (3, 3) {
        return Err(Error::Shape(format!(
            "expected a 3x3 correlation matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    Ok(t.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max))
}

/// [`cic_exact_centered_qubit`] for a full state, checking that both local
/// Bloch vectors vanish.
pub fn cic_exact_centered(rho: &DensityMatrix) -> Result<f64> {
    let d = rho.local_dim()?;
    if d != 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "closed form is for two qubits",
        });
    }
    let bloch = decompose(rho, &build_generators(2)?)?;
    let off = bloch.a.norm().max(bloch.b.norm());
    if off > 1e-10 {
        return Err(Error::InvalidState(format!(
            "local Bloch vectors do not vanish (norm {off:.3e})"
        )));
    }
    cic_exact_centered_qubit(&bloch.t)
}

/// Increment `D(ρ_B^M) − D(ρ_B)` evaluated through the state update.
pub fn increment_by_state(rho: &DensityMatrix, element: &MeasurementElement) -> Result<f64> {
    let rho_b = partial_trace(rho, Side::A)?;
    let (cond, _) = conditioned_state(rho, element)?;
    Ok(degree_of_coherence(&cond)? - degree_of_coherence(&rho_b)?)
}

/// Grid search over `n_grid` qubit projectors on a Fibonacci sphere plus
/// `M = I`, evaluated via the state update. Validation oracle for `cic_forward`.
pub fn cic_brute_force_oracle(rho: &DensityMatrix, n_grid: usize) -> Result<f64> {
    let d = rho.local_dim()?;
    if d != 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "grid oracle needs a qubit on Alice's side",
        });
    }
    if n_grid < 100 {
        return Err(Error::Config(format!("n_grid must be at least 100, got {n_grid}")));
    }
    let basis = build_generators(2)?;
    let rho_b = partial_trace(rho, Side::A)?;
    let base = degree_of_coherence(&rho_b)?;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = 0.0_f64;
    for i in 0..n_grid {
        let z = 1.0 - (2 * i + 1) as f64 / n_grid as f64;
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = golden * i as f64;
        let psi = CVector::from_vec(vec![
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ]);
        let element = MeasurementElement::from_state(&psi, &basis)?;
        match conditioned_state(rho, &element) {
            Ok((cond, _)) => best = best.max(degree_of_coherence(&cond)? - base),
            Err(Error::ZeroProbability { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}
