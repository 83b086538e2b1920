//! Seeded sampling of states and unitaries.
//!
//! Pure states are Haar-uniform (normalized complex Gaussian vectors); mixed
//! states are reductions of Haar pure states on a doubled space.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::state::{partial_trace_dims, CMatrix, CVector, DensityMatrix, Side};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn haar_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Full-rank random state of dimension `dim`.
pub fn random_mixed_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let psi = haar_pure_state(dim * dim, rng);
    let big = &psi * psi.adjoint();
    DensityMatrix::from_trusted(partial_trace_dims(&big, dim, dim, Side::B))
}

/// Random mixed state on `C^d ⊗ C^d`.
pub fn random_bipartite_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    random_mixed_state(d * d, rng)
}

pub fn random_pure_bipartite<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_trusted({
        let psi = haar_pure_state(d * d, rng);
        &psi * psi.adjoint()
    })
}

pub fn random_product_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let ra = random_mixed_state(d, rng);
    let rb = random_mixed_state(d, rng);
    ra.tensor(&rb)
}

/// `U_A ⊗ U_B` with independent Haar factors.
pub fn random_local_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let ua = haar_unitary(d, rng);
    let ub = haar_unitary(d, rng);
    ua.kronecker(&ub)
}

/// `Σ_i sqrt(p_i) U_A|i⟩ ⊗ U_B|i⟩`; `weights` are normalized internally.
pub fn pure_with_schmidt(weights: &[f64], ua: &CMatrix, ub: &CMatrix) -> DensityMatrix {
    let d = weights.len();
    let total: f64 = weights.iter().sum();
    let mut psi = CVector::zeros(d * d);
    for (i, &w) in weights.iter().enumerate() {
        let amp = (w / total).sqrt();
        for a in 0..d {
            for b in 0..d {
                psi[a * d + b] += ua[(a, i)] * ub[(b, i)] * amp;
            }
        }
    }
    DensityMatrix::from_trusted(&psi * psi.adjoint())
}

/// `(1/√d) Σ_i |ii⟩`.
pub fn maximally_entangled(d: usize) -> DensityMatrix {
    let id = CMatrix::identity(d, d);
    pure_with_schmidt(&vec![1.0; d], &id, &id)
}

/// Two-qubit state with vanishing local Bloch vectors: a random mixture of
/// the four Bell states, rotated by a random local unitary.
pub fn random_centered_qubit_pair<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    let bells = [
        [c(h), c(0.0), c(0.0), c(h)],
        [c(h), c(0.0), c(0.0), c(-h)],
        [c(0.0), c(h), c(h), c(0.0)],
        [c(0.0), c(h), c(-h), c(0.0)],
    ];
    // flat Dirichlet weights
    let w: Vec<f64> = (0..4).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let mut m = CMatrix::zeros(4, 4);
    for (b, wi) in bells.iter().zip(&w) {
        let v = CVector::from_row_slice(b);
        m += &v * v.adjoint() * c(wi / total);
    }
    let u = random_local_unitary(2, rng);
    DensityMatrix::from_trusted(&u * m * u.adjoint())
}
