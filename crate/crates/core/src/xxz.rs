//! Nearest-neighbour CIC of the spin-1/2 XXZ chain in the thermodynamic limit.
//!
//! `H = Σ S^x S^x + S^y S^y + Δ S^z S^z`. The ground-state energy per site
//! comes from the Bethe-ansatz contour integral; the two-site correlators
//! follow from it via the Hellmann–Feynman relation
//! `⟨σzσz⟩ = 4 de_g/dΔ` and `⟨σxσx⟩ = (4e_g − Δ⟨σzσz⟩)/2`.

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, QuadOptions};
use crate::scan::{grid, Cell, ScanResult, Table, DEFAULT_Z_THRESHOLD};
use crate::state::BlochRepresentation;

/// Largest imaginary part tolerated in the contour integral.
const IMAGINARY_LIMIT: f64 = 1e-10;
/// Base step of the Richardson-extrapolated derivative.
const DERIVATIVE_STEP: f64 = 1e-4;
/// Half-width of the one-sided windows around `Δ = ±1`.
const ONE_SIDED_WINDOW: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzPoint {
    pub delta: f64,
}

impl XxzPoint {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::Config(format!("anisotropy must be finite, got {delta}")));
        }
        Ok(Self { delta })
    }
}

/// Nearest-neighbour correlators and the energy per site they derive from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzCorrelators {
    /// `⟨σxσx⟩ = ⟨σyσy⟩`.
    pub xx: f64,
    pub zz: f64,
    pub eg: f64,
}

/// Parameterization of `Δ` used by the energy integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralParameter {
    /// `Δ ≤ −1`.
    Ferromagnetic,
    /// `Δ = cos πξ` with `ξ ∈ (0, 1)`.
    Gapless { xi: f64 },
    /// `Δ = 1`.
    Isotropic,
    /// `Δ = cosh πφ`, the `ξ = iφ` continuation.
    Massive { phi: f64 },
}

impl SpectralParameter {
    pub fn from_delta(delta: f64) -> Self {
        if delta <= -1.0 {
            SpectralParameter::Ferromagnetic
        } else if delta < 1.0 {
            SpectralParameter::Gapless { xi: delta.acos() / PI }
        } else if delta == 1.0 {
            SpectralParameter::Isotropic
        } else {
            SpectralParameter::Massive { phi: delta.acosh() / PI }
        }
    }
}

fn contour_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        max_subdivisions: 4000,
    }
}

/// Half-length of the contour so that the `e^{−|t|}` tail drops below 1e-17
/// given a bound on the slowly varying factor.
fn truncation(bound: f64) -> f64 {
    let mut x: f64 = 30.0;
    while 4.0 * bound * (-x).exp() > 1e-17 {
        x += 2.0;
    }
    x
}

/// `∫ g(x) / sinh(x) dx` along `x = t + i/2`, `t ∈ [−X, X]`.
fn contour_integral<G>(g: G, bound: f64) -> Result<f64>
where
    G: Fn(Complex64) -> Complex64,
{
    let half = truncation(bound);
    let n = (2.0 * half).ceil() as usize;
    let points: Vec<f64> = (0..=n).map(|k| -half + 2.0 * half * k as f64 / n as f64).collect();
    let est = integrate_panels(
        |t| {
            let x = Complex64::new(t, 0.5);
            g(x) / x.sinh()
        },
        &points,
        &contour_options(),
    )?;
    if est.value.im.abs() > IMAGINARY_LIMIT {
        return Err(Error::IntegrationFailure {
            estimate: est.value.im.abs(),
            tolerance: IMAGINARY_LIMIT,
        });
    }
    Ok(est.value.re)
}

/// Ground-state energy per site.
///
/// The `Δ ≤ −1` branch is the fully polarized state, `e_g = Δ/4`, which
/// joins the gapless branch continuously at `Δ = −1`.
pub fn ground_state_energy(delta: f64) -> Result<f64> {
    XxzPoint::new(delta)?;
    match SpectralParameter::from_delta(delta) {
        SpectralParameter::Ferromagnetic => Ok(delta / 4.0),
        SpectralParameter::Isotropic => Ok(0.25 - LN_2),
        SpectralParameter::Gapless { xi } => {
            let bound = 1.0 + 1.0 / (xi * 30.0);
            let integral = contour_integral(|x| (x * xi).cosh() / (x * xi).sinh(), bound)?;
            Ok(delta / 4.0 + (PI * xi).sin() / (2.0 * PI) * integral)
        }
        SpectralParameter::Massive { phi } => {
            let bound = 1.0 / (phi / 2.0).tanh();
            let integral = contour_integral(|x| (x * phi).cos() / (x * phi).sin(), bound)?;
            Ok(delta / 4.0 + (PI * phi).sinh() / (2.0 * PI) * integral)
        }
    }
}

/// `de_g/dΔ`, one-sided within the windows around the critical points.
/// At `Δ = ±1` exactly the derivative is taken from the left.
fn energy_derivative(delta: f64) -> Result<f64> {
    if delta <= -1.0 {
        // left derivative of Δ/4
        return Ok(0.25);
    }
    let f = ground_state_energy;
    let near = [-1.0, 1.0]
        .into_iter()
        .find(|c: &f64| (delta - c).abs() < ONE_SIDED_WINDOW);
    let h = DERIVATIVE_STEP;
    match near {
        None => {
            let central = |h: f64| -> Result<f64> { Ok((f(delta + h)? - f(delta - h)?) / (2.0 * h)) };
            Ok((4.0 * central(h / 2.0)? - central(h)?) / 3.0)
        }
        Some(c) => {
            let s = if delta <= c { -1.0 } else { 1.0 };
            let f0 = f(delta)?;
            let one_sided = |h: f64| -> Result<f64> {
                Ok(s * (-3.0 * f0 + 4.0 * f(delta + s * h)? - f(delta + 2.0 * s * h)?) / (2.0 * h))
            };
            Ok((4.0 * one_sided(h / 2.0)? - one_sided(h)?) / 3.0)
        }
    }
}

pub fn correlators(delta: f64) -> Result<XxzCorrelators> {
    let eg = ground_state_energy(delta)?;
    let zz = 4.0 * energy_derivative(delta)?;
    let xx = 0.5 * (4.0 * eg - delta * zz);
    Ok(XxzCorrelators { xx, zz, eg })
}

/// Which term of `max_θ sqrt(xx² sin²θ + zz² cos²θ)` attains the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XxzBranch {
    /// `θ = π/2`: in-plane measurement, `|⟨σxσx⟩|` wins.
    InPlane,
    /// `θ ∈ {0, π}`: axial measurement, `|⟨σzσz⟩|` wins.
    Axial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzCic {
    pub value: f64,
    pub branch: XxzBranch,
    pub correlators: XxzCorrelators,
}

pub fn cic_xxz(delta: f64) -> Result<XxzCic> {
    let correlators = correlators(delta)?;
    let (x, z) = (correlators.xx.abs(), correlators.zz.abs());
    let (value, branch) = if x > z {
        (x, XxzBranch::InPlane)
    } else {
        (z, XxzBranch::Axial)
    };
    Ok(XxzCic {
        value,
        branch,
        correlators,
    })
}

/// Two-site reduced state: `a = b = 0`, `T = diag(xx, xx, zz)`.
pub fn xxz_bloch_state(delta: f64) -> Result<BlochRepresentation> {
    let c = correlators(delta)?;
    let t = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c.xx, c.xx, c.zz]));
    BlochRepresentation::centered(2, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzRow {
    pub delta: f64,
    pub eg: f64,
    pub xx: f64,
    pub zz: f64,
    pub cic: f64,
    pub susceptibility: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XxzScan {
    pub rows: Vec<XxzRow>,
    pub result: ScanResult,
}

impl XxzScan {
    pub fn table(&self) -> Table {
        Table {
            header: ["delta", "eg", "xx", "zz", "cic", "susceptibility"]
                .map(String::from)
                .to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    [r.delta, r.eg, r.xx, r.zz, r.cic, r.susceptibility]
                        .map(Cell::Number)
                        .to_vec()
                })
                .collect(),
        }
    }
}

/// Evaluates the CIC on a uniform `Δ` grid, differentiates the sampled
/// curve and locates its nonanalyticities. Points are evaluated in parallel
/// on the current rayon pool; output order follows the grid.
pub fn xxz_scan(min: f64, max: f64, step: f64) -> Result<XxzScan> {
    let deltas = grid(min, max, step)?;
    let evaluated: Vec<XxzCic> = deltas
        .par_iter()
        .map(|&d| cic_xxz(d))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = evaluated.iter().map(|c| c.value).collect();
    let result = ScanResult::from_curve(deltas, values, DEFAULT_Z_THRESHOLD)?;
    let rows = evaluated
        .iter()
        .enumerate()
        .map(|(i, c)| XxzRow {
            delta: result.parameter[i],
            eg: c.correlators.eg,
            xx: c.correlators.xx,
            zz: c.correlators.zz,
            cic: c.value,
            susceptibility: result.susceptibility[i],
        })
        .collect();
    Ok(XxzScan { rows, result })
}
