//! Link correlators and CIC of the Kitaev honeycomb model in the
//! thermodynamic limit.
//!
//! For a z link the two-site correlator is the Brillouin-zone average of
//! `ε/√(ε²+δ²)` with `ε = Jz + Jx cos ωx + Jy cos ωy` and
//! `δ = Jx sin ωx + Jy sin ωy`, i.e. of `Re f/|f|` for
//! `f = Jz + Jx e^{iωx} + Jy e^{iωy}`. The x and y links follow by moving
//! the link's own coupling into the `Jz` slot.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, QuadOptions};
use crate::scan::{grid, Cell, ScanResult, Table, DEFAULT_Z_THRESHOLD};
use crate::state::BlochRepresentation;

/// Internal quadrature targets are this fraction of the requested tolerance,
/// which keeps scan curves smooth enough for second differences.
const TOLERANCE_MARGIN: f64 = 1e-2;
const MIN_INTERNAL_TOL: f64 = 1e-13;
const PLANE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KitaevCouplings {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl KitaevCouplings {
    pub fn new(jx: f64, jy: f64, jz: f64) -> Result<Self> {
        if !(jx.is_finite() && jy.is_finite() && jz.is_finite()) {
            return Err(Error::Config(format!("couplings must be finite: ({jx}, {jy}, {jz})")));
        }
        Ok(Self { jx, jy, jz })
    }

    /// Couplings on the `jx + jy + jz = 1` plane.
    pub fn on_plane(jx: f64, jy: f64, jz: f64) -> Result<Self> {
        let j = Self::new(jx, jy, jz)?;
        j.check_plane()?;
        Ok(j)
    }

    pub fn check_plane(&self) -> Result<()> {
        let s = self.jx + self.jy + self.jz;
        if (s - 1.0).abs() > PLANE_TOLERANCE {
            return Err(Error::Config(format!("couplings sum to {s}, not 1")));
        }
        Ok(())
    }

    /// Relabels so that the coupling of `link` sits in the `jz` slot.
    pub fn permuted_for(&self, link: LinkType) -> Self {
        match link {
            LinkType::Z => *self,
            LinkType::X => Self {
                jx: self.jz,
                jy: self.jy,
                jz: self.jx,
            },
            LinkType::Y => Self {
                jx: self.jx,
                jy: self.jz,
                jz: self.jy,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkType {
    X,
    Y,
    Z,
}

impl LinkType {
    pub const ALL: [LinkType; 3] = [LinkType::X, LinkType::Y, LinkType::Z];
}

impl fmt::Display for LinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkType::X => "x",
            LinkType::Y => "y",
            LinkType::Z => "z",
        })
    }
}

impl FromStr for LinkType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(LinkType::X),
            "y" => Ok(LinkType::Y),
            "z" => Ok(LinkType::Z),
            other => Err(Error::Config(format!("unknown link '{other}' (expected x, y or z)"))),
        }
    }
}

/// Integrand of the z-link correlator at one Brillouin-zone point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BzIntegrand {
    pub omega_x: f64,
    pub omega_y: f64,
    pub epsilon: f64,
    pub delta_k: f64,
}

impl BzIntegrand {
    pub fn new(j: &KitaevCouplings, omega_x: f64, omega_y: f64) -> Self {
        Self {
            omega_x,
            omega_y,
            epsilon: j.jz + j.jx * omega_x.cos() + j.jy * omega_y.cos(),
            delta_k: j.jx * omega_x.sin() + j.jy * omega_y.sin(),
        }
    }

    /// `ε/√(ε²+δ²)`, taken as 0 where both vanish.
    pub fn value(&self) -> f64 {
        ratio(self.epsilon, self.delta_k)
    }
}

#[inline]
fn ratio(re: f64, im: f64) -> f64 {
    let r = re.hypot(im);
    if r == 0.0 {
        0.0
    } else {
        re / r
    }
}

/// Wraps an angle into `(−π, π]`.
fn wrap(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

fn with_breakpoints(extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts = vec![-PI, PI];
    pts.extend(extra.into_iter().filter(|p| p.is_finite() && p.abs() < PI));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    pts
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(1e-10..=1e-3).contains(&tol) {
        return Err(Error::Config(format!("tolerance {tol} outside [1e-10, 1e-3]")));
    }
    Ok(())
}

/// Brillouin-zone average of `Re f/|f|` for the given link.
///
/// The `ωx` integral is done for each `ωy` with a breakpoint where `|f|` is
/// smallest; the `ωy` integral gets breakpoints at the Dirac points. Both are
/// adaptive Gauss–Kronrod with error budgets that sum to `tol`.
pub fn link_correlator(j: &KitaevCouplings, link: LinkType, tol: f64) -> Result<f64> {
    check_tolerance(tol)?;
    KitaevCouplings::new(j.jx, j.jy, j.jz)?;
    let p = j.permuted_for(link);
    let internal = (tol * TOLERANCE_MARGIN).max(MIN_INTERNAL_TOL);
    let inner_opts = QuadOptions {
        abs_tol: PI * internal,
        rel_tol: 0.0,
        max_subdivisions: 400,
    };
    let outer_opts = QuadOptions {
        abs_tol: 2.0 * PI * PI * internal,
        rel_tol: 0.0,
        max_subdivisions: 2000,
    };

    let inner = |wy: f64| -> Result<f64> {
        let a = Complex64::new(p.jz + p.jy * wy.cos(), p.jy * wy.sin());
        let eval = |wx: f64| {
            let f = a + Complex64::new(p.jx * wx.cos(), p.jx * wx.sin());
            ratio(f.re, f.im)
        };
        if p.jx == 0.0 {
            return Ok(2.0 * PI * eval(0.0));
        }
        // |f| is minimal where Jx e^{iωx} points against A
        let closest = wrap((-a * p.jx.signum()).arg());
        let points = with_breakpoints([closest]);
        Ok(integrate_panels(eval, &points, &inner_opts)?.value)
    };

    // Dirac points: |Jz + Jy e^{iωy}| = |Jx|
    let mut dirac = Vec::new();
    if p.jz != 0.0 && p.jy != 0.0 {
        let c = (p.jx * p.jx - p.jz * p.jz - p.jy * p.jy) / (2.0 * p.jz * p.jy);
        if c.abs() <= 1.0 {
            let beta = c.acos();
            dirac.extend([-beta, beta]);
        }
    }
    let points = with_breakpoints(dirac.into_iter().chain([0.0]));

    let mut failure = None;
    let est = integrate_panels(
        |wy| match inner(wy) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &points,
        &outer_opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((est.value / (4.0 * PI * PI)).clamp(-1.0, 1.0))
}

/// CIC of the two spins on a link: the reduced state has `a = b = 0` and a
/// single nonzero correlation entry, so the CIC is its magnitude.
pub fn cic_link(j: &KitaevCouplings, link: LinkType, tol: f64) -> Result<f64> {
    Ok(link_correlator(j, link, tol)?.abs())
}

/// Centered two-qubit state with `T = diag(0, 0, c)` along the link axis.
pub fn link_bloch_state(correlator: f64, link: LinkType) -> Result<BlochRepresentation> {
    let mut diag = [0.0; 3];
    let axis = match link {
        LinkType::X => 0,
        LinkType::Y => 1,
        LinkType::Z => 2,
    };
    diag[axis] = correlator;
    BlochRepresentation::centered(2, DMatrix::from_diagonal(&DVector::from_row_slice(&diag)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    GaplessB,
    GappedAx,
    GappedAy,
    GappedAz,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::GaplessB => "B",
            Phase::GappedAx => "Ax",
            Phase::GappedAy => "Ay",
            Phase::GappedAz => "Az",
        }
    }
}

/// Gapless iff each `|J|` is at most the sum of the other two (boundary
/// included); otherwise the gapped phase of the dominant coupling.
pub fn phase_region(j: &KitaevCouplings) -> Phase {
    let (x, y, z) = (j.jx.abs(), j.jy.abs(), j.jz.abs());
    if x > y + z {
        Phase::GappedAx
    } else if y > x + z {
        Phase::GappedAy
    } else if z > x + y {
        Phase::GappedAz
    } else {
        Phase::GaplessB
    }
}

/// One-parameter line through the `jx + jy + jz = 1` plane, parameterized
/// by `jz`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub enum KitaevLine {
    /// `jx = jy = (1 − jz)/2`.
    #[default]
    Symmetric,
    /// `jx / jy = ratio`.
    Ratio(f64),
}

impl KitaevLine {
    pub fn couplings(&self, jz: f64) -> Result<KitaevCouplings> {
        let rest = 1.0 - jz;
        match *self {
            KitaevLine::Symmetric => KitaevCouplings::new(rest / 2.0, rest / 2.0, jz),
            KitaevLine::Ratio(r) => KitaevCouplings::new(rest * r / (1.0 + r), rest / (1.0 + r), jz),
        }
    }
}

impl fmt::Display for KitaevLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KitaevLine::Symmetric => f.write_str("jx=jy=(1-jz)/2"),
            KitaevLine::Ratio(r) => write!(f, "jx/jy={r}"),
        }
    }
}

impl FromStr for KitaevLine {
    type Err = Error;
    /// Accepts `jx=jy=(1-jz)/2` or `jx/jy=R` (whitespace ignored).
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        if compact == "jx=jy=(1-jz)/2" || compact == "symmetric" {
            return Ok(KitaevLine::Symmetric);
        }
        if let Some(r) = compact.strip_prefix("jx/jy=") {
            let r: f64 = r
                .parse()
                .map_err(|_| Error::Config(format!("bad ratio in line '{s}'")))?;
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!("line ratio must be positive, got {r}")));
            }
            return Ok(KitaevLine::Ratio(r));
        }
        Err(Error::Config(format!(
            "unsupported line '{s}' (expected \"jx=jy=(1-jz)/2\" or \"jx/jy=R\")"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KitaevRow {
    pub jz: f64,
    pub jx: f64,
    pub jy: f64,
    pub correlator: f64,
    pub cic: f64,
    pub susceptibility: f64,
    pub phase: Phase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KitaevScan {
    pub link: LinkType,
    pub rows: Vec<KitaevRow>,
    pub result: ScanResult,
}

impl KitaevScan {
    pub fn table(&self) -> Table {
        Table {
            header: ["jz", "jx", "jy", "correlator", "cic", "susceptibility", "phase"]
                .map(String::from)
                .to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let mut cells: Vec<Cell> = [r.jz, r.jx, r.jy, r.correlator, r.cic, r.susceptibility]
                        .map(Cell::Number)
                        .to_vec();
                    cells.push(Cell::Text(r.phase.label().into()));
                    cells
                })
                .collect(),
        }
    }
}

/// Scan along `jx = jy = (1 − jz)/2`.
pub fn line_scan(jz_min: f64, jz_max: f64, step: f64, link: LinkType, tol: f64) -> Result<KitaevScan> {
    line_scan_on(KitaevLine::Symmetric, jz_min, jz_max, step, link, tol)
}

pub fn line_scan_on(
    line: KitaevLine,
    jz_min: f64,
    jz_max: f64,
    step: f64,
    link: LinkType,
    tol: f64,
) -> Result<KitaevScan> {
    check_tolerance(tol)?;
    if !(0.0..=1.0).contains(&jz_min) || !(0.0..=1.0).contains(&jz_max) {
        return Err(Error::Config(format!("jz range [{jz_min}, {jz_max}] leaves [0, 1]")));
    }
    let jzs = grid(jz_min, jz_max, step)?;
    let evaluated: Vec<(KitaevCouplings, f64)> = jzs
        .par_iter()
        .map(|&jz| {
            let j = line.couplings(jz)?;
            Ok((j, link_correlator(&j, link, tol)?))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = evaluated.iter().map(|(_, c)| c.abs()).collect();
    let result = ScanResult::from_curve(jzs, values, DEFAULT_Z_THRESHOLD)?;
    let rows = evaluated
        .iter()
        .enumerate()
        .map(|(i, (j, c))| KitaevRow {
            jz: result.parameter[i],
            jx: j.jx,
            jy: j.jy,
            correlator: *c,
            cic: result.value[i],
            susceptibility: result.susceptibility[i],
            phase: phase_region(j),
        })
        .collect();
    Ok(KitaevScan { link, rows, result })
}
