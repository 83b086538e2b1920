//! Runtime property suites, one per module, driven by a seed. Each property
//! reports the worst deviation it saw against its bound.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use crate::cic::{cic_exact_centered, cic_forward, raw_increment, OptimizerOptions};
use crate::error::{Error, Result};
use crate::kitaev::{cic_link, link_bloch_state, link_correlator, KitaevCouplings, LinkType};
use crate::random::{
    haar_pure_state, haar_unitary, maximally_entangled, pure_with_schmidt, random_bipartite_state,
    random_centered_qubit_pair, random_local_unitary, random_mixed_state, random_product_state, seeded,
    SeededRng,
};
use crate::scan::{detect_kinks, grid, susceptibility};
use crate::state::{
    bloch_conditioned_vector, build_generators, conditioned_state, decompose, degree_of_coherence,
    local_bloch_vector, reconstruct, DensityMatrix, MeasurementElement,
};
use crate::xxz::{cic_xxz, correlators, ground_state_energy, xxz_bloch_state, xxz_scan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    QuantumCore,
    Cic,
    Xxz,
    Kitaev,
    Scan,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::QuantumCore, Suite::Cic, Suite::Xxz, Suite::Kitaev, Suite::Scan];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::QuantumCore => "quantum-core",
            Suite::Cic => "cic",
            Suite::Xxz => "xxz",
            Suite::Kitaev => "kitaev",
            Suite::Scan => "scan",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a suite name; `all` yields every suite.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Suite::ALL.to_vec());
    }
    s.split(',').map(|p| p.parse()).collect()
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == key || (key == "core" && *suite == Suite::QuantumCore))
            .ok_or_else(|| Error::Config(format!("unknown property suite '{s}'")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyOutcome {
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation (or value) compared against `bound`.
    pub worst: f64,
    pub bound: f64,
    pub detail: Option<String>,
}

impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: worst {:.3e} (bound {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.worst,
            self.bound
        )?;
        if let Some(d) = &self.detail {
            write!(f, " [{d}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PropsConfig {
    pub seed: u64,
    /// Random samples per property for the cheap suites.
    pub samples: usize,
}

impl Default for PropsConfig {
    fn default() -> Self {
        Self { seed: 0, samples: 50 }
    }
}

struct Runner {
    suite: Suite,
    rng: SeededRng,
    out: Vec<PropertyOutcome>,
}

impl Runner {
    /// Records `worst ≤ bound`; errors count as failures.
    fn check(&mut self, name: &'static str, bound: f64, body: impl FnOnce(&mut SeededRng) -> Result<f64>) {
        let (worst, detail) = match body(&mut self.rng) {
            Ok(w) => (w, None),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        self.out.push(PropertyOutcome {
            suite: self.suite,
            name,
            passed: worst <= bound,
            worst,
            bound,
            detail,
        });
    }
}

pub fn run_suites(suites: &[Suite], cfg: &PropsConfig) -> Vec<PropertyOutcome> {
    suites
        .iter()
        .flat_map(|&suite| {
            let mut runner = Runner {
                suite,
                rng: seeded(cfg.seed ^ (suite as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
                out: Vec::new(),
            };
            match suite {
                Suite::QuantumCore => quantum_core(&mut runner, cfg.samples),
                Suite::Cic => cic_suite(&mut runner, cfg.samples),
                Suite::Xxz => xxz_suite(&mut runner),
                Suite::Kitaev => kitaev_suite(&mut runner),
                Suite::Scan => scan_suite(&mut runner),
            }
            runner.out
        })
        .collect()
}

fn quantum_core(r: &mut Runner, n: usize) {
    r.check("generator-orthonormality", 1e-12, |_| {
        let mut worst = 0.0_f64;
        for d in 2..=4 {
            let basis = build_generators(d)?;
            for j in 0..basis.len() {
                for k in 0..basis.len() {
                    let ip = (basis.get(j) * basis.get(k)).trace();
                    let want = if j == k { 2.0 } else { 0.0 };
                    worst = worst.max((ip.re - want).abs()).max(ip.im.abs());
                }
            }
        }
        Ok(worst)
    });
    r.check("decompose-reconstruct-roundtrip", 1e-12, |rng| {
        let mut worst = 0.0_f64;
        for i in 0..n {
            let d = 2 + i % 3;
            let basis = build_generators(d)?;
            let rho = random_bipartite_state(d, rng);
            let back = reconstruct(&decompose(&rho, &basis)?, &basis)?;
            worst = worst.max((back.matrix - rho.entries()).norm());
        }
        Ok(worst)
    });
    r.check("purity-identity", 1e-12, |rng| {
        let mut worst = 0.0_f64;
        for i in 0..n {
            let d = 2 + i % 4;
            let basis = build_generators(d)?;
            let rho = random_mixed_state(d, rng);
            let b = local_bloch_vector(&rho, &basis)?;
            worst = worst.max((rho.purity() - (1.0 / d as f64 + b.norm_squared() / 2.0)).abs());
        }
        Ok(worst)
    });
    r.check("coherence-unitary-invariance", 1e-12, |rng| {
        let mut worst = 0.0_f64;
        for i in 0..n {
            let d = 2 + i % 4;
            let rho = random_mixed_state(d, rng);
            let u = haar_unitary(d, rng);
            let rotated = rho.conjugate_by(&u)?;
            worst = worst.max((degree_of_coherence(&rotated)? - degree_of_coherence(&rho)?).abs());
        }
        Ok(worst)
    });
    r.check("bloch-update-matches-state-update", 1e-10, |rng| {
        let mut worst = 0.0_f64;
        for i in 0..n {
            let d = 2 + i % 3;
            let basis = build_generators(d)?;
            let rho = random_bipartite_state(d, rng);
            let element = MeasurementElement::from_state(&haar_pure_state(d, rng), &basis)?;
            let (cond, _) = conditioned_state(&rho, &element)?;
            let direct = local_bloch_vector(&cond, &basis)?;
            let via_bloch = bloch_conditioned_vector(&decompose(&rho, &basis)?, &element.m)?;
            worst = worst.max((direct - via_bloch).amax());
        }
        Ok(worst)
    });
    r.check("pure-state-bloch-radius", 1e-10, |rng| {
        let mut worst = 0.0_f64;
        for i in 0..n {
            let d = 2 + i % 7;
            let basis = build_generators(d)?;
            let psi = haar_pure_state(d, rng);
            let b = local_bloch_vector(&DensityMatrix::from_pure(&psi)?, &basis)?;
            let want = (2.0 * (d as f64 - 1.0) / d as f64).sqrt();
            worst = worst.max((b.norm() - want).abs());
        }
        Ok(worst)
    });
}

fn cic_suite(r: &mut Runner, n: usize) {
    let opts = OptimizerOptions::default();
    r.check("local-unitary-invariance", 1e-5, |rng| {
        let mut worst = 0.0_f64;
        for _ in 0..n {
            let rho = random_bipartite_state(2, rng);
            let rotated = rho.conjugate_by(&random_local_unitary(2, rng))?;
            worst = worst.max((cic_forward(&rho, &opts)?.value - cic_forward(&rotated, &opts)?.value).abs());
        }
        Ok(worst)
    });
    r.check("product-states-vanish", 1e-7, |rng| {
        let mut worst = 0.0_f64;
        for _ in 0..n {
            worst = worst.max(cic_forward(&random_product_state(2, rng), &opts)?.value);
        }
        Ok(worst)
    });
    r.check("bounded-by-one", 1.0 + 1e-9, |rng| {
        let mut worst = 0.0_f64;
        for _ in 0..n {
            let v = cic_forward(&random_bipartite_state(2, rng), &opts)?.value;
            if v < 0.0 {
                return Err(Error::Optimizer(format!("negative CIC {v}")));
            }
            worst = worst.max(v);
        }
        Ok(worst)
    });
    r.check("maximally-entangled-is-one", 1e-6, |_| {
        let mut worst = 0.0_f64;
        for d in [2, 3] {
            worst = worst.max((cic_forward(&maximally_entangled(d), &opts)?.value - 1.0).abs());
        }
        Ok(worst)
    });
    r.check("non-maximal-pure-below-one", 1.0 - 1e-4, |rng| {
        let mut worst = 0.0_f64;
        for i in 0..n.min(20) {
            let d = 2 + i % 2;
            let mut w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            let top = w.iter().cloned().fold(0.0, f64::max);
            if top < 1.0 / d as f64 + 0.05 {
                w[0] += 0.2;
            }
            let rho = pure_with_schmidt(&w, &haar_unitary(d, rng), &haar_unitary(d, rng));
            worst = worst.max(cic_forward(&rho, &opts)?.value);
        }
        Ok(worst)
    });
    r.check("rank-one-sufficiency", 1e-6, |rng| {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..n.min(20) {
            let rho = random_bipartite_state(2, rng);
            let best = cic_forward(&rho, &opts)?.value;
            let bl = decompose(&rho, &build_generators(2)?)?;
            for _ in 0..100 {
                // full-rank qubit element: Bloch direction strictly inside the ball
                let dir = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
                let m = dir.normalize() * rng.random::<f64>().cbrt() * (1.0 - 1e-9);
                if let Some(v) = raw_increment(&bl.a, &bl.b, &bl.t, &m, 2) {
                    worst = worst.max(v - best);
                }
            }
        }
        Ok(worst.max(0.0))
    });
    r.check("exact-centered-formula", 1e-6, |rng| {
        let mut worst = 0.0_f64;
        for _ in 0..n {
            let rho = random_centered_qubit_pair(rng);
            worst = worst.max((cic_exact_centered(&rho)? - cic_forward(&rho, &opts)?.value).abs());
        }
        Ok(worst)
    });
}

fn xxz_suite(r: &mut Runner) {
    let deltas: Vec<f64> = (0..26).map(|i| -2.0 + 0.2 * i as f64 + 0.013).collect();
    r.check("hellmann-feynman-closure", 1e-8, |_| {
        let mut worst = 0.0_f64;
        for &d in &deltas {
            let c = correlators(d)?;
            worst = worst.max((4.0 * c.eg - 2.0 * c.xx - d * c.zz).abs());
        }
        Ok(worst)
    });
    r.check("energy-continuity", 1e-6, |_| {
        let mut worst = 0.0_f64;
        for c in [-1.0, 1.0] {
            let jump = (ground_state_energy(c - 1e-9)? - ground_state_energy(c + 1e-9)?).abs();
            worst = worst.max(jump);
        }
        Ok(worst)
    });
    r.check("closed-form-matches-optimizer", 1e-5, |_| {
        let opts = OptimizerOptions::default();
        let basis = build_generators(2)?;
        let mut worst = 0.0_f64;
        for i in 0..20 {
            let d = -1.9 + 0.25 * i as f64;
            let rho = reconstruct(&xxz_bloch_state(d)?, &basis)?.into_state()?;
            worst = worst.max((cic_forward(&rho, &opts)?.value - cic_xxz(d)?.value).abs());
        }
        Ok(worst)
    });
    r.check("ferromagnetic-plateau", 1e-8, |_| {
        let mut worst = 0.0_f64;
        for i in 0..20 {
            let d = -2.0 + 0.049 * i as f64;
            worst = worst.max((cic_xxz(d)?.value - 1.0).abs());
        }
        Ok(worst)
    });
    r.check("single-branch-crossover", 0.01, |_| {
        let g = grid(0.01, 1.99, 0.01)?;
        let sign: Vec<bool> = g
            .iter()
            .map(|&d| correlators(d).map(|c| c.xx.abs() > c.zz.abs()))
            .collect::<Result<_>>()?;
        let flips: Vec<usize> = (1..sign.len()).filter(|&i| sign[i] != sign[i - 1]).collect();
        match flips.as_slice() {
            [i] => Ok((0.5 * (g[*i] + g[*i - 1]) - 1.0).abs()),
            _ => Err(Error::Grid(format!("{} sign changes", flips.len()))),
        }
    });
}

fn random_couplings(rng: &mut SeededRng) -> Result<KitaevCouplings> {
    let w: Vec<f64> = (0..3).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    KitaevCouplings::new(w[0] / s, w[1] / s, w[2] / s)
}

fn kitaev_suite(r: &mut Runner) {
    let tol = 1e-6;
    r.check("correlator-bounded", 1.0, |rng| {
        let mut worst = 0.0_f64;
        for _ in 0..10 {
            let j = random_couplings(rng)?;
            for link in LinkType::ALL {
                worst = worst.max(link_correlator(&j, link, tol)?.abs());
            }
        }
        Ok(worst)
    });
    r.check("permutation-symmetry", 2.0 * tol, |rng| {
        let mut worst = 0.0_f64;
        for _ in 0..5 {
            let j = random_couplings(rng)?;
            let z = link_correlator(&j, LinkType::Z, tol)?;
            let x = link_correlator(&KitaevCouplings::new(j.jz, j.jy, j.jx)?, LinkType::X, tol)?;
            let y = link_correlator(&KitaevCouplings::new(j.jx, j.jz, j.jy)?, LinkType::Y, tol)?;
            worst = worst.max((z - x).abs()).max((z - y).abs());
        }
        Ok(worst)
    });
    r.check("symmetric-point-agreement", 2.0 * tol, |_| {
        let j = KitaevCouplings::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)?;
        let v: Vec<f64> = LinkType::ALL
            .iter()
            .map(|&l| cic_link(&j, l, tol))
            .collect::<Result<_>>()?;
        Ok((v[0] - v[1]).abs().max((v[1] - v[2]).abs()).max((v[0] - v[2]).abs()))
    });
    r.check("closed-form-matches-optimizer", 1e-5, |rng| {
        let opts = OptimizerOptions::default();
        let basis = build_generators(2)?;
        let mut worst = 0.0_f64;
        for i in 0..10 {
            let j = random_couplings(rng)?;
            let link = LinkType::ALL[i % 3];
            let c = link_correlator(&j, link, tol)?;
            let rho = reconstruct(&link_bloch_state(c, link)?, &basis)?.into_state()?;
            worst = worst.max((cic_forward(&rho, &opts)?.value - c.abs()).abs());
        }
        Ok(worst)
    });
    r.check("classical-state-has-cic", 0.0, |rng| {
        // diagonal in the σz product basis, yet the CIC equals |⟨σzσz⟩| > 0
        let basis = build_generators(2)?;
        let mut worst = 0.0_f64;
        for _ in 0..5 {
            let j = random_couplings(rng)?;
            let c = link_correlator(&j, LinkType::Z, tol)?;
            let rho = reconstruct(&link_bloch_state(c, LinkType::Z)?, &basis)?.into_state()?;
            let m = rho.entries();
            let off_diagonal = (0..4)
                .flat_map(|a| (0..4).map(move |b| (a, b)))
                .filter(|(a, b)| a != b)
                .map(|(a, b)| m[(a, b)].norm())
                .fold(0.0, f64::max);
            worst = worst.max(off_diagonal);
            if c.abs() > 1e-9 && cic_link(&j, LinkType::Z, tol)? <= 0.0 {
                return Err(Error::Optimizer("vanishing CIC for a correlated state".into()));
            }
        }
        Ok(worst)
    });
}

fn scan_suite(r: &mut Runner) {
    r.check("linear-susceptibility-constant", 1e-12, |rng| {
        let slope = rng.random_range(-3.0..3.0);
        let x = grid(-1.0, 2.0, 0.01)?;
        let v: Vec<f64> = x.iter().map(|t| slope * t + 0.3).collect();
        let s = susceptibility(&x, &v)?;
        Ok(s.iter().map(|s| (s - slope).abs()).fold(0.0, f64::max))
    });
    r.check("smooth-curves-have-no-kinks", 0.0, |_| {
        let x = grid(0.0, 1.0, 0.01)?;
        let curves: [fn(f64) -> f64; 3] = [|t| t.sin(), |t| 1.0 + t * t - 2.0 * t * t * t, |t| (3.0 * t).exp()];
        let mut flagged = 0;
        for f in curves {
            let v: Vec<f64> = x.iter().map(|&t| f(t)).collect();
            flagged += detect_kinks(&x, &v, 8.0)?.len();
        }
        Ok(flagged as f64)
    });
    r.check("kink-location-within-one-step", 0.01 + 1e-12, |rng| {
        let x = grid(0.0, 1.0, 0.01)?;
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let at = rng.random_range(0.2..0.8);
            let (s1, s2): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if (s1 - s2).abs() < 0.1 {
                continue;
            }
            let v: Vec<f64> = x
                .iter()
                .map(|&t| if t < at { s1 * (t - at) } else { s2 * (t - at) })
                .collect();
            let cps = detect_kinks(&x, &v, 8.0)?;
            if cps.len() != 1 {
                return Err(Error::Grid(format!("{} kinks for a single corner at {at}", cps.len())));
            }
            worst = worst.max((cps[0].location - at).abs());
        }
        Ok(worst)
    });
    r.check("scan-csv-deterministic", 0.0, |_| {
        let a = xxz_scan(-1.5, 1.5, 0.05)?.table().to_csv();
        let b = xxz_scan(-1.5, 1.5, 0.05)?.table().to_csv();
        Ok(if a == b { 0.0 } else { 1.0 })
    });
}

/// Whether every outcome passed.
pub fn all_passed(outcomes: &[PropertyOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}
