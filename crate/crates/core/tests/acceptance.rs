//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cic_core::cic::{cic_brute_force_oracle, cic_exact_centered, cic_forward, OptimizerOptions};
use cic_core::kitaev::{cic_link, line_scan, KitaevCouplings, LinkType};
use cic_core::random::{
    haar_pure_state, haar_unitary, maximally_entangled, pure_with_schmidt, random_bipartite_state,
    random_centered_qubit_pair, random_local_unitary, random_product_state, seeded,
};
use cic_core::scan::{Model, OutputPaths, ScanConfig, ScanRange, Tolerances};
use cic_core::state::{
    bloch_conditioned_vector, build_generators, conditioned_state, decompose, local_bloch_vector, DensityMatrix,
    MeasurementElement,
};
use cic_core::xxz::{cic_xxz, correlators, ground_state_energy, xxz_scan};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{label}: {got} vs {want} (tol {tol:e})"))
    }
}

fn in_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, limit {limit:?}"))
    }
}

fn ground_state_anchors() -> Check {
    let t = Instant::now();
    within("e_g(1)", ground_state_energy(1.0).map_err(|e| e.to_string())?, 0.25 - LN_2, 1e-9)?;
    within("e_g(0)", ground_state_energy(0.0).map_err(|e| e.to_string())?, -1.0 / PI, 1e-8)?;
    let mut worst = 0.0_f64;
    for c in [-1.0, 1.0] {
        let at = ground_state_energy(c).map_err(|e| e.to_string())?;
        for side in [-1e-9, 1e-9] {
            let near = ground_state_energy(c + side).map_err(|e| e.to_string())?;
            worst = worst.max((near - at).abs());
        }
    }
    within("continuity at ±1", worst, 0.0, 1e-6)?;
    in_time(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!("max jump at ±1 {worst:.2e}, {:.1?}", t.elapsed()))
}

fn xxz_critical_points() -> Check {
    let t = Instant::now();
    let scan = pool(1).install(|| xxz_scan(-2.0, 3.0, 0.01)).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let mut locs: Vec<f64> = scan.result.critical_points.iter().map(|c| c.location).collect();
    locs.sort_by(f64::total_cmp);
    let ok = locs.len() == 2 && (locs[0] + 1.0).abs() <= 0.01 + 1e-12 && (locs[1] - 1.0).abs() <= 0.01 + 1e-12;
    if !ok {
        return Err(format!("detected {locs:?}"));
    }
    in_time(elapsed, Duration::from_secs(120))?;
    Ok(format!("kinks at {locs:?}, {elapsed:.1?} on one thread"))
}

fn xxz_phase_values() -> Check {
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let d = -2.0 + 0.01 * i as f64;
        worst = worst.max((cic_xxz(d).map_err(|e| e.to_string())?.value - 1.0).abs());
    }
    within("plateau", worst, 0.0, 1e-8)?;
    within("C(0)", cic_xxz(0.0).map_err(|e| e.to_string())?.value, 2.0 / PI, 1e-6)?;
    let c = correlators(1.0).map_err(|e| e.to_string())?;
    within("|xx| - |zz| at 1", c.xx.abs() - c.zz.abs(), 0.0, 1e-5)?;
    Ok(format!(
        "plateau deviation {worst:.1e}, |xx|-|zz| at 1 = {:.1e}",
        c.xx.abs() - c.zz.abs()
    ))
}

fn kitaev_critical_point() -> Check {
    let t = Instant::now();
    let workers = pool(4);
    let mut found = Vec::new();
    for link in LinkType::ALL {
        let scan = workers
            .install(|| line_scan(0.0, 1.0, 0.002, link, 1e-6))
            .map_err(|e| e.to_string())?;
        let locs: Vec<f64> = scan.result.critical_points.iter().map(|c| c.location).collect();
        if locs.len() != 1 || (locs[0] - 0.5).abs() > 0.002 + 1e-12 {
            return Err(format!("{link} link: detected {locs:?}"));
        }
        found.push(format!("{link}:{}", locs[0]));
    }
    in_time(t.elapsed(), Duration::from_secs(300))?;
    Ok(format!("{} with 4 workers in {:.1?}", found.join(" "), t.elapsed()))
}

fn kitaev_anchors() -> Check {
    let j = |x, y, z| KitaevCouplings::new(x, y, z).map_err(|e| e.to_string());
    let link = |c: &KitaevCouplings, l| cic_link(c, l, 1e-6).map_err(|e| e.to_string());
    within("(0,0,1) z", link(&j(0.0, 0.0, 1.0)?, LinkType::Z)?, 1.0, 1e-8)?;
    within("(1/2,1/2,0) z", link(&j(0.5, 0.5, 0.0)?, LinkType::Z)?, 0.0, 1e-6)?;
    let third = j(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)?;
    let v: Vec<f64> = LinkType::ALL.iter().map(|&l| link(&third, l)).collect::<Result<_, _>>()?;
    let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
    within("symmetric-point spread", spread, 0.0, 2e-6)?;
    Ok(format!("symmetric point {:.10}, spread {spread:.1e}", v[0]))
}

fn property_suites() -> Check {
    let t = Instant::now();
    let opts = OptimizerOptions::default();
    let mut rng = seeded(20_240_601);
    let (mut lu, mut product, mut low, mut high, mut pure_max) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let cic = |rho: &DensityMatrix| cic_forward(rho, &opts).map(|r| r.value).map_err(|e| e.to_string());
    for i in 0..200 {
        let rho = random_bipartite_state(2, &mut rng);
        let a = cic(&rho)?;
        let rotated = rho.conjugate_by(&random_local_unitary(2, &mut rng)).map_err(|e| e.to_string())?;
        lu = lu.max((a - cic(&rotated)?).abs());
        low = low.min(a);
        high = high.max(a);
        product = product.max(cic(&random_product_state(2, &mut rng))?);

        // Schmidt weights at least 0.05 away from uniform
        let d = 2 + i % 2;
        let mut w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        w[0] += 0.2 + w.iter().sum::<f64>();
        let pure = pure_with_schmidt(&w, &haar_unitary(d, &mut rng), &haar_unitary(d, &mut rng));
        pure_max = pure_max.max(cic(&pure)?);
    }
    let me = [cic(&maximally_entangled(2))?, cic(&maximally_entangled(3))?];
    within("local-unitary invariance", lu, 0.0, 1e-5)?;
    if product >= 1e-7 {
        return Err(format!("product-state CIC {product:e}"));
    }
    if low < 0.0 || high > 1.0 + 1e-9 {
        return Err(format!("CIC range [{low}, {high}]"));
    }
    within("maximally entangled d=2", me[0], 1.0, 1e-6)?;
    within("maximally entangled d=3", me[1], 1.0, 1e-6)?;
    if pure_max >= 1.0 {
        return Err(format!("non-maximal pure state reached {pure_max}"));
    }
    in_time(t.elapsed(), Duration::from_secs(180))?;
    Ok(format!(
        "LU {lu:.1e}, product {product:.1e}, range [{low:.3}, {high:.3}], non-maximal max {pure_max:.4}, {:.1?}",
        t.elapsed()
    ))
}

fn oracle_equivalence() -> Check {
    let opts = OptimizerOptions::default();
    let mut rng = seeded(7);
    let mut grid_gap = 0.0_f64;
    for _ in 0..50 {
        let rho = random_bipartite_state(2, &mut rng);
        let numeric = cic_forward(&rho, &opts).map_err(|e| e.to_string())?.value;
        let brute = cic_brute_force_oracle(&rho, 5000).map_err(|e| e.to_string())?;
        grid_gap = grid_gap.max((numeric - brute).abs());
    }
    within("optimizer vs grid", grid_gap, 0.0, 5e-3 - f64::EPSILON)?;

    let mut exact_gap = 0.0_f64;
    for _ in 0..50 {
        let rho = random_centered_qubit_pair(&mut rng);
        let exact = cic_exact_centered(&rho).map_err(|e| e.to_string())?;
        let numeric = cic_forward(&rho, &opts).map_err(|e| e.to_string())?.value;
        exact_gap = exact_gap.max((exact - numeric).abs());
    }
    within("exact vs optimizer", exact_gap, 0.0, 1e-6)?;

    let mut update_gap = 0.0_f64;
    for _ in 0..200 {
        let basis = build_generators(2).map_err(|e| e.to_string())?;
        let rho = random_bipartite_state(2, &mut rng);
        let element =
            MeasurementElement::from_state(&haar_pure_state(2, &mut rng), &basis).map_err(|e| e.to_string())?;
        let (cond, _) = conditioned_state(&rho, &element).map_err(|e| e.to_string())?;
        let direct = local_bloch_vector(&cond, &basis).map_err(|e| e.to_string())?;
        let bloch = decompose(&rho, &basis).map_err(|e| e.to_string())?;
        let via = bloch_conditioned_vector(&bloch, &element.m).map_err(|e| e.to_string())?;
        update_gap = update_gap.max((direct - via).amax());
    }
    within("Bloch vs state update", update_gap, 0.0, 1e-10)?;
    Ok(format!(
        "grid {grid_gap:.1e}, exact {exact_gap:.1e}, update {update_gap:.1e}"
    ))
}

fn determinism() -> Check {
    let configs = [
        ScanConfig {
            model: Model::Xxz,
            range: ScanRange { min: -2.0, max: 3.0, step: 0.01 },
            link: None,
            line: None,
            tolerances: Tolerances::default(),
            output: OutputPaths::default(),
        },
        ScanConfig {
            model: Model::Kitaev,
            range: ScanRange { min: 0.3, max: 0.7, step: 0.002 },
            link: Some(LinkType::X),
            line: None,
            tolerances: Tolerances::default(),
            output: OutputPaths::default(),
        },
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (k, cfg) in configs.iter().enumerate() {
        let mut bytes = Vec::new();
        for (run, threads) in [1, 4].into_iter().enumerate() {
            let path = dir.path().join(format!("scan{k}-{run}.csv"));
            let mut cfg = cfg.clone();
            cfg.output.csv = Some(path.clone());
            pool(threads)
                .install(|| cfg.run().and_then(|out| out.emit(&cfg.output)))
                .map_err(|e| e.to_string())?;
            bytes.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if bytes[0] != bytes[1] {
            return Err(format!("{:?} scan CSVs differ", cfg.model));
        }
    }
    Ok("XXZ and Kitaev CSVs byte-identical across runs (1 and 4 threads)".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("ground-state energy anchors", ground_state_anchors),
        ("XXZ critical points", xxz_critical_points),
        ("XXZ phase values", xxz_phase_values),
        ("Kitaev critical point", kitaev_critical_point),
        ("Kitaev anchors", kitaev_anchors),
        ("property suites", property_suites),
        ("oracle equivalence", oracle_equivalence),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
