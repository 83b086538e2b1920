//! Link correlators against an independent evaluation: the inner angular
//! integral reduces to complete elliptic integrals (computed by AGM), the
//! outer one is done by tanh-sinh quadrature split at the Dirac points.

use std::f64::consts::PI;

use cic_core::kitaev::{cic_link, link_correlator, phase_region, KitaevCouplings, LinkType, Phase};

/// Complete elliptic integrals K(k), E(k) for modulus k < 1.
fn elliptic_ke(k: f64) -> (f64, f64) {
    let (mut a, mut b) = (1.0_f64, (1.0 - k * k).sqrt());
    let mut c = k;
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..40 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        pow *= 2.0;
        sum += pow * c * c;
        a = an;
        b = bn;
        if c.abs() < 1e-17 {
            break;
        }
    }
    let big_k = PI / (2.0 * a);
    (big_k, big_k * (1.0 - sum))
}

/// ∫_{−π}^{π} Re f/|f| dωx for f = A + J e^{iωx}.
fn inner_exact(re_a: f64, abs_a: f64, j: f64) -> f64 {
    let j = j.abs();
    if abs_a == 0.0 {
        return 0.0;
    }
    if j == 0.0 {
        return 2.0 * PI * re_a / abs_a;
    }
    let k2 = 4.0 * abs_a * j / ((abs_a + j) * (abs_a + j));
    let bracket = if k2 >= 1.0 {
        2.0 * abs_a
    } else {
        let (k, e) = elliptic_ke(k2.sqrt());
        (abs_a - j) * k + (abs_a + j) * e
    };
    (re_a / abs_a) * (2.0 / abs_a) * bracket
}

/// tanh-sinh over [a, b].
fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let h = 1.0 / 256.0;
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = 0.0;
    let n = (4.5 / h) as i64;
    for i in -n..=n {
        let t = i as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let x = u.tanh();
        let w = 0.5 * PI * t.cosh() / (u.cosh() * u.cosh());
        if w < 1e-300 || (1.0 - x.abs()) == 0.0 {
            continue;
        }
        sum += w * f(c + r * x);
    }
    sum * h * r
}

fn z_link_reference(jx: f64, jy: f64, jz: f64) -> f64 {
    let outer = |wy: f64| {
        let re = jz + jy * wy.cos();
        let im = jy * wy.sin();
        inner_exact(re, re.hypot(im), jx)
    };
    let mut pts = vec![-PI, 0.0, PI];
    if jz != 0.0 && jy != 0.0 {
        let c = (jx * jx - jz * jz - jy * jy) / (2.0 * jz * jy);
        if c.abs() < 1.0 {
            let b = c.acos();
            pts.extend([-b, b]);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let total: f64 = pts.windows(2).map(|w| tanh_sinh(outer, w[0], w[1])).sum();
    total / (4.0 * PI * PI)
}

fn reference(j: &KitaevCouplings, link: LinkType) -> f64 {
    let p = j.permuted_for(link);
    z_link_reference(p.jx, p.jy, p.jz)
}

#[test]
fn elliptic_reference_reproduces_anchors() {
    assert!((z_link_reference(0.0, 0.0, 1.0) - 1.0).abs() < 1e-13);
    assert!(z_link_reference(0.5, 0.5, 0.0).abs() < 1e-12);
    let third = 1.0 / 3.0;
    assert!((z_link_reference(third, third, third) - 0.5248657458506).abs() < 1e-11);
}

#[test]
fn quadrature_matches_elliptic_reference() {
    let points = [
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        (0.2, 0.3, 0.5),
        (0.25, 0.25, 0.5),
        (0.6, 0.25, 0.15),
        (0.45, 0.45, 0.1),
        (0.05, 0.15, 0.8),
        (-0.3, 0.5, 0.4),
        (0.7, 0.0, 0.3),
    ];
    for &(jx, jy, jz) in &points {
        let j = KitaevCouplings::new(jx, jy, jz).unwrap();
        for link in LinkType::ALL {
            let want = reference(&j, link);
            let got = link_correlator(&j, link, 1e-8).unwrap();
            assert!(
                (got - want).abs() < 1e-8,
                "({jx}, {jy}, {jz}) {link}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn boundary_value_is_frozen() {
    let j = KitaevCouplings::new(0.25, 0.25, 0.5).unwrap();
    let v = link_correlator(&j, LinkType::Z, 1e-9).unwrap();
    assert!((v - 0.8420525790472401).abs() < 1e-9, "{v}");
    assert_eq!(phase_region(&j), Phase::GaplessB);
}

#[test]
fn symmetric_point_links_agree() {
    let j = KitaevCouplings::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
    let v: Vec<f64> = LinkType::ALL.iter().map(|&l| cic_link(&j, l, 1e-6).unwrap()).collect();
    for w in &v {
        assert!((w - 0.5248657458506).abs() < 1e-6);
    }
}

#[test]
fn permuted_couplings_give_same_correlator() {
    let (a, b, c) = (0.17, 0.29, 0.54);
    let z = link_correlator(&KitaevCouplings::new(a, b, c).unwrap(), LinkType::Z, 1e-7).unwrap();
    let x = link_correlator(&KitaevCouplings::new(c, b, a).unwrap(), LinkType::X, 1e-7).unwrap();
    let y = link_correlator(&KitaevCouplings::new(a, c, b).unwrap(), LinkType::Y, 1e-7).unwrap();
    assert!((z - x).abs() < 2e-7 && (z - y).abs() < 2e-7);
}

#[test]
fn correlator_grows_toward_the_dominant_link() {
    let mut last = -1.0;
    for i in 0..=10 {
        let jz = 0.5 + 0.05 * i as f64;
        let j = KitaevCouplings::new((1.0 - jz) / 2.0, (1.0 - jz) / 2.0, jz).unwrap();
        let v = link_correlator(&j, LinkType::Z, 1e-7).unwrap();
        assert!(v > last);
        last = v;
    }
}
