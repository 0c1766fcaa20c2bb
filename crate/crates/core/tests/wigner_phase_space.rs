use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tristeer::wigner::{
    eigenfunction, full_wigner, marginal_wigner, oracle_moment, oscillator_state, GaussHermite,
    Observable, PhasePoint, QuadratureSpec,
};
use tristeer::{compute_moments, derive_mixing, FockIndex, Frequencies, MomentField, DEFAULT_EPS};

fn cube() -> impl Iterator<Item = FockIndex> {
    (0..=3).flat_map(|n| (0..=3).flat_map(move |m| (0..=3).map(move |l| FockIndex::new(n, m, l))))
}

#[test]
fn six_dimensional_normalization() {
    // W e^{|pt|^2} is a polynomial of degree 2k per axis at theta = 1
    let rule = GaussHermite::new(4).unwrap();
    for fock in cube() {
        let mut total = 0.0;
        for (x, wx) in rule.iter() {
            for (y, wy) in rule.iter() {
                for (z, wz) in rule.iter() {
                    for (p, wp) in rule.iter() {
                        for (q, wq) in rule.iter() {
                            for (f, wf) in rule.iter() {
                                let pt = PhasePoint::new(x, y, z, p, q, f);
                                let r2 = x * x + y * y + z * z + p * p + q * q + f * f;
                                total += wx
                                    * wy
                                    * wz
                                    * wp
                                    * wq
                                    * wf
                                    * full_wigner(fock, &pt, 1.0)
                                    * r2.exp();
                            }
                        }
                    }
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-9, "{fock}: {total}");
    }
}

#[test]
fn marginal_normalization_at_other_frequency() {
    let theta: f64 = 1.7;
    let rule = GaussHermite::new(12).unwrap();
    for k in 0..=3 {
        // u = a / theta, v = b scaled so the exponent is a^2/theta + b^2/theta
        let (su, sv) = (theta.sqrt().recip(), theta.sqrt());
        let mut total = 0.0;
        for (a, wa) in rule.iter() {
            for (b, wb) in rule.iter() {
                let (u, v) = (a * su, b * sv);
                total +=
                    wa * wb * su * sv * marginal_wigner(k, u, v, theta) * (a * a + b * b).exp();
            }
        }
        assert!((total - 1.0).abs() < 1e-10, "k={k}: {total}");
    }
}

#[test]
fn eigenfunction_normalization() {
    let rule = GaussHermite::new(6).unwrap();
    let fock = FockIndex::new(1, 2, 0);
    let mut total = 0.0;
    for (x, wx) in rule.iter() {
        for (y, wy) in rule.iter() {
            for (z, wz) in rule.iter() {
                let psi = eigenfunction(fock, x, y, z, 1.0).unwrap();
                total += wx * wy * wz * psi * psi * (x * x + y * y + z * z).exp();
            }
        }
    }
    assert!((total - 1.0).abs() < 1e-10, "{total}");
}

#[test]
fn momentum_marginal_is_density() {
    let rule = GaussHermite::new(8).unwrap();
    let mut rng = StdRng::seed_from_u64(20);
    for n in 0..=2 {
        for m in 0..=2 {
            for l in 0..=2 {
                let fock = FockIndex::new(n, m, l);
                for _ in 0..20 {
                    let (x, y, z) = (
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                    );
                    let mut total = 0.0;
                    for (p, wp) in rule.iter() {
                        for (q, wq) in rule.iter() {
                            for (f, wf) in rule.iter() {
                                let pt = PhasePoint::new(x, y, z, p, q, f);
                                total += wp
                                    * wq
                                    * wf
                                    * full_wigner(fock, &pt, 1.0)
                                    * (p * p + q * q + f * f).exp();
                            }
                        }
                    }
                    let psi = eigenfunction(fock, x, y, z, 1.0).unwrap();
                    assert!(
                        (total - psi * psi).abs() < 1e-8,
                        "{fock} at ({x},{y},{z}): {total} vs {}",
                        psi * psi
                    );
                }
            }
        }
    }
}

/// `W(u, v) = (1/pi) int psi(u + s) psi(u - s) cos(2 v s) ds` at theta = 1.
fn wigner_transform(k: usize, u: f64, v: f64) -> f64 {
    let rule = GaussHermite::cached(80).unwrap();
    // psi(u+s) psi(u-s) = poly * e^{-u^2 - s^2}
    rule.integrate(|s| {
        let a = oscillator_state(k, u + s, 1.0).unwrap();
        let b = oscillator_state(k, u - s, 1.0).unwrap();
        a * b * (2.0 * v * s).cos() * (s * s).exp()
    }) / PI
}

#[test]
fn marginal_matches_wigner_transform() {
    let mut rng = StdRng::seed_from_u64(7);
    for k in 0..=4 {
        for _ in 0..10 {
            let (u, v) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let direct = wigner_transform(k, u, v);
            let closed = marginal_wigner(k, u, v, 1.0);
            assert!(
                (direct - closed).abs() < 1e-12,
                "k={k} ({u},{v}): {direct} vs {closed}"
            );
        }
    }
}

#[test]
fn full_wigner_is_marginal_product() {
    let pt = PhasePoint::new(0.31, -0.72, 1.05, 0.4, -0.9, 0.15);
    let fock = FockIndex::new(2, 1, 0);
    let product = marginal_wigner(2, pt.x, pt.p, 1.0)
        * marginal_wigner(1, pt.y, pt.q, 1.0)
        * marginal_wigner(0, pt.z, pt.f, 1.0);
    assert!((full_wigner(fock, &pt, 1.0) - product).abs() < 1e-14);
    // explicit low-order forms: L_1(x) = 1 - x, L_2(x) = 1 - 2x + x^2/2
    let s = |u: f64, v: f64| u * u + v * v;
    let w1 = -(-s(pt.y, pt.q)).exp() * (1.0 - 2.0 * s(pt.y, pt.q)) / PI;
    let t = 2.0 * s(pt.x, pt.p);
    let w2 = (-s(pt.x, pt.p)).exp() * (1.0 - 2.0 * t + t * t / 2.0) / PI;
    let w0 = (-s(pt.z, pt.f)).exp() / PI;
    assert!((full_wigner(fock, &pt, 1.0) - w2 * w1 * w0).abs() < 1e-14);
}

#[test]
fn oracle_examples() {
    let unit = Frequencies::default();
    let cfg = derive_mixing(0.4, DEFAULT_EPS).unwrap();
    let fock = FockIndex::new(1, 0, 2);
    let obs: Observable = "x^2*py^2".parse().unwrap();
    let q = QuadratureSpec::exact_for(4, fock);
    let v = oracle_moment(fock, &cfg, &unit, &obs, q).unwrap();
    let printed = compute_moments(fock, &cfg, &unit).get(MomentField::X2Py2);
    assert!((v - printed).abs() < 1e-9, "{v} vs {printed}");

    let cfg = derive_mixing(0.5, DEFAULT_EPS).unwrap();
    let fock = FockIndex::new(1, 0, 0);
    let printed = compute_moments(fock, &cfg, &unit);
    for field in MomentField::ALL {
        let o = oracle_moment(fock, &cfg, &unit, &field.observable(), q).unwrap();
        assert!(
            (o - printed.get(field)).abs() <= 1e-9 * o.abs().max(1.0),
            "{field}"
        );
    }

    let sum: Observable = "x^2 + y^2 + z^2".parse().unwrap();
    let fock = FockIndex::new(2, 3, 4);
    let v = oracle_moment(fock, &cfg, &unit, &sum, QuadratureSpec::exact_for(2, fock)).unwrap();
    assert!((v - 10.5).abs() < 1e-10);
}
