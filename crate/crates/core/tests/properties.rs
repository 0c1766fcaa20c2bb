use proptest::prelude::*;

use tristeer::moments::{covariance_identity_residuals, sum_rule_residuals};
use tristeer::steering::{
    bracket_from_moment_set, raw_brackets, steering_closed_form, steering_single_excitation,
    symmetry_residuals, SingleExcitation,
};
use tristeer::wigner::LabVar;
use tristeer::{
    compute_moments, derive_mixing, rotation_matrix, Direction, FockIndex, Frequencies,
    MomentField, Path, SteeringReport, DEFAULT_EPS,
};

fn admissible_mu() -> impl Strategy<Value = f64> {
    (-1.0 + DEFAULT_EPS)..=1.0
}

fn mirrored_mu() -> impl Strategy<Value = f64> {
    -0.999..0.999
}

fn fock(max: usize) -> impl Strategy<Value = FockIndex> {
    (0..=max, 0..=max, 0..=max).prop_map(|(n, m, l)| FockIndex::new(n, m, l))
}

/// Power of theta by which a field scales: `-1/2` per position factor and
/// `+1/2` per momentum factor.
fn theta_weight(field: MomentField) -> i32 {
    let obs = field.observable();
    let twice: i32 = LabVar::ALL
        .iter()
        .map(|&v| {
            let p = obs.terms[0].power(v) as i32;
            if v.is_momentum() {
                p
            } else {
                -p
            }
        })
        .sum();
    twice / 2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rotation_is_proper_orthogonal(mu in admissible_mu()) {
        let r = rotation_matrix(&derive_mixing(mu, DEFAULT_EPS).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-12);
            }
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        prop_assert!((det - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sum_rules_and_covariances(f in fock(20), mu in admissible_mu(), theta in 0.25f64..4.0) {
        let freq = Frequencies::uniform(theta).unwrap();
        let ms = compute_moments(f, &derive_mixing(mu, DEFAULT_EPS).unwrap(), &freq);
        let scale = (f.total() as f64 + 1.5) * theta.max(1.0 / theta);
        let (a, b) = sum_rule_residuals(&ms, f, &freq);
        prop_assert!(a.abs() <= 1e-13 * scale && b.abs() <= 1e-13 * scale, "{a:e} {b:e}");
        let (c, d, e) = covariance_identity_residuals(&ms);
        let scale4 = scale * scale;
        prop_assert!(c.abs().max(d.abs()).max(e.abs()) <= 1e-13 * scale4);
    }

    #[test]
    fn squares_are_non_negative(f in fock(30), mu in admissible_mu()) {
        let ms = compute_moments(f, &derive_mixing(mu, DEFAULT_EPS).unwrap(), &Frequencies::default());
        for field in MomentField::ALL.into_iter().filter(|f| f.is_square()) {
            prop_assert!(ms.get(field) >= 0.0, "{field} = {}", ms.get(field));
        }
    }

    #[test]
    fn frequency_scaling(f in fock(6), mu in admissible_mu(), theta in 0.25f64..4.0) {
        let cfg = derive_mixing(mu, DEFAULT_EPS).unwrap();
        let one = compute_moments(f, &cfg, &Frequencies::default());
        let other = compute_moments(f, &cfg, &Frequencies::uniform(theta).unwrap());
        for field in MomentField::ALL {
            let want = one.get(field) * theta.powi(theta_weight(field));
            prop_assert!((other.get(field) - want).abs() <= 1e-12 * want.abs().max(1.0), "{field}");
        }
        for d in Direction::ALL {
            let s1 = bracket_from_moment_set(d, &one, &Frequencies::default());
            let s2 = bracket_from_moment_set(d, &other, &Frequencies::uniform(theta).unwrap());
            prop_assert!((s1 - s2).abs() <= 1e-11 * s1.abs().max(1.0));
        }
    }

    #[test]
    fn closed_form_matches_moments(f in fock(12), mu in admissible_mu()) {
        let cfg = derive_mixing(mu, DEFAULT_EPS).unwrap();
        let ms = compute_moments(f, &cfg, &Frequencies::default());
        for d in Direction::ALL {
            let a = steering_closed_form(d, f, &cfg);
            let b = bracket_from_moment_set(d, &ms, &Frequencies::default());
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{d}: {a} vs {b}");
        }
    }

    #[test]
    fn report_invariants(f in fock(15), mu in admissible_mu()) {
        let cfg = derive_mixing(mu, DEFAULT_EPS).unwrap();
        let raw = raw_brackets(f, &cfg, &Frequencies::default(), Path::ClosedForm).unwrap();
        let r = SteeringReport::from_raw(raw);
        let scale = raw.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (c, v) in r.clamped.iter().zip(raw) {
            prop_assert_eq!(*c, v.max(0.0));
            prop_assert!(*c >= 0.0);
        }
        prop_assert!(r.tradeoff_residual.abs() <= 1e-12 * scale);
    }

    #[test]
    fn symmetry_relations_hold(f in fock(10), mu in mirrored_mu()) {
        let (a, b, c) = symmetry_residuals(f, mu, DEFAULT_EPS).unwrap();
        let scale = (f.total() as f64).max(1.0);
        prop_assert!(a.abs().max(b.abs()).max(c.abs()) <= 1e-9 * scale);
    }

    #[test]
    fn single_excitation_is_linear(k in 0usize..200, mu in admissible_mu()) {
        let cfg = derive_mixing(mu, DEFAULT_EPS).unwrap();
        for which in SingleExcitation::ALL {
            let one = steering_single_excitation(which, 1, &cfg);
            let many = steering_single_excitation(which, k, &cfg);
            prop_assert!((many - k as f64 * one).abs() <= 1e-12 * (k as f64).max(1.0) * one.abs().max(1.0));
        }
    }

    #[test]
    fn fock_display_round_trips(f in fock(1000)) {
        prop_assert_eq!(f.to_string().parse::<FockIndex>().unwrap(), f);
    }

    #[test]
    fn fock_parser_never_panics(s in "\\PC{0,24}") {
        let _ = s.parse::<FockIndex>();
        let _ = s.parse::<Direction>();
        let _ = tristeer::parse::bracket(&s);
    }
}

#[test]
fn ground_state_has_no_steering() {
    for i in 0..=200 {
        let mu = -1.0 + DEFAULT_EPS + (2.0 - DEFAULT_EPS) * i as f64 / 200.0;
        let cfg = derive_mixing(mu, DEFAULT_EPS).unwrap();
        let r = SteeringReport::from_raw(
            raw_brackets(
                FockIndex::new(0, 0, 0),
                &cfg,
                &Frequencies::default(),
                Path::ClosedForm,
            )
            .unwrap(),
        );
        assert_eq!(r.clamped, [0.0; 6]);
        assert_eq!(r.asym_xy.abs() + r.asym_xz.abs() + r.asym_zy.abs(), 0.0);
        assert_eq!(r.tradeoff_residual, 0.0);
    }
}
