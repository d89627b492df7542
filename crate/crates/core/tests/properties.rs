use proptest::prelude::*;

use chemolab_core::grid::{apply_laplacian, Domain, GridField, Helmholtz};
use chemolab_core::rates::fit_exponential_rate;
use chemolab_core::semigroup::HeatSemigroup;
use chemolab_core::solver::{step_size, SolverConfig, Stepper};
use chemolab_core::state::{lp_norm, mean, FieldQuad};
use chemolab_core::theory::{envelope_coefficients, theoretical_rates, EnvelopeInputs};
use chemolab_core::Field;

fn domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        (4usize..24, 0.5f64..4.0).prop_map(|(n, l)| Domain::interval(l, n).unwrap()),
        (4usize..10, 4usize..10, 0.5f64..3.0, 0.5f64..3.0)
            .prop_map(|(nx, ny, lx, ly)| Domain::rectangle([lx, ly], [nx, ny]).unwrap()),
    ]
}

fn field_on(d: Domain, lo: f64, hi: f64) -> impl Strategy<Value = GridField> {
    prop::collection::vec(lo..hi, d.len()).prop_map(move |v| GridField::from_values(d, v).unwrap())
}

fn pair() -> impl Strategy<Value = (GridField, GridField)> {
    domain().prop_flat_map(|d| (field_on(d, -1.0, 1.0), field_on(d, -1.0, 1.0)))
}

fn dot(a: &GridField, b: &GridField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_symmetric_and_mass_free((f, g) in pair()) {
        let h2 = f.domain().spacing(0).powi(-2) + f.domain().spacing(1).powi(-2);
        let scale = h2 * f.len() as f64;
        prop_assert!((dot(&apply_laplacian(&f), &g) - dot(&f, &apply_laplacian(&g))).abs() < 1e-12 * scale);
        prop_assert!(apply_laplacian(&f).values().iter().sum::<f64>().abs() < 1e-12 * scale);
        prop_assert!(dot(&apply_laplacian(&f), &f) <= 1e-12 * scale);
    }

    #[test]
    fn helmholtz_inverts_operator((rhs, _) in pair(), s in 0.1f64..3.0, a in 0.0f64..5.0) {
        let x = Helmholtz::new(*rhs.domain()).solve(s, a, &rhs, 1e-12).unwrap();
        let back = x.combine(s, &apply_laplacian(&x), -a).unwrap();
        let err = back.values().iter().zip(rhs.values()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-11 * rhs.max_abs().max(1e-300));
        prop_assert!((mean(&x) - mean(&rhs) / s).abs() < 1e-12);
    }

    #[test]
    fn normalised_lp_increases_with_p((f, _) in pair(), p in 1.0f64..6.0, dp in 0.0f64..6.0) {
        let m = f.domain().measure();
        let a = lp_norm(&f, p).unwrap() * m.powf(-1.0 / p);
        let b = lp_norm(&f, p + dp).unwrap() * m.powf(-1.0 / (p + dp));
        let c = lp_norm(&f, f64::INFINITY).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
        prop_assert!(b <= c * (1.0 + 1e-12));
    }

    #[test]
    fn heat_semigroup_composes_and_contracts((f, _) in pair(), t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let sg = HeatSemigroup::new(*f.domain());
        let once = sg.propagate(&f, t1 + t2).unwrap();
        let twice = sg.propagate(&sg.propagate(&f, t1).unwrap(), t2).unwrap();
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(once.max_abs() <= f.max_abs() * (1.0 + 1e-12));
        prop_assert!((mean(&once) - mean(&f)).abs() < 1e-12);
    }

    #[test]
    fn step_keeps_mass_and_sign(
        (u, v, w, z) in domain().prop_flat_map(|d| (
            field_on(d, 0.0, 3.0), field_on(d, 0.0, 3.0), field_on(d, 0.0, 2.0), field_on(d, 0.0, 3.0)
        ))
    ) {
        let q = FieldQuad::new(u, v, w, z).unwrap();
        let dt = step_size(&q, &SolverConfig::default());
        let next = Stepper::new(*q.domain(), 1e-12).step(&q, dt).unwrap();
        let scale = q.u.integral().abs().max(1.0);
        prop_assert!((next.u.integral() - q.u.integral()).abs() < 1e-12 * scale);
        let vw = q.v.integral() + q.w.integral();
        prop_assert!((next.v.integral() + next.w.integral() - vw).abs() < 1e-12 * vw.max(1.0));
        prop_assert!(next.min_all() >= 0.0);
        prop_assert!(next.w.max() <= q.w.max());
    }

    #[test]
    fn rate_fit_ignores_scale_and_shift(rate in 0.05f64..3.0, c in 1e-3f64..1e3, shift in 0.0f64..5.0) {
        let times: Vec<f64> = (0..200).map(|i| shift + 0.05 * i as f64).collect();
        let ys: Vec<f64> = times.iter().map(|t| (-rate * (t - shift)).exp()).collect();
        let scaled: Vec<f64> = ys.iter().map(|y| c * y).collect();
        let a = fit_exponential_rate(&times, &ys, 1e-300).unwrap();
        let b = fit_exponential_rate(&times, &scaled, 1e-300).unwrap();
        prop_assert!((a.rate - rate).abs() < 1e-9 * rate.max(1.0));
        prop_assert!((a.rate - b.rate).abs() < 1e-9);
    }

    #[test]
    fn rates_are_homogeneous(l in 0.01f64..0.5, u in 0.01f64..1.0, c in 0.1f64..2.0) {
        // small arguments keep z clear of its cap at 1
        let a = theoretical_rates(l, u).unwrap();
        let b = theoretical_rates(c * l, c * u).unwrap();
        for f in Field::ALL {
            prop_assert!((b.get(f) - c * a.get(f)).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_grows_with_k(i in 0usize..4, bump in 0.01f64..2.0, ubar0 in 0.5f64..8.0) {
        let base = EnvelopeInputs {
            k: [1.0; 4],
            lambda1: 1.0,
            ubar0,
            vbar0: 0.4,
            wbar0: 0.3,
            w0_inf: 0.5,
            grad_v_t0_lp: 0.2,
            measure: std::f64::consts::PI,
            p: 3.0,
            t0: 0.0,
        };
        let mut more = base;
        more.k[i] += bump;
        let lo = envelope_coefficients(&base).unwrap();
        let hi = envelope_coefficients(&more).unwrap();
        for f in Field::ALL {
            prop_assert!(hi.m.get(f) >= lo.m.get(f));
        }
    }
}
