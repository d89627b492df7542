use std::f64::consts::PI;

use chemolab_core::grid::{Domain, GridField};
use chemolab_core::rates::TimeSeries;
use chemolab_core::solver::{run, RunStatus, SolverConfig, Stepper};
use chemolab_core::state::{validate_initial, FieldQuad, InitialData};
use chemolab_core::{Error, Field};

fn max_diff(a: &GridField, b: &GridField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn bumpy_1d(n: usize) -> FieldQuad {
    let d = Domain::interval(PI, n).unwrap();
    let f = |g: fn(f64) -> f64| GridField::from_fn(d, |x| g(x[0])).unwrap();
    FieldQuad::new(
        f(|x| 1.0 + 0.8 * (-(x - 1.0) * (x - 1.0) * 4.0).exp()),
        f(|x| 0.5 + 0.3 * (2.0 * x).cos()),
        f(|x| 0.4 + 0.2 * x.sin()),
        f(|x| 1.0 + 0.5 * (3.0 * x).cos()),
    )
    .unwrap()
}

fn bumpy_2d() -> FieldQuad {
    let d = Domain::rectangle([PI, PI / 2.0], [24, 12]).unwrap();
    let f = |g: fn(f64, f64) -> f64| GridField::from_fn(d, |x| g(x[0], x[1])).unwrap();
    FieldQuad::new(
        f(|x, y| 1.0 + 0.5 * x.cos() * (2.0 * y).cos()),
        f(|x, _| 1.0 + 0.2 * (2.0 * x).cos()),
        f(|x, y| 0.3 + 0.1 * (x * y).sin()),
        f(|_, y| 1.0 + 0.3 * (2.0 * y).cos()),
    )
    .unwrap()
}

#[test]
fn constant_data_follow_closed_form() {
    let d = Domain::interval(PI, 32).unwrap();
    let q = FieldQuad::constant(d, 1.0, 1.0, 0.5, 1.0);
    let cfg = SolverConfig { t_end: 2.0, sample_every: 0.25, ..Default::default() };
    let out = run(&q, &cfg).unwrap();
    let s = &out.final_state;
    let t = s.time;
    assert!((t - 2.0).abs() < 1e-12);
    for (field, exact) in [
        (&s.u, 1.0),
        (&s.v, 1.0 + 0.5 * (1.0 - (-t).exp())),
        (&s.w, 0.5 * (-t).exp()),
        (&s.z, 1.0),
    ] {
        assert!(field.values().iter().all(|v| (v - exact).abs() < 1e-10));
    }
}

#[test]
fn conservation_positivity_and_w_monotone() {
    for q in [bumpy_1d(48), bumpy_2d()] {
        let cfg = SolverConfig { t_end: 3.0, sample_every: 0.1, ..Default::default() };
        let out = run(&q, &cfg).unwrap();
        assert_eq!(out.status, RunStatus::Completed);
        let ts = &out.series;
        assert!(TimeSeries::relative_drift(&ts.mass_u) < 1e-10);
        assert!(TimeSeries::relative_drift(&ts.mass_vw) < 1e-10);
        assert!(ts.min_all.iter().all(|&m| m >= 0.0));
        for pair in out.diagnostics.windows(2) {
            assert!(pair[1].w_inf <= pair[0].w_inf);
        }
    }
}

#[test]
fn positivity_under_strong_chemotaxis() {
    let d = Domain::interval(1.0, 40).unwrap();
    let q = FieldQuad::new(
        GridField::from_fn(d, |x| (-(x[0] - 0.5).powi(2) * 200.0).exp()).unwrap(),
        GridField::from_fn(d, |x| 5.0 * (-(x[0] - 0.2).powi(2) * 100.0).exp()).unwrap(),
        GridField::constant(d, 2.0),
        GridField::from_fn(d, |x| x[0] * x[0]).unwrap(),
    )
    .unwrap();
    let cfg = SolverConfig { t_end: 0.5, sample_every: 0.01, ..Default::default() };
    let out = run(&q, &cfg).unwrap();
    assert!(out.series.min_all.iter().all(|&m| m >= 0.0));
}

#[test]
fn mirror_symmetry_is_preserved() {
    let d = Domain::interval(2.0, 40).unwrap();
    let sym = |g: fn(f64) -> f64| GridField::from_fn(d, |x| g((x[0] - 1.0).abs())).unwrap();
    let q = FieldQuad::new(
        sym(|r| 1.0 + (-r * r * 10.0).exp()),
        sym(|r| 1.0 + 0.5 * r),
        sym(|r| 0.5 - 0.2 * r),
        sym(|r| 1.0 + r * r),
    )
    .unwrap();
    let out = run(&q, &SolverConfig { t_end: 1.0, ..Default::default() }).unwrap();
    let s = &out.final_state;
    for f in Field::ALL {
        let v = s.field(f).values();
        let n = v.len();
        for i in 0..n / 2 {
            assert!((v[i] - v[n - 1 - i]).abs() < 1e-12 * (1.0 + v[i].abs()), "{f} at {i}");
        }
    }
}

/// The scheme is first order in time: halving dt halves the self-difference.
#[test]
fn first_order_in_time() {
    let q = bumpy_1d(32);
    let t_end = 0.4;
    let solve = |n: usize| {
        let dt = t_end / n as f64;
        let mut stepper = Stepper::new(*q.domain(), 1e-13);
        let mut s = q.clone();
        for _ in 0..n {
            s = stepper.step(&s, dt).unwrap();
        }
        s
    };
    let runs: Vec<FieldQuad> = [100, 200, 400, 800].iter().map(|&n| solve(n)).collect();
    for f in Field::ALL {
        let e1 = max_diff(runs[0].field(f), runs[1].field(f));
        let e2 = max_diff(runs[1].field(f), runs[2].field(f));
        let e3 = max_diff(runs[2].field(f), runs[3].field(f));
        for (a, b) in [(e1, e2), (e2, e3)] {
            let order = (a / b).log2();
            assert!((0.9..1.15).contains(&order), "{f}: order {order}");
        }
    }
}

#[test]
fn two_dimensional_run_converges() {
    let q = bumpy_2d();
    let out = run(&q, &SolverConfig { t_end: 25.0, sample_every: 0.5, ..Default::default() }).unwrap();
    let last = out.diagnostics.last().unwrap();
    for f in Field::ALL {
        assert!(*last.dist.get(f) < 1e-4, "{f}: {}", last.dist.get(f));
    }
    assert!(out.t0.is_some());
}

#[test]
fn blow_up_is_reported() {
    let d = Domain::interval(1.0, 32).unwrap();
    let q = FieldQuad::new(
        GridField::from_fn(d, |x| 1.0 + 50.0 * (-(x[0] - 0.5).powi(2) * 400.0).exp()).unwrap(),
        GridField::constant(d, 0.0),
        GridField::constant(d, 0.0),
        GridField::constant(d, 0.0),
    )
    .unwrap();
    let cfg = SolverConfig { t_end: 1.0, blowup_threshold: 2.0, ..Default::default() };
    let out = run(&q, &cfg).unwrap();
    assert_eq!(out.status, RunStatus::BlownUp);
    assert!(out.diagnostics.last().unwrap().blown_up);
    assert!(out.final_state.time < 1.0);
}

#[test]
fn degenerate_and_invalid_data() {
    let d = Domain::interval(1.0, 8).unwrap();
    let q = FieldQuad::constant(d, 0.0, 1.0, 0.5, 0.0);
    assert_eq!(validate_initial(&q).unwrap(), InitialData::Degenerate);
    let out = run(&q, &SolverConfig { t_end: 0.5, ..Default::default() }).unwrap();
    assert!(out.final_state.u.values().iter().all(|&v| v == 0.0));

    let mut bad = FieldQuad::constant(d, 1.0, 1.0, 0.5, 1.0);
    let mut w = bad.w.values().to_vec();
    w[3] = -0.1;
    bad.w = GridField::from_values(d, w).unwrap();
    assert!(matches!(
        run(&bad, &SolverConfig::default()),
        Err(Error::InvalidInitialData { field: Field::W, index: 3, .. })
    ));
}

#[test]
fn rejects_bad_config() {
    let q = bumpy_1d(16);
    for cfg in [
        SolverConfig { t_end: -1.0, ..Default::default() },
        SolverConfig { dt_max: 0.0, ..Default::default() },
        SolverConfig { cfl_safety: 1.5, ..Default::default() },
        SolverConfig { criterion_epsilon: 0.1, ..Default::default() },
    ] {
        assert!(matches!(run(&q, &cfg), Err(Error::InvalidConfig(_))));
    }
}
