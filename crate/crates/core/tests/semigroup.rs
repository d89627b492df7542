use std::f64::consts::PI;

use chemolab_core::grid::{Domain, GridField};
use chemolab_core::semigroup::{
    convolution_bound_ratio, default_horizon, default_t_grid, estimate_k, heat_propagate,
    ConvolutionParams, SmoothingEstimate, SmoothingKind,
};

fn estimates(n: usize) -> Vec<SmoothingEstimate> {
    let p = 3.0 * n as f64;
    vec![
        SmoothingEstimate::new(SmoothingKind::MeanZeroLp, f64::INFINITY, f64::INFINITY).unwrap(),
        SmoothingEstimate::new(SmoothingKind::GradFromLq, p, p).unwrap(),
        SmoothingEstimate::new(SmoothingKind::GradFromGrad, p, p).unwrap(),
        SmoothingEstimate::new(SmoothingKind::FromDivergence, f64::INFINITY, p).unwrap(),
    ]
}

#[test]
fn estimates_are_seeded_and_extend() {
    let d = Domain::interval(PI, 32).unwrap();
    let grid = default_t_grid(d.lambda1_discrete());
    for est in estimates(1) {
        let a = estimate_k(&est, &d, 50, &grid, 11).unwrap();
        let b = estimate_k(&est, &d, 50, &grid, 11).unwrap();
        let c = estimate_k(&est, &d, 100, &grid, 11).unwrap();
        assert_eq!(a, b);
        assert!(c.estimated_constant >= a.estimated_constant);
        assert!(a.estimated_constant.is_finite() && a.estimated_constant > 0.0);
    }
}

#[test]
fn estimates_stable_in_two_dimensions() {
    let d = Domain::rectangle([PI, PI / 2.0], [16, 8]).unwrap();
    let grid = default_t_grid(d.lambda1_discrete());
    for est in estimates(2) {
        let a = estimate_k(&est, &d, 100, &grid, 3).unwrap().estimated_constant;
        let b = estimate_k(&est, &d, 200, &grid, 3).unwrap().estimated_constant;
        assert!((b - a) / a < 0.1, "{}: {a} -> {b}", est.kind());
    }
}

#[test]
fn eigenmodes_decay_exactly_in_2d() {
    let d = Domain::rectangle([PI, PI / 2.0], [12, 6]).unwrap();
    for (axis, k) in [(0, 1), (0, 3), (1, 1)] {
        let m = GridField::cosine_mode(d, axis, k);
        let t = 0.37;
        let decay = (-d.axis_eigenvalue(axis, k) * t).exp();
        let p = heat_propagate(&m, t).unwrap();
        for (a, b) in p.values().iter().zip(m.values()) {
            assert!((a - decay * b).abs() < 1e-12);
        }
    }
}

#[test]
fn convolution_bound_finite_for_singular_kernels() {
    let p = ConvolutionParams { alpha: 0.5, beta: 0.5, gamma: 1.0, delta: 0.3 };
    let h = default_horizon(&p);
    let a = convolution_bound_ratio(&p, h, 100, 1e-10).unwrap();
    let b = convolution_bound_ratio(&p, 2.0 * h, 200, 1e-10).unwrap();
    assert!(a.sup_ratio.is_finite());
    assert!((a.sup_ratio - b.sup_ratio).abs() / b.sup_ratio < 1e-3);
}
