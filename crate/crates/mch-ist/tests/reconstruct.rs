//! Field reconstruction: roundtrip against the input profile, coherence
//! identities, coordinate inversion and the velocity field.

mod common;

use common::{gaussian_run, zero_run};
use mch_ist::grid::SpatialGrid;
use mch_ist::reconstruct::{coordinate_resample, field_from_m, helmholtz_u, velocity_from_mi, MonotoneCubic};
use mch_ist::rhp::Expansions;
use mch_ist::time_flow::TimeConvention;
use mch_ist::validate::suite::{
    check_bounds, check_eta_identity, check_jacobian, check_left_right, check_q_consistency, check_q_lower_bound,
    check_velocity, compare_grid,
};
use mch_ist::{IstError, Mat2};
use proptest::prelude::*;

#[test]
fn gaussian_roundtrip_and_coherence() {
    let run = gaussian_run();
    let xg = compare_grid(10.0, 401).unwrap();
    let fs = run.field(0.0, TimeConvention::Standard, &xg).unwrap();
    let e = xg.samples().iter().zip(&fs.m_x).map(|(&x, m)| (m - 0.1 * (-x * x).exp()).abs()).fold(0.0, f64::max);
    assert!(e <= 1e-4, "roundtrip sup error {e}");
    for r in [
        check_q_lower_bound(&fs),
        check_q_consistency(&fs),
        check_jacobian(&fs),
        check_bounds(&[&fs]),
        check_velocity(&fs),
        check_eta_identity(&fs),
    ] {
        assert!(r.pass, "{}", r.summary());
    }
    // u from Helmholtz inversion against the closed-form convolution of the
    // input: u = (e^{−|x|}/2) * 0.1 e^{−x²}
    //   = (0.1 √π / 4) e^{1/4} [e^{−x} erfc(1/2 − x) + e^{x} erfc(1/2 + x)].
    // Checked at x = 0, where it equals (0.1 √π / 2) e^{1/4} erfc(1/2).
    let mid = (xg.n - 1) / 2;
    let erfc_half = 0.479_500_122_186_953_5;
    let u0 = 0.1 * std::f64::consts::PI.sqrt() / 2.0 * 0.25f64.exp() * erfc_half;
    assert!((fs.u_x_frame[mid] - u0).abs() < 1e-4, "{} vs {u0}", fs.u_x_frame[mid]);
}

#[test]
fn left_and_right_problems_agree_at_y0() {
    for t in [0.0, 0.5] {
        let r = check_left_right(gaussian_run(), t);
        assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn zero_data_reconstruct_the_zero_field() {
    let run = zero_run();
    let xg = compare_grid(10.0, 101).unwrap();
    let fs = run.field(1.0, TimeConvention::Standard, &xg).unwrap();
    assert!(fs.m_x.iter().all(|m| m.abs() < 1e-13));
    assert!(fs.q_y.iter().all(|q| (q - 1.0).abs() < 1e-13));
    let ys = fs.y_grid.samples();
    assert!(fs.x_of_y.iter().zip(&ys).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn identity_expansions_give_the_trivial_point() {
    let p = field_from_m(&Expansions::identity(1.5, 0.0)).unwrap();
    assert_eq!((p.q, p.m, p.x), (1.0, 0.0, 1.5));
    assert_eq!(velocity_from_mi(&Expansions::identity(1.5, 0.0)).unwrap(), (0.0, 0.0));
    let mut bad = Expansions::identity(0.0, 0.0);
    bad.m0 = Mat2::identity().scale((-1.0).into());
    assert!(matches!(field_from_m(&bad), Err(IstError::Regime(_))));
}

#[test]
fn coordinate_inversion_of_a_known_map() {
    // x(y) = y + 0.3 tanh(y), f(y) = sin(y).
    let yg = SpatialGrid::new(-8.0, 8.0, 321).unwrap();
    let ys = yg.samples();
    let x: Vec<f64> = ys.iter().map(|y| y + 0.3 * y.tanh()).collect();
    let f: Vec<f64> = ys.iter().map(|y| y.sin()).collect();
    let targets: Vec<f64> = (0..41).map(|j| -6.0 + 0.3 * j as f64).collect();
    let r = coordinate_resample(&yg, &x, &[&f], &targets).unwrap();
    for (j, &xt) in targets.iter().enumerate() {
        let y = r.y_at[j];
        // Limited by the degree-7 interpolant of x(y) at spacing 0.05.
        assert!((y + 0.3 * y.tanh() - xt).abs() < 1e-10, "{:e}", y + 0.3 * y.tanh() - xt);
        assert!((r.values[0][j] - y.sin()).abs() < 1e-9);
    }
    assert!(r.jacobian_min > 1.0 && r.jacobian_max < 1.31);
    assert!(matches!(coordinate_resample(&yg, &x, &[&f], &[20.0]), Err(IstError::GridMismatch(_))));
    let mut folded = x.clone();
    folded.swap(10, 11);
    assert!(matches!(coordinate_resample(&yg, &folded, &[&f], &[0.0]), Err(IstError::Monotonicity { .. })));
}

#[test]
fn helmholtz_velocity_reports_boundary_mass() {
    let g = SpatialGrid::new(-3.0, 3.0, 121).unwrap();
    let m: Vec<f64> = g.samples().iter().map(|x| (-x * x).exp()).collect();
    let v = helmholtz_u(&m, &g);
    assert!((v.boundary_mass - 2.0 * (-9.0f64).exp()).abs() < 1e-15);
}

proptest! {
    #[test]
    fn monotone_cubic_preserves_monotonicity(steps in proptest::collection::vec((0.01f64..1.0, 0.0f64..2.0), 3..30)) {
        let mut xs = vec![0.0];
        let mut ys = vec![0.0];
        for (dx, dy) in &steps {
            xs.push(xs.last().unwrap() + dx);
            ys.push(ys.last().unwrap() + dy);
        }
        let c = MonotoneCubic::new(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert!((c.eval(*x) - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
        let hi = *xs.last().unwrap();
        let mut prev = c.eval(0.0);
        for j in 1..=500 {
            let v = c.eval(hi * j as f64 / 500.0);
            prop_assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}
