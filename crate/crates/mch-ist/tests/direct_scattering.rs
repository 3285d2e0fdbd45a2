//! Direct scattering against closed forms, symmetries and the independent
//! `x`-frame ODE oracle.

mod common;

use common::{gaussian_run, sup, zero_run};
use mch_ist::config::{Bump, BumpKind, ProfileSpec};
use mch_ist::grid::{build_grids, GridConfig, SpatialGrid};
use mch_ist::mat2::I;
use mch_ist::scattering::{a_at, forward, prepare_profile, spectrum_probe, ProbeContour};
use mch_ist::validate::suite::{check_a_at_i, check_origin, check_r_symmetry, check_trace_formula, check_unitarity};
use mch_ist::validate::{ode_oracle_scattering, OdeOracle, ReferenceRun};
use mch_ist::{Exec, IstError};
use num_complex::Complex64 as C64;

#[test]
fn zero_profile_has_trivial_scattering() {
    let sd = &zero_run().scattering;
    // Only rounding remains; the propagators accumulate phases of order
    // |k| · |y| / 4 ≈ 10² radians at the ends of the grid.
    let ea = sup(sd.a_vals.iter().map(|a| (a - 1.0).norm()));
    assert!(ea < 1e-12, "{ea:e}");
    assert!(sup(sd.b_vals.iter().map(|b| b.norm())) < 1e-12);
    assert!(sup(sd.rho.iter().map(|r| r.norm())) < 1e-12);
    assert_eq!(zero_run().data.c_total, 0.0);
}

#[test]
fn gaussian_identities() {
    let run = gaussian_run();
    for r in
        [check_unitarity(run), check_origin(run), check_r_symmetry(run), check_a_at_i(run), check_trace_formula(run)]
    {
        assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn a_at_i_is_exp_minus_half_c() {
    // c = ∫(√(1+m²) − 1) dx by an independent fine trapezoid rule.
    let run = gaussian_run();
    let n = 200_001;
    let h = 30.0 / (n - 1) as f64;
    let c: f64 = (0..n)
        .map(|i| {
            let m = 0.1 * (-(-15.0 + i as f64 * h).powi(2)).exp();
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            w * h * ((1.0 + m * m).sqrt() - 1.0)
        })
        .sum();
    assert!((run.data.c_total - c).abs() < 1e-12, "{} vs {c}", run.data.c_total);
    let a = a_at(&run.data, I).unwrap();
    assert!((a - (-0.5 * c).exp()).norm() < 1e-6 * (-0.5 * c).exp(), "{a}");
}

#[test]
fn reflection_coefficient_symmetries_pointwise() {
    let run = gaussian_run();
    let (g, r) = (run.spectral(), &run.scattering.r_vals);
    for i in 0..g.len_z() {
        // r(1/z) = conj r(z) and r(−1/z) = −r(z).
        assert!((r[g.reciprocal(i)] - r[i].conj()).norm() < 1e-12);
        assert!((r[g.partner(i)] + r[i]).norm() < 1e-12);
    }
}

fn assert_oracle_agreement(profile: &ProfileSpec, run: &ReferenceRun) {
    let g = run.spectral();
    let idx: Vec<usize> = (0..64).map(|j| (j * g.len_z()) / 64 + 3).collect();
    let zs: Vec<f64> = idx.iter().map(|&i| g.z[i]).collect();
    let f = |x: f64| profile.eval(x);
    let oracle = ode_oracle_scattering(&f, &OdeOracle::default(), &zs, Exec::Parallel).unwrap();
    for (o, &i) in oracle.iter().zip(&idx) {
        let (a, b) = (run.scattering.a_vals[i], run.scattering.b_vals[i]);
        let scale = a.norm().max(b.norm());
        assert!((a - o.a).norm() <= 1e-6 * scale, "a at z = {}: {a} vs {}", o.z, o.a);
        assert!((b - o.b).norm() <= 1e-6 * scale, "b at z = {}: {b} vs {}", o.z, o.b);
    }
}

#[test]
fn gaussian_matches_ode_oracle() {
    assert_oracle_agreement(&ProfileSpec::gaussian(0.1), gaussian_run());
}

#[test]
fn off_centre_sech2_bump_matches_ode_oracle_and_is_unitary() {
    let p = ProfileSpec {
        bumps: vec![
            Bump { kind: BumpKind::Sech2, amplitude: 0.15, width: 0.8, center: 1.0 },
            Bump { kind: BumpKind::Gaussian, amplitude: -0.05, width: 1.5, center: -2.0 },
        ],
    };
    let run = ReferenceRun::new(p.clone(), &GridConfig::default(), Exec::Parallel).unwrap();
    for r in [check_unitarity(&run), check_r_symmetry(&run), check_a_at_i(&run)] {
        assert!(r.pass, "{}", r.summary());
    }
    assert_oracle_agreement(&p, &run);
}

#[test]
fn sequential_and_parallel_forward_agree_bitwise() {
    let grids = build_grids(&GridConfig { n_k: 256, y_lo: -2.0, y_hi: 2.0, n_y: 17, ..GridConfig::default() }).unwrap();
    let m0 = ProfileSpec::gaussian(0.2).sample(&grids.x.samples());
    let data = prepare_profile(&m0, &grids.x, 30.0).unwrap();
    let a = forward(&data, &grids.spectral, Exec::Sequential).unwrap();
    let b = forward(&data, &grids.spectral, Exec::Parallel).unwrap();
    assert_eq!(a.a_vals, b.a_vals);
    assert_eq!(a.b_vals, b.b_vals);
}

#[test]
fn small_data_has_no_discrete_spectrum() {
    let run = gaussian_run();
    let report = spectrum_probe(&run.data, &ProbeContour::default(), run.scattering.resonance_margin).unwrap();
    assert_eq!(report.winding, 0);
    assert!(report.resonance_margin > 0.9);
}

#[test]
fn undecayed_or_mismatched_input_is_rejected() {
    let x = SpatialGrid::new(-5.0, 5.0, 128).unwrap();
    let m0: Vec<f64> = x.samples().iter().map(|x| 0.1 * (-x * x / 4.0).exp()).collect();
    assert!(matches!(prepare_profile(&m0, &x, 30.0), Err(IstError::Decay { .. })));
    assert!(matches!(prepare_profile(&m0[1..], &x, 30.0), Err(IstError::GridMismatch(_))));
    assert!(ode_oracle_scattering(&|_| 0.0, &OdeOracle::default(), &[0.0], Exec::Sequential).is_err());
    let run = zero_run();
    assert!(a_at(&run.data, C64::new(0.0, 0.0)).is_err());
}
