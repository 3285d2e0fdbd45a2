//! Reflectionless solutions: symmetry orbits, regularity, the mCH residual,
//! Lax compatibility and the travelling-wave property.

use mch_ist::mat2::I;
use mch_ist::soliton::{
    complete_symmetry, orbit, soliton_on_x, soliton_point, solve_reflectionless, unit_circle_regular,
};
use mch_ist::validate::suite::{
    check_soliton_empty, check_soliton_lax, check_soliton_residual, check_soliton_traveling, soliton_seed,
};
use mch_ist::IstError;
use num_complex::Complex64 as C64;

#[test]
fn orbits_have_the_expected_size() {
    let (z, c) = soliton_seed();
    // Unit circle: −1/z = −z̄, so the orbit {z, −z̄} has two points.
    let o = orbit(z, c).unwrap();
    assert_eq!(o.len(), 2);
    // Generic point: four distinct points, closed under z ↦ −z̄ and z ↦ −1/z.
    let w = C64::new(0.8, 1.7);
    let o = orbit(w, C64::new(0.3, 0.1)).unwrap();
    assert_eq!(o.len(), 4);
    for p in &o {
        assert!(o.iter().any(|q| (q.z + p.z.conj()).norm() < 1e-12));
        assert!(o.iter().any(|q| (q.z + p.z.inv()).norm() < 1e-12));
        assert!(p.z.im > 0.0);
        assert_eq!(p.c_tilde, -p.c.conj());
    }
    // Imaginary axis: the constant must be real.
    assert_eq!(orbit(C64::new(0.0, 2.0), C64::new(0.5, 0.0)).unwrap().len(), 2);
    assert!(matches!(orbit(C64::new(0.0, 2.0), C64::new(0.0, 0.5)), Err(IstError::Spectrum(_))));
}

#[test]
fn invalid_spectra_are_rejected() {
    assert!(matches!(orbit(C64::new(1.0, 0.0), I), Err(IstError::Spectrum(_))));
    assert!(matches!(orbit(C64::new(1.0, -1.0), I), Err(IstError::Spectrum(_))));
    assert!(matches!(orbit(C64::new(0.5, 1.0), C64::new(0.0, 0.0)), Err(IstError::Spectrum(_))));
    assert!(matches!(orbit(I, C64::new(1.0, 0.0)), Err(IstError::Spectrum(_))));
    let (z, c) = soliton_seed();
    assert!(matches!(complete_symmetry(&[(z, c), (-z.conj(), c.conj())]), Err(IstError::Spectrum(_))));
}

#[test]
fn regularity_on_the_unit_circle() {
    assert!(unit_circle_regular(C64::from_polar(1.0, std::f64::consts::PI / 6.0)));
    assert!(!unit_circle_regular(C64::from_polar(1.0, std::f64::consts::PI / 3.0)));
    assert!(unit_circle_regular(C64::new(0.5, 1.5)));
}

#[test]
fn empty_spectrum_is_the_zero_field() {
    let r = check_soliton_empty();
    assert!(r.pass && r.max_abs_error == 0.0, "{}", r.summary());
    let s = solve_reflectionless(&[], 1.0, 2.0).unwrap();
    assert!(s.poles.is_empty());
}

#[test]
fn one_orbit_solves_mch() {
    for r in [check_soliton_residual(), check_soliton_lax(), check_soliton_traveling()] {
        assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn soliton_field_is_coherent() {
    let ds = complete_symmetry(&[soliton_seed()]).unwrap();
    let mut prev_x = f64::NEG_INFINITY;
    for j in 0..=120 {
        let y = -15.0 + 0.25 * j as f64;
        let p = soliton_point(&ds, y, 0.4).unwrap();
        assert!(p.field.q >= 1.0 - 1e-14);
        assert!(p.field.consistency < 1e-10, "{}", p.field.consistency);
        assert!(p.field.x > prev_x);
        prev_x = p.field.x;
    }
    // k(z) = 2i sin(π/6) = i, so the tails decay like e^{−|x|/2}.
    let far = soliton_on_x(&ds, &[-50.0, -30.0, 30.0, 50.0], 0.4).unwrap();
    for p in [&far[0], &far[3]] {
        assert!(p.field.m.abs() < 1e-9 && p.u.abs() < 1e-9, "{p:?}");
    }
    for (outer, inner) in [(&far[0], &far[1]), (&far[3], &far[2])] {
        let rate = (inner.field.m.abs() / outer.field.m.abs()).ln() / 20.0;
        assert!((rate - 0.5).abs() < 0.01, "decay rate {rate}");
    }
    // x-frame evaluation hits its targets.
    let xs = [-2.0, -0.5, 0.0, 1.25];
    for (p, x) in soliton_on_x(&ds, &xs, 0.4).unwrap().iter().zip(xs) {
        assert!((p.field.x - x).abs() < 1e-12);
    }
}
