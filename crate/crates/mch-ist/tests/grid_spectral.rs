//! Grids, the `z ↔ k` maps and the Fourier-multiplier operators.

use mch_ist::grid::{build_grids, k_of_z, lambda_of_z, z_branches, GridConfig, SpatialGrid, SpectralGrid};
use mch_ist::spectral::{derivative, helmholtz, padded_len, refine};
use mch_ist::IstError;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

#[test]
fn spectral_grid_symmetries() {
    let g = SpectralGrid::new(30.0, 256).unwrap();
    assert_eq!(g.len_z(), 512);
    assert!(g.z.windows(2).all(|w| w[1] > w[0]), "z line must increase");
    for i in 0..g.len_z() {
        let z = g.z[i];
        assert_eq!(g.partner(g.partner(i)), i);
        assert_eq!(g.reciprocal(g.reciprocal(i)), i);
        assert!((g.z[g.partner(i)] + 1.0 / z).abs() <= 1e-12 * (1.0 + 1.0 / z.abs()));
        assert!((g.z[g.reciprocal(i)] - 1.0 / z).abs() <= 1e-12 * (1.0 + 1.0 / z.abs()));
        assert!((z - 1.0 / z - g.k_at(i)).abs() <= 1e-12 * (1.0 + g.k_at(i).abs()));
        assert!(g.weights[i] > 0.0);
    }
    // k nodes are symmetric about zero.
    for j in 0..g.n {
        assert!((g.k_nodes[j] + g.k_nodes[g.n - 1 - j]).abs() < 1e-12);
    }
}

#[test]
fn z_line_quadrature_integrates_a_gaussian_moment() {
    // ∫ z⁴ e^{−z²} dz = 3√π/4. The line has a gap |z| < 1/K around the
    // origin, which costs about 2/(5K⁵) ≈ 2e-8 for this integrand.
    let g = SpectralGrid::new(30.0, 1024).unwrap();
    let s: f64 = g.z.iter().zip(&g.weights).map(|(z, w)| w * z.powi(4) * (-z * z).exp()).sum();
    assert!((s - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-7, "{s}");
}

#[test]
fn grid_validation() {
    assert!(matches!(SpectralGrid::new(30.0, 15), Err(IstError::Config(_))));
    assert!(matches!(SpectralGrid::new(30.0, 17), Err(IstError::Config(_))));
    assert!(SpectralGrid::new(0.0, 64).is_err());
    assert!(SpatialGrid::new(1.0, 1.0, 64).is_err());
    assert!(SpatialGrid::new(-1.0, 1.0, 8).is_err());
    // Δk = 60/64 does not resolve e^{−iky/2} on |y| ≤ 12.
    let coarse = GridConfig { n_k: 64, ..GridConfig::default() };
    assert!(matches!(build_grids(&coarse), Err(IstError::Config(_))));
    let g = build_grids(&GridConfig::default()).unwrap();
    assert_eq!((g.x.n, g.y.n, g.spectral.n), (512, 241, 1024));
}

#[test]
fn singular_points_are_rejected() {
    assert!(matches!(k_of_z(C64::new(0.0, 0.0)), Err(IstError::Domain { .. })));
    assert!(lambda_of_z(C64::new(0.0, 0.0)).is_err());
}

#[test]
fn derivative_and_helmholtz_against_closed_forms() {
    let g = SpatialGrid::new(-20.0, 20.0, 801).unwrap();
    let h = g.spacing();
    let x = g.samples();
    // u = e^{−x²} gives m = u − u'' = (3 − 4x²) e^{−x²}.
    let u: Vec<f64> = x.iter().map(|x| (-x * x).exp()).collect();
    let ux: Vec<f64> = x.iter().map(|x| -2.0 * x * (-x * x).exp()).collect();
    let m: Vec<f64> = x.iter().map(|x| (3.0 - 4.0 * x * x) * (-x * x).exp()).collect();
    let d = derivative(&u, h);
    assert!(d.iter().zip(&ux).all(|(a, b)| (a - b).abs() < 1e-11));
    let (hu, hux) = helmholtz(&m, h);
    let eu = hu.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let eux = hux.iter().zip(&ux).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(eu < 1e-10 && eux < 1e-10, "{eu} {eux}");
}

#[test]
fn helmholtz_of_a_decaying_exponential_kernel() {
    // m = sech²(x) has u with e^{−|x|} tails; check u − u_xx = m by
    // differentiating the result twice on a wide grid.
    let g = SpatialGrid::new(-40.0, 40.0, 1601).unwrap();
    let h = g.spacing();
    let m: Vec<f64> = g.samples().iter().map(|x| 1.0 / x.cosh().powi(2)).collect();
    let (u, ux) = helmholtz(&m, h);
    let uxx = derivative(&ux, h);
    let inner = 400..1201;
    let e = inner.map(|i| (u[i] - uxx[i] - m[i]).abs()).fold(0.0, f64::max);
    assert!(e < 1e-9, "{e}");
}

#[test]
fn refine_interpolates_band_limited_data() {
    let g = SpatialGrid::new(-15.0, 15.0, 301).unwrap();
    let f: Vec<f64> = g.samples().iter().map(|x| (-x * x / 2.0).exp()).collect();
    let (vals, ders) = refine(&f, g.spacing(), 4);
    assert_eq!(vals.len(), 1201);
    let hf = g.spacing() / 4.0;
    for (i, (v, d)) in vals.iter().zip(&ders).enumerate() {
        let x = g.lo + i as f64 * hf;
        assert!((v - (-x * x / 2.0).exp()).abs() < 1e-12);
        assert!((d + x * (-x * x / 2.0).exp()).abs() < 1e-11);
    }
}

proptest! {
    #[test]
    fn k_and_lambda_identities(re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let z = C64::new(re, im);
        prop_assume!(z.norm() > 1e-3);
        let k = k_of_z(z).unwrap();
        let l = lambda_of_z(z).unwrap();
        // k² + 4 = 4λ²; z ↦ −1/z keeps k and flips λ.
        prop_assert!((k * k + 4.0 - 4.0 * l * l).norm() <= 1e-10 * (1.0 + (k * k).norm()));
        let w = -z.inv();
        prop_assert!((k_of_z(w).unwrap() - k).norm() <= 1e-10 * (1.0 + k.norm()));
        prop_assert!((lambda_of_z(w).unwrap() + l).norm() <= 1e-10 * (1.0 + l.norm()));
    }

    #[test]
    fn branches_invert_k(k in -100.0f64..100.0) {
        let (zp, zm) = z_branches(k);
        prop_assert!(zp > 0.0 && zm < 0.0);
        prop_assert!((zp - 1.0 / zp - k).abs() <= 1e-12 * (1.0 + k.abs()));
        prop_assert!((zm - 1.0 / zm - k).abs() <= 1e-12 * (1.0 + k.abs()));
        prop_assert!((zp * zm + 1.0).abs() < 1e-12);
    }

    #[test]
    fn padding_is_the_next_power_of_two(n in 2usize..5000) {
        let p = padded_len(n);
        prop_assert!(p.is_power_of_two() && p >= 2 * n && p < 4 * n);
    }
}
