//! Spatial and spectral discretisations and the two-sheeted map `k ↔ z`.
//!
//! The spectral parameter `z` enters the Lax pair through `k = z − 1/z` and
//! `λ = (z + 1/z)/2`. Every real `k` has two real preimages
//! `z₊(k) = (k + √(k²+4))/2 > 0` and `z₋(k) = −1/z₊(k) < 0`. Spectral data live
//! on a uniform `k` grid and are pulled back to both branches; together the two
//! branches tile the real `z` line.

use crate::error::{IstError, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `k(z) = z − 1/z`.
pub fn k_of_z(z: C64) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        return Err(IstError::Domain { op: "k_of_z", detail: "z = 0".into() });
    }
    Ok(z - z.inv())
}

/// `λ(z) = (z + 1/z)/2`.
pub fn lambda_of_z(z: C64) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        return Err(IstError::Domain { op: "lambda_of_z", detail: "z = 0".into() });
    }
    Ok((z + z.inv()) * 0.5)
}

/// The two real preimages `(z₊(k), z₋(k))` of a real `k`.
///
/// Evaluated without cancellation: for `k < 0` the positive root is formed as
/// `2/(√(k²+4) − k)`.
pub fn z_branches(k: f64) -> (f64, f64) {
    let s = (k * k + 4.0).sqrt();
    let zp = if k >= 0.0 { 0.5 * (k + s) } else { 2.0 / (s - k) };
    (zp, -1.0 / zp)
}

/// Uniform real grid `lo, lo + h, …, hi` with `n` nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl SpatialGrid {
    /// Validates `n ≥ 16` and `hi > lo`.
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(IstError::Config(format!("spatial grid needs n >= 16, got {n}")));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(IstError::Config(format!("spatial grid needs hi > lo, got [{lo}, {hi}]")));
        }
        Ok(SpatialGrid { lo, hi, n })
    }

    /// Node spacing `(hi − lo)/(n − 1)`.
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    /// Node `i`.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    /// All nodes.
    pub fn samples(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Uniform `k` grid pulled back to both `z` branches.
///
/// Node ordering on the `z` line (length `2n`): indices `0..n` hold the
/// negative branch `z₋(k_j)` and indices `n..2n` the positive branch
/// `z₊(k_j)`; with increasing `k` both halves increase, so the concatenation is
/// an increasing sampling of the real line with a gap around `z = 0`.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    /// Cutoff `K_max`.
    pub k_max: f64,
    /// Nodes per branch (even).
    pub n: usize,
    /// Spacing `h = 2 K_max / n`.
    pub h: f64,
    /// `k_j = (j − (n−1)/2) h`, symmetric about zero.
    pub k_nodes: Vec<f64>,
    /// `z₊(k_j)`.
    pub z_plus_nodes: Vec<f64>,
    /// `z₋(k_j)`.
    pub z_minus_nodes: Vec<f64>,
    /// Concatenated `z` line: `z₋` block then `z₊` block.
    pub z: Vec<f64>,
    /// Trapezoid weights on the `z` line, `h · |dz/dk|`.
    pub weights: Vec<f64>,
    /// `ℓ(k) = √(k²+4)/2 = (z₊ − z₋)/2`.
    pub ell: Vec<f64>,
}

impl SpectralGrid {
    /// Builds the grid; `n` must be even and at least 16.
    pub fn new(k_max: f64, n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(IstError::Config(format!("spectral grid needs even n >= 16, got {n}")));
        }
        if !(k_max > 0.0) || !k_max.is_finite() {
            return Err(IstError::Config(format!("spectral cutoff must be positive, got {k_max}")));
        }
        let h = 2.0 * k_max / n as f64;
        let k_nodes: Vec<f64> = (0..n).map(|j| (j as f64 - 0.5 * (n as f64 - 1.0)) * h).collect();
        let mut z_plus_nodes = Vec::with_capacity(n);
        let mut z_minus_nodes = Vec::with_capacity(n);
        let mut ell = Vec::with_capacity(n);
        let mut w_minus = Vec::with_capacity(n);
        let mut w_plus = Vec::with_capacity(n);
        for &k in &k_nodes {
            let (zp, zm) = z_branches(k);
            let s = (k * k + 4.0).sqrt();
            z_plus_nodes.push(zp);
            z_minus_nodes.push(zm);
            ell.push(0.5 * s);
            // dz±/dk = ±z±/√(k²+4), both positive.
            w_plus.push(h * zp / s);
            w_minus.push(-h * zm / s);
        }
        let z = z_minus_nodes.iter().chain(z_plus_nodes.iter()).copied().collect();
        let weights = w_minus.into_iter().chain(w_plus).collect();
        Ok(SpectralGrid { k_max, n, h, k_nodes, z_plus_nodes, z_minus_nodes, z, weights, ell })
    }

    /// Number of nodes on the `z` line (`2n`).
    pub fn len_z(&self) -> usize {
        2 * self.n
    }

    /// `k` value attached to `z`-line node `i`.
    pub fn k_at(&self, i: usize) -> f64 {
        self.k_nodes[i % self.n]
    }

    /// Index on the `z` line of the node `−1/z_i` (same `k`, other branch).
    pub fn partner(&self, i: usize) -> usize {
        if i < self.n {
            i + self.n
        } else {
            i - self.n
        }
    }

    /// Index on the `z` line of the node `1/z_i` (= `z₊(−k)` for `i` on the
    /// positive branch).
    pub fn reciprocal(&self, i: usize) -> usize {
        let j = i % self.n;
        let mirrored = self.n - 1 - j;
        if i < self.n {
            mirrored
        } else {
            mirrored + self.n
        }
    }
}

/// Discretisation parameters for a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Half-width of the `x` window on which `m₀` is sampled.
    pub x_half_width: f64,
    /// Number of `x` samples.
    pub n_x: usize,
    /// Lower end of the `y` window used for reconstruction.
    pub y_lo: f64,
    /// Upper end of the `y` window used for reconstruction.
    pub y_hi: f64,
    /// Number of `y` samples.
    pub n_y: usize,
    /// Spectral cutoff `K_max`.
    pub k_max: f64,
    /// Spectral nodes per branch.
    pub n_k: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { x_half_width: 15.0, n_x: 512, y_lo: -12.0, y_hi: 12.0, n_y: 241, k_max: 30.0, n_k: 1024 }
    }
}

/// The grids of a run.
#[derive(Clone, Debug)]
pub struct Grids {
    pub x: SpatialGrid,
    pub y: SpatialGrid,
    pub spectral: SpectralGrid,
}

/// Builds and validates all grids.
///
/// Besides the type invariants this enforces that the `k` spacing resolves the
/// slowest phase oscillation `e^{−iky/2}` on the `y` window:
/// `Δk ≤ π / (2 max|y|)`.
pub fn build_grids(cfg: &GridConfig) -> Result<Grids> {
    let x = SpatialGrid::new(-cfg.x_half_width, cfg.x_half_width, cfg.n_x)?;
    let y = SpatialGrid::new(cfg.y_lo, cfg.y_hi, cfg.n_y)?;
    let spectral = SpectralGrid::new(cfg.k_max, cfg.n_k)?;
    let y_abs = cfg.y_lo.abs().max(cfg.y_hi.abs());
    let bound = PI / (2.0 * y_abs);
    if spectral.h > bound {
        return Err(IstError::Config(format!(
            "spectral spacing {:.4e} does not resolve e^(-iky/2) on |y| <= {y_abs}: need <= {bound:.4e}",
            spectral.h
        )));
    }
    Ok(Grids { x, y, spectral })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_of_z_examples() {
        assert_eq!(k_of_z(C64::new(1.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        assert!((k_of_z(C64::new(0.0, 1.0)).unwrap() - C64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((k_of_z(C64::new(2.0, 0.0)).unwrap() - C64::new(1.5, 0.0)).norm() < 1e-15);
        assert!(k_of_z(C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn branch_examples() {
        assert_eq!(z_branches(0.0), (1.0, -1.0));
        let (zp, zm) = z_branches(1.5);
        assert!((zp - 2.0).abs() < 1e-15 && (zm + 0.5).abs() < 1e-15);
        let (zp, zm) = z_branches(3.0);
        assert!((zp * zm + 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_invariants() {
        let g = SpectralGrid::new(30.0, 1024).unwrap();
        for j in 0..g.n {
            let k = g.k_nodes[j];
            assert!((g.k_nodes[g.n - 1 - j] + k).abs() < 1e-12, "k grid symmetric");
            let (zp, zm) = (g.z_plus_nodes[j], g.z_minus_nodes[j]);
            assert!((zp * zm + 1.0).abs() <= 1e-12);
            assert!((k_of_z(C64::new(zp, 0.0)).unwrap().re - k).abs() <= 1e-12);
            assert!((k_of_z(C64::new(zm, 0.0)).unwrap().re - k).abs() <= 1e-12);
        }
        assert!(g.z.windows(2).all(|w| w[1] > w[0]), "z line increasing");
        for i in 0..g.len_z() {
            // z -> -1/z exchanges the branches.
            assert!((g.z[g.partner(i)] + 1.0 / g.z[i]).abs() < 1e-12);
            assert!((g.z[g.reciprocal(i)] - 1.0 / g.z[i]).abs() < 1e-12 * g.z[i].abs().max(1.0 / g.z[i].abs()));
        }
    }

    #[test]
    fn build_grids_enforces_resolution() {
        let cfg = GridConfig { y_lo: -20.0, y_hi: 20.0, n_x: 512, k_max: 30.0, n_k: 512, ..GridConfig::default() };
        assert!(build_grids(&cfg).is_err(), "dk = 60/512 > pi/40");
        let cfg = GridConfig { n_k: 1024, ..cfg };
        let g = build_grids(&cfg).unwrap();
        assert!(g.spectral.h <= PI / 40.0);
        let bad = GridConfig { n_x: 8, ..GridConfig::default() };
        assert!(matches!(build_grids(&bad), Err(IstError::Config(_))));
        assert!(build_grids(&GridConfig::default()).is_ok());
    }
}
