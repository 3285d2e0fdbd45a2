//! Scattering coefficients and reflection data on the spectral line.

use super::jost::jost_at_node;
use super::profile::ProfileData;
use crate::error::{IstError, Result};
use crate::exec::Exec;
use crate::grid::SpectralGrid;
use crate::mat2::{det_cols, I};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Minimum admissible `|a|` on the real line.
pub const RESONANCE_THRESHOLD: f64 = 1e-3;

/// One discrete-spectrum point with its norming constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretePoint {
    pub z: C64,
    pub c: C64,
    pub c_tilde: C64,
}

/// Discrete norms of `ρ(k)` on the `k` grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RhoNorms {
    pub l2: f64,
    pub sup: f64,
    /// `‖⟨k⟩ρ‖₂ + ‖ρ'‖₂` with `ρ'` by centred differences.
    pub h11: f64,
    /// `max(|ρ|)` over the outermost 5% of nodes: the truncation indicator.
    pub tail: f64,
}

/// Samples of the scattering data on the two-branch `z` line.
///
/// All `*_vals` vectors are indexed like [`SpectralGrid::z`]; `rho` is indexed
/// like [`SpectralGrid::k_nodes`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringData {
    pub k_max: f64,
    pub n_k: usize,
    pub a_vals: Vec<C64>,
    pub b_vals: Vec<C64>,
    /// `r = b / a`.
    pub r_vals: Vec<C64>,
    /// `r̃ = b / ā`, the reflection coefficient of the right-normalised problem.
    pub rtilde_vals: Vec<C64>,
    /// `ρ(k) = r(z₊(k))`.
    pub rho: Vec<C64>,
    pub discrete: Vec<DiscretePoint>,
    /// `min |a|` over the real grid.
    pub resonance_margin: f64,
    pub rho_norms: RhoNorms,
}

impl ScatteringData {
    /// Spectral grid the samples live on.
    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.k_max, self.n_k)
    }

    /// Reflectionless data (`a ≡ 1`, `b ≡ 0`) with the given discrete spectrum.
    pub fn reflectionless(grid: &SpectralGrid, discrete: Vec<DiscretePoint>) -> Self {
        let n = grid.len_z();
        let one = vec![C64::new(1.0, 0.0); n];
        let zero = vec![C64::new(0.0, 0.0); n];
        ScatteringData {
            k_max: grid.k_max,
            n_k: grid.n,
            a_vals: one,
            b_vals: zero.clone(),
            r_vals: zero.clone(),
            rtilde_vals: zero,
            rho: vec![C64::new(0.0, 0.0); grid.n],
            discrete,
            resonance_margin: 1.0,
            rho_norms: RhoNorms::default(),
        }
    }

    /// `ln a(i)` from the trace formula
    /// `ln a(z) = −(1/2πi) ∫ ln(1 + |r(s)|²)/(s − z) ds`, valid without
    /// discrete spectrum.
    pub fn log_a_at_i(&self, grid: &SpectralGrid) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, &s) in grid.z.iter().enumerate() {
            let f = (1.0 + self.r_vals[i].norm_sqr()).ln();
            acc += grid.weights[i] * f / (C64::new(s, 0.0) - I);
        }
        -acc / (2.0 * PI * I)
    }
}

/// `a` and `b` at every node of the `z` line.
///
/// Jost solves run only on the branch with `|z| ≥ 1` (`z₊` for `k ≥ 0`, `z₋`
/// for `k < 0`); the partner node `−1/z` carries the same `a` and the opposite
/// `b`. Coefficients are read at the input node nearest `y = 0`:
/// `a = det(μ₋,₁, μ₊,₂)` and `b = e^{−iky/2} det(μ₊,₁, μ₋,₁)`.
pub fn scattering_pair(profile: &ProfileData, grid: &SpectralGrid, exec: Exec) -> Result<(Vec<C64>, Vec<C64>)> {
    let j0 = profile.y_zero_index();
    let y0 = profile.y_of_x[j0];
    let n = grid.n;
    let pairs = exec.try_map(n, |j| {
        let k = grid.k_nodes[j];
        let z = if k >= 0.0 { grid.z_plus_nodes[j] } else { grid.z_minus_nodes[j] };
        let (minus, plus) = jost_at_node(profile, C64::new(z, 0.0), j0)?;
        let a = det_cols(minus[0], plus[1]);
        let b = (-I * (0.5 * k * y0)).exp() * det_cols(plus[0], minus[0]);
        Ok::<_, IstError>((a, b))
    })?;
    let mut a_vals = vec![C64::new(0.0, 0.0); 2 * n];
    let mut b_vals = vec![C64::new(0.0, 0.0); 2 * n];
    for (j, &(a, b)) in pairs.iter().enumerate() {
        // Block n.. is the z₊ branch, block ..n the z₋ branch.
        let (own, other) = if grid.k_nodes[j] >= 0.0 { (n + j, j) } else { (j, n + j) };
        a_vals[own] = a;
        b_vals[own] = b;
        a_vals[other] = a;
        b_vals[other] = -b;
    }
    Ok((a_vals, b_vals))
}

/// `a(z)` at a point of the closed upper half-plane.
pub fn a_at(profile: &ProfileData, z: C64) -> Result<C64> {
    if z.im < 0.0 {
        return Err(IstError::Domain { op: "a_at", detail: format!("a is analytic in the upper half-plane, got {z}") });
    }
    let (minus, plus) = jost_at_node(profile, z, profile.y_zero_index())?;
    Ok(det_cols(minus[0], plus[1]))
}

/// `(r, r̃, ρ, resonance margin)` on the `z` line.
pub type ReflectionData = (Vec<C64>, Vec<C64>, Vec<C64>, f64);

/// `r`, `r̃` and `ρ` from `a`, `b`; fails when `min |a|` is below
/// [`RESONANCE_THRESHOLD`].
pub fn reflection_data(a_vals: &[C64], b_vals: &[C64], grid: &SpectralGrid) -> Result<ReflectionData> {
    if a_vals.len() != grid.len_z() || b_vals.len() != grid.len_z() {
        return Err(IstError::GridMismatch(format!(
            "{} / {} samples for a z line of {} nodes",
            a_vals.len(),
            b_vals.len(),
            grid.len_z()
        )));
    }
    let margin = a_vals.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
    if !(margin >= RESONANCE_THRESHOLD) {
        return Err(IstError::Resonance { margin, threshold: RESONANCE_THRESHOLD });
    }
    let r: Vec<C64> = a_vals.iter().zip(b_vals).map(|(a, b)| b / a).collect();
    let rt: Vec<C64> = a_vals.iter().zip(b_vals).map(|(a, b)| b / a.conj()).collect();
    let rho = r[grid.n..].to_vec();
    Ok((r, rt, rho, margin))
}

/// Discrete norms of `ρ` on the `k` grid.
pub fn rho_norms(rho: &[C64], grid: &SpectralGrid) -> RhoNorms {
    let h = grid.h;
    let n = rho.len();
    let l2 = (h * rho.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    let sup = rho.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let weighted = (h * rho.iter().zip(&grid.k_nodes).map(|(v, k)| (1.0 + k * k) * v.norm_sqr()).sum::<f64>()).sqrt();
    let deriv = (h * (1..n - 1).map(|j| ((rho[j + 1] - rho[j - 1]) / (2.0 * h)).norm_sqr()).sum::<f64>()).sqrt();
    let edge = (n / 20).max(1);
    let tail = rho[..edge].iter().chain(&rho[n - edge..]).map(|v| v.norm()).fold(0.0, f64::max);
    RhoNorms { l2, sup, h11: weighted + deriv, tail }
}

/// Full forward map: profile → scattering data (no discrete spectrum).
pub fn forward(profile: &ProfileData, grid: &SpectralGrid, exec: Exec) -> Result<ScatteringData> {
    let (a_vals, b_vals) = scattering_pair(profile, grid, exec)?;
    let (r_vals, rtilde_vals, rho, resonance_margin) = reflection_data(&a_vals, &b_vals, grid)?;
    let rho_norms = rho_norms(&rho, grid);
    Ok(ScatteringData {
        k_max: grid.k_max,
        n_k: grid.n,
        a_vals,
        b_vals,
        r_vals,
        rtilde_vals,
        rho,
        discrete: Vec::new(),
        resonance_margin,
        rho_norms,
    })
}
