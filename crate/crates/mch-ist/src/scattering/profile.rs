//! Sampled initial data and the quantities derived from it.

use crate::error::{IstError, Result};
use crate::grid::SpatialGrid;
use crate::mat2::{Mat2, I};
use crate::spectral;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples at both ends must be below this magnitude.
pub const DECAY_THRESHOLD: f64 = 1e-12;

/// Norms of the initial data reported alongside the profile.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct NormReport {
    pub sup: f64,
    pub l1: f64,
    pub l2: f64,
    /// `‖⟨x⟩ m‖₂ + ‖m_x‖₂`, a discrete stand-in for the weighted `H^{1,1}` norm.
    pub h11: f64,
    /// `∫(q − 1) dx` by the fine-grid Simpson rule used for `y(x)`.
    pub c_total: f64,
    /// The same integral by the trapezoid rule on the input samples.
    pub c_total_trapezoid: f64,
}

/// Tables on the refined grid used by the Jost integrator.
#[derive(Clone, Debug)]
pub struct FineTable {
    /// Fine spacing.
    pub h: f64,
    /// Refinement factor relative to the input grid (even).
    pub factor: usize,
    /// `q` at fine nodes.
    pub q: Vec<f64>,
    /// `q·P₀` at fine nodes (the `z`-independent part of `q P`).
    pub qp0: Vec<Mat2>,
    /// `q·P₁` at fine nodes (`q P = q P₀ + q P₁ / z`).
    pub qp1: Vec<Mat2>,
    /// `y` at even fine nodes (Magnus step endpoints).
    pub y_even: Vec<f64>,
    /// Largest `|k|` for which the step criterion holds.
    pub k_supported: f64,
}

/// Initial field `m₀` on an `x` grid together with `q`, the map `x ↦ y` and
/// the coefficient matrix `P` of the `y`-form spectral problem
/// `μ_y = −(ik/4)[σ₃, μ] + P μ`, with
/// `P = i m_y/(2q²) σ₁ + m/(2 z q²) [[−im, 1], [−1, im]]`, `m_y = m_x / q`.
#[derive(Clone, Debug)]
pub struct ProfileData {
    pub x: SpatialGrid,
    pub m0: Vec<f64>,
    pub q: Vec<f64>,
    /// `y(x) = x + c₊(x)`.
    pub y_of_x: Vec<f64>,
    /// `c₊(x) = −∫_x^∞ (q − 1)`.
    pub c_plus: Vec<f64>,
    /// `c₋(x) = ∫_{−∞}^x (q − 1)`.
    pub c_minus: Vec<f64>,
    /// `c = ∫_ℝ (q − 1) dx`.
    pub c_total: f64,
    /// `(P₀, P₁)` at the input nodes: `P(z) = P₀ + P₁ / z`.
    pub p_coeffs: Vec<(Mat2, Mat2)>,
    pub norm_report: NormReport,
    pub fine: FineTable,
}

/// `P₀ = i m_y/(2q²) σ₁` and `P₁ = m/(2q²) [[−im, 1], [−1, im]]`.
pub fn p_matrices(m: f64, m_x: f64, q: f64) -> (Mat2, Mat2) {
    let m_y = m_x / q;
    let p0 = Mat2::sigma1().scale(I * (m_y / (2.0 * q * q)));
    let s = m / (2.0 * q * q);
    let p1 = Mat2::new(-I * (m * s), C64::new(s, 0.0), C64::new(-s, 0.0), I * (m * s));
    (p0, p1)
}

/// Builds [`ProfileData`] from samples of `m₀` on `x`.
///
/// `k_max` is the largest `|k(z)|` at which Jost solutions will be requested;
/// it fixes the refinement of the integration grid so that the step in `y`
/// stays below `min(h_x, π/(4|k|))`.
pub fn prepare_profile(m0: &[f64], x: &SpatialGrid, k_max: f64) -> Result<ProfileData> {
    if m0.len() != x.n {
        return Err(IstError::GridMismatch(format!("{} samples for {} grid nodes", m0.len(), x.n)));
    }
    if let Some(i) = m0.iter().position(|v| !v.is_finite()) {
        return Err(IstError::Monotonicity { what: "q (non-finite m0 sample)", index: i });
    }
    for (end, v) in [("left", m0[0]), ("right", m0[x.n - 1])] {
        if v.abs() > DECAY_THRESHOLD {
            return Err(IstError::Decay { end, value: v.abs(), threshold: DECAY_THRESHOLD });
        }
    }
    let h = x.spacing();
    let q: Vec<f64> = m0.iter().map(|m| (m * m + 1.0).sqrt()).collect();
    let q_max = q.iter().copied().fold(1.0, f64::max);

    // A Magnus step spans two fine cells and advances y by at most
    // 2 (h/factor) q_max, which must not exceed min(h, π/(4 k_max)).
    let need = (8.0 * q_max * k_max.max(1e-3) * h / PI).max(2.0 * q_max);
    let mut factor = 2usize;
    while (factor as f64) < need {
        factor *= 2;
    }
    let hf = h / factor as f64;
    let k_supported = PI / (4.0 * 2.0 * hf * q_max);

    let (mf, mxf) = spectral::refine(m0, h, factor);
    let nf = mf.len();
    let qf: Vec<f64> = mf.iter().map(|m| (m * m + 1.0).sqrt()).collect();
    let mut qp0 = Vec::with_capacity(nf);
    let mut qp1 = Vec::with_capacity(nf);
    for j in 0..nf {
        let (p0, p1) = p_matrices(mf[j], mxf[j], qf[j]);
        let s = C64::new(qf[j], 0.0);
        qp0.push(p0.scale(s));
        qp1.push(p1.scale(s));
    }

    // Cumulative Simpson integrals of q − 1 over Magnus steps, from both ends.
    let steps = (nf - 1) / 2;
    let g = |j: usize| qf[j] - 1.0;
    let cell = |s: usize| hf / 3.0 * (g(2 * s) + 4.0 * g(2 * s + 1) + g(2 * s + 2));
    let mut cm_even = vec![0.0; steps + 1];
    for s in 0..steps {
        cm_even[s + 1] = cm_even[s] + cell(s);
    }
    let mut cp_even = vec![0.0; steps + 1];
    for s in (0..steps).rev() {
        cp_even[s] = cp_even[s + 1] - cell(s);
    }
    let c_total = cm_even[steps];
    let x_even = |s: usize| x.lo + 2.0 * s as f64 * hf;
    let y_even: Vec<f64> = (0..=steps).map(|s| x_even(s) + cp_even[s]).collect();

    let stride = factor / 2;
    let c_minus: Vec<f64> = (0..x.n).map(|j| cm_even[j * stride]).collect();
    let c_plus: Vec<f64> = (0..x.n).map(|j| cp_even[j * stride]).collect();
    let nodes = x.samples();
    let y_of_x: Vec<f64> = (0..x.n).map(|j| nodes[j] + c_plus[j]).collect();
    if let Some(i) = y_of_x.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(IstError::Monotonicity { what: "y(x)", index: i });
    }

    let mx = spectral::derivative(m0, h);
    let p_coeffs = (0..x.n).map(|j| p_matrices(m0[j], mx[j], q[j])).collect();

    let trapezoid = h * q.iter().map(|v| v - 1.0).sum::<f64>();
    let l1 = h * m0.iter().map(|v| v.abs()).sum::<f64>();
    let l2 = (h * m0.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let weighted = (h * m0.iter().zip(&nodes).map(|(v, x)| (1.0 + x * x) * v * v).sum::<f64>()).sqrt();
    let dl2 = (h * mx.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let norm_report = NormReport {
        sup: m0.iter().map(|v| v.abs()).fold(0.0, f64::max),
        l1,
        l2,
        h11: weighted + dl2,
        c_total,
        c_total_trapezoid: trapezoid,
    };

    Ok(ProfileData {
        x: x.clone(),
        m0: m0.to_vec(),
        q,
        y_of_x,
        c_plus,
        c_minus,
        c_total,
        p_coeffs,
        norm_report,
        fine: FineTable { h: hf, factor, q: qf, qp0, qp1, y_even, k_supported },
    })
}

impl ProfileData {
    /// `F(y)⁻²` at input node `j`, the `z → 0` value of the Jost functions:
    /// `F⁻² = (1/q) [[1, i m], [i m, 1]]`.
    pub fn f_inv_squared(&self, j: usize) -> Mat2 {
        let (m, q) = (self.m0[j], self.q[j]);
        Mat2::new(C64::new(1.0 / q, 0.0), I * (m / q), I * (m / q), C64::new(1.0 / q, 0.0))
    }

    /// Index of the input node whose `y` is closest to zero.
    pub fn y_zero_index(&self) -> usize {
        let mut best = 0;
        for (j, y) in self.y_of_x.iter().enumerate() {
            if y.abs() < self.y_of_x[best].abs() {
                best = j;
            }
        }
        best
    }

    /// Largest `|k|` at which Jost solutions honour the step criterion.
    pub fn k_supported(&self) -> f64 {
        self.fine.k_supported
    }
}
