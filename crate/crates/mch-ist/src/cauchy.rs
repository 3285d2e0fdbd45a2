//! Cauchy integral and boundary projections on the real spectral line.
//!
//! Three discretisations are provided.
//!
//! * **`k` line, fast.** On the uniform `k` grid the principal value is the
//!   alternate-point rule `PV∫F(s)/(s−k_m) ds ≈ Σ_{j odd} (2/j) F_{m+j}`,
//!   a Toeplitz product evaluated exactly by zero-padded FFT. On the infinite
//!   lattice its symbol is `iπ·sign(θ)`, so `C± = ±½ + PV/(2πi)` are the
//!   half-line indicator projections; the grid operator is their finite
//!   section, hence Plemelj `C₊ − C₋ = I` holds identically and `C±` are
//!   contractions in `ℓ²`.
//! * **`z` line, fast.** A function on the two-branch `z` line is split into
//!   the `k`-functions `S = (f₊ + f₋)/2` and `H = (f₊ − f₋)/(2ℓ)`,
//!   `ℓ = √(k²+4)/2`; the `z`-line projection is assembled from `k`-line
//!   projections of `S` and `H` plus a constant `h ΣH/(4πi)`. For
//!   `z ↦ −1/z`-symmetric input (`H = 0`) it reduces to the `k`-line
//!   projection exactly.
//! * **`z` line, dense.** Alternate-point principal value on the `z` nodes with
//!   weights `h |dz/dk|`, antisymmetric and diagonal-free. This is `O(n²)` and
//!   serves as the independent reference.

use crate::error::{IstError, Result};
use crate::grid::SpectralGrid;
use crate::mat2::I;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Which boundary value of the Cauchy integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Limit from the upper half-plane, `C₊`.
    Plus,
    /// Limit from the lower half-plane, `C₋`.
    Minus,
}

impl Boundary {
    fn sign(self) -> f64 {
        match self {
            Boundary::Plus => 1.0,
            Boundary::Minus => -1.0,
        }
    }
}

/// Shared, read-only state for Cauchy operators on one spectral grid.
#[derive(Clone)]
pub struct CauchyContext {
    grid: SpectralGrid,
    /// FFT of the alternate-point kernel, negated, length `2n`.
    symbol: Vec<C64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CauchyContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CauchyContext").field("n", &self.grid.n).field("k_max", &self.grid.k_max).finish()
    }
}

impl CauchyContext {
    /// Plans the transforms for `grid`.
    pub fn new(grid: &SpectralGrid) -> Self {
        let n = grid.n;
        let len = 2 * n;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        // Kernel c_j = 2/j for odd j, stored cyclically; the product
        // out_m = Σ_n c_{n−m} F_n is a convolution with d_j = c_{−j} = −c_j.
        let mut c: Vec<C64> = (0..len)
            .map(|i| {
                let j = if i < n { i as i64 } else { i as i64 - len as i64 };
                if j % 2 != 0 {
                    C64::new(2.0 / j as f64, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        fwd.process(&mut c);
        let symbol = c.into_iter().map(|v| -v / len as f64).collect();
        CauchyContext { grid: grid.clone(), symbol, fwd, inv }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Alternate-point principal value `Σ_{j odd} (2/j) F_{m+j}` on the `k`
    /// grid (without the `1/(2πi)` factor).
    fn pv_k(&self, f: &[C64]) -> Vec<C64> {
        let n = self.grid.n;
        let mut buf = vec![C64::new(0.0, 0.0); 2 * n];
        buf[..n].copy_from_slice(f);
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        buf.truncate(n);
        buf
    }

    /// `C±` on the `k` grid.
    pub fn project_k(&self, f: &[C64], side: Boundary) -> Vec<C64> {
        assert_eq!(f.len(), self.grid.n, "k-line samples must match the grid");
        let half = 0.5 * side.sign();
        let scale = 1.0 / (2.0 * PI * I);
        self.pv_k(f).into_iter().zip(f).map(|(p, v)| v * half + p * scale).collect()
    }

    /// `C₊` on the `k` grid.
    pub fn project_plus(&self, f: &[C64]) -> Vec<C64> {
        self.project_k(f, Boundary::Plus)
    }

    /// `C₋` on the `k` grid.
    pub fn project_minus(&self, f: &[C64]) -> Vec<C64> {
        self.project_k(f, Boundary::Minus)
    }

    /// `C±` on the `z` line by the fast split route.
    pub fn project_z(&self, f: &[C64], side: Boundary) -> Vec<C64> {
        let n = self.grid.n;
        assert_eq!(f.len(), 2 * n, "z-line samples must match the grid");
        let (fm, fp) = f.split_at(n);
        let ell = &self.grid.ell;
        let s: Vec<C64> = (0..n).map(|j| 0.5 * (fp[j] + fm[j])).collect();
        let hh: Vec<C64> = (0..n).map(|j| (fp[j] - fm[j]) / (2.0 * ell[j])).collect();
        let cs = self.project_k(&s, side);
        let ch = self.project_k(&hh, side);
        let corr = hh.iter().sum::<C64>() * self.grid.h / (4.0 * PI * I);
        let mut out = Vec::with_capacity(2 * n);
        out.extend((0..n).map(|j| cs[j] - ell[j] * ch[j] + corr));
        out.extend((0..n).map(|j| cs[j] + ell[j] * ch[j] + corr));
        out
    }

    /// `C±` on the `z` line by dense alternate-point principal-value
    /// quadrature: `(PV f)_m = Σ_{(n−m) odd} 2 W_n f_n / (z_n − z_m)`.
    pub fn project_pv_z(&self, f: &[C64], side: Boundary) -> Vec<C64> {
        let len = self.grid.len_z();
        assert_eq!(f.len(), len, "z-line samples must match the grid");
        let (z, w) = (&self.grid.z, &self.grid.weights);
        let half = 0.5 * side.sign();
        let scale = 1.0 / (2.0 * PI * I);
        (0..len)
            .map(|m| {
                let start = if m % 2 == 0 { 1 } else { 0 };
                let mut acc = C64::new(0.0, 0.0);
                let mut nn = start;
                while nn < len {
                    acc += f[nn] * (2.0 * w[nn] / (z[nn] - z[m]));
                    nn += 2;
                }
                f[m] * half + acc * scale
            })
            .collect()
    }

    /// Dense real kernel `K[m][n] = 2W_n/(z_n − z_m)` for odd `n − m`, zero
    /// otherwise (row-major, `2n × 2n`).
    pub fn dense_pv_kernel(&self) -> Vec<f64> {
        let len = self.grid.len_z();
        let (z, w) = (&self.grid.z, &self.grid.weights);
        let mut k = vec![0.0; len * len];
        for m in 0..len {
            for nn in ((m + 1) % 2..len).step_by(2) {
                k[m * len + nn] = 2.0 * w[nn] / (z[nn] - z[m]);
            }
        }
        k
    }

    fn check_target(z: C64) -> Result<()> {
        if z.im == 0.0 && z.re != 0.0 {
            return Err(IstError::Domain {
                op: "cauchy_eval",
                detail: format!("z = {} lies on the contour; use the boundary projections", z.re),
            });
        }
        Ok(())
    }

    /// `(1/2πi) ∫ f(s)/(s − z) ds` by the trapezoid rule on the `z` line.
    ///
    /// `z = 0` is accepted: it sits in the gap between the two branches where
    /// jump data vanish, so the sum is regular there.
    pub fn cauchy_eval(&self, f: &[C64], z: C64) -> Result<C64> {
        Self::check_target(z)?;
        let acc: C64 = self.grid.z.iter().zip(&self.grid.weights).zip(f).map(|((&s, &w), &v)| v * w / (s - z)).sum();
        Ok(acc / (2.0 * PI * I))
    }

    /// `d/dz` of [`CauchyContext::cauchy_eval`]: `(1/2πi) ∫ f(s)/(s − z)² ds`.
    pub fn cauchy_eval_derivative(&self, f: &[C64], z: C64) -> Result<C64> {
        Self::check_target(z)?;
        let acc: C64 =
            self.grid.z.iter().zip(&self.grid.weights).zip(f).map(|((&s, &w), &v)| v * w / ((s - z) * (s - z))).sum();
        Ok(acc / (2.0 * PI * I))
    }

    /// `lim_{z→∞} z·C f(z) = −(1/2πi) ∫ f(s) ds`.
    pub fn cauchy_moment(&self, f: &[C64]) -> C64 {
        let acc: C64 = self.grid.weights.iter().zip(f).map(|(&w, &v)| v * w).sum();
        -acc / (2.0 * PI * I)
    }

    /// Estimate of the truncation error of [`CauchyContext::cauchy_eval`]:
    /// the neglected tails are bounded by their outermost samples times the
    /// local scale `|s|` of the branch ends (both the far ends and the
    /// near-zero ends of the `z` line).
    pub fn tail_estimate(&self, f: &[C64], z: C64) -> f64 {
        let len = self.grid.len_z();
        let n = self.grid.n;
        [0, n - 1, n, len - 1]
            .iter()
            .map(|&i| {
                let s = self.grid.z[i];
                f[i].norm() * s.abs() / (2.0 * PI * (C64::new(s, 0.0) - z).norm().max(1e-300))
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize) -> CauchyContext {
        CauchyContext::new(&SpectralGrid::new(30.0, n).unwrap())
    }

    #[test]
    fn plemelj_and_contraction_on_random_samples() {
        let c = ctx(64);
        let f: Vec<C64> = (0..64).map(|j| C64::new((j as f64 * 1.7).sin(), (j as f64 * 0.37).cos())).collect();
        let p = c.project_plus(&f);
        let m = c.project_minus(&f);
        let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for j in 0..64 {
            assert!((p[j] - m[j] - f[j]).norm() < 1e-13);
        }
        assert!(norm(&p) <= norm(&f) * (1.0 + 1e-12));
        assert!(norm(&m) <= norm(&f) * (1.0 + 1e-12));
    }

    #[test]
    fn zero_maps_to_zero() {
        let c = ctx(32);
        let z = vec![C64::new(0.0, 0.0); 64];
        assert!(c.project_z(&z, Boundary::Plus).iter().all(|v| v.norm() == 0.0));
        assert!(c.project_pv_z(&z, Boundary::Minus).iter().all(|v| v.norm() == 0.0));
        assert_eq!(c.cauchy_eval(&z, C64::new(0.0, 2.0)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn real_targets_are_rejected() {
        let c = ctx(32);
        let f = vec![C64::new(1.0, 0.0); 64];
        assert!(c.cauchy_eval(&f, C64::new(0.5, 0.0)).is_err());
        assert!(c.cauchy_eval(&f, C64::new(0.0, 0.0)).is_ok());
    }
}
