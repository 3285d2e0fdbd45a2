//! Compatibility residual of the `(y, t)` Lax pair.
//!
//! In the `y` variable the normalised wave function `Ψ = μ e^{−(ik/4)yσ₃}`
//! satisfies `Ψ_y = AΨ`, `Ψ_t = BΨ` with
//!
//! ```text
//! A = −(ik/4)σ₃ + (i m_y/(2q²))σ₁ + (m/(2zq²)) [[−im, 1], [−1, im]],
//! B = F⁻¹ (Q − i u_x σ₁) F,
//! Q = (ik/(2λ²))σ₃ − (iu/λ)σ₂ + (ik u_x/(2λ))σ₁,
//! F = √((q+1)/(2q)) [[1, −im/(q+1)], [−im/(q+1), 1]],
//! ```
//!
//! where `m_y = −iηq²` is read from the large-`z` coefficient `η`. The
//! residual `A_t − B_y + [A, B]` is evaluated with centred differences and
//! vanishes at second order in the difference step.

use crate::error::{IstError, Result};
use crate::mat2::{Mat2, I};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Reconstructed coefficients at one `(y, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaxFields {
    pub q: f64,
    pub m: f64,
    /// Large-`z` coefficient, `η = i m_y/q²`.
    pub eta: C64,
    pub u: f64,
    pub ux: f64,
}

impl LaxFields {
    /// Fields of the zero solution.
    pub fn zero() -> Self {
        LaxFields { q: 1.0, m: 0.0, eta: C64::new(0.0, 0.0), u: 0.0, ux: 0.0 }
    }
}

/// Default reference spectral point.
pub const REFERENCE_Z: f64 = 2.0;

/// `(A, B)` at spectral point `z`.
pub fn lax_matrices(f: &LaxFields, z: C64) -> Result<(Mat2, Mat2)> {
    if z.norm() < 1e-12 || (z - I).norm() < 1e-12 || (z + I).norm() < 1e-12 {
        return Err(IstError::Domain { op: "lax_matrices", detail: format!("z = {z} is a singular point") });
    }
    let k = z - z.inv();
    let lam = 0.5 * (z + z.inv());
    let (q, m) = (C64::new(f.q, 0.0), C64::new(f.m, 0.0));
    let my = (-I * f.eta * q * q).re;
    let q2 = q * q;
    let p1 = Mat2::new(-I * m, C64::new(1.0, 0.0), C64::new(-1.0, 0.0), I * m).scale(m / (2.0 * z * q2));
    let a = Mat2::sigma3().scale(-I * k / 4.0) + Mat2::sigma1().scale(I * my / (2.0 * q2)) + p1;
    let s = ((q + 1.0) / (2.0 * q)).sqrt();
    let o = -I * m / (q + 1.0);
    let ff = Mat2::new(C64::new(1.0, 0.0), o, o, C64::new(1.0, 0.0)).scale(s);
    let qq = Mat2::sigma3().scale(I * k / (2.0 * lam * lam)) - Mat2::sigma2().scale(I * f.u / lam)
        + Mat2::sigma1().scale(I * k * f.ux / (2.0 * lam))
        - Mat2::sigma1().scale(I * f.ux);
    let b = ff.inv() * qq * ff;
    Ok((a, b))
}

/// `max |A_t − B_y + [A, B]|` at `(y, t)` with difference step `h`
/// (requires `t ≥ h`).
pub fn lax_compatibility_residual(
    fields: &dyn Fn(f64, f64) -> Result<LaxFields>,
    y: f64,
    t: f64,
    h: f64,
    z: C64,
) -> Result<f64> {
    if !(h > 0.0) || t < h {
        return Err(IstError::Config(format!("need 0 < h <= t, got h = {h}, t = {t}")));
    }
    let ab = |yy: f64, tt: f64| -> Result<(Mat2, Mat2)> { lax_matrices(&fields(yy, tt)?, z) };
    let inv2h = C64::new(0.5 / h, 0.0);
    let at = (ab(y, t + h)?.0 - ab(y, t - h)?.0).scale(inv2h);
    let by = (ab(y + h, t)?.1 - ab(y - h, t)?.1).scale(inv2h);
    let (a, b) = ab(y, t)?;
    Ok((at - by + a.commutator(&b)).max_abs())
}
