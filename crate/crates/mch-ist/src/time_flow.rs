//! Space–time phase and time evolution of the scattering data.
//!
//! The phase is
//!
//! ```text
//! Θ(z; y, t) = −(1/4)(z − 1/z) y + 2 z (z² − 1)/(z² + 1)² · t,
//! ```
//!
//! and all time dependence of the inverse problem enters through the jump
//! factors `e^{∓2iΘ}` and the pole factors `e^{−2iΘ(z_j)}`; `a` is conserved
//! and `r`, `r̃`, `c_j` are carried unchanged. With this sign the
//! reconstructed field solves `m_t + (m(u² − u_x²))_x + 2u_x = 0`.

use crate::error::{IstError, Result};
use crate::grid::SpectralGrid;
use crate::mat2::I;
use crate::scattering::ScatteringData;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Sign convention of the time term in `Θ`.
///
/// [`TimeConvention::Reversed`] negates the time term. It is not a physical
/// option: it exists so that the validation suite can demonstrate that it
/// detects a wrong time flow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeConvention {
    #[default]
    Standard,
    Reversed,
}

impl TimeConvention {
    fn sign(self) -> f64 {
        match self {
            TimeConvention::Standard => 1.0,
            TimeConvention::Reversed => -1.0,
        }
    }
}

/// The `(y, t)` point at which jump data are built.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub y: f64,
    pub t: f64,
    pub convention: TimeConvention,
}

impl PhaseSpec {
    /// Validates `t ≥ 0` and finiteness.
    pub fn new(y: f64, t: f64) -> Result<Self> {
        if !y.is_finite() || !t.is_finite() || t < 0.0 {
            return Err(IstError::Config(format!("phase needs finite y and t >= 0, got y = {y}, t = {t}")));
        }
        Ok(PhaseSpec { y, t, convention: TimeConvention::Standard })
    }

    pub fn with_convention(mut self, convention: TimeConvention) -> Self {
        self.convention = convention;
        self
    }

    /// `Θ(z; y, t)` under this phase specification's convention.
    pub fn theta(&self, z: C64) -> Result<C64> {
        theta_with(z, self.y, self.t, self.convention)
    }

    /// `∂Θ/∂y = −k/4`.
    pub fn theta_y(z: C64) -> C64 {
        -(z - z.inv()) * 0.25
    }
}

/// Coefficient of `t` in `Θ`: `2z(z² − 1)/(z² + 1)² = 2k/(k² + 4)`.
pub fn time_coefficient(z: C64) -> Result<C64> {
    let w = z * z + 1.0;
    if w.norm() < 1e-14 || z.norm() == 0.0 {
        return Err(IstError::Domain { op: "theta", detail: format!("time term is singular at z = {z}") });
    }
    Ok(2.0 * z * (z * z - 1.0) / (w * w))
}

/// `Θ(z; y, t)` with the standard convention.
pub fn theta(z: C64, y: f64, t: f64) -> Result<C64> {
    theta_with(z, y, t, TimeConvention::Standard)
}

/// `Θ(z; y, t)` with an explicit convention.
pub fn theta_with(z: C64, y: f64, t: f64, convention: TimeConvention) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(IstError::Domain { op: "theta", detail: "z = 0".into() });
    }
    let space = -(z - z.inv()) * (0.25 * y);
    if t == 0.0 {
        return Ok(space);
    }
    Ok(space + time_coefficient(z)? * (t * convention.sign()))
}

/// Scattering data at time `t`: the static data plus the time at which jump
/// factors will be evaluated.
#[derive(Clone, Debug)]
pub struct EvolvedScattering<'a> {
    pub data: &'a ScatteringData,
    pub t: f64,
    pub convention: TimeConvention,
}

/// Attaches a time to the scattering data; `a`, `r`, `r̃` and `c_j` are
/// carried verbatim and the flow is realised by `Θ`.
pub fn evolve_scattering(sd: &ScatteringData, t: f64) -> Result<EvolvedScattering<'_>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(IstError::Config(format!("evolution time must be finite and >= 0, got {t}")));
    }
    Ok(EvolvedScattering { data: sd, t, convention: TimeConvention::Standard })
}

impl EvolvedScattering<'_> {
    /// `r(z) e^{−2iΘ(z; 0, t)}` at every `z`-line node: the reflection
    /// coefficient that the time-`t` problem sees at `y = 0`.
    pub fn effective_reflection(&self, grid: &SpectralGrid) -> Result<Vec<C64>> {
        grid.z
            .iter()
            .zip(&self.data.r_vals)
            .map(|(&z, &r)| Ok(r * (-2.0 * I * theta_with(C64::new(z, 0.0), 0.0, self.t, self.convention)?).exp()))
            .collect()
    }

    /// `b(z; t) = b(z; 0) e^{−2iΘ(z; 0, t)}` on the `z` line.
    pub fn evolved_b(&self, grid: &SpectralGrid) -> Result<Vec<C64>> {
        grid.z
            .iter()
            .zip(&self.data.b_vals)
            .map(|(&z, &b)| Ok(b * (-2.0 * I * theta_with(C64::new(z, 0.0), 0.0, self.t, self.convention)?).exp()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_phase_example() {
        let th = theta(C64::new(2.0, 0.0), 4.0, 0.0).unwrap();
        assert!((th - C64::new(-1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn real_phase_is_unimodular_and_additive() {
        for &z in &[0.3, -2.0, 1.7, -0.45] {
            let z = C64::new(z, 0.0);
            let e = (2.0 * I * theta(z, 1.3, 0.7).unwrap()).exp();
            assert!((e.norm() - 1.0).abs() < 1e-14);
            let a = theta(z, 1.3, 0.2 + 0.5).unwrap();
            let b = theta(z, 1.3, 0.2).unwrap() + theta(z, 0.0, 0.5).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn pole_factor_modulus() {
        let zj = C64::new(0.4, 0.8);
        let y = 2.5;
        let lhs = (-2.0 * I * theta(zj, y, 0.0).unwrap()).exp().norm();
        let rhs = (-(y / 2.0) * (1.0 + 1.0 / zj.norm_sqr()) * zj.im).exp();
        assert!((lhs - rhs).abs() < 1e-14 * rhs);
    }

    #[test]
    fn time_term_matches_k_form_and_rejects_poles() {
        let z = C64::new(1.7, 0.3);
        let k = z - z.inv();
        assert!((time_coefficient(z).unwrap() - 2.0 * k / (k * k + 4.0)).norm() < 1e-14);
        assert!(theta(I, 0.0, 1.0).is_err());
        assert!(theta(I, 1.0, 0.0).is_ok());
        assert!(PhaseSpec::new(0.0, -1.0).is_err());
    }
}
