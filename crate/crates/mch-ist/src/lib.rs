//! Numerical inverse scattering for the modified Camassa–Holm equation
//!
//! ```text
//! m_t + (m (u² − u_x²))_x + κ u_x = 0,   m = u − u_xx,   κ = 2,
//! ```
//!
//! on the line with decaying data: direct scattering from sampled `m₀`, time
//! evolution of the scattering data, Beals–Coifman solution of the
//! Riemann–Hilbert problem, and reconstruction of `m`, `u`, `u_x`, together
//! with independent oracles (an `x`-frame ODE scattering solver, a
//! pseudo-spectral time stepper and a Lax-compatibility residual).
//!
//! Independent work items (Jost solves per spectral node, RH solves per
//! `(y, t)`) run through [`exec::Exec`], which uses rayon when the `parallel`
//! feature is enabled (default) and plain iteration otherwise.

// `!(x > 0.0)`-style guards are used on purpose: they reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod config;
pub mod error;
pub mod exec;
pub mod grid;
pub mod io;
pub mod mat2;
pub mod reconstruct;
pub mod rhp;
pub mod run;
pub mod scattering;
pub mod soliton;
pub mod spectral;
pub mod time_flow;
pub mod validate;

pub use error::{IstError, Result};
pub use exec::Exec;
pub use mat2::Mat2;
