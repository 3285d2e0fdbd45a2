//! Independent oracles and the invariant suite.
//!
//! * [`ode_oracle`]: scattering coefficients by integrating the `x`-frame
//!   spectral problem directly;
//! * [`fd_mch`]: a pseudo-spectral RK4 time stepper and the PDE residual;
//! * [`lax`]: the compatibility residual of the `(y, t)` Lax pair;
//! * [`suite`]: the checks that gate a run, as machine-readable reports.

pub mod fd_mch;
pub mod lax;
pub mod ode_oracle;
pub mod suite;

pub use fd_mch::{
    conserved_q, fd_mch_evolve, fd_mch_residual, fd_mch_step, Evolution, ResidualReport, StepperOptions, KAPPA,
};
pub use lax::{lax_compatibility_residual, lax_matrices, LaxFields, REFERENCE_Z};
pub use ode_oracle::{ode_oracle_scattering, OdeOracle, OracleScattering};
pub use suite::{run_invariant_suite, OracleReport, ReferenceRun, SuiteConfig};
