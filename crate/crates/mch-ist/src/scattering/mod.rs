//! Direct scattering: Jost functions, scattering coefficients, reflection
//! data and the discrete-spectrum probe.

pub mod data;
pub mod jost;
pub mod probe;
pub mod profile;

pub use data::{
    a_at, forward, reflection_data, rho_norms, scattering_pair, DiscretePoint, RhoNorms, ScatteringData,
    RESONANCE_THRESHOLD,
};
pub use jost::{jost_column, solve_jost, JostSolution, Side};
pub use probe::{spectrum_probe, winding_number, ProbeContour, ProbeReport};
pub use profile::{p_matrices, prepare_profile, NormReport, ProfileData, DECAY_THRESHOLD};
