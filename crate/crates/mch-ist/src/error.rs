//! Error type shared by every stage of the pipeline.

use thiserror::Error;

/// Errors raised by the scattering, Riemann–Hilbert and reconstruction stages.
///
/// Every variant names the stage that produced it so that batch runs can
/// report failures with their provenance.
#[derive(Debug, Error)]
pub enum IstError {
    /// A function was evaluated outside its domain (e.g. `k(z)` at `z = 0`).
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Grid or run configuration violates a documented invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// Initial data do not decay to numerical zero at the grid ends.
    #[error("decay error: |m0| = {value:.3e} at the {end} end exceeds {threshold:.1e}")]
    Decay { end: &'static str, value: f64, threshold: f64 },

    /// A sampled quantity that must be monotone is not.
    #[error("monotonicity error in {what} at index {index}")]
    Monotonicity { what: &'static str, index: usize },

    /// `min |a|` on the real line is below the resonance threshold.
    #[error("resonance error: min |a| on the real line = {margin:.3e} < {threshold:.1e}")]
    Resonance { margin: f64, threshold: f64 },

    /// The argument-principle contour is too coarse to count zeros reliably.
    #[error("contour-resolution error: phase increment {increment:.3} rad exceeds pi/2")]
    ContourResolution { increment: f64 },

    /// Fixed-step integration cannot honour its step-size criterion.
    #[error("step-control failure: {0}")]
    StepControl(String),

    /// Iterative solve did not converge; the trace holds the update norms.
    #[error("nonconvergence in {solver} after {iterations} iterations (last update {last:.3e})")]
    NonConvergence { solver: &'static str, iterations: usize, last: f64, trace: Vec<f64> },

    /// A dense linear system is numerically singular.
    #[error("singular system in {what}: condition estimate {condition:.3e}")]
    Singular { what: &'static str, condition: f64 },

    /// Reconstruction left its admissible regime (e.g. `M11(0) <= 0`).
    #[error("regime error: {0}")]
    Regime(String),

    /// Discrete spectrum violates simplicity or symmetry constraints.
    #[error("discrete spectrum error: {0}")]
    Spectrum(String),

    /// Explicit time stepping violated its stability bound.
    #[error("CFL violation: dt = {dt:.3e} exceeds stable bound {bound:.3e}")]
    Cfl { dt: f64, bound: f64 },

    /// The finite-difference oracle detected blow-up.
    #[error("blow-up detected: sup|m| grew from {initial:.3e} to {current:.3e}")]
    BlowUp { initial: f64, current: f64 },

    /// Arrays that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Reading or writing artifacts failed.
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialisation failed.
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// CSV (de)serialisation failed.
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, IstError>;
