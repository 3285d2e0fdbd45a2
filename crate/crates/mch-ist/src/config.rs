//! Run configuration: analytic profiles, discrete spectra, grids, times and
//! tolerances, read from JSON.

use crate::error::{IstError, Result};
use crate::grid::GridConfig;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

/// Shape of one bump of an analytic profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpKind {
    /// `A exp(−((x − x₀)/w)²)`.
    Gaussian,
    /// `A sech²((x − x₀)/w)`.
    Sech2,
}

/// One term of an analytic profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub kind: BumpKind,
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

fn one() -> f64 {
    1.0
}

/// `m₀` as a sum of Gaussian and `sech²` bumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub bumps: Vec<Bump>,
}

impl ProfileSpec {
    /// `A exp(−x²)`.
    pub fn gaussian(amplitude: f64) -> Self {
        ProfileSpec { bumps: vec![Bump { kind: BumpKind::Gaussian, amplitude, width: 1.0, center: 0.0 }] }
    }

    /// The zero profile.
    pub fn zero() -> Self {
        ProfileSpec { bumps: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        for b in &self.bumps {
            if !(b.width > 0.0) || !b.amplitude.is_finite() || !b.center.is_finite() || !b.width.is_finite() {
                return Err(IstError::Config(format!("invalid bump {b:?}: width must be positive, values finite")));
            }
        }
        Ok(())
    }

    /// `m₀(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.bumps
            .iter()
            .map(|b| {
                let s = (x - b.center) / b.width;
                match b.kind {
                    BumpKind::Gaussian => b.amplitude * (-s * s).exp(),
                    BumpKind::Sech2 => {
                        let c = s.cosh();
                        b.amplitude / (c * c)
                    }
                }
            })
            .sum()
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Where `m₀` comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    /// Analytic profile sampled on the configured `x` grid.
    Profile(ProfileSpec),
    /// CSV file with columns `x,m` on a uniform grid.
    Csv(PathBuf),
}

/// A discrete-spectrum seed `(z, c)`, each given as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSeed {
    pub z: [f64; 2],
    pub c: [f64; 2],
}

impl DiscreteSeed {
    pub fn pair(&self) -> (C64, C64) {
        (C64::new(self.z[0], self.z[1]), C64::new(self.c[0], self.c[1]))
    }
}

/// Pipeline stage to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Forward,
    Evolve,
    Inverse,
    Roundtrip,
    Soliton,
    Validate,
}

/// Pass/fail tolerances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Roundtrip sup error on `|x| ≤ compare_half_width`.
    pub roundtrip: f64,
    /// Riemann–Hilbert solver tolerance.
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { roundtrip: 1e-4, solver: 1e-12 }
    }
}

/// A complete, reproducible run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default = "default_source")]
    pub source: DataSource,
    /// Discrete spectrum seeds (soliton runs).
    #[serde(default)]
    pub discrete: Vec<DiscreteSeed>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Half-width of the physical `x` window on which fields are output.
    #[serde(default = "default_compare")]
    pub compare_half_width: f64,
    /// Number of output `x` nodes.
    #[serde(default = "default_n_out")]
    pub n_x_out: usize,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Recorded in the configuration hash. Every stage of the pipeline is
    /// deterministic, so no command currently draws from it.
    #[serde(default)]
    pub seed: u64,
}

fn default_source() -> DataSource {
    DataSource::Profile(ProfileSpec::gaussian(0.1))
}

fn default_times() -> Vec<f64> {
    vec![0.0]
}

fn default_compare() -> f64 {
    10.0
}

fn default_n_out() -> usize {
    401
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// A configuration for `command` with every other field at its default.
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            grids: GridConfig::default(),
            source: default_source(),
            discrete: Vec::new(),
            times: default_times(),
            tolerances: Tolerances::default(),
            compare_half_width: default_compare(),
            n_x_out: default_n_out(),
            output_dir: default_out(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        if self.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(IstError::Config(format!("times must be nonnegative and ascending, got {:?}", self.times)));
        }
        if !(self.tolerances.roundtrip > 0.0) || !(self.tolerances.solver > 0.0) {
            return Err(IstError::Config("tolerances must be positive".into()));
        }
        if !(self.compare_half_width > 0.0) || self.n_x_out < 2 {
            return Err(IstError::Config("output window needs a positive half-width and at least 2 nodes".into()));
        }
        if let DataSource::Profile(p) = &self.source {
            p.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded. The output
    /// directory is excluded, so the same run written to two places produces
    /// identical files.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { output_dir: PathBuf::new(), ..self.clone() };
        let json = serde_json::to_string(&canonical).expect("RunConfig serialises");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
