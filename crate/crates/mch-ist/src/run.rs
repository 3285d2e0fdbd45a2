//! Batch driver: executes one [`RunConfig`] and writes its artifacts.
//!
//! | command     | artifacts                                                   |
//! |-------------|-------------------------------------------------------------|
//! | `forward`   | `scattering.csv`                                            |
//! | `evolve`    | `scattering.csv`, `scattering_t<i>.csv` per time            |
//! | `inverse`   | `scattering.csv`, `field_t<i>_{y,x}.csv` per time           |
//! | `roundtrip` | `scattering.csv`, `field_t0_{y,x}.csv`, gated error report  |
//! | `soliton`   | `soliton_t<i>_{y,x}.csv` per time                           |
//! | `validate`  | `validation.json` with every oracle report                  |
//!
//! Every command also writes `run.json` (configuration, hash, checks,
//! warnings). A run succeeds when every gated check passes and, in strict
//! mode, no warning was raised.

use crate::cauchy::CauchyContext;
use crate::config::{Command, DataSource, RunConfig};
use crate::error::{IstError, Result};
use crate::exec::Exec;
use crate::grid::{build_grids, Grids, SpatialGrid};
use crate::io;
use crate::reconstruct::{reconstruct_field, uniform_interp, FieldState, BOUNDARY_MASS_WARNING};
use crate::rhp::{solve_many, SolverOptions};
use crate::scattering::{forward, prepare_profile, ScatteringData};
use crate::soliton::{complete_symmetry, soliton_on_x, soliton_point};
use crate::time_flow::{evolve_scattering, PhaseSpec, TimeConvention};
use crate::validate::{run_invariant_suite, OracleReport, SuiteConfig};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};

/// `ρ` tail above which spectral truncation is reported as a warning.
pub const TRUNCATION_WARNING: f64 = 1e-8;

/// Soliton solve condition number above which a warning is raised.
pub const SOLITON_CONDITION_WARNING: f64 = 1e8;

/// Execution switches that are not part of the reproducible configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub exec: Exec,
    /// Time-flow convention; [`TimeConvention::Reversed`] is the mutation
    /// used to demonstrate that validation detects a wrong time flow.
    pub convention: TimeConvention,
    /// Treat warnings as failures.
    pub strict: bool,
    /// Dump the Beals–Coifman density at every `stride`-th `y` node of each
    /// field reconstruction.
    pub dump_mu_stride: Option<usize>,
}

/// Result of a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunOutcome {
    pub command: Command,
    pub config_hash: String,
    pub artifacts: Vec<PathBuf>,
    /// Gated checks.
    pub checks: Vec<OracleReport>,
    pub warnings: Vec<String>,
    pub strict: bool,
}

impl RunOutcome {
    /// Whether every gated check passed (and, in strict mode, no warning was
    /// raised).
    pub fn success(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && (!self.strict || self.warnings.is_empty())
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    opts: RunOptions,
    hash: String,
    dir: &'a Path,
    artifacts: Vec<PathBuf>,
    checks: Vec<OracleReport>,
    warnings: Vec<String>,
}

/// Initial data and the scattering data computed from it.
struct Forward {
    grids: Grids,
    x: SpatialGrid,
    m0: Vec<f64>,
    sd: ScatteringData,
}

impl Context<'_> {
    fn solver(&self) -> SolverOptions {
        SolverOptions { tol: self.cfg.tolerances.solver, ..SolverOptions::default() }
    }

    fn output_grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(-self.cfg.compare_half_width, self.cfg.compare_half_width, self.cfg.n_x_out)
    }

    fn initial_data(&self, grids: &Grids) -> Result<(SpatialGrid, Vec<f64>)> {
        match &self.cfg.source {
            DataSource::Profile(p) => Ok((grids.x.clone(), p.sample(&grids.x.samples()))),
            DataSource::Csv(path) => io::read_profile_csv(path),
        }
    }

    fn forward(&mut self) -> Result<Forward> {
        let grids = build_grids(&self.cfg.grids)?;
        let (x, m0) = self.initial_data(&grids)?;
        let data = prepare_profile(&m0, &x, self.cfg.grids.k_max)?;
        let sd = forward(&data, &grids.spectral, self.opts.exec)?;
        if sd.rho_norms.tail > TRUNCATION_WARNING {
            self.warnings.push(format!(
                "spectral truncation: |rho| = {:.3e} near k = ±K exceeds {TRUNCATION_WARNING:.0e}",
                sd.rho_norms.tail
            ));
        }
        let meta = json!({ "c": data.c_total, "t": 0.0 });
        let path = io::write_scattering(self.dir, "scattering", &self.hash, &sd, &grids.spectral, meta)?;
        self.artifacts.push(path);
        Ok(Forward { grids, x, m0, sd })
    }

    fn field(&mut self, fw: &Forward, ctx: &CauchyContext, index: usize, t: f64) -> Result<FieldState> {
        let xg = self.output_grid()?;
        let fs =
            reconstruct_field(ctx, &fw.sd, t, self.opts.convention, &fw.grids.y, &xg, &self.solver(), self.opts.exec)?;
        let d = &fs.diagnostics;
        if d.boundary_mass > BOUNDARY_MASS_WARNING {
            self.warnings.push(format!(
                "t = {t}: |m| at the ends of the x output window is {:.3e}; u near the ends is unreliable",
                d.boundary_mass
            ));
        }
        if !d.mu_bound_ok || !d.m_bound_ok {
            self.warnings.push(format!("t = {t}: small-norm operator bounds not realised on the grid"));
        }
        let meta = json!({ "convention": self.opts.convention });
        let paths = io::write_field(self.dir, &format!("field_t{index}"), &self.hash, &fs, meta)?;
        self.artifacts.extend(paths);
        if let Some(stride) = self.opts.dump_mu_stride {
            self.dump_mu(fw, ctx, index, t, stride.max(1))?;
        }
        Ok(fs)
    }

    fn dump_mu(&mut self, fw: &Forward, ctx: &CauchyContext, index: usize, t: f64, stride: usize) -> Result<()> {
        let ys: Vec<f64> = fw.grids.y.samples().into_iter().step_by(stride).collect();
        let phases: Vec<PhaseSpec> = ys
            .iter()
            .map(|&y| PhaseSpec::new(y, t).map(|p| p.with_convention(self.opts.convention)))
            .collect::<Result<_>>()?;
        let sols = solve_many(ctx, &fw.sd, &phases, &self.solver(), self.opts.exec)?;
        let dir = self.dir.join("mu");
        for (j, (sol, _)) in sols.iter().enumerate() {
            let path = io::write_mu(&dir, &format!("mu_t{index}_y{j}"), &self.hash, &fw.grids.spectral, sol)?;
            self.artifacts.push(path);
        }
        Ok(())
    }

    fn evolve(&mut self) -> Result<()> {
        let fw = self.forward()?;
        let g = &fw.grids.spectral;
        for (i, &t) in self.cfg.times.iter().enumerate() {
            let mut ev = evolve_scattering(&fw.sd, t)?;
            ev.convention = self.opts.convention;
            let r = ev.effective_reflection(g)?;
            let b = ev.evolved_b(g)?;
            let evolved = ScatteringData { rho: r[g.n..].to_vec(), r_vals: r, b_vals: b, ..fw.sd.clone() };
            let meta = json!({ "t": t, "convention": self.opts.convention, "y": 0.0 });
            let path = io::write_scattering(self.dir, &format!("scattering_t{i}"), &self.hash, &evolved, g, meta)?;
            self.artifacts.push(path);
        }
        Ok(())
    }

    fn inverse(&mut self) -> Result<()> {
        let fw = self.forward()?;
        let ctx = CauchyContext::new(&fw.grids.spectral);
        for (i, &t) in self.cfg.times.iter().enumerate() {
            self.field(&fw, &ctx, i, t)?;
        }
        Ok(())
    }

    fn roundtrip(&mut self) -> Result<()> {
        let fw = self.forward()?;
        let ctx = CauchyContext::new(&fw.grids.spectral);
        let fs = self.field(&fw, &ctx, 0, 0.0)?;
        let xs = fs.x_grid.samples();
        if fs.x_grid.lo < fw.x.lo || fs.x_grid.hi > fw.x.hi {
            return Err(IstError::GridMismatch("output window exceeds the input x grid".into()));
        }
        let reference: Vec<f64> = match &self.cfg.source {
            DataSource::Profile(p) => p.sample(&xs),
            DataSource::Csv(_) => xs.iter().map(|&x| uniform_interp(&fw.x, &fw.m0, x)).collect(),
        };
        let e = fs.m_x.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = reference.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        let report = OracleReport::new("roundtrip.sup_error", e, e, self.cfg.tolerances.roundtrip)
            .with("half_width", self.cfg.compare_half_width)
            .with("sup_m0", scale);
        let path = io::write_json(self.dir, "roundtrip", &self.hash, json!({ "report": report }))?;
        self.artifacts.push(path);
        self.checks.push(report);
        Ok(())
    }

    fn soliton(&mut self) -> Result<()> {
        let seeds: Vec<_> = self.cfg.discrete.iter().map(|s| s.pair()).collect();
        let discrete = complete_symmetry(&seeds)?;
        let grids = build_grids(&self.cfg.grids)?;
        let ys = grids.y.samples();
        let xg = self.output_grid()?;
        let xs = xg.samples();
        for (i, &t) in self.cfg.times.iter().enumerate() {
            let on_y = self.opts.exec.try_map(ys.len(), |j| soliton_point(&discrete, ys[j], t))?;
            let on_x = soliton_on_x(&discrete, &xs, t)?;
            let cond = on_y.iter().chain(&on_x).map(|p| p.condition).fold(0.0, f64::max);
            if cond > SOLITON_CONDITION_WARNING {
                self.warnings.push(format!("t = {t}: soliton system condition {cond:.3e}"));
            }
            let meta = json!({
                "t": t,
                "discrete": discrete,
                "y_grid": { "lo": grids.y.lo, "hi": grids.y.hi, "n": grids.y.n },
                "x_grid": { "lo": xg.lo, "hi": xg.hi, "n": xg.n },
                "max_condition": cond,
            });
            let col = |pts: &[crate::soliton::SolitonPoint], f: fn(&crate::soliton::SolitonPoint) -> f64| -> Vec<f64> {
                pts.iter().map(f).collect()
            };
            let hy = io::Header::new("soliton_y", &self.hash, &["y", "q", "m", "x"], meta.clone());
            let cy = vec![ys.clone(), col(&on_y, |p| p.field.q), col(&on_y, |p| p.field.m), col(&on_y, |p| p.field.x)];
            self.artifacts.push(io::write_table(self.dir, &format!("soliton_t{i}_y"), &hy, &cy)?);
            let hx = io::Header::new("soliton_x", &self.hash, &["x", "m", "u", "ux"], meta);
            let cx = vec![xs.clone(), col(&on_x, |p| p.field.m), col(&on_x, |p| p.u), col(&on_x, |p| p.ux)];
            self.artifacts.push(io::write_table(self.dir, &format!("soliton_t{i}_x"), &hx, &cx)?);
        }
        Ok(())
    }

    fn validate(&mut self) -> Result<()> {
        let profile = match &self.cfg.source {
            DataSource::Profile(p) => p.clone(),
            DataSource::Csv(_) => {
                return Err(IstError::Config(
                    "validate needs an analytic profile (the oracles sample it directly)".into(),
                ))
            }
        };
        let mut suite = SuiteConfig {
            profile,
            grids: self.cfg.grids.clone(),
            convention: self.opts.convention,
            compare_half_width: self.cfg.compare_half_width,
            n_compare: self.cfg.n_x_out,
            roundtrip_tol: self.cfg.tolerances.roundtrip,
            ..SuiteConfig::default()
        };
        let times: Vec<f64> = self.cfg.times.iter().copied().filter(|t| *t > 0.0).collect();
        if !times.is_empty() {
            suite.dynamics_times = times;
        }
        let reports = run_invariant_suite(&suite, self.opts.exec);
        let path = io::write_json(
            self.dir,
            "validation",
            &self.hash,
            json!({ "convention": self.opts.convention, "reports": reports }),
        )?;
        self.artifacts.push(path);
        self.checks.extend(reports);
        Ok(())
    }
}

/// Executes `cfg`, writing artifacts to `cfg.output_dir`.
///
/// Pipeline errors are returned as `Err`; failing checks are reported in the
/// outcome (see [`RunOutcome::success`]).
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut c = Context {
        cfg,
        opts: *opts,
        hash: cfg.hash(),
        dir: &cfg.output_dir,
        artifacts: Vec::new(),
        checks: Vec::new(),
        warnings: Vec::new(),
    };
    std::fs::create_dir_all(c.dir)?;
    match cfg.command {
        Command::Forward => c.forward().map(|_| ()),
        Command::Evolve => c.evolve(),
        Command::Inverse => c.inverse(),
        Command::Roundtrip => c.roundtrip(),
        Command::Soliton => c.soliton(),
        Command::Validate => c.validate(),
    }?;
    let mut outcome = RunOutcome {
        command: cfg.command,
        config_hash: c.hash,
        artifacts: c.artifacts,
        checks: c.checks,
        warnings: c.warnings,
        strict: opts.strict,
    };
    let summary = json!({
        "config": cfg,
        "success": outcome.success(),
        "checks": outcome.checks,
        "warnings": outcome.warnings,
        "strict": opts.strict,
        "convention": opts.convention,
    });
    let path = io::write_json(&cfg.output_dir, "run", &outcome.config_hash, summary)?;
    outcome.artifacts.push(path);
    Ok(outcome)
}
