//! Pseudo-spectral method-of-lines oracle for
//! `m_t + (m(u² − u_x²))_x + κ u_x = 0`, `u − u_xx = m`.
//!
//! Spatial operators are Fourier multipliers on the zero-padded grid (valid
//! for data that have decayed at the grid ends, which is checked), time
//! stepping is classical RK4.

use crate::error::{IstError, Result};
use crate::grid::SpatialGrid;
use crate::spectral;
use serde::{Deserialize, Serialize};

/// Wave-speed parameter of the equation solved by the pipeline.
pub const KAPPA: f64 = 2.0;

/// Stepper controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperOptions {
    pub kappa: f64,
    /// Courant number for the advective speed `|u² − u_x²|`.
    pub cfl: f64,
    /// Largest allowed step regardless of the advective bound (the linear
    /// term has bounded symbol `κξ/(1+ξ²)`).
    pub dt_cap: f64,
    /// Growth of `sup |m|` beyond this factor counts as blow-up.
    pub blowup_factor: f64,
    /// Largest allowed `|m|` at the grid ends.
    pub decay_tol: f64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions { kappa: KAPPA, cfl: 0.5, dt_cap: 0.05, blowup_factor: 10.0, decay_tol: 1e-8 }
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Spatial part `−(m(u² − u_x²))_x − κ u_x` and the advective speed bound.
pub fn mch_rhs(m: &[f64], grid: &SpatialGrid, kappa: f64) -> (Vec<f64>, f64) {
    let h = grid.spacing();
    let (u, ux) = spectral::helmholtz(m, h);
    let flux: Vec<f64> = (0..m.len()).map(|i| m[i] * (u[i] * u[i] - ux[i] * ux[i])).collect();
    let fx = spectral::derivative(&flux, h);
    let speed = (0..m.len()).map(|i| (u[i] * u[i] - ux[i] * ux[i]).abs()).fold(0.0, f64::max);
    ((0..m.len()).map(|i| -fx[i] - kappa * ux[i]).collect(), speed)
}

/// Largest stable step for `m`.
pub fn stable_dt(m: &[f64], grid: &SpatialGrid, opts: &StepperOptions) -> f64 {
    let (_, speed) = mch_rhs(m, grid, opts.kappa);
    let adv = if speed > 0.0 { opts.cfl * grid.spacing() / speed } else { f64::INFINITY };
    adv.min(opts.dt_cap)
}

fn check_decay(m: &[f64], opts: &StepperOptions) -> Result<()> {
    for (end, v) in [("left", m[0]), ("right", m[m.len() - 1])] {
        if v.abs() > opts.decay_tol {
            return Err(IstError::Decay { end, value: v.abs(), threshold: opts.decay_tol });
        }
    }
    Ok(())
}

/// One RK4 step of size `dt`.
pub fn fd_mch_step(m: &[f64], grid: &SpatialGrid, dt: f64, opts: &StepperOptions) -> Result<Vec<f64>> {
    if m.len() != grid.n {
        return Err(IstError::GridMismatch(format!("{} samples on a {}-node grid", m.len(), grid.n)));
    }
    let bound = stable_dt(m, grid, opts);
    if dt > bound {
        return Err(IstError::Cfl { dt, bound });
    }
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    let k1 = mch_rhs(m, grid, opts.kappa).0;
    let k2 = mch_rhs(&axpy(m, 0.5 * dt, &k1), grid, opts.kappa).0;
    let k3 = mch_rhs(&axpy(m, 0.5 * dt, &k2), grid, opts.kappa).0;
    let k4 = mch_rhs(&axpy(m, dt, &k3), grid, opts.kappa).0;
    Ok((0..m.len()).map(|i| m[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// `∫(√(1+m²) − 1) dx` by the trapezoid rule.
pub fn conserved_q(m: &[f64], grid: &SpatialGrid) -> f64 {
    let f: Vec<f64> = m.iter().map(|v| v * v / ((1.0 + v * v).sqrt() + 1.0)).collect();
    grid.spacing() * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[f.len() - 1]))
}

/// Snapshots of a stepper run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub steps: usize,
    /// `∫(√(1+m²) − 1) dx` at each snapshot.
    pub conserved: Vec<f64>,
}

/// Evolves `m0` and records it at each time in `times` (ascending, ≥ 0),
/// with steps of at most `dt_max`.
pub fn fd_mch_evolve(
    m0: &[f64],
    grid: &SpatialGrid,
    times: &[f64],
    dt_max: f64,
    opts: &StepperOptions,
) -> Result<Evolution> {
    if m0.len() != grid.n {
        return Err(IstError::GridMismatch(format!("{} samples on a {}-node grid", m0.len(), grid.n)));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(IstError::Config("snapshot times must be ascending and nonnegative".into()));
    }
    check_decay(m0, opts)?;
    let initial = sup(m0);
    let mut m = m0.to_vec();
    let mut t = 0.0;
    let mut steps = 0;
    let mut out = Evolution { times: Vec::new(), snapshots: Vec::new(), steps: 0, conserved: Vec::new() };
    for &target in times {
        while target - t > 1e-14 {
            let bound = stable_dt(&m, grid, opts);
            let n = ((target - t) / dt_max.min(bound)).ceil().max(1.0);
            let dt = (target - t) / n;
            m = fd_mch_step(&m, grid, dt, opts)?;
            t += dt;
            steps += 1;
            let current = sup(&m);
            if !current.is_finite() || current > opts.blowup_factor * initial.max(f64::MIN_POSITIVE) {
                return Err(IstError::BlowUp { initial, current });
            }
        }
        check_decay(&m, opts)?;
        out.times.push(target);
        out.conserved.push(conserved_q(&m, grid));
        out.snapshots.push(m.clone());
    }
    out.steps = steps;
    Ok(out)
}

/// Residual of the equation from three snapshots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `‖r‖₂` (grid-weighted).
    pub abs: f64,
    /// `‖r‖₂ / ‖m_t‖₂`; zero when both vanish.
    pub rel: f64,
    /// `sup |r|`.
    pub sup: f64,
}

/// Residual `r = m_t + (m(u² − u_x²))_x + κ u_x` with the centred
/// difference `m_t ≈ (m(t+h) − m(t−h))/(2h)`.
pub fn fd_mch_residual(
    prev: &[f64],
    cur: &[f64],
    next: &[f64],
    grid: &SpatialGrid,
    h: f64,
    kappa: f64,
) -> Result<ResidualReport> {
    if prev.len() != grid.n || cur.len() != grid.n || next.len() != grid.n {
        return Err(IstError::GridMismatch("residual snapshots must share the grid".into()));
    }
    if !(h > 0.0) {
        return Err(IstError::Config(format!("time step h = {h} must be positive")));
    }
    let (rhs, _) = mch_rhs(cur, grid, kappa);
    let mt: Vec<f64> = prev.iter().zip(next).map(|(a, b)| (b - a) / (2.0 * h)).collect();
    let r: Vec<f64> = mt.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let w = grid.spacing().sqrt();
    let (nr, nt) = (w * l2(&r), w * l2(&mt));
    let rel = if nr == 0.0 { 0.0 } else { nr / nt };
    Ok(ResidualReport { abs: nr, rel, sup: sup(&r) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stays_zero() {
        let g = SpatialGrid::new(-10.0, 10.0, 128).unwrap();
        let z = vec![0.0; 128];
        let e = fd_mch_evolve(&z, &g, &[0.5], 0.01, &StepperOptions::default()).unwrap();
        assert!(e.snapshots[0].iter().all(|v| *v == 0.0));
        let r = fd_mch_residual(&z, &z, &z, &g, 1e-3, KAPPA).unwrap();
        assert_eq!((r.abs, r.rel), (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_steps_and_grids() {
        let g = SpatialGrid::new(-10.0, 10.0, 128).unwrap();
        let m: Vec<f64> = g.samples().iter().map(|x| 0.1 * (-x * x).exp()).collect();
        assert!(matches!(fd_mch_step(&m, &g, 1.0, &StepperOptions::default()), Err(IstError::Cfl { .. })));
        assert!(fd_mch_residual(&m, &m[1..], &m, &g, 1e-3, KAPPA).is_err());
    }
}
