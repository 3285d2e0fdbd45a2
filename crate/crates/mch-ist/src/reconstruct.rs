//! Recovery of the physical field from Riemann–Hilbert data.
//!
//! At each `y` the solution of the Riemann–Hilbert problem gives
//!
//! * `q = 1/M₁₁(0)` and `m = M₁₂(0)/(i M₁₁(0))`;
//! * `x = y − ln ρ_i` on the left and `x = y − ln ρ_i − 2 ln a(i)` on the right,
//!   with `ρ_i = (M₁₂(i) + M₂₂(i))/(M₁₁(i) + M₂₁(i))`;
//! * `u` and `u_x` from `N = M(i)⁻¹ M'(i)`:
//!   `u = −(N₁₂/ρ_i + N₂₁ ρ_i)`, `u_x = −N₁₂/ρ_i + N₂₁ ρ_i`.
//!
//! The field is then moved from the `y` frame to a uniform `x` grid by
//! inverting the monotone map `y ↦ x(y)`, and `u` is recomputed there by
//! Helmholtz inversion.

use crate::cauchy::CauchyContext;
use crate::error::{IstError, Result};
use crate::exec::Exec;
use crate::grid::SpatialGrid;
use crate::mat2::I;
use crate::rhp::{solve_many, Expansions, SolverOptions};
use crate::scattering::ScatteringData;
use crate::spectral;
use crate::time_flow::{PhaseSpec, TimeConvention};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Reconstructed quantities at one `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub y: f64,
    pub q: f64,
    pub m: f64,
    pub x: f64,
    pub eta: C64,
    pub zeta: C64,
    /// `|q² − 1 − m²|`.
    pub consistency: f64,
    /// Largest imaginary part discarded from `q`, `m`, `x`.
    pub imag_residue: f64,
}

/// `(q, m, x)` and the large-`z` coefficients from the expansions at one `y`.
pub fn field_from_m(ex: &Expansions) -> Result<FieldPoint> {
    let beta0 = ex.m0.get(0, 0);
    if !(beta0.re > 0.0) {
        return Err(IstError::Regime(format!("M11(0) = {beta0} is not positive at y = {}", ex.y)));
    }
    let q = 1.0 / beta0;
    let m = ex.m0.get(0, 1) / (I * beta0);
    let ratio = log_ratio_argument(ex)?;
    let x = C64::new(ex.y, 0.0) - ratio.ln() - 2.0 * ex.log_a_i;
    let imag_residue = q.im.abs().max(m.im.abs()).max(x.im.abs());
    Ok(FieldPoint {
        y: ex.y,
        q: q.re,
        m: m.re,
        x: x.re,
        eta: ex.eta,
        zeta: ex.zeta,
        consistency: (q.re * q.re - 1.0 - m.re * m.re).abs(),
        imag_residue,
    })
}

fn log_ratio_argument(ex: &Expansions) -> Result<C64> {
    let mi = &ex.mi;
    let den = mi.get(0, 0) + mi.get(1, 0);
    if den.norm() == 0.0 {
        return Err(IstError::Regime(format!("M11(i) + M21(i) vanishes at y = {}", ex.y)));
    }
    let ratio = (mi.get(0, 1) + mi.get(1, 1)) / den;
    if !(ratio.re > 0.0) {
        return Err(IstError::Regime(format!("log argument {ratio} is not positive at y = {}", ex.y)));
    }
    Ok(ratio)
}

/// `(u, u_x)` at one `y` from `M(i)` and `M'(i)`.
pub fn velocity_from_mi(ex: &Expansions) -> Result<(f64, f64)> {
    let ratio = log_ratio_argument(ex)?;
    if ex.mi.det().norm() < 1e-14 {
        return Err(IstError::Regime(format!("M(i) is singular at y = {}", ex.y)));
    }
    let n = ex.mi.inv() * ex.mi1;
    let u = -(n.get(0, 1) / ratio + n.get(1, 0) * ratio);
    let ux = -n.get(0, 1) / ratio + n.get(1, 0) * ratio;
    Ok((u.re, ux.re))
}

/// Fritsch–Carlson monotone cubic interpolant through `(xs, ys)` with
/// strictly increasing `xs`.
#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() || n < 2 {
            return Err(IstError::GridMismatch(format!("{} abscissae for {} values", n, ys.len())));
        }
        if let Some(i) = xs.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(IstError::Monotonicity { what: "interpolation abscissae", index: i });
        }
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            d[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { 0.5 * (delta[i - 1] + delta[i]) };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let (a, b) = (d[i] / delta[i], d[i + 1] / delta[i]);
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                d[i] = t * a * delta[i];
                d[i + 1] = t * b * delta[i];
            }
        }
        Ok(MonotoneCubic { xs: xs.to_vec(), ys: ys.to_vec(), d })
    }

    /// Value at `x` (clamped to the end intervals).
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        self.ys[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + self.d[i] * h * (t3 - 2.0 * t2 + t)
            + self.ys[i + 1] * (-2.0 * t3 + 3.0 * t2)
            + self.d[i + 1] * h * (t3 - t2)
    }
}

/// Degree-7 Lagrange interpolation of samples on a uniform grid at `s`,
/// with its derivative.
fn lagrange8(grid: &SpatialGrid, vals: &[f64], s: f64) -> (f64, f64) {
    let h = grid.spacing();
    let n = grid.n;
    let pos = (s - grid.lo) / h;
    let start = (pos.floor() as i64 - 3).clamp(0, n as i64 - 8) as usize;
    let nodes: Vec<f64> = (start..start + 8).map(|j| grid.lo + j as f64 * h).collect();
    let mut v = 0.0;
    let mut dv = 0.0;
    for a in 0..8 {
        let mut w = 1.0;
        let mut den = 1.0;
        let mut dw = 0.0;
        for b in 0..8 {
            if b == a {
                continue;
            }
            den *= nodes[a] - nodes[b];
            // Product rule for the derivative of Π_{b≠a}(s − x_b).
            dw = dw * (s - nodes[b]) + w;
            w *= s - nodes[b];
        }
        v += vals[start + a] * w / den;
        dv += vals[start + a] * dw / den;
    }
    (v, dv)
}

/// Degree-7 Lagrange interpolation of samples on a uniform grid at `s`
/// (stencil clamped to the grid).
pub fn uniform_interp(grid: &SpatialGrid, vals: &[f64], s: f64) -> f64 {
    lagrange8(grid, vals, s).0
}

/// Fields on a uniform `x` grid obtained by inverting `x(y)`.
#[derive(Clone, Debug)]
pub struct Resampled {
    /// `y` at each target `x`.
    pub y_at: Vec<f64>,
    /// Each input field evaluated at `y_at`.
    pub values: Vec<Vec<f64>>,
    /// Range of `∂_y x` over the `y` nodes (centred differences).
    pub jacobian_min: f64,
    pub jacobian_max: f64,
    /// `max |x(y(x)) − x|` after the Newton polish.
    pub inverse_defect: f64,
}

/// Inverts the sampled map `y ↦ x(y)` at `x_targets` and evaluates `fields`
/// (sampled on `y_grid`) there.
///
/// A monotone cubic in the inverse direction gives the starting point; it is
/// polished by Newton's method on a degree-7 Lagrange interpolant of `x(y)`,
/// and the fields are evaluated with the same interpolation.
pub fn coordinate_resample(
    y_grid: &SpatialGrid,
    x_of_y: &[f64],
    fields: &[&[f64]],
    x_targets: &[f64],
) -> Result<Resampled> {
    if x_of_y.len() != y_grid.n || fields.iter().any(|f| f.len() != y_grid.n) {
        return Err(IstError::GridMismatch("fields must be sampled on the y grid".into()));
    }
    if let Some(i) = x_of_y.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(IstError::Monotonicity { what: "x(y)", index: i });
    }
    let (xmin, xmax) = (x_of_y[0], x_of_y[y_grid.n - 1]);
    if let Some(x) = x_targets.iter().find(|&&x| x < xmin || x > xmax) {
        return Err(IstError::GridMismatch(format!("target x = {x} outside the reconstructed range [{xmin}, {xmax}]")));
    }
    let ys = y_grid.samples();
    let inverse = MonotoneCubic::new(x_of_y, &ys)?;
    let h = y_grid.spacing();
    let jac: Vec<f64> = (1..y_grid.n - 1).map(|j| (x_of_y[j + 1] - x_of_y[j - 1]) / (2.0 * h)).collect();
    let mut y_at = Vec::with_capacity(x_targets.len());
    let mut defect: f64 = 0.0;
    for &xt in x_targets {
        let mut y = inverse.eval(xt);
        for _ in 0..20 {
            let (xv, dx) = lagrange8(y_grid, x_of_y, y);
            if !(dx > 0.0) {
                break;
            }
            let step = (xt - xv) / dx;
            y = (y + step).clamp(y_grid.lo, y_grid.hi);
            if step.abs() < 1e-15 * (1.0 + y.abs()) {
                break;
            }
        }
        defect = defect.max((lagrange8(y_grid, x_of_y, y).0 - xt).abs());
        y_at.push(y);
    }
    let values = fields.iter().map(|f| y_at.iter().map(|&y| lagrange8(y_grid, f, y).0).collect()).collect();
    Ok(Resampled {
        y_at,
        values,
        jacobian_min: jac.iter().copied().fold(f64::INFINITY, f64::min),
        jacobian_max: jac.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        inverse_defect: defect,
    })
}

/// `u` and `u_x` from `m` on a uniform `x` grid, with the boundary mass
/// `|m(lo)| + |m(hi)|` that bounds the effect of truncation.
#[derive(Clone, Debug)]
pub struct Velocity {
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub boundary_mass: f64,
}

/// Threshold above which [`helmholtz_u`] inputs count as not decayed.
pub const BOUNDARY_MASS_WARNING: f64 = 1e-8;

/// Solves `u − u_xx = m` on the line (see [`spectral::helmholtz`]).
pub fn helmholtz_u(m: &[f64], grid: &SpatialGrid) -> Velocity {
    let (u, ux) = spectral::helmholtz(m, grid.spacing());
    let boundary_mass = m[0].abs() + m[m.len() - 1].abs();
    Velocity { u, ux, boundary_mass }
}

/// Reconstructed field at one time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub y_grid: SpatialGrid,
    pub q_y: Vec<f64>,
    pub m_y: Vec<f64>,
    pub x_of_y: Vec<f64>,
    pub eta_y: Vec<C64>,
    pub zeta_y: Vec<C64>,
    /// `u`, `u_x` from `M(i)` in the `y` frame.
    pub u_tilde: Vec<f64>,
    pub ux_tilde: Vec<f64>,
    pub x_grid: SpatialGrid,
    pub m_x: Vec<f64>,
    pub u_x_frame: Vec<f64>,
    pub ux_x_frame: Vec<f64>,
    pub diagnostics: FieldDiagnostics,
}

/// Diagnostics recorded with a [`FieldState`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    pub max_consistency: f64,
    pub max_imag_residue: f64,
    pub jacobian_min: f64,
    pub jacobian_max: f64,
    pub inverse_defect: f64,
    pub boundary_mass: f64,
    pub max_residual: f64,
    pub max_iterations: usize,
    pub max_tail: f64,
    pub mu_bound_ok: bool,
    pub m_bound_ok: bool,
}

/// Solves the Riemann–Hilbert problem on `y_grid` at time `t` and assembles
/// the field on `x_grid`.
#[allow(clippy::too_many_arguments)]
pub fn reconstruct_field(
    ctx: &CauchyContext,
    sd: &ScatteringData,
    t: f64,
    convention: TimeConvention,
    y_grid: &SpatialGrid,
    x_grid: &SpatialGrid,
    opts: &SolverOptions,
    exec: Exec,
) -> Result<FieldState> {
    let ys = y_grid.samples();
    let phases: Vec<PhaseSpec> =
        ys.iter().map(|&y| PhaseSpec::new(y, t).map(|p| p.with_convention(convention))).collect::<Result<_>>()?;
    let sols = solve_many(ctx, sd, &phases, opts, exec)?;
    let mut diag = FieldDiagnostics { mu_bound_ok: true, m_bound_ok: true, ..Default::default() };
    let mut points = Vec::with_capacity(ys.len());
    let mut vel = Vec::with_capacity(ys.len());
    for (sol, ex) in &sols {
        let p = field_from_m(ex)?;
        diag.max_consistency = diag.max_consistency.max(p.consistency);
        diag.max_imag_residue = diag.max_imag_residue.max(p.imag_residue);
        diag.max_residual = diag.max_residual.max(sol.residual);
        diag.max_iterations = diag.max_iterations.max(sol.iterations);
        diag.max_tail = diag.max_tail.max(ex.tail);
        diag.mu_bound_ok &= sol.bounds.mu_bound_holds();
        diag.m_bound_ok &= sol.bounds.m_bound_holds();
        points.push(p);
        vel.push(velocity_from_mi(ex)?);
    }
    let q_y: Vec<f64> = points.iter().map(|p| p.q).collect();
    let m_y: Vec<f64> = points.iter().map(|p| p.m).collect();
    let x_of_y: Vec<f64> = points.iter().map(|p| p.x).collect();
    let res = coordinate_resample(y_grid, &x_of_y, &[&m_y], &x_grid.samples())?;
    diag.jacobian_min = res.jacobian_min;
    diag.jacobian_max = res.jacobian_max;
    diag.inverse_defect = res.inverse_defect;
    let m_x = res.values.into_iter().next().unwrap_or_default();
    let v = helmholtz_u(&m_x, x_grid);
    diag.boundary_mass = v.boundary_mass;
    Ok(FieldState {
        t,
        y_grid: y_grid.clone(),
        q_y,
        m_y,
        x_of_y,
        eta_y: points.iter().map(|p| p.eta).collect(),
        zeta_y: points.iter().map(|p| p.zeta).collect(),
        u_tilde: vel.iter().map(|v| v.0).collect(),
        ux_tilde: vel.iter().map(|v| v.1).collect(),
        x_grid: x_grid.clone(),
        m_x,
        u_x_frame: v.u,
        ux_x_frame: v.ux,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_expansions_give_zero_field() {
        let ex = Expansions::identity(1.3, 0.0);
        let p = field_from_m(&ex).unwrap();
        assert_eq!((p.q, p.m, p.x), (1.0, 0.0, 1.3));
        assert_eq!(velocity_from_mi(&ex).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn monotone_cubic_preserves_monotonicity_and_data() {
        let xs = [0.0, 1.0, 2.0, 2.5, 4.0];
        let ys = [0.0, 0.1, 3.0, 3.0, 3.2];
        let c = MonotoneCubic::new(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((c.eval(*x) - y).abs() < 1e-14);
        }
        let mut prev = c.eval(0.0);
        for i in 1..=400 {
            let v = c.eval(4.0 * i as f64 / 400.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
        assert!(MonotoneCubic::new(&[0.0, 0.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn identity_map_resamples_to_itself() {
        let g = SpatialGrid::new(-5.0, 5.0, 101).unwrap();
        let y = g.samples();
        let f: Vec<f64> = y.iter().map(|v| (-v * v).exp()).collect();
        let targets: Vec<f64> = (0..37).map(|i| -4.5 + 0.25 * i as f64).collect();
        let r = coordinate_resample(&g, &y, &[&f], &targets).unwrap();
        for (i, &t) in targets.iter().enumerate() {
            assert!((r.y_at[i] - t).abs() < 1e-12);
            assert!((r.values[0][i] - (-t * t).exp()).abs() < 1e-6);
        }
        assert!((r.jacobian_min - 1.0).abs() < 1e-12 && (r.jacobian_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composed_map_is_identity() {
        let g = SpatialGrid::new(-6.0, 6.0, 241).unwrap();
        let ys = g.samples();
        let xy: Vec<f64> = ys.iter().map(|y| y - 0.05 * (0.7 * y).tanh()).collect();
        let targets: Vec<f64> = ys.iter().take(200).skip(40).map(|y| y - 0.05 * (0.7 * y).tanh()).collect();
        let r = coordinate_resample(&g, &xy, &[], &targets).unwrap();
        for (k, y) in r.y_at.iter().enumerate() {
            assert!((y - ys[40 + k]).abs() < 1e-9);
        }
        assert!(r.jacobian_min > 0.0 && r.jacobian_max < 2.0);
        assert!(coordinate_resample(&g, &xy, &[], &[100.0]).is_err());
    }

    #[test]
    fn helmholtz_of_zero_is_zero() {
        let g = SpatialGrid::new(-10.0, 10.0, 64).unwrap();
        let v = helmholtz_u(&vec![0.0; 64], &g);
        assert!(v.u.iter().chain(&v.ux).all(|x| *x == 0.0));
        assert_eq!(v.boundary_mass, 0.0);
    }
}
