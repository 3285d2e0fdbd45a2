//! Beals–Coifman solution of the Riemann–Hilbert problems.
//!
//! Two normalisations are used. The **left** problem (for `y ≥ 0`) has jump
//! `V = (I + w₋)(I + w₊)` with
//!
//! ```text
//! w₊ = [[0, 0], [r e^{−2iΘ}, 0]],   w₋ = [[0, r̄ e^{2iΘ}], [0, 0]],
//! ```
//!
//! and may carry simple poles at discrete-spectrum points `p_j` (residue
//! coefficient `C_j = c_j e^{−2iΘ(p_j)}` in the first column at `p_j`, and
//! `−C̄_j` in the second column at `p̄_j`). The **right** problem (for
//! `y ≤ 0`) uses `r̃ = b/ā` and the opposite triangular factorisation,
//!
//! ```text
//! w₊ = [[0, conj(r̃) e^{2iΘ}], [0, 0]],   w₋ = [[0, 0], [r̃ e^{−2iΘ}, 0]].
//! ```
//!
//! In both cases the density `μ = M₊(I + w₊)⁻¹` solves
//! `μ = I + C₊(μ w₋) + C₋(μ w₊) (+ pole terms)`, which decouples into two
//! independent row systems. With `l` the (2,1) and `u` the (1,2) jump entry,
//! row `i` reads
//!
//! ```text
//! μ_{i1} = δ_{i1} + C_{s₁}(μ_{i2} l) + Σ_j C_j U_{j,i}/(s − p_j)
//! μ_{i2} = δ_{i2} + C_{s₂}(μ_{i1} u) − Σ_j C̄_j V_{j,i}/(s − p̄_j)
//! ```
//!
//! with `(s₁, s₂) = (−, +)` on the left and `(+, −)` on the right, closed by
//! `U_j = M₂(p_j)` and `V_j = M₁(p̄_j)`. `M` is then recovered anywhere off the
//! line by the Cauchy integral of the same densities.

use crate::cauchy::{Boundary, CauchyContext};
use crate::error::{IstError, Result};
use crate::exec::Exec;
use crate::grid::SpectralGrid;
use crate::mat2::{Mat2, I};
use crate::scattering::ScatteringData;
use crate::time_flow::PhaseSpec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Normalisation of the Riemann–Hilbert problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhpSide {
    /// Normalised by `μ₋`-type data; used for `y ≥ 0`.
    Left,
    /// Normalised by `μ₊`-type data; used for `y ≤ 0`.
    Right,
}

impl RhpSide {
    /// The side appropriate for `y`.
    pub fn for_y(y: f64) -> Self {
        if y >= 0.0 {
            RhpSide::Left
        } else {
            RhpSide::Right
        }
    }

    /// Boundary values used in the first- and second-column equations.
    fn projections(self) -> (Boundary, Boundary) {
        match self {
            RhpSide::Left => (Boundary::Minus, Boundary::Plus),
            RhpSide::Right => (Boundary::Plus, Boundary::Minus),
        }
    }
}

/// A simple pole of `M` at `p` (upper half-plane) with time-dependent
/// residue coefficient `coeff = c e^{−2iΘ(p)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub p: C64,
    pub coeff: C64,
}

/// Jump data at one `(y, t)`.
#[derive(Clone, Debug)]
pub struct JumpState {
    pub side: RhpSide,
    pub phase: PhaseSpec,
    /// (1,2) entry of the jump factors on the `z` line.
    pub upper: Vec<C64>,
    /// (2,1) entry of the jump factors on the `z` line.
    pub lower: Vec<C64>,
    pub poles: Vec<Pole>,
    /// `ln a(i)` from the trace formula (zero on the left, where it is not
    /// needed).
    pub log_a_i: C64,
    /// `‖r‖₂` in the `z`-line grid norm.
    pub r_l2: f64,
    /// `max |r|` on the grid.
    pub r_sup: f64,
}

impl JumpState {
    /// `w₊` at node `i`.
    pub fn w_plus(&self, i: usize) -> Mat2 {
        match self.side {
            RhpSide::Left => Mat2::new(ZERO, ZERO, self.lower[i], ZERO),
            RhpSide::Right => Mat2::new(ZERO, self.upper[i], ZERO, ZERO),
        }
    }

    /// `w₋` at node `i`.
    pub fn w_minus(&self, i: usize) -> Mat2 {
        match self.side {
            RhpSide::Left => Mat2::new(ZERO, self.upper[i], ZERO, ZERO),
            RhpSide::Right => Mat2::new(ZERO, ZERO, self.lower[i], ZERO),
        }
    }

    /// Jump matrix `V = (I − w₋)⁻¹(I + w₊)` at node `i`.
    pub fn jump(&self, i: usize) -> Mat2 {
        (Mat2::identity() + self.w_minus(i)) * (Mat2::identity() + self.w_plus(i))
    }

    /// Whether there is nothing to solve.
    pub fn is_trivial(&self) -> bool {
        self.poles.is_empty() && self.upper.iter().chain(&self.lower).all(|v| *v == ZERO)
    }
}

/// Grid `L²` norm on the `z` line: `(Σ W_n |f_n|²)^{1/2}`.
pub fn z_norm(grid: &SpectralGrid, f: impl Iterator<Item = f64>) -> f64 {
    grid.weights.iter().zip(f).map(|(w, v)| w * v).sum::<f64>().sqrt()
}

/// Builds the jump data for `side` at `phase`.
///
/// The left problem requires `y ≥ 0` and the right one `y ≤ 0`; discrete
/// spectrum is supported on the left only.
pub fn build_jump(sd: &ScatteringData, grid: &SpectralGrid, phase: PhaseSpec, side: RhpSide) -> Result<JumpState> {
    if sd.r_vals.len() != grid.len_z() {
        return Err(IstError::GridMismatch(format!(
            "{} reflection samples for {} nodes",
            sd.r_vals.len(),
            grid.len_z()
        )));
    }
    match side {
        RhpSide::Left if phase.y < 0.0 => {
            return Err(IstError::Domain {
                op: "build_jump",
                detail: format!("left problem needs y >= 0, got {}", phase.y),
            })
        }
        RhpSide::Right if phase.y > 0.0 => {
            return Err(IstError::Domain {
                op: "build_jump",
                detail: format!("right problem needs y <= 0, got {}", phase.y),
            })
        }
        RhpSide::Right if !sd.discrete.is_empty() => {
            return Err(IstError::Spectrum(
                "the right-normalised problem is implemented without discrete spectrum".into(),
            ))
        }
        _ => {}
    }
    let refl = match side {
        RhpSide::Left => &sd.r_vals,
        RhpSide::Right => &sd.rtilde_vals,
    };
    let mut upper = Vec::with_capacity(grid.len_z());
    let mut lower = Vec::with_capacity(grid.len_z());
    for (i, &z) in grid.z.iter().enumerate() {
        let r = refl[i];
        if r == ZERO {
            upper.push(ZERO);
            lower.push(ZERO);
            continue;
        }
        let e = (-2.0 * I * phase.theta(C64::new(z, 0.0))?).exp();
        lower.push(r * e);
        upper.push(r.conj() / e);
    }
    let mut poles = Vec::with_capacity(sd.discrete.len());
    for d in &sd.discrete {
        if !(d.z.im > 0.0) {
            return Err(IstError::Spectrum(format!("discrete point {} is not in the upper half-plane", d.z)));
        }
        poles.push(Pole { p: d.z, coeff: d.c * (-2.0 * I * phase.theta(d.z)?).exp() });
    }
    let log_a_i = match side {
        RhpSide::Left => ZERO,
        RhpSide::Right => sd.log_a_at_i(grid),
    };
    let r_l2 = z_norm(grid, refl.iter().map(|v| v.norm_sqr()));
    let r_sup = refl.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(JumpState { side, phase, upper, lower, poles, log_a_i, r_l2, r_sup })
}

/// Discretisation of the boundary projections used by the solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CauchyRoute {
    /// `k`-line FFT split route.
    #[default]
    Fast,
    /// Dense alternate-point principal value on the `z` line.
    Dense,
}

fn project(ctx: &CauchyContext, route: CauchyRoute, f: &[C64], side: Boundary) -> Vec<C64> {
    match route {
        CauchyRoute::Fast => ctx.project_z(f, side),
        CauchyRoute::Dense => ctx.project_pv_z(f, side),
    }
}

/// Continuous part of the Beals–Coifman operator,
/// `K f = C₊(f w₋) + C₋(f w₊)`, on matrix samples. Pole contributions enter
/// through the closure conditions in [`solve_mu`] instead.
pub fn apply_k(ctx: &CauchyContext, route: CauchyRoute, f: &[Mat2], jump: &JumpState) -> Vec<Mat2> {
    let (s1, s2) = jump.side.projections();
    let len = f.len();
    let mut out = vec![Mat2::zero(); len];
    for row in 0..2 {
        let g1: Vec<C64> = (0..len).map(|n| f[n].get(row, 1) * jump.lower[n]).collect();
        let g2: Vec<C64> = (0..len).map(|n| f[n].get(row, 0) * jump.upper[n]).collect();
        let c1 = project(ctx, route, &g1, s1);
        let c2 = project(ctx, route, &g2, s2);
        for n in 0..len {
            out[n].0[row][0] = c1[n];
            out[n].0[row][1] = c2[n];
        }
    }
    out
}

/// Solver settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stopping tolerance on the sup-norm update.
    pub tol: f64,
    /// Neumann iteration cap.
    pub max_iter: usize,
    /// Fall back to a dense LU solve when the iteration fails.
    pub dense_fallback: bool,
    /// Largest dense system (unknowns per row) that will be assembled.
    pub dense_limit: usize,
    pub route: CauchyRoute,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-12, max_iter: 200, dense_fallback: true, dense_limit: 2200, route: CauchyRoute::Fast }
    }
}

/// How a [`BCSolution`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    Trivial,
    Neumann,
    Dense,
}

/// Grid-norm quantities behind the small-data bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `‖μ − I‖₂`.
    pub mu_minus_i: f64,
    /// `max(‖M₊ − I‖₂, ‖M₋ − I‖₂)` for the boundary values `M₊ = μ(I + w₊)`,
    /// `M₋ = μ(I − w₋)`.
    pub m_minus_i: f64,
    pub r_l2: f64,
    pub r_sup: f64,
}

impl BoundReport {
    /// `‖μ − I‖₂ ≤ 2‖r‖₂`.
    pub fn mu_bound_holds(&self) -> bool {
        self.mu_minus_i <= 2.0 * self.r_l2 + 1e-14
    }

    /// `‖M − I‖₂ ≤ (2‖r‖∞ + 1)‖r‖₂`.
    pub fn m_bound_holds(&self) -> bool {
        self.m_minus_i <= (2.0 * self.r_sup + 1.0) * self.r_l2 + 1e-14
    }
}

/// Beals–Coifman density at one `(y, t)`.
#[derive(Clone, Debug)]
pub struct BCSolution {
    pub side: RhpSide,
    pub phase: PhaseSpec,
    /// `mu[row][col]` sampled on the `z` line.
    pub mu: [[Vec<C64>; 2]; 2],
    /// `U_j = M₂(p_j)`, indexed `[j][row]`.
    pub u_vecs: Vec<[C64; 2]>,
    /// `V_j = M₁(p̄_j)`, indexed `[j][row]`.
    pub v_vecs: Vec<[C64; 2]>,
    /// Relative residual of the discrete system.
    pub residual: f64,
    pub iterations: usize,
    /// Sup-norm update per Neumann iteration.
    pub trace: Vec<f64>,
    pub method: SolveMethod,
    pub bounds: BoundReport,
}

impl BCSolution {
    /// `μ` at node `n` as a matrix.
    pub fn mu_at(&self, n: usize) -> Mat2 {
        Mat2::new(self.mu[0][0][n], self.mu[0][1][n], self.mu[1][0][n], self.mu[1][1][n])
    }
}

/// Row unknowns.
struct Row {
    mu1: Vec<C64>,
    mu2: Vec<C64>,
    u: Vec<C64>,
    v: Vec<C64>,
}

/// Sources of a row system: `μ₁ = g₁ + …`, `μ₂ = g₂ + …`, `U = gu + …`,
/// `V = gv + …`.
struct Sources<'a> {
    g1: &'a [C64],
    g2: &'a [C64],
    gu: C64,
    gv: C64,
}

fn pole_kernels(grid: &SpectralGrid, poles: &[Pole]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    // Cauchy weights W_n/(2πi(s_n − z)) at p_a and p̄_a.
    let w = |z: C64| -> Vec<C64> {
        grid.z.iter().zip(&grid.weights).map(|(&s, &wn)| wn / (2.0 * PI * I * (s - z))).collect()
    };
    (poles.iter().map(|p| w(p.p)).collect(), poles.iter().map(|p| w(p.p.conj())).collect())
}

/// Small closure system for `(U, V)` given the Cauchy data of the current
/// density: returns the LU factors of
/// `[[I, A], [B, I]]` with `A_{aj} = C̄_j/(p_a − p̄_j)`, `B_{aj} = −C_j/(p̄_a − p_j)`.
pub(crate) fn pole_matrix(poles: &[Pole]) -> Result<nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    let np = poles.len();
    let mut a = DMatrix::<C64>::identity(2 * np, 2 * np);
    for (ia, pa) in poles.iter().enumerate() {
        for (j, pj) in poles.iter().enumerate() {
            a[(ia, np + j)] = pj.coeff.conj() / (pa.p - pj.p.conj());
            a[(np + ia, j)] = -pj.coeff / (pa.p.conj() - pj.p);
        }
    }
    let lu = a.lu();
    let cond = diag_condition(lu.u().diagonal().iter());
    if cond > 1e13 {
        return Err(IstError::Singular { what: "pole closure", condition: cond });
    }
    Ok(lu)
}

pub(crate) fn diag_condition<'a>(d: impl Iterator<Item = &'a C64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in d {
        lo = lo.min(v.norm());
        hi = hi.max(v.norm());
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

struct RowContext<'a> {
    ctx: &'a CauchyContext,
    jump: &'a JumpState,
    route: CauchyRoute,
    kp: Vec<Vec<C64>>,
    kpc: Vec<Vec<C64>>,
}

impl RowContext<'_> {
    fn pole_terms(&self, row_u: &[C64], row_v: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let grid = self.ctx.grid();
        let len = grid.len_z();
        let mut t1 = vec![ZERO; len];
        let mut t2 = vec![ZERO; len];
        for (j, p) in self.jump.poles.iter().enumerate() {
            for n in 0..len {
                let s = C64::new(grid.z[n], 0.0);
                t1[n] += p.coeff * row_u[j] / (s - p.p);
                t2[n] -= p.coeff.conj() * row_v[j] / (s - p.p.conj());
            }
        }
        (t1, t2)
    }

    /// Solves the closure block for `(U, V)` given the current density.
    fn closure(
        &self,
        lu: &nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
        src: &Sources,
        mu1: &[C64],
        mu2: &[C64],
    ) -> (Vec<C64>, Vec<C64>) {
        let np = self.jump.poles.len();
        let mut rhs = DVector::<C64>::zeros(2 * np);
        for a in 0..np {
            let cu: C64 = self.kp[a].iter().zip(mu1).zip(&self.jump.upper).map(|((k, m), u)| k * m * u).sum();
            let cv: C64 = self.kpc[a].iter().zip(mu2).zip(&self.jump.lower).map(|((k, m), l)| k * m * l).sum();
            rhs[a] = src.gu + cu;
            rhs[np + a] = src.gv + cv;
        }
        let x = lu.solve(&rhs).expect("pole closure matrix was checked to be nonsingular");
        (x.rows(0, np).iter().copied().collect(), x.rows(np, np).iter().copied().collect())
    }

    fn sweep(&self, lu: Option<&nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>>, src: &Sources, row: &Row) -> Row {
        let (s1, s2) = self.jump.side.projections();
        let (u, v) = match lu {
            Some(lu) => self.closure(lu, src, &row.mu1, &row.mu2),
            None => (Vec::new(), Vec::new()),
        };
        let (t1, t2) = if u.is_empty() { (Vec::new(), Vec::new()) } else { self.pole_terms(&u, &v) };
        let f: Vec<C64> = row.mu2.iter().zip(&self.jump.lower).map(|(m, l)| m * l).collect();
        let c = project(self.ctx, self.route, &f, s1);
        let mu1: Vec<C64> = (0..c.len()).map(|n| src.g1[n] + c[n] + t1.get(n).copied().unwrap_or(ZERO)).collect();
        let f: Vec<C64> = mu1.iter().zip(&self.jump.upper).map(|(m, u)| m * u).collect();
        let c = project(self.ctx, self.route, &f, s2);
        let mu2: Vec<C64> = (0..c.len()).map(|n| src.g2[n] + c[n] + t2.get(n).copied().unwrap_or(ZERO)).collect();
        Row { mu1, mu2, u, v }
    }

    /// Residual of the full row system at `row`, relative to `max(1, |row|)`.
    fn residual(&self, src: &Sources, row: &Row) -> f64 {
        let (s1, s2) = self.jump.side.projections();
        let (t1, t2) = if row.u.is_empty() { (Vec::new(), Vec::new()) } else { self.pole_terms(&row.u, &row.v) };
        let f: Vec<C64> = row.mu2.iter().zip(&self.jump.lower).map(|(m, l)| m * l).collect();
        let c1 = project(self.ctx, self.route, &f, s1);
        let f: Vec<C64> = row.mu1.iter().zip(&self.jump.upper).map(|(m, u)| m * u).collect();
        let c2 = project(self.ctx, self.route, &f, s2);
        let mut res: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for n in 0..c1.len() {
            let e1 = row.mu1[n] - src.g1[n] - c1[n] - t1.get(n).copied().unwrap_or(ZERO);
            let e2 = row.mu2[n] - src.g2[n] - c2[n] - t2.get(n).copied().unwrap_or(ZERO);
            res = res.max(e1.norm()).max(e2.norm());
            scale = scale.max(row.mu1[n].norm()).max(row.mu2[n].norm());
        }
        for a in 0..row.u.len() {
            let cu: C64 = self.kp[a].iter().zip(&row.mu1).zip(&self.jump.upper).map(|((k, m), u)| k * m * u).sum();
            let cv: C64 = self.kpc[a].iter().zip(&row.mu2).zip(&self.jump.lower).map(|((k, m), l)| k * m * l).sum();
            let mut eu = row.u[a] - src.gu - cu;
            let mut ev = row.v[a] - src.gv - cv;
            for (j, pj) in self.jump.poles.iter().enumerate() {
                let pa = self.jump.poles[a].p;
                eu += pj.coeff.conj() * row.v[j] / (pa - pj.p.conj());
                ev -= pj.coeff * row.u[j] / (pa.conj() - pj.p);
            }
            res = res.max(eu.norm()).max(ev.norm());
        }
        res / scale
    }

    fn neumann(&self, src: &Sources, opts: &SolverOptions) -> Result<(Row, usize, Vec<f64>)> {
        let lu = if self.jump.poles.is_empty() { None } else { Some(pole_matrix(&self.jump.poles)?) };
        let mut row = Row { mu1: src.g1.to_vec(), mu2: src.g2.to_vec(), u: Vec::new(), v: Vec::new() };
        let mut trace = Vec::new();
        for it in 1..=opts.max_iter {
            let next = self.sweep(lu.as_ref(), src, &row);
            let mut diff: f64 = 0.0;
            for n in 0..next.mu1.len() {
                diff = diff.max((next.mu1[n] - row.mu1[n]).norm()).max((next.mu2[n] - row.mu2[n]).norm());
            }
            for (a, b) in next.u.iter().zip(&row.u).chain(next.v.iter().zip(&row.v)) {
                diff = diff.max((a - b).norm());
            }
            if row.u.is_empty() && !next.u.is_empty() {
                diff = diff.max(next.u.iter().chain(&next.v).map(|v| v.norm()).fold(0.0, f64::max));
            }
            row = next;
            trace.push(diff);
            if !diff.is_finite() {
                break;
            }
            if diff <= opts.tol {
                return Ok((row, it, trace));
            }
        }
        Err(IstError::NonConvergence {
            solver: "Neumann iteration",
            iterations: trace.len(),
            last: trace.last().copied().unwrap_or(f64::NAN),
            trace,
        })
    }

    /// Dense LU solve of both rows at once.
    fn dense(&self, sources: [&Sources; 2], opts: &SolverOptions) -> Result<[Row; 2]> {
        let grid = self.ctx.grid();
        let len = grid.len_z();
        let np = self.jump.poles.len();
        let size = 2 * len + 2 * np;
        if size > opts.dense_limit {
            return Err(IstError::Config(format!(
                "dense system of {size} unknowns exceeds the limit {}",
                opts.dense_limit
            )));
        }
        let (s1, s2) = self.jump.side.projections();
        // Projection matrices column by column.
        let proj_matrix = |side: Boundary| -> DMatrix<C64> {
            let mut p = DMatrix::<C64>::zeros(len, len);
            match self.route {
                CauchyRoute::Dense => {
                    let k = self.ctx.dense_pv_kernel();
                    let h = 0.5 * if side == Boundary::Plus { 1.0 } else { -1.0 };
                    for m in 0..len {
                        for n in 0..len {
                            p[(m, n)] = C64::new(k[m * len + n], 0.0) / (2.0 * PI * I);
                        }
                        p[(m, m)] += h;
                    }
                }
                CauchyRoute::Fast => {
                    let mut e = vec![ZERO; len];
                    for n in 0..len {
                        e[n] = ONE;
                        let col = self.ctx.project_z(&e, side);
                        e[n] = ZERO;
                        for m in 0..len {
                            p[(m, n)] = col[m];
                        }
                    }
                }
            }
            p
        };
        let p1 = proj_matrix(s1);
        let p2 = proj_matrix(s2);
        let mut a = DMatrix::<C64>::identity(size, size);
        let (o2, ou, ov) = (len, 2 * len, 2 * len + np);
        for m in 0..len {
            for n in 0..len {
                a[(m, o2 + n)] -= p1[(m, n)] * self.jump.lower[n];
                a[(o2 + m, n)] -= p2[(m, n)] * self.jump.upper[n];
            }
            let s = C64::new(grid.z[m], 0.0);
            for (j, pj) in self.jump.poles.iter().enumerate() {
                a[(m, ou + j)] -= pj.coeff / (s - pj.p);
                a[(o2 + m, ov + j)] += pj.coeff.conj() / (s - pj.p.conj());
            }
        }
        for (ia, pa) in self.jump.poles.iter().enumerate() {
            for n in 0..len {
                a[(ou + ia, n)] -= self.kp[ia][n] * self.jump.upper[n];
                a[(ov + ia, o2 + n)] -= self.kpc[ia][n] * self.jump.lower[n];
            }
            for (j, pj) in self.jump.poles.iter().enumerate() {
                a[(ou + ia, ov + j)] += pj.coeff.conj() / (pa.p - pj.p.conj());
                a[(ov + ia, ou + j)] -= pj.coeff / (pa.p.conj() - pj.p);
            }
        }
        let mut b = DMatrix::<C64>::zeros(size, 2);
        for (c, src) in sources.iter().enumerate() {
            for m in 0..len {
                b[(m, c)] = src.g1[m];
                b[(o2 + m, c)] = src.g2[m];
            }
            for j in 0..np {
                b[(ou + j, c)] = src.gu;
                b[(ov + j, c)] = src.gv;
            }
        }
        let lu = a.lu();
        let cond = diag_condition(lu.u().diagonal().iter());
        if cond > 1e13 {
            return Err(IstError::Singular { what: "dense Beals-Coifman system", condition: cond });
        }
        let x =
            lu.solve(&b).ok_or(IstError::Singular { what: "dense Beals-Coifman system", condition: f64::INFINITY })?;
        let row = |c: usize| Row {
            mu1: (0..len).map(|m| x[(m, c)]).collect(),
            mu2: (0..len).map(|m| x[(o2 + m, c)]).collect(),
            u: (0..np).map(|j| x[(ou + j, c)]).collect(),
            v: (0..np).map(|j| x[(ov + j, c)]).collect(),
        };
        Ok([row(0), row(1)])
    }
}

fn bounds(grid: &SpectralGrid, jump: &JumpState, mu: &[[Vec<C64>; 2]; 2]) -> BoundReport {
    let len = grid.len_z();
    let at = |n: usize| Mat2::new(mu[0][0][n], mu[0][1][n], mu[1][0][n], mu[1][1][n]);
    let id = Mat2::identity();
    let mu_minus_i = z_norm(grid, (0..len).map(|n| (at(n) - id).frobenius().powi(2)));
    let mp = z_norm(grid, (0..len).map(|n| (at(n) * (id + jump.w_plus(n)) - id).frobenius().powi(2)));
    let mm = z_norm(grid, (0..len).map(|n| (at(n) * (id - jump.w_minus(n)) - id).frobenius().powi(2)));
    BoundReport { mu_minus_i, m_minus_i: mp.max(mm), r_l2: jump.r_l2, r_sup: jump.r_sup }
}

/// Solves the Beals–Coifman system for `jump`.
///
/// Neumann iteration (Gauss–Seidel over the two column equations, with the
/// pole closure re-solved each sweep) is tried first; if it fails and
/// `opts.dense_fallback` is set, the full system is assembled and solved by
/// LU. Both rows share one factorisation.
pub fn solve_mu(ctx: &CauchyContext, jump: &JumpState, opts: &SolverOptions) -> Result<BCSolution> {
    let grid = ctx.grid();
    let len = grid.len_z();
    if jump.upper.len() != len {
        return Err(IstError::GridMismatch(format!("jump has {} samples, grid {len}", jump.upper.len())));
    }
    let ones = vec![ONE; len];
    let zeros = vec![ZERO; len];
    let src =
        [Sources { g1: &ones, g2: &zeros, gu: ZERO, gv: ONE }, Sources { g1: &zeros, g2: &ones, gu: ONE, gv: ZERO }];
    if jump.is_trivial() {
        let mu = [[ones.clone(), zeros.clone()], [zeros.clone(), ones.clone()]];
        return Ok(BCSolution {
            side: jump.side,
            phase: jump.phase,
            bounds: bounds(grid, jump, &mu),
            mu,
            u_vecs: Vec::new(),
            v_vecs: Vec::new(),
            residual: 0.0,
            iterations: 0,
            trace: Vec::new(),
            method: SolveMethod::Trivial,
        });
    }
    let (kp, kpc) = pole_kernels(grid, &jump.poles);
    let rc = RowContext { ctx, jump, route: opts.route, kp, kpc };
    let neumann = (|| -> Result<([Row; 2], usize, Vec<f64>)> {
        let (r0, i0, mut t0) = rc.neumann(&src[0], opts)?;
        let (r1, i1, t1) = rc.neumann(&src[1], opts)?;
        t0.extend(t1);
        Ok(([r0, r1], i0.max(i1), t0))
    })();
    let (rows, iterations, trace, method) = match neumann {
        Ok((rows, it, trace)) => (rows, it, trace, SolveMethod::Neumann),
        Err(IstError::NonConvergence { solver, iterations, last, trace }) => {
            if !opts.dense_fallback {
                return Err(IstError::NonConvergence { solver, iterations, last, trace });
            }
            match rc.dense([&src[0], &src[1]], opts) {
                Ok(rows) => (rows, iterations, trace, SolveMethod::Dense),
                Err(IstError::Singular { what, condition }) => return Err(IstError::Singular { what, condition }),
                Err(_) => {
                    return Err(IstError::NonConvergence {
                        solver: "Neumann iteration (dense fallback unavailable)",
                        iterations,
                        last,
                        trace,
                    })
                }
            }
        }
        Err(e) => return Err(e),
    };
    let residual = rc.residual(&src[0], &rows[0]).max(rc.residual(&src[1], &rows[1]));
    let np = jump.poles.len();
    let u_vecs = (0..np).map(|j| [rows[0].u[j], rows[1].u[j]]).collect();
    let v_vecs = (0..np).map(|j| [rows[0].v[j], rows[1].v[j]]).collect();
    let [r0, r1] = rows;
    let mu = [[r0.mu1, r0.mu2], [r1.mu1, r1.mu2]];
    Ok(BCSolution {
        side: jump.side,
        phase: jump.phase,
        bounds: bounds(grid, jump, &mu),
        mu,
        u_vecs,
        v_vecs,
        residual,
        iterations,
        trace,
        method,
    })
}

/// Same as [`solve_mu`] but forces the dense LU path.
pub fn solve_mu_dense(ctx: &CauchyContext, jump: &JumpState, opts: &SolverOptions) -> Result<BCSolution> {
    let grid = ctx.grid();
    let len = grid.len_z();
    let ones = vec![ONE; len];
    let zeros = vec![ZERO; len];
    let src =
        [Sources { g1: &ones, g2: &zeros, gu: ZERO, gv: ONE }, Sources { g1: &zeros, g2: &ones, gu: ONE, gv: ZERO }];
    let (kp, kpc) = pole_kernels(grid, &jump.poles);
    let rc = RowContext { ctx, jump, route: opts.route, kp, kpc };
    let rows = rc.dense([&src[0], &src[1]], opts)?;
    let residual = rc.residual(&src[0], &rows[0]).max(rc.residual(&src[1], &rows[1]));
    let np = jump.poles.len();
    let u_vecs = (0..np).map(|j| [rows[0].u[j], rows[1].u[j]]).collect();
    let v_vecs = (0..np).map(|j| [rows[0].v[j], rows[1].v[j]]).collect();
    let [r0, r1] = rows;
    let mu = [[r0.mu1, r0.mu2], [r1.mu1, r1.mu2]];
    Ok(BCSolution {
        side: jump.side,
        phase: jump.phase,
        bounds: bounds(grid, jump, &mu),
        mu,
        u_vecs,
        v_vecs,
        residual,
        iterations: 0,
        trace: Vec::new(),
        method: SolveMethod::Dense,
    })
}

/// `∂_y μ` from the differentiated system
/// `∂_y μ = (∂_y K)(μ) + K(∂_y μ)`, with `∂_y l = (ik/2) l` and
/// `∂_y u = −(ik/2) u`. Only reflection data are supported (no poles).
pub fn solve_mu_y(
    ctx: &CauchyContext,
    jump: &JumpState,
    sol: &BCSolution,
    opts: &SolverOptions,
) -> Result<[[Vec<C64>; 2]; 2]> {
    if !jump.poles.is_empty() {
        return Err(IstError::Spectrum("the y-derivative system is implemented without discrete spectrum".into()));
    }
    let grid = ctx.grid();
    let len = grid.len_z();
    let (s1, s2) = jump.side.projections();
    let half_ik: Vec<C64> = (0..len).map(|n| 0.5 * I * grid.k_at(n)).collect();
    let rc = RowContext { ctx, jump, route: opts.route, kp: Vec::new(), kpc: Vec::new() };
    let mut out: [[Vec<C64>; 2]; 2] = Default::default();
    for (row, slot) in out.iter_mut().enumerate() {
        let f: Vec<C64> = (0..len).map(|n| sol.mu[row][1][n] * jump.lower[n] * half_ik[n]).collect();
        let g1 = project(ctx, opts.route, &f, s1);
        let f: Vec<C64> = (0..len).map(|n| -sol.mu[row][0][n] * jump.upper[n] * half_ik[n]).collect();
        let g2 = project(ctx, opts.route, &f, s2);
        let src = Sources { g1: &g1, g2: &g2, gu: ZERO, gv: ZERO };
        let (r, _, _) = rc.neumann(&src, opts)?;
        *slot = [r.mu1, r.mu2];
    }
    Ok(out)
}

/// Evaluates `M(z)` for `z` off the real line (or `z = 0`).
pub fn eval_m(ctx: &CauchyContext, sol: &BCSolution, jump: &JumpState, z: C64) -> Result<Mat2> {
    m_series(ctx, sol, jump, z, 0)
}

/// `M(z)` (`order = 0`) or `M'(z)` (`order = 1`).
fn m_series(ctx: &CauchyContext, sol: &BCSolution, jump: &JumpState, z: C64, order: u8) -> Result<Mat2> {
    for p in &jump.poles {
        if (z - p.p).norm() < 1e-12 || (z - p.p.conj()).norm() < 1e-12 {
            return Err(IstError::Domain { op: "eval_m", detail: format!("z = {z} is a pole of M") });
        }
    }
    let len = ctx.grid().len_z();
    let eval = |f: &[C64]| if order == 0 { ctx.cauchy_eval(f, z) } else { ctx.cauchy_eval_derivative(f, z) };
    let mut m = if order == 0 { Mat2::identity() } else { Mat2::zero() };
    for row in 0..2 {
        let f1: Vec<C64> = (0..len).map(|n| sol.mu[row][1][n] * jump.lower[n]).collect();
        let f2: Vec<C64> = (0..len).map(|n| sol.mu[row][0][n] * jump.upper[n]).collect();
        m.0[row][0] += eval(&f1)?;
        m.0[row][1] += eval(&f2)?;
        for (j, p) in jump.poles.iter().enumerate() {
            let (d1, d2) = (z - p.p, z - p.p.conj());
            let (k1, k2) = if order == 0 { (d1.inv(), d2.inv()) } else { (-(d1 * d1).inv(), -(d2 * d2).inv()) };
            m.0[row][0] += p.coeff * sol.u_vecs[j][row] * k1;
            m.0[row][1] -= p.coeff.conj() * sol.v_vecs[j][row] * k2;
        }
    }
    Ok(m)
}

/// Local data of `M` consumed by the reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansions {
    pub y: f64,
    pub t: f64,
    pub side: RhpSide,
    /// `M(0)`.
    pub m0: Mat2,
    /// `M(i)`.
    pub mi: Mat2,
    /// `M'(i)`.
    pub mi1: Mat2,
    /// `D = lim_{z→∞} z (M(z) − I)`.
    pub d: Mat2,
    /// `σ₂` coefficient of `D`: `η = (D₂₁ − D₁₂)/(2i)`.
    pub eta: C64,
    /// `σ₃` coefficient of `D`: `ζ = (D₁₁ − D₂₂)/2`.
    pub zeta: C64,
    /// `ln a(i)` (right problem only; zero on the left).
    pub log_a_i: C64,
    /// Truncation estimate of the Cauchy sums at `0` and `i`.
    pub tail: f64,
}

impl Expansions {
    /// Assembles the derived coefficients from `M(0)`, `M(i)`, `M'(i)` and `D`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        y: f64,
        t: f64,
        side: RhpSide,
        m0: Mat2,
        mi: Mat2,
        mi1: Mat2,
        d: Mat2,
        log_a_i: C64,
        tail: f64,
    ) -> Self {
        let eta = (d.get(1, 0) - d.get(0, 1)) / (2.0 * I);
        let zeta = (d.get(0, 0) - d.get(1, 1)) * 0.5;
        Expansions { y, t, side, m0, mi, mi1, d, eta, zeta, log_a_i, tail }
    }

    /// Expansions of `M ≡ I`.
    pub fn identity(y: f64, t: f64) -> Self {
        let z = Mat2::zero();
        Self::from_parts(y, t, RhpSide::for_y(y), Mat2::identity(), Mat2::identity(), z, z, ZERO, 0.0)
    }
}

/// `M(0)`, `M(i)`, `M'(i)` and the large-`z` coefficient `D`.
pub fn eval_expansions(ctx: &CauchyContext, sol: &BCSolution, jump: &JumpState) -> Result<Expansions> {
    let len = ctx.grid().len_z();
    let m0 = m_series(ctx, sol, jump, ZERO, 0)?;
    let mi = m_series(ctx, sol, jump, I, 0)?;
    let mi1 = m_series(ctx, sol, jump, I, 1)?;
    let mut d = Mat2::zero();
    let mut tail: f64 = 0.0;
    for row in 0..2 {
        let f1: Vec<C64> = (0..len).map(|n| sol.mu[row][1][n] * jump.lower[n]).collect();
        let f2: Vec<C64> = (0..len).map(|n| sol.mu[row][0][n] * jump.upper[n]).collect();
        d.0[row][0] += ctx.cauchy_moment(&f1);
        d.0[row][1] += ctx.cauchy_moment(&f2);
        for f in [&f1, &f2] {
            tail = tail.max(ctx.tail_estimate(f, ZERO)).max(ctx.tail_estimate(f, I));
        }
        for (j, p) in jump.poles.iter().enumerate() {
            d.0[row][0] += p.coeff * sol.u_vecs[j][row];
            d.0[row][1] -= p.coeff.conj() * sol.v_vecs[j][row];
        }
    }
    Ok(Expansions::from_parts(jump.phase.y, jump.phase.t, jump.side, m0, mi, mi1, d, jump.log_a_i, tail))
}

/// Builds, solves and expands the problem at each phase (side chosen from
/// the sign of `y`), distributing the work with `exec`.
pub fn solve_many(
    ctx: &CauchyContext,
    sd: &ScatteringData,
    phases: &[PhaseSpec],
    opts: &SolverOptions,
    exec: Exec,
) -> Result<Vec<(BCSolution, Expansions)>> {
    exec.try_map(phases.len(), |i| {
        let ph = phases[i];
        let jump = build_jump(sd, ctx.grid(), ph, RhpSide::for_y(ph.y))?;
        let sol = solve_mu(ctx, &jump, opts)?;
        let ex = eval_expansions(ctx, &sol, &jump)?;
        Ok((sol, ex))
    })
}
