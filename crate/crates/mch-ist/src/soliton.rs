//! Reflectionless (pure soliton) solutions.
//!
//! With `r ≡ 0` the Riemann–Hilbert problem has no jump and `M` is rational:
//!
//! ```text
//! M₁(z) = e₁ + Σ_j C_j U_j/(z − p_j),     M₂(z) = e₂ − Σ_j C̄_j V_j/(z − p̄_j),
//! ```
//!
//! with `C_j = c_j e^{−2iΘ(p_j)}`, `U_j = M₂(p_j)` and `V_j = M₁(p̄_j)`. The
//! `2N × 2N` closure system for `(U, V)` is solved directly, for any `y`.
//!
//! The symmetries `z ↦ −z̄` and `z ↦ −1/z` of the problem force the discrete
//! spectrum to be closed under the orbit
//! `(z, c) → (−z̄, c̄), (−1/z, −c/z²), (1/z̄, −c̄/z̄²)`; see
//! [`complete_symmetry`].

use crate::error::{IstError, Result};
use crate::mat2::{Mat2, I};
use crate::reconstruct::{field_from_m, velocity_from_mi, FieldPoint};
use crate::rhp::{diag_condition, pole_matrix, Expansions, Pole, RhpSide};
use crate::scattering::DiscretePoint;
use crate::time_flow::{theta, PhaseSpec};
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Distance below which two discrete points are the same point.
pub const COINCIDENCE_TOL: f64 = 1e-10;

/// Closure systems with a larger condition estimate are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

fn discrete(z: C64, c: C64) -> DiscretePoint {
    // The second column of M has residue coefficient −c̄ at z̄.
    DiscretePoint { z, c, c_tilde: -c.conj() }
}

/// Symmetry orbit of one `(z, c)` in the upper half-plane, with exact
/// coincidences (imaginary axis, unit circle) merged.
///
/// Coincident orbit points must carry the same constant: `c` real on the
/// imaginary axis, `c ∈ i z ℝ` on the unit circle. Violations, points off
/// the open upper half-plane, `c = 0` and `z = i` (where the field is read
/// off) are [`IstError::Spectrum`] errors.
pub fn orbit(z: C64, c: C64) -> Result<Vec<DiscretePoint>> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(IstError::Spectrum(format!("discrete point {z} is not in the open upper half-plane")));
    }
    if c.norm() == 0.0 || !c.re.is_finite() || !c.im.is_finite() {
        return Err(IstError::Spectrum(format!("norming constant {c} at {z} must be finite and nonzero")));
    }
    if (z - I).norm() < COINCIDENCE_TOL {
        return Err(IstError::Spectrum("z = i is reserved for reading off the field".into()));
    }
    let zc = z.conj();
    let cands = [(z, c), (-zc, c.conj()), (-z.inv(), -c / (z * z)), (zc.inv(), -c.conj() / (zc * zc))];
    let mut out: Vec<DiscretePoint> = Vec::with_capacity(4);
    for (p, cp) in cands {
        match out.iter().find(|d| (d.z - p).norm() <= COINCIDENCE_TOL) {
            Some(d) => {
                if (d.c - cp).norm() > 1e-10 * (1.0 + cp.norm()) {
                    return Err(IstError::Spectrum(format!(
                        "discrete point {p} is forced to carry both {} and {cp}; the constant violates the symmetry",
                        d.c
                    )));
                }
            }
            None => out.push(discrete(p, cp)),
        }
    }
    Ok(out)
}

/// Closes a list of seeds under the symmetry group. Orbits of different
/// seeds must be disjoint (simple zeros only).
pub fn complete_symmetry(seeds: &[(C64, C64)]) -> Result<Vec<DiscretePoint>> {
    let mut all: Vec<DiscretePoint> = Vec::new();
    for &(z, c) in seeds {
        let orb = orbit(z, c)?;
        for d in &orb {
            if let Some(o) = all.iter().find(|o| (o.z - d.z).norm() <= COINCIDENCE_TOL) {
                return Err(IstError::Spectrum(format!(
                    "discrete points collide at {} (from seed {z}); zeros must be simple",
                    o.z
                )));
            }
        }
        all.extend(orb);
    }
    Ok(all)
}

/// Whether a one-orbit reflectionless solution built from `z` is regular
/// (`m` bounded for all `x`, `t`). Unit-circle points give smooth solitons
/// only for `arg z < π/4`; points off the unit circle are reported regular
/// here and checked pointwise by the reconstruction.
pub fn unit_circle_regular(z: C64) -> bool {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return true;
    }
    let a = z.arg().min(std::f64::consts::PI - z.arg());
    a < std::f64::consts::FRAC_PI_4
}

/// Solution of the reflectionless problem at one `(y, t)`.
#[derive(Clone, Debug)]
pub struct ReflectionlessSolution {
    pub phase: PhaseSpec,
    pub poles: Vec<Pole>,
    /// `U_j = M₂(p_j)`, indexed `[j][row]`.
    pub u: Vec<[C64; 2]>,
    /// `V_j = M₁(p̄_j)`, indexed `[j][row]`.
    pub v: Vec<[C64; 2]>,
    /// Ratio of extreme pivots of the closure LU.
    pub condition: f64,
}

/// Solves the closure system at `(y, t)`; unlike the jump problem, any sign
/// of `y` is allowed.
pub fn solve_reflectionless(discrete: &[DiscretePoint], y: f64, t: f64) -> Result<ReflectionlessSolution> {
    let phase = PhaseSpec::new(y, t)?;
    let poles: Vec<Pole> = discrete
        .iter()
        .map(|d| Ok(Pole { p: d.z, coeff: d.c * (-2.0 * I * theta(d.z, y, t)?).exp() }))
        .collect::<Result<_>>()?;
    if poles.iter().any(|p| !p.coeff.re.is_finite() || !p.coeff.im.is_finite()) {
        return Err(IstError::Singular { what: "soliton closure", condition: f64::INFINITY });
    }
    let np = poles.len();
    if np == 0 {
        return Ok(ReflectionlessSolution { phase, poles, u: Vec::new(), v: Vec::new(), condition: 1.0 });
    }
    let lu = pole_matrix(&poles)?;
    let condition = diag_condition(lu.u().diagonal().iter());
    if condition > CONDITION_LIMIT {
        return Err(IstError::Singular { what: "soliton closure", condition });
    }
    let mut u = vec![[C64::new(0.0, 0.0); 2]; np];
    let mut v = vec![[C64::new(0.0, 0.0); 2]; np];
    for row in 0..2 {
        let mut rhs = DVector::<C64>::zeros(2 * np);
        for a in 0..np {
            // Row `row` of U_a = M₂(p_a) starts from e₂, of V_a = M₁(p̄_a) from e₁.
            rhs[a] = C64::new(if row == 1 { 1.0 } else { 0.0 }, 0.0);
            rhs[np + a] = C64::new(if row == 0 { 1.0 } else { 0.0 }, 0.0);
        }
        let x = lu.solve(&rhs).ok_or(IstError::Singular { what: "soliton closure", condition })?;
        for a in 0..np {
            u[a][row] = x[a];
            v[a][row] = x[np + a];
        }
    }
    Ok(ReflectionlessSolution { phase, poles, u, v, condition })
}

impl ReflectionlessSolution {
    fn series(&self, z: C64, order: i32) -> Result<Mat2> {
        let mut m = if order == 0 { Mat2::identity() } else { Mat2::zero() };
        for (j, p) in self.poles.iter().enumerate() {
            let (d1, d2) = (z - p.p, z - p.p.conj());
            if d1.norm() < COINCIDENCE_TOL || d2.norm() < COINCIDENCE_TOL {
                return Err(IstError::Domain { op: "soliton M", detail: format!("z = {z} is a pole") });
            }
            let (k1, k2) = if order == 0 { (d1.inv(), d2.inv()) } else { (-(d1 * d1).inv(), -(d2 * d2).inv()) };
            for row in 0..2 {
                m.0[row][0] += p.coeff * self.u[j][row] * k1;
                m.0[row][1] -= p.coeff.conj() * self.v[j][row] * k2;
            }
        }
        Ok(m)
    }

    /// `M(z)` away from the poles.
    pub fn eval_m(&self, z: C64) -> Result<Mat2> {
        self.series(z, 0)
    }

    /// `M'(z)` away from the poles.
    pub fn eval_m_derivative(&self, z: C64) -> Result<Mat2> {
        self.series(z, 1)
    }

    /// `D = lim z (M − I)`.
    pub fn large_z(&self) -> Mat2 {
        let mut d = Mat2::zero();
        for (j, p) in self.poles.iter().enumerate() {
            for row in 0..2 {
                d.0[row][0] += p.coeff * self.u[j][row];
                d.0[row][1] -= p.coeff.conj() * self.v[j][row];
            }
        }
        d
    }

    /// Expansions consumed by the reconstruction (`ln a(i)` is not needed
    /// in the left normalisation).
    pub fn expansions(&self) -> Result<Expansions> {
        Ok(Expansions::from_parts(
            self.phase.y,
            self.phase.t,
            RhpSide::Left,
            self.eval_m(C64::new(0.0, 0.0))?,
            self.eval_m(I)?,
            self.eval_m_derivative(I)?,
            self.large_z(),
            C64::new(0.0, 0.0),
            0.0,
        ))
    }
}

/// Field values of the reflectionless solution at `(y, t)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolitonPoint {
    pub field: FieldPoint,
    pub u: f64,
    pub ux: f64,
    pub condition: f64,
}

/// Evaluates `q`, `m`, `x`, `u`, `u_x` at `(y, t)`.
pub fn soliton_point(discrete: &[DiscretePoint], y: f64, t: f64) -> Result<SolitonPoint> {
    let sol = solve_reflectionless(discrete, y, t)?;
    let ex = sol.expansions()?;
    let field = field_from_m(&ex)?;
    let (u, ux) = velocity_from_mi(&ex)?;
    Ok(SolitonPoint { field, u, ux, condition: sol.condition })
}

/// `m` at physical positions `xs` (increasing) and time `t`, found by
/// Newton iteration on `x(y) = X` with `∂_y x = 1/q`.
pub fn soliton_on_x(discrete: &[DiscretePoint], xs: &[f64], t: f64) -> Result<Vec<SolitonPoint>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut y = xs.first().copied().unwrap_or(0.0);
    for &target in xs {
        let mut pt = soliton_point(discrete, y, t)?;
        let mut converged = false;
        for _ in 0..60 {
            let dy = (target - pt.field.x) * pt.field.q;
            y += dy;
            pt = soliton_point(discrete, y, t)?;
            if dy.abs() < 1e-14 * (1.0 + y.abs()) {
                converged = true;
                break;
            }
        }
        if !converged && (pt.field.x - target).abs() > 1e-12 * (1.0 + target.abs()) {
            return Err(IstError::NonConvergence {
                solver: "soliton x(y) inversion",
                iterations: 60,
                last: (pt.field.x - target).abs(),
                trace: Vec::new(),
            });
        }
        out.push(pt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn orbit_sizes() {
        let e = C64::from_polar(1.0, PI / 6.0);
        assert_eq!(orbit(e, I * e).unwrap().len(), 2);
        assert_eq!(orbit(C64::new(0.0, 1.5), C64::new(0.7, 0.0)).unwrap().len(), 2);
        assert_eq!(orbit(C64::new(0.5, 0.9), C64::new(0.3, 0.2)).unwrap().len(), 4);
    }

    #[test]
    fn inconsistent_constants_and_collisions_are_rejected() {
        let e = C64::from_polar(1.0, PI / 6.0);
        assert!(orbit(e, e).is_err());
        assert!(orbit(C64::new(0.0, 1.5), C64::new(0.7, 0.1)).is_err());
        assert!(orbit(I, C64::new(1.0, 0.0)).is_err());
        assert!(orbit(C64::new(1.0, -0.5), C64::new(1.0, 0.0)).is_err());
        assert!(complete_symmetry(&[(e, I * e), (-e.conj(), -I * e.conj())]).is_err());
    }

    #[test]
    fn regularity_rule() {
        assert!(unit_circle_regular(C64::from_polar(1.0, PI / 6.0)));
        assert!(!unit_circle_regular(C64::from_polar(1.0, PI / 3.0)));
    }

    #[test]
    fn empty_spectrum_is_zero_field() {
        let p = soliton_point(&[], 2.0, 0.5).unwrap();
        assert_eq!((p.field.q, p.field.m, p.field.x), (1.0, 0.0, 2.0));
    }

    #[test]
    fn closure_solution_satisfies_its_definition() {
        let e = C64::from_polar(1.0, PI / 6.0);
        let d = complete_symmetry(&[(e, I * e)]).unwrap();
        let s = solve_reflectionless(&d, -1.3, 0.4).unwrap();
        for (j, p) in s.poles.iter().enumerate() {
            // U_j = M₂(p_j): evaluate the second column at p_j directly.
            let mut m2 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
            for (l, q) in s.poles.iter().enumerate() {
                for (m, v) in m2.iter_mut().zip(&s.v[l]) {
                    *m -= q.coeff.conj() * v / (p.p - q.p.conj());
                }
            }
            for (m, u) in m2.iter().zip(&s.u[j]) {
                assert!((m - u).norm() < 1e-12);
            }
        }
        let m = s.eval_m(C64::new(0.3, 0.2)).unwrap();
        assert!((m.det() - 1.0).norm() < 1e-12);
    }
}
