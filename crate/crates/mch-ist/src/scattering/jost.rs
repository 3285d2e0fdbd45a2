//! Jost solutions of the `y`-form spectral problem.
//!
//! Writing `Ψ = μ e^{−(ik/4) y σ₃}`, the Jost functions solve
//! `Ψ_y = (−(ik/4)σ₃ + P) Ψ` with `μ± → I` as `y → ±∞`. The system is advanced
//! in the `x` parameterisation (`dy = q dx`, so the generator is `q(−(ik/4)σ₃ + P)`)
//! with a fourth-order Magnus step whose exponential is exact for 2×2
//! traceless generators; after each step the plane-wave factor is divided out
//! so the stored columns stay `O(1)` also for complex `z`.

use super::profile::ProfileData;
use crate::error::{IstError, Result};
use crate::mat2::{Mat2, I};
use num_complex::Complex64 as C64;

/// Normalisation end of a Jost solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `μ₋ → I` as `y → −∞`.
    Minus,
    /// `μ₊ → I` as `y → +∞`.
    Plus,
}

/// Jost columns sampled at the profile's input nodes.
#[derive(Clone, Debug)]
pub struct JostSolution {
    pub z: C64,
    pub side: Side,
    /// `y` at the sample nodes.
    pub y: Vec<f64>,
    /// First column, when it exists for this `z` (all real `z`; `Im z > 0`
    /// for `μ₋`, `Im z < 0` for `μ₊`).
    pub col1: Option<Vec<[C64; 2]>>,
    /// Second column (all real `z`; `Im z < 0` for `μ₋`, `Im z > 0` for `μ₊`).
    pub col2: Option<Vec<[C64; 2]>>,
}

impl JostSolution {
    /// Full matrix at node `j`; both columns must be present (real `z`).
    pub fn mu(&self, j: usize) -> Mat2 {
        let c1 = self.col1.as_ref().expect("first column not available for this z")[j];
        let c2 = self.col2.as_ref().expect("second column not available for this z")[j];
        Mat2::from_columns(c1, c2)
    }
}

/// Which columns are analytic (hence computable) for `z` on `side`.
pub fn analytic_columns(z: C64, side: Side) -> (bool, bool) {
    if z.im == 0.0 {
        return (true, true);
    }
    let upper = z.im > 0.0;
    match side {
        Side::Minus => (upper, !upper),
        Side::Plus => (!upper, upper),
    }
}

/// Stateless stepper bound to one profile and one `z`.
pub(crate) struct Stepper<'a> {
    p: &'a ProfileData,
    k: C64,
    zinv: C64,
}

impl<'a> Stepper<'a> {
    pub fn new(p: &'a ProfileData, z: C64) -> Result<Self> {
        if z == C64::new(0.0, 0.0) {
            return Err(IstError::Domain { op: "solve_jost", detail: "z = 0".into() });
        }
        let k = z - z.inv();
        if k.norm() > p.fine.k_supported {
            return Err(IstError::StepControl(format!(
                "|k(z)| = {:.3} exceeds {:.3}, the largest value resolved by the integration grid",
                k.norm(),
                p.fine.k_supported
            )));
        }
        Ok(Stepper { p, k, zinv: z.inv() })
    }

    fn generator(&self, j: usize) -> Mat2 {
        let f = &self.p.fine;
        let d = -I * self.k * 0.25 * f.q[j];
        Mat2::diag(d, -d) + f.qp0[j] + f.qp1[j].scale(self.zinv)
    }

    /// Magnus propagator over step `s` (fine nodes `2s → 2s+2`).
    pub fn propagator(&self, s: usize) -> Mat2 {
        let hh = 2.0 * self.p.fine.h;
        let a = self.generator(2 * s);
        let m = self.generator(2 * s + 1);
        let b = self.generator(2 * s + 2);
        let omega = (a + m.scale(C64::new(4.0, 0.0)) + b).scale(C64::new(hh / 6.0, 0.0))
            + b.commutator(&a).scale(C64::new(hh * hh / 12.0, 0.0));
        omega.expm_traceless()
    }

    /// Plane-wave factors `(e^{ikΔ/4}, e^{−ikΔ/4})` for a forward step of
    /// length `Δ` in `y`.
    pub fn phase(&self, s: usize) -> (C64, C64) {
        let dy = self.p.fine.y_even[s + 1] - self.p.fine.y_even[s];
        let e = (I * self.k * (0.25 * dy)).exp();
        (e, e.inv())
    }

    pub fn steps(&self) -> usize {
        self.p.fine.y_even.len() - 1
    }

    pub fn stride(&self) -> usize {
        self.p.fine.factor / 2
    }
}

/// Propagates the requested columns of `μ₋` from the left end up to input
/// node `stop` (inclusive), calling `record(j, col1, col2)` at each node.
pub(crate) fn sweep_minus(
    st: &Stepper,
    want: (bool, bool),
    stop: usize,
    mut record: impl FnMut(usize, [C64; 2], [C64; 2]),
) {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (mut c1, mut c2) = ([one, zero], [zero, one]);
    record(0, c1, c2);
    let stride = st.stride();
    for s in 0..stop * stride {
        let e = st.propagator(s);
        let (f1, f2) = st.phase(s);
        if want.0 {
            let v = e * c1;
            c1 = [v[0] * f1, v[1] * f1];
        }
        if want.1 {
            let v = e * c2;
            c2 = [v[0] * f2, v[1] * f2];
        }
        if (s + 1) % stride == 0 {
            record((s + 1) / stride, c1, c2);
        }
    }
}

/// Propagates the requested columns of `μ₊` from the right end down to input
/// node `stop` (inclusive), calling `record(j, col1, col2)` at each node.
pub(crate) fn sweep_plus(
    st: &Stepper,
    want: (bool, bool),
    stop: usize,
    mut record: impl FnMut(usize, [C64; 2], [C64; 2]),
) {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (mut c1, mut c2) = ([one, zero], [zero, one]);
    let stride = st.stride();
    let last = st.steps() / stride;
    record(last, c1, c2);
    for s in (stop * stride..st.steps()).rev() {
        let e = st.propagator(s).inv();
        let (f1, f2) = st.phase(s);
        // Backward step: μ_s = E⁻¹ μ_{s+1} diag(e^{−ikΔ/4}, e^{ikΔ/4}).
        if want.0 {
            let v = e * c1;
            c1 = [v[0] * f2, v[1] * f2];
        }
        if want.1 {
            let v = e * c2;
            c2 = [v[0] * f1, v[1] * f1];
        }
        if s % stride == 0 {
            record(s / stride, c1, c2);
        }
    }
}

/// Jost solution `μ_side(·, z)` on the profile's input nodes.
///
/// For real `z` both columns are returned. For complex `z` only the column
/// that is analytic in the half-plane of `z` is computed; requesting a side
/// whose columns are both non-analytic is impossible, so this never fails for
/// that reason, but [`jost_column`] reports a domain error when a specific
/// non-analytic column is requested.
pub fn solve_jost(profile: &ProfileData, z: C64, side: Side) -> Result<JostSolution> {
    let st = Stepper::new(profile, z)?;
    let want = analytic_columns(z, side);
    let n = profile.x.n;
    let mut c1 = vec![[C64::new(0.0, 0.0); 2]; n];
    let mut c2 = vec![[C64::new(0.0, 0.0); 2]; n];
    let rec = |j: usize, a: [C64; 2], b: [C64; 2], c1: &mut Vec<[C64; 2]>, c2: &mut Vec<[C64; 2]>| {
        c1[j] = a;
        c2[j] = b;
    };
    match side {
        Side::Minus => sweep_minus(&st, want, n - 1, |j, a, b| rec(j, a, b, &mut c1, &mut c2)),
        Side::Plus => sweep_plus(&st, want, 0, |j, a, b| rec(j, a, b, &mut c1, &mut c2)),
    }
    Ok(JostSolution { z, side, y: profile.y_of_x.clone(), col1: want.0.then_some(c1), col2: want.1.then_some(c2) })
}

/// A single Jost column; errors when the column is not analytic at `z`.
pub fn jost_column(profile: &ProfileData, z: C64, side: Side, column: usize) -> Result<Vec<[C64; 2]>> {
    let want = analytic_columns(z, side);
    let ok = if column == 0 { want.0 } else { want.1 };
    if !ok {
        return Err(IstError::Domain {
            op: "solve_jost",
            detail: format!("column {} of mu_{:?} is not analytic at z = {z}", column + 1, side),
        });
    }
    let sol = solve_jost(profile, z, side)?;
    Ok(if column == 0 { sol.col1.unwrap() } else { sol.col2.unwrap() })
}

/// Both columns of one Jost solution at a single node.
pub(crate) type JostColumns = [[C64; 2]; 2];

/// `μ₋` and `μ₊` columns at input node `j0` only (both sweeps stop there).
pub(crate) fn jost_at_node(profile: &ProfileData, z: C64, j0: usize) -> Result<(JostColumns, JostColumns)> {
    let st = Stepper::new(profile, z)?;
    let zero = [C64::new(0.0, 0.0); 2];
    let mut minus = [zero, zero];
    let mut plus = [zero, zero];
    sweep_minus(&st, analytic_columns(z, Side::Minus), j0, |j, a, b| {
        if j == j0 {
            minus = [a, b];
        }
    });
    sweep_plus(&st, analytic_columns(z, Side::Plus), j0, |j, a, b| {
        if j == j0 {
            plus = [a, b];
        }
    });
    Ok((minus, plus))
}
