//! Argument-principle probe for zeros of `a` in the upper half-plane.

use super::data::a_at;
use super::profile::ProfileData;
use crate::error::{IstError, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Rectangle `[−R, R] × [δ, H]` traversed counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeContour {
    pub half_width: f64,
    pub bottom: f64,
    pub top: f64,
    /// Initial samples per edge.
    pub samples_per_edge: usize,
    /// Maximum number of bisections of a single sample interval.
    pub max_refine: u32,
}

impl Default for ProbeContour {
    fn default() -> Self {
        ProbeContour { half_width: 2.5, bottom: 0.1, top: 2.5, samples_per_edge: 64, max_refine: 6 }
    }
}

impl ProbeContour {
    fn corners(&self) -> [C64; 4] {
        [
            C64::new(-self.half_width, self.bottom),
            C64::new(self.half_width, self.bottom),
            C64::new(self.half_width, self.top),
            C64::new(-self.half_width, self.top),
        ]
    }
}

/// Result of a spectrum probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// Zeros of `a` enclosed by the contour.
    pub winding: i64,
    /// Minimum of `|a|` on the real grid (supplied by the caller).
    pub resonance_margin: f64,
    /// Number of evaluations of `a`.
    pub evaluations: usize,
    /// Largest phase increment between accepted samples.
    pub max_increment: f64,
}

fn wrap(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d < -PI {
        d += 2.0 * PI;
    }
    d
}

/// Winding number of `f` around 0 along `contour`.
///
/// Each edge starts with `samples_per_edge` intervals; an interval whose
/// phase increment exceeds `π/4` is bisected (up to `max_refine` times). If an
/// accepted increment still exceeds `π/2` the count is unreliable and a
/// contour-resolution error is returned.
pub fn winding_number(f: &dyn Fn(C64) -> Result<C64>, contour: &ProbeContour) -> Result<(i64, usize, f64)> {
    let corners = contour.corners();
    let mut total = 0.0;
    let mut evals = 0usize;
    let mut max_inc: f64 = 0.0;
    for e in 0..4 {
        let (p0, p1) = (corners[e], corners[(e + 1) % 4]);
        let n = contour.samples_per_edge.max(2);
        let at = |s: f64| p0 + (p1 - p0) * s;
        let mut prev_s = 0.0;
        let mut prev = f(at(0.0))?;
        evals += 1;
        for j in 1..=n {
            let s1 = j as f64 / n as f64;
            // Depth-first bisection of [prev_s, s1].
            let mut stack = vec![(s1, 0u32)];
            while let Some((s, depth)) = stack.pop() {
                let v = f(at(s))?;
                evals += 1;
                if v == C64::new(0.0, 0.0) {
                    return Err(IstError::ContourResolution { increment: PI });
                }
                let d = wrap(v.arg() - prev.arg());
                if d.abs() > PI / 4.0 && depth < contour.max_refine {
                    stack.push((s, depth + 1));
                    stack.push((0.5 * (prev_s + s), depth + 1));
                    continue;
                }
                if d.abs() > PI / 2.0 {
                    return Err(IstError::ContourResolution { increment: d.abs() });
                }
                max_inc = max_inc.max(d.abs());
                total += d;
                prev = v;
                prev_s = s;
            }
        }
    }
    Ok(((total / (2.0 * PI)).round() as i64, evals, max_inc))
}

/// Counts zeros of `a` inside `contour` and reports the real-line margin.
pub fn spectrum_probe(profile: &ProfileData, contour: &ProbeContour, resonance_margin: f64) -> Result<ProbeReport> {
    let f = |z: C64| a_at(profile, z);
    let (winding, evaluations, max_increment) = winding_number(&f, contour)?;
    Ok(ProbeReport { winding, resonance_margin, evaluations, max_increment })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_zero_is_counted() {
        let f = |z: C64| Ok((z - C64::new(0.0, 1.1)) / (z + C64::new(0.0, 1.1)));
        let (w, _, inc) = winding_number(&f, &ProbeContour::default()).unwrap();
        assert_eq!(w, 1);
        assert!(inc <= PI / 4.0 + 1e-12);
        let g = |z: C64| Ok((z - C64::new(0.3, 0.5)) * (z - C64::new(-1.0, 2.0)) / (z + C64::new(0.0, 1.0)).powi(2));
        assert_eq!(winding_number(&g, &ProbeContour::default()).unwrap().0, 2);
        let h = |_z: C64| Ok(C64::new(1.0, 0.0));
        assert_eq!(winding_number(&h, &ProbeContour::default()).unwrap().0, 0);
    }

    #[test]
    fn unresolvable_contour_errors() {
        // exp(400 i z) winds far faster than the refinement can follow.
        let f = |z: C64| Ok((C64::new(0.0, 400.0) * z).exp());
        let c = ProbeContour { samples_per_edge: 4, max_refine: 1, ..ProbeContour::default() };
        assert!(matches!(winding_number(&f, &c), Err(IstError::ContourResolution { .. })));
    }
}
