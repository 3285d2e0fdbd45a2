//! Helpers shared by the integration tests.
#![allow(dead_code)]

use mch_ist::config::ProfileSpec;
use mch_ist::grid::GridConfig;
use mch_ist::validate::ReferenceRun;
use mch_ist::Exec;
use std::sync::OnceLock;

/// Dawson's integral `D(x) = e^{−x²} ∫₀ˣ e^{t²} dt` by composite Simpson.
pub fn dawson(x: f64) -> f64 {
    let n = 40_000;
    let h = x / n as f64;
    let f = |t: f64| (t * t - x * x).exp();
    let mut s = f(0.0) + f(x);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

/// `w(i) = e·erfc(1)` (Faddeeva function at `i`).
pub const FADDEEVA_AT_I: f64 = 0.427_583_576_155_807;

/// Forward run of `0.1 exp(−x²)` on the default grids, computed once per
/// test binary.
pub fn gaussian_run() -> &'static ReferenceRun {
    static RUN: OnceLock<ReferenceRun> = OnceLock::new();
    RUN.get_or_init(|| ReferenceRun::new(ProfileSpec::gaussian(0.1), &GridConfig::default(), Exec::Parallel).unwrap())
}

/// Forward run of the zero profile on the default grids.
pub fn zero_run() -> &'static ReferenceRun {
    static RUN: OnceLock<ReferenceRun> = OnceLock::new();
    RUN.get_or_init(|| ReferenceRun::new(ProfileSpec::zero(), &GridConfig::default(), Exec::Parallel).unwrap())
}

pub fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, x| a.max(x.abs()))
}
