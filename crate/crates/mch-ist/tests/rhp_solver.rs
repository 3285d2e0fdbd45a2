//! Riemann–Hilbert solves: trivial data, Neumann vs dense, operator bounds
//! and the reflectionless closure.

mod common;

use common::{gaussian_run, zero_run};
use mch_ist::cauchy::CauchyContext;
use mch_ist::config::ProfileSpec;
use mch_ist::grid::GridConfig;
use mch_ist::grid::SpectralGrid;
use mch_ist::rhp::{
    build_jump, eval_expansions, solve_many, solve_mu, solve_mu_dense, RhpSide, SolveMethod, SolverOptions,
};
use mch_ist::scattering::ScatteringData;
use mch_ist::soliton::{complete_symmetry, solve_reflectionless};
use mch_ist::time_flow::PhaseSpec;
use mch_ist::validate::suite::{check_neumann_vs_dense, soliton_seed};
use mch_ist::validate::ReferenceRun;
use mch_ist::{Exec, Mat2};

#[test]
fn zero_data_give_the_identity() {
    let run = zero_run();
    let jump = build_jump(&run.scattering, run.spectral(), PhaseSpec::new(1.0, 0.5).unwrap(), RhpSide::Left).unwrap();
    assert!(jump.is_trivial());
    let sol = solve_mu(&run.ctx, &jump, &run.opts).unwrap();
    assert_eq!(sol.method, SolveMethod::Trivial);
    let ex = eval_expansions(&run.ctx, &sol, &jump).unwrap();
    assert_eq!(ex.m0, Mat2::identity());
    assert_eq!(ex.mi, Mat2::identity());
    assert_eq!(ex.d, Mat2::zero());
}

#[test]
fn neumann_matches_dense_collocation() {
    for amp in [0.1, 0.2] {
        let r = check_neumann_vs_dense(&ProfileSpec::gaussian(amp), Exec::Parallel);
        assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn solution_satisfies_its_discrete_system_and_bounds() {
    let run = gaussian_run();
    let phases: Vec<PhaseSpec> = [-8.0, -1.0, 0.0, 0.5, 6.0].iter().map(|&y| PhaseSpec::new(y, 0.3).unwrap()).collect();
    for (sol, ex) in solve_many(&run.ctx, &run.scattering, &phases, &run.opts, Exec::Parallel).unwrap() {
        assert!(sol.residual < 1e-12, "residual {}", sol.residual);
        assert!(sol.bounds.mu_bound_holds(), "{:?}", sol.bounds);
        assert!(sol.bounds.m_bound_holds(), "{:?}", sol.bounds);
        assert_eq!(sol.side, RhpSide::for_y(ex.y));
        // det M = 1 at the reconstruction points.
        assert!((ex.m0.det() - 1.0).norm() < 1e-10);
        assert!((ex.mi.det() - 1.0).norm() < 1e-10);
    }
}

#[test]
fn dense_solver_agrees_on_the_right_problem_at_later_time() {
    let cfg = GridConfig { n_k: 256, y_lo: -3.0, y_hi: 3.0, n_y: 17, ..GridConfig::default() };
    let run = ReferenceRun::new(ProfileSpec::gaussian(0.2), &cfg, Exec::Parallel).unwrap();
    let jump = build_jump(&run.scattering, run.spectral(), PhaseSpec::new(-3.0, 0.7).unwrap(), RhpSide::Right).unwrap();
    let a = solve_mu(&run.ctx, &jump, &run.opts).unwrap();
    let b = solve_mu_dense(&run.ctx, &jump, &run.opts).unwrap();
    assert_eq!(b.method, SolveMethod::Dense);
    let ea = eval_expansions(&run.ctx, &a, &jump).unwrap();
    let eb = eval_expansions(&run.ctx, &b, &jump).unwrap();
    assert!((ea.m0 - eb.m0).max_abs() < 1e-10);
    assert!((ea.d - eb.d).max_abs() < 1e-10);
}

#[test]
fn poles_reproduce_the_closed_form_reflectionless_solution() {
    let g = SpectralGrid::new(30.0, 256).unwrap();
    let ctx = CauchyContext::new(&g);
    let discrete = complete_symmetry(&[soliton_seed()]).unwrap();
    let sd = ScatteringData::reflectionless(&g, discrete.clone());
    for (y, t) in [(0.0, 0.0), (0.7, 0.2), (3.0, 1.0)] {
        let jump = build_jump(&sd, &g, PhaseSpec::new(y, t).unwrap(), RhpSide::Left).unwrap();
        let sol = solve_mu(&ctx, &jump, &SolverOptions::default()).unwrap();
        let ex = eval_expansions(&ctx, &sol, &jump).unwrap();
        let closed = solve_reflectionless(&discrete, y, t).unwrap().expansions().unwrap();
        for (a, b) in [(ex.m0, closed.m0), (ex.mi, closed.mi), (ex.mi1, closed.mi1), (ex.d, closed.d)] {
            assert!((a - b).max_abs() < 1e-12, "y = {y}, t = {t}: {a:?} vs {b:?}");
        }
    }
}
