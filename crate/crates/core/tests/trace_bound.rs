//! Finite-order behavior of the trace inequality for the 0.1/0.9 step.
//!
//! At order `r` the moment matrix contains the rows `x^a` (a <= r) and `y`,
//! so PSD-ness only forces `phi_(0,2) >= |P_r f|^2`, the squared norm of the
//! projection of `f` onto polynomials of degree `r`. For the step this is
//! below `int f^2 = 0.41`.

use graphmom::hierarchy::{build_trace_completion, objective_vector};
use graphmom::momentmodel::SemialgebraicSet;
use graphmom::oracle::{graph_known_moments, OracleOptions, PiecewiseFunction, ReferenceMeasure};
use graphmom::polycore::{MultiIndex, Polynomial};
use graphmom::sdpsolver::{solve, verify, SolverConfig, Status};

/// Squared Legendre coefficients of the step on [0, 1] up to degree 3:
/// 1/4, 3 * (0.8 / 4)^2, 0, 7 * (0.8 / 16)^2.
const PROJECTION_NORM_3: f64 = 0.25 + 0.12 + 0.0 + 0.0175;

fn min_y_squared(r: usize) -> f64 {
    let f = PiecewiseFunction::step();
    let lam = ReferenceMeasure::uniform(0.0, 1.0).unwrap();
    let set = SemialgebraicSet::unit_box(1, 1.0).unwrap();
    let known = graph_known_moments(&f, &lam, 2 * r, &OracleOptions::default()).unwrap();
    let y2 = Polynomial::from_terms(2, vec![(vec![0, 2], 1.0)]).unwrap();
    let p = build_trace_completion(&set, &known, 2, r)
        .unwrap()
        .with_objective(objective_vector(&set, &y2, r).unwrap())
        .unwrap();
    let cfg = SolverConfig::default();
    let sol = solve(&p, &cfg).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(verify(&sol, &p).unwrap().meets(&cfg));
    sol.moments
        .to_monomial()
        .unwrap()
        .get(&MultiIndex::new(vec![0, 2]))
        .unwrap()
}

#[test]
fn order_three_minimum_is_the_projection_norm() {
    let m = min_y_squared(3);
    assert!((m - PROJECTION_NORM_3).abs() < 1e-6, "{m}");
    assert!(m < 0.41 - 0.02);
}

#[test]
fn minimum_rises_toward_the_true_moment() {
    let mins: Vec<f64> = (2..=5).map(min_y_squared).collect();
    assert!(mins.windows(2).all(|w| w[1] >= w[0] - 1e-7), "{mins:?}");
    assert!(mins.iter().all(|&m| m < 0.41), "{mins:?}");
}
