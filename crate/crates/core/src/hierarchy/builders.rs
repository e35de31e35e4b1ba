use crate::error::{Error, Result};
use crate::momentmodel::{
    localizing_pattern, order_rows, KnownMoments, MomentBasis, MomentSupport, SemialgebraicSet,
};
use crate::polycore::{enumerate_indices, LegendreSeries, MultiIndex, Polynomial};
use crate::sdpsolver::{Block, ConicProblem};

use super::theta::ThetaWeights;

/// Moment matrix of order `r` plus one localizing block per constraint, in
/// the Legendre basis of the set's graph box.
pub fn relaxation_blocks(set: &SemialgebraicSet, r: usize) -> Result<Vec<Block>> {
    let nv = set.n() + 1;
    let kind = MomentBasis::Legendre(set.frame()?);
    let basis = enumerate_indices(nv, 2 * r);
    let mut blocks = vec![Block {
        name: "moment".into(),
        pattern: localizing_pattern(&kind, &basis, None, &order_rows(nv, r))?,
    }];
    for c in set.constraints() {
        if c.half_degree > r {
            return Err(Error::usage(format!(
                "order {r} is below the half degree {} of constraint {}",
                c.half_degree, c.name
            )));
        }
        blocks.push(Block {
            name: c.name.clone(),
            pattern: localizing_pattern(
                &kind,
                &basis,
                Some(&c.poly),
                &order_rows(nv, r - c.half_degree),
            )?,
        });
    }
    Ok(blocks)
}

/// Objective vector for `L(p)` in the Legendre basis.
pub fn objective_vector(set: &SemialgebraicSet, p: &Polynomial, r: usize) -> Result<Vec<f64>> {
    let nv = set.n() + 1;
    if p.n_vars() != nv {
        return Err(Error::usage(
            "objective polynomial must be in n+1 variables",
        ));
    }
    if p.degree() > 2 * r {
        return Err(Error::usage(format!(
            "objective degree {} exceeds 2r = {}",
            p.degree(),
            2 * r
        )));
    }
    let basis = enumerate_indices(nv, 2 * r);
    let series = LegendreSeries::from_monomial(p, &set.frame()?)?;
    let mut obj = vec![0.0; basis.len()];
    for (m, c) in series.terms() {
        obj[basis.position(m).expect("degree checked")] += c;
    }
    Ok(obj)
}

fn known_fixings(
    set: &SemialgebraicSet,
    known: &KnownMoments,
    r: usize,
    support: MomentSupport,
) -> Result<Vec<(MultiIndex, f64)>> {
    if known.n() != set.n() || (known.gamma() - set.gamma()).abs() > 1e-12 * set.gamma() {
        return Err(Error::usage(
            "known moments and domain disagree on n or gamma",
        ));
    }
    if known.support() != support {
        return Err(Error::usage(format!("expected {support:?} known moments")));
    }
    if known.degree_cap() < 2 * r {
        return Err(Error::usage(format!(
            "known moments go to degree {}, order {r} needs {}",
            known.degree_cap(),
            2 * r
        )));
    }
    Ok(known
        .legendre_moments()?
        .into_iter()
        .filter(|(d, _)| d.degree() <= 2 * r)
        .collect())
}

fn sum_of_monomials(nv: usize, idx: impl Iterator<Item = (MultiIndex, f64)>) -> Polynomial {
    let mut p = Polynomial::zero(nv);
    for (m, c) in idx {
        p.add_term(m, c);
    }
    p
}

/// Trace objective `T_s(phi) = sum_{|d| <= s} phi_{2d}` with graph-linear
/// fixings, order `r >= max(s, max_j d_j)`.
pub fn build_trace_completion(
    set: &SemialgebraicSet,
    known: &KnownMoments,
    s: usize,
    r: usize,
) -> Result<ConicProblem> {
    if r < s.max(set.max_half_degree()) {
        return Err(Error::usage(format!(
            "order {r} is below max(s, max d_j) = {}",
            s.max(set.max_half_degree())
        )));
    }
    let nv = set.n() + 1;
    let fix = known_fixings(set, known, r, MomentSupport::GraphLinear)?;
    let obj = sum_of_monomials(
        nv,
        enumerate_indices(nv, s).iter().map(|d| (d.doubled(), 1.0)),
    );
    ConicProblem::new(
        MomentBasis::Legendre(set.frame()?),
        nv,
        r,
        objective_vector(set, &obj, r)?,
        fix,
        relaxation_blocks(set, r)?,
    )
}

/// Weighted objective `sum_{|d| <= 2r} theta_d phi_d`.
pub fn build_weighted_completion(
    set: &SemialgebraicSet,
    known: &KnownMoments,
    theta: &ThetaWeights,
    r: usize,
) -> Result<ConicProblem> {
    if r < set.max_half_degree() {
        return Err(Error::usage("order below the constraint half degrees"));
    }
    if theta.n != set.n() {
        return Err(Error::usage("weights built for a different dimension"));
    }
    let nv = set.n() + 1;
    let fix = known_fixings(set, known, r, MomentSupport::GraphLinear)?;
    let obj = sum_of_monomials(
        nv,
        enumerate_indices(nv, 2 * r)
            .iter()
            .map(|d| (d.clone(), theta.weight(d))),
    );
    ConicProblem::new(
        MomentBasis::Legendre(set.frame()?),
        nv,
        r,
        objective_vector(set, &obj, r)?,
        fix,
        relaxation_blocks(set, r)?,
    )
}

/// Minimize `L(cost)` with both marginals fixed.
pub fn build_transport_relaxation(
    set: &SemialgebraicSet,
    cost: &Polynomial,
    marginals: &KnownMoments,
    r: usize,
) -> Result<ConicProblem> {
    if r < set.max_half_degree() {
        return Err(Error::usage("order below the constraint half degrees"));
    }
    let nv = set.n() + 1;
    let fix = known_fixings(set, marginals, r, MomentSupport::Marginal)?;
    ConicProblem::new(
        MomentBasis::Legendre(set.frame()?),
        nv,
        r,
        objective_vector(set, cost, r)?,
        fix,
        relaxation_blocks(set, r)?,
    )
}
