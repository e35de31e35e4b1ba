use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::piecewise::{PiecewiseFunction, ReferenceMeasure};
use super::quadrature::{graded_rule, GaussRule, MappedRule};
use crate::error::{Error, Result};
use crate::momentmodel::{KnownMoments, MomentBasis, MomentSequence, MomentSupport};
use crate::polycore::{enumerate_indices, legendre_values, LegendreFrame, MultiIndex, Polynomial};

/// Quadrature settings. Moments are computed with `nodes` points per
/// subinterval and again with `check_nodes`; the largest difference is the
/// reported error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub nodes: usize,
    pub check_nodes: usize,
    pub grading_levels: usize,
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            nodes: 64,
            check_nodes: 80,
            grading_levels: 40,
            tol: 1e-10,
        }
    }
}

/// Full moment vector of a graph measure in both bases.
#[derive(Clone, Debug)]
pub struct GraphMoments {
    pub monomial: MomentSequence,
    pub legendre: MomentSequence,
    pub error_estimate: f64,
}

/// Sample points `(x, weight, f(x))` of `f` against `lambda`.
fn graph_nodes(
    f: &PiecewiseFunction,
    lambda: &ReferenceMeasure,
    n_nodes: usize,
    levels: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let (lo, hi) = lambda.domain();
    let (flo, fhi) = f.domain();
    if lo < flo - 1e-14 || hi > fhi + 1e-14 {
        return Err(Error::usage("function does not cover the measure's domain"));
    }
    let rule = GaussRule::new(n_nodes);
    let bp = f.breakpoints();
    let mut pts = Vec::new();
    for (i, piece) in f.pieces().iter().enumerate() {
        let a = bp[i].max(lo);
        let b = bp[i + 1].min(hi);
        if !(b > a) {
            continue;
        }
        let grade = (piece.singular_at(a), piece.singular_at(b));
        let mapped: MappedRule = if grade.0 || grade.1 {
            graded_rule(&rule, a, b, grade, levels)
        } else {
            rule.on(a, b)
        };
        for (x, w) in mapped.iter() {
            pts.push((x, w * lambda.weight(x), piece.eval(x)));
        }
    }
    Ok(pts)
}

/// Monomial and Legendre moments for every index in `indices` (arity 2).
fn integrate(
    pts: &[(f64, f64, f64)],
    frame: &LegendreFrame,
    indices: &[MultiIndex],
) -> (Vec<f64>, Vec<f64>) {
    let max_x = indices
        .iter()
        .map(|d| d.exponents()[0] as usize)
        .max()
        .unwrap_or(0);
    let max_y = indices
        .iter()
        .map(|d| d.exponents()[1] as usize)
        .max()
        .unwrap_or(0);
    let mut mono = vec![0.0; indices.len()];
    let mut leg = vec![0.0; indices.len()];
    let (ix, iy) = (frame.interval(0), frame.interval(1));
    let mut lx = vec![0.0; max_x + 1];
    let mut ly = vec![0.0; max_y + 1];
    let mut px = vec![0.0; max_x + 1];
    let mut py = vec![0.0; max_y + 1];
    for &(x, w, y) in pts {
        legendre_values(ix.to_unit(x), max_x, &mut lx);
        legendre_values(iy.to_unit(y), max_y, &mut ly);
        px[0] = 1.0;
        for k in 1..=max_x {
            px[k] = px[k - 1] * x;
        }
        py[0] = 1.0;
        for k in 1..=max_y {
            py[k] = py[k - 1] * y;
        }
        for (k, d) in indices.iter().enumerate() {
            let (a, b) = (d.exponents()[0] as usize, d.exponents()[1] as usize);
            mono[k] += w * px[a] * py[b];
            leg[k] += w * lx[a] * ly[b];
        }
    }
    (mono, leg)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Moments `int x^a f(x)^b d lambda` (and their Legendre counterparts on the
/// graph box `[0,1] x [0, gamma]`) for the given indices.
pub fn graph_moments_at(
    f: &PiecewiseFunction,
    lambda: &ReferenceMeasure,
    indices: &[MultiIndex],
    opts: &OracleOptions,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if indices.iter().any(|d| d.arity() != 2) {
        return Err(Error::usage("graph moments are bivariate"));
    }
    let (lo, hi) = lambda.domain();
    if lo < -1e-14 || hi > 1.0 + 1e-14 {
        return Err(Error::usage(
            "measure domain must lie in [0,1]; scale it first",
        ));
    }
    let frame = LegendreFrame::graph_box(1, f.gamma())?;
    let main = graph_nodes(f, lambda, opts.nodes, opts.grading_levels)?;
    let check = graph_nodes(f, lambda, opts.check_nodes, opts.grading_levels)?;
    let (mono, leg) = integrate(&main, &frame, indices);
    let (mono2, leg2) = integrate(&check, &frame, indices);
    let est = max_diff(&mono, &mono2).max(max_diff(&leg, &leg2));
    if est > opts.tol {
        return Err(Error::Accuracy {
            achieved: est,
            requested: opts.tol,
            context: "graph moment quadrature".into(),
        });
    }
    Ok((mono, leg, est))
}

/// All graph moments of degree `<= 2 order`.
pub fn graph_moments(
    f: &PiecewiseFunction,
    lambda: &ReferenceMeasure,
    order: usize,
    opts: &OracleOptions,
) -> Result<GraphMoments> {
    let basis = enumerate_indices(2, 2 * order);
    let (mono, leg, est) = graph_moments_at(f, lambda, basis.indices(), opts)?;
    let frame = LegendreFrame::graph_box(1, f.gamma())?;
    Ok(GraphMoments {
        monomial: MomentSequence::new(MomentBasis::Monomial, 2, order, mono)?,
        legendre: MomentSequence::new(MomentBasis::Legendre(frame), 2, order, leg)?,
        error_estimate: est,
    })
}

/// Graph-linear known moments (`d_y <= 1`, `|d| <= degree_cap`).
pub fn graph_known_moments(
    f: &PiecewiseFunction,
    lambda: &ReferenceMeasure,
    degree_cap: usize,
    opts: &OracleOptions,
) -> Result<KnownMoments> {
    let idx: Vec<MultiIndex> = enumerate_indices(2, degree_cap)
        .iter()
        .filter(|d| MomentSupport::GraphLinear.contains(d))
        .cloned()
        .collect();
    let (mono, leg, est) = graph_moments_at(f, lambda, &idx, opts)?;
    let to_map =
        |v: Vec<f64>| -> BTreeMap<MultiIndex, f64> { idx.iter().cloned().zip(v).collect() };
    Ok(KnownMoments::new(
        1,
        f.gamma(),
        MomentSupport::GraphLinear,
        degree_cap,
        to_map(mono),
    )?
    .with_legendre(to_map(leg))?
    .with_provenance(serde_json::json!({
        "source": "graph-quadrature",
        "nodes": opts.nodes,
        "check_nodes": opts.check_nodes,
        "grading_levels": opts.grading_levels,
        "tol": opts.tol,
        "error_estimate": est,
    })))
}

/// Exact integration for functions whose pieces are all polynomial or
/// constant, used to cross-check the quadrature. Each piece is expanded
/// around its left endpoint before taking powers.
pub fn graph_moments_closed_form(
    f: &PiecewiseFunction,
    lambda: &ReferenceMeasure,
    indices: &[MultiIndex],
) -> Result<Vec<f64>> {
    let (lo, hi) = lambda.domain();
    let bp = f.breakpoints();
    let mut out = vec![0.0; indices.len()];
    for (i, piece) in f.pieces().iter().enumerate() {
        let a = bp[i].max(lo);
        let b = bp[i + 1].min(hi);
        if !(b > a) {
            continue;
        }
        let p = piece
            .as_polynomial()
            .ok_or_else(|| Error::usage("closed form needs polynomial pieces"))?;
        // Local variable t = x - a.
        let shift = |q: &Polynomial| q.affine_substitute(&[a], &[1.0]);
        let p_loc = shift(&p)?;
        let w_loc = shift(lambda.density())?.scale(1.0 / lambda.mass());
        let x_loc = Polynomial::univariate(&[a, 1.0]);
        let h = b - a;
        for (k, d) in indices.iter().enumerate() {
            let integrand = w_loc
                .mul(&x_loc.powi(d.exponents()[0]))?
                .mul(&p_loc.powi(d.exponents()[1]))?;
            out[k] += integrand
                .terms()
                .map(|(m, c)| {
                    let e = m.exponents()[0] as i32 + 1;
                    c * h.powi(e) / e as f64
                })
                .sum::<f64>();
        }
    }
    Ok(out)
}

/// Raw moments `int x^k d lambda` for `k <= degree_cap`.
pub fn marginal_moments(density: &ReferenceMeasure, degree_cap: usize) -> Vec<f64> {
    (0..=degree_cap).map(|k| density.moment(k)).collect()
}

fn legendre_marginal(m: &ReferenceMeasure, iv: crate::polycore::Interval, cap: usize) -> Vec<f64> {
    let deg = m.density().degree() + cap;
    let rule = GaussRule::new((deg / 2 + 2).max(64));
    let (lo, hi) = m.domain();
    let mut out = vec![0.0; cap + 1];
    let mut vals = vec![0.0; cap + 1];
    for (x, w) in rule.on(lo, hi).iter() {
        legendre_values(iv.to_unit(x), cap, &mut vals);
        let wx = w * m.weight(x);
        for k in 0..=cap {
            out[k] += wx * vals[k];
        }
    }
    out
}

/// Marginal known moments of a plan with first marginal `source` on
/// `[0,1]` and second marginal `target` on `[0, gamma]`.
pub fn marginal_known_moments(
    source: &ReferenceMeasure,
    target: &ReferenceMeasure,
    gamma: f64,
    degree_cap: usize,
) -> Result<KnownMoments> {
    let (a, b) = source.domain();
    let (c, d) = target.domain();
    if a < -1e-14 || b > 1.0 + 1e-14 || c < -1e-14 || d > gamma + 1e-14 {
        return Err(Error::usage(
            "marginals must live on [0,1] and [0, gamma]; scale them first",
        ));
    }
    let frame = LegendreFrame::graph_box(1, gamma)?;
    let mx = marginal_moments(source, degree_cap);
    let my = marginal_moments(target, degree_cap);
    let lx = legendre_marginal(source, frame.interval(0), degree_cap);
    let ly = legendre_marginal(target, frame.interval(1), degree_cap);
    let mut mono = BTreeMap::new();
    let mut leg = BTreeMap::new();
    for k in 0..=degree_cap as u32 {
        mono.insert(MultiIndex::new(vec![k, 0]), mx[k as usize]);
        leg.insert(MultiIndex::new(vec![k, 0]), lx[k as usize]);
        if k > 0 {
            mono.insert(MultiIndex::new(vec![0, k]), my[k as usize]);
            leg.insert(MultiIndex::new(vec![0, k]), ly[k as usize]);
        }
    }
    mono.insert(MultiIndex::zero(2), 1.0);
    leg.insert(MultiIndex::zero(2), 1.0);
    Ok(
        KnownMoments::new(1, gamma, MomentSupport::Marginal, degree_cap, mono)?
            .with_legendre(leg)?
            .with_provenance(serde_json::json!({ "source": "marginals" })),
    )
}

/// Finite union of disjoint closed intervals inside `[0,1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        for &(a, b) in &intervals {
            if !(b > a) || a < 0.0 || b > 1.0 {
                return Err(Error::usage(format!("bad interval [{a}, {b}]")));
            }
        }
        if intervals.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::usage("intervals overlap"));
        }
        Ok(IntervalUnion { intervals })
    }

    pub fn empty() -> Self {
        IntervalUnion { intervals: vec![] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| x >= a && x <= b)
    }

    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// `int_K x^k dx`.
    pub fn moment(&self, k: usize) -> f64 {
        let e = k as i32 + 1;
        self.intervals
            .iter()
            .map(|&(a, b)| (b.powi(e) - a.powi(e)) / e as f64)
            .sum()
    }

    /// `int_K L_k(x) dx` for the orthonormal shifted Legendre polynomials on
    /// `[0,1]`, `k <= max_deg`.
    pub fn legendre_integrals(&self, max_deg: usize) -> Vec<f64> {
        let rule = GaussRule::new((max_deg / 2 + 2).max(32));
        let mut out = vec![0.0; max_deg + 1];
        let mut vals = vec![0.0; max_deg + 1];
        for &(a, b) in &self.intervals {
            for (x, w) in rule.on(a, b).iter() {
                legendre_values(x, max_deg, &mut vals);
                for k in 0..=max_deg {
                    out[k] += w * vals[k];
                }
            }
        }
        out
    }

    /// Indicator of the union as a piecewise function on `[0,1]`.
    pub fn indicator(&self) -> PiecewiseFunction {
        use super::piecewise::Piece;
        let mut bp = vec![0.0];
        let mut pieces = Vec::new();
        for &(a, b) in &self.intervals {
            if a > *bp.last().unwrap() {
                pieces.push(Piece::Constant { value: 0.0 });
                bp.push(a);
            }
            pieces.push(Piece::Constant { value: 1.0 });
            bp.push(b);
        }
        if *bp.last().unwrap() < 1.0 {
            pieces.push(Piece::Constant { value: 0.0 });
            bp.push(1.0);
        }
        PiecewiseFunction::new(bp, pieces, 1.0).expect("valid indicator")
    }
}

/// Graph-linear moments of `x -> 1_K(x)` against Lebesgue measure on `[0,1]`:
/// `mu_(d,0) = 1/(d+1)`, `mu_(d,1) = int_K x^d`.
pub fn indicator_moments(k: &IntervalUnion, degree_cap: usize) -> Result<KnownMoments> {
    let ik = k.legendre_integrals(degree_cap);
    let l1 = 3f64.sqrt();
    let mut mono = BTreeMap::new();
    let mut leg = BTreeMap::new();
    for d in 0..=degree_cap as u32 {
        let du = d as usize;
        mono.insert(MultiIndex::new(vec![d, 0]), 1.0 / (du as f64 + 1.0));
        leg.insert(MultiIndex::new(vec![d, 0]), if d == 0 { 1.0 } else { 0.0 });
        if du < degree_cap {
            mono.insert(MultiIndex::new(vec![d, 1]), k.moment(du));
            // L_1(v) = sqrt(3)(2v - 1): -sqrt(3) off K, sqrt(3) on K.
            let a = if d == 0 { 1.0 } else { 0.0 };
            leg.insert(
                MultiIndex::new(vec![d, 1]),
                -l1 * (a - ik[du]) + l1 * ik[du],
            );
        }
    }
    Ok(
        KnownMoments::new(1, 1.0, MomentSupport::GraphLinear, degree_cap, mono)?
            .with_legendre(leg)?
            .with_provenance(serde_json::json!({
                "source": "indicator",
                "intervals": k.intervals(),
            })),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::piecewise::Piece;

    fn unif() -> ReferenceMeasure {
        ReferenceMeasure::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn identity_graph() {
        let f = PiecewiseFunction::polynomial(0.0, 1.0, vec![0.0, 1.0], 1.0).unwrap();
        let g = graph_moments(&f, &unif(), 3, &OracleOptions::default()).unwrap();
        let v = g.monomial.get(&MultiIndex::new(vec![2, 1])).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert!(g.error_estimate < 1e-14);
    }

    #[test]
    fn step_and_zero() {
        let g = graph_moments(
            &PiecewiseFunction::step(),
            &unif(),
            2,
            &OracleOptions::default(),
        )
        .unwrap();
        assert!((g.monomial.get(&MultiIndex::new(vec![0, 1])).unwrap() - 0.5).abs() < 1e-15);
        let z = PiecewiseFunction::constant(0.0, 1.0, 0.0, 1.0).unwrap();
        let g = graph_moments(&z, &unif(), 2, &OracleOptions::default()).unwrap();
        for (d, v) in g.monomial.basis().iter().zip(g.monomial.values()) {
            if d.last() > 0 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn x_marginal_equals_reference_moments() {
        let lam = ReferenceMeasure::new(0.0, 1.0, Polynomial::univariate(&[2.0, -2.0])).unwrap();
        let f = PiecewiseFunction::new(
            vec![0.0, 1.0],
            vec![Piece::SqrtAffine {
                offset: 0.0,
                scale: 1.0,
                radicand: vec![0.0, 2.0, -1.0],
            }],
            1.0,
        )
        .unwrap();
        let g = graph_moments(&f, &lam, 5, &OracleOptions::default()).unwrap();
        for k in 0..=10u32 {
            let v = g.monomial.get(&MultiIndex::new(vec![k, 0])).unwrap();
            assert!((v - lam.moment(k as usize)).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let f = PiecewiseFunction::new(
            vec![0.0, 0.25, 1.0 / 3.0, 1.0],
            vec![
                Piece::Polynomial {
                    coeffs: vec![2.0 / 3.0, 4.0 / 3.0],
                },
                Piece::Polynomial {
                    coeffs: vec![2.0, -4.0],
                },
                Piece::Polynomial {
                    coeffs: vec![1.0, -1.0],
                },
            ],
            1.0,
        )
        .unwrap();
        let idx = enumerate_indices(2, 16).indices().to_vec();
        let (q, _, _) = graph_moments_at(&f, &unif(), &idx, &OracleOptions::default()).unwrap();
        let c = graph_moments_closed_form(&f, &unif(), &idx).unwrap();
        assert!(max_diff(&q, &c) < 1e-12);
    }

    #[test]
    fn marginals() {
        let m = ReferenceMeasure::new(-1.0, 1.0, Polynomial::univariate(&[0.5, -0.5])).unwrap();
        assert!((marginal_moments(&m, 2)[1] + 1.0 / 3.0).abs() < 1e-15);
        let t = ReferenceMeasure::new(-1.0, 1.0, Polynomial::univariate(&[0.5, 0.5])).unwrap();
        assert!((marginal_moments(&t, 2)[1] - 1.0 / 3.0).abs() < 1e-15);
        let k = marginal_known_moments(&unif(), &unif(), 1.0, 6).unwrap();
        assert_eq!(k.value(&MultiIndex::new(vec![0, 3])), Some(0.25));
        let l = k.legendre_moments().unwrap();
        assert!(l[&MultiIndex::new(vec![0, 4])].abs() < 1e-14);
    }

    #[test]
    fn indicator_examples() {
        let k = IntervalUnion::new(vec![(0.2, 0.4), (0.6, 0.8)]).unwrap();
        let km = indicator_moments(&k, 8).unwrap();
        assert!((km.value(&MultiIndex::new(vec![0, 1])).unwrap() - 0.4).abs() < 1e-15);
        // Same data through the generic graph oracle.
        let g = graph_known_moments(&k.indicator(), &unif(), 8, &OracleOptions::default()).unwrap();
        let lg = g.legendre_moments().unwrap();
        let lk = km.legendre_moments().unwrap();
        for (d, v) in km.monomial() {
            assert!((g.value(d).unwrap() - v).abs() < 1e-14);
            assert!((lg[d] - lk[d]).abs() < 1e-13);
        }
        let all = indicator_moments(&IntervalUnion::new(vec![(0.0, 1.0)]).unwrap(), 5).unwrap();
        assert!((all.value(&MultiIndex::new(vec![3, 1])).unwrap() - 0.25).abs() < 1e-15);
        let none = indicator_moments(&IntervalUnion::empty(), 5).unwrap();
        assert_eq!(none.value(&MultiIndex::new(vec![2, 1])), Some(0.0));
        assert!(IntervalUnion::new(vec![(0.1, 0.5), (0.4, 0.6)]).is_err());
    }
}
