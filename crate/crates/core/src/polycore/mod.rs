//! Multi-indices, graded monomial bases and sparse polynomials over `(x, y)`.
//!
//! The last variable is always the graph coordinate `y`; the first `n` are the
//! domain coordinates `x`.

mod legendre;
pub(crate) mod series;

pub use legendre::{
    legendre_to_monomial_univariate, legendre_values, monomial_to_legendre_univariate,
    product_terms, Interval, LegendreFrame,
};
pub use series::LegendreSeries;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent tuple `(d_x, d_y)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n_vars: usize) -> Self {
        MultiIndex(vec![0; n_vars])
    }

    /// Unit exponent in variable `var`.
    pub fn unit(n_vars: usize, var: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Exponent of the last variable (the graph coordinate).
    pub fn last(&self) -> u32 {
        *self
            .0
            .last()
            .expect("multi-index has at least one variable")
    }

    /// Total degree of all but the last variable.
    pub fn head_degree(&self) -> usize {
        self.0[..self.0.len() - 1].iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.arity() != other.arity() {
            return Err(Error::usage(format!(
                "multi-index arity mismatch: {} vs {}",
                self.arity(),
                other.arity()
            )));
        }
        Ok(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Component-wise doubling, `d -> 2d`.
    pub fn doubled(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|e| 2 * e).collect())
    }

    /// `self <= other` component-wise.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// `index_add` from the moment-matrix formulas.
pub fn index_add(a: &MultiIndex, b: &MultiIndex) -> Result<MultiIndex> {
    a.add(b)
}

/// Binomial coefficient as a float; exact for the ranges used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// All multi-indices of total degree at most `max_deg`, graded lexicographic.
#[derive(Clone)]
pub struct IndexBasis {
    n_vars: usize,
    max_deg: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl fmt::Debug for IndexBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexBasis")
            .field("n_vars", &self.n_vars)
            .field("max_deg", &self.max_deg)
            .field("len", &self.indices.len())
            .finish()
    }
}

impl PartialEq for IndexBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n_vars == other.n_vars && self.max_deg == other.max_deg
    }
}

/// Graded lexicographic enumeration. Within a degree, larger exponents on
/// earlier variables come first, so `(1,0)` precedes `(0,1)`.
pub fn enumerate_indices(n_vars: usize, max_deg: usize) -> IndexBasis {
    assert!(n_vars >= 1, "need at least one variable");
    let mut indices = Vec::new();
    for deg in 0..=max_deg {
        let mut cur = vec![0u32; n_vars];
        push_degree(&mut indices, &mut cur, 0, deg as u32);
    }
    let lookup = indices
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    IndexBasis {
        n_vars,
        max_deg,
        indices,
        lookup,
    }
}

fn push_degree(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, var: usize, remaining: u32) {
    if var + 1 == cur.len() {
        cur[var] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        cur[var] = e;
        push_degree(out, cur, var + 1, remaining - e);
    }
    cur[var] = 0;
}

impl IndexBasis {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn max_deg(&self) -> usize {
        self.max_deg
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, k: usize) -> &MultiIndex {
        &self.indices[k]
    }

    pub fn position(&self, m: &MultiIndex) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    /// Number of indices of degree at most `deg`; a prefix length.
    pub fn prefix_len(&self, deg: usize) -> usize {
        if deg >= self.max_deg {
            return self.len();
        }
        binomial(self.n_vars + deg, self.n_vars) as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }
}

/// Sparse polynomial in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n_vars: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(n_vars: usize) -> Self {
        Polynomial {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(n_vars);
        p.add_term(MultiIndex::zero(n_vars), c);
        p
    }

    /// The coordinate polynomial `z_var`.
    pub fn variable(n_vars: usize, var: usize) -> Self {
        let mut p = Polynomial::zero(n_vars);
        p.add_term(MultiIndex::unit(n_vars, var), 1.0);
        p
    }

    pub fn from_terms(
        n_vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self> {
        let mut p = Polynomial::zero(n_vars);
        for (exp, c) in terms {
            if exp.len() != n_vars {
                return Err(Error::usage(format!(
                    "term exponent has arity {}, polynomial has {} variables",
                    exp.len(),
                    n_vars
                )));
            }
            p.add_term(MultiIndex(exp), c);
        }
        Ok(p)
    }

    /// Univariate polynomial from ascending coefficients.
    pub fn univariate(coeffs: &[f64]) -> Self {
        let mut p = Polynomial::zero(1);
        for (k, &c) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex(vec![k as u32]), c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &MultiIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, m: MultiIndex, c: f64) {
        debug_assert_eq!(m.arity(), self.n_vars);
        let entry = self.terms.entry(m.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree over stored terms; `0` for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// `ceil(deg / 2)`, the half-degree used to size localizing matrices.
    pub fn half_degree(&self) -> usize {
        self.degree().div_ceil(2)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.n_vars {
            return Err(Error::usage(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.n_vars
            )));
        }
        Ok(self
            .terms
            .iter()
            .map(|(m, &c)| {
                c * m
                    .exponents()
                    .iter()
                    .zip(point)
                    .map(|(&e, &z)| z.powi(e as i32))
                    .product::<f64>()
            })
            .sum())
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut out = Polynomial::zero(self.n_vars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                out.add_term(a.add(b)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.n_vars);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), s * c);
        }
        out
    }

    pub fn powi(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.n_vars, 1.0);
        for _ in 0..k {
            out = out.mul(self).expect("same arity");
        }
        out
    }

    /// Re-embed into `n_vars` variables, mapping variable `i` to `map[i]`.
    pub fn embed(&self, n_vars: usize, map: &[usize]) -> Result<Polynomial> {
        if map.len() != self.n_vars || map.iter().any(|&v| v >= n_vars) {
            return Err(Error::usage("invalid variable embedding"));
        }
        let mut out = Polynomial::zero(n_vars);
        for (m, &c) in &self.terms {
            let mut e = vec![0u32; n_vars];
            for (i, &ex) in m.exponents().iter().enumerate() {
                e[map[i]] += ex;
            }
            out.add_term(MultiIndex(e), c);
        }
        Ok(out)
    }

    /// Substitute `z_i -> offset_i + factor_i * z_i` in every variable.
    pub fn affine_substitute(&self, offsets: &[f64], factors: &[f64]) -> Result<Polynomial> {
        if offsets.len() != self.n_vars || factors.len() != self.n_vars {
            return Err(Error::usage("affine substitution arity mismatch"));
        }
        let n = self.n_vars;
        let images: Vec<Polynomial> = (0..n)
            .map(|i| {
                Polynomial::constant(n, offsets[i])
                    .add(&Polynomial::variable(n, i).scale(factors[i]))
                    .expect("same arity")
            })
            .collect();
        let mut out = Polynomial::zero(n);
        for (m, &c) in &self.terms {
            let mut term = Polynomial::constant(n, c);
            for (i, &e) in m.exponents().iter().enumerate() {
                term = term.mul(&images[i].powi(e))?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    fn check_arity(&self, other: &Polynomial) -> Result<()> {
        if self.n_vars != other.n_vars {
            return Err(Error::usage(format!(
                "polynomial arity mismatch: {} vs {}",
                self.n_vars, other.n_vars
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    coef: f64,
}

#[derive(Serialize, Deserialize)]
struct PolynomialJson {
    n_vars: usize,
    terms: Vec<TermJson>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialJson {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| TermJson {
                    exp: m.exponents().to_vec(),
                    coef: c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolynomialJson::deserialize(d)?;
        Polynomial::from_terms(raw.n_vars, raw.terms.into_iter().map(|t| (t.exp, t.coef)))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(exps: &[(u32, u32, f64)]) -> Polynomial {
        Polynomial::from_terms(2, exps.iter().map(|&(a, b, c)| (vec![a, b], c))).unwrap()
    }

    #[test]
    fn enumerate_small_bases() {
        let b = enumerate_indices(2, 1);
        let got: Vec<Vec<u32>> = b.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(enumerate_indices(2, 6).len(), 28);
        assert_eq!(enumerate_indices(3, 2).len(), 10);
    }

    #[test]
    fn degree_two_order_is_graded_lex() {
        let b = enumerate_indices(2, 2);
        let got: Vec<Vec<u32>> = b.iter().skip(3).map(|m| m.exponents().to_vec()).collect();
        assert_eq!(got, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn index_addition() {
        let z = MultiIndex::new(vec![0, 0]);
        let a = MultiIndex::new(vec![2, 1]);
        assert_eq!(index_add(&z, &a).unwrap(), a);
        let s = index_add(&MultiIndex::new(vec![1, 2]), &MultiIndex::new(vec![3, 0])).unwrap();
        assert_eq!(s, MultiIndex::new(vec![4, 2]));
        assert_eq!(s.degree(), 6);
        assert!(index_add(&z, &MultiIndex::new(vec![1])).is_err());
    }

    #[test]
    fn evaluate_constraint_polynomials() {
        // y (gamma - y) with gamma = 1
        let range = xy(&[(0, 1, 1.0), (0, 2, -1.0)]);
        assert!((range.eval(&[0.3, 0.5]).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(
            Polynomial::constant(2, 1.0).eval(&[7.0, -3.0]).unwrap(),
            1.0
        );
        // 2 - |x|^2 at (1,1)
        let ball = xy(&[(0, 0, 2.0), (2, 0, -1.0), (0, 2, -1.0)]);
        assert_eq!(ball.eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert!(ball.eval(&[1.0]).is_err());
    }

    #[test]
    fn multiply_polynomials() {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        assert_eq!(x.mul(&y).unwrap(), xy(&[(1, 1, 1.0)]));
        let cost = xy(&[(1, 0, 4.0), (0, 1, -1.0)])
            .mul(&xy(&[(1, 1, 1.0)]))
            .unwrap();
        assert_eq!(cost, xy(&[(2, 1, 4.0), (1, 2, -1.0)]));
        assert_eq!(cost.degree(), 3);
        let one = Polynomial::constant(2, 1.0);
        assert_eq!(cost.mul(&one).unwrap(), cost);
        assert!(cost.mul(&Polynomial::constant(1, 1.0)).is_err());
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let p = xy(&[(1, 0, 1.0), (1, 0, -1.0), (0, 1, 2.0)]);
        assert_eq!(p.n_terms(), 1);
    }

    #[test]
    fn affine_substitution_matches_evaluation() {
        let p = xy(&[(2, 0, 0.5), (1, 1, -1.0), (0, 2, 0.5)]);
        let q = p.affine_substitute(&[-1.0, -1.0], &[2.0, 2.0]).unwrap();
        for &(u, v) in &[(0.1, 0.7), (0.5, 0.5), (0.9, 0.2)] {
            let direct = p.eval(&[2.0 * u - 1.0, 2.0 * v - 1.0]).unwrap();
            assert!((q.eval(&[u, v]).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = xy(&[(2, 1, 4.0), (1, 2, -1.0)]);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"n_vars\":2"));
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"n_vars": 2, "terms": [{"exp": [1], "coef": 1.0}]}"#;
        assert!(serde_json::from_str::<Polynomial>(bad).is_err());
    }
}
