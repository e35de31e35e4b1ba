use std::collections::BTreeMap;

use super::legendre::{
    legendre_to_monomial_univariate, legendre_values, monomial_to_legendre_univariate,
    product_terms, LegendreFrame,
};
use super::{MultiIndex, Polynomial};
use crate::error::{Error, Result};

/// Polynomial expanded in the tensor orthonormal Legendre basis of a frame:
/// `p(z) = sum_d c_d prod_i L_{d_i}((z_i - lo_i)/w_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreSeries {
    frame: LegendreFrame,
    terms: BTreeMap<MultiIndex, f64>,
}

impl LegendreSeries {
    pub fn zero(frame: LegendreFrame) -> Self {
        LegendreSeries {
            frame,
            terms: BTreeMap::new(),
        }
    }

    /// The single basis element `p_d`.
    pub fn basis_element(frame: LegendreFrame, d: MultiIndex) -> Self {
        let mut s = LegendreSeries::zero(frame);
        s.terms.insert(d, 1.0);
        s
    }

    pub fn from_monomial(poly: &Polynomial, frame: &LegendreFrame) -> Result<Self> {
        if poly.n_vars() != frame.n_vars() {
            return Err(Error::usage("polynomial and frame arity differ"));
        }
        let mut out = LegendreSeries::zero(frame.clone());
        for (m, c) in poly.terms() {
            let factors: Vec<Vec<f64>> = m
                .exponents()
                .iter()
                .enumerate()
                .map(|(v, &e)| monomial_to_legendre_univariate(e as usize, frame.interval(v)))
                .collect();
            for_each_tensor(&factors, |idx, w| out.add_term(MultiIndex::new(idx), c * w));
        }
        Ok(out)
    }

    pub fn frame(&self) -> &LegendreFrame {
        &self.frame
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        *self.terms.entry(m).or_insert(0.0) += c;
    }

    pub fn mul(&self, other: &LegendreSeries) -> LegendreSeries {
        let mut out = LegendreSeries::zero(self.frame.clone());
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let factors: Vec<Vec<(usize, f64)>> = a
                    .exponents()
                    .iter()
                    .zip(b.exponents())
                    .map(|(&i, &j)| product_terms(i as usize, j as usize))
                    .collect();
                for_each_sparse_tensor(&factors, |idx, w| {
                    out.add_term(MultiIndex::new(idx), ca * cb * w)
                });
            }
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.frame.n_vars() {
            return Err(Error::usage("point arity mismatch"));
        }
        let deg = self.degree();
        let tables: Vec<Vec<f64>> = point
            .iter()
            .enumerate()
            .map(|(v, &z)| {
                let mut vals = vec![0.0; deg + 1];
                legendre_values(self.frame.interval(v).to_unit(z), deg, &mut vals);
                vals
            })
            .collect();
        Ok(self
            .terms
            .iter()
            .map(|(m, &c)| {
                c * m
                    .exponents()
                    .iter()
                    .enumerate()
                    .map(|(v, &e)| tables[v][e as usize])
                    .product::<f64>()
            })
            .sum())
    }

    /// Back to monomials. Coefficients grow quickly with degree, so this is
    /// only meant for low-degree output.
    pub fn to_monomial(&self) -> Polynomial {
        let n = self.frame.n_vars();
        let mut out = Polynomial::zero(n);
        for (m, &c) in &self.terms {
            let factors: Vec<Vec<f64>> = m
                .exponents()
                .iter()
                .enumerate()
                .map(|(v, &e)| legendre_to_monomial_univariate(e as usize, self.frame.interval(v)))
                .collect();
            for_each_tensor(&factors, |idx, w| out.add_term(MultiIndex::new(idx), c * w));
        }
        out
    }
}

/// Visit every tensor combination of dense per-variable coefficient vectors.
pub(crate) fn for_each_tensor(factors: &[Vec<f64>], mut f: impl FnMut(Vec<u32>, f64)) {
    let sparse: Vec<Vec<(usize, f64)>> = factors
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(k, &c)| (k, c))
                .collect()
        })
        .collect();
    for_each_sparse_tensor(&sparse, &mut f);
}

pub(crate) fn for_each_sparse_tensor(
    factors: &[Vec<(usize, f64)>],
    mut f: impl FnMut(Vec<u32>, f64),
) {
    if factors.iter().any(|v| v.is_empty()) {
        return;
    }
    let n = factors.len();
    let mut pos = vec![0usize; n];
    loop {
        let mut idx = Vec::with_capacity(n);
        let mut w = 1.0;
        for v in 0..n {
            let (k, c) = factors[v][pos[v]];
            idx.push(k as u32);
            w *= c;
        }
        f(idx, w);
        let mut v = n;
        loop {
            if v == 0 {
                return;
            }
            v -= 1;
            pos[v] += 1;
            if pos[v] < factors[v].len() {
                break;
            }
            pos[v] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_round_trip_and_evaluation() {
        let frame = LegendreFrame::graph_box(1, 2.0).unwrap();
        let p = Polynomial::from_terms(
            2,
            vec![(vec![2, 1], 4.0), (vec![1, 2], -1.0), (vec![0, 0], 0.5)],
        )
        .unwrap();
        let s = LegendreSeries::from_monomial(&p, &frame).unwrap();
        for &(x, y) in &[(0.2, 0.3), (0.9, 1.7), (0.5, 0.0)] {
            let a = p.eval(&[x, y]).unwrap();
            let b = s.eval(&[x, y]).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let back = s.to_monomial();
        for (m, c) in p.terms() {
            assert!((back.coefficient(m) - c).abs() < 1e-11);
        }
    }

    #[test]
    fn product_agrees_with_pointwise_product() {
        let frame = LegendreFrame::graph_box(1, 1.0).unwrap();
        let a = LegendreSeries::basis_element(frame.clone(), MultiIndex::new(vec![3, 2]));
        let b = LegendreSeries::basis_element(frame.clone(), MultiIndex::new(vec![1, 4]));
        let g = LegendreSeries::from_monomial(
            &Polynomial::from_terms(2, vec![(vec![0, 1], 1.0), (vec![0, 2], -1.0)]).unwrap(),
            &frame,
        )
        .unwrap();
        let prod = a.mul(&b).mul(&g);
        for &(x, y) in &[(0.1, 0.2), (0.7, 0.9), (0.33, 0.5)] {
            let want =
                a.eval(&[x, y]).unwrap() * b.eval(&[x, y]).unwrap() * g.eval(&[x, y]).unwrap();
            assert!((prod.eval(&[x, y]).unwrap() - want).abs() < 1e-12);
        }
    }
}
