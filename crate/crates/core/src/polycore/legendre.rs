//! Orthonormal shifted Legendre polynomials on intervals.
//!
//! `L_k(u) = sqrt(2k+1) P_k(2u - 1)` is orthonormal on `[0, 1]` with respect to
//! Lebesgue measure. On an interval `[lo, hi]` the polynomial is evaluated at
//! `u = (t - lo) / (hi - lo)`, which makes it orthonormal for the uniform
//! probability measure on that interval.

use serde::{Deserialize, Serialize};

use super::{binomial, Polynomial};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::usage(format!("degenerate interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn to_unit(&self, t: f64) -> f64 {
        (t - self.lo) / self.width()
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        self.lo + self.width() * u
    }
}

/// One interval per variable; the box on which the tensor Legendre basis is
/// orthonormal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendreFrame {
    intervals: Vec<Interval>,
}

impl LegendreFrame {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::usage("frame needs at least one interval"));
        }
        for iv in &intervals {
            Interval::new(iv.lo, iv.hi)?;
        }
        Ok(LegendreFrame { intervals })
    }

    /// `[0,1]^n x [0, gamma]`, the normalized graph box.
    pub fn graph_box(n: usize, gamma: f64) -> Result<Self> {
        let mut iv = vec![Interval::unit(); n];
        iv.push(Interval::new(0.0, gamma)?);
        LegendreFrame::new(iv)
    }

    pub fn n_vars(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval(&self, var: usize) -> Interval {
        self.intervals[var]
    }

    pub fn approx_eq(&self, other: &LegendreFrame) -> bool {
        self.n_vars() == other.n_vars()
            && self.intervals.iter().zip(&other.intervals).all(|(a, b)| {
                (a.lo - b.lo).abs() <= 1e-14 * (1.0 + a.lo.abs())
                    && (a.hi - b.hi).abs() <= 1e-14 * (1.0 + a.hi.abs())
            })
    }
}

/// Fill `out[0..=max_deg]` with `L_k(u)`, `u` in unit coordinates.
pub fn legendre_values(u: f64, max_deg: usize, out: &mut [f64]) {
    let s = 2.0 * u - 1.0;
    let mut p_prev = 1.0;
    out[0] = 1.0;
    if max_deg == 0 {
        return;
    }
    let mut p = s;
    out[1] = 3f64.sqrt() * s;
    for k in 1..max_deg {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * s * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
        out[k + 1] = (2.0 * (kf + 1.0) + 1.0).sqrt() * p;
    }
}

fn half_rising_ratio(k: usize) -> f64 {
    // (1/2)_k / k!
    let mut a = 1.0;
    for l in 1..=k {
        a *= (2 * l - 1) as f64 / (2 * l) as f64;
    }
    a
}

/// Linearization `L_i L_j = sum_k c_k L_k` for the orthonormal family.
///
/// Closed form from the classical Legendre product formula; `k` runs over
/// `|i-j|, |i-j|+2, ..., i+j` and all coefficients are positive.
pub fn product_terms(i: usize, j: usize) -> Vec<(usize, f64)> {
    let m = i.max(j);
    let n = i.min(j);
    let norm_ij = (((2 * i + 1) * (2 * j + 1)) as f64).sqrt();
    (0..=n)
        .map(|r| {
            let k = m + n - 2 * r;
            let a = half_rising_ratio(m - r) * half_rising_ratio(r) * half_rising_ratio(n - r)
                / half_rising_ratio(m + n - r);
            let ratio = (2 * (m + n) - 4 * r + 1) as f64 / (2 * (m + n) - 2 * r + 1) as f64;
            (k, a * ratio * norm_ij / ((2 * k + 1) as f64).sqrt())
        })
        .collect()
}

/// Coefficients `c_j`, `j = 0..=k`, with `t^k = sum_j c_j L_j((t-lo)/w)`.
pub fn monomial_to_legendre_univariate(k: usize, iv: Interval) -> Vec<f64> {
    let w = iv.width();
    let mut out = vec![0.0; k + 1];
    for m in 0..=k {
        // C(k,m) lo^{k-m} w^m u^m
        let scale = binomial(k, m) * iv.lo.powi((k - m) as i32) * w.powi(m as i32);
        if scale == 0.0 {
            continue;
        }
        let mut r = 1.0 / (m + 1) as f64;
        for (j, slot) in out.iter_mut().enumerate().take(m + 1) {
            *slot += scale * r * ((2 * j + 1) as f64).sqrt();
            r *= (m - j) as f64 / (m + j + 2) as f64;
        }
    }
    out
}

/// Ascending monomial coefficients of `L_j((t - lo)/w)` in `t`.
pub fn legendre_to_monomial_univariate(j: usize, iv: Interval) -> Vec<f64> {
    let w = iv.width();
    let norm = ((2 * j + 1) as f64).sqrt();
    // P_j(2u-1) = sum_i (-1)^{j+i} C(j,i) C(j+i,i) u^i
    let u = Polynomial::univariate(&[-iv.lo / w, 1.0 / w]);
    let mut acc = Polynomial::zero(1);
    for i in 0..=j {
        let sign = if (j + i).is_multiple_of(2) { 1.0 } else { -1.0 };
        let c = sign * binomial(j, i) * binomial(j + i, i) * norm;
        acc = acc.add(&u.powi(i as u32).scale(c)).expect("univariate");
    }
    let mut out = vec![0.0; j + 1];
    for (m, c) in acc.terms() {
        out[m.exponents()[0] as usize] = c;
    }
    out
}
