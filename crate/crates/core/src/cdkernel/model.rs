use nalgebra::DMatrix;

use super::basis::OrthoBasis;
use crate::error::{Error, Result};
use crate::momentmodel::{moment_matrix, symmetric_eigen, MomentBasis, MomentSequence, SymMatrix};

/// Relative PSD slack accepted on the input matrix.
pub const PSD_TOL: f64 = 1e-8;

/// `2^(3 - sqrt(r))`.
pub fn default_beta(r: usize) -> f64 {
    2f64.powf(3.0 - (r as f64).sqrt())
}

/// `q(z) = b(z)' (M + beta I)^-1 b(z)`, stored as `q(z) = |W' b(z)|^2`.
#[derive(Clone, Debug)]
pub struct CDModel {
    basis: OrthoBasis,
    beta: f64,
    eigenvalues: Vec<f64>,
    /// `W = V diag((max(lambda, 0) + beta)^-1/2)`.
    factor: DMatrix<f64>,
}

/// Kernel of order `r` from a moment vector of degree `>= 2r`. Monomial or
/// foreign-frame input is moved to the basis frame first.
pub fn cd_polynomial(
    moments: &MomentSequence,
    r: usize,
    beta: f64,
    ortho: &OrthoBasis,
) -> Result<CDModel> {
    if moments.order() < r {
        return Err(Error::Degree {
            needed: 2 * r,
            available: 2 * moments.order(),
        });
    }
    if ortho.degree() != r
        || ortho.len() != crate::momentmodel::order_rows(moments.n_vars(), r).len()
    {
        return Err(Error::usage("basis must be the full basis of degree r"));
    }
    let seq = match moments.kind() {
        MomentBasis::Legendre(f) if f.approx_eq(ortho.frame()) => moments.truncate(r)?,
        _ => moments.truncate(r)?.to_legendre(ortho.frame())?,
    };
    CDModel::from_matrix(ortho.clone(), &moment_matrix(&seq, r)?, beta)
}

impl CDModel {
    /// `m` is the moment matrix in `basis`, rows in basis order.
    pub fn from_matrix(basis: OrthoBasis, m: &SymMatrix, beta: f64) -> Result<CDModel> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::usage(format!("beta must be positive, got {beta}")));
        }
        if m.size() != basis.len() {
            return Err(Error::usage("matrix and basis sizes differ"));
        }
        let eig = symmetric_eigen(m)?;
        let lmin = eig.values.first().copied().unwrap_or(0.0);
        let bound = -10.0 * PSD_TOL * m.frobenius_norm().max(1.0);
        if lmin < bound {
            return Err(Error::data(format!(
                "moment matrix has eigenvalue {lmin:.3e}, below {bound:.3e}; re-verify the completion"
            )));
        }
        let n = m.size();
        let factor = DMatrix::from_fn(n, n, |i, k| {
            eig.vectors[k][i] / (eig.values[k].max(0.0) + beta).sqrt()
        });
        Ok(CDModel {
            basis,
            beta,
            eigenvalues: eig.values,
            factor,
        })
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Ascending eigenvalues of the unregularized matrix.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `trace((M + beta I)^-1 M)`, the integral of `q` against the moments.
    pub fn trace_ratio(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|&l| l.max(0.0) / (l.max(0.0) + self.beta))
            .sum()
    }

    pub fn q(&self, point: &[f64]) -> Result<f64> {
        let b = self.basis.eval(point)?;
        let mut s = 0.0;
        for k in 0..self.factor.ncols() {
            let v: f64 = (0..b.len()).map(|i| self.factor[(i, k)] * b[i]).sum();
            s += v * v;
        }
        Ok(s)
    }

    /// For fixed head coordinates `x`, the quadratic form `K` in the last
    /// variable's Legendre values: `q(x, y) = l(y)' K l(y)`.
    pub(crate) fn slice(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let nv = self.basis.frame().n_vars();
        if x.len() + 1 != nv {
            return Err(Error::usage("slice needs all coordinates but the last"));
        }
        let mut point = x.to_vec();
        point.push(self.basis.frame().interval(nv - 1).lo);
        let tab = self.basis.univariate_tables(&point)?;
        let dy = self.basis.max_exponent(nv - 1);
        let n = self.basis.len();
        let mut u = DMatrix::<f64>::zeros(dy + 1, n);
        for (i, d) in self.basis.indices().iter().enumerate() {
            let e = d.exponents();
            let px: f64 = e[..nv - 1]
                .iter()
                .enumerate()
                .map(|(v, &k)| tab[v][k as usize])
                .product();
            if px == 0.0 {
                continue;
            }
            let j = e[nv - 1] as usize;
            for k in 0..n {
                u[(j, k)] += px * self.factor[(i, k)];
            }
        }
        Ok(&u * u.transpose())
    }
}
