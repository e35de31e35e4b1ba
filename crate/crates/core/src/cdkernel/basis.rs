use crate::error::{Error, Result};
use crate::momentmodel::order_rows;
use crate::polycore::{
    legendre_to_monomial_univariate, legendre_values, LegendreFrame, MultiIndex, Polynomial,
};

/// Tensor Legendre polynomials on a box, orthonormal for the uniform
/// probability measure there, graded order.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoBasis {
    frame: LegendreFrame,
    degree: usize,
    indices: Vec<MultiIndex>,
}

/// All tensor Legendre polynomials of total degree `<= r` on `frame`.
pub fn ortho_basis(frame: &LegendreFrame, r: usize) -> OrthoBasis {
    OrthoBasis {
        frame: frame.clone(),
        degree: r,
        indices: order_rows(frame.n_vars(), r),
    }
}

impl OrthoBasis {
    /// Subset of the basis, e.g. `d_y <= 1` rows for indicator graphs.
    pub fn subset(&self, keep: &[usize]) -> Result<OrthoBasis> {
        let mut indices = Vec::with_capacity(keep.len());
        for &k in keep {
            indices.push(
                self.indices
                    .get(k)
                    .cloned()
                    .ok_or_else(|| Error::usage(format!("basis position {k} out of range")))?,
            );
        }
        Ok(OrthoBasis {
            frame: self.frame.clone(),
            degree: self.degree,
            indices,
        })
    }

    pub fn frame(&self) -> &LegendreFrame {
        &self.frame
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Largest exponent of variable `v` in the basis.
    pub fn max_exponent(&self, v: usize) -> usize {
        self.indices
            .iter()
            .map(|d| d.exponents()[v] as usize)
            .max()
            .unwrap_or(0)
    }

    /// Per-variable Legendre values at `point`, up to the basis degree.
    pub(crate) fn univariate_tables(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        if point.len() != self.frame.n_vars() {
            return Err(Error::usage(format!(
                "point has {} coordinates, basis has {} variables",
                point.len(),
                self.frame.n_vars()
            )));
        }
        Ok(point
            .iter()
            .enumerate()
            .map(|(v, &t)| {
                let mut out = vec![0.0; self.degree + 1];
                legendre_values(self.frame.interval(v).to_unit(t), self.degree, &mut out);
                out
            })
            .collect())
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        let tab = self.univariate_tables(point)?;
        Ok(self
            .indices
            .iter()
            .map(|d| {
                d.exponents()
                    .iter()
                    .enumerate()
                    .map(|(v, &e)| tab[v][e as usize])
                    .product()
            })
            .collect())
    }

    /// Each basis polynomial expanded in monomials.
    pub fn monomial_coefficients(&self) -> Vec<Polynomial> {
        let nv = self.frame.n_vars();
        self.indices
            .iter()
            .map(|d| {
                let mut p = Polynomial::constant(nv, 1.0);
                for (v, &e) in d.exponents().iter().enumerate() {
                    let coeffs =
                        legendre_to_monomial_univariate(e as usize, self.frame.interval(v));
                    let mut map = vec![0; 1];
                    map[0] = v;
                    let factor = Polynomial::univariate(&coeffs)
                        .embed(nv, &map)
                        .expect("valid embedding");
                    p = p.mul(&factor).expect("same arity");
                }
                p
            })
            .collect()
    }
}
