use crate::error::{Error, Result};
use crate::polycore::{
    enumerate_indices, legendre_to_monomial_univariate, monomial_to_legendre_univariate,
    IndexBasis, LegendreFrame, MultiIndex,
};

/// Polynomial basis the functional is evaluated on.
///
/// `Monomial`: `values[d] = L(z^d)`. `Legendre(frame)`: `values[d] = L(p_d)`
/// with `p_d` the tensor orthonormal Legendre polynomial of the frame. The
/// Legendre view is what the solver and the kernel work in; monomial values
/// are derived from it for reporting.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentBasis {
    Monomial,
    Legendre(LegendreFrame),
}

/// Truncated (pseudo-)moment vector `(phi_d)_{|d| <= 2r}`.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    kind: MomentBasis,
    basis: IndexBasis,
    values: Vec<f64>,
    order: usize,
}

impl MomentSequence {
    pub fn new(kind: MomentBasis, n_vars: usize, order: usize, values: Vec<f64>) -> Result<Self> {
        let basis = enumerate_indices(n_vars, 2 * order);
        if values.len() != basis.len() {
            return Err(Error::usage(format!(
                "moment vector has {} entries, order {} in {} variables needs {}",
                values.len(),
                order,
                n_vars,
                basis.len()
            )));
        }
        if let MomentBasis::Legendre(f) = &kind {
            if f.n_vars() != n_vars {
                return Err(Error::usage("frame arity mismatch"));
            }
        }
        Ok(MomentSequence {
            kind,
            basis,
            values,
            order,
        })
    }

    pub fn from_fn(
        kind: MomentBasis,
        n_vars: usize,
        order: usize,
        f: impl Fn(&MultiIndex) -> f64,
    ) -> Self {
        let basis = enumerate_indices(n_vars, 2 * order);
        let values = basis.iter().map(&f).collect();
        MomentSequence {
            kind,
            basis,
            values,
            order,
        }
    }

    pub fn kind(&self) -> &MomentBasis {
        &self.kind
    }

    pub fn basis(&self) -> &IndexBasis {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_vars(&self) -> usize {
        self.basis.n_vars()
    }

    pub fn get(&self, m: &MultiIndex) -> Option<f64> {
        self.basis.position(m).map(|k| self.values[k])
    }

    /// Value of the functional at `1`; the total mass.
    pub fn mass(&self) -> f64 {
        self.values[0]
    }

    /// Drop everything above order `r`.
    pub fn truncate(&self, r: usize) -> Result<MomentSequence> {
        if r > self.order {
            return Err(Error::Degree {
                needed: 2 * r,
                available: 2 * self.order,
            });
        }
        let keep = enumerate_indices(self.n_vars(), 2 * r).len();
        MomentSequence::new(
            self.kind.clone(),
            self.n_vars(),
            r,
            self.values[..keep].to_vec(),
        )
    }

    /// Monomial moments. From the Legendre view each monomial moment is a
    /// positive combination of bounded Legendre moments on `[0, w]` frames, so
    /// this direction is well conditioned.
    pub fn to_monomial(&self) -> Result<MomentSequence> {
        let frame = match &self.kind {
            MomentBasis::Monomial => return Ok(self.clone()),
            MomentBasis::Legendre(f) => f,
        };
        let max = self.basis.max_deg();
        let tables: Vec<Vec<Vec<f64>>> = frame
            .intervals()
            .iter()
            .map(|iv| {
                (0..=max)
                    .map(|k| monomial_to_legendre_univariate(k, *iv))
                    .collect()
            })
            .collect();
        let values = self
            .basis
            .iter()
            .map(|d| {
                let factors: Vec<Vec<f64>> = d
                    .exponents()
                    .iter()
                    .enumerate()
                    .map(|(v, &e)| tables[v][e as usize].clone())
                    .collect();
                let mut acc = 0.0;
                crate::polycore::series::for_each_tensor(&factors, |idx, w| {
                    acc += w * self.values[self.basis.position(&MultiIndex::new(idx)).unwrap()];
                });
                acc
            })
            .collect();
        MomentSequence::new(MomentBasis::Monomial, self.n_vars(), self.order, values)
    }

    /// Legendre moments on `frame`. From monomials this amplifies rounding by
    /// the size of the Legendre coefficients, roughly `10^(0.7 k)` at degree
    /// `k`; prefer generating Legendre moments directly at high degree.
    pub fn to_legendre(&self, frame: &LegendreFrame) -> Result<MomentSequence> {
        match &self.kind {
            MomentBasis::Legendre(f) if f.approx_eq(frame) => return Ok(self.clone()),
            MomentBasis::Legendre(_) => return self.to_monomial()?.to_legendre(frame),
            MomentBasis::Monomial => {}
        }
        if frame.n_vars() != self.n_vars() {
            return Err(Error::usage("frame arity mismatch"));
        }
        let max = self.basis.max_deg();
        let tables: Vec<Vec<Vec<f64>>> = frame
            .intervals()
            .iter()
            .map(|iv| {
                (0..=max)
                    .map(|k| legendre_to_monomial_univariate(k, *iv))
                    .collect()
            })
            .collect();
        let values = self
            .basis
            .iter()
            .map(|j| {
                let factors: Vec<Vec<f64>> = j
                    .exponents()
                    .iter()
                    .enumerate()
                    .map(|(v, &e)| tables[v][e as usize].clone())
                    .collect();
                let mut acc = 0.0;
                crate::polycore::series::for_each_tensor(&factors, |idx, w| {
                    acc += w * self.values[self.basis.position(&MultiIndex::new(idx)).unwrap()];
                });
                acc
            })
            .collect();
        MomentSequence::new(
            MomentBasis::Legendre(frame.clone()),
            self.n_vars(),
            self.order,
            values,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_matches_binomial() {
        let s = MomentSequence::from_fn(MomentBasis::Monomial, 2, 3, |_| 1.0);
        assert_eq!(s.values().len(), 28);
        assert!(MomentSequence::new(MomentBasis::Monomial, 2, 1, vec![1.0; 5]).is_err());
    }

    #[test]
    fn truncation_is_a_prefix() {
        let s = MomentSequence::from_fn(MomentBasis::Monomial, 2, 3, |m| m.degree() as f64);
        let t = s.truncate(1).unwrap();
        assert_eq!(t.values(), &s.values()[..6]);
        assert!(s.truncate(4).is_err());
    }
}
