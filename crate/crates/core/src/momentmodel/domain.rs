use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{LegendreFrame, MultiIndex, Polynomial};

/// Affine map between original coordinates and the normalized box
/// `[0,1]^n x [0, gamma]`: `x_i = x_lo_i + (x_hi_i - x_lo_i) u_i` and
/// `y = y_offset + y_scale v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainScaling {
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub y_offset: f64,
    pub y_scale: f64,
}

impl DomainScaling {
    pub fn identity(n: usize) -> Self {
        DomainScaling {
            x_lo: vec![0.0; n],
            x_hi: vec![1.0; n],
            y_offset: 0.0,
            y_scale: 1.0,
        }
    }

    pub fn new(x_lo: Vec<f64>, x_hi: Vec<f64>, y_offset: f64, y_scale: f64) -> Result<Self> {
        if x_lo.len() != x_hi.len() || x_lo.is_empty() {
            return Err(Error::usage(
                "scaling bounds must have equal nonzero length",
            ));
        }
        if x_lo.iter().zip(&x_hi).any(|(a, b)| !(b > a)) || !(y_scale > 0.0) {
            return Err(Error::usage(
                "scaling must be orientation preserving and nondegenerate",
            ));
        }
        Ok(DomainScaling {
            x_lo,
            x_hi,
            y_offset,
            y_scale,
        })
    }

    /// Shift for a function with values in `[-bound, bound]`: `f + bound`
    /// is nonnegative and lives in `[0, 2 bound]`.
    pub fn shifted_range(n: usize, bound: f64) -> Result<Self> {
        if !(bound > 0.0) {
            return Err(Error::usage("shift bound must be positive"));
        }
        DomainScaling::new(vec![0.0; n], vec![1.0; n], -bound, 1.0)
    }

    pub fn n(&self) -> usize {
        self.x_lo.len()
    }

    pub fn x_to_scaled(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &t)| (t - self.x_lo[i]) / (self.x_hi[i] - self.x_lo[i]))
            .collect()
    }

    pub fn x_to_original(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, &t)| self.x_lo[i] + (self.x_hi[i] - self.x_lo[i]) * t)
            .collect()
    }

    pub fn y_to_scaled(&self, y: f64) -> f64 {
        (y - self.y_offset) / self.y_scale
    }

    pub fn y_to_original(&self, v: f64) -> f64 {
        self.y_offset + self.y_scale * v
    }

    /// Rewrites a polynomial in original `(x, y)` as one in scaled `(u, v)`.
    pub fn pull_back(&self, p: &Polynomial) -> Result<Polynomial> {
        let n = self.n();
        if p.n_vars() != n + 1 {
            return Err(Error::usage("polynomial must be in n+1 variables"));
        }
        let mut offsets = self.x_lo.clone();
        offsets.push(self.y_offset);
        let mut factors: Vec<f64> = (0..n).map(|i| self.x_hi[i] - self.x_lo[i]).collect();
        factors.push(self.y_scale);
        p.affine_substitute(&offsets, &factors)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// In the `n + 1` graph variables.
    pub poly: Polynomial,
    /// `ceil(deg / 2)`.
    pub half_degree: usize,
}

/// `X x Y` as `{g_j >= 0}` in normalized coordinates, with `Y = [0, gamma]`.
/// The ball constraint `n - |x|^2` and the range constraint `y (gamma - y)`
/// are always appended. Nonnegativity of user constraints on the intended
/// domain is the caller's job.
#[derive(Clone, Debug)]
pub struct SemialgebraicSet {
    n: usize,
    gamma: f64,
    user: Vec<Polynomial>,
    scaling: DomainScaling,
}

impl SemialgebraicSet {
    /// `user` polynomials may be given in the `n` x-variables or in all
    /// `n + 1` variables.
    pub fn new(n: usize, gamma: f64, user: Vec<Polynomial>) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("dimension must be at least 1"));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::usage("gamma must be positive"));
        }
        let map: Vec<usize> = (0..n).collect();
        let user = user
            .into_iter()
            .map(|g| match g.n_vars() {
                k if k == n => g.embed(n + 1, &map),
                k if k == n + 1 => Ok(g),
                _ => Err(Error::usage("constraint arity must be n or n+1")),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SemialgebraicSet {
            n,
            gamma,
            user,
            scaling: DomainScaling::identity(n),
        })
    }

    /// `[0,1]^n x [0, gamma]` described by `x_i (1 - x_i) >= 0`.
    pub fn unit_box(n: usize, gamma: f64) -> Result<Self> {
        let user = (0..n)
            .map(|i| {
                let xi = Polynomial::variable(n, i);
                xi.mul(&Polynomial::constant(n, 1.0).sub(&xi)?)
            })
            .collect::<Result<Vec<_>>>()?;
        SemialgebraicSet::new(n, gamma, user)
    }

    pub fn with_scaling(mut self, scaling: DomainScaling) -> Result<Self> {
        if scaling.n() != self.n {
            return Err(Error::usage("scaling dimension mismatch"));
        }
        self.scaling = scaling;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scaling(&self) -> &DomainScaling {
        &self.scaling
    }

    pub fn frame(&self) -> Result<LegendreFrame> {
        LegendreFrame::graph_box(self.n, self.gamma)
    }

    pub fn user_constraints(&self) -> &[Polynomial] {
        &self.user
    }

    /// User constraints followed by the ball and range constraints.
    pub fn constraints(&self) -> Vec<Constraint> {
        let nv = self.n + 1;
        let mut out: Vec<Constraint> = self
            .user
            .iter()
            .enumerate()
            .map(|(j, g)| Constraint {
                name: format!("g{}", j + 1),
                half_degree: g.half_degree(),
                poly: g.clone(),
            })
            .collect();
        let mut ball = Polynomial::constant(nv, self.n as f64);
        for i in 0..self.n {
            let mut e = vec![0u32; nv];
            e[i] = 2;
            ball.add_term(MultiIndex::new(e), -1.0);
        }
        out.push(Constraint {
            name: "ball".into(),
            half_degree: 1,
            poly: ball,
        });
        let y = Polynomial::variable(nv, self.n);
        let range = y.scale(self.gamma).sub(&y.powi(2)).expect("same arity");
        out.push(Constraint {
            name: "range".into(),
            half_degree: 1,
            poly: range,
        });
        out
    }

    /// `max_j d_j`, at least 1 because of the ball and range constraints.
    pub fn max_half_degree(&self) -> usize {
        self.constraints()
            .iter()
            .map(|c| c.half_degree)
            .max()
            .unwrap_or(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_and_range_are_present() {
        let s = SemialgebraicSet::unit_box(2, 1.0).unwrap();
        let c = s.constraints();
        assert_eq!(c.len(), 4);
        let ball = &c[2].poly;
        assert_eq!(ball.eval(&[1.0, 1.0, 0.3]).unwrap(), 0.0);
        let range = &c[3].poly;
        assert!((range.eval(&[0.3, 0.1, 0.5]).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(s.max_half_degree(), 1);
    }

    #[test]
    fn user_constraint_half_degree() {
        let g = Polynomial::univariate(&[0.0, 0.0, 0.0, 1.0]);
        let s = SemialgebraicSet::new(1, 2.0, vec![g]).unwrap();
        assert_eq!(s.constraints()[0].half_degree, 2);
        assert_eq!(s.constraints()[0].poly.n_vars(), 2);
        assert!(SemialgebraicSet::new(1, 0.0, vec![]).is_err());
    }

    #[test]
    fn scaling_pull_back_preserves_values() {
        let sc = DomainScaling::new(vec![-1.0], vec![1.0], -1.0, 2.0).unwrap();
        let cost = Polynomial::from_terms(
            2,
            vec![(vec![2, 0], 0.5), (vec![1, 1], -1.0), (vec![0, 2], 0.5)],
        )
        .unwrap();
        let scaled = sc.pull_back(&cost).unwrap();
        let (x, y) = (-0.3, 0.8);
        let u = sc.x_to_scaled(&[x])[0];
        let v = sc.y_to_scaled(y);
        assert!((scaled.eval(&[u, v]).unwrap() - cost.eval(&[x, y]).unwrap()).abs() < 1e-15);
        assert!((sc.x_to_original(&[u])[0] - x).abs() < 1e-15);
        assert!((sc.y_to_original(v) - y).abs() < 1e-15);
    }

    #[test]
    fn shift_for_signed_functions() {
        let sc = DomainScaling::shifted_range(1, 2.0).unwrap();
        assert_eq!(sc.y_to_scaled(-2.0), 0.0);
        assert_eq!(sc.y_to_original(4.0), 2.0);
    }
}
