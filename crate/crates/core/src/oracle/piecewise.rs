use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::Polynomial;

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// One piece of a univariate benchmark function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Piece {
    /// Ascending coefficients.
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `offset + scale * sqrt(radicand(x))`, radicand with ascending
    /// coefficients, nonnegative on the piece.
    SqrtAffine {
        offset: f64,
        scale: f64,
        radicand: Vec<f64>,
    },
    Constant {
        value: f64,
    },
}

impl Piece {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Piece::Polynomial { coeffs } => horner(coeffs, x),
            Piece::SqrtAffine {
                offset,
                scale,
                radicand,
            } => offset + scale * horner(radicand, x).max(0.0).sqrt(),
            Piece::Constant { value } => *value,
        }
    }

    /// Whether the radicand vanishes at `x`, which makes the piece
    /// non-smooth there.
    pub fn singular_at(&self, x: f64) -> bool {
        match self {
            Piece::SqrtAffine { radicand, .. } => horner(radicand, x).abs() < 1e-12,
            _ => false,
        }
    }

    /// Polynomial form, if the piece has one.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        match self {
            Piece::Polynomial { coeffs } => Some(Polynomial::univariate(coeffs)),
            Piece::Constant { value } => Some(Polynomial::constant(1, *value)),
            Piece::SqrtAffine { .. } => None,
        }
    }
}

/// Univariate function defined piecewise on `[breakpoints[0], breakpoints[last]]`
/// with values in `[0, gamma]`. Piece `i` covers `[b_i, b_{i+1})`; the last
/// piece also owns the right endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
    gamma: f64,
}

impl PiecewiseFunction {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Piece>, gamma: f64) -> Result<Self> {
        if pieces.is_empty() || breakpoints.len() != pieces.len() + 1 {
            return Err(Error::usage("need one more breakpoint than pieces"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::usage("breakpoints must be strictly increasing"));
        }
        if !(gamma > 0.0) {
            return Err(Error::usage("gamma must be positive"));
        }
        let f = PiecewiseFunction {
            breakpoints,
            pieces,
            gamma,
        };
        f.check_range()?;
        Ok(f)
    }

    fn check_range(&self) -> Result<()> {
        let slack = 1e-12 * (1.0 + self.gamma);
        for (i, p) in self.pieces.iter().enumerate() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            for k in 0..=200 {
                let x = a + (b - a) * k as f64 / 200.0;
                let v = p.eval(x);
                if !(v >= -slack && v <= self.gamma + slack) {
                    return Err(Error::usage(format!(
                        "piece {i} takes value {v} at {x}, outside [0, {}]",
                        self.gamma
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn constant(lo: f64, hi: f64, value: f64, gamma: f64) -> Result<Self> {
        PiecewiseFunction::new(vec![lo, hi], vec![Piece::Constant { value }], gamma)
    }

    pub fn polynomial(lo: f64, hi: f64, coeffs: Vec<f64>, gamma: f64) -> Result<Self> {
        PiecewiseFunction::new(vec![lo, hi], vec![Piece::Polynomial { coeffs }], gamma)
    }

    /// `0.1` on `[0, 0.5)`, `0.9` on `[0.5, 1]`.
    pub fn step() -> Self {
        PiecewiseFunction::new(
            vec![0.0, 0.5, 1.0],
            vec![
                Piece::Constant { value: 0.1 },
                Piece::Constant { value: 0.9 },
            ],
            1.0,
        )
        .expect("valid step")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::usage(format!("{x} outside [{lo}, {hi}]")));
        }
        let i = self.breakpoints[1..]
            .iter()
            .position(|&b| x < b)
            .unwrap_or(self.pieces.len() - 1);
        Ok(self.pieces[i].eval(x))
    }

    /// Sup norm estimated on a fine grid plus breakpoints.
    pub fn sup_norm(&self) -> f64 {
        let (lo, hi) = self.domain();
        let mut m: f64 = 0.0;
        for k in 0..=4000 {
            let x = lo + (hi - lo) * k as f64 / 4000.0;
            m = m.max(self.eval(x).unwrap().abs());
        }
        m
    }
}

/// Probability measure on `[lo, hi]` with polynomial density
/// `density / mass` with respect to Lebesgue measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeasure {
    lo: f64,
    hi: f64,
    density: Polynomial,
    mass: f64,
}

impl ReferenceMeasure {
    /// `density` is normalized here; it must be nonnegative on `[lo, hi]`.
    pub fn new(lo: f64, hi: f64, density: Polynomial) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::usage("empty measure domain"));
        }
        if density.n_vars() != 1 {
            return Err(Error::usage("density must be univariate"));
        }
        let mass = raw_moment(&density, lo, hi, 0);
        if !(mass > 0.0) {
            return Err(Error::usage("density has no positive mass"));
        }
        for k in 0..=200 {
            let x = lo + (hi - lo) * k as f64 / 200.0;
            if density.eval(&[x])? < -1e-12 * mass {
                return Err(Error::usage(format!("density negative at {x}")));
            }
        }
        Ok(ReferenceMeasure {
            lo,
            hi,
            density,
            mass,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        ReferenceMeasure::new(lo, hi, Polynomial::constant(1, 1.0))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn density(&self) -> &Polynomial {
        &self.density
    }

    /// Normalization constant, `int density`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Normalized density at `x`.
    pub fn weight(&self, x: f64) -> f64 {
        self.density.eval(&[x]).expect("univariate") / self.mass
    }

    /// `int x^k d lambda`, exact up to rounding.
    pub fn moment(&self, k: usize) -> f64 {
        raw_moment(&self.density, self.lo, self.hi, k) / self.mass
    }
}

fn raw_moment(p: &Polynomial, lo: f64, hi: f64, k: usize) -> f64 {
    p.terms()
        .map(|(m, c)| {
            let e = m.exponents()[0] as i32 + k as i32 + 1;
            c * (hi.powi(e) - lo.powi(e)) / e as f64
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_values() {
        let f = PiecewiseFunction::step();
        assert_eq!(f.eval(0.0).unwrap(), 0.1);
        assert_eq!(f.eval(0.4999).unwrap(), 0.1);
        assert_eq!(f.eval(0.5).unwrap(), 0.9);
        assert_eq!(f.eval(1.0).unwrap(), 0.9);
        assert!(f.eval(1.5).is_err());
    }

    #[test]
    fn range_is_enforced() {
        assert!(PiecewiseFunction::constant(0.0, 1.0, 1.5, 1.0).is_err());
        assert!(
            PiecewiseFunction::new(vec![0.0, 0.0], vec![Piece::Constant { value: 0.0 }], 1.0)
                .is_err()
        );
    }

    #[test]
    fn sqrt_piece() {
        let p = Piece::SqrtAffine {
            offset: 0.0,
            scale: 1.0,
            radicand: vec![0.0, 2.0, -1.0],
        };
        assert!((p.eval(0.5) - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(p.singular_at(0.0));
        assert!(!p.singular_at(1.0));
    }

    #[test]
    fn json_round_trip() {
        let f = PiecewiseFunction::step();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"constant\""));
        let back: PiecewiseFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn measure_moments() {
        let m = ReferenceMeasure::new(-1.0, 1.0, Polynomial::univariate(&[0.5, -0.5])).unwrap();
        assert!((m.mass() - 1.0).abs() < 1e-15);
        assert!((m.moment(1) + 1.0 / 3.0).abs() < 1e-15);
        let u = ReferenceMeasure::uniform(0.0, 1.0).unwrap();
        assert!((u.moment(5) - 1.0 / 6.0).abs() < 1e-15);
        assert!(ReferenceMeasure::new(0.0, 1.0, Polynomial::univariate(&[-1.0])).is_err());
    }
}
