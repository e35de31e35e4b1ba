use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::graph::{graph_moments_at, OracleOptions};
use super::piecewise::{Piece, PiecewiseFunction, ReferenceMeasure};
use super::quadrature::{graded_rule, GaussRule};
use crate::error::{Error, Result};
use crate::momentmodel::DomainScaling;
use crate::polycore::{MultiIndex, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportTag {
    /// Quadratic cost on `[-1,1]^2`, source `(1-x)/2`, target `(1+y)/2`.
    ConvexOt,
    /// Cost `(4x - y) x y` between uniform measures on `[0,1]`.
    NonconvexOt,
}

impl FromStr for TransportTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex-ot" => Ok(TransportTag::ConvexOt),
            "nonconvex-ot" => Ok(TransportTag::NonconvexOt),
            other => Err(Error::usage(format!(
                "unknown transport instance '{other}'"
            ))),
        }
    }
}

impl TransportTag {
    pub fn name(&self) -> &'static str {
        match self {
            TransportTag::ConvexOt => "convex-ot",
            TransportTag::NonconvexOt => "nonconvex-ot",
        }
    }
}

/// Analytic optimal cost.
pub fn transport_cost_exact(tag: TransportTag) -> f64 {
    match tag {
        TransportTag::ConvexOt => std::f64::consts::FRAC_PI_2 - 4.0 / 3.0,
        TransportTag::NonconvexOt => 107.0 / 432.0,
    }
}

/// A transport benchmark in normalized coordinates `[0,1] x [0,1]`.
/// `scaling` maps back to the original coordinates; `cost` is already pulled
/// back, so costs are equal in both systems.
#[derive(Clone, Debug)]
pub struct TransportInstance {
    pub tag: TransportTag,
    pub source: ReferenceMeasure,
    pub target: ReferenceMeasure,
    pub cost: Polynomial,
    pub map: PiecewiseFunction,
    pub scaling: DomainScaling,
    pub gamma: f64,
}

pub fn transport_instance(tag: TransportTag) -> Result<TransportInstance> {
    match tag {
        TransportTag::ConvexOt => {
            let scaling = DomainScaling::new(vec![-1.0], vec![1.0], -1.0, 2.0)?;
            let cost = Polynomial::from_terms(
                2,
                vec![(vec![2, 0], 0.5), (vec![1, 1], -1.0), (vec![0, 2], 0.5)],
            )?;
            Ok(TransportInstance {
                tag,
                source: ReferenceMeasure::new(0.0, 1.0, Polynomial::univariate(&[2.0, -2.0]))?,
                target: ReferenceMeasure::new(0.0, 1.0, Polynomial::univariate(&[0.0, 2.0]))?,
                cost: scaling.pull_back(&cost)?,
                map: PiecewiseFunction::new(
                    vec![0.0, 1.0],
                    vec![Piece::SqrtAffine {
                        offset: 0.0,
                        scale: 1.0,
                        radicand: vec![0.0, 2.0, -1.0],
                    }],
                    1.0,
                )?,
                scaling,
                gamma: 1.0,
            })
        }
        TransportTag::NonconvexOt => Ok(TransportInstance {
            tag,
            source: ReferenceMeasure::uniform(0.0, 1.0)?,
            target: ReferenceMeasure::uniform(0.0, 1.0)?,
            cost: Polynomial::from_terms(2, vec![(vec![2, 1], 4.0), (vec![1, 2], -1.0)])?,
            map: PiecewiseFunction::new(
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
            )?,
            scaling: DomainScaling::identity(1),
            gamma: 1.0,
        }),
    }
}

impl TransportInstance {
    /// `int c(x, T(x)) d source`, integrated in normalized coordinates from
    /// the monomial graph moments of the map.
    pub fn map_cost(&self, opts: &OracleOptions) -> Result<f64> {
        let idx: Vec<MultiIndex> = self.cost.terms().map(|(m, _)| m.clone()).collect();
        let (mono, _, _) = graph_moments_at(&self.map, &self.source, &idx, opts)?;
        Ok(self.cost.terms().zip(mono).map(|((_, c), v)| c * v).sum())
    }
}

/// Original-coordinate re-integration of the convex instance, independent of
/// the normalized setup: `int (x - T(x))^2/2 (1-x)/2 dx` over `[-1,1]`.
pub fn convex_cost_original_coordinates() -> f64 {
    let rule = GaussRule::new(64);
    graded_rule(&rule, -1.0, 1.0, (true, false), 40).integrate(|x| {
        let t = -1.0 + ((1.0 + x) * (3.0 - x)).sqrt();
        0.5 * (x - t).powi(2) * (1.0 - x) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags() {
        assert_eq!(
            "convex-ot".parse::<TransportTag>().unwrap(),
            TransportTag::ConvexOt
        );
        assert!("other".parse::<TransportTag>().is_err());
        assert!((transport_cost_exact(TransportTag::ConvexOt) - 0.2374629).abs() < 1e-7);
        assert!((transport_cost_exact(TransportTag::NonconvexOt) - 0.2476851).abs() < 1e-7);
    }

    #[test]
    fn analytic_maps_attain_the_exact_costs() {
        let opts = OracleOptions::default();
        for tag in [TransportTag::ConvexOt, TransportTag::NonconvexOt] {
            let inst = transport_instance(tag).unwrap();
            let c = inst.map_cost(&opts).unwrap();
            assert!((c - transport_cost_exact(tag)).abs() < 1e-8, "{tag:?}: {c}");
        }
        assert!(
            (convex_cost_original_coordinates() - transport_cost_exact(TransportTag::ConvexOt))
                .abs()
                < 1e-8
        );
    }

    #[test]
    fn maps_push_source_to_target() {
        let opts = OracleOptions::default();
        for tag in [TransportTag::ConvexOt, TransportTag::NonconvexOt] {
            let inst = transport_instance(tag).unwrap();
            let idx: Vec<MultiIndex> = (0..=8).map(|k| MultiIndex::new(vec![0, k])).collect();
            let (mono, _, _) = graph_moments_at(&inst.map, &inst.source, &idx, &opts).unwrap();
            for (k, v) in mono.iter().enumerate() {
                assert!((v - inst.target.moment(k)).abs() < 1e-12);
            }
        }
    }
}
