use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::momentmodel::{MatrixPattern, MomentBasis, MomentSequence};
use crate::polycore::{enumerate_indices, IndexBasis, MultiIndex};

/// One PSD constraint: a linear map from the moment vector to a matrix.
#[derive(Clone, Debug)]
pub struct Block {
    pub name: String,
    pub pattern: MatrixPattern,
}

/// `min <objective, phi>` over moment vectors `phi` (degree `<= 2 order`)
/// with some entries fixed and every block PSD.
#[derive(Clone, Debug)]
pub struct ConicProblem {
    kind: MomentBasis,
    basis: IndexBasis,
    order: usize,
    objective: Vec<f64>,
    fixed: Vec<Option<f64>>,
    blocks: Vec<Block>,
}

impl ConicProblem {
    pub fn new(
        kind: MomentBasis,
        n_vars: usize,
        order: usize,
        objective: Vec<f64>,
        fixings: Vec<(MultiIndex, f64)>,
        blocks: Vec<Block>,
    ) -> Result<Self> {
        let basis = enumerate_indices(n_vars, 2 * order);
        if objective.len() != basis.len() {
            return Err(Error::usage(format!(
                "objective has {} entries, basis has {}",
                objective.len(),
                basis.len()
            )));
        }
        let mut fixed = vec![None; basis.len()];
        for (m, v) in fixings {
            let k = basis
                .position(&m)
                .ok_or_else(|| Error::usage(format!("fixed index {m:?} outside the basis")))?;
            if fixed[k].is_some() {
                return Err(Error::usage(format!("index {m:?} fixed twice")));
            }
            if !v.is_finite() {
                return Err(Error::usage(format!("non-finite fixing at {m:?}")));
            }
            fixed[k] = Some(v);
        }
        if fixed[0].is_none() {
            return Err(Error::usage("the zero index must be fixed"));
        }
        for b in &blocks {
            if b.pattern.var_span() > basis.len() {
                return Err(Error::usage(format!(
                    "block {} references indices outside the basis",
                    b.name
                )));
            }
        }
        Ok(ConicProblem {
            kind,
            basis,
            order,
            objective,
            fixed,
            blocks,
        })
    }

    pub fn kind(&self) -> &MomentBasis {
        &self.kind
    }

    pub fn basis(&self) -> &IndexBasis {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_vars(&self) -> usize {
        self.basis.n_vars()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn fixed(&self) -> &[Option<f64>] {
        &self.fixed
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn n_free(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_none()).count()
    }

    pub fn objective_at(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Same problem with a different objective.
    pub fn with_objective(&self, objective: Vec<f64>) -> Result<Self> {
        if objective.len() != self.basis.len() {
            return Err(Error::usage("objective length mismatch"));
        }
        let mut p = self.clone();
        p.objective = objective;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Primal-dual interior point, HKM direction with Mehrotra correction.
    InteriorPoint,
    /// Operator splitting with PSD projections and adaptive penalty.
    Admm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol_eq: f64,
    pub tol_psd: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Normalize each block and the objective before iterating.
    pub scaling: bool,
    pub algorithm: Algorithm,
    /// Keep a per-iteration log.
    pub log: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_eq: 1e-8,
            tol_psd: 1e-8,
            tol_gap: 1e-7,
            max_iter: 50_000,
            scaling: true,
            algorithm: Algorithm::InteriorPoint,
            log: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_eq > 0.0 && self.tol_psd > 0.0 && self.tol_gap > 0.0) {
            return Err(Error::usage("solver tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::usage("max_iter must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    MaxIter,
    Infeasible,
}

/// `eq`: largest deviation from a fixing. `psd`: most negative block
/// eigenvalue (positive if all blocks are strictly PSD). `gap`: relative
/// primal-dual gap. `dual`: relative dual infeasibility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub eq: f64,
    pub psd: f64,
    pub gap: f64,
    pub dual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub eq_res: f64,
    pub psd_res: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub moments: MomentSequence,
    pub objective_value: f64,
    pub dual_value: f64,
    pub status: Status,
    pub residuals: Residuals,
    pub iterations: usize,
    pub log: Vec<IterRecord>,
}

impl ConicSolution {
    /// `iter,eq_res,psd_res,gap` rows.
    pub fn log_csv(&self) -> String {
        let mut s = String::from("iter,eq_res,psd_res,gap\n");
        for r in &self.log {
            writeln!(s, "{},{:e},{:e},{:e}", r.iter, r.eq_res, r.psd_res, r.gap).unwrap();
        }
        s
    }
}
