//! Dense conic solver for moment completion problems.

mod admm;
mod ipm;
mod problem;
mod reduced;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use problem::{
    Algorithm, Block, ConicProblem, ConicSolution, IterRecord, Residuals, SolverConfig, Status,
};

use crate::error::{Error, Result};
use crate::momentmodel::{psd_check, MomentSequence};
use ipm::Exit;
use reduced::Reduced;

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().min()
}

pub fn solve(p: &ConicProblem, cfg: &SolverConfig) -> Result<ConicSolution> {
    cfg.validate()?;
    let red = Reduced::new(p, cfg.scaling);
    let finish =
        |values: Vec<f64>, dual: Option<Vec<DMatrix<f64>>>, exit: Exit, iterations, log| {
            finish(p, &red, cfg, values, dual, exit, iterations, log)
        };

    // Blocks without free variables decide feasibility on their own.
    for (b, blk) in red.blocks.iter().enumerate() {
        if blk.vars.is_empty() && min_eigenvalue(&blk.constant) / blk.scale < -cfg.tol_psd {
            let _ = b;
            return finish(red.template.clone(), None, Exit::Infeasible, 0, vec![]);
        }
    }
    if red.m == 0 {
        return finish(red.template.clone(), None, Exit::Converged, 0, vec![]);
    }
    let out = match cfg.algorithm {
        Algorithm::InteriorPoint => ipm::solve(&red, cfg)?,
        Algorithm::Admm => admm::solve(&red, cfg)?,
    };
    let values = red.full_vector(&out.x);
    finish(values, Some(out.dual), out.exit, out.iterations, out.log)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &ConicProblem,
    red: &Reduced,
    cfg: &SolverConfig,
    values: Vec<f64>,
    dual: Option<Vec<DMatrix<f64>>>,
    exit: Exit,
    iterations: usize,
    log: Vec<IterRecord>,
) -> Result<ConicSolution> {
    let eq = eq_residual(p, &values);
    let psd = p
        .blocks()
        .iter()
        .map(|b| min_eigenvalue(&b.pattern.evaluate(&values).to_dmatrix()))
        .fold(f64::INFINITY, f64::min);
    let psd = if psd.is_finite() { psd } else { 0.0 };
    let pobj = p.objective_at(&values);
    let (dobj, dual_res) = match &dual {
        Some(xs) => {
            // Undo block and objective scaling.
            let unscaled: Vec<DMatrix<f64>> = red
                .blocks
                .iter()
                .zip(xs)
                .map(|(b, x)| x * (b.scale * red.obj_scale))
                .collect();
            let d = red.obj_const
                - red
                    .blocks
                    .iter()
                    .zip(&unscaled)
                    .map(|(b, x)| (&b.constant / b.scale).dot(x))
                    .sum::<f64>();
            let c = &red.c * red.obj_scale;
            let ax: nalgebra::DVector<f64> = red.blocks.iter().zip(&unscaled).fold(
                nalgebra::DVector::zeros(red.m),
                |mut acc, (b, x)| {
                    b.adjoint_into(&(x / b.scale), &mut acc);
                    acc
                },
            );
            (d, (&c - ax).norm() / (1.0 + c.norm()))
        }
        None => (pobj, 0.0),
    };
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
    let residuals = Residuals {
        eq,
        psd,
        gap,
        dual: dual_res,
    };
    let status = match exit {
        Exit::Infeasible => Status::Infeasible,
        _ if eq <= cfg.tol_eq
            && psd >= -cfg.tol_psd
            && gap <= cfg.tol_gap
            && dual_res <= 10.0 * cfg.tol_eq =>
        {
            Status::Optimal
        }
        _ => Status::MaxIter,
    };
    Ok(ConicSolution {
        moments: MomentSequence::new(p.kind().clone(), p.n_vars(), p.order(), values)?,
        objective_value: pobj,
        dual_value: dobj,
        status,
        residuals,
        iterations,
        log,
    })
}

fn eq_residual(p: &ConicProblem, values: &[f64]) -> f64 {
    p.fixed()
        .iter()
        .zip(values)
        .filter_map(|(f, v)| f.map(|t| (t - v).abs()))
        .fold(0.0, f64::max)
}

/// Residuals recomputed from the moment vector alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub eq: f64,
    /// Most negative block eigenvalue.
    pub psd: f64,
    pub block_min_eigenvalues: Vec<f64>,
    pub objective: f64,
}

impl VerifyReport {
    pub fn meets(&self, cfg: &SolverConfig) -> bool {
        self.eq <= cfg.tol_eq && self.psd >= -cfg.tol_psd
    }
}

/// Independent re-check of a solution: fixings and block PSD-ness, with the
/// eigenvalues taken from the hand-written QL routine in `momentmodel`.
pub fn verify(sol: &ConicSolution, p: &ConicProblem) -> Result<VerifyReport> {
    if sol.moments.basis() != p.basis() || sol.moments.kind() != p.kind() {
        return Err(Error::usage("solution and problem use different bases"));
    }
    let values = sol.moments.values();
    let mut mins = Vec::new();
    for b in p.blocks() {
        let m = b.pattern.evaluate(values);
        mins.push(psd_check(&m, 0.0)?.min_eigenvalue);
    }
    Ok(VerifyReport {
        eq: eq_residual(p, values),
        psd: mins
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
            .min(f64::MAX),
        block_min_eigenvalues: mins,
        objective: p.objective_at(values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentmodel::{localizing_pattern, order_rows, MomentBasis};
    use crate::polycore::MultiIndex;

    fn toy(fix_one: f64, objective: Vec<f64>) -> ConicProblem {
        let basis = crate::polycore::enumerate_indices(1, 2);
        let pat =
            localizing_pattern(&MomentBasis::Monomial, &basis, None, &order_rows(1, 1)).unwrap();
        ConicProblem::new(
            MomentBasis::Monomial,
            1,
            1,
            objective,
            vec![
                (MultiIndex::new(vec![0]), 1.0),
                (MultiIndex::new(vec![1]), fix_one),
            ],
            vec![Block {
                name: "moment".into(),
                pattern: pat,
            }],
        )
        .unwrap()
    }

    #[test]
    fn rank_one_toy() {
        let p = toy(0.5, vec![0.0, 0.0, 1.0]);
        for alg in [Algorithm::InteriorPoint, Algorithm::Admm] {
            let cfg = SolverConfig {
                algorithm: alg,
                ..Default::default()
            };
            let s = solve(&p, &cfg).unwrap();
            assert_eq!(s.status, Status::Optimal, "{alg:?} {:?}", s.residuals);
            assert!(
                (s.objective_value - 0.25).abs() < 1e-6,
                "{alg:?} {}",
                s.objective_value
            );
            let v = verify(&s, &p).unwrap();
            assert_eq!(v.eq, 0.0);
            assert!(v.psd >= -1e-8);
        }
    }

    #[test]
    fn all_fixed_is_a_feasibility_check() {
        let basis = crate::polycore::enumerate_indices(1, 2);
        let pat =
            localizing_pattern(&MomentBasis::Monomial, &basis, None, &order_rows(1, 1)).unwrap();
        let lebesgue = [1.0, 0.5, 1.0 / 3.0];
        let p = ConicProblem::new(
            MomentBasis::Monomial,
            1,
            1,
            vec![0.0; 3],
            (0..3u32)
                .map(|k| (MultiIndex::new(vec![k]), lebesgue[k as usize]))
                .collect(),
            vec![Block {
                name: "moment".into(),
                pattern: pat,
            }],
        )
        .unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.moments.values(), &lebesgue);
    }

    #[test]
    fn negative_diagonal_is_infeasible() {
        let basis = crate::polycore::enumerate_indices(1, 2);
        let pat =
            localizing_pattern(&MomentBasis::Monomial, &basis, None, &order_rows(1, 1)).unwrap();
        // phi_1 free, phi_2 = -1.
        let p = ConicProblem::new(
            MomentBasis::Monomial,
            1,
            1,
            vec![0.0; 3],
            vec![
                (MultiIndex::new(vec![0]), 1.0),
                (MultiIndex::new(vec![2]), -1.0),
            ],
            vec![Block {
                name: "moment".into(),
                pattern: pat.clone(),
            }],
        )
        .unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, Status::Infeasible);
        // Fully fixed variant.
        let p = toy(0.0, vec![0.0; 3]);
        let p = ConicProblem::new(
            MomentBasis::Monomial,
            1,
            1,
            vec![0.0; 3],
            vec![
                (MultiIndex::new(vec![0]), 1.0),
                (MultiIndex::new(vec![1]), 0.0),
                (MultiIndex::new(vec![2]), -1.0),
            ],
            p.blocks().to_vec(),
        )
        .unwrap();
        assert_eq!(
            solve(&p, &SolverConfig::default()).unwrap().status,
            Status::Infeasible
        );
    }

    #[test]
    fn corrupted_solution_is_caught() {
        let p = toy(0.5, vec![0.0, 0.0, 1.0]);
        let mut s = solve(&p, &SolverConfig::default()).unwrap();
        let mut v = s.moments.values().to_vec();
        v[1] += 0.1;
        s.moments = MomentSequence::new(MomentBasis::Monomial, 1, 1, v).unwrap();
        assert!(verify(&s, &p).unwrap().eq >= 0.1 - 1e-15);
    }

    #[test]
    fn deterministic_iterates() {
        let p = toy(0.3, vec![0.0, 0.0, 1.0]);
        let cfg = SolverConfig {
            log: true,
            ..Default::default()
        };
        let a = solve(&p, &cfg).unwrap();
        let b = solve(&p, &cfg).unwrap();
        assert_eq!(a.moments.values(), b.moments.values());
        assert_eq!(a.log, b.log);
        assert!(a.log_csv().starts_with("iter,eq_res,psd_res,gap\n"));
    }
}
