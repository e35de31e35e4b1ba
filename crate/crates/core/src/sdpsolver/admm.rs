//! ADMM on the reduced problem with over-relaxation and residual balancing.
//!
//! Splitting `S = C + A(x)`, `S` PSD: a least-squares `x` step (the Gram
//! matrix of the `A_i` is factored once), a PSD projection per block and a
//! scaled dual update `U`. The dual matrix is `X = -rho U`.

use nalgebra::{DMatrix, DVector};

use super::ipm::{Exit, Outcome};
use super::problem::{IterRecord, SolverConfig};
use super::reduced::Reduced;
use crate::error::{Error, Result};

const RELAX: f64 = 1.6;

fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = ((m + m.transpose()) * 0.5).symmetric_eigen();
    let mut d = e.eigenvalues.clone();
    for v in d.iter_mut() {
        *v = v.max(0.0);
    }
    &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose()
}

fn gram(red: &Reduced) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(red.m, red.m);
    for blk in &red.blocks {
        for (p, (i, a)) in blk.vars.iter().enumerate() {
            let mut dense = DMatrix::zeros(blk.n, blk.n);
            a.add_to(&mut dense, 1.0);
            for (j, b) in blk.vars.iter().skip(p) {
                let v = b.dot(&dense);
                g[(*i, *j)] += v;
                if i != j {
                    g[(*j, *i)] += v;
                }
            }
        }
    }
    g
}

pub(crate) fn solve(red: &Reduced, cfg: &SolverConfig) -> Result<Outcome> {
    let m = red.m;
    let nb = red.blocks.len();
    let mut g = gram(red);
    for i in red.unconstrained() {
        if red.c[i] != 0.0 {
            return Err(Error::Solver(
                "objective unbounded: variable appears in no block".into(),
            ));
        }
        g[(i, i)] = 1.0;
    }
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::Numerical("block maps are linearly dependent".into()))?;
    let c_norm = red.c.norm();
    let cmax = red
        .blocks
        .iter()
        .map(|b| b.constant.norm())
        .fold(0.0, f64::max);

    let mut rho = 1.0;
    let mut x = DVector::zeros(m);
    let mut s: Vec<DMatrix<f64>> = red
        .blocks
        .iter()
        .map(|b| project_psd(&b.eval(&x)))
        .collect();
    let mut u: Vec<DMatrix<f64>> = red
        .blocks
        .iter()
        .map(|b| DMatrix::zeros(b.n, b.n))
        .collect();
    let mut log = Vec::new();
    let mut best: Option<(f64, DVector<f64>, Vec<DMatrix<f64>>)> = None;
    let mut it = 0;
    let exit = loop {
        // x step: (A^T A) x = -(c / rho + A^*(C - S + U)).
        let w: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| &red.blocks[b].constant - &s[b] + &u[b])
            .collect();
        let rhs = -(&red.c / rho + red.adjoint(&w));
        x = chol.solve(&rhs);
        let s_old = s.clone();
        let mut r_norm = 0.0;
        for b in 0..nb {
            let ax = red.blocks[b].eval(&x);
            let relaxed = &ax * RELAX + &s_old[b] * (1.0 - RELAX);
            let tilde = &relaxed + &u[b];
            s[b] = project_psd(&tilde);
            u[b] = tilde - &s[b];
            r_norm += (&ax - &s[b]).norm_squared();
        }
        let r_norm = r_norm.sqrt();
        let ds: Vec<DMatrix<f64>> = (0..nb).map(|b| &s[b] - &s_old[b]).collect();
        let s_norm = rho * red.adjoint(&ds).norm();
        it += 1;

        let xd: Vec<DMatrix<f64>> = u.iter().map(|m| m * (-rho)).collect();
        let pobj = red.c.dot(&x);
        let dobj = -red
            .blocks
            .iter()
            .zip(&xd)
            .map(|(b, z)| b.constant.dot(z))
            .sum::<f64>();
        let pinf = r_norm / (1.0 + cmax);
        let dinf = (&red.c - red.adjoint(&xd)).norm() / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if cfg.log {
            log.push(IterRecord {
                iter: it,
                eq_res: dinf,
                psd_res: pinf,
                gap,
            });
        }
        if !(pinf.is_finite() && dinf.is_finite()) {
            break Exit::Stalled;
        }
        let merit = (pinf / cfg.tol_psd)
            .max(dinf / cfg.tol_eq)
            .max(gap / cfg.tol_gap);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, x.clone(), xd.clone()));
        }
        if pinf <= 0.1 * cfg.tol_psd && dinf <= cfg.tol_eq && gap <= cfg.tol_gap {
            break Exit::Converged;
        }
        if it >= cfg.max_iter {
            break Exit::MaxIter;
        }
        if it % 10 == 0 {
            let scale = if r_norm > 10.0 * s_norm {
                2.0
            } else if s_norm > 10.0 * r_norm {
                0.5
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                for ub in u.iter_mut() {
                    *ub /= scale;
                }
            }
        }
    };
    let (x, dual) = match exit {
        Exit::Converged => {
            let xd = u.iter().map(|m| m * (-rho)).collect();
            (x, xd)
        }
        _ => {
            let b = best.expect("at least one iterate");
            (b.1, b.2)
        }
    };
    Ok(Outcome {
        x,
        dual,
        exit,
        iterations: it,
        log,
    })
}
