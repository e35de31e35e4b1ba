//! Infeasible primal-dual interior point method on the reduced problem.
//!
//! Primal: `min c'x, S = C + A(x) PSD`. Dual: `max -<C, X>, A^*(X) = c,
//! X PSD`. Search direction HKM, `dX = sigma mu S^-1 - X - X dS S^-1`,
//! with a Mehrotra predictor-corrector choice of `sigma`.

use nalgebra::{DMatrix, DVector};

use super::problem::{IterRecord, SolverConfig};
use super::reduced::Reduced;
use crate::error::{Error, Result};

const STEP_FRACTION: f64 = 0.98;
const IPM_ITER_CAP: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Exit {
    Converged,
    Infeasible,
    Stalled,
    MaxIter,
}

pub(crate) struct Outcome {
    pub x: DVector<f64>,
    pub dual: Vec<DMatrix<f64>>,
    pub exit: Exit,
    pub iterations: usize,
    pub log: Vec<IterRecord>,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Largest `alpha` with `m + alpha dm` PSD (infinity if unbounded); zero when
/// `m` is not positive definite.
fn max_step(m: &DMatrix<f64>, dm: &DMatrix<f64>) -> f64 {
    let chol = match m.clone().cholesky() {
        Some(c) => c,
        None => return 0.0,
    };
    let l = chol.l();
    let t = match l.solve_lower_triangular(dm) {
        Some(t) => t,
        None => return 0.0,
    };
    let w = match l.solve_lower_triangular(&t.transpose()) {
        Some(w) => w,
        None => return 0.0,
    };
    let lmin = sym(&w).symmetric_eigenvalues().min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| c.inverse())
}

fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(c) = h.clone().cholesky() {
        return Ok(c.solve(rhs));
    }
    let scale = (0..h.nrows())
        .map(|i| h[(i, i)].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut reg = 1e-14 * scale;
    for _ in 0..8 {
        let mut hr = h.clone();
        for i in 0..h.nrows() {
            hr[(i, i)] += reg;
        }
        if let Some(c) = hr.cholesky() {
            return Ok(c.solve(rhs));
        }
        reg *= 100.0;
    }
    h.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Numerical("singular Schur complement".into()))
}

struct Directions {
    dx: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
    dxd: Vec<DMatrix<f64>>,
}

pub(crate) fn solve(red: &Reduced, cfg: &SolverConfig) -> Result<Outcome> {
    let m = red.m;
    let nb = red.blocks.len();
    let dim = red.total_dim().max(1) as f64;
    let loose = red.unconstrained();
    for &i in &loose {
        if red.c[i] != 0.0 {
            return Err(Error::Solver(format!(
                "objective unbounded: free variable {} appears in no block",
                red.free[i]
            )));
        }
    }
    let c_norm = red.c.norm();

    let mut x = DVector::zeros(m);
    let mut s: Vec<DMatrix<f64>> = red
        .blocks
        .iter()
        .map(|b| DMatrix::identity(b.n, b.n))
        .collect();
    let mut xd: Vec<DMatrix<f64>> = s.clone();

    let mut log = Vec::new();
    let mut best: Option<(f64, DVector<f64>, Vec<DMatrix<f64>>)> = None;
    let mut stalls = 0;
    let cap = cfg.max_iter.min(IPM_ITER_CAP);
    let mut it = 0;
    let exit = loop {
        let sx: Vec<DMatrix<f64>> = red.blocks.iter().map(|b| b.eval(&x)).collect();
        let rd: Vec<DMatrix<f64>> = sx.iter().zip(&s).map(|(a, b)| a - b).collect();
        let ax = red.adjoint(&xd);
        let rp = &red.c - &ax;
        let pobj = red.c.dot(&x);
        let dobj = -red
            .blocks
            .iter()
            .zip(&xd)
            .map(|(b, xx)| inner(&b.constant, xx))
            .sum::<f64>();
        let xs: f64 = xd.iter().zip(&s).map(|(a, b)| inner(a, b)).sum();
        let mu = xs / dim;
        // Unscaled, so it bounds the eigenvalue violation of the blocks.
        let pinf = rd
            .iter()
            .zip(&red.blocks)
            .map(|(r, b)| r.norm() / b.scale)
            .fold(0.0, f64::max);
        let dinf = rp.norm() / (1.0 + c_norm);
        let gap = (pobj - dobj).abs().max(xs.abs()) / (1.0 + pobj.abs() + dobj.abs());
        if cfg.log {
            log.push(IterRecord {
                iter: it,
                eq_res: dinf,
                psd_res: pinf,
                gap,
            });
        }
        if !(pinf.is_finite() && dinf.is_finite() && gap.is_finite()) {
            break Exit::Stalled;
        }
        let merit = (pinf / cfg.tol_psd)
            .max(dinf / cfg.tol_eq)
            .max(gap / cfg.tol_gap);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, x.clone(), xd.clone()));
        }
        if pinf <= 0.1 * cfg.tol_psd && dinf <= 0.1 * cfg.tol_eq && gap <= 0.1 * cfg.tol_gap {
            break Exit::Converged;
        }
        if dobj > 1e3 * (1.0 + c_norm) && ax.norm() / dobj < 1e-9 {
            break Exit::Infeasible;
        }
        if pobj < -1e12 && pinf < 1e-6 {
            return Err(Error::Solver("objective unbounded below".into()));
        }
        if it >= cap {
            break Exit::MaxIter;
        }
        it += 1;

        let sinv: Vec<DMatrix<f64>> = match s.iter().map(spd_inverse).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => break Exit::Stalled,
        };
        let mut h = schur(red, &xd, &sinv);
        for &i in &loose {
            h[(i, i)] += 1.0;
        }

        // Predictor.
        let base: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| -&xd[b] - &xd[b] * &rd[b] * &sinv[b])
            .collect();
        let aff = direction(red, &h, &rp, &base, &xd, &rd, &sinv, None)?;
        let ap = (0..nb)
            .map(|b| max_step(&s[b], &aff.ds[b]))
            .fold(1.0, f64::min);
        let ad = (0..nb)
            .map(|b| max_step(&xd[b], &aff.dxd[b]))
            .fold(1.0, f64::min);
        let mu_aff: f64 = (0..nb)
            .map(|b| inner(&(&xd[b] + &aff.dxd[b] * ad), &(&s[b] + &aff.ds[b] * ap)))
            .sum::<f64>()
            / dim;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // Corrector.
        let corr: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| &aff.dxd[b] * &aff.ds[b] * &sinv[b])
            .collect();
        let base: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| &sinv[b] * (sigma * mu) - &xd[b] - &xd[b] * &rd[b] * &sinv[b] - &corr[b])
            .collect();
        let dir = direction(
            red,
            &h,
            &rp,
            &base,
            &xd,
            &rd,
            &sinv,
            Some((sigma * mu, &corr)),
        )?;
        let ap = (0..nb)
            .map(|b| max_step(&s[b], &dir.ds[b]) * STEP_FRACTION)
            .fold(1.0, f64::min);
        let ad = (0..nb)
            .map(|b| max_step(&xd[b], &dir.dxd[b]) * STEP_FRACTION)
            .fold(1.0, f64::min);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break Exit::Stalled;
            }
        } else {
            stalls = 0;
        }
        x += &dir.dx * ap;
        for b in 0..nb {
            s[b] = sym(&(&s[b] + &dir.ds[b] * ap));
            xd[b] = sym(&(&xd[b] + &dir.dxd[b] * ad));
        }
    };
    let (x, dual) = match exit {
        Exit::Converged | Exit::Infeasible => (x, xd),
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

/// `H_ij = tr(A_i X A_j S^-1) = <X A_i, A_j S^-1>`.
fn schur(red: &Reduced, xd: &[DMatrix<f64>], sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(red.m, red.m);
    for (b, blk) in red.blocks.iter().enumerate() {
        let k = blk.vars.len();
        if k == 0 {
            continue;
        }
        let n2 = blk.n * blk.n;
        let mut u = DMatrix::zeros(n2, k);
        let mut v = DMatrix::zeros(n2, k);
        for (col, (_, a)) in blk.vars.iter().enumerate() {
            let xa = a.left_mul(&xd[b]);
            // A S^-1 = (S^-1 A)^T.
            let sa = a.left_mul(&sinv[b]).transpose();
            u.column_mut(col).copy_from_slice(xa.as_slice());
            v.column_mut(col).copy_from_slice(sa.as_slice());
        }
        let hb = u.transpose() * v;
        for (p, (i, _)) in blk.vars.iter().enumerate() {
            for (q, (j, _)) in blk.vars.iter().enumerate() {
                h[(*i, *j)] += 0.5 * (hb[(p, q)] + hb[(q, p)]);
            }
        }
    }
    h
}

#[allow(clippy::too_many_arguments)]
fn direction(
    red: &Reduced,
    h: &DMatrix<f64>,
    rp: &DVector<f64>,
    base: &[DMatrix<f64>],
    xd: &[DMatrix<f64>],
    rd: &[DMatrix<f64>],
    sinv: &[DMatrix<f64>],
    center: Option<(f64, &Vec<DMatrix<f64>>)>,
) -> Result<Directions> {
    let rhs = red.adjoint(base) - rp;
    let dx = solve_spd(h, &rhs)?;
    let mut ds = Vec::with_capacity(red.blocks.len());
    let mut dxd = Vec::with_capacity(red.blocks.len());
    for (b, blk) in red.blocks.iter().enumerate() {
        let dsb = blk.eval_linear(&dx) + &rd[b];
        let mut d = -&xd[b] - &xd[b] * &dsb * &sinv[b];
        if let Some((smu, corr)) = center {
            d += &sinv[b] * smu - &corr[b];
        }
        dxd.push(sym(&d));
        ds.push(dsb);
    }
    Ok(Directions { dx, ds, dxd })
}
