use serde::{Deserialize, Serialize};

use super::model::CDModel;
use crate::error::{Error, Result};
use crate::oracle::PiecewiseFunction;
use crate::polycore::legendre_values;

/// Relative slack under which two grid values of `q` count as tied.
const TIE_TOL: f64 = 1e-12;

pub const DEFAULT_Y_POINTS: usize = 1001;
pub const DEFAULT_X_POINTS: usize = 501;

/// `n` equispaced points from `lo` to `hi`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `f_r` on an x grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledGraph {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SampledGraph {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,f_r\n");
        for (x, y) in self.x.iter().zip(&self.y) {
            s.push_str(&format!("{x:.6},{y:.8}\n"));
        }
        s
    }

    /// Apply a coordinate change to both axes.
    pub fn map(&self, fx: impl Fn(f64) -> f64, fy: impl Fn(f64) -> f64) -> SampledGraph {
        SampledGraph {
            x: self.x.iter().map(|&v| fx(v)).collect(),
            y: self.y.iter().map(|&v| fy(v)).collect(),
        }
    }
}

fn legendre_rows(model: &CDModel, ys: &[f64]) -> Vec<Vec<f64>> {
    let nv = model.basis().frame().n_vars();
    let iv = model.basis().frame().interval(nv - 1);
    let dy = model.basis().max_exponent(nv - 1);
    ys.iter()
        .map(|&y| {
            let mut l = vec![0.0; dy.max(1) + 1];
            legendre_values(iv.to_unit(y), dy.max(1), &mut l);
            l.truncate(dy + 1);
            l
        })
        .collect()
}

fn check_grid(model: &CDModel, ys: &[f64]) -> Result<()> {
    if ys.is_empty() {
        return Err(Error::usage("empty y grid"));
    }
    if ys.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::usage("y grid must be strictly increasing"));
    }
    let nv = model.basis().frame().n_vars();
    let iv = model.basis().frame().interval(nv - 1);
    let slack = 1e-9 * iv.width();
    if ys[0] < iv.lo - slack || ys[ys.len() - 1] > iv.hi + slack {
        return Err(Error::usage("y grid leaves the range box"));
    }
    Ok(())
}

/// `q(x, y)` for every `y` in the grid.
pub fn q_on_column(model: &CDModel, x: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    let k = model.slice(x)?;
    Ok(legendre_rows(model, ys)
        .iter()
        .map(|l| {
            let kl = &k * nalgebra::DVector::from_column_slice(l);
            l.iter().zip(kl.iter()).map(|(a, b)| a * b).sum()
        })
        .collect())
}

/// Smallest grid argmin of `q` (ties to the smaller `y`) followed by one
/// parabolic step, kept within half a cell of the grid point.
pub fn argmin_smallest(ys: &[f64], q: &[f64]) -> f64 {
    let qmin = q.iter().copied().fold(f64::INFINITY, f64::min);
    let thresh = qmin + TIE_TOL * qmin.abs().max(f64::MIN_POSITIVE);
    let j = q.iter().position(|&v| v <= thresh).unwrap_or(0);
    if j == 0 || j + 1 >= ys.len() {
        return ys[j];
    }
    let (y0, y1, y2) = (ys[j - 1], ys[j], ys[j + 1]);
    let (q0, q1, q2) = (q[j - 1], q[j], q[j + 1]);
    let num = (y1 - y0).powi(2) * (q1 - q2) - (y1 - y2).powi(2) * (q1 - q0);
    let den = (y1 - y0) * (q1 - q2) - (y1 - y2) * (q1 - q0);
    // den < 0 for a convex three-point fit.
    if !(den < 0.0) || !num.is_finite() {
        return y1;
    }
    let v = y1 - 0.5 * num / den;
    v.clamp(0.5 * (y0 + y1), 0.5 * (y1 + y2))
}

/// `f_r` at each head point (coordinates of `x`, in the basis frame).
pub fn extract_graph_points(model: &CDModel, xs: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::usage("empty x grid"));
    }
    check_grid(model, ys)?;
    let rows = legendre_rows(model, ys);
    let mut out = Vec::with_capacity(xs.len());
    let mut q = vec![0.0; ys.len()];
    for x in xs {
        let k = model.slice(x)?;
        let m = k.nrows();
        for (qv, l) in q.iter_mut().zip(&rows) {
            let mut s = 0.0;
            for a in 0..m {
                let mut t = 0.0;
                for b in 0..m {
                    t += k[(a, b)] * l[b];
                }
                s += l[a] * t;
            }
            *qv = s;
        }
        out.push(argmin_smallest(ys, &q));
    }
    Ok(out)
}

/// One-dimensional `x` grid version.
pub fn extract_graph(model: &CDModel, x_grid: &[f64], y_grid: &[f64]) -> Result<SampledGraph> {
    if model.basis().frame().n_vars() != 2 {
        return Err(Error::usage(
            "extract_graph takes scalar x; use extract_graph_points",
        ));
    }
    let iv = model.basis().frame().interval(0);
    let slack = 1e-9 * iv.width();
    if x_grid
        .iter()
        .any(|&x| x < iv.lo - slack || x > iv.hi + slack)
    {
        return Err(Error::usage("x grid leaves the domain box"));
    }
    let pts: Vec<Vec<f64>> = x_grid.iter().map(|&x| vec![x]).collect();
    Ok(SampledGraph {
        x: x_grid.to_vec(),
        y: extract_graph_points(model, &pts, y_grid)?,
    })
}

/// Trapezoid-rule `L1` distance between the samples and `f`.
pub fn l1_error(fr: &SampledGraph, f: &PiecewiseFunction) -> Result<f64> {
    if fr.x.len() != fr.y.len() || fr.x.len() < 2 {
        return Err(Error::usage(
            "sampled graph needs matching x and y of length >= 2",
        ));
    }
    if fr.x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::usage("x grid must be strictly increasing"));
    }
    let (lo, hi) = f.domain();
    let slack = 1e-12 * (hi - lo);
    if fr.x[0] < lo - slack || fr.x[fr.x.len() - 1] > hi + slack {
        return Err(Error::usage("x grid leaves the domain of f"));
    }
    let mut d = Vec::with_capacity(fr.x.len());
    for (&x, &y) in fr.x.iter().zip(&fr.y) {
        d.push((y - f.eval(x.clamp(lo, hi))?).abs());
    }
    Ok(fr
        .x
        .windows(2)
        .zip(d.windows(2))
        .map(|(x, e)| 0.5 * (x[1] - x[0]) * (e[0] + e[1]))
        .sum())
}

/// Largest pointwise deviation from `f`.
pub fn max_error(fr: &SampledGraph, f: &PiecewiseFunction) -> Result<f64> {
    let (lo, hi) = f.domain();
    let mut m: f64 = 0.0;
    for (&x, &y) in fr.x.iter().zip(&fr.y) {
        m = m.max((y - f.eval(x.clamp(lo, hi))?).abs());
    }
    Ok(m)
}

/// Dense `x, y, log10 q` table for level-set plots.
pub fn level_set_csv(model: &CDModel, xs: &[f64], ys: &[f64]) -> Result<String> {
    let grid = level_set_grid(model, xs, ys)?;
    let mut s = String::from("x,y,log10_q\n");
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            s.push_str(&format!("{x:.6},{y:.6},{:.6}\n", grid[i][j]));
        }
    }
    Ok(s)
}

/// `log10 q` on a grid, `[x][y]`.
pub fn level_set_grid(model: &CDModel, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_grid(model, ys)?;
    xs.iter()
        .map(|&x| {
            Ok(q_on_column(model, &[x], ys)?
                .into_iter()
                .map(|v| v.max(1e-300).log10())
                .collect())
        })
        .collect()
}
