use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{MomentBasis, MomentSequence};
use crate::error::{Error, Result};
use crate::polycore::{enumerate_indices, IndexBasis, LegendreSeries, MultiIndex, Polynomial};

/// Dense symmetric matrix, stored in full row-major form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from the upper triangle of `f`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::usage("matrix rows must be square"));
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::usage("matrix is not symmetric"));
                }
            }
        }
        Ok(SymMatrix::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        SymMatrix::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Row-major CSV dump.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    s.push(',');
                }
                write!(s, "{:e}", self.get(i, j)).unwrap();
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternEntry {
    pub row: usize,
    pub col: usize,
    /// Position in the moment vector.
    pub var: usize,
    pub coef: f64,
}

/// Linear map from a moment vector to a symmetric matrix; only `row <= col`
/// entries are stored.
#[derive(Clone, Debug)]
pub struct MatrixPattern {
    pub size: usize,
    pub entries: Vec<PatternEntry>,
}

impl MatrixPattern {
    pub fn evaluate(&self, values: &[f64]) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.size);
        for e in &self.entries {
            let v = m.get(e.row, e.col) + e.coef * values[e.var];
            m.set(e.row, e.col, v);
        }
        m
    }

    /// Largest referenced variable position plus one.
    pub fn var_span(&self) -> usize {
        self.entries.iter().map(|e| e.var + 1).max().unwrap_or(0)
    }
}

/// Pattern of the localizing matrix of `g` with rows and columns indexed by
/// `rows`; `g = None` gives the moment matrix. Entry `(a, b)` is the
/// functional applied to `g * b_a * b_b`, where `b_a` is the basis element of
/// the moment basis (a monomial or a tensor Legendre polynomial).
pub fn localizing_pattern(
    kind: &MomentBasis,
    moments: &IndexBasis,
    g: Option<&Polynomial>,
    rows: &[MultiIndex],
) -> Result<MatrixPattern> {
    let n_vars = moments.n_vars();
    let max_row = rows.iter().map(|m| m.degree()).max().unwrap_or(0);
    let g_deg = g.map(|p| p.degree()).unwrap_or(0);
    let needed = 2 * max_row + g_deg;
    if needed > moments.max_deg() {
        return Err(Error::Degree {
            needed,
            available: moments.max_deg(),
        });
    }
    if let Some(p) = g {
        if p.n_vars() != n_vars {
            return Err(Error::usage("constraint polynomial arity mismatch"));
        }
    }
    let lookup = |m: &MultiIndex| -> Result<usize> {
        moments.position(m).ok_or(Error::Degree {
            needed: m.degree(),
            available: moments.max_deg(),
        })
    };
    let mut entries = Vec::new();
    match kind {
        MomentBasis::Monomial => {
            let one = Polynomial::constant(n_vars, 1.0);
            let g = g.unwrap_or(&one);
            for (i, a) in rows.iter().enumerate() {
                for (j, b) in rows.iter().enumerate().skip(i) {
                    let ab = a.add(b)?;
                    for (e, c) in g.terms() {
                        entries.push(PatternEntry {
                            row: i,
                            col: j,
                            var: lookup(&ab.add(e)?)?,
                            coef: c,
                        });
                    }
                }
            }
        }
        MomentBasis::Legendre(frame) => {
            if frame.n_vars() != n_vars {
                return Err(Error::usage("frame arity mismatch"));
            }
            let gs = match g {
                Some(p) => Some(LegendreSeries::from_monomial(p, frame)?),
                None => None,
            };
            let elems: Vec<LegendreSeries> = rows
                .iter()
                .map(|m| LegendreSeries::basis_element(frame.clone(), m.clone()))
                .collect();
            for i in 0..rows.len() {
                for j in i..rows.len() {
                    let mut prod = elems[i].mul(&elems[j]);
                    if let Some(gs) = &gs {
                        prod = prod.mul(gs);
                    }
                    let mut acc: HashMap<usize, f64> = HashMap::new();
                    for (m, c) in prod.terms() {
                        *acc.entry(lookup(m)?).or_insert(0.0) += c;
                    }
                    let mut row: Vec<(usize, f64)> =
                        acc.into_iter().filter(|(_, c)| c.abs() > 1e-15).collect();
                    row.sort_by_key(|t| t.0);
                    entries.extend(row.into_iter().map(|(var, coef)| PatternEntry {
                        row: i,
                        col: j,
                        var,
                        coef,
                    }));
                }
            }
        }
    }
    Ok(MatrixPattern {
        size: rows.len(),
        entries,
    })
}

/// Row indices of order `t` in `n_vars` variables.
pub fn order_rows(n_vars: usize, t: usize) -> Vec<MultiIndex> {
    enumerate_indices(n_vars, t).indices().to_vec()
}

/// `M_r(seq)`; entry `(a,b)` is `seq[a+b]` in the monomial basis.
pub fn moment_matrix(seq: &MomentSequence, r: usize) -> Result<SymMatrix> {
    let rows = order_rows(seq.n_vars(), r);
    Ok(localizing_pattern(seq.kind(), seq.basis(), None, &rows)?.evaluate(seq.values()))
}

/// `M_t(g seq)`; entry `(a,b)` is `sum_e g_e seq[e+a+b]` in the monomial basis.
pub fn localizing_matrix(seq: &MomentSequence, g: &Polynomial, t: usize) -> Result<SymMatrix> {
    let rows = order_rows(seq.n_vars(), t);
    Ok(localizing_pattern(seq.kind(), seq.basis(), Some(g), &rows)?.evaluate(seq.values()))
}
