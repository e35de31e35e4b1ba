//! The problem restricted to its free variables:
//! `min c'x  s.t.  S_b(x) = C_b + sum_i x_i A_{b,i}  PSD` for every block.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::problem::ConicProblem;

/// Symmetric sparse matrix given by its upper triangle.
#[derive(Clone, Debug, Default)]
pub(crate) struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn add_to(&self, m: &mut DMatrix<f64>, s: f64) {
        for &(r, c, v) in &self.entries {
            m[(r, c)] += s * v;
            if r != c {
                m[(c, r)] += s * v;
            }
        }
    }

    /// `<A, M>` for symmetric `M`.
    pub fn dot(&self, m: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| {
                if r == c {
                    v * m[(r, c)]
                } else {
                    v * (m[(r, c)] + m[(c, r)])
                }
            })
            .sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| if r == c { v * v } else { 2.0 * v * v })
            .sum()
    }

    /// `M A` as a dense matrix.
    pub fn left_mul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        let mut out = DMatrix::zeros(n, n);
        for &(r, c, v) in &self.entries {
            // (M A)[:, c] += M[:, r] v and, off the diagonal, (M A)[:, r] += M[:, c] v.
            for i in 0..n {
                out[(i, c)] += m[(i, r)] * v;
            }
            if r != c {
                for i in 0..n {
                    out[(i, r)] += m[(i, c)] * v;
                }
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for e in &mut self.entries {
            e.2 *= s;
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ReducedBlock {
    pub n: usize,
    pub constant: DMatrix<f64>,
    /// `(free variable, A_i)`.
    pub vars: Vec<(usize, SparseSym)>,
    /// Block was multiplied by this factor.
    pub scale: f64,
}

impl ReducedBlock {
    pub fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = self.constant.clone();
        for (i, a) in &self.vars {
            a.add_to(&mut m, x[*i]);
        }
        m
    }

    pub fn eval_linear(&self, dx: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, a) in &self.vars {
            a.add_to(&mut m, dx[*i]);
        }
        m
    }

    /// Adds `A^*(M)` into `out`.
    pub fn adjoint_into(&self, m: &DMatrix<f64>, out: &mut DVector<f64>) {
        for (i, a) in &self.vars {
            out[*i] += a.dot(m);
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Reduced {
    pub m: usize,
    /// Basis position of each free variable.
    pub free: Vec<usize>,
    /// Objective over free variables, divided by `obj_scale`.
    pub c: DVector<f64>,
    pub obj_scale: f64,
    /// Objective contribution of the fixed entries (unscaled).
    pub obj_const: f64,
    pub blocks: Vec<ReducedBlock>,
    /// Full moment vector with fixed entries filled and zeros elsewhere.
    pub template: Vec<f64>,
}

impl Reduced {
    pub fn new(p: &ConicProblem, scaling: bool) -> Reduced {
        let fixed = p.fixed();
        let mut free = Vec::new();
        let mut pos_of = vec![usize::MAX; fixed.len()];
        let mut template = vec![0.0; fixed.len()];
        for (k, f) in fixed.iter().enumerate() {
            match f {
                Some(v) => template[k] = *v,
                None => {
                    pos_of[k] = free.len();
                    free.push(k);
                }
            }
        }
        let obj = p.objective();
        let obj_const: f64 = fixed
            .iter()
            .zip(obj)
            .filter_map(|(f, c)| f.map(|v| v * c))
            .sum();
        let c_raw = DVector::from_iterator(free.len(), free.iter().map(|&k| obj[k]));
        let obj_scale = if scaling { c_raw.amax().max(1.0) } else { 1.0 };
        let c = &c_raw / obj_scale;

        let mut blocks = Vec::new();
        for b in p.blocks() {
            let n = b.pattern.size;
            let mut constant = DMatrix::zeros(n, n);
            let mut per_var: BTreeMap<usize, BTreeMap<(usize, usize), f64>> = BTreeMap::new();
            for e in &b.pattern.entries {
                match fixed[e.var] {
                    Some(v) => {
                        constant[(e.row, e.col)] += e.coef * v;
                        if e.row != e.col {
                            constant[(e.col, e.row)] += e.coef * v;
                        }
                    }
                    None => {
                        *per_var
                            .entry(pos_of[e.var])
                            .or_default()
                            .entry((e.row, e.col))
                            .or_insert(0.0) += e.coef;
                    }
                }
            }
            let mut vars: Vec<(usize, SparseSym)> = per_var
                .into_iter()
                .map(|(i, ent)| {
                    (
                        i,
                        SparseSym {
                            entries: ent
                                .into_iter()
                                .filter(|(_, v)| *v != 0.0)
                                .map(|((r, c), v)| (r, c, v))
                                .collect(),
                        },
                    )
                })
                .filter(|(_, a)| !a.entries.is_empty())
                .collect();
            let mut scale = 1.0;
            if scaling {
                let big = vars
                    .iter()
                    .map(|(_, a)| a.frobenius_sq().sqrt())
                    .fold(constant.norm(), f64::max);
                if big > 0.0 {
                    scale = 1.0 / big;
                }
                constant *= scale;
                for (_, a) in &mut vars {
                    a.scale(scale);
                }
            }
            blocks.push(ReducedBlock {
                n,
                constant,
                vars,
                scale,
            });
        }
        Reduced {
            m: free.len(),
            free,
            c,
            obj_scale,
            obj_const,
            blocks,
            template,
        }
    }

    pub fn full_vector(&self, x: &DVector<f64>) -> Vec<f64> {
        let mut v = self.template.clone();
        for (i, &k) in self.free.iter().enumerate() {
            v[k] = x[i];
        }
        v
    }

    /// Free variables that appear in no block.
    pub fn unconstrained(&self) -> Vec<usize> {
        let mut seen = vec![false; self.m];
        for b in &self.blocks {
            for (i, _) in &b.vars {
                seen[*i] = true;
            }
        }
        (0..self.m).filter(|&i| !seen[i]).collect()
    }

    pub fn adjoint(&self, ms: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (b, m) in self.blocks.iter().zip(ms) {
            b.adjoint_into(m, &mut out);
        }
        out
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.n).sum()
    }
}
