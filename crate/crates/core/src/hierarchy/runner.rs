use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::momentmodel::MomentSequence;
use crate::sdpsolver::{
    solve, verify, ConicProblem, Residuals, SolverConfig, Status, VerifyReport,
};

/// One solved order.
#[derive(Clone, Debug)]
pub struct OrderRecord {
    pub r: usize,
    pub objective: f64,
    pub status: Status,
    pub residuals: Residuals,
    pub verify: Option<VerifyReport>,
    pub iterations: usize,
    pub seconds: f64,
    /// Completed vector in the problem's working basis.
    pub moments: Option<MomentSequence>,
    /// Solver or numerical failure at this order, if any.
    pub error: Option<String>,
}

impl OrderRecord {
    pub fn ok(&self) -> bool {
        self.status == Status::Optimal && self.error.is_none()
    }
}

#[derive(Clone, Debug, Default)]
pub struct HierarchyResult {
    pub records: Vec<OrderRecord>,
}

#[derive(Serialize)]
struct RecordJson<'a> {
    r: usize,
    objective: f64,
    status: &'a Status,
    residuals: &'a Residuals,
    verify: &'a Option<VerifyReport>,
    iterations: usize,
    seconds: f64,
    error: &'a Option<String>,
    indices: Vec<&'a [u32]>,
    monomial_moments: Vec<f64>,
    working_moments: Vec<f64>,
}

impl HierarchyResult {
    pub fn get(&self, r: usize) -> Option<&OrderRecord> {
        self.records.iter().find(|rec| rec.r == r)
    }

    pub fn all_ok(&self) -> bool {
        self.records.iter().all(OrderRecord::ok)
    }

    /// Consecutive successful orders whose objective drops by more than `tol`.
    pub fn monotonicity_violations(&self, tol: f64) -> Vec<(usize, usize, f64)> {
        let ok: Vec<&OrderRecord> = self.records.iter().filter(|r| r.ok()).collect();
        ok.windows(2)
            .filter(|w| w[1].objective < w[0].objective - tol)
            .map(|w| (w[0].r, w[1].r, w[0].objective - w[1].objective))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,objective,eq_res,psd_res,seconds\n");
        for rec in &self.records {
            let (eq, psd) = match &rec.verify {
                Some(v) => (v.eq, v.psd),
                None => (rec.residuals.eq, rec.residuals.psd),
            };
            s.push_str(&format!(
                "{},{:.10},{:.3e},{:.3e},{:.3}\n",
                rec.r, rec.objective, eq, psd, rec.seconds
            ));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = Vec::new();
        for rec in &self.records {
            let (indices, mono, work) = match &rec.moments {
                Some(m) => (
                    m.basis().iter().map(|d| d.exponents()).collect(),
                    m.to_monomial()?.values().to_vec(),
                    m.values().to_vec(),
                ),
                None => (vec![], vec![], vec![]),
            };
            out.push(RecordJson {
                r: rec.r,
                objective: rec.objective,
                status: &rec.status,
                residuals: &rec.residuals,
                verify: &rec.verify,
                iterations: rec.iterations,
                seconds: rec.seconds,
                error: &rec.error,
                indices,
                monomial_moments: mono,
                working_moments: work,
            });
        }
        Ok(serde_json::to_string_pretty(
            &serde_json::json!({ "records": out }),
        )?)
    }
}

/// Solve and verify one problem per order in `r_min..=r_max`. Builder errors
/// abort; solver failures are recorded and later orders still run.
pub fn run_hierarchy<F>(
    mut build: F,
    r_min: usize,
    r_max: usize,
    cfg: &SolverConfig,
) -> Result<HierarchyResult>
where
    F: FnMut(usize) -> Result<ConicProblem>,
{
    if r_min > r_max {
        return Err(Error::usage(format!("empty order range {r_min}..{r_max}")));
    }
    let mut records = Vec::new();
    for r in r_min..=r_max {
        let p = build(r)?;
        let t0 = Instant::now();
        let rec = match solve(&p, cfg) {
            Ok(sol) => {
                let (v, err) = match verify(&sol, &p) {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                OrderRecord {
                    r,
                    objective: sol.objective_value,
                    status: sol.status,
                    residuals: sol.residuals,
                    verify: v,
                    iterations: sol.iterations,
                    seconds: t0.elapsed().as_secs_f64(),
                    moments: Some(sol.moments),
                    error: err,
                }
            }
            Err(e) => OrderRecord {
                r,
                objective: f64::NAN,
                status: Status::MaxIter,
                residuals: Residuals {
                    eq: f64::NAN,
                    psd: f64::NAN,
                    gap: f64::NAN,
                    dual: f64::NAN,
                },
                verify: None,
                iterations: 0,
                seconds: t0.elapsed().as_secs_f64(),
                moments: None,
                error: Some(e.to_string()),
            },
        };
        if cfg.log {
            eprintln!(
                "order {r}: objective {:.8} status {:?} ({:.2}s)",
                rec.objective, rec.status, rec.seconds
            );
        }
        records.push(rec);
    }
    Ok(HierarchyResult { records })
}
