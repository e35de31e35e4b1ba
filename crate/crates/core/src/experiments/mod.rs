//! End-to-end experiment pipelines with their artifacts and pass/fail checks.

mod demos;
pub mod svg;
pub mod thresholds;

use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::{run_hierarchy, HierarchyResult};
use crate::sdpsolver::{ConicProblem, SolverConfig};

pub use demos::{linear_measurement_benchmark, misclassified_length, run_demo};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemoName {
    ConvexOt,
    NonconvexOt,
    LinearMeasurements,
    StepVsL2,
    Lmoment,
}

impl DemoName {
    pub const ALL: [DemoName; 5] = [
        DemoName::ConvexOt,
        DemoName::NonconvexOt,
        DemoName::LinearMeasurements,
        DemoName::StepVsL2,
        DemoName::Lmoment,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DemoName::ConvexOt => "convex-ot",
            DemoName::NonconvexOt => "nonconvex-ot",
            DemoName::LinearMeasurements => "linear-measurements",
            DemoName::StepVsL2 => "step-vs-l2",
            DemoName::Lmoment => "lmoment",
        }
    }
}

impl FromStr for DemoName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DemoName::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = DemoName::ALL.iter().map(|d| d.name()).collect();
                Error::usage(format!(
                    "unknown demo {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug)]
pub struct DemoOptions {
    pub cfg: SolverConfig,
    /// Replaces the demo's default orders with `a..=b`.
    pub orders: Option<(usize, usize)>,
    pub x_points: usize,
    pub y_points: usize,
    pub verbose: bool,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions {
            cfg: SolverConfig::default(),
            orders: None,
            x_points: crate::cdkernel::DEFAULT_X_POINTS,
            y_points: crate::cdkernel::DEFAULT_Y_POINTS,
            verbose: false,
        }
    }
}

impl DemoOptions {
    fn orders_or(&self, default: &[usize]) -> Vec<usize> {
        match self.orders {
            Some((a, b)) => (a..=b).collect(),
            None => default.to_vec(),
        }
    }

    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// A file produced by a demo, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub measured: serde_json::Value,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    pub fn new(
        id: &str,
        description: impl Into<String>,
        measured: serde_json::Value,
        threshold: impl Into<String>,
        pass: bool,
    ) -> Check {
        Check {
            id: id.into(),
            description: description.into(),
            measured,
            threshold: threshold.into(),
            pass,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DemoReport {
    pub name: String,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub timings: Vec<(String, f64)>,
}

impl DemoReport {
    fn new(name: DemoName) -> DemoReport {
        DemoReport {
            name: name.name().into(),
            artifacts: vec![],
            checks: vec![],
            notes: vec![],
            timings: vec![],
        }
    }

    fn add(&mut self, name: impl Into<String>, contents: String) {
        self.artifacts.push(Artifact {
            name: name.into(),
            contents,
        });
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    /// Summary without timings, so it is reproducible byte for byte.
    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "demo": self.name,
            "pass": self.pass(),
            "checks": self.checks,
            "notes": self.notes,
        }))?)
    }

    pub fn timing_json(&self) -> Result<String> {
        let map: serde_json::Map<String, serde_json::Value> = self
            .timings
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        Ok(serde_json::to_string_pretty(&map)?)
    }
}

/// Run the hierarchy at each listed order.
pub fn solve_orders<F>(
    mut build: F,
    orders: &[usize],
    cfg: &SolverConfig,
) -> Result<HierarchyResult>
where
    F: FnMut(usize) -> Result<ConicProblem>,
{
    let mut out = HierarchyResult::default();
    for &r in orders {
        out.records
            .extend(run_hierarchy(&mut build, r, r, cfg)?.records);
    }
    Ok(out)
}

fn timed<T>(report: &mut DemoReport, label: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t0 = Instant::now();
    let out = f()?;
    report
        .timings
        .push((label.into(), t0.elapsed().as_secs_f64()));
    Ok(out)
}
