use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use graphmom::cdkernel::{
    cd_polynomial, default_beta, extract_graph, l1_error, level_set_csv, ortho_basis, uniform_grid,
    CDModel, DEFAULT_X_POINTS, DEFAULT_Y_POINTS,
};
use graphmom::experiments::svg::{line_plot, Series};
use graphmom::experiments::{run_demo, DemoName, DemoOptions};
use graphmom::hierarchy::{
    build_trace_completion, build_transport_relaxation, build_weighted_completion,
    expand_indicator_legendre, reduced_indicator_matrix, reduced_indicator_rows, run_hierarchy,
    theta_weights, HierarchyResult,
};
use graphmom::momentmodel::{MomentBasis, MomentSequence, MomentSupport};
use graphmom::oracle::{graph_moments, OracleOptions, ReferenceMeasure};
use graphmom::polycore::LegendreFrame;
use graphmom::sdpsolver::SolverConfig;
use graphmom::{Error, Result};

use crate::spec::{LoadedSpec, Objective};

pub struct Context {
    pub out: PathBuf,
    pub cfg: SolverConfig,
    pub verbose: bool,
}

impl Context {
    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, contents)?;
        if self.verbose {
            eprintln!("wrote {}", path.display());
        }
        Ok(path)
    }
}

pub fn moments(
    spec: &LoadedSpec,
    orders: Option<(usize, usize)>,
    degree_cap: Option<usize>,
    ctx: &Context,
) -> Result<()> {
    let cap = match (degree_cap.or(spec.source_cap()), spec.orders(orders)) {
        (Some(c), _) => c,
        (None, Ok((_, b))) => 2 * b,
        (None, Err(_)) => {
            return Err(Error::usage(
                "pass --degree-cap, set moments.degree_cap or give an order range",
            ))
        }
    };
    let known = spec.known_moments(cap)?;
    let path = ctx.write(&spec.spec.outputs.moments, &known.to_json()?)?;
    println!(
        "{} known moments up to degree {} -> {}",
        known.indices().len(),
        known.degree_cap(),
        path.display()
    );
    Ok(())
}

fn report(res: &HierarchyResult, cfg: &SolverConfig) {
    for rec in &res.records {
        let res_line = match &rec.verify {
            Some(v) => format!("eq {:.1e} min eig {:.1e}", v.eq, v.psd),
            None => rec.error.clone().unwrap_or_default(),
        };
        println!(
            "r = {:2}  objective {:.8}  {:?}  {}  {:.2}s",
            rec.r, rec.objective, rec.status, res_line, rec.seconds
        );
    }
    for (a, b, drop) in res.monotonicity_violations(10.0 * cfg.tol_gap) {
        println!("warning: objective drops by {drop:.3e} from order {a} to {b}");
    }
}

fn finish(res: &HierarchyResult) -> Result<()> {
    let failed: Vec<usize> = res
        .records
        .iter()
        .filter(|r| !r.ok())
        .map(|r| r.r)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Solver(format!(
            "orders {failed:?} did not reach the requested tolerances"
        )))
    }
}

pub fn complete(spec: &LoadedSpec, orders: Option<(usize, usize)>, ctx: &Context) -> Result<()> {
    let (a, b) = spec.orders(orders)?;
    let set = spec.set()?;
    let known = spec.known_moments(2 * b)?;
    if known.support() != MomentSupport::GraphLinear {
        return Err(Error::usage(
            "completion needs graph-linear known moments; use `transport` for marginals",
        ));
    }
    let objective = spec
        .spec
        .objective
        .clone()
        .unwrap_or(Objective::Trace { s: None });
    let res = match objective {
        Objective::Trace { s } => run_hierarchy(
            |r| build_trace_completion(&set, &known, s.unwrap_or(r), r),
            a,
            b,
            &ctx.cfg,
        )?,
        Objective::Weighted { mode, c } => {
            let theta = theta_weights(set.n(), set.gamma(), mode, c)?;
            run_hierarchy(
                |r| build_weighted_completion(&set, &known, &theta, r),
                a,
                b,
                &ctx.cfg,
            )?
        }
        Objective::Transport { .. } => {
            return Err(Error::usage(
                "transport objective: use the transport command",
            ))
        }
    };
    report(&res, &ctx.cfg);
    let stem = &spec.spec.outputs.completion;
    ctx.write(&format!("{stem}.csv"), &res.to_csv())?;
    ctx.write(&format!("{stem}.json"), &res.to_json()?)?;
    finish(&res)
}

pub fn transport(spec: &LoadedSpec, orders: Option<(usize, usize)>, ctx: &Context) -> Result<()> {
    let (a, b) = spec.orders(orders)?;
    let set = spec.set()?;
    let marginals = spec.known_moments(2 * b)?;
    let cost = spec.transport_cost()?;
    let res = run_hierarchy(
        |r| build_transport_relaxation(&set, &cost, &marginals, r),
        a,
        b,
        &ctx.cfg,
    )?;
    report(&res, &ctx.cfg);
    let mut csv = String::from("r,lower_bound\n");
    for rec in &res.records {
        csv.push_str(&format!("{},{:.8}\n", rec.r, rec.objective));
    }
    ctx.write("bounds.csv", &csv)?;
    let stem = &spec.spec.outputs.completion;
    ctx.write(&format!("{stem}.json"), &res.to_json()?)?;
    if let Some(tag) = spec.transport_tag()? {
        let inst = graphmom::oracle::transport_instance(tag)?;
        let truth = graph_moments(&inst.map, &inst.source, b, &OracleOptions::default())?;
        let mut csv = String::from("r,max_moment_error\n");
        for rec in &res.records {
            if let Some(m) = &rec.moments {
                let mono = m.to_monomial()?;
                let t = truth.monomial.truncate(rec.r)?;
                let err = t
                    .basis()
                    .iter()
                    .zip(t.values())
                    .filter_map(|(d, v)| mono.get(d).map(|x| (x - v).abs()))
                    .fold(0.0, f64::max);
                println!(
                    "r = {:2}  max moment error vs analytic map {err:.3e}",
                    rec.r
                );
                csv.push_str(&format!("{},{err:.6e}\n", rec.r));
            }
        }
        ctx.write("moment_errors.csv", &csv)?;
    }
    finish(&res)
}

/// Completed moments of order `r` from a hierarchy JSON file.
fn completed_moments(path: &Path, r: usize, frame: &LegendreFrame) -> Result<MomentSequence> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::usage(format!("cannot read completion {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)?;
    let rec = v["records"]
        .as_array()
        .and_then(|recs| recs.iter().find(|rec| rec["r"].as_u64() == Some(r as u64)))
        .ok_or_else(|| Error::usage(format!("no order {r} in {}", path.display())))?;
    let values: Vec<f64> = serde_json::from_value(rec["working_moments"].clone())?;
    if values.is_empty() {
        return Err(Error::data(format!("order {r} has no completed moments")));
    }
    MomentSequence::new(
        MomentBasis::Legendre(frame.clone()),
        frame.n_vars(),
        r,
        values,
    )
}

pub fn reconstruct(spec: &LoadedSpec, orders: Option<(usize, usize)>, ctx: &Context) -> Result<()> {
    let cd = &spec.spec.cd;
    let r = match cd.order {
        Some(r) => r,
        None => spec.orders(orders)?.1,
    };
    let set = spec.set()?;
    if set.n() != 1 {
        return Err(Error::usage("reconstruct samples scalar x only"));
    }
    let frame = set.frame()?;
    let beta = cd.beta.unwrap_or_else(|| default_beta(r));
    let reference = spec.function()?;

    let model = if cd.reduced_indicator {
        let k = spec
            .indicator()?
            .ok_or_else(|| Error::usage("reduced_indicator needs an indicator source"))?;
        let known = graphmom::oracle::indicator_moments(&k, 2 * r)?;
        let seq = expand_indicator_legendre(&known, r)?;
        let basis = ortho_basis(&frame, r).subset(&reduced_indicator_rows(2, r))?;
        CDModel::from_matrix(basis, &reduced_indicator_matrix(&seq, r)?, beta)?
    } else if cd.exact {
        let f = reference
            .clone()
            .ok_or_else(|| Error::usage("exact moments need a function source"))?;
        let g = graph_moments(
            &f,
            &ReferenceMeasure::uniform(0.0, 1.0)?,
            r,
            &OracleOptions::default(),
        )?;
        cd_polynomial(&g.legendre, r, beta, &ortho_basis(&frame, r))?
    } else {
        let path = ctx
            .out
            .join(format!("{}.json", spec.spec.outputs.completion));
        let seq = completed_moments(&path, r, &frame)?;
        cd_polynomial(&seq, r, beta, &ortho_basis(&frame, r))?
    };

    let (x0, x1) = (frame.interval(0).lo, frame.interval(0).hi);
    let (y0, y1) = (frame.interval(1).lo, frame.interval(1).hi);
    let xs = uniform_grid(x0, x1, cd.x_points.unwrap_or(DEFAULT_X_POINTS));
    let ys = match &cd.y_grid {
        Some(g) => g.clone(),
        None => uniform_grid(y0, y1, cd.y_points.unwrap_or(DEFAULT_Y_POINTS)),
    };
    let fr = extract_graph(&model, &xs, &ys)?;
    if let Some(f) = &reference {
        println!("L1 error {:.6} (normalized coordinates)", l1_error(&fr, f)?);
    }
    let sc = set.scaling().clone();
    let orig = fr.map(|u| sc.x_to_original(&[u])[0], |v| sc.y_to_original(v));
    let stem = &spec.spec.outputs.graph;
    ctx.write(&format!("{stem}.csv"), &orig.to_csv())?;

    let mut series = Vec::new();
    if let Some(f) = &reference {
        let pts = uniform_grid(x0, x1, 801)
            .into_iter()
            .map(|u| Ok((sc.x_to_original(&[u])[0], sc.y_to_original(f.eval(u)?))))
            .collect::<Result<Vec<_>>>()?;
        series.push(Series {
            label: "reference",
            color: "red",
            width: 3.0,
            points: pts,
        });
    }
    let label = format!("f_{r}");
    series.push(Series {
        label: &label,
        color: "black",
        width: 1.2,
        points: orig.x.iter().copied().zip(orig.y.iter().copied()).collect(),
    });
    let xr = (sc.x_to_original(&[x0])[0], sc.x_to_original(&[x1])[0]);
    let yr = (sc.y_to_original(y0), sc.y_to_original(y1));
    ctx.write(&format!("{stem}.svg"), &line_plot(&label, xr, yr, &series))?;
    if cd.level_set {
        let g = uniform_grid(0.0, 1.0, 101);
        let lx: Vec<f64> = g.iter().map(|t| x0 + (x1 - x0) * t).collect();
        let ly: Vec<f64> = g.iter().map(|t| y0 + (y1 - y0) * t).collect();
        ctx.write(
            &format!("{stem}_levelset.csv"),
            &level_set_csv(&model, &lx, &ly)?,
        )?;
    }
    Ok(())
}

pub fn demo(name: &str, orders: Option<(usize, usize)>, ctx: &Context) -> Result<()> {
    let name: DemoName = name.parse()?;
    let opts = DemoOptions {
        cfg: ctx.cfg.clone(),
        orders,
        verbose: ctx.verbose,
        ..Default::default()
    };
    let rep = run_demo(name, &opts)?;
    let dir = name.name();
    for a in &rep.artifacts {
        ctx.write(&format!("{dir}/{}", a.name), &a.contents)?;
    }
    ctx.write(&format!("{dir}/timing.json"), &rep.timing_json()?)?;
    for c in &rep.checks {
        println!(
            "[{}] {}: {}",
            c.id,
            if c.pass { "pass" } else { "FAIL" },
            c.description
        );
    }
    for n in &rep.notes {
        println!("note: {n}");
    }
    if rep.pass() {
        Ok(())
    } else {
        let failed: Vec<&str> = rep
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.id.as_str())
            .collect();
        Err(Error::Accuracy {
            achieved: failed.len() as f64,
            requested: 0.0,
            context: format!("{} failed checks {failed:?}", rep.name),
        })
    }
}
