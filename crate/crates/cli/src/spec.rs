//! Experiment description files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use graphmom::hierarchy::ThetaMode;
use graphmom::momentmodel::{DomainScaling, KnownMoments, SemialgebraicSet};
use graphmom::oracle::{
    graph_known_moments, indicator_moments, marginal_known_moments, transport_instance,
    IntervalUnion, OracleOptions, Piece, PiecewiseFunction, ReferenceMeasure, TransportTag,
};
use graphmom::polycore::Polynomial;
use graphmom::{Error, Result};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema: u32,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default = "unit")]
    pub gamma: f64,
    /// Map back to the user's coordinates for reporting.
    #[serde(default)]
    pub scaling: Option<DomainScaling>,
    /// Extra polynomials `g >= 0` in `n` or `n + 1` variables.
    #[serde(default)]
    pub constraints: Vec<Polynomial>,
    pub moments: MomentSource,
    #[serde(default)]
    pub objective: Option<Objective>,
    /// Inclusive `[a, b]`.
    #[serde(default)]
    pub orders: Option<[usize; 2]>,
    #[serde(default)]
    pub cd: CdSettings,
    #[serde(default)]
    pub outputs: Outputs,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MomentSource {
    /// Graph moments of a built-in or user-supplied function under Lebesgue
    /// measure on `[0, 1]`.
    Function {
        #[serde(default)]
        builtin: Option<String>,
        #[serde(default)]
        piecewise: Option<PiecewiseFunction>,
        #[serde(default)]
        degree_cap: Option<usize>,
        /// Piecewise functions with negative values: work with
        /// `f + sup|f|` on `[0, 2 sup|f|]` and shift results back.
        #[serde(default)]
        shift_negative: bool,
    },
    /// Indicator of a union of intervals in `[0, 1]`.
    Indicator {
        intervals: Vec<(f64, f64)>,
        #[serde(default)]
        degree_cap: Option<usize>,
    },
    /// Marginals of a built-in transport instance.
    Transport {
        instance: String,
        #[serde(default)]
        degree_cap: Option<usize>,
    },
    /// A moments file written by `graphmom moments`, relative to the spec.
    File { path: PathBuf },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Objective {
    Trace {
        #[serde(default)]
        s: Option<usize>,
    },
    Weighted {
        mode: ThetaMode,
        #[serde(default)]
        c: Option<f64>,
    },
    /// Cost polynomial in `(x, y)`; defaults to the instance cost.
    Transport {
        #[serde(default)]
        cost: Option<Polynomial>,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdSettings {
    /// Kernel degree; defaults to the top order.
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub x_points: Option<usize>,
    #[serde(default)]
    pub y_points: Option<usize>,
    /// Explicit y grid, e.g. `[0, 1]` for indicators.
    #[serde(default)]
    pub y_grid: Option<Vec<f64>>,
    /// Build the kernel from exact oracle moments instead of a completion.
    #[serde(default)]
    pub exact: bool,
    /// Indicator sources: use the reduced `d_y <= 1` matrix.
    #[serde(default)]
    pub reduced_indicator: bool,
    #[serde(default)]
    pub level_set: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_moments")]
    pub moments: String,
    #[serde(default = "default_completion")]
    pub completion: String,
    #[serde(default = "default_graph")]
    pub graph: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            moments: default_moments(),
            completion: default_completion(),
            graph: default_graph(),
        }
    }
}

fn default_moments() -> String {
    "moments.json".into()
}

fn default_completion() -> String {
    "hierarchy".into()
}

fn default_graph() -> String {
    "graph".into()
}

/// A spec with the directory its relative paths resolve against.
pub struct LoadedSpec {
    pub spec: ExperimentSpec,
    pub dir: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::usage(format!("cannot read spec {}: {e}", path.display())))?;
    let spec: ExperimentSpec = serde_json::from_str(&text)
        .map_err(|e| Error::usage(format!("invalid spec {}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loaded = LoadedSpec { spec, dir };
    loaded.validate()?;
    Ok(loaded)
}

impl LoadedSpec {
    fn validate(&self) -> Result<()> {
        let s = &self.spec;
        if s.schema != SCHEMA {
            return Err(Error::usage(format!(
                "unsupported schema {}, expected {SCHEMA}",
                s.schema
            )));
        }
        if let Some([a, b]) = s.orders {
            if a > b {
                return Err(Error::usage(format!("empty order range {a}..{b}")));
            }
        }
        if let MomentSource::File { path } = &s.moments {
            let p = self.dir.join(path);
            if !p.exists() {
                return Err(Error::usage(format!(
                    "moments file {} does not exist",
                    p.display()
                )));
            }
        }
        if let MomentSource::Function {
            builtin, piecewise, ..
        } = &s.moments
        {
            if builtin.is_some() == piecewise.is_some() {
                return Err(Error::usage(
                    "function source needs exactly one of builtin or piecewise",
                ));
            }
        }
        Ok(())
    }

    /// `[a, b]` from the command line, else from the spec.
    pub fn orders(&self, cli: Option<(usize, usize)>) -> Result<(usize, usize)> {
        cli.or(self.spec.orders.map(|[a, b]| (a, b)))
            .ok_or_else(|| Error::usage("no order range: pass --order or set \"orders\""))
    }

    /// `sup |f|` when the source asks for the nonnegativity shift.
    fn shift_bound(&self) -> Result<Option<f64>> {
        match &self.spec.moments {
            MomentSource::Function {
                piecewise: Some(p),
                shift_negative: true,
                ..
            } => {
                let bound = raw_sup_norm(p);
                if !(bound > 0.0) {
                    return Err(Error::usage("shift_negative needs a nonzero function"));
                }
                Ok(Some(bound))
            }
            MomentSource::Function {
                shift_negative: true,
                ..
            } => Err(Error::usage(
                "shift_negative applies to piecewise sources only",
            )),
            _ => Ok(None),
        }
    }

    pub fn set(&self) -> Result<SemialgebraicSet> {
        let shift = self.shift_bound()?;
        let gamma = shift.map_or(self.spec.gamma, |b| 2.0 * b);
        let set = SemialgebraicSet::new(self.spec.n, gamma, self.spec.constraints.clone())?;
        match (&self.spec.scaling, shift) {
            (Some(sc), _) => set.with_scaling(sc.clone()),
            (None, Some(b)) => set.with_scaling(DomainScaling::shifted_range(self.spec.n, b)?),
            (None, None) => match &self.spec.moments {
                MomentSource::Transport { instance, .. } => {
                    let inst = transport_instance(parse_tag(instance)?)?;
                    set.with_scaling(inst.scaling)
                }
                _ => Ok(set),
            },
        }
    }

    /// Reference function, if the source defines one.
    pub fn function(&self) -> Result<Option<PiecewiseFunction>> {
        Ok(match &self.spec.moments {
            MomentSource::Function {
                builtin, piecewise, ..
            } => Some(match (builtin, piecewise) {
                (Some(name), _) => builtin_function(name)?,
                (None, Some(p)) => match self.shift_bound()? {
                    Some(b) => PiecewiseFunction::new(
                        p.breakpoints().to_vec(),
                        p.pieces().iter().map(|q| shift_piece(q, b)).collect(),
                        2.0 * b,
                    )?,
                    None => PiecewiseFunction::new(
                        p.breakpoints().to_vec(),
                        p.pieces().to_vec(),
                        p.gamma(),
                    )?,
                },
                (None, None) => unreachable!("validated"),
            }),
            MomentSource::Indicator { intervals, .. } => {
                Some(IntervalUnion::new(intervals.clone())?.indicator())
            }
            MomentSource::Transport { instance, .. } => {
                Some(transport_instance(parse_tag(instance)?)?.map)
            }
            MomentSource::File { .. } => None,
        })
    }

    pub fn indicator(&self) -> Result<Option<IntervalUnion>> {
        match &self.spec.moments {
            MomentSource::Indicator { intervals, .. } => {
                Ok(Some(IntervalUnion::new(intervals.clone())?))
            }
            _ => Ok(None),
        }
    }

    /// Known moments up to `cap` (the source's own cap wins if larger).
    pub fn known_moments(&self, cap: usize) -> Result<KnownMoments> {
        let opts = OracleOptions::default();
        match &self.spec.moments {
            MomentSource::Function { degree_cap, .. } => {
                let f = self.function()?.expect("function source");
                let lam = ReferenceMeasure::uniform(0.0, 1.0)?;
                graph_known_moments(&f, &lam, degree_cap.unwrap_or(cap).max(cap), &opts)
            }
            MomentSource::Indicator {
                intervals,
                degree_cap,
            } => indicator_moments(
                &IntervalUnion::new(intervals.clone())?,
                degree_cap.unwrap_or(cap).max(cap),
            ),
            MomentSource::Transport {
                instance,
                degree_cap,
            } => {
                let inst = transport_instance(parse_tag(instance)?)?;
                marginal_known_moments(
                    &inst.source,
                    &inst.target,
                    inst.gamma,
                    degree_cap.unwrap_or(cap).max(cap),
                )
            }
            MomentSource::File { path } => KnownMoments::load(&self.dir.join(path)),
        }
    }

    /// Cap requested by the source itself, for `graphmom moments`.
    pub fn source_cap(&self) -> Option<usize> {
        match &self.spec.moments {
            MomentSource::Function { degree_cap, .. }
            | MomentSource::Indicator { degree_cap, .. }
            | MomentSource::Transport { degree_cap, .. } => *degree_cap,
            MomentSource::File { .. } => None,
        }
    }

    pub fn transport_cost(&self) -> Result<Polynomial> {
        if let Some(Objective::Transport { cost: Some(c) }) = &self.spec.objective {
            return Ok(c.clone());
        }
        match &self.spec.moments {
            MomentSource::Transport { instance, .. } => {
                Ok(transport_instance(parse_tag(instance)?)?.cost)
            }
            _ => Err(Error::usage(
                "transport objective needs a cost polynomial or a transport instance",
            )),
        }
    }

    pub fn transport_tag(&self) -> Result<Option<TransportTag>> {
        match &self.spec.moments {
            MomentSource::Transport { instance, .. } => Ok(Some(parse_tag(instance)?)),
            _ => Ok(None),
        }
    }
}

/// Sup norm of a deserialized (not yet range-checked) function.
fn raw_sup_norm(p: &PiecewiseFunction) -> f64 {
    let bp = p.breakpoints();
    let mut m: f64 = 0.0;
    for (i, piece) in p.pieces().iter().enumerate() {
        for k in 0..=2000 {
            let x = bp[i] + (bp[i + 1] - bp[i]) * k as f64 / 2000.0;
            m = m.max(piece.eval(x).abs());
        }
    }
    m
}

fn shift_piece(p: &Piece, s: f64) -> Piece {
    match p.clone() {
        Piece::Polynomial { mut coeffs } => {
            if coeffs.is_empty() {
                coeffs.push(0.0);
            }
            coeffs[0] += s;
            Piece::Polynomial { coeffs }
        }
        Piece::SqrtAffine {
            offset,
            scale,
            radicand,
        } => Piece::SqrtAffine {
            offset: offset + s,
            scale,
            radicand,
        },
        Piece::Constant { value } => Piece::Constant { value: value + s },
    }
}

fn parse_tag(s: &str) -> Result<TransportTag> {
    s.parse()
}

/// Named reference functions.
pub fn builtin_function(name: &str) -> Result<PiecewiseFunction> {
    match name {
        "step" => Ok(PiecewiseFunction::step()),
        "x-squared" => PiecewiseFunction::polynomial(0.0, 1.0, vec![0.0, 0.0, 1.0], 1.0),
        "constant" => PiecewiseFunction::constant(0.0, 1.0, 0.5, 1.0),
        "benchmark" => Ok(graphmom::experiments::linear_measurement_benchmark()),
        _ => Err(Error::usage(format!(
            "unknown function {name:?}; expected step, x-squared, constant or benchmark"
        ))),
    }
}
