//! Scenario-driven experiments: configuration, presets, execution and CSV
//! output.

mod config;
mod execute;
mod presets;
mod table;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::QuenchProtocol;

pub use config::parse_config;
pub use execute::{run_scenario, REVIVAL_T_MIN, STEP_FACTOR, STEP_PLATEAU, STEP_SEARCH};
pub use presets::{preset, presets, Preset};
pub use table::{write_results, ResultTable, WrittenFiles};

/// Largest chain handled by the free-fermion path.
pub const MAX_FERMION_SITES: usize = 2048;

/// Default memory ceiling for a single run.
pub const MEMORY_LIMIT_BYTES: u64 = 4 << 30;

/// Dense `2N x 2N` matrices alive at once per worker, used by the memory
/// estimate.
const MATRICES_PER_WORKER: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    EpsilonSweep,
    QuenchProtocolGrid,
    LambdaScan,
    DerivativeScan,
    SizeScaling,
    ShortTime,
    AlphaVsDistance,
    Revival,
    Independence,
    OracleCompare,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 10] = [
        ScenarioKind::EpsilonSweep,
        ScenarioKind::QuenchProtocolGrid,
        ScenarioKind::LambdaScan,
        ScenarioKind::DerivativeScan,
        ScenarioKind::SizeScaling,
        ScenarioKind::ShortTime,
        ScenarioKind::AlphaVsDistance,
        ScenarioKind::Revival,
        ScenarioKind::Independence,
        ScenarioKind::OracleCompare,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::EpsilonSweep => "epsilon-sweep",
            ScenarioKind::QuenchProtocolGrid => "quench-protocol-grid",
            ScenarioKind::LambdaScan => "lambda-scan-at-fixed-time",
            ScenarioKind::DerivativeScan => "derivative-scan",
            ScenarioKind::SizeScaling => "size-scaling",
            ScenarioKind::ShortTime => "short-time",
            ScenarioKind::AlphaVsDistance => "alpha-vs-distance",
            ScenarioKind::Revival => "revival",
            ScenarioKind::Independence => "independence",
            ScenarioKind::OracleCompare => "oracle-compare",
        }
    }

    fn default_dt(&self) -> f64 {
        match self {
            ScenarioKind::ShortTime => 0.001,
            _ => 0.05,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::ConfigValue {
                key: "kind".into(),
                message: format!("unknown scenario kind `{s}`"),
            })
    }
}

/// A protocol field that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    N,
    J,
    LambdaI,
    LambdaF,
    Epsilon,
    D,
}

impl Param {
    pub const ALL: [Param; 6] = [Param::N, Param::J, Param::LambdaI, Param::LambdaF, Param::Epsilon, Param::D];

    pub fn as_str(&self) -> &'static str {
        match self {
            Param::N => "n",
            Param::J => "j",
            Param::LambdaI => "lambda_i",
            Param::LambdaF => "lambda_f",
            Param::Epsilon => "epsilon",
            Param::D => "d",
        }
    }

    pub fn get(&self, p: &QuenchProtocol) -> f64 {
        match self {
            Param::N => p.n as f64,
            Param::J => p.j,
            Param::LambdaI => p.lambda_i,
            Param::LambdaF => p.lambda_f,
            Param::Epsilon => p.epsilon,
            Param::D => p.d as f64,
        }
    }

    /// Sets the field without validating the resulting protocol.
    pub fn set(&self, p: &mut QuenchProtocol, value: f64) -> Result<()> {
        let as_index = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::ConfigValue {
                    key: self.as_str().into(),
                    message: format!("{v} is not a non-negative integer"),
                })
            }
        };
        match self {
            Param::N => p.n = as_index(value)?,
            Param::J => p.j = value,
            Param::LambdaI => p.lambda_i = value,
            Param::LambdaF => p.lambda_f = value,
            Param::Epsilon => p.epsilon = value,
            Param::D => p.d = as_index(value)?,
        }
        Ok(())
    }

    fn is_integer(&self) -> bool {
        matches!(self, Param::N | Param::D)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| Error::ConfigValue {
            key: "sweep".into(),
            message: format!("`{s}` is not a protocol field"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: Param,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    /// `0, dt, 2 dt, ..` up to and including `t_max`.
    Uniform { t_max: f64, dt: f64 },
    Explicit(Vec<f64>),
    Unset,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeGrid::Uniform { t_max, dt } => {
                let steps = (t_max / dt + 1e-9).floor() as usize;
                (0..=steps).map(|i| i as f64 * dt).collect()
            }
            TimeGrid::Explicit(t) => t.clone(),
            TimeGrid::Unset => Vec::new(),
        }
    }

    fn describe(&self) -> String {
        match self {
            TimeGrid::Uniform { t_max, dt } => format!("uniform t_max={t_max} dt={dt}"),
            TimeGrid::Explicit(t) => format!("explicit {}", join(t)),
            TimeGrid::Unset => "none".into(),
        }
    }
}

/// Local refinement of a field grid around the coarse derivative peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub half_width: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub base: QuenchProtocol,
    /// Inner sweep, the abscissa of each curve.
    pub sweep: Option<Sweep>,
    /// Outer sweep, one curve per value.
    pub series: Option<Sweep>,
    pub time_grid: TimeGrid,
    pub refine: Option<Refinement>,
    /// Random protocols drawn by `oracle-compare`.
    pub cases: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

/// One `(series value, sweep value)` combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Point {
    pub series: Option<f64>,
    pub sweep: Option<f64>,
    pub protocol: QuenchProtocol,
}

impl Scenario {
    pub fn new(name: impl Into<String>, kind: ScenarioKind, base: QuenchProtocol) -> Self {
        Scenario {
            name: name.into(),
            kind,
            base,
            sweep: None,
            series: None,
            time_grid: TimeGrid::Unset,
            refine: None,
            cases: 20,
            seed: 0,
            output: None,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.time_grid.times()
    }

    pub(crate) fn points(&self) -> Result<Vec<Point>> {
        let outer: Vec<Option<f64>> = match &self.series {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        };
        let inner: Vec<Option<f64>> = match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        };
        let mut points = Vec::with_capacity(outer.len() * inner.len());
        for &o in &outer {
            for &i in &inner {
                let mut protocol = self.base;
                if let (Some(s), Some(v)) = (&self.series, o) {
                    s.param.set(&mut protocol, v)?;
                }
                if let (Some(s), Some(v)) = (&self.sweep, i) {
                    s.param.set(&mut protocol, v)?;
                }
                points.push(Point { series: o, sweep: i, protocol });
            }
        }
        Ok(points)
    }

    /// Checks the scenario against the requirements of its kind and the
    /// resource guards.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Error::ConfigValue { key: key.into(), message };
        for (key, sweep) in [("values", &self.sweep), ("series_values", &self.series)] {
            if let Some(s) = sweep {
                if s.values.is_empty() {
                    return Err(bad(key, "value list is empty".into()));
                }
                if s.values.iter().any(|v| !v.is_finite()) {
                    return Err(bad(key, "values must be finite".into()));
                }
                if s.param.is_integer() && s.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                    return Err(bad(key, format!("{} takes non-negative integers", s.param)));
                }
            }
        }
        if let (Some(a), Some(b)) = (&self.sweep, &self.series) {
            if a.param == b.param {
                return Err(bad("series", format!("`{}` is already the sweep parameter", a.param)));
            }
        }
        self.validate_times()?;
        self.validate_kind(&bad)?;

        if self.kind == ScenarioKind::OracleCompare {
            self.base.validate()?;
            if self.base.n > crate::oracle::MAX_ECHO_SITES {
                return Err(Error::SizeGuard {
                    what: "oracle-compare",
                    n: self.base.n,
                    max: crate::oracle::MAX_ECHO_SITES,
                });
            }
            return Ok(());
        }
        let points = self.points()?;
        let mut largest = 0;
        for point in &points {
            point.protocol.validate()?;
            largest = largest.max(point.protocol.n);
        }
        if largest > MAX_FERMION_SITES {
            return Err(Error::SizeGuard { what: "free-fermion path", n: largest, max: MAX_FERMION_SITES });
        }
        let estimate = memory_estimate(largest, points.len());
        if estimate > MEMORY_LIMIT_BYTES {
            return Err(Error::ResourceGuard { estimate, limit: MEMORY_LIMIT_BYTES });
        }
        Ok(())
    }

    fn validate_times(&self) -> Result<()> {
        let bad = |message: String| Error::ConfigValue { key: "times".into(), message };
        match &self.time_grid {
            TimeGrid::Uniform { t_max, dt } => {
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(Error::ConfigValue { key: "dt".into(), message: format!("{dt} is not positive") });
                }
                if !(t_max.is_finite() && *t_max >= 0.0) {
                    return Err(Error::ConfigValue {
                        key: "t_max".into(),
                        message: format!("{t_max} is not a non-negative time"),
                    });
                }
                if t_max / dt > 1e7 {
                    return Err(Error::ConfigValue { key: "dt".into(), message: "more than 1e7 time points".into() });
                }
            }
            TimeGrid::Explicit(t) => {
                if t.is_empty() {
                    return Err(bad("time list is empty".into()));
                }
                if t.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(bad("times must be finite and non-negative".into()));
                }
                if t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad("times must be strictly increasing".into()));
                }
            }
            TimeGrid::Unset => {
                if !matches!(self.kind, ScenarioKind::AlphaVsDistance) {
                    return Err(bad(format!("{} needs t_max or times", self.kind)));
                }
            }
        }
        Ok(())
    }

    fn validate_kind(&self, bad: &dyn Fn(&str, String) -> Error) -> Result<()> {
        let sweep_param = self.sweep.as_ref().map(|s| s.param);
        let series_param = self.series.as_ref().map(|s| s.param);
        let require_sweep = |allowed: &[Param]| -> Result<()> {
            match sweep_param {
                Some(p) if allowed.contains(&p) => Ok(()),
                _ => Err(bad(
                    "sweep",
                    format!(
                        "{} sweeps one of: {}",
                        self.kind,
                        allowed.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(", ")
                    ),
                )),
            }
        };
        let uniform_sweep = |min: usize| -> Result<()> {
            let values = &self.sweep.as_ref().map(|s| s.values.clone()).unwrap_or_default();
            if values.len() < min {
                return Err(bad("values", format!("need at least {min} grid points")));
            }
            crate::observables::field_derivative(values, &vec![0.0; values.len()]).map(|_| ())
        };
        match self.kind {
            ScenarioKind::EpsilonSweep => require_sweep(&[Param::Epsilon]),
            ScenarioKind::LambdaScan => require_sweep(&[Param::LambdaI, Param::LambdaF]),
            ScenarioKind::DerivativeScan => {
                require_sweep(&[Param::LambdaI, Param::LambdaF])?;
                uniform_sweep(3)
            }
            ScenarioKind::SizeScaling => {
                require_sweep(&[Param::LambdaI])?;
                uniform_sweep(3)?;
                match &self.series {
                    Some(s) if s.param == Param::N && s.values.len() >= 4 => {}
                    _ => return Err(bad("series", "size-scaling needs `series = n` with at least 4 sizes".into())),
                }
                if self.times().len() != 1 {
                    return Err(bad("times", "size-scaling evaluates exactly one time".into()));
                }
                if let Some(r) = self.refine {
                    if !(r.step > 0.0 && r.half_width >= 2.0 * r.step) {
                        return Err(bad("refine_step", "need refine_width >= 2 refine_step > 0".into()));
                    }
                }
                Ok(())
            }
            ScenarioKind::AlphaVsDistance => require_sweep(&[Param::D]),
            ScenarioKind::OracleCompare => {
                if sweep_param.is_some() || series_param.is_some() {
                    return Err(bad("sweep", "oracle-compare draws its own protocols".into()));
                }
                if self.cases == 0 {
                    return Err(bad("cases", "need at least one case".into()));
                }
                Ok(())
            }
            ScenarioKind::QuenchProtocolGrid
            | ScenarioKind::ShortTime
            | ScenarioKind::Revival
            | ScenarioKind::Independence => Ok(()),
        }
    }
}

/// Rough peak memory of a run on chains of up to `n` sites with `points`
/// independent sweep points.
pub fn memory_estimate(n: usize, points: usize) -> u64 {
    let dim = 2 * n as u64;
    #[cfg(feature = "parallel")]
    let threads = rayon::current_num_threads();
    #[cfg(not(feature = "parallel"))]
    let threads = 1;
    let workers = threads.min(points).max(1) as u64;
    MATRICES_PER_WORKER * dim * dim * 8 * workers
}

pub(crate) fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}
