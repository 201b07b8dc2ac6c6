//! Run configuration: JSON file, dotted-key overrides, validation and echo.

use std::f64::consts::PI;
use std::sync::Arc;

use obstacle_dg::exact::DppOracle;
use obstacle_dg::obstacle::{ObstacleSpec, ObstacleVariant, DEFAULT_REFINE_ITERS, DEFAULT_SAMPLES};
use obstacle_dg::rkdg::CflPolicy;
use obstacle_dg::schedule::TimeSchedule;
use obstacle_dg::solver2d::{Obstacle2D, DEFAULT_SUBGRID, MAX_DEGREE_2D};
use obstacle_dg::study::{Problem1D, Problem2D, Scheme, Study1D, Study2D};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

const MAX_DEGREE_1D: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleName {
    /// `sin(pi x)`, or `sin(pi (x + y))` in 2-D, with the closed-form window max.
    SinPi,
    /// The same obstacle with the sampled window max.
    CustomSampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub name: ObstacleName,
    #[serde(default)]
    pub variant: ObstacleVariant,
    #[serde(default = "default_window_samples")]
    pub window_samples: usize,
    #[serde(default = "default_refine_iters")]
    pub refine_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    /// `0.5 + sin(pi x)` (or of `x + y`).
    Example1,
    /// `sin(pi x)` (or of `x + y`).
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Velocity {
    One(f64),
    Two([f64; 2]),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    /// Solution dump (CSV).
    pub solution: Option<String>,
    /// Convergence table (CSV); stdout when absent.
    pub table: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CflMode {
    Warn,
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_dimension")]
    pub dimension: u8,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub ny: Option<usize>,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub velocity: Option<Velocity>,
    /// `None` picks the scheme default.
    #[serde(default)]
    pub schedule: Option<TimeSchedule>,
    #[serde(default = "default_obstacle")]
    pub obstacle: Option<ObstacleConfig>,
    #[serde(default = "default_initial")]
    pub initial: InitialData,
    /// Error samples per cell (1-D) or per cell side (2-D).
    #[serde(default)]
    pub samples: Option<usize>,
    /// Sample points per cell (per side in 2-D) in the solution dump.
    #[serde(default = "default_dump_per_cell")]
    pub dump_per_cell: usize,
    #[serde(default = "default_cfl")]
    pub cfl_policy: CflMode,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_dimension() -> u8 {
    1
}
fn default_scheme() -> Scheme {
    Scheme::Rkdg
}
fn default_degree() -> usize {
    2
}
fn default_n() -> usize {
    80
}
fn default_t_final() -> f64 {
    0.5
}
fn default_obstacle() -> Option<ObstacleConfig> {
    Some(ObstacleConfig {
        name: ObstacleName::SinPi,
        variant: ObstacleVariant::TwoPoint,
        window_samples: DEFAULT_SAMPLES,
        refine_iters: DEFAULT_REFINE_ITERS,
    })
}
fn default_window_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_refine_iters() -> usize {
    DEFAULT_REFINE_ITERS
}
fn default_initial() -> InitialData {
    InitialData::Example1
}
fn default_dump_per_cell() -> usize {
    5
}
fn default_cfl() -> CflMode {
    CflMode::Warn
}

/// Parses `key=value`; the value is JSON when it parses, a string otherwise.
pub fn parse_override(raw: &str) -> Result<(String, Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::validation("override", format!("expected key=value, got `{raw}`")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::validation("override", format!("bad key in `{raw}`")));
    }
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.to_string(), value))
}

/// Sets a dotted key, creating intermediate objects.
pub fn apply_override(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if node.is_null() {
            *node = Value::Object(Map::new());
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::validation(&parts[..i].join("."), "is not an object".to_string()))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split yields at least one part")
}

impl RunConfig {
    /// Parses JSON text with overrides applied, then validates.
    pub fn from_json(text: &str, overrides: &[(String, Value)]) -> Result<Self, CliError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::validation("config", format!("invalid JSON: {e}")))?;
        if !value.is_object() {
            return Err(CliError::validation("config", "top level must be an object".into()));
        }
        // Defaults first so that overrides into nested fields see a full object.
        let mut defaults: Value = serde_json::from_str::<RunConfig>("{}")
            .and_then(serde_json::to_value)
            .expect("defaults round-trip");
        merge(&mut defaults, value);
        let mut value = defaults;
        for (k, v) in overrides {
            apply_override(&mut value, k, v.clone())?;
        }
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_string() } else { path };
            CliError::validation(&field, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::validation(field, msg));
        match self.dimension {
            1 | 2 => {}
            d => return bad("dimension", format!("must be 1 or 2, got {d}")),
        }
        let max_degree = if self.dimension == 1 { MAX_DEGREE_1D } else { MAX_DEGREE_2D };
        if self.degree > max_degree {
            return bad("degree", format!("must be at most {max_degree}, got {}", self.degree));
        }
        if self.n == 0 {
            return bad("n", "must be positive".into());
        }
        for (name, v) in [("nx", self.nx), ("ny", self.ny)] {
            if v == Some(0) {
                return bad(name, "must be positive".into());
            }
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("t_final", format!("must be positive, got {}", self.t_final));
        }
        match (self.dimension, self.velocity) {
            (1, Some(Velocity::Two(_))) => return bad("velocity", "1-D runs take a single speed".into()),
            (2, Some(Velocity::One(_))) => return bad("velocity", "2-D runs take [c1, c2]".into()),
            _ => {}
        }
        let speeds: Vec<f64> = match self.velocity {
            Some(Velocity::One(c)) => vec![c],
            Some(Velocity::Two(c)) => c.to_vec(),
            None => vec![],
        };
        if speeds.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return bad("velocity", format!("speeds must be positive, got {speeds:?}"));
        }
        if let Some(s) = &self.schedule {
            s.validate().map_err(|e| CliError::validation("schedule", e.to_string()))?;
        }
        if let Some(ob) = &self.obstacle {
            if ob.window_samples < 2 {
                return bad("obstacle.window_samples", "must be at least 2".into());
            }
            if self.dimension == 2 && ob.variant == ObstacleVariant::ExactWindow {
                return bad("obstacle.variant", "2-D runs support only two_point".into());
            }
        }
        if self.samples.is_some_and(|m| m < 2) {
            return bad("samples", "must be at least 2".into());
        }
        if self.dump_per_cell == 0 {
            return bad("dump_per_cell", "must be positive".into());
        }
        if self.dimension == 2 && self.scheme == Scheme::Sldg {
            return bad("scheme", "2-D runs support only rkdg".into());
        }
        if self.dimension == 1 && (self.nx.is_some() || self.ny.is_some()) {
            return bad("nx", "nx/ny apply to 2-D runs only; use n".into());
        }
        Ok(())
    }

    pub fn speed_1d(&self) -> f64 {
        match self.velocity {
            Some(Velocity::One(c)) => c,
            _ => 1.0,
        }
    }

    pub fn speeds_2d(&self) -> (f64, f64) {
        match self.velocity {
            Some(Velocity::Two([a, b])) => (a, b),
            _ => (0.5, 0.5),
        }
    }

    pub fn grid_2d(&self, n: usize) -> (usize, usize) {
        (self.nx.unwrap_or(n), self.ny.unwrap_or(n))
    }

    /// Schedule after defaults: `0.2 h` for RKDG and `h / 2` for SLDG in 1-D.
    pub fn resolved_schedule_1d(&self) -> TimeSchedule {
        self.schedule.unwrap_or(match self.scheme {
            Scheme::Rkdg => TimeSchedule::DtEqFracH { frac: 0.2 },
            Scheme::Sldg => TimeSchedule::DtEqFracH { frac: 0.5 },
        })
    }

    fn obstacle_spec(&self) -> Option<ObstacleSpec<f64>> {
        self.obstacle.as_ref().map(|ob| {
            let spec = match ob.name {
                ObstacleName::SinPi => ObstacleSpec::sin_pi(),
                ObstacleName::CustomSampled => ObstacleSpec::sampled(|x: f64| (PI * x).sin())
                    .with_sampling(ob.window_samples, ob.refine_iters)
                    .expect("sample count validated"),
            };
            spec.with_variant(ob.variant)
        })
    }

    fn initial_1d(&self) -> fn(f64) -> f64 {
        match self.initial {
            InitialData::Example1 => |x| 0.5 + (PI * x).sin(),
            InitialData::Sine => |x| (PI * x).sin(),
        }
    }

    /// Value-function oracle along one direction with speed `c`.
    fn oracle_1d(&self, c: f64) -> Result<DppOracle<f64>, CliError> {
        // The oracle always uses the closed-form window max.
        let spec = self.obstacle.as_ref().map(|ob| ObstacleSpec::sin_pi().with_variant(ob.variant));
        DppOracle::new(self.initial_1d(), spec, c, (-1.0, 1.0))
            .map_err(|e| CliError::validation("initial", e.to_string()))
    }

    pub fn study_1d(&self) -> Result<Study1D, CliError> {
        let c = self.speed_1d();
        let oracle = self.oracle_1d(c)?;
        let problem = Problem1D {
            domain: (-1.0, 1.0),
            c,
            initial: Arc::new(self.initial_1d()),
            obstacle: self.obstacle_spec(),
            exact: Some(Arc::new(move |t, x| oracle.value(t, x))),
        };
        let mut s = Study1D::new(problem, self.scheme, self.t_final, self.resolved_schedule_1d());
        s.degree = self.degree;
        s.cfl_policy = self.cfl();
        if let Some(m) = self.samples {
            s.samples_per_cell = m;
        }
        Ok(s)
    }

    pub fn study_2d(&self) -> Result<Study2D, CliError> {
        let (c1, c2) = self.speeds_2d();
        // Data depends on x + y only, which moves with speed c1 + c2.
        let oracle = self.oracle_1d(c1 + c2)?;
        let f = self.initial_1d();
        let problem = Problem2D {
            domain: ((-1.0, 1.0), (-1.0, 1.0)),
            c: (c1, c2),
            initial: Arc::new(move |x, y| f(x + y)),
            obstacle: self.obstacle.as_ref().map(|_| Obstacle2D::sin_pi_diagonal()),
            exact: Some(Arc::new(move |t, x, y| oracle.value(t, x + y))),
        };
        let mut s = Study2D::new(problem, self.t_final);
        s.degree = self.degree;
        s.schedule = self.schedule;
        s.cfl_policy = self.cfl();
        s.subgrid = self.samples.unwrap_or(DEFAULT_SUBGRID);
        Ok(s)
    }

    fn cfl(&self) -> CflPolicy {
        match self.cfl_policy {
            CflMode::Warn => CflPolicy::Warn,
            CflMode::Strict => CflPolicy::Strict,
        }
    }

    /// Resolved configuration as sorted `key = value` pairs.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut resolved = self.clone();
        if self.dimension == 1 {
            resolved.schedule = Some(self.resolved_schedule_1d());
            resolved.velocity = Some(Velocity::One(self.speed_1d()));
            resolved.samples = Some(self.samples.unwrap_or(obstacle_dg::metrics::DEFAULT_SAMPLES_PER_CELL));
        } else {
            let (a, b) = self.speeds_2d();
            resolved.velocity = Some(Velocity::Two([a, b]));
            resolved.samples = Some(self.samples.unwrap_or(DEFAULT_SUBGRID));
        }
        let value = serde_json::to_value(&resolved).expect("config serializes");
        let mut out = Vec::new();
        flatten("", &value, &mut out);
        if self.dimension == 2 && self.schedule.is_none() {
            out.push(("schedule".into(), "dt = 0.2 min(hx, hy) / (c1 + c2)".into()));
        }
        out.sort();
        out
    }
}

/// Deep merge of objects; anything else in `top` replaces `base`.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Null => {}
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
