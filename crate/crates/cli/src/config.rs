//! Run configuration: a TOML document with one parameter block per experiment family.

use std::fmt;
use std::path::{Path, PathBuf};

use ballpoly_core::density::{DensitySpec, Region, Step1d};
use ballpoly_core::dominance::Estimator;
use ballpoly_core::extremal::Objective;
use ballpoly_core::geom::{point, DirectionGrid, SupportBody};
use ballpoly_core::wulff::SphericalFunction;
use ballpoly_core::Point;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    DominanceBall,
    DominanceCube,
    Moments,
    WulffConvergence,
    VrAsymptotics,
    Minimize,
    Schneider,
    SimplexBound,
    Gorbovickis,
    HullBridge,
    Selftest,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Self::DominanceBall => "dominance-ball",
            Self::DominanceCube => "dominance-cube",
            Self::Moments => "moments",
            Self::WulffConvergence => "wulff-convergence",
            Self::VrAsymptotics => "vr-asymptotics",
            Self::Minimize => "minimize",
            Self::Schneider => "schneider",
            Self::SimplexBound => "simplex-bound",
            Self::Gorbovickis => "gorbovickis",
            Self::HullBridge => "hull-bridge",
            Self::Selftest => "selftest",
        }
    }

    /// The parameter block this kind reads, if any.
    pub fn block(self) -> Option<&'static str> {
        match self {
            Self::DominanceBall | Self::DominanceCube => Some("dominance"),
            Self::Moments => Some("moments"),
            Self::WulffConvergence | Self::VrAsymptotics => Some("wulff"),
            Self::Minimize | Self::Schneider | Self::SimplexBound => Some("extremal"),
            Self::Gorbovickis => Some("deficit"),
            Self::HullBridge => Some("bridge"),
            Self::Selftest => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance: Option<DominanceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wulff: Option<WulffParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal: Option<ExtremalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deficit: Option<DeficitParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bridge: Option<BridgeParams>,
}

/// A scalar or a per-ball list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            Self::One(v) => vec![v.clone()],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominanceParams {
    pub n: usize,
    /// Number of balls.
    pub count: usize,
    pub radius: OneOrMany<f64>,
    pub j: usize,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<Vec<DensityConfig>>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<Vec<f64>>,
    #[serde(default = "default_failure_rate")]
    pub max_failure_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentParams {
    pub body: BodyConfig,
    pub radius: f64,
    pub count: usize,
    pub j: usize,
    pub trials: usize,
    pub p: Vec<f64>,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default)]
    pub estimator: EstimatorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WulffParams {
    pub function: FunctionConfig,
    pub radii: Vec<f64>,
    /// Directions on which Hausdorff distances are measured.
    #[serde(default = "default_grid_size")]
    pub measure_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalParams {
    pub body: BodyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub objective: ObjectiveConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeficitParams {
    pub points: Vec<Vec<f64>>,
    pub radius: f64,
    /// Monte-Carlo samples above dimension two.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeParams {
    pub test: DensityConfig,
    pub reference: DensityConfig,
    pub count: usize,
    pub trials: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method", deny_unknown_fields)]
pub enum EstimatorConfig {
    #[default]
    Exact,
    SteinerFit { samples: usize },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method", deny_unknown_fields)]
pub enum ObjectiveConfig {
    #[default]
    Exact,
    SteinerFit { samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family", deny_unknown_fields)]
pub enum DensityConfig {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    RadialStep { dim: usize, radii: Vec<f64>, heights: Vec<f64> },
    Product { factors: Vec<StepConfig> },
    Step { breaks: Vec<f64>, heights: Vec<f64> },
    UnitCube { n: usize },
    UnitBall { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub breaks: Vec<f64>,
    pub heights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "shape", deny_unknown_fields)]
pub enum BodyConfig {
    Ball { center: Vec<f64>, radius: f64 },
    Square { side: f64 },
    Polytope { vertices: Vec<Vec<f64>> },
    Segment { direction: Vec<f64>, length: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source", deny_unknown_fields)]
pub enum FunctionConfig {
    /// Support function of a body, tabulated on a circle grid.
    Support { body: BodyConfig, grid_size: usize },
    Constant { value: f64, grid_size: usize },
    /// Values at equally spaced angles.
    Table { values: Vec<f64> },
}

fn default_alpha() -> f64 {
    0.05
}

fn default_failure_rate() -> f64 {
    1e-3
}

fn default_grid_size() -> usize {
    4096
}

fn default_restarts() -> usize {
    32
}

fn default_samples() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaViolation {
    /// Dotted path of the offending key.
    pub key: String,
    pub message: String,
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Schema(Vec<SchemaViolation>),
}

impl ConfigError {
    fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema(vec![SchemaViolation { key: key.into(), message: message.into() }])
    }

    pub fn violations(&self) -> &[SchemaViolation] {
        match self {
            Self::Schema(v) => v,
            _ => &[],
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// First backquoted name in a serde message, e.g. "missing field `seed`".
fn quoted_key(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    if let Err(e) = text.parse::<toml::Table>() {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        return Err(ConfigError::Parse { line, column, message: e.message().to_string() });
    }
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let key = quoted_key(&message).unwrap_or("<document>").to_string();
        let message = match e.span() {
            Some(s) => {
                let (line, column) = line_column(text, s.start);
                format!("{message} (line {line}, column {column})")
            }
            None => message,
        };
        ConfigError::schema(key, message)
    })?;
    let violations = cfg.violations();
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Schema(violations))
    }
}

/// Loads a TOML configuration, or the configuration echoed in a JSON summary.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    if path.extension().is_some_and(|e| e == "json") {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| ConfigError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        let echo = value.get("config").ok_or_else(|| ConfigError::schema("config", "summary has no config echo"))?;
        let cfg: RunConfig = serde_json::from_value(echo.clone()).map_err(|e| {
            let message = e.to_string();
            let key = quoted_key(&message).unwrap_or("config").to_string();
            ConfigError::schema(key, message)
        })?;
        let violations = cfg.violations();
        return if violations.is_empty() { Ok(cfg) } else { Err(ConfigError::Schema(violations)) };
    }
    parse_config(&text)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 over the canonical JSON of everything that affects results
    /// (worker count and output directory excluded).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = None;
        canonical.out = None;
        let bytes = serde_json::to_vec(&canonical).expect("configuration serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Every problem with the document; empty when it is runnable.
    pub fn violations(&self) -> Vec<SchemaViolation> {
        let mut out = Vec::new();
        let mut bad = |key: &str, message: String| out.push(SchemaViolation { key: key.into(), message });
        if self.workers == Some(0) {
            bad("workers", "must be at least 1".into());
        }
        let blocks = [
            ("dominance", self.dominance.is_some()),
            ("moments", self.moments.is_some()),
            ("wulff", self.wulff.is_some()),
            ("extremal", self.extremal.is_some()),
            ("deficit", self.deficit.is_some()),
            ("bridge", self.bridge.is_some()),
        ];
        let wanted = self.kind.block();
        for (name, present) in blocks {
            if Some(name) == wanted && !present {
                bad(name, format!("kind {} needs a [{name}] block", self.kind));
            }
            if Some(name) != wanted && present {
                bad(name, format!("block is not used by kind {}", self.kind));
            }
        }
        match self.kind {
            Kind::DominanceBall | Kind::DominanceCube => {
                if let Some(d) = &self.dominance {
                    d.check(self.kind, &mut bad);
                }
            }
            Kind::Moments => {
                if let Some(m) = &self.moments {
                    check_body("moments.body", &m.body, &mut bad);
                    if m.j != 1 && m.j != 2 {
                        bad("moments.j", "j must satisfy 1 ≤ j ≤ n".into());
                    }
                    if m.trials < 100 {
                        bad("moments.trials", "need at least 100 trials".into());
                    }
                    if !(m.radius > 0.0) {
                        bad("moments.radius", "must be positive".into());
                    }
                    if m.p.is_empty() {
                        bad("moments.p", "list at least one exponent".into());
                    }
                    if body_dim(&m.body) != Some(2) {
                        bad("moments.body", "moment comparison is planar".into());
                    }
                    if m.estimator != EstimatorConfig::Exact && !matches!(m.estimator, EstimatorConfig::SteinerFit { samples } if samples > 0) {
                        bad("moments.estimator", "samples must be positive".into());
                    }
                }
            }
            Kind::WulffConvergence | Kind::VrAsymptotics => {
                if let Some(w) = &self.wulff {
                    if let Err(e) = w.function.build() {
                        bad("wulff.function", e);
                    }
                    if w.radii.is_empty() || w.radii.iter().any(|r| !(*r > 0.0)) {
                        bad("wulff.radii", "need at least one positive radius".into());
                    }
                    if w.measure_size < 8 {
                        bad("wulff.measure_size", "need at least 8 directions".into());
                    }
                }
            }
            Kind::Minimize | Kind::Schneider | Kind::SimplexBound => {
                if let Some(x) = &self.extremal {
                    check_body("extremal.body", &x.body, &mut bad);
                    let n = body_dim(&x.body).unwrap_or(0);
                    if !(2..=3).contains(&n) {
                        bad("extremal.body", "bodies must be planar or three-dimensional".into());
                    }
                    if x.restarts == 0 {
                        bad("extremal.restarts", "need at least one restart".into());
                    }
                    if self.kind != Kind::SimplexBound {
                        match x.j {
                            None => bad("extremal.j", "missing".into()),
                            Some(j) if !(1..=n).contains(&j) => bad("extremal.j", "j must satisfy 1 ≤ j ≤ n".into()),
                            _ => {}
                        }
                        match x.count {
                            None => bad("extremal.count", "missing".into()),
                            Some(c) if c <= n => bad("extremal.count", "need more halfspaces than the dimension".into()),
                            _ => {}
                        }
                    }
                }
            }
            Kind::Gorbovickis => {
                if let Some(d) = &self.deficit {
                    if let Err(e) = points(&d.points) {
                        bad("deficit.points", e);
                    }
                    if !(d.radius > 0.0) {
                        bad("deficit.radius", "must be positive".into());
                    }
                }
            }
            Kind::HullBridge => {
                if let Some(b) = &self.bridge {
                    for (key, d) in [("bridge.test", &b.test), ("bridge.reference", &b.reference)] {
                        match d.build() {
                            Ok(spec) if spec.dim() != 2 => bad(key, "the bridge is planar".into()),
                            Err(e) => bad(key, e),
                            _ => {}
                        }
                    }
                    if b.trials < 100 {
                        bad("bridge.trials", "need at least 100 trials".into());
                    }
                    if b.count < 2 {
                        bad("bridge.count", "need at least two points".into());
                    }
                    if !(b.radius > 0.0) {
                        bad("bridge.radius", "must be positive".into());
                    }
                }
            }
            Kind::Selftest => {}
        }
        out
    }
}

impl DominanceParams {
    fn check(&self, kind: Kind, bad: &mut impl FnMut(&str, String)) {
        if !(1..=self.n).contains(&self.j) {
            bad("dominance.j", "j must satisfy 1 ≤ j ≤ n".into());
        }
        if self.count == 0 {
            bad("dominance.count", "need at least one ball".into());
        }
        if self.trials < 100 {
            bad("dominance.trials", "need at least 100 trials".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bad("dominance.alpha", "must lie in (0, 1)".into());
        }
        let radii = self.radius.to_vec();
        if radii.len() != 1 && radii.len() != self.count {
            bad("dominance.radius", "give one radius or one per ball".into());
        }
        if radii.iter().any(|r| !(*r > 0.0)) {
            bad("dominance.radius", "radii must be positive".into());
        }
        if self.s_grid.as_ref().is_some_and(|s| s.is_empty()) {
            bad("dominance.s_grid", "must not be empty".into());
        }
        if self.estimator == EstimatorConfig::Exact && self.n != 2 {
            bad("dominance.estimator", "the exact estimator is planar; use steiner-fit".into());
        }
        let list = match (&self.density, &self.densities) {
            (Some(d), None) => vec![d.clone()],
            (None, Some(ds)) if ds.len() == self.count || ds.len() == 1 => ds.clone(),
            (None, Some(_)) => return bad("dominance.densities", "give one density or one per ball".into()),
            _ => return bad("dominance.density", "give exactly one of `density` and `densities`".into()),
        };
        for d in &list {
            match d.build() {
                Ok(spec) if spec.dim() != self.n => bad("dominance.density", format!("density lives in dimension {}, not {}", spec.dim(), self.n)),
                Ok(spec) if kind == Kind::DominanceCube && !cube_admissible(&spec) => {
                    bad("dominance.density", "the cube comparison needs a product with coordinate sup at most 1, or a box with sides at least 1".into())
                }
                Err(e) => bad("dominance.density", e),
                _ => {}
            }
        }
    }

    pub fn densities(&self) -> Result<Vec<DensitySpec>, String> {
        match (&self.density, &self.densities) {
            (Some(d), _) => Ok(vec![d.build()?]),
            (None, Some(ds)) => ds.iter().map(DensityConfig::build).collect(),
            (None, None) => Err("no density given".into()),
        }
    }
}

fn cube_admissible(spec: &DensitySpec) -> bool {
    match spec {
        DensitySpec::Product(fs) => fs.iter().all(|f| f.sup() <= 1.0 + 1e-12),
        DensitySpec::Uniform(Region::Box { lo, hi }) => lo.iter().zip(hi).all(|(l, h)| h - l >= 1.0 - 1e-12),
        _ => false,
    }
}

fn check_body(key: &str, body: &BodyConfig, bad: &mut impl FnMut(&str, String)) {
    if let Err(e) = body.build() {
        bad(key, e);
    }
}

fn body_dim(body: &BodyConfig) -> Option<usize> {
    body.build().ok().map(|b| b.dim())
}

fn points(raw: &[Vec<f64>]) -> Result<Vec<Point>, String> {
    let Some(first) = raw.first() else {
        return Err("need at least one point".into());
    };
    if first.len() < 2 {
        return Err("points must have dimension at least 2".into());
    }
    if raw.iter().any(|p| p.len() != first.len()) {
        return Err("points differ in dimension".into());
    }
    if raw.iter().flatten().any(|x| !x.is_finite()) {
        return Err("coordinates must be finite".into());
    }
    Ok(raw.iter().map(|p| point(p)).collect())
}

impl DeficitParams {
    pub fn points(&self) -> Result<Vec<Point>, String> {
        points(&self.points)
    }
}

impl DensityConfig {
    pub fn build(&self) -> Result<DensitySpec, String> {
        let spec = match self {
            Self::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err("lo and hi must have the same nonzero length".into());
                }
                DensitySpec::uniform(Region::Box { lo: lo.clone(), hi: hi.clone() })
            }
            Self::Ball { center, radius } => DensitySpec::uniform(Region::Ball { center: point(center), radius: *radius }),
            Self::RadialStep { dim, radii, heights } => DensitySpec::radial_step(*dim, radii.clone(), heights.clone()),
            Self::Product { factors } => factors
                .iter()
                .map(|f| Step1d::new(f.breaks.clone(), f.heights.clone()))
                .collect::<Result<Vec<_>, _>>()
                .map(DensitySpec::Product),
            Self::Step { breaks, heights } => Step1d::new(breaks.clone(), heights.clone()).map(DensitySpec::Step1d),
            Self::UnitCube { n } => Ok(DensitySpec::unit_cube(*n)),
            Self::UnitBall { n } => Ok(DensitySpec::unit_ball(*n)),
        };
        let spec = spec.map_err(|e| e.to_string())?;
        if spec.dim() == 0 {
            return Err("density has dimension 0".into());
        }
        Ok(spec)
    }
}

impl BodyConfig {
    pub fn build(&self) -> Result<SupportBody, String> {
        let body = match self {
            Self::Ball { center, radius } => {
                if center.is_empty() {
                    return Err("center must not be empty".into());
                }
                SupportBody::ball(point(center), *radius)
            }
            Self::Square { side } => {
                if !(*side > 0.0) {
                    return Err("side must be positive".into());
                }
                Ok(SupportBody::square(*side))
            }
            Self::Polytope { vertices } => SupportBody::polytope(points(vertices)?),
            Self::Segment { direction, length } => SupportBody::segment(&point(direction), *length),
        };
        body.map_err(|e| e.to_string())
    }
}

impl FunctionConfig {
    pub fn build(&self) -> Result<SphericalFunction, String> {
        let f = match self {
            Self::Support { body, grid_size } => {
                let body = body.build()?;
                if body.dim() != 2 {
                    return Err("spherical functions are planar".into());
                }
                SphericalFunction::from_support(&body, DirectionGrid::circle(*grid_size, 0.0).map_err(|e| e.to_string())?)
            }
            Self::Constant { value, grid_size } => SphericalFunction::constant(DirectionGrid::circle(*grid_size, 0.0).map_err(|e| e.to_string())?, *value),
            Self::Table { values } => SphericalFunction::tabulated_2d(values.clone()),
        };
        f.map_err(|e| e.to_string())
    }
}

impl EstimatorConfig {
    pub fn to_core(&self) -> Estimator {
        match self {
            Self::Exact => Estimator::Exact2d,
            Self::SteinerFit { samples } => Estimator::SteinerFit { samples: *samples },
        }
    }
}

impl ObjectiveConfig {
    pub fn to_core(&self) -> Objective {
        match self {
            Self::Exact => Objective::ExactPolytope,
            Self::SteinerFit { samples } => Objective::SteinerFit { samples: *samples },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "dominance-ball"
seed = 7

[dominance]
n = 2
count = 3
radius = 3.0
j = 2
trials = 1000
density = { family = "box", lo = [-0.5, -0.5], hi = [0.5, 0.5] }
"#;

    #[test]
    fn minimal_dominance_config_is_valid() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.kind, Kind::DominanceBall);
        assert_eq!(cfg.seed, 7);
        let d = cfg.dominance.unwrap();
        assert_eq!((d.n, d.count, d.j, d.trials), (2, 3, 2, 1000));
        assert_eq!(d.alpha, 0.05);
    }

    #[test]
    fn j_above_dimension_names_the_key() {
        let err = parse_config(&MINIMAL.replace("j = 2", "j = 5")).unwrap_err();
        let v = err.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].key, "dominance.j");
        assert!(v[0].message.contains("j must satisfy 1 ≤ j ≤ n"));
    }

    #[test]
    fn seed_is_mandatory() {
        let err = parse_config(&MINIMAL.replace("seed = 7", "")).unwrap_err();
        assert_eq!(err.violations()[0].key, "seed");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(&MINIMAL.replace("trials = 1000", "trials = 1000\ntrails = 5")).unwrap_err();
        assert_eq!(err.violations()[0].key, "trails");
        let err = parse_config(&format!("colour = 1\n{MINIMAL}")).unwrap_err();
        assert_eq!(err.violations()[0].key, "colour");
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        match parse_config("kind = \"selftest\"\nseed = = 3\n").unwrap_err() {
            ConfigError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let text = MINIMAL.replace("j = 2", "j = 0").replace("trials = 1000", "trials = 10");
        let keys: Vec<String> = parse_config(&text).unwrap_err().violations().iter().map(|v| v.key.clone()).collect();
        assert!(keys.contains(&"dominance.j".to_string()) && keys.contains(&"dominance.trials".to_string()), "{keys:?}");
    }

    #[test]
    fn missing_and_stray_blocks() {
        let err = parse_config("kind = \"moments\"\nseed = 1\n").unwrap_err();
        assert_eq!(err.violations()[0].key, "moments");
        let err = parse_config(&MINIMAL.replace("dominance-ball", "selftest")).unwrap_err();
        assert_eq!(err.violations()[0].key, "dominance");
    }

    #[test]
    fn toml_round_trip_and_hash() {
        let cfg = parse_config(MINIMAL).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        let mut other = cfg.clone();
        other.workers = Some(4);
        assert_eq!(cfg.hash(), other.hash());
        other.seed = 8;
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn cube_comparison_rejects_tall_densities() {
        let text = MINIMAL
            .replace("dominance-ball", "dominance-cube")
            .replace(r#"{ family = "box", lo = [-0.5, -0.5], hi = [0.5, 0.5] }"#, r#"{ family = "ball", center = [0.0, 0.0], radius = 0.5 }"#);
        assert_eq!(parse_config(&text).unwrap_err().violations()[0].key, "dominance.density");
    }
}
