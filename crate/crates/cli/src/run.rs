//! Dispatch of a validated configuration to the experiment it names.

use ballpoly_core::dominance::{check_ball_extremizer, check_cube_extremizer, moment_compare, MomentConfig};
use ballpoly_core::extremal::{gorbovickis_deficit, hull_dominance_bridge, minimize_mjn, schneider_check, simplex_bound_check, CircumscriptionProblem};
use ballpoly_core::geom::DirectionGrid;
use ballpoly_core::wulff::{convergence_rate, vr_asymptotics};
use ballpoly_core::ExperimentConfig;
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{Kind, RunConfig};
use crate::selftest;

/// Columns of the tabular output, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub kind: Kind,
    /// SHA-256 of the effective configuration.
    pub config_hash: String,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub workers: usize,
    pub config: RunConfig,
    /// Experiment output; every estimate sits next to its standard error or band.
    pub metrics: Value,
    /// Trials dropped because the estimator failed.
    pub failed_trials: usize,
    /// Whether the experiment's own checks passed (selftest cases, feasibility).
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

impl ResultRecord {
    /// The parts that depend only on configuration and seed.
    pub fn payload(&self) -> String {
        serde_json::to_string(&(&self.metrics, &self.table, self.failed_trials, self.ok)).expect("record serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{kind} experiment failed: {source}")]
    Experiment { kind: Kind, source: ballpoly_core::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot start {0} worker threads: {1}")]
    Pool(usize, String),
}

struct Outcome {
    metrics: Value,
    table: Option<Table>,
    failed: usize,
    ok: bool,
}

impl Outcome {
    fn new(metrics: impl Serialize) -> Self {
        Self { metrics: serde_json::to_value(metrics).expect("report serializes"), table: None, failed: 0, ok: true }
    }
}

/// Runs `cfg` on a pool of `workers` threads.
pub fn run(cfg: &RunConfig, workers: usize) -> Result<ResultRecord, RunError> {
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(RunError::Config(violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Pool(workers, e.to_string()))?;
    let started = now();
    log::info!("running {} (seed {}, {} workers)", cfg.kind, cfg.seed, workers);
    let outcome = pool.install(|| dispatch(cfg)).map_err(|e| match e {
        Failure::Core(source) => RunError::Experiment { kind: cfg.kind, source },
        Failure::Config(msg) => RunError::Config(msg),
    })?;
    log::info!("{} finished", cfg.kind);
    Ok(ResultRecord {
        kind: cfg.kind,
        config_hash: cfg.hash(),
        version: concat!("ballpoly ", env!("CARGO_PKG_VERSION")).to_string(),
        started,
        finished: now(),
        workers,
        config: cfg.clone(),
        metrics: outcome.metrics,
        failed_trials: outcome.failed,
        ok: outcome.ok,
        table: outcome.table,
    })
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

enum Failure {
    Core(ballpoly_core::Error),
    Config(String),
}

impl From<ballpoly_core::Error> for Failure {
    fn from(e: ballpoly_core::Error) -> Self {
        Self::Core(e)
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Self::Config(e)
    }
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let missing = |block: &str| Failure::Config(format!("missing [{block}] block"));
    match cfg.kind {
        Kind::DominanceBall | Kind::DominanceCube => {
            let d = cfg.dominance.as_ref().ok_or_else(|| missing("dominance"))?;
            let exp = ExperimentConfig {
                n: d.n,
                count: d.count,
                radii: d.radius.to_vec(),
                j: d.j,
                densities: d.densities()?,
                trials: d.trials,
                s_grid: d.s_grid.clone().unwrap_or_default(),
                seed: cfg.seed,
                estimator: d.estimator.to_core(),
                max_failure_rate: d.max_failure_rate,
            };
            let report = if cfg.kind == Kind::DominanceBall { check_ball_extremizer(&exp, d.alpha)? } else { check_cube_extremizer(&exp, d.alpha)? };
            let mut table = Table::new(&["s", "p_test", "p_extremal", "band_test", "band_extremal"]);
            for (i, s) in report.test.s.iter().enumerate() {
                table.rows.push(vec![*s, report.test.p[i], report.extremal.p[i], report.test.band, report.extremal.band]);
            }
            let failed = report.failed_test + report.failed_extremal;
            Ok(Outcome { table: Some(table), failed, ..Outcome::new(report) })
        }
        Kind::Moments => {
            let m = cfg.moments.as_ref().ok_or_else(|| missing("moments"))?;
            let mc = MomentConfig {
                body: m.body.build()?,
                big_r: m.radius,
                count: m.count,
                j: m.j,
                trials: m.trials,
                seed: cfg.seed,
                estimator: m.estimator.to_core(),
                grid_size: m.grid_size,
            };
            let report = moment_compare(&mc, &m.p)?;
            let mut table = Table::new(&["p", "lhs", "lhs_stderr", "rhs", "rhs_stderr"]);
            table.rows = report.rows.iter().map(|r| vec![r.p, r.lhs, r.lhs_stderr, r.rhs, r.rhs_stderr]).collect();
            let ok = report.rows.iter().all(|r| r.holds);
            Ok(Outcome { table: Some(table), ok, ..Outcome::new(report) })
        }
        Kind::WulffConvergence => {
            let w = cfg.wulff.as_ref().ok_or_else(|| missing("wulff"))?;
            let f = w.function.build()?;
            let measure = DirectionGrid::circle(w.measure_size, 0.5)?;
            let report = convergence_rate(&f, &w.radii, &measure)?;
            // discretization uncertainty: the change after one grid refinement
            let fine = convergence_rate(&f.refined()?, &w.radii, &measure)?;
            let stderr: Vec<f64> = report.rows.iter().zip(&fine.rows).map(|(a, b)| (a.residual - b.residual).abs()).collect();
            let mut table = Table::new(&["R", "residual", "stderr"]);
            table.rows = report.rows.iter().zip(&stderr).map(|(r, e)| vec![r.big_r, r.residual, *e]).collect();
            Ok(Outcome { table: Some(table), ..Outcome::new(json!({ "report": report, "residual_stderr": stderr })) })
        }
        Kind::VrAsymptotics => {
            let w = cfg.wulff.as_ref().ok_or_else(|| missing("wulff"))?;
            let report = vr_asymptotics(&w.function.build()?, &w.radii)?;
            let mut table = Table::new(&["R", "residual", "stderr"]);
            table.rows = report.rows.iter().map(|r| vec![r.big_r, r.residual, r.stderr]).collect();
            Ok(Outcome { table: Some(table), ..Outcome::new(report) })
        }
        Kind::Minimize => {
            let x = cfg.extremal.as_ref().ok_or_else(|| missing("extremal"))?;
            let prob = CircumscriptionProblem::new(x.body.build()?, x.j.unwrap_or(0), x.count.unwrap_or(0))?.with_objective(x.objective.to_core());
            let r = minimize_mjn(&prob, x.restarts, cfg.seed)?;
            // restart spread is the only uncertainty a local search can report
            let spread = r.trace.iter().copied().fold(f64::NEG_INFINITY, f64::max) - r.value;
            let mut table = Table::new(&["restart", "value"]);
            table.rows = r.trace.iter().enumerate().map(|(i, v)| vec![i as f64, *v]).collect();
            let ok = r.feasible;
            Ok(Outcome { table: Some(table), ok, ..Outcome::new(json!({ "optimum": r, "restart_spread": spread })) })
        }
        Kind::Schneider => {
            let x = cfg.extremal.as_ref().ok_or_else(|| missing("extremal"))?;
            let report = schneider_check(&x.body.build()?, x.j.unwrap_or(0), x.count.unwrap_or(0), x.restarts, cfg.seed)?;
            let ok = report.optimum.feasible;
            Ok(Outcome { ok, ..Outcome::new(report) })
        }
        Kind::SimplexBound => {
            let x = cfg.extremal.as_ref().ok_or_else(|| missing("extremal"))?;
            Ok(Outcome::new(simplex_bound_check(&x.body.build()?, x.restarts, cfg.seed)?))
        }
        Kind::Gorbovickis => {
            let d = cfg.deficit.as_ref().ok_or_else(|| missing("deficit"))?;
            Ok(Outcome::new(gorbovickis_deficit(&d.points()?, d.radius, d.samples, cfg.seed)?))
        }
        Kind::HullBridge => {
            let b = cfg.bridge.as_ref().ok_or_else(|| missing("bridge"))?;
            let report = hull_dominance_bridge(&b.test.build()?, &b.reference.build()?, b.count, b.trials, b.radius, cfg.seed)?;
            Ok(Outcome::new(report))
        }
        Kind::Selftest => {
            let checks = selftest::run_all();
            let ok = checks.iter().all(|c| c.passed);
            for c in checks.iter().filter(|c| !c.passed) {
                log::error!("selftest {} failed: {} vs {}", c.name, c.value, c.expected);
            }
            Ok(Outcome { ok, ..Outcome::new(checks) })
        }
    }
}
