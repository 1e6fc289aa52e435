//! Monte-Carlo comparison of `V_j` of random ball-polyhedra against the
//! extremal (ball or cube) center distributions, moment comparisons, and
//! small exact checks of the rearrangement inequalities behind them.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{DensitySpec, Region, Step1d, Witness};
use crate::error::{Error, Result};
use crate::geom::{Ball, BallPolyhedron, DirectionGrid, Point, StarBody, SupportBody};
use crate::intrinsic::{exact_2d, fit_intrinsic_volumes, omega, EpsilonGrid};
use crate::rng::{derive_seed, fill_uniform_ball, fill_unit_sphere, stream_rng};

/// How `V_j` of each sampled ball-polyhedron is computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Estimator {
    /// Circular-arc formulas; planar only.
    Exact2d,
    /// Steiner-polynomial fit with the default expansion radii.
    SteinerFit { samples: usize },
}

impl Estimator {
    /// `V_j` of `p`, zero when empty.
    pub fn vj(&self, p: &BallPolyhedron, j: usize, seed: u64) -> Result<f64> {
        if p.certainly_empty() {
            return Ok(0.0);
        }
        match self {
            Self::Exact2d => Ok(exact_2d(p)?.values[j]),
            Self::SteinerFit { samples } => {
                let grid = match EpsilonGrid::default_for(p, *samples) {
                    Err(Error::EmptyIntersection) => return Ok(0.0),
                    other => other?,
                };
                Ok(fit_intrinsic_volumes(p, &grid, seed)?.values[j])
            }
        }
    }
}

/// Parameters of a dominance experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Number of balls.
    pub count: usize,
    /// One radius shared by all balls, or one per ball.
    pub radii: Vec<f64>,
    pub j: usize,
    /// One center density shared by all balls, or one per ball.
    pub densities: Vec<DensitySpec>,
    pub trials: usize,
    pub s_grid: Vec<f64>,
    pub seed: u64,
    pub estimator: Estimator,
    /// Largest fraction of failed trials tolerated.
    pub max_failure_rate: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=self.n).contains(&self.j) {
            return Err(Error::InvalidInput(format!("j must satisfy 1 <= j <= n, got j={} n={}", self.j, self.n)));
        }
        if self.count == 0 {
            return Err(Error::InvalidInput("need at least one ball".into()));
        }
        if self.radii.len() != 1 && self.radii.len() != self.count {
            return Err(Error::InvalidInput("radii must have length 1 or N".into()));
        }
        if self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidInput("radii must be positive".into()));
        }
        if self.densities.len() != 1 && self.densities.len() != self.count {
            return Err(Error::InvalidInput("densities must have length 1 or N".into()));
        }
        if let Some(d) = self.densities.iter().find(|d| d.dim() != self.n) {
            return Err(Error::DimensionMismatch { expected: self.n, found: d.dim() });
        }
        if self.trials < 100 {
            return Err(Error::InvalidInput(format!("need at least 100 trials, got {}", self.trials)));
        }
        if self.estimator == Estimator::Exact2d && self.n != 2 {
            return Err(Error::UnsupportedDimension { dim: self.n });
        }
        Ok(())
    }

    fn radius(&self, i: usize) -> f64 {
        self.radii[if self.radii.len() == 1 { 0 } else { i }]
    }

    fn density(&self, i: usize) -> &DensitySpec {
        &self.densities[if self.densities.len() == 1 { 0 } else { i }]
    }

    fn with_densities(&self, densities: Vec<DensitySpec>, seed: u64) -> Self {
        Self { densities, seed, ..self.clone() }
    }
}

/// `V_j` samples of a dominance run, in trial order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trials {
    pub values: Vec<f64>,
    pub failed: usize,
}

/// Draws `count` centers per trial from the configured densities and
/// records `V_j` of the intersection of the balls around them.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Trials> {
    cfg.validate()?;
    let samplers = (0..cfg.count).map(|i| cfg.density(i).sampler()).collect::<Result<Vec<_>>>()?;
    let outcomes: Vec<Option<f64>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Option<f64>> {
            let mut rng = stream_rng(cfg.seed, t);
            let mut balls = Vec::with_capacity(cfg.count);
            let mut x = vec![0.0; cfg.n];
            for (i, s) in samplers.iter().enumerate() {
                s.sample_into(&mut rng, &mut x)?;
                balls.push(Ball::new(Point::from_column_slice(&x), cfg.radius(i))?);
            }
            let p = BallPolyhedron::new(balls)?;
            match cfg.estimator.vj(&p, cfg.j, derive_seed(cfg.seed, t)) {
                Ok(v) => Ok(Some(v)),
                Err(Error::DegenerateTangency | Error::NonConvergence { .. } | Error::IllConditioned { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    let limit = (cfg.max_failure_rate * cfg.trials as f64).floor() as usize;
    if failed > limit {
        return Err(Error::TooManyFailures { failed, total: cfg.trials, limit });
    }
    Ok(Trials { values: outcomes.into_iter().flatten().collect(), failed })
}

/// Empirical `s -> P(V > s)` with a DKW band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub trials: usize,
    pub band: f64,
    pub alpha: f64,
}

/// Half-width of the simultaneous DKW band at level `alpha` for `m` samples.
pub fn dkw_band(m: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * m as f64)).sqrt()
}

pub fn survival(samples: &[f64], s_grid: &[f64], alpha: f64) -> Result<SurvivalCurve> {
    if samples.len() < 100 {
        return Err(Error::InvalidInput(format!("need at least 100 samples, got {}", samples.len())));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput("alpha must lie in (0, 1)".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let p = s_grid
        .iter()
        .map(|s| (m - sorted.partition_point(|v| v <= s)) as f64 / m as f64)
        .collect();
    Ok(SurvivalCurve { s: s_grid.to_vec(), p, trials: m, band: dkw_band(m, alpha), alpha })
}

/// `k` equally spaced levels between the 2% and 98% quantiles of the pooled samples.
pub fn default_s_grid(a: &[f64], b: &[f64], k: usize) -> Vec<f64> {
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    if pooled.is_empty() || k == 0 {
        return Vec::new();
    }
    let q = |f: f64| pooled[((pooled.len() - 1) as f64 * f) as usize];
    let (lo, hi) = (q(0.02), q(0.98));
    if k == 1 || hi <= lo {
        return vec![lo];
    }
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "UPPERCASE")]
pub enum Verdict {
    Consistent,
    Violation { s: f64, gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceVerdict {
    /// `p_test(s) - p_extremal(s)` per grid level.
    pub gaps: Vec<f64>,
    pub verdict: Verdict,
    pub alpha: f64,
}

/// Flags a violation where the test curve exceeds the extremal curve by
/// more than the two DKW bands together.
pub fn compare(test: &SurvivalCurve, extremal: &SurvivalCurve) -> Result<DominanceVerdict> {
    if test.s != extremal.s {
        return Err(Error::InvalidInput("survival curves use different level grids".into()));
    }
    let gaps: Vec<f64> = test.p.iter().zip(&extremal.p).map(|(a, b)| a - b).collect();
    let allowed = test.band + extremal.band;
    let worst = gaps
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > allowed)
        .max_by(|a, b| a.1.total_cmp(b.1));
    let verdict = match worst {
        Some((i, g)) => Verdict::Violation { s: test.s[i], gap: *g },
        None => Verdict::Consistent,
    };
    Ok(DominanceVerdict { gaps, verdict, alpha: test.alpha })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub test: SurvivalCurve,
    pub extremal: SurvivalCurve,
    pub verdict: DominanceVerdict,
    pub failed_test: usize,
    pub failed_extremal: usize,
}

fn dominance(cfg: &ExperimentConfig, extremal: Vec<DensitySpec>, alpha: f64) -> Result<DominanceReport> {
    let test = run_trials(cfg)?;
    let ext = run_trials(&cfg.with_densities(extremal, derive_seed(cfg.seed, 1)))?;
    let grid = if cfg.s_grid.is_empty() { default_s_grid(&test.values, &ext.values, 20) } else { cfg.s_grid.clone() };
    let tc = survival(&test.values, &grid, alpha)?;
    let ec = survival(&ext.values, &grid, alpha)?;
    let verdict = compare(&tc, &ec)?;
    Ok(DominanceReport { test: tc, extremal: ec, verdict, failed_test: test.failed, failed_extremal: ext.failed })
}

/// Compares each center density `f_i` against `a_i 1_{b_i B}` with
/// `a_i = ||f_i||_inf` and unit mass.
pub fn check_ball_extremizer(cfg: &ExperimentConfig, alpha: f64) -> Result<DominanceReport> {
    cfg.validate()?;
    let ext = cfg.densities.iter().map(|f| DensitySpec::ball_extremizer(cfg.n, f.sup_bound())).collect();
    dominance(cfg, ext, alpha)
}

/// Compares product densities whose coordinate densities are bounded by one
/// against the uniform density on the unit cube `[-1/2, 1/2]^n`.
pub fn check_cube_extremizer(cfg: &ExperimentConfig, alpha: f64) -> Result<DominanceReport> {
    cfg.validate()?;
    for f in &cfg.densities {
        match f {
            DensitySpec::Product(fs) => {
                if let Some(s) = fs.iter().map(Step1d::sup).find(|s| *s > 1.0 + 1e-12) {
                    return Err(Error::InvalidInput(format!("coordinate densities must be bounded by one, got sup {s}")));
                }
            }
            DensitySpec::Uniform(Region::Box { lo, hi }) if lo.iter().zip(hi).all(|(l, h)| h - l >= 1.0 - 1e-12) => {}
            other => return Err(Error::UnsupportedTag(other.tag())),
        }
    }
    dominance(cfg, vec![DensitySpec::unit_cube(cfg.n)], alpha)
}

/// Star body `A(K, R)` with `rho(-theta) = R - h_K(theta)`, tabulated on a circle grid.
pub fn star_of_body(k: &SupportBody, big_r: f64, grid: &DirectionGrid) -> Result<StarBody> {
    if k.dim() != 2 || grid.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: k.dim() });
    }
    let values = grid
        .iter()
        .map(|u| Ok(big_r - k.support(&[-u[0], -u[1]])?))
        .collect::<Result<Vec<f64>>>()?;
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::RadiusTooSmall { radius: big_r, max: big_r - values.iter().copied().fold(f64::INFINITY, f64::min) });
    }
    StarBody::from_table_2d(values)
}

/// Moments `(E V^p)^(1/p)` for centers uniform on `A(K, R)` and on the ball of equal volume.
#[derive(Debug, Clone)]
pub struct MomentConfig {
    pub body: SupportBody,
    pub big_r: f64,
    pub count: usize,
    pub j: usize,
    pub trials: usize,
    pub seed: u64,
    pub estimator: Estimator,
    /// Angles used to tabulate `A(K, R)`.
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub p: f64,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// `lhs <= rhs` within three combined standard errors.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    /// Sample minima, the `p -> -inf` limits.
    pub lhs_min: f64,
    pub rhs_min: f64,
    pub ball_radius: f64,
}

/// `(mean v^p)^(1/p)` (geometric mean at `p = 0`) with a jackknife standard error.
pub fn power_mean(values: &[f64], p: f64) -> Result<(f64, f64)> {
    let m = values.len();
    if m < 2 {
        return Err(Error::InvalidInput("need at least two values".into()));
    }
    if p <= 0.0 {
        if let Some(v) = values.iter().find(|v| **v < 1e-12) {
            return Err(Error::NonIntegrable { value: *v });
        }
    }
    let g = |v: f64| if p == 0.0 { v.ln() } else { v.powf(p) };
    let back = |mean: f64| if p == 0.0 { mean.exp() } else { mean.powf(1.0 / p) };
    let total: f64 = values.iter().map(|v| g(*v)).sum();
    let full = back(total / m as f64);
    let loo: Vec<f64> = values.iter().map(|v| back((total - g(*v)) / (m - 1) as f64)).collect();
    let mean_loo = loo.iter().sum::<f64>() / m as f64;
    let var = (m - 1) as f64 / m as f64 * loo.iter().map(|x| (x - mean_loo).powi(2)).sum::<f64>();
    Ok((full, var.sqrt()))
}

pub fn moment_compare(cfg: &MomentConfig, ps: &[f64]) -> Result<MomentReport> {
    let n = cfg.body.dim();
    let grid = DirectionGrid::circle(cfg.grid_size, 0.0)?;
    // the body must contain a neighborhood of the origin and sit inside B(0, R)
    let h = cfg.body.support_on(&grid)?;
    let (hmin, hmax) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !(hmin > 0.0) {
        return Err(Error::InvalidInput("body must contain the origin in its interior".into()));
    }
    if hmax >= cfg.big_r {
        return Err(Error::RadiusTooSmall { radius: cfg.big_r, max: hmax });
    }
    let star = star_of_body(&cfg.body, cfg.big_r, &grid)?;
    let region = Region::star(star, cfg.big_r - hmin, &grid)?;
    let area = region.volume()?;
    let r = (area / omega(n)).powf(1.0 / n as f64);
    let base = ExperimentConfig {
        n,
        count: cfg.count,
        radii: vec![cfg.big_r],
        j: cfg.j,
        densities: vec![DensitySpec::Uniform(region)],
        trials: cfg.trials,
        s_grid: Vec::new(),
        seed: cfg.seed,
        estimator: cfg.estimator.clone(),
        max_failure_rate: 1e-3,
    };
    let lhs = run_trials(&base)?.values;
    let ball = DensitySpec::Uniform(Region::Ball { center: Point::zeros(n), radius: r });
    let rhs = run_trials(&base.with_densities(vec![ball], derive_seed(cfg.seed, 1)))?.values;
    let rows = ps
        .iter()
        .map(|&p| {
            let (a, sa) = power_mean(&lhs, p)?;
            let (b, sb) = power_mean(&rhs, p)?;
            Ok(MomentRow { p, lhs: a, lhs_stderr: sa, rhs: b, rhs_stderr: sb, holds: a <= b + 3.0 * (sa * sa + sb * sb).sqrt() })
        })
        .collect::<Result<Vec<_>>>()?;
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MomentReport { rows, lhs_min: min(&lhs), rhs_min: min(&rhs), ball_radius: r })
}

/// Results of the midpoint and reflection checks on `F(x_1..x_N) = V_j(cap B(x_i, r_i))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiConcavityReport {
    pub trials: usize,
    /// Trials with `F((u+v)/2) < min(F(u), F(v))` beyond tolerance.
    pub midpoint_violations: usize,
    /// Largest `min(F(u), F(v)) - F((u+v)/2)`.
    pub worst_midpoint_deficit: f64,
    /// Largest `|F_{z,Y}(t) - F_{z,Y}(-t)|`.
    pub worst_asymmetry: f64,
    pub reflection_violations: usize,
}

/// Checks quasi-concavity and evenness of the volume functional on random center tuples.
pub fn quasiconcavity_test(count: usize, n: usize, radii: &[f64], j: usize, trials: usize, seed: u64) -> Result<QuasiConcavityReport> {
    if radii.len() != count && radii.len() != 1 {
        return Err(Error::InvalidInput("radii must have length 1 or N".into()));
    }
    let radius = |i: usize| radii[if radii.len() == 1 { 0 } else { i }];
    let rmin = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let estimator = if n == 2 { Estimator::Exact2d } else { Estimator::SteinerFit { samples: 200_000 } };
    // Monte-Carlo values carry noise; exact ones only rounding.
    let tol = if n == 2 { 1e-9 } else { 0.05 };
    let f = |centers: &[Vec<f64>], s: u64| -> Result<f64> {
        let balls = centers
            .iter()
            .enumerate()
            .map(|(i, c)| Ball::new(Point::from_column_slice(c), radius(i)))
            .collect::<Result<Vec<_>>>()?;
        estimator.vj(&BallPolyhedron::new(balls)?, j, s)
    };
    let rows = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let mut rng = stream_rng(seed, t);
            let zero = vec![0.0; n];
            let draw = |rng: &mut _| {
                let mut x = vec![0.0; n];
                fill_uniform_ball(rng, &zero, 0.9 * rmin, &mut x);
                x
            };
            let u: Vec<Vec<f64>> = (0..count).map(|_| draw(&mut rng)).collect();
            let v: Vec<Vec<f64>> = (0..count).map(|_| draw(&mut rng)).collect();
            let mid: Vec<Vec<f64>> = u.iter().zip(&v).map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect()).collect();
            let s = derive_seed(seed, t);
            let deficit = f(&u, s)?.min(f(&v, s)?) - f(&mid, s)?;

            let mut z = vec![0.0; n];
            fill_unit_sphere(&mut rng, &mut z);
            let ys: Vec<Vec<f64>> = (0..count)
                .map(|_| {
                    let y = draw(&mut rng);
                    let d: f64 = y.iter().zip(&z).map(|(a, b)| a * b).sum();
                    y.iter().zip(&z).map(|(a, b)| a - d * b).collect()
                })
                .collect();
            let ts: Vec<f64> = (0..count).map(|_| rmin * (rng.random::<f64>() - 0.5)).collect();
            let shifted = |sign: f64| -> Vec<Vec<f64>> {
                ys.iter().zip(&ts).map(|(y, t)| y.iter().zip(&z).map(|(a, b)| a + sign * t * b).collect()).collect()
            };
            let asym = (f(&shifted(1.0), s)? - f(&shifted(-1.0), s)?).abs();
            Ok((deficit, asym))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuasiConcavityReport {
        trials,
        midpoint_violations: rows.iter().filter(|r| r.0 > tol).count(),
        worst_midpoint_deficit: rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
        worst_asymmetry: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        reflection_violations: rows.iter().filter(|r| r.1 > tol).count(),
    })
}

/// Profile `d -> area(B(-d/2 e, r) cap B(d/2 e, r))` along the line of centers.
pub fn lens_profile(r: f64, separations: &[f64]) -> Result<Vec<f64>> {
    separations
        .iter()
        .map(|d| {
            let p = BallPolyhedron::from_centers(&[[-d / 2.0, 0.0], [d / 2.0, 0.0]], r)?;
            Ok(exact_2d(&p)?.values[2])
        })
        .collect()
}

/// `int F prod f_i` and `int F prod f_i^*` over `R^N` by the midpoint rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RearrangementCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Bound on the quadrature error of each side.
    pub error_bound: f64,
}

/// Integrates an indicator `F` of an origin-symmetric convex set in `R^N`
/// against products of one-dimensional step densities and their
/// rearrangements on a grid with `resolution` cells per axis.
///
/// Cells whose corners disagree on the integrand are counted in the error bound.
pub fn bll_numeric_check(set: &Witness, densities: &[Step1d], resolution: usize) -> Result<RearrangementCheck> {
    let big_n = densities.len();
    if !(1..=3).contains(&big_n) {
        return Err(Error::UnsupportedDimension { dim: big_n });
    }
    let rearranged: Vec<Step1d> = densities.iter().map(Step1d::rearranged).collect();
    let reach = densities.iter().chain(&rearranged).map(Step1d::max_abs).fold(0.0, f64::max);
    let h = 2.0 * reach / resolution as f64;
    let integrate = |fs: &[Step1d]| -> (f64, f64) {
        let total_cells = resolution.pow(big_n as u32);
        let sup: f64 = fs.iter().map(Step1d::sup).product();
        (0..total_cells)
            .into_par_iter()
            .map(|idx| {
                let mut cell = [0usize; 3];
                let mut rest = idx;
                for c in cell.iter_mut().take(big_n) {
                    *c = rest % resolution;
                    rest /= resolution;
                }
                let point_value = |offsets: &[f64]| -> f64 {
                    let t: Vec<f64> = (0..big_n).map(|k| -reach + (cell[k] as f64 + offsets[k]) * h).collect();
                    if !set.contains(&t) {
                        return 0.0;
                    }
                    fs.iter().zip(&t).map(|(f, x)| f.value(*x)).product()
                };
                let mid = point_value(&[0.5; 3]);
                let mut oscillates = false;
                for corner in 0..(1usize << big_n) {
                    let off: Vec<f64> = (0..big_n).map(|k| if corner >> k & 1 == 1 { 1.0 - 1e-9 } else { 1e-9 }).collect();
                    if point_value(&off) != mid {
                        oscillates = true;
                        break;
                    }
                }
                let vol = h.powi(big_n as i32);
                (mid * vol, if oscillates { sup * vol } else { 0.0 })
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    let (lhs, el) = integrate(densities);
    let (rhs, er) = integrate(&rearranged);
    Ok(RearrangementCheck { lhs, rhs, error_bound: el.max(er) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point;
    use std::f64::consts::PI;

    fn cfg(densities: Vec<DensitySpec>, count: usize, r: f64, j: usize, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            n: 2,
            count,
            radii: vec![r],
            j,
            densities,
            trials,
            s_grid: Vec::new(),
            seed: 11,
            estimator: Estimator::Exact2d,
            max_failure_rate: 1e-3,
        }
    }

    #[test]
    fn single_ball_trials_are_constant() {
        let t = run_trials(&cfg(vec![DensitySpec::unit_square()], 1, 3.0, 2, 200)).unwrap();
        assert!(t.values.iter().all(|v| (v - 9.0 * PI).abs() < 1e-12));
        let curve = survival(&t.values, &[9.0 * PI - 1e-9, 9.0 * PI], 0.05).unwrap();
        assert_eq!(curve.p, vec![1.0, 0.0]);
    }

    #[test]
    fn two_ball_values_are_lenses() {
        let t = run_trials(&cfg(vec![DensitySpec::unit_ball(2)], 2, 3.0, 2, 300)).unwrap();
        assert!(t.values.iter().all(|v| *v > 0.0 && *v <= 9.0 * PI));
    }

    #[test]
    fn small_radii_give_empty_trials() {
        let wide = DensitySpec::Uniform(Region::Box { lo: vec![-5.0, -5.0], hi: vec![5.0, 5.0] });
        let t = run_trials(&cfg(vec![wide], 2, 1.0, 2, 200)).unwrap();
        assert!(t.values.contains(&0.0));
    }

    #[test]
    fn dkw_half_width() {
        assert!((dkw_band(100_000, 0.05) - 0.004294694).abs() < 1e-8);
    }

    #[test]
    fn constant_samples_give_a_step() {
        let s = survival(&[2.0; 150], &[1.0, 1.99, 2.0, 3.0], 0.05).unwrap();
        assert_eq!(s.p, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn extremizer_against_itself() {
        let c = cfg(vec![DensitySpec::unit_ball(2)], 3, 3.0, 2, 2_000);
        let r = check_ball_extremizer(&c, 0.05).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::Consistent);
        assert!(r.verdict.gaps.iter().all(|g| g.abs() < 2.0 * r.test.band));
    }

    #[test]
    fn swapped_roles_are_caught() {
        // the ball as the test density against the square as extremal density
        let c = cfg(vec![DensitySpec::unit_ball(2)], 3, 3.0, 2, 20_000);
        let test = run_trials(&c).unwrap();
        let ext = run_trials(&c.with_densities(vec![DensitySpec::unit_square()], 99)).unwrap();
        let grid = default_s_grid(&test.values, &ext.values, 20);
        let v = compare(&survival(&test.values, &grid, 0.05).unwrap(), &survival(&ext.values, &grid, 0.05).unwrap()).unwrap();
        assert!(matches!(v.verdict, Verdict::Violation { .. }), "{v:?}");
    }

    #[test]
    fn cube_extremizer_against_itself_and_a_product() {
        let c = cfg(vec![DensitySpec::unit_cube(2)], 3, 3.0, 2, 2_000);
        let r = check_cube_extremizer(&c, 0.05).unwrap();
        assert_eq!(r.verdict.verdict, Verdict::Consistent);
        let half = Step1d::new(vec![-1.0, 1.0], vec![0.5]).unwrap();
        let c = cfg(vec![DensitySpec::Product(vec![half.clone(), half])], 3, 3.0, 2, 2_000);
        assert_eq!(check_cube_extremizer(&c, 0.05).unwrap().verdict.verdict, Verdict::Consistent);
        let tall = Step1d::new(vec![0.0, 0.5], vec![2.0]).unwrap();
        let c = cfg(vec![DensitySpec::Product(vec![tall.clone(), tall])], 3, 3.0, 2, 2_000);
        assert!(check_cube_extremizer(&c, 0.05).is_err());
    }

    #[test]
    fn jackknife_power_means() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let (m, se) = power_mean(&v, 1.0).unwrap();
        assert!((m - 2.5).abs() < 1e-15);
        // jackknife of the mean equals the usual standard error
        let sd = (v.iter().map(|x| (x - 2.5f64).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!((se - sd / 2.0).abs() < 1e-12);
        assert!(power_mean(&[0.0, 1.0], -1.0).is_err());
        let (g, _) = power_mean(&[1.0, 4.0], 0.0).unwrap();
        assert!((g - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quasiconcavity_and_evenness_in_the_plane() {
        let r = quasiconcavity_test(3, 2, &[1.0, 1.3, 0.8], 2, 300, 5).unwrap();
        assert_eq!(r.midpoint_violations, 0, "{r:?}");
        assert_eq!(r.reflection_violations, 0, "{r:?}");
        let one = quasiconcavity_test(1, 2, &[1.0], 1, 50, 6).unwrap();
        assert!(one.worst_midpoint_deficit.abs() < 1e-12);
    }

    #[test]
    fn lens_profile_decreases() {
        let seps: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
        let a = lens_profile(1.0, &seps).unwrap();
        assert!(a.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rearrangement_examples() {
        let diag = Witness::Slabs { normals: vec![point(&[1.0, -1.0]) / 2f64.sqrt()], widths: vec![1.0 / 2f64.sqrt()] };
        let f = [Step1d::uniform(0.0, 1.0).unwrap(), Step1d::uniform(2.0, 3.0).unwrap()];
        let c = bll_numeric_check(&diag, &f, 300).unwrap();
        assert!(c.lhs <= c.error_bound, "{c:?}");
        assert!((c.rhs - 1.0).abs() <= c.error_bound + 1e-9, "{c:?}");

        let sym = [Step1d::uniform(-0.5, 0.5).unwrap(), Step1d::uniform(-1.0, 1.0).unwrap()];
        let c = bll_numeric_check(&diag, &sym, 200).unwrap();
        assert_eq!(c.lhs, c.rhs);

        let everything = Witness::Box { half: vec![100.0; 3] };
        let three = [Step1d::uniform(0.0, 1.0).unwrap(), Step1d::uniform(2.0, 3.0).unwrap(), Step1d::uniform(-3.0, -1.0).unwrap()];
        let c = bll_numeric_check(&everything, &three, 60).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-9 && (c.rhs - 1.0).abs() < 1e-9, "{c:?}");
    }

    #[test]
    fn star_of_ball_is_a_ball() {
        let grid = DirectionGrid::circle(64, 0.0).unwrap();
        let k = SupportBody::ball(point(&[0.0, 0.0]), 0.5).unwrap();
        let s = star_of_body(&k, 2.0, &grid).unwrap();
        assert!(grid.iter().all(|u| (s.radial(u) - 1.5).abs() < 1e-12));
    }
}
