//! Intrinsic volumes: closed forms, exact planar values, Monte-Carlo volume
//! and least-squares fits of the Steiner polynomial.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{
    dist2, dykstra, ArcPolygon, BallPolyhedron, DirectionGrid, HalfspacePolytope, SupportBody,
    DEFAULT_MAX_ITER,
};
use crate::rng::{fill_uniform_ball, fill_uniform_box, stream_rng};

/// Samples drawn from one random stream.
pub const BATCH: usize = 8192;

/// Volume of the unit ball in `R^n`.
pub fn omega(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => std::f64::consts::TAU / n as f64 * omega(n - 2),
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `V_j(rB)` in `R^n`.
pub fn unit_ball_intrinsic(n: usize, j: usize, r: f64) -> f64 {
    if j > n {
        return 0.0;
    }
    binomial(n, j) * omega(n) / omega(n - j) * r.powi(j as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact2d,
    ExactPolytope,
    SteinerFit,
    Quadrature,
}

/// `V_0..V_n` with a standard error per entry.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IntrinsicVolumes {
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub method: Method,
    /// Hit-or-miss volume from the same point cloud, when fitted.
    pub direct_volume: Option<(f64, f64)>,
}

impl IntrinsicVolumes {
    pub fn exact(values: Vec<f64>, method: Method) -> Self {
        let stderr = vec![0.0; values.len()];
        Self { values, stderr, method, direct_volume: None }
    }

    pub fn empty(n: usize, method: Method) -> Self {
        Self::exact(vec![0.0; n + 1], method)
    }

    pub fn dim(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// `(V_j / V_j(B))^(1/j)` for `j = 1..n` with propagated standard errors.
    pub fn normalized_radii(&self) -> Vec<(f64, f64)> {
        let n = self.dim();
        (1..=n)
            .map(|j| {
                let b = unit_ball_intrinsic(n, j, 1.0);
                let v = self.values[j].max(0.0);
                let r = (v / b).powf(1.0 / j as f64);
                let se = if v > 0.0 { r * self.stderr[j] / (j as f64 * v) } else { self.stderr[j] / b };
                (r, se)
            })
            .collect()
    }

    /// Checks the chain `r_n <= r_j <= r_1` of normalized radii, allowing
    /// `sigmas` combined standard errors; returns the worst excess found.
    pub fn inequality_chain_excess(&self, sigmas: f64) -> f64 {
        let radii = self.normalized_radii();
        let (rn, sn) = radii[radii.len() - 1];
        let (r1, s1) = radii[0];
        let mut worst = f64::NEG_INFINITY;
        for &(rj, sj) in &radii {
            let iso = rn - rj - sigmas * (sn * sn + sj * sj).sqrt();
            let ury = rj - r1 - sigmas * (sj * sj + s1 * s1).sqrt();
            worst = worst.max(iso).max(ury);
        }
        worst
    }
}

/// Area and perimeter of a planar intersection of disks; `(0, 0)` when empty.
pub fn exact_disk_intersection_2d(p: &BallPolyhedron) -> Result<(f64, f64)> {
    if p.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: p.dim() });
    }
    if p.certainly_empty() {
        return Ok((0.0, 0.0));
    }
    let arcs = ArcPolygon::from_disks(&p.disks())?;
    Ok((arcs.area(), arcs.perimeter()))
}

/// Exact `(V_0, V_1, V_2)` of a planar ball-polyhedron.
pub fn exact_2d(p: &BallPolyhedron) -> Result<IntrinsicVolumes> {
    let (area, per) = exact_disk_intersection_2d(p)?;
    if area == 0.0 && per == 0.0 {
        return Ok(IntrinsicVolumes::empty(2, Method::Exact2d));
    }
    Ok(IntrinsicVolumes::exact(vec![1.0, per / 2.0, area], Method::Exact2d))
}

pub fn exact_polytope(p: &HalfspacePolytope) -> Result<IntrinsicVolumes> {
    Ok(IntrinsicVolumes::exact(p.intrinsic_volumes()?, Method::ExactPolytope))
}

fn batches(samples: usize) -> Vec<(u64, usize)> {
    (0..samples.div_ceil(BATCH))
        .map(|b| (b as u64, BATCH.min(samples - b * BATCH)))
        .collect()
}

/// Hit-or-miss volume inside the smallest ball; returns `(estimate, stderr)`.
pub fn mc_volume(p: &BallPolyhedron, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    if p.certainly_empty() {
        return Ok((0.0, 0.0));
    }
    let n = p.dim();
    let host = p.smallest_ball();
    let hits: u64 = batches(samples)
        .into_par_iter()
        .map(|(b, count)| {
            let mut rng = stream_rng(seed, b);
            let mut x = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..count {
                fill_uniform_ball(&mut rng, host.center().as_slice(), host.radius(), &mut x);
                if p.balls().iter().all(|ball| dist2(ball.center().as_slice(), &x) <= ball.radius() * ball.radius()) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let vol = omega(n) * host.radius().powi(n as i32);
    let frac = hits as f64 / samples as f64;
    Ok((vol * frac, vol * (frac * (1.0 - frac) / samples as f64).sqrt()))
}

/// A body whose parallel sets can be sampled.
pub trait ConvexBody: Sync {
    fn dim(&self) -> usize;
    /// `None` when the body is empty.
    fn bounding_box(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>>;
    /// Returns an oracle giving the distance to the body when it is at most
    /// `cap`, and some value larger than `cap` otherwise.
    fn distance_oracle(&self, cap: f64) -> Result<Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync + '_>>;
}

impl ConvexBody for BallPolyhedron {
    fn dim(&self) -> usize {
        BallPolyhedron::dim(self)
    }

    fn bounding_box(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        if self.certainly_empty() {
            return Ok(None);
        }
        let body = match SupportBody::from_ballpoly(self.clone(), 1e-10) {
            Err(Error::EmptyIntersection) => return Ok(None),
            other => other?,
        };
        support_box(&body)
    }

    fn distance_oracle(&self, cap: f64) -> Result<Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync + '_>> {
        if self.dim() == 2 {
            let arcs = ArcPolygon::from_disks(&self.disks())?;
            return Ok(Box::new(move |x: &[f64]| arcs.distance([x[0], x[1]]).ok_or(Error::EmptyIntersection)));
        }
        Ok(Box::new(move |x: &[f64]| {
            let mut lower: f64 = 0.0;
            for b in self.balls() {
                lower = lower.max(dist2(b.center().as_slice(), x).sqrt() - b.radius());
            }
            if lower == 0.0 || lower > cap {
                return Ok(lower);
            }
            let y = dykstra(self.balls(), x, 1e-10, DEFAULT_MAX_ITER)?;
            Ok(dist2(y.as_slice(), x).sqrt())
        }))
    }
}

impl ConvexBody for HalfspacePolytope {
    fn dim(&self) -> usize {
        HalfspacePolytope::dim(self)
    }

    fn bounding_box(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let verts = self.vertices()?;
        if verts.is_empty() {
            return Ok(None);
        }
        let n = self.dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for v in &verts {
            for k in 0..n {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Ok(Some((lo, hi)))
    }

    fn distance_oracle(&self, cap: f64) -> Result<Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync + '_>> {
        Ok(Box::new(move |x: &[f64]| {
            let lower = self
                .halfspaces()
                .iter()
                .map(|h| crate::geom::dot(h.normal.as_slice(), x) - h.offset)
                .fold(0.0, f64::max);
            if lower == 0.0 || lower > cap {
                return Ok(lower);
            }
            let y = dykstra(self.halfspaces(), x, 1e-11, DEFAULT_MAX_ITER)?;
            Ok(dist2(y.as_slice(), x).sqrt())
        }))
    }
}

fn support_box(body: &SupportBody) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let n = body.dim();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    let mut e = vec![0.0; n];
    for k in 0..n {
        e[k] = 1.0;
        hi[k] = body.support(&e)?;
        e[k] = -1.0;
        lo[k] = -body.support(&e)?;
        e[k] = 0.0;
    }
    Ok(Some((lo, hi)))
}

/// Expansion radii and the sample count of the shared point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGrid {
    pub eps: Vec<f64>,
    pub samples: usize,
}

impl EpsilonGrid {
    pub fn new(eps: Vec<f64>, samples: usize) -> Result<Self> {
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidInput("expansion radii must be positive".into()));
        }
        if eps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("expansion radii must be strictly ascending".into()));
        }
        if samples == 0 {
            return Err(Error::InvalidInput("samples must be positive".into()));
        }
        Ok(Self { eps, samples })
    }

    /// `count` log-spaced radii between `lo` and `hi`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize, samples: usize) -> Result<Self> {
        if count < 2 || !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidInput("need lo < hi and at least two radii".into()));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let eps = (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect();
        Self::new(eps, samples)
    }

    /// `n + 3` radii in `[0.05 s, 0.5 s]`, where `s` is the smaller of the
    /// least ball radius and the least half-width along the axes.
    pub fn default_for(p: &BallPolyhedron, samples: usize) -> Result<Self> {
        let mut scale = p.min_radius();
        if let Some((lo, hi)) = ConvexBody::bounding_box(p)? {
            for (l, h) in lo.iter().zip(&hi) {
                if h > l {
                    scale = scale.min((h - l) / 2.0);
                }
            }
        }
        Self::log_spaced(0.05 * scale, 0.5 * scale, p.dim() + 3, samples)
    }

    /// Same rule for a body described only by its bounding box.
    pub fn default_for_box(lo: &[f64], hi: &[f64], samples: usize) -> Result<Self> {
        let scale = lo.iter().zip(hi).map(|(l, h)| (h - l) / 2.0).fold(f64::INFINITY, f64::min);
        Self::log_spaced(0.05 * scale, 0.5 * scale, lo.len() + 3, samples)
    }
}

/// Hit counts of the parallel sets `K + eps_k B` on one point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedCounts {
    pub box_volume: f64,
    pub samples: usize,
    /// Count inside the body itself.
    pub inside: u64,
    /// Count within each expansion radius.
    pub within: Vec<u64>,
}

impl ExpandedCounts {
    pub fn volume(&self, k: usize) -> (f64, f64) {
        self.estimate(self.within[k])
    }

    pub fn body_volume(&self) -> (f64, f64) {
        self.estimate(self.inside)
    }

    fn estimate(&self, hits: u64) -> (f64, f64) {
        let p = hits as f64 / self.samples as f64;
        (self.box_volume * p, self.box_volume * (p * (1.0 - p) / self.samples as f64).sqrt())
    }

    /// Covariance of the volume estimates for radii `a` and `b` (nested events).
    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        let s = self.samples as f64;
        let pa = self.within[a] as f64 / s;
        let pb = self.within[b] as f64 / s;
        self.box_volume * self.box_volume * (pa.min(pb) - pa * pb) / s
    }
}

/// Counts sample points of a box around `K + eps_max B` by distance to `K`.
pub fn expanded_counts<K: ConvexBody + ?Sized>(body: &K, grid: &EpsilonGrid, seed: u64) -> Result<Option<ExpandedCounts>> {
    let Some((lo, hi)) = body.bounding_box()? else { return Ok(None) };
    let cap = *grid.eps.last().expect("nonempty grid");
    let lo: Vec<f64> = lo.iter().map(|v| v - cap).collect();
    let hi: Vec<f64> = hi.iter().map(|v| v + cap).collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let oracle = body.distance_oracle(cap)?;
    let n = body.dim();
    let m = grid.eps.len();
    let partial = batches(grid.samples)
        .into_par_iter()
        .map(|(b, count)| {
            let mut rng = stream_rng(seed, b);
            let mut x = vec![0.0; n];
            let mut inside = 0u64;
            let mut within = vec![0u64; m];
            for _ in 0..count {
                fill_uniform_box(&mut rng, &lo, &hi, &mut x);
                let d = oracle(&x)?;
                if d <= 0.0 {
                    inside += 1;
                }
                for (k, e) in grid.eps.iter().enumerate() {
                    if d <= *e {
                        within[k] += 1;
                    }
                }
            }
            Ok((inside, within))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut inside = 0;
    let mut within = vec![0u64; m];
    for (i, w) in partial {
        inside += i;
        for (acc, v) in within.iter_mut().zip(w) {
            *acc += v;
        }
    }
    Ok(Some(ExpandedCounts { box_volume, samples: grid.samples, inside, within }))
}

/// Hit-or-miss estimate of `|K + eps B|`.
pub fn epsilon_expanded_volume<K: ConvexBody + ?Sized>(body: &K, eps: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let grid = EpsilonGrid::new(vec![eps], samples)?;
    Ok(expanded_counts(body, &grid, seed)?.map_or((0.0, 0.0), |c| c.volume(0)))
}

/// Least-squares fit of `|K + eps B| = sum_j omega_(n-j) V_j eps^(n-j)` with `V_0 = 1`.
pub fn fit_intrinsic_volumes<K: ConvexBody + ?Sized>(body: &K, grid: &EpsilonGrid, seed: u64) -> Result<IntrinsicVolumes> {
    let n = body.dim();
    if grid.eps.len() < n + 1 {
        return Err(Error::InvalidInput(format!("need at least {} expansion radii, got {}", n + 1, grid.eps.len())));
    }
    let Some(counts) = expanded_counts(body, grid, seed)? else {
        return Ok(IntrinsicVolumes::empty(n, Method::SteinerFit));
    };
    if counts.inside == 0 && counts.within[0] == 0 {
        return Ok(IntrinsicVolumes::empty(n, Method::SteinerFit));
    }
    let m = grid.eps.len();
    let x = DMatrix::from_fn(m, n, |k, c| {
        let j = c + 1;
        omega(n - j) * grid.eps[k].powi((n - j) as i32)
    });
    let svals = x.clone().svd(false, false).singular_values;
    let cond = svals.max() / svals.min();
    if !(cond <= 1e8) {
        return Err(Error::IllConditioned { condition: cond });
    }
    let y = DVector::from_fn(m, |k, _| counts.volume(k).0 - omega(n) * grid.eps[k].powi(n as i32));
    let cov = DMatrix::from_fn(m, m, |a, b| counts.covariance(a, b));
    let floor = (counts.box_volume / counts.samples as f64).powi(2);
    let w = DMatrix::from_diagonal(&DVector::from_fn(m, |k, _| 1.0 / cov[(k, k)].max(floor)));
    let xtw = x.transpose() * &w;
    let normal = &xtw * &x;
    let inv = normal.try_inverse().ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let a = &inv * &xtw;
    let beta = &a * &y;
    let beta_cov = &a * cov * a.transpose();
    let mut values = vec![1.0];
    let mut stderr = vec![0.0];
    for j in 0..n {
        values.push(beta[j].max(0.0));
        stderr.push(beta_cov[(j, j)].max(0.0).sqrt());
    }
    Ok(IntrinsicVolumes { values, stderr, method: Method::SteinerFit, direct_volume: Some(counts.body_volume()) })
}

/// `2 * int h_K d sigma` by quadrature on `grid`.
pub fn mean_width(k: &SupportBody, grid: &DirectionGrid) -> Result<f64> {
    let h = k.support_on(grid)?;
    Ok(2.0 * h.iter().sum::<f64>() * grid.weight())
}
