//! Star bodies `A(f, R)`, Wulff shapes and their ball-polyhedral
//! approximations, plus the Minkowski-rounding experiments built on them.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{
    directions_surround_origin, minkowski_symmetral, reflect, unit2, Ball, BallPolyhedron, DirectionGrid, GridKind,
    HalfspacePolytope, Point, StarBody, SupportBody,
};
use crate::intrinsic::exact_disk_intersection_2d;
use crate::rng::{fill_uniform_box, stream_rng};

type Oracle = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// A positive function on the sphere, tabulated on a grid.
#[derive(Clone)]
pub struct SphericalFunction {
    grid: DirectionGrid,
    values: Vec<f64>,
    /// Exact evaluation off the grid; `None` means linear interpolation on a circle grid.
    oracle: Option<Oracle>,
    min: f64,
    max: f64,
}

impl std::fmt::Debug for SphericalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphericalFunction")
            .field("dim", &self.grid.dim())
            .field("grid", &self.grid.len())
            .field("min", &self.min)
            .field("max", &self.max)
            .finish()
    }
}

impl SphericalFunction {
    fn build(grid: DirectionGrid, values: Vec<f64>, oracle: Option<Oracle>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("spherical function must be positive, got {v} at grid index {i}")));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { grid, values, oracle, min, max })
    }

    pub fn from_fn(grid: DirectionGrid, f: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static) -> Result<Self> {
        let values = grid.iter().map(&f).collect::<Result<Vec<_>>>()?;
        Self::build(grid, values, Some(Arc::new(f)))
    }

    pub fn constant(grid: DirectionGrid, c: f64) -> Result<Self> {
        Self::from_fn(grid, move |_| Ok(c))
    }

    /// The support function of `k`, which must contain the origin in its interior.
    pub fn from_support(k: &SupportBody, grid: DirectionGrid) -> Result<Self> {
        if k.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: k.dim() });
        }
        let k = k.clone();
        Self::from_fn(grid, move |u| k.support(u))
    }

    /// Values at angles `2 pi i / len`, linearly interpolated in between.
    pub fn tabulated_2d(values: Vec<f64>) -> Result<Self> {
        let grid = DirectionGrid::circle(values.len(), 0.0)?;
        Self::build(grid, values, None)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        match &self.oracle {
            Some(f) => f(theta),
            None => SupportBody::Tabulated { values: self.values.clone().into() }.support(theta),
        }
    }

    /// `int f d sigma` by grid quadrature.
    pub fn l1(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.weight()
    }

    /// The same function tabulated on the refined grid.
    pub fn refined(&self) -> Result<Self> {
        let grid = self.grid.refined()?;
        let values = grid.iter().map(|u| self.value(u)).collect::<Result<Vec<_>>>()?;
        Self::build(grid, values, self.oracle.clone())
    }
}

fn check_radius(f: &SphericalFunction, big_r: f64) -> Result<()> {
    if !(big_r > f.max()) {
        return Err(Error::RadiusTooSmall { radius: big_r, max: f.max() });
    }
    Ok(())
}

/// `A(f, R)`, the star body with `rho(-theta) = R - f(theta)`.
pub fn build_a(f: &SphericalFunction, big_r: f64) -> Result<StarBody> {
    check_radius(f, big_r)?;
    let grid = f.grid();
    if grid.kind() == GridKind::UniformAngles && grid.offset() == 0.0 && grid.len().is_multiple_of(2) {
        // -theta_i is the grid direction half a turn away
        let m = grid.len();
        let values = (0..m).map(|i| big_r - f.values()[(i + m / 2) % m]).collect();
        return StarBody::from_table_2d(values);
    }
    let f = f.clone();
    // the precondition keeps the radial values positive; a failing oracle shows up as NaN
    StarBody::from_fn(grid, move |theta| {
        let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
        f.value(&neg).map_or(f64::NAN, |v| big_r - v)
    })
}

/// `(int rho^n d sigma)^(1/n)` on `grid`.
pub fn volume_radius(s: &StarBody, grid: &DirectionGrid) -> f64 {
    s.volume_radius(grid)
}

/// The planar Wulff shape `W(f)`, cut out by the halfspaces `<x, theta> <= f(theta)` of the grid.
#[derive(Debug, Clone)]
pub struct WulffShape {
    pub body: SupportBody,
    pub polygon: Vec<[f64; 2]>,
    /// Number of halfspaces used.
    pub directions: usize,
}

impl WulffShape {
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        self.body.support(u)
    }
}

pub fn wulff_shape(f: &SphericalFunction) -> Result<WulffShape> {
    if f.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: f.dim() });
    }
    let hp = HalfspacePolytope::new(f.grid().points(), f.values().to_vec())?;
    if !hp.is_bounded() {
        return Err(Error::UnboundedConfiguration);
    }
    let polygon = hp.polygon()?;
    let body = SupportBody::polytope(polygon.iter().map(|v| crate::geom::point(v)).collect())?;
    Ok(WulffShape { body, polygon, directions: f.grid().len() })
}

/// `cap_i B(-(R - f(theta_i)) theta_i, R)` over the grid directions.
pub fn ballpoly_approx(f: &SphericalFunction, big_r: f64) -> Result<BallPolyhedron> {
    check_radius(f, big_r)?;
    let balls = f
        .grid()
        .iter()
        .zip(f.values())
        .map(|(u, v)| Ball::new(Point::from_iterator(u.len(), u.iter().map(|t| -(big_r - v) * t)), big_r))
        .collect::<Result<Vec<_>>>()?;
    BallPolyhedron::new(balls)
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval of the slope.
    pub slope_ci: (f64, f64),
}

fn t_quantile_975(df: usize) -> f64 {
    const TABLE: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];
    match df {
        0 => f64::INFINITY,
        1..=10 => TABLE[df - 1],
        _ => 1.96 + 2.4 / df as f64,
    }
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidInput("need at least two (x, y) pairs".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let df = lx.len() - 2;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if df == 0 { f64::NAN } else { (sse / df as f64 / sxx).sqrt() };
    let half = t_quantile_975(df) * slope_stderr;
    Ok(LogLogFit { slope, intercept, slope_stderr, slope_ci: (slope - half, slope + half) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub big_r: f64,
    /// Hausdorff distance between the ball approximation and `W(f)`.
    pub residual: f64,
    /// `R * max(1 - h_approx / h_W)`, so that `(1 - C/R) W` lies inside the approximation.
    pub inner_constant: f64,
    /// `max(h_approx - h_W)`, nonpositive up to rounding when the approximation lies inside `W`.
    pub outer_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub fit: LogLogFit,
    pub grid_size: usize,
    pub measure_size: usize,
}

/// Hausdorff residual of the ball approximation against `W(f)` for each radius, with a log-log slope.
pub fn convergence_rate(f: &SphericalFunction, radii: &[f64], measure: &DirectionGrid) -> Result<ConvergenceReport> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radii must be strictly ascending".into()));
    }
    let w = wulff_shape(f)?;
    let hw = w.body.support_on(measure)?;
    let rows = radii
        .iter()
        .map(|&big_r| {
            let approx = SupportBody::from_ballpoly(ballpoly_approx(f, big_r)?, 1e-10)?;
            let ha = approx.support_on(measure)?;
            let residual = ha.iter().zip(&hw).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let inner = ha.iter().zip(&hw).map(|(a, b)| 1.0 - a / b).fold(f64::NEG_INFINITY, f64::max);
            let outer = ha.iter().zip(&hw).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
            Ok(ConvergenceRow { big_r, residual, inner_constant: big_r * inner, outer_excess: outer })
        })
        .collect::<Result<Vec<_>>>()?;
    let res: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    let fit = loglog_fit(radii, &res)?;
    Ok(ConvergenceReport { rows, fit, grid_size: f.grid().len(), measure_size: measure.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub big_r: f64,
    /// `vr(A(f, R)) - (R - int f d sigma)`.
    pub residual: f64,
    /// Change of the residual under one grid refinement.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub rows: Vec<AsymptoticRow>,
    pub fit: Option<LogLogFit>,
    pub l1: f64,
}

fn vr_residual(f: &SphericalFunction, big_r: f64) -> Result<f64> {
    let a = build_a(f, big_r)?;
    Ok(volume_radius(&a, f.grid()) - (big_r - f.l1()))
}

/// Residuals of the volume radius of `A(f, R)` against `R - ||f||_1`.
pub fn vr_asymptotics(f: &SphericalFunction, radii: &[f64]) -> Result<AsymptoticReport> {
    if let Some(r) = radii.iter().find(|r| **r < 4.0 * f.max()) {
        return Err(Error::RadiusTooSmall { radius: *r, max: 4.0 * f.max() });
    }
    let fine = f.refined()?;
    let rows = radii
        .iter()
        .map(|&big_r| {
            let residual = vr_residual(f, big_r)?;
            let stderr = (vr_residual(&fine, big_r)? - residual).abs();
            Ok(AsymptoticRow { big_r, residual, stderr })
        })
        .collect::<Result<Vec<_>>>()?;
    let res: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    // constant f has identically zero residual and no slope
    let fit = if res.iter().all(|r| *r > 0.0) && radii.len() >= 2 { Some(loglog_fit(radii, &res)?) } else { None };
    Ok(AsymptoticReport { rows, fit, l1: f.l1() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullReductionReport {
    pub probes: usize,
    /// Probes inside every ball around the given points.
    pub inside: usize,
    /// Probes where the two memberships disagree.
    pub mismatches: usize,
    /// Area (volume) of the intersection estimated from the probes, with its standard error.
    pub volume: (f64, f64),
}

/// Compares membership in `cap_i B(x_i, r)` with membership in the balls
/// around sampled points of `conv{x_i}` (the vertices and random convex combinations).
pub fn hull_reduction_test(points: &[Point], r: f64, probes: usize, hull_samples: usize, seed: u64) -> Result<HullReductionReport> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("need at least one point".into()));
    };
    if !(r > 0.0) {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let n = first.len();
    let mut rng = stream_rng(seed, 0);
    let mut hull: Vec<Point> = points.to_vec();
    for _ in 0..hull_samples {
        let w: Vec<f64> = (0..points.len()).map(|_| -rng.random::<f64>().ln()).collect();
        let total: f64 = w.iter().sum();
        let mut y = Point::zeros(n);
        for (p, wi) in points.iter().zip(&w) {
            y += p * (wi / total);
        }
        hull.push(y);
    }
    let lo: Vec<f64> = (0..n).map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min) - r).collect();
    let hi: Vec<f64> = (0..n).map(|k| points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max) + r).collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let within = |set: &[Point], x: &[f64]| set.iter().all(|p| crate::geom::dist2(p.as_slice(), x) <= r * r);
    let mut x = vec![0.0; n];
    let (mut inside, mut mismatches) = (0, 0);
    for _ in 0..probes {
        fill_uniform_box(&mut rng, &lo, &hi, &mut x);
        let a = within(points, &x);
        let b = within(&hull, &x);
        inside += a as usize;
        mismatches += (a != b) as usize;
    }
    let p = inside as f64 / probes as f64;
    let volume = (box_volume * p, box_volume * (p * (1.0 - p) / probes as f64).sqrt());
    Ok(HullReductionReport { probes, inside, mismatches, volume })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfspaceLimitReport {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fit: Option<LogLogFit>,
}

/// Hausdorff distance between `cap_i B(-(R - f_i) theta_i, R)` and the
/// polytope `cap_i {<x, theta_i> <= f_i}` for each `R`.
pub fn halfspace_limit_test(thetas: &[Point], f: &[f64], radii: &[f64], measure: &DirectionGrid) -> Result<HalfspaceLimitReport> {
    if thetas.len() != f.len() {
        return Err(Error::InvalidInput("one offset per direction is required".into()));
    }
    if !directions_surround_origin(thetas) {
        return Err(Error::HemisphereViolation);
    }
    let poly = HalfspacePolytope::new(thetas.to_vec(), f.to_vec())?;
    let units: Vec<Point> = poly.normals().cloned().collect();
    let fmax = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hp = measure.iter().map(|u| poly.support(u)).collect::<Result<Vec<_>>>()?;
    let mut residuals = Vec::with_capacity(radii.len());
    for &big_r in radii {
        if !(big_r > fmax) {
            return Err(Error::RadiusTooSmall { radius: big_r, max: fmax });
        }
        let balls = units
            .iter()
            .zip(f)
            .map(|(u, fi)| Ball::new(u * -(big_r - fi), big_r))
            .collect::<Result<Vec<_>>>()?;
        let body = SupportBody::from_ballpoly(BallPolyhedron::new(balls)?, 1e-10)?;
        let hb = body.support_on(measure)?;
        residuals.push(hb.iter().zip(&hp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let fit = if radii.len() >= 2 && residuals.iter().all(|r| *r > 0.0) { Some(loglog_fit(radii, &residuals)?) } else { None };
    Ok(HalfspaceLimitReport { radii: radii.to_vec(), residuals, fit })
}

/// `max |rho_{A((K+L)/2, R)} - (rho_{A(K,R)} + rho_{A(L,R)}) / 2|` over the grid.
pub fn radial_sum_identity(k: &SupportBody, l: &SupportBody, big_r: f64, grid: &DirectionGrid) -> Result<f64> {
    let (k2, l2) = (k.clone(), l.clone());
    let avg = SupportBody::from_fn(k.dim(), move |u| Ok(0.5 * (k2.support(u)? + l2.support(u)?)));
    let fk = SphericalFunction::from_support(k, grid.clone())?;
    let fl = SphericalFunction::from_support(l, grid.clone())?;
    let fm = SphericalFunction::from_support(&avg, grid.clone())?;
    let (ak, al, am) = (build_a(&fk, big_r)?, build_a(&fl, big_r)?, build_a(&fm, big_r)?);
    Ok(grid
        .iter()
        .map(|u| (am.radial(u) - 0.5 * (ak.radial(u) + al.radial(u))).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetralTupleReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest `area(symmetral tuple) - min(area(K tuple), area(reflected K tuple))`.
    pub worst_margin: f64,
}

fn tuple_area(k: &SupportBody, thetas: &[[f64; 2]], big_r: f64) -> Result<f64> {
    let disks = thetas
        .iter()
        .map(|t| Ok(([-(big_r - k.support(t)?) * t[0], -(big_r - k.support(t)?) * t[1]], big_r)))
        .collect::<Result<Vec<_>>>()?;
    let centers: Vec<[f64; 2]> = disks.iter().map(|d| d.0).collect();
    Ok(exact_disk_intersection_2d(&BallPolyhedron::from_centers(&centers, big_r)?)?.0)
}

/// Planar check that the area of the ball intersection built from `M_u K`
/// at random direction tuples is at least the smaller of the areas built
/// from `K` at the same tuple and at its reflection.
pub fn symmetral_tuple_check(k: &SupportBody, u: &[f64], big_r: f64, count: usize, trials: usize, seed: u64) -> Result<SymmetralTupleReport> {
    if k.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: k.dim() });
    }
    let m = minkowski_symmetral(k, u)?;
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for t in 0..trials as u64 {
        let mut rng = stream_rng(seed, t);
        let thetas: Vec<[f64; 2]> = (0..count).map(|_| unit2(rng.random::<f64>() * 2.0 * PI)).collect();
        let reflected: Vec<[f64; 2]> = thetas
            .iter()
            .map(|th| {
                let r = reflect(u, th);
                [r[0], r[1]]
            })
            .collect();
        let lhs = tuple_area(&m, &thetas, big_r)?;
        let rhs = tuple_area(k, &thetas, big_r)?.min(tuple_area(k, &reflected, big_r)?);
        let margin = lhs - rhs;
        worst = worst.min(margin);
        if margin < -1e-9 * big_r * big_r {
            violations += 1;
        }
    }
    Ok(SymmetralTupleReport { trials, violations, worst_margin: worst })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingTrajectory {
    /// Mean width after each step, starting with the input body.
    pub mean_width: Vec<f64>,
    /// Hausdorff distance to the centered ball of radius `w / 2` after each step.
    pub hausdorff: Vec<f64>,
    pub table_size: usize,
}

/// Iterated Minkowski symmetrals of a planar body about random directions.
///
/// The body is tabulated at `table_size` angles and the directions are drawn
/// from the `2 * table_size` angles that keep the table exact.
pub fn minkowski_rounding(k: &SupportBody, iterations: usize, table_size: usize, seed: u64) -> Result<RoundingTrajectory> {
    if k.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: k.dim() });
    }
    let mut body = k.tabulate_2d(table_size)?;
    let stats = |b: &SupportBody| -> (f64, f64) {
        let SupportBody::Tabulated { values } = b else { unreachable!("rounding keeps the body tabulated") };
        let w = 2.0 * values.iter().sum::<f64>() / values.len() as f64;
        (w, values.iter().map(|v| (v - w / 2.0).abs()).fold(0.0, f64::max))
    };
    let (w0, d0) = stats(&body);
    let mut mean_width = vec![w0];
    let mut hausdorff = vec![d0];
    let mut rng = stream_rng(seed, 0);
    for _ in 0..iterations {
        let idx = rng.random_range(0..2 * table_size);
        let alpha = PI * idx as f64 / table_size as f64 - PI / 2.0;
        body = minkowski_symmetral(&body, &unit2(alpha))?;
        let (w, d) = stats(&body);
        mean_width.push(w);
        hausdorff.push(d);
    }
    Ok(RoundingTrajectory { mean_width, hausdorff, table_size })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point;

    fn circle(m: usize) -> DirectionGrid {
        DirectionGrid::circle(m, 0.0).unwrap()
    }

    #[test]
    fn constant_function_gives_a_ball() {
        let f = SphericalFunction::constant(circle(256), 0.7).unwrap();
        let a = build_a(&f, 3.0).unwrap();
        assert!(circle(256).iter().all(|u| (a.radial(u) - 2.3).abs() < 1e-14));
        assert!((volume_radius(&a, f.grid()) - 2.3).abs() < 1e-12);
        assert!(matches!(build_a(&f, 0.5), Err(Error::RadiusTooSmall { .. })));
    }

    #[test]
    fn segment_radial_values() {
        let grid = circle(360);
        let seg = SupportBody::segment(&point(&[1.0, 0.0]), 2.0).unwrap();
        // a segment has no interior; lift it by a small ball
        let k = SupportBody::from_fn(2, move |u| Ok(seg.support(u)? + 0.1));
        let f = SphericalFunction::from_support(&k, grid.clone()).unwrap();
        let a = build_a(&f, 5.0).unwrap();
        for u in grid.iter() {
            assert!((a.radial(u) - (5.0 - 0.1 - u[0].abs())).abs() < 1e-12);
            assert!((a.radial(&[-u[0], -u[1]]) + f.value(u).unwrap() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn off_grid_construction_uses_the_oracle() {
        let grid = DirectionGrid::circle(101, 0.01).unwrap();
        let f = SphericalFunction::from_support(&SupportBody::square(1.0), grid.clone()).unwrap();
        let a = build_a(&f, 4.0).unwrap();
        let u = grid.direction(7);
        assert!((a.radial(&[-u[0], -u[1]]) + f.values()[7] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn wulff_of_support_reproduces_the_square() {
        let f = SphericalFunction::from_support(&SupportBody::square(1.0), circle(512)).unwrap();
        let w = wulff_shape(&f).unwrap();
        let d = crate::geom::hausdorff_distance(&w.body, &SupportBody::square(1.0), &circle(1000)).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn constant_wulff_is_the_disk_and_approximations_shrink_to_it() {
        let f = SphericalFunction::constant(circle(512), 1.0).unwrap();
        let w = wulff_shape(&f).unwrap();
        let measure = circle(777);
        let hw = w.body.support_on(&measure).unwrap();
        // circumscribed 512-gon around the unit disk
        assert!(hw.iter().all(|h| *h >= 1.0 - 1e-12 && *h <= 1.0 / (PI / 512.0).cos() + 1e-12));
        let mut prev = f64::INFINITY;
        for big_r in [2.0, 4.0, 8.0] {
            let b = SupportBody::from_ballpoly(ballpoly_approx(&f, big_r).unwrap(), 1e-10).unwrap();
            let h = b.support_on(&measure).unwrap();
            assert!(h.iter().all(|v| *v >= 1.0 - 1e-9), "approximation must contain the disk");
            assert!(h.iter().zip(&hw).all(|(a, b)| *a <= b + 1e-12), "approximation must lie in W(f)");
            let gap = h.iter().zip(&hw).map(|(a, b)| b - a).fold(0.0, f64::max);
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn fit_recovers_a_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        let fit = loglog_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_function_has_no_vr_residual() {
        let f = SphericalFunction::constant(circle(64), 0.5).unwrap();
        let rep = vr_asymptotics(&f, &[5.0, 10.0]).unwrap();
        assert!(rep.rows.iter().all(|r| r.residual.abs() < 1e-12));
        assert!(rep.fit.is_none());
    }

    #[test]
    fn jensen_gap_is_nonnegative() {
        let f = SphericalFunction::from_fn(circle(720), |u| Ok(1.0 + 0.3 * u[0] + 0.2 * (3.0 * u[1]).sin())).unwrap();
        for big_r in [6.0, 12.0, 50.0] {
            assert!(vr_residual(&f, big_r).unwrap() >= 0.0);
        }
    }

    #[test]
    fn hull_reduction_membership() {
        let pts = [point(&[0.0, 0.0]), point(&[1.0, 0.0])];
        let rep = hull_reduction_test(&pts, 1.0, 20_000, 50, 3).unwrap();
        assert_eq!(rep.mismatches, 0);
        let lens = 2.0 * (0.5f64).acos() - 0.5 * 3f64.sqrt();
        assert!((rep.volume.0 - lens).abs() < 4.0 * rep.volume.1, "{rep:?}");
        let one = hull_reduction_test(&pts[..1], 1.0, 1000, 10, 4).unwrap();
        assert_eq!(one.mismatches, 0);
    }

    #[test]
    fn triangle_limit_and_hemisphere_precondition() {
        let thetas: Vec<Point> = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0].iter().map(|a| point(&unit2(*a))).collect();
        let rep = halfspace_limit_test(&thetas, &[1.0; 3], &[10.0, 20.0, 40.0, 80.0], &circle(720)).unwrap();
        assert!(rep.residuals.windows(2).all(|w| w[1] < w[0]), "{rep:?}");
        let slope = rep.fit.unwrap().slope;
        assert!((-1.3..=-0.7).contains(&slope), "{slope}");

        let square: Vec<Point> = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]].iter().map(|v| point(v)).collect();
        let rep = halfspace_limit_test(&square, &[0.5; 4], &[10.0, 100.0], &circle(720)).unwrap();
        assert!(rep.residuals[1] < rep.residuals[0]);

        let upper: Vec<Point> = [0.3, 1.2, 2.5].iter().map(|a| point(&unit2(*a))).collect();
        assert_eq!(halfspace_limit_test(&upper, &[1.0; 3], &[10.0], &circle(16)).unwrap_err(), Error::HemisphereViolation);
    }

    #[test]
    fn radial_sums() {
        let grid = circle(500);
        let sq = SupportBody::square(1.0);
        assert!(radial_sum_identity(&sq, &sq, 3.0, &grid).unwrap() < 1e-12);
        let rot = SupportBody::polytope(
            [0.0, 1.0, 2.0, 3.0].iter().map(|k| point(&unit2(PI / 4.0 + k * PI / 2.0)).scale(0.5)).collect(),
        )
        .unwrap();
        assert!(radial_sum_identity(&sq, &rot, 3.0, &grid).unwrap() < 1e-12);
    }

    #[test]
    fn symmetral_tuples_dominate() {
        let k = SupportBody::polytope(vec![point(&[0.6, 0.1]), point(&[-0.2, 0.5]), point(&[-0.3, -0.4]), point(&[0.4, -0.3])]).unwrap();
        let rep = symmetral_tuple_check(&k, &unit2(0.4), 2.0, 4, 100, 9).unwrap();
        assert_eq!(rep.violations, 0, "{rep:?}");
    }

    #[test]
    fn rounding_keeps_width_and_approaches_the_ball() {
        let ball = SupportBody::ball(point(&[0.0, 0.0]), 1.0).unwrap();
        let t = minkowski_rounding(&ball, 10, 256, 1).unwrap();
        assert!(t.hausdorff.iter().all(|d| *d < 1e-15));

        let t = minkowski_rounding(&SupportBody::square(1.0), 500, 4096, 2).unwrap();
        let w0 = t.mean_width[0];
        assert!(t.mean_width.iter().all(|w| (w - w0).abs() < 1e-10));
        assert!((w0 - 4.0 / PI).abs() < 1e-6);
        assert!(t.hausdorff.windows(2).all(|p| p[1] <= p[0] + 1e-15));
        assert!(*t.hausdorff.last().unwrap() < 0.01);
    }
}
