//! Euclidean projection onto intersections of convex pieces (Dykstra).

use nalgebra::{DMatrix, DVector};

use super::{dist2, dot, Ball, BallPolyhedron, Point};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// A closed convex set with a cheap exact projection.
pub trait ConvexPiece {
    fn project_in_place(&self, x: &mut [f64]);
    /// Positive amount by which `x` lies outside, zero or negative inside.
    fn violation(&self, x: &[f64]) -> f64;
}

impl ConvexPiece for Ball {
    fn project_in_place(&self, x: &mut [f64]) {
        let c = self.center().as_slice();
        let d = dist2(c, x).sqrt();
        if d > self.radius() {
            let s = self.radius() / d;
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi = ci + (*xi - ci) * s;
            }
        }
    }

    fn violation(&self, x: &[f64]) -> f64 {
        dist2(self.center().as_slice(), x).sqrt() - self.radius()
    }
}

/// Closed halfspace `{x : <normal, x> <= offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Point,
    pub offset: f64,
}

impl ConvexPiece for Halfspace {
    fn project_in_place(&self, x: &mut [f64]) {
        let excess = dot(self.normal.as_slice(), x) - self.offset;
        if excess > 0.0 {
            for (xi, ni) in x.iter_mut().zip(self.normal.iter()) {
                *xi -= excess * ni;
            }
        }
    }

    fn violation(&self, x: &[f64]) -> f64 {
        dot(self.normal.as_slice(), x) - self.offset
    }
}

/// Nearest point of `pieces[0] ∩ pieces[1] ∩ ...` to `x`.
///
/// Runs cyclic Dykstra with per-piece correction vectors, so the limit is
/// the true nearest point rather than an arbitrary feasible one. Converges
/// when a full sweep moves the iterate by less than `tol` and every piece is
/// satisfied within `tol`.
pub fn dykstra<P: ConvexPiece>(pieces: &[P], x: &[f64], tol: f64, max_iter: usize) -> Result<Point> {
    match dykstra_run(pieces, x, tol, max_iter) {
        Run::Converged(y) => Ok(y),
        Run::Stalled { change, .. } => Err(Error::NonConvergence { iterations: max_iter, change }),
    }
}

enum Run {
    Converged(Point),
    Stalled { last: Vec<f64>, change: f64 },
}

fn dykstra_run<P: ConvexPiece>(pieces: &[P], x: &[f64], tol: f64, max_iter: usize) -> Run {
    let n = x.len();
    let max_violation = |y: &[f64]| pieces.iter().map(|p| p.violation(y)).fold(f64::MIN, f64::max);
    if max_violation(x) <= 0.0 {
        return Run::Converged(Point::from_column_slice(x));
    }
    // A single-piece projection that lands in every other piece is exact.
    let worst = pieces
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.violation(x)))
        .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a })
        .0;
    let mut y = x.to_vec();
    pieces[worst].project_in_place(&mut y);
    if pieces.iter().all(|p| p.violation(&y) <= 1e-14 * (1.0 + y.iter().map(|v| v.abs()).sum::<f64>())) {
        return Run::Converged(Point::from_vec(y));
    }

    let mut cur = x.to_vec();
    let mut corrections = vec![0.0; pieces.len() * n];
    let mut prev = vec![0.0; n];
    let mut buf = vec![0.0; n];
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        prev.copy_from_slice(&cur);
        for (k, piece) in pieces.iter().enumerate() {
            let corr = &mut corrections[k * n..(k + 1) * n];
            for ((b, c), p) in buf.iter_mut().zip(&cur).zip(corr.iter()) {
                *b = c + p;
            }
            cur.copy_from_slice(&buf);
            piece.project_in_place(&mut cur);
            for ((p, b), c) in corr.iter_mut().zip(&buf).zip(&cur) {
                *p = b - c;
            }
        }
        change = dist2(&prev, &cur).sqrt();
        if change < tol && max_violation(&cur) <= tol {
            return Run::Converged(Point::from_vec(cur));
        }
    }
    Run::Stalled { last: cur, change }
}

/// Nearest point of the ball-polyhedron `p` to `x`.
///
/// Returns [`Error::EmptyIntersection`] when two balls are disjoint and
/// [`Error::NonConvergence`] when Dykstra stalls and the stalled iterate
/// cannot be completed exactly, which happens for empty or nearly empty
/// intersections.
pub fn project_onto_ballpoly(p: &BallPolyhedron, x: &[f64], tol: f64, max_iter: usize) -> Result<Point> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x.len() });
    }
    if p.certainly_empty() {
        return Err(Error::EmptyIntersection);
    }
    match dykstra_run(p.balls(), x, tol, max_iter) {
        Run::Converged(y) => Ok(y),
        Run::Stalled { last, change } => {
            polish_on_spheres(p, x, &last, tol).ok_or(Error::NonConvergence { iterations: max_iter, change })
        }
    }
}

/// Exact projection on the spheres closest to active at `near`, trying
/// active sets of increasing size.
///
/// Dykstra converges sublinearly when balls meet tangentially. There the
/// nearest point lies on the intersection of the active spheres, which is a
/// sphere inside an affine subspace and has a closed-form nearest point.
fn polish_on_spheres(p: &BallPolyhedron, x: &[f64], near: &[f64], tol: f64) -> Option<Point> {
    let mut order: Vec<&Ball> = p.balls().iter().collect();
    order.sort_by(|a, b| a.violation(near).abs().total_cmp(&b.violation(near).abs()));
    (1..=order.len().min(x.len() + 1)).find_map(|k| solve_active(p, x, &order[..k], tol))
}

fn solve_active(p: &BallPolyhedron, x: &[f64], active: &[&Ball], tol: f64) -> Option<Point> {
    let scale = p.min_radius();
    let first = *active.first()?;
    let n = x.len();
    let c1 = first.center();
    let r1 = first.radius();
    // Subtracting the first sphere equation from the others leaves M y = b.
    let k = active.len() - 1;
    let affine = if k == 0 {
        None
    } else {
        let m = DMatrix::from_fn(k, n, |i, j| 2.0 * (active[i + 1].center()[j] - c1[j]));
        let b = DVector::from_fn(k, |i, _| {
            let ci = active[i + 1].center();
            ci.norm_squared() - c1.norm_squared() - active[i + 1].radius().powi(2) + r1 * r1
        });
        let pinv = m.clone().pseudo_inverse(1e-12).ok()?;
        Some((m, b, pinv))
    };
    let project_affine = |z: &Point| match &affine {
        None => z.clone(),
        Some((m, b, pinv)) => z - pinv * (m * z - b),
    };
    let c = project_affine(c1);
    let r2 = r1 * r1 - (c1 - &c).norm_squared();
    if r2 < -tol * scale {
        return None;
    }
    let r = r2.max(0.0).sqrt();
    let xp = Point::from_column_slice(x);
    let d = project_affine(&xp) - &c;
    let y = if d.norm() > 0.0 {
        &c + d.normalize() * r
    } else if r <= tol {
        c.clone()
    } else {
        return None;
    };
    if !p.balls().iter().all(|b| b.violation(y.as_slice()) <= tol) {
        return None;
    }
    // KKT: x - y = sum lambda_i (y - c_i) with lambda >= 0, unless the active
    // spheres pin y down to within tolerance.
    if r > tol.sqrt() {
        let g = DMatrix::from_fn(n, active.len(), |j, i| y[j] - active[i].center()[j]);
        let rhs = &xp - &y;
        let lambda = g.clone().pseudo_inverse(1e-12).ok()? * &rhs;
        if (g * &lambda - rhs).norm() > tol.sqrt() || lambda.iter().any(|l| *l < -tol.sqrt()) {
            return None;
        }
    }
    Some(y)
}

/// Euclidean distance from `x` to the ball-polyhedron.
pub fn distance_to_ballpoly(p: &BallPolyhedron, x: &[f64], tol: f64) -> Result<f64> {
    let y = project_onto_ballpoly(p, x, tol, DEFAULT_MAX_ITER)?;
    Ok(dist2(x, y.as_slice()).sqrt())
}
