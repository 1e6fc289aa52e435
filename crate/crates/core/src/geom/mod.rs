//! Vector geometry, ball-polyhedra and their support/radial descriptions.

mod arcs;
mod ball;
mod grid;
mod polytope;
mod project;
mod star;
mod support;

pub use arcs::{ArcPolygon, CircularArc};
pub use ball::{Ball, BallPolyhedron};
pub use grid::{DirectionGrid, GridKind};
pub use polytope::{convex_hull_2d, directions_surround_origin, HalfspacePolytope};
pub use project::{
    distance_to_ballpoly, dykstra, project_onto_ballpoly, ConvexPiece, Halfspace, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
pub use star::StarBody;
pub use support::{
    hausdorff_distance, minkowski_symmetral, reflect, support_function, SupportBody, SupportFn,
};

use nalgebra::DVector;

/// A point (or vector) in `R^n`.
pub type Point = DVector<f64>;

/// Builds a point from its coordinates.
pub fn point(coords: &[f64]) -> Point {
    DVector::from_column_slice(coords)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unit vector at angle `phi` in the plane.
#[inline]
pub fn unit2(phi: f64) -> [f64; 2] {
    [phi.cos(), phi.sin()]
}

/// Angle of a planar vector in `[0, 2pi)`.
#[inline]
pub(crate) fn angle_of(v: &[f64]) -> f64 {
    let a = v[1].atan2(v[0]);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Normalizes `v`, failing on the zero vector.
pub fn normalized(v: &Point) -> crate::Result<Point> {
    let n = v.norm();
    if n <= f64::MIN_POSITIVE {
        return Err(crate::Error::ZeroVector);
    }
    Ok(v / n)
}
