//! Support functions of convex bodies, reflections and Minkowski symmetrals.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use super::{angle_of, convex_hull_2d, dot, project_onto_ballpoly, ArcPolygon, BallPolyhedron, DirectionGrid, Point};
use crate::error::{Error, Result};

/// Support oracle evaluated on unit vectors.
pub type SupportFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// A convex body known through its support function.
#[derive(Clone)]
pub enum SupportBody {
    Ball { center: Point, radius: f64 },
    /// Convex hull of finitely many points.
    Polytope { vertices: Vec<Point> },
    /// Planar body tabulated at angles `offset + 2 pi i / len`, linearly interpolated.
    Tabulated { values: Arc<[f64]> },
    /// Planar ball-polyhedron with its exact boundary.
    Arcs(Arc<ArcPolygon>),
    /// Ball-polyhedron in any dimension, evaluated by projected ascent.
    BallPolyhedron { body: BallPolyhedron, tol: f64 },
    Oracle { dim: usize, h: SupportFn },
}

impl fmt::Debug for SupportBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ball { center, radius } => write!(f, "Ball({:?}, {radius})", center.as_slice()),
            Self::Polytope { vertices } => write!(f, "Polytope({} vertices)", vertices.len()),
            Self::Tabulated { values } => write!(f, "Tabulated({} angles)", values.len()),
            Self::Arcs(a) => write!(f, "Arcs({} arcs)", a.arcs().len()),
            Self::BallPolyhedron { body, .. } => write!(f, "BallPolyhedron({} balls)", body.len()),
            Self::Oracle { dim, .. } => write!(f, "Oracle(dim={dim})"),
        }
    }
}

impl SupportBody {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidInput(format!("radius must be nonnegative, got {radius}")));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn polytope(vertices: Vec<Point>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidInput("polytope needs at least one vertex".into()));
        };
        let dim = first.len();
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        Ok(Self::Polytope { vertices })
    }

    /// Axis-parallel square `[-side/2, side/2]^2`.
    pub fn square(side: f64) -> Self {
        let s = side / 2.0;
        Self::Polytope { vertices: [[s, s], [-s, s], [-s, -s], [s, -s]].iter().map(|v| super::point(v)).collect() }
    }

    /// Centered segment of length `len` along `dir`.
    pub fn segment(dir: &Point, len: f64) -> Result<Self> {
        let d = super::normalized(dir)? * (len / 2.0);
        Ok(Self::Polytope { vertices: vec![d.clone(), -d] })
    }

    pub fn from_ballpoly(body: BallPolyhedron, tol: f64) -> Result<Self> {
        if body.dim() == 2 {
            let arcs = ArcPolygon::from_disks(&body.disks())?;
            if arcs.is_empty() {
                return Err(Error::EmptyIntersection);
            }
            Ok(Self::Arcs(Arc::new(arcs)))
        } else {
            Ok(Self::BallPolyhedron { body, tol })
        }
    }

    pub fn from_fn(dim: usize, h: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self::Oracle { dim, h: Arc::new(h) }
    }

    /// Tabulates a planar body at `count` equally spaced angles.
    pub fn tabulate_2d(&self, count: usize) -> Result<Self> {
        self.check_dim(2)?;
        let grid = DirectionGrid::circle(count, 0.0)?;
        let values = grid.iter().map(|u| self.support(u)).collect::<Result<Vec<_>>>()?;
        Ok(Self::Tabulated { values: values.into() })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Polytope { vertices } => vertices[0].len(),
            Self::Tabulated { .. } | Self::Arcs(_) => 2,
            Self::BallPolyhedron { body, .. } => body.dim(),
            Self::Oracle { dim, .. } => *dim,
        }
    }

    /// Short description of the representation.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Ball { .. } => "ball",
            Self::Polytope { .. } => "polytope",
            Self::Tabulated { .. } => "tabulated",
            Self::Arcs(_) | Self::BallPolyhedron { .. } => "ball-polyhedron",
            Self::Oracle { .. } => "symmetral-composite",
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        Ok(())
    }

    /// `h_K(u)` for a unit vector `u`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        match self {
            Self::Ball { center, radius } => Ok(dot(center.as_slice(), u) + radius),
            Self::Polytope { vertices } => {
                Ok(vertices.iter().map(|v| dot(v.as_slice(), u)).fold(f64::NEG_INFINITY, f64::max))
            }
            Self::Tabulated { values } => Ok(interpolate_table(values, angle_of(u))),
            Self::Arcs(a) => a.support([u[0], u[1]]).ok_or(Error::EmptyIntersection),
            Self::BallPolyhedron { body, tol } => support_function(body, u, *tol),
            Self::Oracle { h, .. } => h(u),
        }
    }

    /// Values of `h` on every direction of `grid`.
    pub fn support_on(&self, grid: &DirectionGrid) -> Result<Vec<f64>> {
        self.check_dim(grid.dim())?;
        grid.iter().map(|u| self.support(u)).collect()
    }

    /// Image under `x -> scale * x`.
    pub fn scaled(&self, scale: f64) -> Self {
        match self {
            Self::Ball { center, radius } => Self::Ball { center: center * scale, radius: radius * scale },
            Self::Polytope { vertices } => Self::Polytope { vertices: vertices.iter().map(|v| v * scale).collect() },
            Self::Tabulated { values } => Self::Tabulated { values: values.iter().map(|v| v * scale).collect() },
            other => {
                let inner = other.clone();
                Self::from_fn(other.dim(), move |u| Ok(scale * inner.support(u)?))
            }
        }
    }
}

fn interpolate_table(values: &[f64], phi: f64) -> f64 {
    let m = values.len();
    let s = phi / TAU * m as f64;
    let i = (s.floor() as usize) % m;
    let frac = s - s.floor();
    values[i] * (1.0 - frac) + values[(i + 1) % m] * frac
}

/// Reflection of `x` in the hyperplane `u^perp`.
pub fn reflect(u: &[f64], x: &[f64]) -> Point {
    let c = 2.0 * dot(x, u);
    Point::from_iterator(x.len(), x.iter().zip(u).map(|(xi, ui)| xi - c * ui))
}

/// Support function of a ball-polyhedron at the unit vector `theta`.
///
/// Exact in the plane. Otherwise runs the proximal iteration
/// `y <- P(y + T theta)` with `T` a few times the largest radius, which is
/// monotone in `<y, theta>` and converges linearly on intersections of balls.
pub fn support_function(p: &BallPolyhedron, theta: &[f64], tol: f64) -> Result<f64> {
    if theta.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: theta.len() });
    }
    if (super::norm(theta) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("support direction must be a unit vector".into()));
    }
    if p.certainly_empty() {
        return Err(Error::EmptyIntersection);
    }
    if p.dim() == 2 {
        let arcs = ArcPolygon::from_disks(&p.disks())?;
        return arcs.support([theta[0], theta[1]]).ok_or(Error::EmptyIntersection);
    }
    let step = 4.0 * p.balls().iter().map(|b| b.radius()).fold(0.0, f64::max);
    let smallest = p.smallest_ball();
    let start: Vec<f64> =
        smallest.center().iter().zip(theta).map(|(c, t)| c + smallest.radius() * t).collect();
    let proj_tol = (tol * 1e-2).max(1e-14);
    let mut y = project_onto_ballpoly(p, &start, proj_tol, super::DEFAULT_MAX_ITER)?;
    let mut value = dot(y.as_slice(), theta);
    let diam = 2.0 * smallest.radius();
    const MAX_STEPS: usize = 2_000;
    for _ in 0..MAX_STEPS {
        let z: Vec<f64> = y.iter().zip(theta).map(|(a, t)| a + step * t).collect();
        let next = project_onto_ballpoly(p, &z, proj_tol, super::DEFAULT_MAX_ITER)?;
        let next_value = dot(next.as_slice(), theta);
        let moved = (&next - &y).norm();
        y = next;
        value = next_value.max(value);
        // Optimality of the proximal step bounds the gap by |moved| * diam / T.
        if moved * diam <= tol * step {
            return Ok(value);
        }
    }
    Err(Error::NonConvergence { iterations: MAX_STEPS, change: f64::NAN })
}

/// Support oracle of `(K + R_u K) / 2`.
pub fn minkowski_symmetral(k: &SupportBody, u: &[f64]) -> Result<SupportBody> {
    if u.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: u.len() });
    }
    let un = super::normalized(&super::point(u))?;
    let u = un.as_slice();
    match k {
        SupportBody::Ball { center, radius } => {
            let c = (center + reflect(u, center.as_slice())) / 2.0;
            Ok(SupportBody::Ball { center: c, radius: *radius })
        }
        SupportBody::Polytope { vertices } => {
            let reflected: Vec<Point> = vertices.iter().map(|w| reflect(u, w.as_slice())).collect();
            let mut sums = Vec::with_capacity(vertices.len() * vertices.len());
            for v in vertices {
                for w in &reflected {
                    sums.push((v + w) / 2.0);
                }
            }
            if k.dim() == 2 {
                let pts: Vec<[f64; 2]> = sums.iter().map(|p| [p[0], p[1]]).collect();
                sums = convex_hull_2d(&pts).iter().map(|p| super::point(p)).collect();
            }
            Ok(SupportBody::Polytope { vertices: sums })
        }
        SupportBody::Tabulated { values } => {
            // R_u maps the angle phi to 2 alpha + pi - phi where alpha is the angle of u.
            let m = values.len();
            let shift = (2.0 * angle_of(u) + PI) / TAU * m as f64;
            let k_idx = shift.round();
            if (shift - k_idx).abs() < 1e-9 {
                let k_idx = k_idx as i64;
                let out: Vec<f64> = (0..m as i64)
                    .map(|i| 0.5 * (values[i as usize] + values[(k_idx - i).rem_euclid(m as i64) as usize]))
                    .collect();
                return Ok(SupportBody::Tabulated { values: out.into() });
            }
            Ok(composite(k, un))
        }
        _ => Ok(composite(k, un)),
    }
}

fn composite(k: &SupportBody, u: Point) -> SupportBody {
    let inner = k.clone();
    SupportBody::from_fn(k.dim(), move |theta| {
        let r = reflect(u.as_slice(), theta);
        Ok(0.5 * (inner.support(theta)? + inner.support(r.as_slice())?))
    })
}

/// `max_theta |h_A(theta) - h_B(theta)|` over the grid.
pub fn hausdorff_distance(a: &SupportBody, b: &SupportBody, grid: &DirectionGrid) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let mut worst: f64 = 0.0;
    for u in grid.iter() {
        worst = worst.max((a.support(u)? - b.support(u)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point;

    #[test]
    fn reflection_is_an_involution() {
        assert_eq!(reflect(&[1.0, 0.0], &[3.0, 1.0]).as_slice(), &[-3.0, 1.0]);
        let u = [0.6, 0.8];
        let x = [0.3, -2.0];
        let back = reflect(&u, reflect(&u, &x).as_slice());
        assert!((back - point(&x)).norm() < 1e-15);
        let perp = [0.8, -0.6];
        assert!((reflect(&u, &perp) - point(&perp)).norm() < 1e-15);
    }

    #[test]
    fn ball_support_values() {
        let p = BallPolyhedron::from_centers(&[[1.0, 0.0]], 2.0).unwrap();
        assert!((support_function(&p, &[0.0, 1.0], 1e-9).unwrap() - 2.0).abs() < 1e-12);
        let p3 = BallPolyhedron::from_centers(&[[1.0, 0.0, 0.0]], 2.0).unwrap();
        assert!((support_function(&p3, &[0.0, 1.0, 0.0], 1e-9).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn lens_support_in_three_dimensions() {
        // the rotation body of the planar lens; its top point sits at height sqrt(3)/2
        let p = BallPolyhedron::from_centers(&[[0.5, 0.0, 0.0], [-0.5, 0.0, 0.0]], 1.0).unwrap();
        let top = support_function(&p, &[0.0, 0.0, 1.0], 1e-10).unwrap();
        assert!((top - 3f64.sqrt() / 2.0).abs() < 1e-7, "{top}");
        let side = support_function(&p, &[1.0, 0.0, 0.0], 1e-10).unwrap();
        assert!((side - 0.5).abs() < 1e-7, "{side}");
    }

    #[test]
    fn ascent_agrees_with_exact_arcs_when_lifted() {
        // a cylinder-free check: a 3D body whose centers lie in the plane z = 0
        // has the planar support in every in-plane direction
        let centers2 = [[0.1, 0.2], [0.9, -0.3], [-0.4, -0.5], [0.2, 0.8]];
        let centers3: Vec<[f64; 3]> = centers2.iter().map(|c| [c[0], c[1], 0.0]).collect();
        let p2 = BallPolyhedron::from_centers(&centers2, 1.3).unwrap();
        let p3 = BallPolyhedron::from_centers(&centers3, 1.3).unwrap();
        for k in 0..16 {
            let phi = k as f64 * TAU / 16.0 + 0.1;
            let u = [phi.cos(), phi.sin()];
            let exact = support_function(&p2, &u, 1e-12).unwrap();
            let ascent = support_function(&p3, &[u[0], u[1], 0.0], 1e-11).unwrap();
            assert!((exact - ascent).abs() < 1e-6, "{k}: {exact} vs {ascent}");
        }
    }

    #[test]
    fn disjoint_support_reports_empty() {
        let p = BallPolyhedron::from_centers(&[[0.0, 0.0, 0.0], [3.0, 0.0, 0.0]], 1.0).unwrap();
        assert_eq!(support_function(&p, &[1.0, 0.0, 0.0], 1e-9), Err(Error::EmptyIntersection));
    }

    #[test]
    fn symmetral_of_ball_and_segment() {
        let b = SupportBody::ball(point(&[1.0, 2.0]), 0.7).unwrap();
        match minkowski_symmetral(&b, &[1.0, 0.0]).unwrap() {
            SupportBody::Ball { center, radius } => {
                assert!((center - point(&[0.0, 2.0])).norm() < 1e-15);
                assert_eq!(radius, 0.7);
            }
            other => panic!("{other:?}"),
        }
        let seg = SupportBody::polytope(vec![point(&[1.0, 0.0]), point(&[3.0, 0.0])]).unwrap();
        let m = minkowski_symmetral(&seg, &[1.0, 0.0]).unwrap();
        assert!((m.support(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.support(&[-1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_symmetral_on_aligned_direction_matches_oracle() {
        let sq = SupportBody::square(1.0);
        let tab = sq.tabulate_2d(360).unwrap();
        let alpha = PI * 7.0 / 360.0 - PI / 2.0;
        let u = [alpha.cos(), alpha.sin()];
        let m_tab = minkowski_symmetral(&tab, &u).unwrap();
        assert!(matches!(m_tab, SupportBody::Tabulated { .. }));
        let m_exact = minkowski_symmetral(&sq, &u).unwrap();
        let grid = DirectionGrid::circle(360, 0.0).unwrap();
        assert!(hausdorff_distance(&m_tab, &m_exact, &grid).unwrap() < 1e-12);
    }

    #[test]
    fn hausdorff_examples() {
        let grid = DirectionGrid::new(2, 4096).unwrap();
        let b1 = SupportBody::ball(point(&[0.0, 0.0]), 1.0).unwrap();
        let b2 = SupportBody::ball(point(&[0.0, 0.0]), 2.0).unwrap();
        assert!((hausdorff_distance(&b1, &b2, &grid).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(hausdorff_distance(&b1, &b1, &grid).unwrap(), 0.0);
        let sq = SupportBody::square(1.0);
        let circ = SupportBody::ball(point(&[0.0, 0.0]), 2f64.sqrt() / 2.0).unwrap();
        let d = hausdorff_distance(&sq, &circ, &grid).unwrap();
        assert!((d - (2f64.sqrt() / 2.0 - 0.5)).abs() < 1e-12);
    }
}
