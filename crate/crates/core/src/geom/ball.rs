use super::{dist2, point, Point};
use crate::error::{invalid, Result};

/// Closed Euclidean ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return invalid(format!("ball radius must be positive and finite, got {radius}"));
        }
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return invalid("ball center must be a finite, nonempty vector");
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let r = self.radius + tol;
        dist2(self.center.as_slice(), x) <= r * r
    }
}

/// Intersection of finitely many balls.
///
/// The intersection may be empty; emptiness is detected lazily by the
/// routines that need a point of the body.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPolyhedron {
    balls: Vec<Ball>,
    dim: usize,
}

impl BallPolyhedron {
    pub fn new(balls: Vec<Ball>) -> Result<Self> {
        let Some(first) = balls.first() else {
            return invalid("a ball-polyhedron needs at least one ball");
        };
        let dim = first.dim();
        if let Some(b) = balls.iter().find(|b| b.dim() != dim) {
            return Err(crate::Error::DimensionMismatch { expected: dim, found: b.dim() });
        }
        Ok(Self { balls, dim })
    }

    /// Balls of a common radius around the given centers.
    pub fn from_centers<C: AsRef<[f64]>>(centers: &[C], radius: f64) -> Result<Self> {
        let balls = centers
            .iter()
            .map(|c| Ball::new(point(c.as_ref()), radius))
            .collect::<Result<Vec<_>>>()?;
        Self::new(balls)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.balls.iter().all(|b| b.contains(x, tol))
    }

    /// Cheap emptiness certificate: some pair of balls is disjoint.
    pub fn certainly_empty(&self) -> bool {
        for (i, a) in self.balls.iter().enumerate() {
            for b in &self.balls[i + 1..] {
                let r = a.radius + b.radius;
                if dist2(a.center.as_slice(), b.center.as_slice()) > r * r {
                    return true;
                }
            }
        }
        false
    }

    /// The ball of smallest radius (first one on ties); it contains the body.
    pub fn smallest_ball(&self) -> &Ball {
        self.balls
            .iter()
            .reduce(|best, b| if b.radius < best.radius { b } else { best })
            .expect("nonempty by construction")
    }

    pub fn min_radius(&self) -> f64 {
        self.smallest_ball().radius
    }

    /// Planar view used by the exact circular-arc routines.
    pub(crate) fn disks(&self) -> Vec<([f64; 2], f64)> {
        debug_assert_eq!(self.dim, 2);
        self.balls.iter().map(|b| ([b.center[0], b.center[1]], b.radius)).collect()
    }

    /// Image under `x -> scale * x + shift`.
    pub fn affine_image(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        let balls = self
            .balls
            .iter()
            .map(|b| {
                let c = b.center.iter().zip(shift).map(|(c, s)| scale * c + s).collect::<Vec<_>>();
                Ball::new(point(&c), scale.abs() * b.radius)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(balls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_radius_and_mixed_dims() {
        assert!(Ball::new(point(&[0.0, 0.0]), 0.0).is_err());
        let a = Ball::new(point(&[0.0, 0.0]), 1.0).unwrap();
        let b = Ball::new(point(&[0.0, 0.0, 0.0]), 1.0).unwrap();
        assert!(BallPolyhedron::new(vec![a, b]).is_err());
        assert!(BallPolyhedron::new(vec![]).is_err());
    }

    #[test]
    fn emptiness_certificate() {
        let p = BallPolyhedron::from_centers(&[[0.0, 0.0], [3.0, 0.0]], 1.0).unwrap();
        assert!(p.certainly_empty());
        let q = BallPolyhedron::from_centers(&[[0.0, 0.0], [1.0, 0.0]], 1.0).unwrap();
        assert!(!q.certainly_empty());
    }
}
