//! Star-shaped sets described by their radial function.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use super::{angle_of, norm, DirectionGrid};
use crate::error::{Error, Result};

type RadialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Radial {
    Constant(f64),
    /// Values at angles `2 pi i / len`, linearly interpolated.
    Table(Arc<[f64]>),
    Oracle(RadialFn),
}

/// A set `{x : |x| <= rho(x / |x|)}` that is star-shaped about the origin.
#[derive(Clone)]
pub struct StarBody {
    dim: usize,
    radial: Radial,
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.radial {
            Radial::Constant(r) => format!("ball(r={r})"),
            Radial::Table(t) => format!("table({} angles)", t.len()),
            Radial::Oracle(_) => "oracle".to_string(),
        };
        f.debug_struct("StarBody").field("dim", &self.dim).field("radial", &kind).finish()
    }
}

impl StarBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { dim, radial: Radial::Constant(radius) })
    }

    /// Planar star body from radial values at equally spaced angles starting at 0.
    pub fn from_table_2d(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidInput("radial table needs at least 3 values".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::InvalidInput(format!("radial values must be positive, got {v}")));
        }
        Ok(Self { dim: 2, radial: Radial::Table(values.into()) })
    }

    /// Star body with radial oracle `rho`, validated for positivity on `grid`.
    pub fn from_fn(grid: &DirectionGrid, rho: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if let Some(u) = grid.iter().find(|u| !(rho(u) > 0.0)) {
            return Err(Error::InvalidInput(format!("radial function is not positive at {u:?}")));
        }
        Ok(Self { dim: grid.dim(), radial: Radial::Oracle(Arc::new(rho)) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `rho(theta)` for a unit vector `theta`.
    pub fn radial(&self, theta: &[f64]) -> f64 {
        match &self.radial {
            Radial::Constant(r) => *r,
            Radial::Table(t) => {
                let m = t.len();
                let s = angle_of(theta) / TAU * m as f64;
                let i = (s.floor() as usize) % m;
                let frac = s - s.floor();
                t[i] * (1.0 - frac) + t[(i + 1) % m] * frac
            }
            Radial::Oracle(f) => f(theta),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        if r == 0.0 {
            return true;
        }
        let theta: Vec<f64> = x.iter().map(|v| v / r).collect();
        r <= self.radial(&theta)
    }

    /// Largest jump of `rho` between consecutive directions of a circle grid.
    pub fn max_adjacent_jump(&self, grid: &DirectionGrid) -> f64 {
        let vals: Vec<f64> = grid.iter().map(|u| self.radial(u)).collect();
        (0..vals.len()).map(|i| (vals[(i + 1) % vals.len()] - vals[i]).abs()).fold(0.0, f64::max)
    }

    /// `(int rho^n d sigma)^(1/n)`, the radius of the ball of equal volume.
    pub fn volume_radius(&self, grid: &DirectionGrid) -> f64 {
        let n = self.dim as i32;
        grid.integrate(|u| self.radial(u).powi(n)).powf(1.0 / n as f64)
    }

    /// Lebesgue volume via the polar formula.
    pub fn volume(&self, grid: &DirectionGrid) -> f64 {
        crate::intrinsic::omega(self.dim) * grid.integrate(|u| self.radial(u).powi(self.dim as i32))
    }
}
