//! Quadrature grids on the unit sphere with equal weights.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{unit2, Point};
use crate::error::{Error, Result};
use crate::rng::fill_unit_sphere;

const GAUSS_SEED: u64 = 0x5ee_d0f5_fe7e;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Equally spaced angles on the circle.
    UniformAngles,
    /// Spherical Fibonacci lattice on `S^2`.
    Fibonacci,
    /// Antipodally paired random directions from a fixed seed.
    SeededAntipodal,
}

/// Unit vectors `theta_i` with weights summing to one.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    dim: usize,
    kind: GridKind,
    /// Row-major `len x dim` coordinates.
    coords: Vec<f64>,
    offset: f64,
}

impl DirectionGrid {
    /// The default grid for dimension `n` with `count` directions.
    pub fn new(dim: usize, count: usize) -> Result<Self> {
        match dim {
            0 | 1 => Err(Error::UnsupportedDimension { dim }),
            2 => Self::circle(count, 0.0),
            3 => Self::fibonacci(count),
            _ => Self::seeded(dim, count),
        }
    }

    /// Angles `offset + 2 pi i / count`.
    pub fn circle(count: usize, offset: f64) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidInput(format!("circle grid needs at least 3 angles, got {count}")));
        }
        let coords = (0..count)
            .flat_map(|i| unit2(offset + TAU * i as f64 / count as f64))
            .collect();
        Ok(Self { dim: 2, kind: GridKind::UniformAngles, coords, offset })
    }

    pub fn fibonacci(count: usize) -> Result<Self> {
        if count < 4 {
            return Err(Error::InvalidInput(format!("sphere grid needs at least 4 points, got {count}")));
        }
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut coords = Vec::with_capacity(3 * count);
        for i in 0..count {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            coords.extend_from_slice(&[r * phi.cos(), r * phi.sin(), z]);
        }
        Ok(Self { dim: 3, kind: GridKind::Fibonacci, coords, offset: 0.0 })
    }

    pub fn seeded(dim: usize, count: usize) -> Result<Self> {
        if dim < 2 || count < 2 * dim {
            return Err(Error::InvalidInput(format!("{count} directions are too few in dimension {dim}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(GAUSS_SEED ^ dim as u64);
        let half = count.div_ceil(2);
        let mut coords = Vec::with_capacity(2 * half * dim);
        let mut u = vec![0.0; dim];
        for _ in 0..half {
            fill_unit_sphere(&mut rng, &mut u);
            coords.extend_from_slice(&u);
            coords.extend(u.iter().map(|x| -x));
        }
        Ok(Self { dim, kind: GridKind::SeededAntipodal, coords, offset: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Angular offset of a circle grid.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn points(&self) -> Vec<Point> {
        self.iter().map(super::point).collect()
    }

    /// Quadrature of `g` against the uniform probability measure.
    pub fn integrate(&self, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        self.iter().map(&mut g).sum::<f64>() * self.weight()
    }

    /// A grid of the same kind offset by half a step (circle) or of twice the size.
    pub fn refined(&self) -> Result<Self> {
        match self.kind {
            GridKind::UniformAngles => Self::circle(2 * self.len(), self.offset + PI / self.len() as f64),
            _ => Self::new(self.dim, 2 * self.len() + 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::norm;

    #[test]
    fn unit_norm_and_weights() {
        for (dim, count) in [(2, 64), (3, 500), (5, 200)] {
            let g = DirectionGrid::new(dim, count).unwrap();
            assert!(g.iter().all(|u| (norm(u) - 1.0).abs() < 1e-12));
            assert!((g.weight() * g.len() as f64 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_of_abs_cos() {
        let g = DirectionGrid::new(2, 4096).unwrap();
        let v = g.integrate(|u| u[0].abs());
        assert!((v - 2.0 / PI).abs() < 1e-6);
        let g3 = DirectionGrid::new(3, 4096).unwrap();
        let v3 = g3.integrate(|u| u[2].abs());
        assert!((v3 - 0.5).abs() < 1e-3);
    }

    #[test]
    fn seeded_grid_is_centered() {
        let g = DirectionGrid::new(4, 100).unwrap();
        for k in 0..4 {
            assert!(g.integrate(|u| u[k]).abs() < 1e-14);
        }
    }
}
