//! Closed-form sampling densities, symmetric decreasing rearrangement,
//! Steiner symmetrals of planar grid densities and peakedness comparison.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{angle_of, dot, norm, unit2, BallPolyhedron, DirectionGrid, Point, StarBody};
use crate::intrinsic::{exact_disk_intersection_2d, omega};
use crate::rng::{fill_uniform_ball, fill_uniform_box, fill_unit_sphere, stream_rng, StreamRng};

const MASS_TOL: f64 = 1e-9;
/// Rejection samplers give up after this many draws without acceptance.
const STALL_DRAWS: usize = 1_000_000;

/// Piecewise-constant density on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct Step1d {
    breaks: Vec<f64>,
    heights: Vec<f64>,
}

impl Step1d {
    /// `heights[i]` on `(breaks[i], breaks[i + 1])`; must integrate to one.
    pub fn new(breaks: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if breaks.len() != heights.len() + 1 || heights.is_empty() {
            return Err(Error::InvalidInput("need one more breakpoint than heights".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("breakpoints must be strictly ascending".into()));
        }
        if heights.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::InvalidInput("heights must be finite and nonnegative".into()));
        }
        let s = Self { breaks, heights };
        let mass = s.pieces().map(|(a, b, h)| (b - a) * h).sum::<f64>();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!("step density has mass {mass}, expected 1")));
        }
        Ok(s)
    }

    /// Uniform density on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![1.0 / (b - a)])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.heights.iter().enumerate().map(|(i, h)| (self.breaks[i], self.breaks[i + 1], *h))
    }

    pub fn sup(&self) -> f64 {
        self.heights.iter().copied().fold(0.0, f64::max)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.pieces().find(|(a, b, _)| *a < t && t <= *b).map_or(0.0, |p| p.2)
    }

    /// `int_a^b f`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        self.pieces().map(|(lo, hi, h)| h * (hi.min(b) - lo.max(a)).max(0.0)).sum()
    }

    /// Length of `{f > s}`.
    pub fn level_length(&self, s: f64) -> f64 {
        self.pieces().filter(|p| p.2 > s).map(|(a, b, _)| b - a).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.breaks[0].abs().max(self.breaks[self.breaks.len() - 1].abs())
    }

    /// Symmetric decreasing rearrangement.
    pub fn rearranged(&self) -> Self {
        let mut pieces: Vec<(f64, f64)> = self.pieces().filter(|p| p.2 > 0.0).map(|(a, b, h)| (h, b - a)).collect();
        pieces.sort_by(|x, y| y.0.total_cmp(&x.0));
        // merge equal heights so the result has one piece per level
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (h, len) in pieces {
            match merged.last_mut() {
                Some(last) if last.0 == h => last.1 += len,
                _ => merged.push((h, len)),
            }
        }
        let mut cum = Vec::with_capacity(merged.len());
        let mut acc = 0.0;
        for (_, len) in &merged {
            acc += len;
            cum.push(acc / 2.0);
        }
        let mut breaks: Vec<f64> = cum.iter().rev().map(|c| -c).collect();
        breaks.extend(cum.iter().copied());
        // the innermost level spans (-cum[0], cum[0]) as a single piece
        let mut heights: Vec<f64> = merged.iter().rev().map(|p| p.0).collect();
        heights.extend(merged.iter().skip(1).map(|p| p.0));
        Self { breaks, heights }
    }

    /// Whether `f` is nondecreasing then nonincreasing.
    pub fn is_unimodal(&self) -> bool {
        let h = &self.heights;
        let peak = (0..h.len()).max_by(|&a, &b| h[a].total_cmp(&h[b])).unwrap_or(0);
        h[..=peak].windows(2).all(|w| w[0] <= w[1]) && h[peak..].windows(2).all(|w| w[0] >= w[1])
    }

    fn sample(&self, u: f64, v: f64) -> f64 {
        let mut acc = 0.0;
        let total: f64 = self.pieces().map(|(a, b, h)| (b - a) * h).sum();
        let target = u * total;
        for (a, b, h) in self.pieces() {
            let m = (b - a) * h;
            if m > 0.0 && target < acc + m {
                return a + v * (b - a);
            }
            acc += m;
        }
        let (a, b, _) = self.pieces().filter(|p| p.2 > 0.0).last().expect("positive mass");
        a + v * (b - a)
    }
}

/// Planar piecewise-constant density on a rotated rectangular grid.
///
/// Cell `(i, k)` covers `lo + [i h, (i + 1) h] x [k h, (k + 1) h]` in the frame
/// `e1 = (cos angle, sin angle)`, `e2 = (-sin angle, cos angle)`; values are
/// stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2d {
    pub angle: f64,
    pub lo: [f64; 2],
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl Grid2d {
    pub fn new(angle: f64, lo: [f64; 2], cell: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nx * ny || nx == 0 || ny == 0 || !(cell > 0.0) {
            return Err(Error::InvalidInput("grid shape does not match its values".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite and nonnegative".into()));
        }
        let g = Self { angle, lo, cell, nx, ny, values };
        if (g.mass() - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!("grid density has mass {}, expected 1", g.mass())));
        }
        Ok(g)
    }

    /// Indicator of a union of cells, normalized to mass one.
    pub fn from_mask(angle: f64, lo: [f64; 2], cell: f64, nx: usize, ny: usize, mask: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mut values = vec![0.0; nx * ny];
        for i in 0..nx {
            for k in 0..ny {
                if mask(i, k) {
                    values[i * ny + k] = 1.0;
                }
            }
        }
        let total: f64 = values.iter().sum::<f64>() * cell * cell;
        if total == 0.0 {
            return Err(Error::InvalidInput("empty mask".into()));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Self::new(angle, lo, cell, nx, ny, values)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell * self.cell
    }

    pub fn column_mass(&self, i: usize) -> f64 {
        self.values[i * self.ny..(i + 1) * self.ny].iter().sum::<f64>() * self.cell * self.cell
    }

    fn frame(&self) -> ([f64; 2], [f64; 2]) {
        let e1 = unit2(self.angle);
        (e1, [-e1[1], e1[0]])
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (e1, e2) = self.frame();
        let a = (dot(x, &e1) - self.lo[0]) / self.cell;
        let b = (dot(x, &e2) - self.lo[1]) / self.cell;
        if a < 0.0 || b < 0.0 || a >= self.nx as f64 || b >= self.ny as f64 {
            return 0.0;
        }
        self.values[a as usize * self.ny + b as usize]
    }

    fn max_abs(&self) -> f64 {
        let lo = self.lo;
        let hi = [lo[0] + self.nx as f64 * self.cell, lo[1] + self.ny as f64 * self.cell];
        lo[0].abs().max(hi[0].abs()).hypot(lo[1].abs().max(hi[1].abs()))
    }

    /// The same density with the roles of the axes exchanged, so that the
    /// old first axis becomes the new second axis.
    fn quarter_turned(&self) -> Self {
        let (nx, ny) = (self.ny, self.nx);
        let mut values = vec![0.0; nx * ny];
        for i in 0..self.nx {
            for k in 0..self.ny {
                values[(self.ny - 1 - k) * ny + i] = self.values[i * self.ny + k];
            }
        }
        Self {
            angle: self.angle - FRAC_PI_2,
            lo: [-self.lo[1] - self.ny as f64 * self.cell, self.lo[0]],
            cell: self.cell,
            nx,
            ny,
            values,
        }
    }

    /// Resamples onto a grid whose second axis is `angle + pi/2`, averaging
    /// `sub x sub` points per cell and restoring unit mass.
    fn resampled(&self, angle: f64, sub: usize) -> Self {
        let r = self.max_abs();
        let m = (2.0 * r / self.cell).ceil() as usize;
        let lo = [-(m as f64) * self.cell / 2.0; 2];
        let e1 = unit2(angle);
        let e2 = [-e1[1], e1[0]];
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let mut acc = 0.0;
                for si in 0..sub {
                    for sk in 0..sub {
                        let a = lo[0] + (i as f64 + (si as f64 + 0.5) / sub as f64) * self.cell;
                        let b = lo[1] + (k as f64 + (sk as f64 + 0.5) / sub as f64) * self.cell;
                        acc += self.value(&[a * e1[0] + b * e2[0], a * e1[1] + b * e2[1]]);
                    }
                }
                values[i * m + k] = acc / (sub * sub) as f64;
            }
        }
        let total: f64 = values.iter().sum::<f64>() * self.cell * self.cell;
        values.iter_mut().for_each(|v| *v /= total);
        Self { angle, lo, cell: self.cell, nx: m, ny: m, values }
    }
}

/// A bounded sampling region.
#[derive(Debug, Clone)]
pub enum Region {
    Ball { center: Point, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Planar ball-polyhedron.
    BallPolyhedron(BallPolyhedron),
    /// Star body inside the centered ball of radius `rmax`, with volume
    /// computed by polar quadrature.
    Star { body: StarBody, rmax: f64, volume: f64 },
}

impl Region {
    pub fn star(body: StarBody, rmax: f64, grid: &DirectionGrid) -> Result<Self> {
        let volume = body.volume(grid);
        if !(rmax > 0.0) {
            return Err(Error::InvalidInput("rmax must be positive".into()));
        }
        Ok(Self::Star { body, rmax, volume })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Box { lo, .. } => lo.len(),
            Self::BallPolyhedron(p) => p.dim(),
            Self::Star { body, .. } => body.dim(),
        }
    }

    pub fn volume(&self) -> Result<f64> {
        match self {
            Self::Ball { center, radius } => Ok(omega(center.len()) * radius.powi(center.len() as i32)),
            Self::Box { lo, hi } => Ok(lo.iter().zip(hi).map(|(l, h)| h - l).product()),
            Self::BallPolyhedron(p) => Ok(exact_disk_intersection_2d(p)?.0),
            Self::Star { volume, .. } => Ok(*volume),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Ball { center, radius } => crate::geom::dist2(center.as_slice(), x) <= radius * radius,
            Self::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v <= h),
            Self::BallPolyhedron(p) => p.contains(x, 0.0),
            Self::Star { body, .. } => body.contains(x),
        }
    }

    fn max_abs(&self) -> f64 {
        match self {
            Self::Ball { center, radius } => center.norm() + radius,
            Self::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| l.abs().max(h.abs()).powi(2)).sum::<f64>().sqrt(),
            Self::BallPolyhedron(p) => p.smallest_ball().center().norm() + p.smallest_ball().radius(),
            Self::Star { rmax, .. } => *rmax,
        }
    }
}

/// A probability density from one of the closed-form families.
#[derive(Debug, Clone)]
pub enum DensitySpec {
    Uniform(Region),
    /// `heights[k]` on the shell `radii[k-1] < |x| <= radii[k]` (with `radii[-1] = 0`).
    RadialStep { dim: usize, radii: Vec<f64>, heights: Vec<f64> },
    /// `prod_i f_i(x_i)`.
    Product(Vec<Step1d>),
    Step1d(Step1d),
    Grid2d(Grid2d),
}

impl DensitySpec {
    pub fn uniform(region: Region) -> Result<Self> {
        let v = region.volume()?;
        if !(v > 0.0) {
            return Err(Error::InvalidInput("uniform density on a null set".into()));
        }
        Ok(Self::Uniform(region))
    }

    pub fn radial_step(dim: usize, radii: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if radii.len() != heights.len() || radii.is_empty() {
            return Err(Error::InvalidInput("radii and heights differ in length".into()));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("radii must be positive and ascending".into()));
        }
        if heights.iter().any(|h| !(*h >= 0.0)) {
            return Err(Error::InvalidInput("heights must be nonnegative".into()));
        }
        let s = Self::RadialStep { dim, radii, heights };
        let mass = s.shells().iter().map(|(_, _, h, v)| h * v).sum::<f64>();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!("radial density has mass {mass}, expected 1")));
        }
        Ok(s)
    }

    /// Uniform density on the centered ball of unit volume.
    pub fn unit_ball(n: usize) -> Self {
        Self::ball_extremizer(n, 1.0)
    }

    /// `a * 1_{bB}` with `b = (a omega_n)^(-1/n)`.
    pub fn ball_extremizer(n: usize, a: f64) -> Self {
        let b = (a * omega(n)).powf(-1.0 / n as f64);
        Self::Uniform(Region::Ball { center: Point::zeros(n), radius: b })
    }

    /// Uniform density on `[-1/2, 1/2]^n`.
    pub fn unit_cube(n: usize) -> Self {
        Self::cube_extremizer(&vec![1.0; n])
    }

    /// `prod_j a_j 1_{[-1/(2 a_j), 1/(2 a_j)]}`.
    pub fn cube_extremizer(a: &[f64]) -> Self {
        Self::Product(a.iter().map(|aj| Step1d { breaks: vec![-0.5 / aj, 0.5 / aj], heights: vec![*aj] }).collect())
    }

    /// Uniform density on the centered square of unit area.
    pub fn unit_square() -> Self {
        Self::Uniform(Region::Box { lo: vec![-0.5; 2], hi: vec![0.5; 2] })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Uniform(_) => "uniform",
            Self::RadialStep { .. } => "radial-step",
            Self::Product(_) => "product",
            Self::Step1d(_) => "step-1d",
            Self::Grid2d(_) => "grid-2d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Uniform(r) => r.dim(),
            Self::RadialStep { dim, .. } => *dim,
            Self::Product(f) => f.len(),
            Self::Step1d(_) => 1,
            Self::Grid2d(_) => 2,
        }
    }

    /// `(r_in, r_out, height, shell volume)` per shell.
    fn shells(&self) -> Vec<(f64, f64, f64, f64)> {
        match self {
            Self::RadialStep { dim, radii, heights } => {
                let w = omega(*dim);
                let mut prev = 0.0;
                radii
                    .iter()
                    .zip(heights)
                    .map(|(r, h)| {
                        let s = (prev, *r, *h, w * (r.powi(*dim as i32) - f64::powi(prev, *dim as i32)));
                        prev = *r;
                        s
                    })
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// `||f||_inf`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::Uniform(r) => 1.0 / r.volume().unwrap_or(f64::NAN),
            Self::RadialStep { heights, .. } => heights.iter().copied().fold(0.0, f64::max),
            Self::Product(f) => f.iter().map(Step1d::sup).product(),
            Self::Step1d(s) => s.sup(),
            Self::Grid2d(g) => g.values.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Total mass from the closed form of each family.
    pub fn mass(&self) -> Result<f64> {
        Ok(match self {
            Self::Uniform(_) => 1.0,
            Self::RadialStep { .. } => self.shells().iter().map(|s| s.2 * s.3).sum(),
            Self::Product(f) => f.iter().map(|s| s.mass_in(f64::NEG_INFINITY, f64::INFINITY)).product(),
            Self::Step1d(s) => s.mass_in(f64::NEG_INFINITY, f64::INFINITY),
            Self::Grid2d(g) => g.mass(),
        })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Uniform(r) => {
                if r.contains(x) {
                    self.sup_bound()
                } else {
                    0.0
                }
            }
            Self::RadialStep { radii, heights, .. } => {
                let r = norm(x);
                radii.iter().position(|ri| r <= *ri).map_or(0.0, |k| heights[k])
            }
            Self::Product(f) => f.iter().zip(x).map(|(s, t)| s.value(*t)).product(),
            Self::Step1d(s) => s.value(x[0]),
            Self::Grid2d(g) => g.value(x),
        }
    }

    /// Radius of a centered ball containing the support.
    pub fn support_radius(&self) -> f64 {
        match self {
            Self::Uniform(r) => r.max_abs(),
            Self::RadialStep { radii, .. } => radii[radii.len() - 1],
            Self::Product(f) => f.iter().map(|s| s.max_abs().powi(2)).sum::<f64>().sqrt(),
            Self::Step1d(s) => s.max_abs(),
            Self::Grid2d(g) => g.max_abs(),
        }
    }

    /// `|{f > s}|`.
    pub fn level_set_volume(&self, s: f64) -> Result<f64> {
        Ok(match self {
            Self::Uniform(r) => {
                let v = r.volume()?;
                if s < 1.0 / v {
                    v
                } else {
                    0.0
                }
            }
            Self::RadialStep { .. } => self.shells().iter().filter(|sh| sh.2 > s).map(|sh| sh.3).sum(),
            Self::Product(f) => product_level_volume(f, s),
            Self::Step1d(st) => st.level_length(s),
            Self::Grid2d(g) => g.values.iter().filter(|v| **v > s).count() as f64 * g.cell * g.cell,
        })
    }

    /// Prepares a sampler.
    pub fn sampler(&self) -> Result<Sampler<'_>> {
        let mut cum = Vec::new();
        match self {
            Self::RadialStep { .. } => {
                let mut acc = 0.0;
                for sh in self.shells() {
                    acc += sh.2 * sh.3;
                    cum.push(acc);
                }
            }
            Self::Grid2d(g) => {
                let mut acc = 0.0;
                for v in &g.values {
                    acc += v;
                    cum.push(acc);
                }
            }
            Self::Uniform(Region::BallPolyhedron(p)) if p.certainly_empty() => {
                return Err(Error::RejectionStall { rate: 0.0 });
            }
            _ => {}
        }
        Ok(Sampler { spec: self, cum })
    }

    /// Draws `count` points from the stream `(seed, index)` into a flat buffer.
    pub fn sample_many(&self, count: usize, seed: u64, index: u64) -> Result<Vec<f64>> {
        let sampler = self.sampler()?;
        let mut rng = stream_rng(seed, index);
        let n = self.dim();
        let mut out = vec![0.0; count * n];
        for chunk in out.chunks_exact_mut(n) {
            sampler.sample_into(&mut rng, chunk)?;
        }
        Ok(out)
    }
}

fn product_level_volume(f: &[Step1d], s: f64) -> f64 {
    // enumerate every product cell; fine for the small families used here
    fn rec(f: &[Step1d], height: f64, vol: f64, s: f64) -> f64 {
        match f.split_first() {
            None => {
                if height > s {
                    vol
                } else {
                    0.0
                }
            }
            Some((first, rest)) => first
                .pieces()
                .filter(|p| p.2 > 0.0)
                .map(|(a, b, h)| rec(rest, height * h, vol * (b - a), s))
                .sum(),
        }
    }
    rec(f, 1.0, 1.0, s)
}

/// Exact sampler for a [`DensitySpec`].
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    spec: &'a DensitySpec,
    cum: Vec<f64>,
}

impl Sampler<'_> {
    pub fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        match self.spec {
            DensitySpec::Uniform(region) => sample_region(region, rng, out),
            DensitySpec::RadialStep { dim, .. } => {
                let shells = self.spec.shells();
                let k = pick(&self.cum, rng.random::<f64>());
                let (r0, r1, _, _) = shells[k];
                let n = *dim as i32;
                let u: f64 = rng.random();
                let r = (r0.powi(n) + u * (r1.powi(n) - r0.powi(n))).powf(1.0 / n as f64);
                fill_unit_sphere(rng, out);
                out.iter_mut().for_each(|v| *v *= r);
                Ok(())
            }
            DensitySpec::Product(f) => {
                for (o, s) in out.iter_mut().zip(f) {
                    let (u, v): (f64, f64) = (rng.random(), rng.random());
                    *o = s.sample(u, v);
                }
                Ok(())
            }
            DensitySpec::Step1d(s) => {
                let (u, v): (f64, f64) = (rng.random(), rng.random());
                out[0] = s.sample(u, v);
                Ok(())
            }
            DensitySpec::Grid2d(g) => {
                let idx = pick(&self.cum, rng.random::<f64>());
                let (i, k) = (idx / g.ny, idx % g.ny);
                let a = g.lo[0] + (i as f64 + rng.random::<f64>()) * g.cell;
                let b = g.lo[1] + (k as f64 + rng.random::<f64>()) * g.cell;
                let e1 = unit2(g.angle);
                out[0] = a * e1[0] - b * e1[1];
                out[1] = a * e1[1] + b * e1[0];
                Ok(())
            }
        }
    }
}

fn pick(cum: &[f64], u: f64) -> usize {
    let target = u * cum[cum.len() - 1];
    cum.partition_point(|c| *c <= target).min(cum.len() - 1)
}

fn sample_region(region: &Region, rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
    match region {
        Region::Ball { center, radius } => {
            fill_uniform_ball(rng, center.as_slice(), *radius, out);
            Ok(())
        }
        Region::Box { lo, hi } => {
            fill_uniform_box(rng, lo, hi, out);
            Ok(())
        }
        Region::BallPolyhedron(p) => {
            let host = p.smallest_ball();
            reject(out, |x| {
                fill_uniform_ball(rng, host.center().as_slice(), host.radius(), x);
                p.contains(x, 0.0)
            })
        }
        Region::Star { body, rmax, .. } => {
            let zero = vec![0.0; out.len()];
            reject(out, |x| {
                fill_uniform_ball(rng, &zero, *rmax, x);
                body.contains(x)
            })
        }
    }
}

fn reject(out: &mut [f64], mut draw: impl FnMut(&mut [f64]) -> bool) -> Result<()> {
    for _ in 0..STALL_DRAWS {
        if draw(out) {
            return Ok(());
        }
    }
    Err(Error::RejectionStall { rate: 1.0 / STALL_DRAWS as f64 })
}

/// Symmetric decreasing rearrangement in closed form.
pub fn rearrange(f: &DensitySpec) -> Result<DensitySpec> {
    match f {
        DensitySpec::Uniform(region) => {
            let n = region.dim();
            let v = region.volume()?;
            if n == 1 {
                return Ok(DensitySpec::Step1d(Step1d::uniform(-v / 2.0, v / 2.0)?));
            }
            Ok(DensitySpec::Uniform(Region::Ball { center: Point::zeros(n), radius: (v / omega(n)).powf(1.0 / n as f64) }))
        }
        DensitySpec::RadialStep { dim, .. } => {
            let mut shells: Vec<(f64, f64)> = f.shells().iter().filter(|s| s.2 > 0.0).map(|s| (s.2, s.3)).collect();
            shells.sort_by(|a, b| b.0.total_cmp(&a.0));
            radial_from_levels(*dim, &shells)
        }
        DensitySpec::Product(fs) => {
            // f is constant on the boxes formed by one piece per coordinate
            let mut levels: Vec<(f64, f64)> = vec![(1.0, 1.0)];
            for g in fs {
                let pieces: Vec<(f64, f64)> = g.pieces().filter(|p| p.2 > 0.0).map(|(a, b, h)| (h, b - a)).collect();
                if levels.len() * pieces.len() > MAX_PRODUCT_LEVELS {
                    return Err(Error::InvalidInput(format!("product density has more than {MAX_PRODUCT_LEVELS} constant pieces")));
                }
                levels = levels.iter().flat_map(|(v, vol)| pieces.iter().map(move |(h, len)| (v * h, vol * len))).collect();
            }
            levels.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (v, vol) in levels {
                match merged.last_mut() {
                    Some(last) if last.0 == v => last.1 += vol,
                    _ => merged.push((v, vol)),
                }
            }
            radial_from_levels(fs.len(), &merged)
        }
        DensitySpec::Step1d(s) => Ok(DensitySpec::Step1d(s.rearranged())),
        DensitySpec::Grid2d(g) => {
            let mut vals: Vec<f64> = g.values.iter().copied().filter(|v| *v > 0.0).collect();
            vals.sort_by(|a, b| b.total_cmp(a));
            let cell_area = g.cell * g.cell;
            let mut levels: Vec<(f64, f64)> = Vec::new();
            for v in vals {
                match levels.last_mut() {
                    Some(last) if last.0 == v => last.1 += cell_area,
                    _ => levels.push((v, cell_area)),
                }
            }
            radial_from_levels(2, &levels)
        }
    }
}

const MAX_PRODUCT_LEVELS: usize = 1 << 20;

/// Radial step density from `(height, volume)` levels in decreasing height.
fn radial_from_levels(dim: usize, levels: &[(f64, f64)]) -> Result<DensitySpec> {
    let w = omega(dim);
    let mut acc = 0.0;
    let mut radii = Vec::with_capacity(levels.len());
    for (_, v) in levels {
        acc += v;
        radii.push((acc / w).powf(1.0 / dim as f64));
    }
    DensitySpec::radial_step(dim, radii, levels.iter().map(|l| l.0).collect())
}

/// Whether `f` is radial and nonincreasing in `|x|`.
pub fn is_radially_decreasing(f: &DensitySpec) -> bool {
    match f {
        DensitySpec::Uniform(Region::Ball { center, .. }) => center.norm() == 0.0,
        DensitySpec::RadialStep { heights, .. } => heights.windows(2).all(|w| w[0] >= w[1]),
        DensitySpec::Step1d(s) => {
            s.is_unimodal() && {
                // symmetric about the origin
                let b = s.breaks();
                b.iter().zip(b.iter().rev()).all(|(x, y)| (x + y).abs() < 1e-12)
            }
        }
        _ => false,
    }
}

/// Rearranges a planar grid density along every line parallel to `theta`.
///
/// The result is symmetric about `theta^perp` and nonincreasing away from it
/// on each line. Cells are sorted per line and placed outward from the
/// center in pairs, each pair taking the mean of its two values, so the mass
/// of every line is kept exactly. When `theta` is not a grid axis the
/// density is first resampled on a grid aligned with `theta`.
pub fn steiner_symmetral_density(f: &DensitySpec, theta: &[f64]) -> Result<DensitySpec> {
    let g = match f {
        DensitySpec::Grid2d(g) => g,
        other if other.dim() >= 3 => return Err(Error::UnsupportedDimension { dim: other.dim() }),
        other => return Err(Error::UnsupportedTag(other.tag())),
    };
    if theta.len() != 2 {
        return Err(Error::UnsupportedDimension { dim: theta.len() });
    }
    let psi = angle_of(theta);
    let off_axis = |a: f64| {
        let r = (psi - a).rem_euclid(PI);
        r.min(PI - r)
    };
    let aligned = if off_axis(g.angle + FRAC_PI_2) < 1e-12 {
        g.clone()
    } else if off_axis(g.angle) < 1e-12 {
        g.quarter_turned()
    } else {
        g.resampled(psi - FRAC_PI_2, 4)
    };
    let ny = aligned.ny;
    let mut values = vec![0.0; aligned.values.len()];
    for i in 0..aligned.nx {
        let mut col: Vec<f64> = aligned.values[i * ny..(i + 1) * ny].to_vec();
        col.sort_by(|a, b| b.total_cmp(a));
        let out = &mut values[i * ny..(i + 1) * ny];
        let mut next = 0;
        if ny % 2 == 1 {
            out[ny / 2] = col[0];
            next = 1;
        }
        let mut lo = (ny / 2) as isize - 1;
        let mut hi = ny.div_ceil(2);
        while next < ny {
            let mean = 0.5 * (col[next] + col[next + 1]);
            out[lo as usize] = mean;
            out[hi] = mean;
            next += 2;
            lo -= 1;
            hi += 1;
        }
    }
    Ok(DensitySpec::Grid2d(Grid2d {
        angle: aligned.angle,
        lo: [aligned.lo[0], -(ny as f64) * aligned.cell / 2.0],
        cell: aligned.cell,
        nx: aligned.nx,
        ny,
        values,
    }))
}

/// `int |f - g|` by the midpoint rule on a square mesh of `m x m` cells.
pub fn l1_distance_2d(f: &DensitySpec, g: &DensitySpec, m: usize) -> f64 {
    let r = f.support_radius().max(g.support_radius());
    let h = 2.0 * r / m as f64;
    (0..m)
        .into_par_iter()
        .map(|i| {
            let x = -r + (i as f64 + 0.5) * h;
            (0..m)
                .map(|k| {
                    let y = -r + (k as f64 + 0.5) * h;
                    (f.value(&[x, y]) - g.value(&[x, y])).abs()
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        * h
        * h
}

/// An origin-symmetric convex test set.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Ball { radius: f64 },
    /// `[-a_1, a_1] x ... x [-a_n, a_n]`.
    Box { half: Vec<f64> },
    /// `{x : |<u_i, x>| <= c_i}` for unit `u_i`.
    Slabs { normals: Vec<Point>, widths: Vec<f64> },
}

impl Witness {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Ball { radius } => norm(x) <= *radius,
            Self::Box { half } => x.iter().zip(half).all(|(v, a)| v.abs() <= *a),
            Self::Slabs { normals, widths } => {
                normals.iter().zip(widths).all(|(u, c)| dot(u.as_slice(), x).abs() <= *c)
            }
        }
    }
}

/// `int_K f` in closed form when the pair allows it.
pub fn exact_mass_in(f: &DensitySpec, k: &Witness) -> Option<f64> {
    match (f, k) {
        (DensitySpec::Step1d(s), Witness::Box { half }) => Some(s.mass_in(-half[0], half[0])),
        (DensitySpec::Step1d(s), Witness::Ball { radius }) => Some(s.mass_in(-radius, *radius)),
        (DensitySpec::Product(fs), Witness::Box { half }) => {
            Some(fs.iter().zip(half).map(|(s, a)| s.mass_in(-a, *a)).product())
        }
        (DensitySpec::Uniform(Region::Box { lo, hi }), Witness::Box { half }) => {
            let vol: f64 = lo.iter().zip(hi).map(|(l, h)| h - l).product();
            let inter: f64 = lo.iter().zip(hi).zip(half).map(|((l, h), a)| (h.min(*a) - l.max(-a)).max(0.0)).product();
            Some(inter / vol)
        }
        (DensitySpec::Uniform(Region::Ball { center, radius }), Witness::Ball { radius: t }) if center.norm() == 0.0 => {
            Some((t.min(*radius) / radius).powi(center.len() as i32))
        }
        (DensitySpec::RadialStep { .. }, Witness::Ball { radius: t }) => {
            let n = f.dim() as i32;
            Some(
                f.shells()
                    .iter()
                    .map(|(r0, r1, h, _)| {
                        let hi = r1.min(*t);
                        if hi <= *r0 {
                            0.0
                        } else {
                            h * omega(n as usize) * (hi.powi(n) - r0.powi(n))
                        }
                    })
                    .sum(),
            )
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// Outcome of a peakedness comparison.
#[derive(Debug, Clone)]
pub struct PeakednessReport {
    pub verdict: Verdict,
    /// Largest `int_K f - int_K g` in units of its standard error (exact pairs use `+-inf`).
    pub worst_z: f64,
    /// Largest raw difference `int_K f - int_K g`.
    pub worst_diff: f64,
    pub witness: Option<Witness>,
    pub witnesses_tested: usize,
}

/// Options for [`is_less_peaked_with`].
#[derive(Debug, Clone, Copy)]
pub struct PeakednessOptions {
    pub samples: usize,
    pub scales: usize,
}

impl Default for PeakednessOptions {
    fn default() -> Self {
        Self { samples: 40_000, scales: 20 }
    }
}

/// Tests `int_K f <= int_K g` over centered balls and boxes at several
/// scales and `trials` random symmetric boxes and slab polytopes.
pub fn is_less_peaked(f: &DensitySpec, g: &DensitySpec, trials: usize, seed: u64) -> Result<PeakednessReport> {
    is_less_peaked_with(f, g, trials, seed, PeakednessOptions::default())
}

pub fn is_less_peaked_with(
    f: &DensitySpec,
    g: &DensitySpec,
    trials: usize,
    seed: u64,
    opts: PeakednessOptions,
) -> Result<PeakednessReport> {
    let n = f.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
    }
    let reach = f.support_radius().max(g.support_radius());
    let mut witnesses = Vec::new();
    for s in 1..=opts.scales {
        let t = reach * s as f64 / opts.scales as f64;
        witnesses.push(Witness::Ball { radius: t });
        witnesses.push(Witness::Box { half: vec![t; n] });
    }
    let mut rng = stream_rng(seed, u64::MAX);
    let mut u = vec![0.0; n];
    for _ in 0..trials {
        witnesses.push(Witness::Box { half: (0..n).map(|_| reach * rng.random::<f64>()).collect() });
        let count = n + rng.random_range(0..=n);
        let mut normals = Vec::with_capacity(count);
        let mut widths = Vec::with_capacity(count);
        for _ in 0..count {
            fill_unit_sphere(&mut rng, &mut u);
            normals.push(Point::from_column_slice(&u));
            widths.push(reach * rng.random::<f64>());
        }
        witnesses.push(Witness::Slabs { normals, widths });
    }

    let needs_cloud = |d: &DensitySpec| witnesses.iter().any(|w| exact_mass_in(d, w).is_none());
    let cloud_f = if needs_cloud(f) { Some(f.sample_many(opts.samples, seed, 0)?) } else { None };
    let cloud_g = if needs_cloud(g) { Some(g.sample_many(opts.samples, seed, 1)?) } else { None };
    let mass = |d: &DensitySpec, cloud: &Option<Vec<f64>>, w: &Witness| -> (f64, f64) {
        if let Some(m) = exact_mass_in(d, w) {
            return (m, 0.0);
        }
        let pts = cloud.as_ref().expect("cloud drawn when needed");
        let hits = pts.chunks_exact(n).filter(|x| w.contains(x)).count();
        let p = hits as f64 / opts.samples as f64;
        (p, (p * (1.0 - p) / opts.samples as f64).sqrt().max(1.0 / opts.samples as f64))
    };

    let mut report = PeakednessReport {
        verdict: Verdict::Holds,
        worst_z: f64::NEG_INFINITY,
        worst_diff: f64::NEG_INFINITY,
        witness: None,
        witnesses_tested: witnesses.len(),
    };
    for w in &witnesses {
        let (a, sa) = mass(f, &cloud_f, w);
        let (b, sb) = mass(g, &cloud_g, w);
        let diff = a - b;
        let se = (sa * sa + sb * sb).sqrt();
        let z = if se > 0.0 {
            diff / se
        } else if diff > 1e-12 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        report.worst_diff = report.worst_diff.max(diff);
        if z > report.worst_z {
            report.worst_z = z;
            report.witness = Some(w.clone());
        }
    }
    report.verdict = if report.worst_z > 4.0 {
        Verdict::Violated
    } else if report.worst_z > 3.0 {
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    };
    Ok(report)
}
