//! Exact planar intersections of disks as circular-arc polygons.
//!
//! Each boundary circle is clipped against every other disk; what survives
//! is a list of counter-clockwise arcs. Area follows from Green's theorem
//! (shoelace with circular segments), perimeter from the arc lengths.

use std::f64::consts::TAU;

use super::{angle_of, unit2};
use crate::error::{Error, Result};

const TANGENCY_TOL: f64 = 1e-12;

/// Counter-clockwise arc of the circle `(center, radius)` between two angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularArc {
    pub center: [f64; 2],
    pub radius: f64,
    /// Start angle in `[0, 2pi)`.
    pub start: f64,
    /// End angle, `start < end <= start + 2pi`.
    pub end: f64,
}

impl CircularArc {
    pub fn sweep(&self) -> f64 {
        self.end - self.start
    }

    pub fn point_at(&self, phi: f64) -> [f64; 2] {
        let [c, s] = unit2(phi);
        [self.center[0] + self.radius * c, self.center[1] + self.radius * s]
    }

    /// Whether the angle `phi` lies within the arc's angular range.
    pub fn spans(&self, phi: f64) -> bool {
        let mut rel = (phi - self.start) % TAU;
        if rel < 0.0 {
            rel += TAU;
        }
        rel <= self.sweep()
    }

    /// Contribution to `(1/2) ∮ x dy - y dx`.
    fn green(&self) -> f64 {
        let [cx, cy] = self.center;
        let r = self.radius;
        let (sa, ca) = self.start.sin_cos();
        let (sb, cb) = self.end.sin_cos();
        0.5 * (r * r * self.sweep() + r * cx * (sb - sa) - r * cy * (cb - ca))
    }

    fn support(&self, u: [f64; 2]) -> f64 {
        let base = self.center[0] * u[0] + self.center[1] * u[1];
        if self.spans(angle_of(&u)) {
            return base + self.radius;
        }
        let p = self.point_at(self.start);
        let q = self.point_at(self.end);
        (p[0] * u[0] + p[1] * u[1]).max(q[0] * u[0] + q[1] * u[1])
    }

    fn distance(&self, p: [f64; 2]) -> f64 {
        let v = [p[0] - self.center[0], p[1] - self.center[1]];
        let d = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if d > 0.0 && self.spans(angle_of(&v)) {
            return (d - self.radius).abs();
        }
        let a = self.point_at(self.start);
        let b = self.point_at(self.end);
        let da = ((p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2)).sqrt();
        let db = ((p[0] - b[0]).powi(2) + (p[1] - b[1]).powi(2)).sqrt();
        da.min(db)
    }
}

/// Boundary of a planar intersection of disks.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPolygon {
    disks: Vec<([f64; 2], f64)>,
    arcs: Vec<CircularArc>,
}

impl ArcPolygon {
    /// Clips every circle against all other disks.
    ///
    /// Tangent pairs (within 1e-12) are retried once with radii nudged by a
    /// relative 1e-10; a tangency that survives the nudge is an error.
    pub fn from_disks(disks: &[([f64; 2], f64)]) -> Result<Self> {
        match Self::clip(disks) {
            Err(Error::DegenerateTangency) => {
                let nudged: Vec<_> = disks
                    .iter()
                    .enumerate()
                    .map(|(i, &(c, r))| (c, r * (1.0 + 1e-10 * (1.0 + i as f64))))
                    .collect();
                Self::clip(&nudged)
            }
            other => other,
        }
    }

    fn clip(disks: &[([f64; 2], f64)]) -> Result<Self> {
        let mut arcs = Vec::new();
        let empty = || Ok(Self { disks: disks.to_vec(), arcs: Vec::new() });
        'circles: for (i, &(ci, ri)) in disks.iter().enumerate() {
            let mut intervals = vec![(0.0, TAU)];
            for (k, &(ck, rk)) in disks.iter().enumerate() {
                if k == i {
                    continue;
                }
                let dx = ck[0] - ci[0];
                let dy = ck[1] - ci[1];
                let d = (dx * dx + dy * dy).sqrt();
                let scale = TANGENCY_TOL * ri.max(rk).max(1.0);
                if d <= scale && (ri - rk).abs() <= scale {
                    // Coincident circles: keep only the first copy.
                    if k < i {
                        continue 'circles;
                    }
                    continue;
                }
                if (d - (ri + rk)).abs() <= scale || (d - (ri - rk).abs()).abs() <= scale {
                    return Err(Error::DegenerateTangency);
                }
                if d >= ri + rk {
                    return empty();
                }
                if d + ri <= rk {
                    continue;
                }
                if d + rk <= ri {
                    continue 'circles;
                }
                let cos_half = ((d * d + ri * ri - rk * rk) / (2.0 * d * ri)).clamp(-1.0, 1.0);
                let half = cos_half.acos();
                let mid = angle_of(&[dx, dy]);
                intervals = intersect(&intervals, &wrap_interval(mid - half, mid + half));
                if intervals.is_empty() {
                    continue 'circles;
                }
            }
            arcs.extend(
                intervals
                    .into_iter()
                    .filter(|(a, b)| b > a)
                    .map(|(start, end)| CircularArc { center: ci, radius: ri, start, end }),
            );
        }
        Ok(Self { disks: disks.to_vec(), arcs })
    }

    pub fn arcs(&self) -> &[CircularArc] {
        &self.arcs
    }

    /// No boundary arcs: the intersection is empty (or has no interior).
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.arcs.iter().map(CircularArc::green).sum::<f64>().max(0.0)
    }

    pub fn perimeter(&self) -> f64 {
        self.arcs.iter().map(|a| a.radius * a.sweep()).sum()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        !self.is_empty()
            && self
                .disks
                .iter()
                .all(|(c, r)| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) <= r * r)
    }

    /// Support function at the unit vector `u`.
    pub fn support(&self, u: [f64; 2]) -> Option<f64> {
        self.arcs.iter().map(|a| a.support(u)).reduce(f64::max)
    }

    /// Euclidean distance from `p`; zero inside.
    pub fn distance(&self, p: [f64; 2]) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        if self.contains(p) {
            return Some(0.0);
        }
        self.arcs.iter().map(|a| a.distance(p)).reduce(f64::min)
    }

    /// Largest `t >= 0` with `t * dir` inside; requires the origin inside.
    pub fn ray_exit(&self, dir: [f64; 2]) -> f64 {
        self.disks
            .iter()
            .map(|&(c, r)| {
                // |t dir - c|^2 = r^2, positive root.
                let a = dir[0] * dir[0] + dir[1] * dir[1];
                let b = -2.0 * (dir[0] * c[0] + dir[1] * c[1]);
                let cc = c[0] * c[0] + c[1] * c[1] - r * r;
                let disc = (b * b - 4.0 * a * cc).max(0.0);
                (-b + disc.sqrt()) / (2.0 * a)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn wrap_interval(a: f64, b: f64) -> Vec<(f64, f64)> {
    if b - a >= TAU {
        return vec![(0.0, TAU)];
    }
    let a0 = a.rem_euclid(TAU);
    let b0 = a0 + (b - a);
    if b0 <= TAU {
        vec![(a0, b0)]
    } else {
        vec![(0.0, b0 - TAU), (a0, TAU)]
    }
}

fn intersect(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in xs {
        for &(c, d) in ys {
            let lo = a.max(c);
            let hi = b.min(d);
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}
