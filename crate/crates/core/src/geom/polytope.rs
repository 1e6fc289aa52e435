//! Bounded intersections of halfspaces in the plane and in space.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};

use super::{angle_of, dot, point, Halfspace, Point};
use crate::error::{Error, Result};

/// Whether the origin lies in the interior of the convex hull of `dirs`,
/// i.e. the directions are not contained in any closed hemisphere.
///
/// A nonzero `u` with `<dir_i, u> >= 0` for all `i` exists exactly when the
/// cone `{u : <dir_i, u> >= 0}` has an extreme ray, and every extreme ray is
/// orthogonal to `n - 1` independent directions; those candidates are
/// enumerated. The plane uses the equivalent largest-angular-gap test.
pub fn directions_surround_origin(dirs: &[Point]) -> bool {
    let Some(first) = dirs.first() else { return false };
    let n = first.len();
    if dirs.len() <= n {
        return false;
    }
    const EPS: f64 = 1e-12;
    match n {
        1 => dirs.iter().any(|d| d[0] > EPS) && dirs.iter().any(|d| d[0] < -EPS),
        2 => {
            let mut angles: Vec<f64> = dirs.iter().map(|d| angle_of(d.as_slice())).collect();
            angles.sort_by(f64::total_cmp);
            let mut gap = angles[0] + TAU - angles[angles.len() - 1];
            for w in angles.windows(2) {
                gap = gap.max(w[1] - w[0]);
            }
            gap < PI - EPS
        }
        3 => {
            let vs: Vec<Vector3<f64>> = dirs.iter().map(|d| Vector3::new(d[0], d[1], d[2])).collect();
            let spans = vs.iter().enumerate().any(|(i, a)| {
                vs[i + 1..].iter().enumerate().any(|(j, b)| {
                    vs[i + j + 2..].iter().any(|c| a.cross(b).dot(c).abs() > EPS)
                })
            });
            if !spans {
                return false;
            }
            for (i, a) in vs.iter().enumerate() {
                for b in &vs[i + 1..] {
                    let u = a.cross(b);
                    if u.norm() < EPS {
                        continue;
                    }
                    for cand in [u, -u] {
                        if vs.iter().all(|v| v.dot(&cand) >= -EPS * cand.norm()) {
                            return false;
                        }
                    }
                }
            }
            true
        }
        _ => general_surround(dirs, n),
    }
}

fn general_surround(dirs: &[Point], n: usize) -> bool {
    let m = nalgebra::DMatrix::from_columns(dirs);
    if m.clone().svd(false, false).singular_values.iter().filter(|s| **s > 1e-10).count() < n {
        return false;
    }
    let mut idx: Vec<usize> = (0..n - 1).collect();
    loop {
        // padded with a zero row so that the SVD exposes the null direction
        let sub = nalgebra::DMatrix::from_fn(n, n, |r, c| if r < n - 1 { dirs[idx[r]][c] } else { 0.0 });
        let svd = sub.svd(false, true);
        if let Some(vt) = svd.v_t {
            let sv = &svd.singular_values;
            let null = sv.argmin().0;
            if sv.iter().enumerate().all(|(i, s)| i == null || *s > 1e-10) {
                let u: Vec<f64> = vt.row(null).iter().copied().collect();
                for sign in [1.0, -1.0] {
                    if dirs.iter().all(|d| sign * dot(d.as_slice(), &u) >= -1e-12) {
                        return false;
                    }
                }
            }
        }
        // next combination
        let mut k = n - 1;
        loop {
            if k == 0 {
                return true;
            }
            k -= 1;
            if idx[k] < dirs.len() - (n - 1 - k) {
                idx[k] += 1;
                for t in k + 1..n - 1 {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
        if idx[n - 2] >= dirs.len() {
            return true;
        }
    }
}

/// Convex hull of planar points, counter-clockwise, without collinear points.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

pub(crate) fn polygon_area_perimeter(poly: &[[f64; 2]]) -> (f64, f64) {
    let m = poly.len();
    if m < 3 {
        let per = if m == 2 {
            2.0 * ((poly[1][0] - poly[0][0]).hypot(poly[1][1] - poly[0][1]))
        } else {
            0.0
        };
        return (0.0, per);
    }
    let mut area = 0.0;
    let mut per = 0.0;
    for i in 0..m {
        let a = poly[i];
        let b = poly[(i + 1) % m];
        area += a[0] * b[1] - a[1] * b[0];
        per += (b[0] - a[0]).hypot(b[1] - a[1]);
    }
    (0.5 * area.abs(), per)
}

/// Clips a counter-clockwise convex polygon by `<normal, x> <= offset`.
pub(crate) fn clip_polygon(poly: &[[f64; 2]], normal: [f64; 2], offset: f64) -> Vec<[f64; 2]> {
    let eval = |p: [f64; 2]| normal[0] * p[0] + normal[1] * p[1] - offset;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (fa, fb) = (eval(a), eval(b));
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Intersection of halfspaces `{x : <normal_i, x> <= offset_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspacePolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl HalfspacePolytope {
    /// Normals are normalized; offsets are taken relative to unit normals.
    pub fn new(normals: Vec<Point>, offsets: Vec<f64>) -> Result<Self> {
        let Some(first) = normals.first() else {
            return Err(Error::InvalidInput("no halfspaces".into()));
        };
        let dim = first.len();
        if normals.len() != offsets.len() {
            return Err(Error::InvalidInput("normals and offsets differ in length".into()));
        }
        let halfspaces = normals
            .into_iter()
            .zip(offsets)
            .map(|(n, b)| {
                if n.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: n.len() });
                }
                let len = n.norm();
                if len == 0.0 {
                    return Err(Error::ZeroVector);
                }
                Ok(Halfspace { normal: n / len, offset: b / len })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, halfspaces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn normals(&self) -> impl Iterator<Item = &Point> {
        self.halfspaces.iter().map(|h| &h.normal)
    }

    pub fn is_bounded(&self) -> bool {
        let dirs: Vec<Point> = self.normals().cloned().collect();
        directions_surround_origin(&dirs)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| dot(h.normal.as_slice(), x) <= h.offset + tol)
    }

    /// Counter-clockwise vertex list of a bounded planar polytope.
    pub fn polygon(&self) -> Result<Vec<[f64; 2]>> {
        if self.dim != 2 {
            return Err(Error::UnsupportedDimension { dim: self.dim });
        }
        if !self.is_bounded() {
            return Err(Error::UnboundedConfiguration);
        }
        // Every point satisfies |x| <= max|b| / cos(gap/2); clip a box that size.
        let mut angles: Vec<f64> = self.normals().map(|n| angle_of(n.as_slice())).collect();
        angles.sort_by(f64::total_cmp);
        let mut gap = angles[0] + TAU - angles[angles.len() - 1];
        for w in angles.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        let bmax = self.halfspaces.iter().map(|h| h.offset.abs()).fold(0.0, f64::max);
        let s = 2.0 * bmax / (gap / 2.0).cos() + 1.0;
        let mut poly = vec![[-s, -s], [s, -s], [s, s], [-s, s]];
        for h in &self.halfspaces {
            poly = clip_polygon(&poly, [h.normal[0], h.normal[1]], h.offset);
            if poly.is_empty() {
                break;
            }
        }
        Ok(poly)
    }

    /// Vertices of a bounded polytope in dimension 2 or 3.
    pub fn vertices(&self) -> Result<Vec<Point>> {
        match self.dim {
            2 => Ok(self.polygon()?.iter().map(|p| point(p)).collect()),
            3 => Ok(self.facets_3d()?.0.into_iter().map(|v| point(v.as_slice())).collect()),
            dim => Err(Error::UnsupportedDimension { dim }),
        }
    }

    fn facets_3d(&self) -> Result<(Vec<Vector3<f64>>, Vec<Vec<usize>>)> {
        if !self.is_bounded() {
            return Err(Error::UnboundedConfiguration);
        }
        let hs = &self.halfspaces;
        let scale = hs.iter().map(|h| h.offset.abs()).fold(1e-300, f64::max);
        let tol = 1e-9 * scale.max(1.0);
        let mut verts: Vec<Vector3<f64>> = Vec::new();
        for i in 0..hs.len() {
            for j in i + 1..hs.len() {
                for k in j + 1..hs.len() {
                    let m = Matrix3::from_rows(&[
                        hs[i].normal.fixed_rows::<3>(0).transpose(),
                        hs[j].normal.fixed_rows::<3>(0).transpose(),
                        hs[k].normal.fixed_rows::<3>(0).transpose(),
                    ]);
                    if m.determinant().abs() < 1e-12 {
                        continue;
                    }
                    let Some(inv) = m.try_inverse() else { continue };
                    let v = inv * Vector3::new(hs[i].offset, hs[j].offset, hs[k].offset);
                    if hs.iter().all(|h| h.normal.fixed_rows::<3>(0).dot(&v) <= h.offset + tol)
                        && !verts.iter().any(|w| (w - v).norm() <= tol)
                    {
                        verts.push(v);
                    }
                }
            }
        }
        let incidence = hs
            .iter()
            .map(|h| {
                let n = h.normal.fixed_rows::<3>(0);
                (0..verts.len()).filter(|&v| (n.dot(&verts[v]) - h.offset).abs() <= tol).collect()
            })
            .collect();
        Ok((verts, incidence))
    }

    /// Intrinsic volumes `V_0..V_n` (dimension 2 or 3, bounded).
    pub fn intrinsic_volumes(&self) -> Result<Vec<f64>> {
        match self.dim {
            2 => {
                let (area, per) = polygon_area_perimeter(&self.polygon()?);
                Ok(vec![1.0, per / 2.0, area])
            }
            3 => {
                let (verts, incidence) = self.facets_3d()?;
                let mut volume = 0.0;
                let mut surface = 0.0;
                for (h, ids) in self.halfspaces.iter().zip(&incidence) {
                    if ids.len() < 3 {
                        continue;
                    }
                    let n = h.normal.fixed_rows::<3>(0).into_owned();
                    let area = facet_area(&verts, ids, &n);
                    surface += area;
                    volume += h.offset * area / 3.0;
                }
                let mut mean_curv = 0.0;
                for a in 0..incidence.len() {
                    for b in a + 1..incidence.len() {
                        let shared: Vec<usize> =
                            incidence[a].iter().filter(|v| incidence[b].contains(v)).copied().collect();
                        if shared.len() < 2 {
                            continue;
                        }
                        let mut len: f64 = 0.0;
                        for (s, &p) in shared.iter().enumerate() {
                            for &q in &shared[s + 1..] {
                                len = len.max((verts[p] - verts[q]).norm());
                            }
                        }
                        let c = dot(self.halfspaces[a].normal.as_slice(), self.halfspaces[b].normal.as_slice());
                        mean_curv += len * c.clamp(-1.0, 1.0).acos();
                    }
                }
                Ok(vec![1.0, mean_curv / TAU, surface / 2.0, volume])
            }
            dim => Err(Error::UnsupportedDimension { dim }),
        }
    }

    /// Support function at `u` from the vertices.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        Ok(self
            .vertices()?
            .iter()
            .map(|v| dot(v.as_slice(), u))
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

fn facet_area(verts: &[Vector3<f64>], ids: &[usize], normal: &Vector3<f64>) -> f64 {
    let centroid = ids.iter().map(|&i| verts[i]).sum::<Vector3<f64>>() / ids.len() as f64;
    let e1 = (verts[ids[0]] - centroid).normalize();
    let e2 = normal.cross(&e1);
    let mut ring: Vec<(f64, Vector3<f64>)> = ids
        .iter()
        .map(|&i| {
            let d = verts[i] - centroid;
            (d.dot(&e2).atan2(d.dot(&e1)), verts[i])
        })
        .collect();
    ring.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = Vector3::zeros();
    for i in 0..ring.len() {
        acc += ring[i].1.cross(&ring[(i + 1) % ring.len()].1);
    }
    0.5 * acc.dot(normal).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirs2(angles_deg: &[f64]) -> Vec<Point> {
        angles_deg.iter().map(|a| point(&super::super::unit2(a.to_radians()))).collect()
    }

    #[test]
    fn hemisphere_detection_2d() {
        assert!(directions_surround_origin(&dirs2(&[0.0, 120.0, 240.0])));
        assert!(directions_surround_origin(&dirs2(&[0.0, 90.0, 180.0, 270.0])));
        assert!(!directions_surround_origin(&dirs2(&[0.0, 90.0, 180.0])));
        assert!(!directions_surround_origin(&dirs2(&[10.0, 60.0, 170.0])));
    }

    #[test]
    fn hemisphere_detection_3d_and_general() {
        let tet: Vec<Point> = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
            .iter()
            .map(|v| point(v) / 3f64.sqrt())
            .collect();
        assert!(directions_surround_origin(&tet));
        assert!(general_surround(&tet, 3));
        let flat: Vec<Point> = tet.iter().map(|v| point(&[v[0].abs(), v[1], v[2]])).collect();
        assert!(!directions_surround_origin(&flat));
        assert!(!general_surround(&flat, 3));
    }

    #[test]
    fn square_from_halfplanes() {
        let p = HalfspacePolytope::new(dirs2(&[0.0, 90.0, 180.0, 270.0]), vec![0.5; 4]).unwrap();
        let v = p.intrinsic_volumes().unwrap();
        assert!((v[1] - 2.0).abs() < 1e-12 && (v[2] - 1.0).abs() < 1e-12);
        assert!((p.support(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let p = HalfspacePolytope::new(dirs2(&[0.0, 90.0, 180.0]), vec![1.0; 3]).unwrap();
        assert_eq!(p.intrinsic_volumes(), Err(Error::UnboundedConfiguration));
    }

    #[test]
    fn cube_intrinsic_volumes() {
        let mut normals = Vec::new();
        for k in 0..3 {
            for s in [1.0, -1.0] {
                let mut n = [0.0; 3];
                n[k] = s;
                normals.push(point(&n));
            }
        }
        let p = HalfspacePolytope::new(normals, vec![0.5; 6]).unwrap();
        let v = p.intrinsic_volumes().unwrap();
        for (got, want) in v.iter().zip([1.0, 3.0, 3.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn regular_tetrahedron_around_unit_ball() {
        let normals: Vec<Point> = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
            .iter()
            .map(|v| point(v))
            .collect();
        let p = HalfspacePolytope::new(normals, vec![3f64.sqrt(); 4]).unwrap();
        let v = p.intrinsic_volumes().unwrap();
        assert!((v[3] - 8.0 * 3f64.sqrt()).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let h = convex_hull_2d(&pts);
        assert_eq!(h.len(), 4);
        let (a, p) = polygon_area_perimeter(&h);
        assert!((a - 1.0).abs() < 1e-15 && (p - 4.0).abs() < 1e-15);
    }
}
