//! Fixtures shared by the benchmarks.

use ballpoly_core::geom::BallPolyhedron;

/// `count` unit disks with centers on a small circle, so the intersection is a
/// rounded regular polygon.
pub fn ring_of_disks(count: usize, offset: f64) -> BallPolyhedron {
    let centers: Vec<[f64; 2]> = (0..count)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / count as f64;
            [offset * a.cos(), offset * a.sin()]
        })
        .collect();
    BallPolyhedron::from_centers(&centers, 1.0).expect("valid disks")
}

/// The same construction in three dimensions, centers on an equator.
pub fn ring_of_balls(count: usize, offset: f64) -> BallPolyhedron {
    let centers: Vec<[f64; 3]> = (0..count)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / count as f64;
            [offset * a.cos(), offset * a.sin(), 0.1 * offset]
        })
        .collect();
    BallPolyhedron::from_centers(&centers, 1.0).expect("valid balls")
}
