//! Closed-form spot checks across every module of the core crate.

use std::f64::consts::PI;

use ballpoly_core::density::{rearrange, DensitySpec, Region, Step1d};
use ballpoly_core::dominance::{dkw_band, survival};
use ballpoly_core::extremal::{simplex_ball_constant, CircumscriptionProblem};
use ballpoly_core::geom::{point, project_onto_ballpoly, BallPolyhedron, DirectionGrid, SupportBody};
use ballpoly_core::intrinsic::{exact_2d, mean_width};
use ballpoly_core::wulff::{build_a, volume_radius, SphericalFunction};
use ballpoly_core::Point;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn check(name: &str, value: Result<f64, String>, expected: f64, tolerance: f64) -> SelfCheck {
    let value = value.unwrap_or(f64::NAN);
    SelfCheck { name: name.into(), value, expected, tolerance, passed: (value - expected).abs() <= tolerance }
}

fn s<T, E: ToString>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn run_all() -> Vec<SelfCheck> {
    let unit_disk = || s(BallPolyhedron::from_centers(&[[0.0, 0.0]], 1.0));
    let lens = || s(BallPolyhedron::from_centers(&[[-0.5, 0.0], [0.5, 0.0]], 1.0));
    // equal unit disks at distance 1: area 2 pi / 3 - sqrt(3) / 2, perimeter 4 pi / 3
    let lens_area = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
    vec![
        check(
            "projection onto the unit disk",
            unit_disk().and_then(|p| s(project_onto_ballpoly(&p, &[2.0, 0.0], 1e-9, 10_000))).map(|x| x[0]),
            1.0,
            1e-8,
        ),
        check("unit disk area", unit_disk().and_then(|p| s(exact_2d(&p))).map(|v| v.get(2)), PI, 1e-12),
        check("unit disk V_1", unit_disk().and_then(|p| s(exact_2d(&p))).map(|v| v.get(1)), PI, 1e-12),
        check("lens area", lens().and_then(|p| s(exact_2d(&p))).map(|v| v.get(2)), lens_area, 1e-12),
        check("lens V_1", lens().and_then(|p| s(exact_2d(&p))).map(|v| v.get(1)), 2.0 * PI / 3.0, 1e-12),
        check("square mean width", s(mean_width(&SupportBody::square(1.0), &DirectionGrid::circle(4096, 0.0).unwrap())), 4.0 / PI, 1e-6),
        check("unit cube mass", s(DensitySpec::unit_cube(3).mass()), 1.0, 1e-12),
        check(
            "rearranged box level set",
            s(DensitySpec::uniform(Region::Box { lo: vec![0.0, 0.0], hi: vec![2.0, 0.5] }))
                .and_then(|f| s(rearrange(&f)))
                .and_then(|g| s(g.level_set_volume(0.5))),
            1.0,
            1e-12,
        ),
        check(
            "rearranged step density peak",
            s(Step1d::new(vec![0.0, 1.0, 1.5], vec![0.5, 1.0])).map(|f| f.rearranged().value(0.0)),
            1.0,
            1e-12,
        ),
        check("DKW band at m = 1000", Ok(dkw_band(1000, 0.05)), (40f64.ln() / 2000.0).sqrt(), 1e-15),
        check(
            "survival of 1..=100 at 50",
            s(survival(&(1..=100).map(f64::from).collect::<Vec<_>>(), &[50.0], 0.05)).map(|c| c.p[0]),
            0.5,
            1e-12,
        ),
        check(
            "volume radius of A(1, 3)",
            s(SphericalFunction::constant(DirectionGrid::circle(256, 0.0).unwrap(), 1.0))
                .and_then(|f| s(build_a(&f, 3.0)).map(|a| volume_radius(&a, f.grid()))),
            2.0,
            1e-12,
        ),
        check("circumscribed triangle constant", Ok(simplex_ball_constant(2)), 3.0 * 3f64.sqrt(), 1e-12),
        check(
            "triangle around the unit disk",
            s(SupportBody::ball(Point::zeros(2), 1.0))
                .and_then(|b| s(CircumscriptionProblem::new(b, 2, 3)))
                .map(|p| {
                    let dirs: Vec<Point> = (0..3).map(|k| {
                        let a = 2.0 * PI * k as f64 / 3.0;
                        point(&[a.cos(), a.sin()])
                    }).collect();
                    p.value(&dirs)
                }),
            3.0 * 3f64.sqrt(),
            1e-9,
        ),
    ]
}
