//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ballpoly_core::density::{is_less_peaked, rearrange, DensitySpec, Region, Step1d, Verdict as Peak};
use ballpoly_core::dominance::{
    check_ball_extremizer, check_cube_extremizer, moment_compare, quasiconcavity_test, Estimator, ExperimentConfig,
    MomentConfig, Verdict,
};
use ballpoly_core::extremal::{
    gorbovickis_deficit, hull_dominance_bridge, hull_meanwidth_via_balls, minimize_mjn, schneider_check,
    simplex_ball_constant, CircumscriptionProblem, Objective,
};
use ballpoly_core::geom::{
    hausdorff_distance, minkowski_symmetral, point, project_onto_ballpoly, unit2, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use ballpoly_core::intrinsic::{exact_2d, exact_disk_intersection_2d, fit_intrinsic_volumes, mc_volume, mean_width, EpsilonGrid};
use ballpoly_core::rng::stream_rng;
use ballpoly_core::wulff::{convergence_rate, vr_asymptotics, SphericalFunction};
use ballpoly_core::{Ball, BallPolyhedron, DirectionGrid, Point, SupportBody};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn lens_area(r: f64, d: f64) -> f64 {
    2.0 * r * r * (d / (2.0 * r)).acos() - d / 2.0 * (4.0 * r * r - d * d).sqrt()
}

fn random_disks(rng: &mut impl Rng) -> BallPolyhedron {
    let k = rng.random_range(2..=6);
    let balls = (0..k)
        .map(|_| {
            let c = point(&[rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)]);
            Ball::new(c, rng.random_range(0.7..1.5)).unwrap()
        })
        .collect();
    BallPolyhedron::new(balls).unwrap()
}

fn exact_oracle() -> Outcome {
    let mut rng = stream_rng(101, 0);
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let p = random_disks(&mut rng);
        let (exact, _) = exact_disk_intersection_2d(&p).map_err(|e| e.to_string())?;
        let (mc, se) = mc_volume(&p, 1_000_000, 1000 + i).map_err(|e| e.to_string())?;
        let z = if se > 0.0 { (exact - mc).abs() / se } else if (exact - mc).abs() < 1e-12 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
        ensure(z <= 4.0, || format!("config {i}: exact {exact} vs mc {mc} +- {se}"))?;
    }
    for (r, d) in [(1.0, 1.0), (3.0, 0.5), (2.0, 3.9)] {
        let p = BallPolyhedron::from_centers(&[[0.0, 0.0], [d, 0.0]], r).unwrap();
        let (a, _) = exact_disk_intersection_2d(&p).map_err(|e| e.to_string())?;
        ensure((a - lens_area(r, d)).abs() < 1e-10, || format!("lens r={r} d={d}: {a} vs {}", lens_area(r, d)))?;
    }
    Ok(format!("200 configurations, worst |z| = {worst:.2}"))
}

fn steiner_recovery() -> Outcome {
    let eps = EpsilonGrid::log_spaced(0.05, 0.5, 5, 2_000_000).unwrap();
    let disk = BallPolyhedron::from_centers(&[[0.0, 0.0]], 1.0).unwrap();
    let f = fit_intrinsic_volumes(&disk, &eps, 7).map_err(|e| e.to_string())?;
    let rel = |a: f64, b: f64| (a / b - 1.0).abs();
    ensure(rel(f.values[1], PI) < 0.02 && rel(f.values[2], PI) < 0.02, || format!("disk fit {:?}", f.values))?;
    let lens = BallPolyhedron::from_centers(&[[-0.5, 0.0], [0.5, 0.0]], 1.0).unwrap();
    let exact = exact_2d(&lens).map_err(|e| e.to_string())?;
    let eps = EpsilonGrid::default_for(&lens, 2_000_000).map_err(|e| e.to_string())?;
    let g = fit_intrinsic_volumes(&lens, &eps, 8).map_err(|e| e.to_string())?;
    ensure(rel(g.values[2], exact.values[2]) < 0.02, || format!("lens V2 {} vs {}", g.values[2], exact.values[2]))?;
    ensure(rel(g.values[1], exact.values[1]) < 0.03, || format!("lens V1 {} vs {}", g.values[1], exact.values[1]))?;
    Ok(format!(
        "disk ({:.4}, {:.4}); lens V1 {:.4}/{:.4}, V2 {:.4}/{:.4}",
        f.values[1], f.values[2], g.values[1], exact.values[1], g.values[2], exact.values[2]
    ))
}

fn dominance_config(density: DensitySpec, j: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n: 2,
        count: 3,
        radii: vec![3.0],
        j,
        densities: vec![density],
        trials: 100_000,
        s_grid: Vec::new(),
        seed,
        estimator: Estimator::Exact2d,
        max_failure_rate: 1e-3,
    }
}

fn dominance_ball() -> Outcome {
    let mut notes = Vec::new();
    for j in [1, 2] {
        let r = check_ball_extremizer(&dominance_config(DensitySpec::unit_square(), j, 30 + j as u64), 0.05)
            .map_err(|e| e.to_string())?;
        ensure(r.test.s.len() == 20, || "s-grid must have 20 points".into())?;
        ensure(r.verdict.verdict == Verdict::Consistent, || format!("j={j}: {:?}", r.verdict.verdict))?;
        let max_gap = r.verdict.gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        notes.push(format!("j={j} max gap {max_gap:+.4} (band {:.4})", r.test.band + r.extremal.band));
    }
    Ok(notes.join("; "))
}

fn dominance_cube() -> Outcome {
    let half = Step1d::new(vec![-1.0, 1.0], vec![0.5]).unwrap();
    let f = DensitySpec::Product(vec![half.clone(), half]);
    let mut notes = Vec::new();
    for j in [1, 2] {
        let r = check_cube_extremizer(&dominance_config(f.clone(), j, 40 + j as u64), 0.05).map_err(|e| e.to_string())?;
        ensure(r.verdict.verdict == Verdict::Consistent, || format!("j={j}: {:?}", r.verdict.verdict))?;
        let max_gap = r.verdict.gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        notes.push(format!("j={j} max gap {max_gap:+.4}"));
    }
    Ok(notes.join("; "))
}

fn moments() -> Outcome {
    // a square of side a has mean width 4a / pi
    let body = SupportBody::square(PI / 4.0);
    let w = mean_width(&body, &DirectionGrid::circle(4096, 0.0).unwrap()).unwrap();
    ensure((w - 1.0).abs() < 1e-6, || format!("mean width {w}"))?;
    let cfg = MomentConfig {
        body,
        big_r: 6.0,
        count: 3,
        j: 2,
        trials: 10_000,
        seed: 55,
        estimator: Estimator::Exact2d,
        grid_size: 4096,
    };
    let rep = moment_compare(&cfg, &[-4.0, -1.0, 1.0, 2.0]).map_err(|e| e.to_string())?;
    for row in &rep.rows {
        ensure(row.holds, || format!("p={}: {} +- {} vs {} +- {}", row.p, row.lhs, row.lhs_stderr, row.rhs, row.rhs_stderr))?;
    }
    Ok(rep.rows.iter().map(|r| format!("p={}: {:.3}({:.3}) <= {:.3}({:.3})", r.p, r.lhs, r.lhs_stderr, r.rhs, r.rhs_stderr)).collect::<Vec<_>>().join(", "))
}

fn simplex_constants() -> Outcome {
    let disk = CircumscriptionProblem::new(SupportBody::ball(point(&[0.0, 0.0]), 1.0).unwrap(), 2, 3).unwrap();
    let r2 = minimize_mjn(&disk, 32, 6).map_err(|e| e.to_string())?;
    let t2 = simplex_ball_constant(2);
    ensure(r2.feasible && (r2.value / t2 - 1.0).abs() < 0.005, || format!("n=2: {} vs {t2}", r2.value))?;
    let ball = CircumscriptionProblem::new(SupportBody::ball(point(&[0.0, 0.0, 0.0]), 1.0).unwrap(), 3, 4)
        .unwrap()
        .with_objective(Objective::SteinerFit { samples: 2_000_000 });
    let r3 = minimize_mjn(&ball, 32, 7).map_err(|e| e.to_string())?;
    let (fit, se) = r3.steiner.expect("Steiner estimate requested");
    let t3 = simplex_ball_constant(3);
    ensure(r3.feasible && (fit / t3 - 1.0).abs() < 0.02, || format!("n=3: fit {fit} +- {se}, exact objective {} vs {t3}", r3.value))?;
    Ok(format!("n=2 {:.5} vs {t2:.5}; n=3 fit {fit:.3} +- {se:.3} (polytope {:.4}) vs {t3:.4}", r2.value, r3.value))
}

fn schneider() -> Outcome {
    let rep = schneider_check(&SupportBody::square(1.0), 2, 3, 32, 8).map_err(|e| e.to_string())?;
    let rhs = 3.0 * 3f64.sqrt() * (2.0 / PI).powi(2);
    ensure((rep.rhs - rhs).abs() < 1e-4, || format!("rhs {} vs {rhs}", rep.rhs))?;
    ensure(rep.lhs <= rep.rhs, || format!("lhs {} exceeds rhs {}", rep.lhs, rep.rhs))?;
    ensure((rep.lhs / 2.0 - 1.0).abs() < 0.01, || format!("lhs {} not within 1% of 2", rep.lhs))?;
    Ok(format!("lhs {:.5} <= rhs {:.5}", rep.lhs, rep.rhs))
}

fn wulff_asymptotics() -> Outcome {
    let f = SphericalFunction::from_support(&SupportBody::square(1.0), DirectionGrid::circle(4096, 0.0).unwrap())
        .map_err(|e| e.to_string())?;
    let vr = vr_asymptotics(&f, &[5.0, 10.0, 20.0, 40.0]).map_err(|e| e.to_string())?;
    ensure(vr.rows.iter().all(|r| r.residual > 0.0), || format!("nonpositive residual {:?}", vr.rows))?;
    let s1 = vr.fit.ok_or("no fit")?.slope;
    ensure((-1.4..=-0.6).contains(&s1), || format!("volume-radius slope {s1}"))?;
    let conv = convergence_rate(&f, &[10.0, 20.0, 40.0, 80.0], &DirectionGrid::circle(3001, 0.0).unwrap())
        .map_err(|e| e.to_string())?;
    let s2 = conv.fit.slope;
    ensure(conv.rows.windows(2).all(|w| w[1].residual < w[0].residual), || format!("residuals not decreasing {:?}", conv.rows))?;
    ensure((-1.3..=-0.7).contains(&s2), || format!("Hausdorff slope {s2}"))?;
    Ok(format!("volume-radius slope {s1:.3}, Hausdorff slope {s2:.3}"))
}

fn deficit_pinning() -> Outcome {
    let seg = [point(&[0.0, 0.0]), point(&[1.0, 0.0])];
    let r = gorbovickis_deficit(&seg, 100.0, 0, 0).map_err(|e| e.to_string())?;
    ensure((r.coefficient / 2.0 - 1.0).abs() < 0.005, || format!("segment coefficient {}", r.coefficient))?;
    let tri: Vec<Point> = (0..3).map(|k| point(&unit2(2.0 * PI * k as f64 / 3.0)).scale(1.0 / 3f64.sqrt())).collect();
    let grid = DirectionGrid::circle(4096, 0.0).unwrap();
    let rep = hull_meanwidth_via_balls(&tri, &[100.0], 0, 0, &grid).map_err(|e| e.to_string())?;
    ensure((rep.extrapolated / rep.direct - 1.0).abs() < 0.01, || format!("triangle {} vs {}", rep.extrapolated, rep.direct))?;
    let seg_rep = hull_meanwidth_via_balls(&seg, &[100.0], 0, 0, &grid).map_err(|e| e.to_string())?;
    Ok(format!(
        "segment coefficient {:.5} (2d = 2); triangle {:.5} vs n*omega_n*int h = {:.5}; coefficient / (n omega_n w) = {:.4}, so the \
         deficit coefficient is n omega_n int h d sigma, half of n omega_n w under w = 2 int h d sigma",
        r.coefficient, rep.extrapolated, rep.direct, seg_rep.normalization_ratio
    ))
}

fn hull_bridge() -> Outcome {
    let square = DensitySpec::unit_square();
    let disk = DensitySpec::Uniform(Region::Ball { center: point(&[0.0, 0.0]), radius: 1.0 / PI.sqrt() });
    let rep = hull_dominance_bridge(&square, &disk, 5, 10_000, 50.0, 91).map_err(|e| e.to_string())?;
    ensure(rep.dominance_holds, || format!("{rep:?}"))?;
    ensure(rep.relative_disagreement < 0.02, || format!("disagreement {}", rep.relative_disagreement))?;
    Ok(format!(
        "E w: square {:.4} +- {:.4}, disk {:.4} +- {:.4}; deficit route differs by {:.2e}",
        rep.test.direct.0, rep.test.direct.1, rep.reference.direct.0, rep.reference.direct.1, rep.relative_disagreement
    ))
}

fn properties() -> Outcome {
    let mut notes = Vec::new();

    let q = quasiconcavity_test(4, 2, &[1.0, 1.2, 0.9, 1.5], 2, 500, 17).map_err(|e| e.to_string())?;
    ensure(q.midpoint_violations == 0 && q.reflection_violations == 0, || format!("{q:?}"))?;
    notes.push("quasi-concavity/evenness 0/500".to_string());

    // products of less peaked coordinate densities stay less peaked
    let wide = Step1d::uniform(-1.0, 1.0).unwrap();
    let narrow = Step1d::uniform(-0.5, 0.5).unwrap();
    let bump = Step1d::new(vec![-1.0, -0.25, 0.25, 1.0], vec![0.2, 1.4, 0.2]).unwrap();
    let kanter = is_less_peaked(
        &DensitySpec::Product(vec![wide.clone(), wide.clone()]),
        &DensitySpec::Product(vec![narrow.clone(), bump]),
        200,
        5,
    )
    .map_err(|e| e.to_string())?;
    ensure(kanter.verdict == Peak::Holds, || format!("product closure {kanter:?}"))?;
    let reversed = is_less_peaked(&DensitySpec::Product(vec![narrow.clone(), narrow]), &DensitySpec::Product(vec![wide.clone(), wide]), 50, 6)
        .map_err(|e| e.to_string())?;
    ensure(reversed.verdict == Peak::Violated, || "reversed product pair not flagged".into())?;
    notes.push("product closure".into());

    let shifted = DensitySpec::Uniform(Region::Box { lo: vec![0.3, -0.2], hi: vec![1.3, 0.8] });
    let star = rearrange(&shifted).map_err(|e| e.to_string())?;
    let p = is_less_peaked(&shifted, &star, 200, 7).map_err(|e| e.to_string())?;
    ensure(p.verdict == Peak::Holds, || format!("f vs f*: {p:?}"))?;
    let radii = [0.3, 0.6, 1.0];
    let raw = [2.0, 0.9, 0.2];
    let mut inner = 0.0;
    let mut mass = 0.0;
    for (r, h) in radii.iter().zip(raw) {
        mass += h * PI * (r * r - inner * inner);
        inner = *r;
    }
    let heights: Vec<f64> = raw.iter().map(|h| h / mass).collect();
    let radial = DensitySpec::radial_step(2, radii.to_vec(), heights).map_err(|e| e.to_string())?;
    // levels avoid the jump heights, where rounding in 1/|B| decides strictness
    for s in [0.0, 0.1, 0.5, 0.9, 1.1, 1.5, 2.5] {
        for f in [&shifted, &radial] {
            let r = rearrange(f).map_err(|e| e.to_string())?;
            let (a, b) = (f.level_set_volume(s).map_err(|e| e.to_string())?, r.level_set_volume(s).map_err(|e| e.to_string())?);
            ensure((a - b).abs() < 1e-12, || format!("level {s}: {a} vs {b}"))?;
        }
    }
    notes.push("peakedness and equimeasurability".into());

    let mut rng = stream_rng(23, 0);
    let mut chain_worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for _ in 0..300 {
        let p = random_disks(&mut rng);
        if p.certainly_empty() || exact_disk_intersection_2d(&p).map_err(|e| e.to_string())?.0 == 0.0 {
            continue;
        }
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (px, py) = match (
            project_onto_ballpoly(&p, &x, DEFAULT_TOL, DEFAULT_MAX_ITER),
            project_onto_ballpoly(&p, &y, DEFAULT_TOL, DEFAULT_MAX_ITER),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        let ppx = project_onto_ballpoly(&p, px.as_slice(), DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
        ensure((&ppx - &px).norm() <= 2.0 * DEFAULT_TOL, || "projection is not idempotent".into())?;
        let lhs = (&px - &py).norm();
        let rhs = (point(&x) - point(&y)).norm() + 2.0 * DEFAULT_TOL;
        ensure(lhs <= rhs, || format!("projection expands distances: {lhs} > {rhs}"))?;
        chain_worst = chain_worst.max(exact_2d(&p).map_err(|e| e.to_string())?.inequality_chain_excess(0.0));
        checked += 1;
    }
    ensure(chain_worst <= 1e-12, || format!("isoperimetric/Urysohn chain excess {chain_worst}"))?;
    notes.push("projection idempotent/nonexpansive".into());

    let grid = DirectionGrid::circle(4096, 0.0).unwrap();
    let sq = SupportBody::square(1.0);
    let w0 = mean_width(&sq, &grid).unwrap();
    let mut body = sq.clone();
    for k in 0..20 {
        body = minkowski_symmetral(&body, &unit2(0.37 * k as f64)).map_err(|e| e.to_string())?;
        let w = mean_width(&body, &grid).map_err(|e| e.to_string())?;
        ensure((w - w0).abs() < 1e-6, || format!("mean width drifted to {w} from {w0}"))?;
    }
    ensure((w0 - 4.0 / PI).abs() < 1e-6, || format!("square mean width {w0}"))?;
    let ball = SupportBody::ball(point(&[0.0, 0.0]), 2.0 / PI).unwrap();
    ensure(hausdorff_distance(&body, &ball, &grid).unwrap() < hausdorff_distance(&sq, &ball, &grid).unwrap(), || {
        "symmetrals did not move toward the ball".into()
    })?;
    notes.push("symmetral mean width".into());

    let cube = ballpoly_core::HalfspacePolytope::new(
        (0..3).flat_map(|k| [1.0, -1.0].map(|s| { let mut e = Point::zeros(3); e[k] = s; e })).collect(),
        vec![0.5; 6],
    )
    .unwrap();
    let v = cube.intrinsic_volumes().unwrap();
    let iv = ballpoly_core::IntrinsicVolumes::exact(v, ballpoly_core::intrinsic::Method::ExactPolytope);
    ensure(iv.inequality_chain_excess(0.0) <= 1e-12, || "cube violates the radius chain".into())?;
    notes.push(format!("radius chains on {} bodies", checked + 1));
    Ok(notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("exact planar areas against Monte Carlo", exact_oracle),
        ("Steiner-fit recovery", steiner_recovery),
        ("dominance against the ball extremizer", dominance_ball),
        ("dominance against the unit cube", dominance_cube),
        ("moment comparison", moments),
        ("circumscribed simplex closed forms", simplex_constants),
        ("mean-width ball bound for the square", schneider),
        ("volume-radius and Wulff approximation rates", wulff_asymptotics),
        ("ball-intersection deficit coefficient", deficit_pinning),
        ("random hull mean width bridge", hull_bridge),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
