//! Derivative-free minimization: Nelder-Mead in flat coordinates and on
//! products of spheres through geodesic charts.

use nalgebra::DMatrix;

use crate::geom::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Initial simplex edge length.
    pub step: f64,
    /// Stop when the objective range over the simplex falls below this.
    pub range_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { step: 0.3, range_tol: 1e-7, max_evals: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with the standard reflection/expansion/contraction/shrink moves.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult {
    let d = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for k in 0..d {
        let mut x = x0.to_vec();
        x[k] += opts.step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut converged = false;
    while evals < opts.max_evals {
        // stable sort keeps the earlier vertex first on ties
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[d].1);
        if worst - best < opts.range_tol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[d].0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < best {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let x = along(0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < fr.min(worst) {
            simplex[d] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = x_best.iter().zip(&vertex.0).map(|(b, w)| b + 0.5 * (w - b)).collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult { x, value, evaluations: evals, converged }
}

/// Orthonormal basis of the tangent space `theta^perp` (columns of an `n x (n-1)` matrix).
pub fn tangent_basis(theta: &Point) -> DMatrix<f64> {
    let n = theta.len();
    let mut m = DMatrix::<f64>::identity(n, n);
    m.set_column(0, theta);
    let q = m.qr().q();
    q.columns(1, n - 1).into_owned()
}

/// Geodesic from `theta` with initial velocity `v` (tangent), evaluated at time 1.
pub fn exp_map(theta: &Point, v: &Point) -> Point {
    let t = v.norm();
    if t < 1e-300 {
        return theta.clone();
    }
    let y = theta * t.cos() + v * (t.sin() / t);
    let len = y.norm();
    y / len
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereResult {
    pub points: Vec<Point>,
    pub value: f64,
    pub evaluations: usize,
    /// Best value after each chart.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Minimizes `f` over `(S^{n-1})^N` starting at `start`.
///
/// Each round runs Nelder-Mead in the geodesic chart centered at the
/// current best point; rounds stop once a chart no longer improves it.
pub fn minimize_on_spheres(
    mut f: impl FnMut(&[Point]) -> f64,
    start: &[Point],
    opts: &NelderMeadOptions,
    max_rounds: usize,
) -> SphereResult {
    let n = start[0].len();
    let mut center: Vec<Point> = start.to_vec();
    let mut value = f(&center);
    let mut evaluations = 1;
    let mut trace = vec![value];
    let mut step = opts.step;
    let mut converged = false;
    for _ in 0..max_rounds {
        let bases: Vec<DMatrix<f64>> = center.iter().map(tangent_basis).collect();
        let chart = |x: &[f64]| -> Vec<Point> {
            center
                .iter()
                .zip(&bases)
                .enumerate()
                .map(|(i, (c, b))| {
                    let coords = nalgebra::DVector::from_column_slice(&x[i * (n - 1)..(i + 1) * (n - 1)]);
                    exp_map(c, &(b * coords))
                })
                .collect()
        };
        let zero = vec![0.0; center.len() * (n - 1)];
        let round = NelderMeadOptions { step, max_evals: opts.max_evals.saturating_sub(evaluations), ..*opts };
        if round.max_evals <= zero.len() + 1 {
            break;
        }
        let r = nelder_mead(|x| f(&chart(x)), &zero, &round);
        evaluations += r.evaluations;
        let improved = value - r.value;
        if r.value < value {
            center = chart(&r.x);
            value = r.value;
        }
        trace.push(value);
        step = (step * 0.5).max(1e-3);
        if improved <= opts.range_tol {
            converged = r.converged;
            break;
        }
    }
    SphereResult { points: center, value, evaluations, trace, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point;

    #[test]
    fn rosenbrock_minimum() {
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &NelderMeadOptions { step: 0.5, range_tol: 1e-14, max_evals: 10_000 },
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn tangent_basis_is_orthonormal_and_perpendicular() {
        let t = point(&[0.2, -0.4, 0.8]).normalize();
        let b = tangent_basis(&t);
        assert!((b.transpose() * &b - DMatrix::identity(2, 2)).norm() < 1e-12);
        assert!((b.transpose() * &t).norm() < 1e-12);
    }

    #[test]
    fn exp_map_stays_on_the_sphere() {
        let t = point(&[1.0, 0.0, 0.0]);
        let y = exp_map(&t, &point(&[0.0, std::f64::consts::FRAC_PI_2, 0.0]));
        assert!((y - point(&[0.0, 1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn closest_direction_on_the_sphere() {
        let target = point(&[0.0, 0.6, 0.8]);
        let r = minimize_on_spheres(
            |p| -p[0].dot(&target) - p[1].dot(&(-&target)),
            &[point(&[1.0, 0.0, 0.0]), point(&[1.0, 0.0, 0.0])],
            &NelderMeadOptions::default(),
            20,
        );
        assert!((r.value + 2.0).abs() < 1e-6, "{r:?}");
        assert!((&r.points[0] - &target).norm() < 1e-3);
    }
}
