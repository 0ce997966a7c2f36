//! Foot-point projection: per-point minimization of `½‖x − s(u, v)‖²` over
//! unconstrained `(u, v)` by Newton's method with Armijo backtracking.

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::bezier::{g_eval, g_value, BezierSurface, Vec3};
use crate::error::{Error, Result};
use crate::voxel::PointCloud;

/// Parameters beyond this magnitude are flagged as runaway.
pub const RUNAWAY_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSettings {
    pub max_newton_iters: usize,
    /// Stop once `‖∇g‖` falls to this value.
    pub grad_tol: f64,
    /// Sufficient-decrease constant.
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        Self {
            max_newton_iters: 20,
            grad_tol: 1e-10,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 50,
        }
    }
}

impl ProjectionSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::config("grad_tol", "must be strictly positive"));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::config("armijo_c", "must lie in (0, 1)"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::config("backtrack_factor", "must lie in (0, 1)"));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::config("max_newton_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one foot-point solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    /// `g` at the returned parameters.
    pub g: f64,
    pub iterations: usize,
    /// `‖∇g‖ ≤ grad_tol` at the returned parameters.
    pub converged: bool,
    /// `|u|` or `|v|` exceeded [`RUNAWAY_LIMIT`].
    pub runaway: bool,
}

impl Projection {
    pub fn distance(&self) -> f64 {
        (2.0 * self.g).sqrt()
    }
}

/// Descent direction: Newton when the Hessian is positive definite,
/// steepest descent otherwise.
fn direction(grad: &Vector2<f64>, hess: &nalgebra::Matrix2<f64>) -> Vector2<f64> {
    let det = hess.determinant();
    if hess.trace() > 0.0 && det > 0.0 {
        let (a, b, c, d) = (hess[(0, 0)], hess[(0, 1)], hess[(1, 0)], hess[(1, 1)]);
        let step = -Vector2::new(d * grad[0] - b * grad[1], -c * grad[0] + a * grad[1]) / det;
        if step.iter().all(|s| s.is_finite()) && step.dot(grad) < 0.0 {
            return step;
        }
    }
    -grad
}

/// Minimizes `g(u, v; x, S)` from `(u0, v0)`. The objective never increases.
pub fn project_point(
    x: &Vec3,
    surface: &BezierSurface,
    u0: f64,
    v0: f64,
    settings: &ProjectionSettings,
) -> Result<Projection> {
    if !(u0.is_finite() && v0.is_finite() && x.iter().all(|c| c.is_finite())) {
        return Err(Error::NumericalFailure {
            u: u0,
            v: v0,
            reason: "non-finite input".into(),
        });
    }
    let (mut u, mut v) = (u0, v0);
    let mut ge = g_eval(x, u, v, surface);
    if !ge.value.is_finite() {
        return Err(Error::NumericalFailure {
            u,
            v,
            reason: "objective is not finite at the starting point".into(),
        });
    }
    let mut iterations = 0;
    while iterations < settings.max_newton_iters && ge.gradient.norm() > settings.grad_tol {
        let dir = direction(&ge.gradient, &ge.hessian);
        let slope = ge.gradient.dot(&dir);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_backtracks {
            let (nu, nv) = (u + step * dir[0], v + step * dir[1]);
            let trial = g_value(x, nu, nv, surface);
            if !trial.is_finite() {
                if !(nu.is_finite() && nv.is_finite()) {
                    return Err(Error::NumericalFailure {
                        u,
                        v,
                        reason: "non-finite trial parameters".into(),
                    });
                }
            } else if trial <= ge.value + settings.armijo_c * step * slope {
                accepted = Some((nu, nv));
                break;
            }
            step *= settings.backtrack_factor;
        }
        iterations += 1;
        let Some((nu, nv)) = accepted else {
            // no sufficient decrease representable at this precision
            break;
        };
        let next = g_eval(x, nu, nv, surface);
        if !next.value.is_finite() || next.gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::NumericalFailure {
                u,
                v,
                reason: "objective became non-finite".into(),
            });
        }
        if next.value > ge.value {
            break;
        }
        u = nu;
        v = nv;
        ge = next;
    }
    Ok(Projection {
        u,
        v,
        g: ge.value,
        iterations,
        converged: ge.gradient.norm() <= settings.grad_tol,
        runaway: u.abs() > RUNAWAY_LIMIT || v.abs() > RUNAWAY_LIMIT,
    })
}

/// Per-point results of [`project_all`].
#[derive(Debug)]
pub struct ProjectAllOutcome {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Indices and errors of points that kept their previous parameters.
    pub failures: Vec<(usize, Error)>,
    pub runaway: usize,
    pub unconverged: usize,
}

/// Warm-started projection of every point. Results are assembled by point
/// index, so sequential and parallel runs are bit-identical.
pub fn project_all(
    cloud: &PointCloud,
    surface: &BezierSurface,
    u: &[f64],
    v: &[f64],
    settings: &ProjectionSettings,
    parallel: bool,
) -> Result<ProjectAllOutcome> {
    if u.len() != cloud.len() || v.len() != cloud.len() {
        return Err(Error::Dimension(format!(
            "{} points but {} / {} parameters",
            cloud.len(),
            u.len(),
            v.len()
        )));
    }
    let solve = |i: usize| project_point(&cloud.points()[i], surface, u[i], v[i], settings);
    let results: Vec<Result<Projection>> = if parallel {
        (0..cloud.len()).into_par_iter().map(solve).collect()
    } else {
        (0..cloud.len()).map(solve).collect()
    };

    let mut out = ProjectAllOutcome {
        u: u.to_vec(),
        v: v.to_vec(),
        failures: Vec::new(),
        runaway: 0,
        unconverged: 0,
    };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => {
                out.u[i] = p.u;
                out.v[i] = p.v;
                out.runaway += usize::from(p.runaway);
                out.unconverged += usize::from(!p.converged);
            }
            Err(e) => out.failures.push((
                i,
                Error::PointFailure {
                    index: i,
                    source: Box::new(e),
                },
            )),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::bezier::surface_jacobian;

    fn bicubic(rng: &mut impl Rng) -> BezierSurface {
        let mut pts = Vec::new();
        for j in 0..4 {
            for i in 0..4 {
                pts.push(Vec3::new(
                    i as f64 / 3.0,
                    j as f64 / 3.0,
                    0.3 * rng.random_range(-1.0..1.0),
                ));
            }
        }
        BezierSurface::from_flat(3, 3, pts).unwrap()
    }

    #[test]
    fn stationary_start_needs_no_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = bicubic(&mut rng);
        let x = s.eval(0.3, 0.8);
        let p = project_point(&x, &s, 0.3, 0.8, &ProjectionSettings::default()).unwrap();
        assert_eq!((p.u, p.v, p.g, p.iterations), (0.3, 0.8, 0.0, 0));
        assert!(p.converged);
    }

    #[test]
    fn affine_plane_matches_least_squares() {
        // s(u, v) = o + u a + v b, a skewed parallelogram
        let o = Vec3::new(1.0, -2.0, 0.5);
        let a = Vec3::new(2.0, 0.5, 0.3);
        let b = Vec3::new(-0.4, 1.5, 0.8);
        let s = BezierSurface::from_tensor(&[vec![o, o + b], vec![o + a, o + a + b]]).unwrap();
        let x = Vec3::new(3.0, 1.0, -2.0);
        let p = project_point(&x, &s, 0.0, 0.0, &ProjectionSettings::default()).unwrap();
        // normal equations of the 3×2 system [a b] (u, v)ᵀ = x − o
        let m = nalgebra::Matrix3x2::from_columns(&[a, b]);
        let uv = (m.transpose() * m).try_inverse().unwrap() * m.transpose() * (x - o);
        assert!((p.u - uv[0]).abs() < 1e-10 && (p.v - uv[1]).abs() < 1e-10);
        assert!(p.converged);
    }

    #[test]
    fn descent_on_perturbed_bicubic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = bicubic(&mut rng);
        let j = surface_jacobian(0.4, 0.6, &s);
        let normal = j.row(0).transpose().cross(&j.row(1).transpose()).normalize();
        let x = s.eval(0.4, 0.6) + 0.02 * normal;
        let settings = ProjectionSettings::default();
        let mut last = g_value(&x, 0.35, 0.65, &s);
        let (mut u, mut v) = (0.35, 0.65);
        for _ in 0..settings.max_newton_iters {
            let one = ProjectionSettings { max_newton_iters: 1, ..settings };
            let p = project_point(&x, &s, u, v, &one).unwrap();
            assert!(p.g <= last);
            last = p.g;
            u = p.u;
            v = p.v;
        }
        let p = project_point(&x, &s, 0.35, 0.65, &settings).unwrap();
        assert!(p.converged);
        assert!((p.distance() - 0.02).abs() < 1e-6);
    }

    #[test]
    fn non_finite_start_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = bicubic(&mut rng);
        let r = project_point(&Vec3::zeros(), &s, f64::NAN, 0.0, &ProjectionSettings::default());
        assert!(matches!(r, Err(Error::NumericalFailure { .. })));
    }

    #[test]
    fn project_all_keeps_stationary_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = bicubic(&mut rng);
        let u: Vec<f64> = (0..10).map(|_| rng.random()).collect();
        let v: Vec<f64> = (0..10).map(|_| rng.random()).collect();
        let pts = u.iter().zip(&v).map(|(&a, &b)| s.eval(a, b)).collect();
        let cloud = PointCloud::unweighted(pts).unwrap();
        let out = project_all(&cloud, &s, &u, &v, &ProjectionSettings::default(), true).unwrap();
        assert_eq!(out.u, u);
        assert_eq!(out.v, v);
        assert!(out.failures.is_empty());
    }

    #[test]
    fn project_all_failures_keep_previous_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = bicubic(&mut rng);
        let cloud = PointCloud::unweighted(vec![Vec3::new(0.5, 0.5, 1.0); 3]).unwrap();
        let u = vec![0.2, f64::INFINITY, 0.7];
        let v = vec![0.2, 0.5, 0.7];
        let out = project_all(&cloud, &s, &u, &v, &ProjectionSettings::default(), false).unwrap();
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].0, 1);
        assert_eq!(out.u[1], f64::INFINITY);
        assert!(matches!(out.failures[0].1, Error::PointFailure { index: 1, .. }));
    }

    #[test]
    fn settings_validation() {
        assert!(ProjectionSettings::default().validate().is_ok());
        let bad = ProjectionSettings { armijo_c: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ProjectionSettings { grad_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
