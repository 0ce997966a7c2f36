//! Noise-variance estimate, the BIC statistic and conditional order growth.

use std::cmp::Ordering;

use crate::bezier::{BezierSurface, Vec3};
use crate::control::{regularized_objective, solve_control_points, weighted_objective};
use crate::error::{Error, Result};
use crate::voxel::PointCloud;

/// Floor applied to σ̂² before taking its logarithm for ranking.
pub const SIGMA2_FLOOR: f64 = 1e-300;

/// σ̂² at or below this fraction of the cloud's mean squared coordinate is
/// rounding noise of an exact fit and ranks as zero.
pub const SIGMA2_ROUNDOFF: f64 = 1e-20;

/// A fitted surface with its location parameters and selection statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitModel {
    pub surface: BezierSurface,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub sigma2: f64,
    /// BIC statistic; larger is better.
    pub t: f64,
    /// Parameter count `2 n_x + 3 (n_u + 1)(n_v + 1) + 1`.
    pub d: usize,
    /// σ̂² was at rounding level and `t` was computed from the floor.
    pub degenerate: bool,
    /// Translation between the fitting frame and the data frame.
    pub centroid: Vec3,
}

impl FitModel {
    pub fn orders(&self) -> (usize, usize) {
        self.surface.orders()
    }

    pub fn size(&self) -> usize {
        self.surface.size()
    }
}

/// `σ̂² = (1 / 3 n_x) Σ w_i² ‖x_i − s(u_i, v_i)‖²`.
pub fn sigma2_hat(cloud: &PointCloud, surface: &BezierSurface, u: &[f64], v: &[f64]) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::Domain("σ̂² needs at least one point".into()));
    }
    if u.len() != cloud.len() || v.len() != cloud.len() {
        return Err(Error::Dimension(format!(
            "{} points but {} / {} parameters",
            cloud.len(),
            u.len(),
            v.len()
        )));
    }
    let sum: f64 = cloud
        .points()
        .iter()
        .zip(cloud.weights())
        .zip(u.iter().zip(v))
        .map(|((x, w), (&a, &b))| w * w * (x - surface.eval(a, b)).norm_squared())
        .sum();
    Ok(sum / (3 * cloud.len()) as f64)
}

pub fn param_count(n_x: usize, n_u: usize, n_v: usize) -> usize {
    2 * n_x + 3 * (n_u + 1) * (n_v + 1) + 1
}

/// The statistic together with a flag for zero residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bic {
    pub t: f64,
    pub degenerate: bool,
}

/// `t = −3 n_x ln σ² − d ln n_x`. Zero σ² yields `+∞` flagged degenerate.
pub fn bic_statistic(sigma2: f64, d: usize, n_x: usize) -> Result<Bic> {
    if n_x == 0 {
        return Err(Error::Domain("BIC needs n_x >= 1".into()));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::Domain(format!("σ² must be nonnegative, got {sigma2}")));
    }
    if sigma2 == 0.0 {
        return Ok(Bic { t: f64::INFINITY, degenerate: true });
    }
    let n = n_x as f64;
    Ok(Bic {
        t: -3.0 * n * sigma2.ln() - d as f64 * n.ln(),
        degenerate: false,
    })
}

/// Statistic used for ranking: σ² at rounding level is replaced by a common
/// floor so exact fits compare by their parameter counts.
fn ranking_statistic(sigma2: f64, floor: f64, d: usize, n_x: usize) -> Result<Bic> {
    let floor = floor.max(SIGMA2_FLOOR);
    let bic = bic_statistic(sigma2.max(floor), d, n_x)?;
    Ok(Bic { t: bic.t, degenerate: sigma2 <= floor })
}

/// Rounding floor for σ̂² relative to the cloud's own scale.
pub fn sigma2_floor(cloud: &PointCloud) -> f64 {
    let scale: f64 = cloud
        .points()
        .iter()
        .zip(cloud.weights())
        .map(|(p, w)| w * w * p.norm_squared())
        .sum::<f64>()
        / (3 * cloud.len().max(1)) as f64;
    (SIGMA2_ROUNDOFF * scale).max(SIGMA2_FLOOR)
}

/// One evaluated order pair.
#[derive(Debug)]
pub struct Candidate {
    pub n_u: usize,
    pub n_v: usize,
    pub outcome: Result<FitModel>,
    /// `f_λ` of the solved control points, if the solve succeeded.
    pub f_lambda: Option<f64>,
}

#[derive(Debug)]
pub struct MdlSelection {
    pub model: FitModel,
    pub candidates: Vec<Candidate>,
}

/// Argmax order: larger `t`, then smaller `d`, smaller `n_u + n_v`, smaller `n_u`.
pub fn compare_models(a: &FitModel, b: &FitModel) -> Ordering {
    let (au, av) = a.orders();
    let (bu, bv) = b.orders();
    a.t.partial_cmp(&b.t)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.d.cmp(&a.d))
        .then_with(|| (bu + bv).cmp(&(au + av)))
        .then_with(|| bu.cmp(&au))
}

/// Fits one order pair at fixed `(u, v)`; `cloud` must be centered.
pub fn fit_fixed_order(
    cloud: &PointCloud,
    u: &[f64],
    v: &[f64],
    n_u: usize,
    n_v: usize,
    lambda: f64,
) -> Result<(FitModel, f64)> {
    let surface = solve_control_points(cloud, u, v, n_u, n_v, lambda)?;
    let sigma2 = sigma2_hat(cloud, &surface, u, v)?;
    let d = param_count(cloud.len(), n_u, n_v);
    let bic = ranking_statistic(sigma2, sigma2_floor(cloud), d, cloud.len())?;
    let f_lambda = regularized_objective(cloud, &surface, u, v, lambda);
    Ok((
        FitModel {
            surface,
            u: u.to_vec(),
            v: v.to_vec(),
            sigma2,
            t: bic.t,
            d,
            degenerate: bic.degenerate,
            centroid: Vec3::zeros(),
        },
        f_lambda,
    ))
}

/// Solves the orders `{n_u, n_u + 1} × {n_v, n_v + 1}` (clipped to `cap`)
/// at fixed `(u, v)` and keeps the one with the largest statistic.
pub fn mdl_select_detailed(
    cloud: &PointCloud,
    u: &[f64],
    v: &[f64],
    n_u: usize,
    n_v: usize,
    lambda: f64,
    cap: (usize, usize),
) -> Result<MdlSelection> {
    if n_u < 1 || n_v < 1 {
        return Err(Error::Domain(format!("orders must be positive, got ({n_u}, {n_v})")));
    }
    let mut candidates = Vec::with_capacity(4);
    for cu in n_u..=(n_u + 1) {
        for cv in n_v..=(n_v + 1) {
            let within = |o: usize, base: usize, c: usize| o == base || o <= c;
            if !(within(cu, n_u, cap.0) && within(cv, n_v, cap.1)) {
                continue;
            }
            let (outcome, f_lambda) = match fit_fixed_order(cloud, u, v, cu, cv, lambda) {
                Ok((m, f)) => (Ok(m), Some(f)),
                Err(e) => (Err(e), None),
            };
            candidates.push(Candidate { n_u: cu, n_v: cv, outcome, f_lambda });
        }
    }
    let best = candidates
        .iter()
        .filter_map(|c| c.outcome.as_ref().ok())
        .max_by(|a, b| compare_models(a, b))
        .cloned();
    match best {
        Some(model) => Ok(MdlSelection { model, candidates }),
        // the base order is always the first candidate; its error is the informative one
        None => Err(candidates
            .into_iter()
            .next()
            .and_then(|c| c.outcome.err())
            .unwrap_or_else(|| Error::Domain("no order candidates evaluated".into()))),
    }
}

/// Model with the largest statistic among the candidate order pairs.
pub fn mdl_select(
    cloud: &PointCloud,
    u: &[f64],
    v: &[f64],
    n_u: usize,
    n_v: usize,
    lambda: f64,
) -> Result<FitModel> {
    mdl_select_detailed(cloud, u, v, n_u, n_v, lambda, (usize::MAX, usize::MAX)).map(|s| s.model)
}

/// Un-abbreviated criterion `ℓ(X; θ) − (d/2) ln n_x` with σ̂² plugged into
/// the weighted Gaussian log-likelihood.
pub fn full_bic(cloud: &PointCloud, model: &FitModel) -> f64 {
    let n = cloud.len() as f64;
    let s2 = model.sigma2.max(SIGMA2_FLOOR);
    let f = weighted_objective(cloud, &model.surface, &model.u, &model.v);
    let mut ll = -1.5 * n * (2.0 * std::f64::consts::PI).ln();
    for w in cloud.weights() {
        ll += -1.5 * (s2 / (w * w)).ln();
    }
    ll -= f / s2;
    ll - 0.5 * model.d as f64 * n.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use crate::control::center_cloud;

    #[test]
    fn parameter_counts() {
        assert_eq!(param_count(100, 1, 1), 213);
        assert_eq!(param_count(132, 1, 3), 289);
        assert_eq!(param_count(1, 1, 1), 15);
    }

    #[test]
    fn statistic_examples() {
        let t = bic_statistic(1.0, 213, 100).unwrap();
        assert!((t.t - (-213.0 * 100f64.ln())).abs() < 1e-9);
        assert!((t.t + 980.90).abs() < 0.01);
        let t = bic_statistic(std::f64::consts::E, 999, 1).unwrap();
        assert!((t.t + 3.0).abs() < 1e-12);
        assert!(bic_statistic(0.3, 50, 20).unwrap().t > bic_statistic(0.3, 60, 20).unwrap().t);
        let z = bic_statistic(0.0, 50, 20).unwrap();
        assert!(z.degenerate && z.t == f64::INFINITY);
        assert!(bic_statistic(0.1, 5, 0).is_err());
    }

    #[test]
    fn sigma2_examples() {
        let s = BezierSurface::from_tensor(&[
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0)],
        ])
        .unwrap();
        let on = PointCloud::unweighted(vec![s.eval(0.2, 0.3), s.eval(0.9, 0.1)]).unwrap();
        assert_eq!(sigma2_hat(&on, &s, &[0.2, 0.9], &[0.3, 0.1]).unwrap(), 0.0);

        let one = PointCloud::unweighted(vec![Vec3::new(0.5, 0.5, 0.7)]).unwrap();
        let s2 = sigma2_hat(&one, &s, &[0.5], &[0.5]).unwrap();
        assert!((s2 - 0.49 / 3.0).abs() < 1e-15);

        let empty = PointCloud::unweighted(vec![]).unwrap();
        assert!(sigma2_hat(&empty, &s, &[], &[]).is_err());
    }

    #[test]
    fn sigma2_equals_scaled_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Vec3> = (0..30).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect();
        let w: Vec<f64> = (0..30).map(|_| rng.random_range(0.3..2.0)).collect();
        let cloud = PointCloud::new(pts, w).unwrap();
        let u: Vec<f64> = (0..30).map(|_| rng.random()).collect();
        let v: Vec<f64> = (0..30).map(|_| rng.random()).collect();
        let s = BezierSurface::from_flat(
            2,
            2,
            (0..9).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect(),
        )
        .unwrap();
        let a = sigma2_hat(&cloud, &s, &u, &v).unwrap();
        let b = 2.0 / 90.0 * weighted_objective(&cloud, &s, &u, &v);
        assert!((a - b).abs() <= 1e-14 * a);
    }

    fn grid_uv(k: usize) -> (Vec<f64>, Vec<f64>) {
        let mut u = Vec::new();
        let mut v = Vec::new();
        for i in 0..k {
            for j in 0..k {
                u.push(i as f64 / (k - 1) as f64);
                v.push(j as f64 / (k - 1) as f64);
            }
        }
        (u, v)
    }

    #[test]
    fn noisy_plane_keeps_bilinear_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let (u, v) = grid_uv(10);
        let pts = u
            .iter()
            .zip(&v)
            .map(|(&a, &b)| Vec3::new(a, b, 0.0) + Vec3::from_fn(|_, _| noise.sample(&mut rng)))
            .collect();
        let c = center_cloud(&PointCloud::unweighted(pts).unwrap()).unwrap();
        let m = mdl_select(&c.cloud, &u, &v, 1, 1, 1e-3).unwrap();
        assert_eq!(m.orders(), (1, 1));
    }

    #[test]
    fn noiseless_biquadratic_grows_order() {
        let (u, v) = grid_uv(10);
        let pts = u
            .iter()
            .zip(&v)
            .map(|(&a, &b)| Vec3::new(a, b, (a - 0.5) * (a - 0.5) + 0.5 * b * b))
            .collect();
        let c = center_cloud(&PointCloud::unweighted(pts).unwrap()).unwrap();
        let sel = mdl_select_detailed(&c.cloud, &u, &v, 1, 1, 1e-3, (6, 6)).unwrap();
        assert_eq!(sel.candidates.len(), 4);
        let (nu, nv) = sel.model.orders();
        assert!(nu >= 1 && nv >= 1 && nu + nv > 2);
        let max_t = sel
            .candidates
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok())
            .map(|m| m.t)
            .fold(f64::MIN, f64::max);
        assert_eq!(sel.model.t, max_t);
    }

    #[test]
    fn exact_fits_tie_break_on_parameter_count() {
        // Three points: every candidate interpolates them exactly.
        let cloud = PointCloud::unweighted(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ])
        .unwrap();
        let (u, v) = (vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]);
        let sel = mdl_select_detailed(&cloud, &u, &v, 1, 1, 1e-14, (6, 6)).unwrap();
        assert_eq!(sel.model.orders(), (1, 1));

        let mk = |nu, nv, t| FitModel {
            surface: BezierSurface::from_flat(nu, nv, vec![Vec3::zeros(); (nu + 1) * (nv + 1)]).unwrap(),
            u: vec![],
            v: vec![],
            sigma2: 1.0,
            t,
            d: param_count(3, nu, nv),
            degenerate: false,
            centroid: Vec3::zeros(),
        };
        let mut all = [mk(2, 2, 1.0), mk(1, 2, 1.0), mk(2, 1, 1.0), mk(1, 1, 1.0)];
        all.sort_by(compare_models);
        assert_eq!(all[3].orders(), (1, 1));
        assert_eq!(compare_models(&mk(1, 2, 1.0), &mk(2, 1, 1.0)), Ordering::Greater);
    }

    #[test]
    fn orders_respect_cap_and_never_shrink() {
        let (u, v) = grid_uv(8);
        let pts = u
            .iter()
            .zip(&v)
            .map(|(&a, &b)| Vec3::new(a, b, (3.0 * a).sin() * (2.0 * b).cos()))
            .collect();
        let c = center_cloud(&PointCloud::unweighted(pts).unwrap()).unwrap();
        let sel = mdl_select_detailed(&c.cloud, &u, &v, 3, 2, 1e-6, (3, 6)).unwrap();
        assert_eq!(sel.candidates.len(), 2);
        let (nu, nv) = sel.model.orders();
        assert_eq!(nu, 3);
        assert!(nv >= 2);
    }
}
