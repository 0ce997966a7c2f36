//! Alternating minimization: foot-point projection of every point followed
//! by a control-point solve that may raise the surface order.

use std::time::Instant;

use nalgebra::{DMatrix, Vector3};

use crate::bezier::Vec3;
use crate::control::{center_cloud, regularized_objective, translate_surface, weighted_objective, DEFAULT_LAMBDA};
use crate::error::{Error, Result};
use crate::projection::{project_all, ProjectionSettings};
use crate::selection::{fit_fixed_order, mdl_select_detailed, FitModel};
use crate::voxel::PointCloud;

/// Ratio of the second to first singular value below which the cloud is
/// treated as collinear.
const COLLINEAR_RATIO: f64 = 1e-10;

/// How surface orders evolve across iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderPolicy {
    /// Start at (1, 1) and let the BIC raise orders.
    Auto,
    /// Keep the given orders throughout.
    Fixed(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSettings {
    pub max_outer_iters: usize,
    /// Stop once `|Δσ̂²| / σ̂²` drops below this.
    pub rel_sigma2_tol: f64,
    pub lambda: f64,
    pub projection: ProjectionSettings,
    /// Largest admissible `(n_u, n_v)`.
    pub order_cap: (usize, usize),
    pub orders: OrderPolicy,
    /// Project points on the rayon pool.
    pub parallel: bool,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            max_outer_iters: 10,
            rel_sigma2_tol: 1e-6,
            lambda: DEFAULT_LAMBDA,
            projection: ProjectionSettings::default(),
            order_cap: (6, 6),
            orders: OrderPolicy::Auto,
            parallel: true,
        }
    }
}

impl FitSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters < 1 {
            return Err(Error::config("max_outer_iters", "must be at least 1"));
        }
        if self.order_cap.0 < 1 || self.order_cap.1 < 1 {
            return Err(Error::config("order_cap", "caps must be at least 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("lambda", "must be a finite value >= 0"));
        }
        if !(self.rel_sigma2_tol >= 0.0) {
            return Err(Error::config("rel_sigma2_tol", "must be >= 0"));
        }
        if let OrderPolicy::Fixed(nu, nv) = self.orders {
            if nu < 1 || nv < 1 {
                return Err(Error::config("fixed_order", "orders must be at least 1"));
            }
        }
        self.projection.validate()
    }
}

/// One row of the fitting trace. Iteration 0 is the initial solve.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub n_u: usize,
    pub n_v: usize,
    pub sigma2: f64,
    pub t: f64,
    /// `f` of the selected model.
    pub f: f64,
    /// `f` before and after the projection step.
    pub f_before_projection: Option<f64>,
    pub f_after_projection: Option<f64>,
    /// `f_λ` of the previous control points at the new parameters, and of the
    /// re-solved control points at the same orders.
    pub f_lambda_before_solve: Option<f64>,
    pub f_lambda_after_solve: Option<f64>,
    pub projection_failures: usize,
    pub runaway: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitTrace {
    pub records: Vec<IterationRecord>,
}

impl FitTrace {
    /// Alternating iterations performed (excluding the initial solve).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

/// Initial `(u, v)`: coordinates along the two leading principal directions,
/// each rescaled to span `[0, 1]`. Each direction is signed so that its
/// largest-magnitude component is positive.
pub fn init_uv(cloud: &PointCloud) -> Result<(Vec<f64>, Vec<f64>)> {
    if cloud.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "need at least 3 points, got {}",
            cloud.len()
        )));
    }
    let centroid = cloud.points().iter().sum::<Vec3>() / cloud.len() as f64;
    let x0 = DMatrix::from_fn(3, cloud.len(), |r, c| cloud.points()[c][r] - centroid[r]);
    let svd = x0.svd(true, false);
    let u_mat = svd.u.as_ref().expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s0 = svd.singular_values[order[0]];
    let s1 = svd.singular_values.get(order.get(1).copied().unwrap_or(0)).copied().unwrap_or(0.0);
    if !(s0 > 0.0) || order.len() < 2 || s1 < COLLINEAR_RATIO * s0 {
        return Err(Error::DegenerateGeometry(
            "points are collinear or coincident".into(),
        ));
    }
    let axis = |k: usize| -> Vector3<f64> {
        let c = u_mat.column(order[k]);
        let col = Vector3::new(c[0], c[1], c[2]);
        let big = col.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
        if big < 0.0 {
            -col
        } else {
            col
        }
    };
    let coords = |dir: Vector3<f64>| -> Vec<f64> {
        let raw: Vec<f64> = cloud.points().iter().map(|p| (p - centroid).dot(&dir)).collect();
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        raw.iter().map(|r| (r - lo) / (hi - lo)).collect()
    };
    Ok((coords(axis(0)), coords(axis(1))))
}

/// Fits a Bézier surface to `cloud`. The returned model's surface is in the
/// cloud's own frame; `centroid` records the centering offset used.
pub fn fit_surface(cloud: &PointCloud, settings: &FitSettings) -> Result<(FitModel, FitTrace)> {
    settings.validate()?;
    let (u0, v0) = init_uv(cloud)?;
    fit_surface_from(cloud, u0, v0, settings)
}

/// [`fit_surface`] with caller-supplied initial parameters.
pub fn fit_surface_from(
    cloud: &PointCloud,
    u0: Vec<f64>,
    v0: Vec<f64>,
    settings: &FitSettings,
) -> Result<(FitModel, FitTrace)> {
    settings.validate()?;
    if cloud.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "need at least 3 points, got {}",
            cloud.len()
        )));
    }
    if u0.len() != cloud.len() || v0.len() != cloud.len() {
        return Err(Error::Dimension("initial parameters do not match the cloud".into()));
    }
    let start = Instant::now();
    let centered = center_cloud(cloud)?;
    let x = &centered.cloud;
    let lambda = settings.lambda;
    let cap = settings.order_cap;

    let select = |u: &[f64], v: &[f64], orders: (usize, usize)| -> Result<(FitModel, Option<f64>)> {
        match settings.orders {
            OrderPolicy::Fixed(nu, nv) => {
                let (m, f) = fit_fixed_order(x, u, v, nu, nv, lambda)?;
                Ok((m, Some(f)))
            }
            OrderPolicy::Auto => {
                let sel = mdl_select_detailed(x, u, v, orders.0, orders.1, lambda, cap)?;
                let same = sel
                    .candidates
                    .iter()
                    .find(|c| (c.n_u, c.n_v) == orders)
                    .and_then(|c| c.f_lambda);
                Ok((sel.model, same))
            }
        }
    };
    let initial_orders = match settings.orders {
        OrderPolicy::Auto => (1, 1),
        OrderPolicy::Fixed(nu, nv) => (nu, nv),
    };

    let wrap = |iteration: usize| move |e: Error| Error::Iteration { iteration, source: Box::new(e) };
    let (mut model, _) = select(&u0, &v0, initial_orders).map_err(wrap(0))?;
    let mut trace = FitTrace::default();
    trace.records.push(IterationRecord {
        iteration: 0,
        n_u: model.orders().0,
        n_v: model.orders().1,
        sigma2: model.sigma2,
        t: model.t,
        f: weighted_objective(x, &model.surface, &model.u, &model.v),
        f_before_projection: None,
        f_after_projection: None,
        f_lambda_before_solve: None,
        f_lambda_after_solve: None,
        projection_failures: 0,
        runaway: 0,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    });

    for iteration in 1..=settings.max_outer_iters {
        let f_before = weighted_objective(x, &model.surface, &model.u, &model.v);
        let proj = project_all(x, &model.surface, &model.u, &model.v, &settings.projection, settings.parallel)
            .map_err(wrap(iteration))?;
        for (i, e) in &proj.failures {
            log::debug!("iteration {iteration}: point {i} kept its parameters: {e}");
        }
        let f_after = weighted_objective(x, &model.surface, &proj.u, &proj.v);
        let f_lambda_before = regularized_objective(x, &model.surface, &proj.u, &proj.v, lambda);

        let previous_sigma2 = model.sigma2;
        let (next, f_lambda_after) = select(&proj.u, &proj.v, model.orders()).map_err(wrap(iteration))?;
        model = next;
        trace.records.push(IterationRecord {
            iteration,
            n_u: model.orders().0,
            n_v: model.orders().1,
            sigma2: model.sigma2,
            t: model.t,
            f: weighted_objective(x, &model.surface, &model.u, &model.v),
            f_before_projection: Some(f_before),
            f_after_projection: Some(f_after),
            f_lambda_before_solve: Some(f_lambda_before),
            f_lambda_after_solve: f_lambda_after,
            projection_failures: proj.failures.len(),
            runaway: proj.runaway,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });

        let change = (model.sigma2 - previous_sigma2).abs();
        if model.degenerate || change <= settings.rel_sigma2_tol * previous_sigma2 {
            break;
        }
    }

    model.surface = translate_surface(&model.surface, &centered.centroid);
    model.centroid = centered.centroid;
    Ok((model, trace))
}
