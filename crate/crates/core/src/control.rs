//! Closed-form control-point update for fixed location parameters:
//! `(B Λ² Bᵀ + λI) Ā = B Λ² Xᵀ`, solved in a centered frame.

use nalgebra::DMatrix;

use crate::bezier::{design_matrix, BezierSurface, Vec3};
use crate::error::{Error, Result};
use crate::voxel::PointCloud;

/// Default ridge strength, in squared units of the centered data.
pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Pivot ratio below which an unregularized system counts as singular.
const RANK_TOL: f64 = 1e-12;

/// Points translated so their unweighted mean is the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredCloud {
    pub cloud: PointCloud,
    pub centroid: Vec3,
}

pub fn center_cloud(cloud: &PointCloud) -> Result<CenteredCloud> {
    if cloud.is_empty() {
        return Err(Error::Domain("cannot center an empty cloud".into()));
    }
    let centroid = cloud.points().iter().sum::<Vec3>() / cloud.len() as f64;
    Ok(CenteredCloud {
        cloud: cloud.map_points(|p| p - centroid),
        centroid,
    })
}

/// Shifts every control point by `offset`.
pub fn translate_surface(surface: &BezierSurface, offset: &Vec3) -> BezierSurface {
    surface.translated(offset)
}

/// `f = ½ Σ w_i² ‖x_i − s(u_i, v_i)‖²`.
pub fn weighted_objective(cloud: &PointCloud, surface: &BezierSurface, u: &[f64], v: &[f64]) -> f64 {
    cloud
        .points()
        .iter()
        .zip(cloud.weights())
        .zip(u.iter().zip(v))
        .map(|((x, w), (&ui, &vi))| w * w * (x - surface.eval(ui, vi)).norm_squared())
        .sum::<f64>()
        * 0.5
}

/// `f_λ = f + (λ/2) ‖Ā‖²_F`.
pub fn regularized_objective(
    cloud: &PointCloud,
    surface: &BezierSurface,
    u: &[f64],
    v: &[f64],
    lambda: f64,
) -> f64 {
    weighted_objective(cloud, surface, u, v) + 0.5 * lambda * surface.frobenius_sq()
}

/// Normal-equation pieces `(B Λ² Bᵀ, B Λ² Xᵀ)`.
pub(crate) fn normal_equations(
    cloud: &PointCloud,
    u: &[f64],
    v: &[f64],
    n_u: usize,
    n_v: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if u.len() != cloud.len() {
        return Err(Error::Dimension(format!(
            "{} points but {} parameters",
            cloud.len(),
            u.len()
        )));
    }
    let mut bw = design_matrix(u, v, n_u, n_v)?;
    let mut xw = DMatrix::zeros(cloud.len(), 3);
    for (i, (p, &w)) in cloud.points().iter().zip(cloud.weights()).enumerate() {
        bw.column_mut(i).scale_mut(w);
        for c in 0..3 {
            xw[(i, c)] = w * p[c];
        }
    }
    let lhs = &bw * bw.transpose();
    let rhs = &bw * xw;
    Ok((lhs, rhs))
}

/// Ridge solution for the control points of orders `(n_u, n_v)`.
///
/// `cloud` must already be centered. One Cholesky factorization serves all
/// three coordinate columns.
pub fn solve_control_points(
    cloud: &PointCloud,
    u: &[f64],
    v: &[f64],
    n_u: usize,
    n_v: usize,
    lambda: f64,
) -> Result<BezierSurface> {
    if cloud.is_empty() {
        return Err(Error::Domain("cannot solve with an empty cloud".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be >= 0, got {lambda}")));
    }
    let (mut lhs, rhs) = normal_equations(cloud, u, v, n_u, n_v)?;
    let max_diag = lhs.diagonal().max();
    for i in 0..lhs.nrows() {
        lhs[(i, i)] += lambda;
    }
    let rank_deficient = |min_pivot| Error::RankDeficient { min_pivot, max_diag };
    let chol = lhs.cholesky().ok_or_else(|| rank_deficient(0.0))?;
    let min_pivot = chol.l_dirty().diagonal().iter().map(|d| d * d).fold(f64::INFINITY, f64::min);
    if lambda == 0.0 && !(min_pivot > RANK_TOL * max_diag) {
        return Err(rank_deficient(min_pivot));
    }
    let a_bar = chol.solve(&rhs);
    if a_bar.iter().any(|x| !x.is_finite()) {
        return Err(rank_deficient(min_pivot));
    }
    BezierSurface::from_matrix(n_u, n_v, &a_bar)
}

/// `B Λ² (Bᵀ Ā − Xᵀ) + λ Ā`; zero at the optimum.
pub fn optimality_residual(
    cloud: &PointCloud,
    u: &[f64],
    v: &[f64],
    surface: &BezierSurface,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let (lhs, rhs) = normal_equations(cloud, u, v, surface.n_u(), surface.n_v())?;
    let a = surface.to_matrix();
    Ok(&lhs * &a - rhs + a * lambda)
}
