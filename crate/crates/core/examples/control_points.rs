//! Ridge solve for control points at fixed parameters.
//!
//! cargo run --example control_points
use bezfit::control::{center_cloud, optimality_residual, solve_control_points};
use bezfit::{BezierSurface, Error, PointCloud, Vec3};

fn main() -> bezfit::Result<()> {
    let truth = BezierSurface::from_flat(
        2,
        1,
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.5, 0.0, 0.4),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.2),
            Vec3::new(0.5, 1.0, 0.6),
            Vec3::new(1.0, 1.0, 0.2),
        ],
    )?;
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for k in 0..49 {
        u.push((k % 7) as f64 / 6.0);
        v.push((k / 7) as f64 / 6.0);
    }
    let pts = u.iter().zip(&v).map(|(&a, &b)| truth.eval(a, b)).collect();
    let centered = center_cloud(&PointCloud::unweighted(pts)?)?;

    for lambda in [0.0, 1e-3, 1e-1] {
        let s = solve_control_points(&centered.cloud, &u, &v, 2, 1, lambda)?;
        let err = s
            .flat()
            .iter()
            .zip(truth.flat())
            .map(|(a, b)| (a + centered.centroid - b).norm())
            .fold(0.0, f64::max);
        let r = optimality_residual(&centered.cloud, &u, &v, &s, lambda)?;
        println!("lambda = {lambda:<6} max control point error {err:.2e}, optimality residual {:.1e}", r.amax());
    }

    // more coefficients than points without regularization
    let few = PointCloud::unweighted(centered.cloud.points()[..4].to_vec())?;
    match solve_control_points(&few, &u[..4], &v[..4], 3, 3, 0.0) {
        Err(e @ Error::RankDeficient { .. }) => println!("4 points, 16 control points: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
