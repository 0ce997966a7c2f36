//! Newton projection of points onto a curved patch.
//!
//! cargo run --example foot_point_projection
use bezfit::projection::{project_all, project_point};
use bezfit::{BezierSurface, PointCloud, ProjectionSettings, Vec3};

fn main() -> bezfit::Result<()> {
    let control: Vec<Vec3> = (0..16)
        .map(|k| {
            let (x, y) = ((k % 4) as f64 / 3.0, (k / 4) as f64 / 3.0);
            Vec3::new(x, y, 0.4 * (x * x - y))
        })
        .collect();
    let s = BezierSurface::from_flat(3, 3, control)?;
    let settings = ProjectionSettings::default();

    let x = s.eval(0.3, 0.7) + Vec3::new(0.0, 0.0, 0.05);
    let p = project_point(&x, &s, 0.5, 0.5, &settings)?;
    println!(
        "foot point (u, v) = ({:.5}, {:.5}), distance {:.5}, {} Newton steps, converged {}",
        p.u, p.v, p.distance(), p.iterations, p.converged
    );

    let pts: Vec<Vec3> = (0..400)
        .map(|k| {
            let (u, v) = ((k % 20) as f64 / 19.0, (k / 20) as f64 / 19.0);
            s.eval(u, v) + Vec3::new(0.0, 0.0, 0.01 * ((k * 7919) % 13) as f64 / 13.0)
        })
        .collect();
    let cloud = PointCloud::unweighted(pts)?;
    let start = vec![0.5; cloud.len()];
    let out = project_all(&cloud, &s, &start, &start, &settings, true)?;
    let serial = project_all(&cloud, &s, &start, &start, &settings, false)?;
    println!(
        "{} points: {} unconverged, {} runaway, parallel == sequential: {}",
        cloud.len(),
        out.unconverged,
        out.runaway,
        out.u == serial.u && out.v == serial.v
    );
    Ok(())
}
