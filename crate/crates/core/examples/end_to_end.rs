//! Occupancy grid to fitted surface: select, fit, save, reload, project.
//!
//! cargo run --release --example end_to_end
use bezfit::io::{read_surface, write_surface, SurfaceDocument};
use bezfit::projection::project_point;
use bezfit::voxel::{extract_cloud, select_points, SelectSettings, WeightMode};
use bezfit::{fit_surface, FitSettings, ProjectionSettings, Vec3, VoxelGrid};

fn main() -> bezfit::Result<()> {
    // solid below a gently curved height field
    let n = 40;
    let mut grid = VoxelGrid::filled([n; 3], 0i64)?;
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (i as f64 - 20.0, j as f64 - 20.0);
            let top = (15.0 + 0.08 * (x * x - 0.5 * y * y)).round() as usize;
            for k in 0..=top.min(n - 1) {
                grid.set([i, j, k], 1);
            }
        }
    }
    let sel = select_points(&grid, [20, 20, 15], &SelectSettings::default())?;
    let cloud = extract_cloud(&sel.region, WeightMode::InverseDistance)?;
    println!("selected {} voxels around {:?}", cloud.len(), sel.seed);

    let (model, trace) = fit_surface(&cloud, &FitSettings::default())?;
    println!("orders {:?}, sigma2 = {:.4e}, {} iterations", model.orders(), model.sigma2, trace.iterations());

    let path = std::env::temp_dir().join("bezfit-end-to-end.json");
    write_surface(&path, &SurfaceDocument::from_model(&model, &cloud)?)?;
    let doc = read_surface(&path)?;
    let s = doc.surface()?;
    println!("wrote {}", path.display());

    let q = Vec3::new(20.5, 19.5, 17.0);
    let p = project_point(&q, &s, 0.5, 0.5, &ProjectionSettings::default())?;
    let foot = s.eval(p.u, p.v);
    println!("({:.1}, {:.1}, {:.1}) -> ({:.3}, {:.3}, {:.3}) at distance {:.3}", q.x, q.y, q.z, foot.x, foot.y, foot.z, p.distance());
    Ok(())
}
