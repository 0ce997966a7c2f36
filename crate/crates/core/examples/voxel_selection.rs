//! Boundary detection and region growth on a solid ball.
//!
//! cargo run --example voxel_selection
use bezfit::voxel::{boundary_mask, extract_cloud, select_points, SelectSettings, WeightMode};
use bezfit::VoxelGrid;

fn main() -> bezfit::Result<()> {
    let n = 32;
    let mut grid = VoxelGrid::filled([n; 3], 0i64)?;
    let c = (n as f64 - 1.0) / 2.0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let r2 = (i as f64 - c).powi(2) + (j as f64 - c).powi(2) + (k as f64 - c).powi(2);
                if r2 <= 12.0f64.powi(2) {
                    grid.set([i, j, k], 1);
                }
            }
        }
    }
    let settings = SelectSettings::default();
    let mask = boundary_mask(&grid, settings.epsilon)?;
    println!("{} occupied voxels, {} on the boundary", grid.count_nonzero(), mask.count_nonzero());

    // an interior seed snaps to the nearest boundary voxel
    let seed = [n / 2, n / 2, n / 2 + 10];
    let sel = select_points(&grid, seed, &settings)?;
    println!("seed {:?} -> {:?} (snapped: {}), {} passes", seed, sel.seed, sel.snapped, sel.iterations);

    for (name, mode) in [("uniform", WeightMode::Uniform), ("inverse-distance", WeightMode::InverseDistance)] {
        let cloud = extract_cloud(&sel.region, mode)?;
        let w = cloud.weights();
        let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("{name:>16}: n_x = {}, weights in [{min:.3}, 1]", cloud.len());
    }
    Ok(())
}
