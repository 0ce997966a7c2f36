//! Bernstein basis values and a small Bézier patch.
//!
//! cargo run --example bernstein_basis
use bezfit::bezier::{basis_vector, surface_jacobian, Derivative};
use bezfit::{BezierSurface, Vec3};

fn main() -> bezfit::Result<()> {
    let n = 3;
    for &u in &[0.0, 0.25, 0.5, 1.0] {
        let b = basis_vector(u, n, Derivative::Value)?;
        let db = basis_vector(u, n, Derivative::First)?;
        println!("u = {u:<4}  b = {:.4?}  sum = {:.3}  sum(b') = {:+.1e}", b.values, b.sum(), db.sum());
    }

    // a saddle over the unit square
    let control: Vec<Vec<Vec3>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    let (x, y) = (i as f64 / 2.0, j as f64 / 2.0);
                    Vec3::new(x, y, (x - 0.5) * (y - 0.5))
                })
                .collect()
        })
        .collect();
    let s = BezierSurface::from_tensor(&control)?;
    println!("orders {:?}, {} control points", s.orders(), s.size());
    for &(u, v) in &[(0.0, 0.0), (0.5, 0.5), (0.2, 0.9)] {
        let p = s.eval(u, v);
        let j = surface_jacobian(u, v, &s);
        println!("s({u}, {v}) = [{:.4}, {:.4}, {:.4}]  ds/du = [{:.3}, {:.3}, {:.3}]", p.x, p.y, p.z, j[(0, 0)], j[(0, 1)], j[(0, 2)]);
    }
    Ok(())
}
