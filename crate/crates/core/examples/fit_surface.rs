//! Full fit of a noisy Rosenbrock patch with automatic order growth.
//!
//! cargo run --release --example fit_surface
use bezfit::sim::{make_dataset, ExperimentSpec};
use bezfit::{fit_surface, FitSettings, OrderPolicy, PointCloud};

fn main() -> bezfit::Result<()> {
    let spec = ExperimentSpec { n_tr: 300, sigma2_y: 1e-3, seed: 4, ..Default::default() };
    let cloud = PointCloud::unweighted(make_dataset(&spec, 0)?.x_tr)?;

    let (model, trace) = fit_surface(&cloud, &FitSettings::default())?;
    println!("iter  orders   sigma2       t");
    for r in &trace.records {
        println!("{:>4}  ({}, {})   {:.4e}  {:.1}", r.iteration, r.n_u, r.n_v, r.sigma2, r.t);
    }
    println!("selected {:?} after {} iterations", model.orders(), trace.iterations());

    let fixed = FitSettings { orders: OrderPolicy::Fixed(1, 1), ..Default::default() };
    let (bilinear, _) = fit_surface(&cloud, &fixed)?;
    println!("bilinear sigma2 = {:.4e}, auto sigma2 = {:.4e}", bilinear.sigma2, model.sigma2);
    Ok(())
}
