//! Comparing candidate orders with the BIC statistic.
//!
//! cargo run --example order_selection
use bezfit::control::center_cloud;
use bezfit::fit::init_uv;
use bezfit::selection::{bic_statistic, mdl_select_detailed, param_count};
use bezfit::sim::{make_dataset, ExperimentSpec};
use bezfit::PointCloud;

fn main() -> bezfit::Result<()> {
    let d = param_count(100, 3, 3);
    let b = bic_statistic(1e-2, d, 100)?;
    println!("n_x = 100, orders (3, 3): d = {d}, t = {:.3}", b.t);

    let spec = ExperimentSpec { n_tr: 200, sigma2_y: 1e-4, ..Default::default() };
    let data = make_dataset(&spec, 0)?;
    let cloud = center_cloud(&PointCloud::unweighted(data.x_tr)?)?.cloud;
    let (u, v) = init_uv(&cloud)?;

    // one selection step from each starting order, parameters held fixed
    for (nu, nv) in [(1, 1), (2, 2), (3, 3)] {
        let sel = mdl_select_detailed(&cloud, &u, &v, nu, nv, 1e-3, (6, 6))?;
        for c in &sel.candidates {
            match &c.outcome {
                Ok(m) => println!("  ({}, {}): sigma2 = {:.3e}, t = {:.1}", c.n_u, c.n_v, m.sigma2, m.t),
                Err(e) => println!("  ({}, {}): {e}", c.n_u, c.n_v),
            }
        }
        println!("from ({nu}, {nv}) keep {:?}", sel.model.orders());
    }
    Ok(())
}
