//! A small train/test study from a config string.
//!
//! cargo run --release --example simulation_study
use bezfit::sim::{format_results, parse_study_config, run_study};

const CONFIG: &str = "
# bilinear vs automatic orders on both latent surfaces
surface = plane, rosenbrock
n_tr = 100
sigma2_y = 1e-3, 1e-2
mode = auto, fixed(1,1)
trials = 5
seed = 11
";

fn main() -> bezfit::Result<()> {
    let specs = parse_study_config(CONFIG)?;
    println!("{} experiment specs", specs.len());
    let rows = run_study(&specs)?;
    print!("{}", format_results(&rows));
    Ok(())
}
