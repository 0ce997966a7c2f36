//! Command-line front end. The binary only parses arguments and calls [`run`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bezier::Vec3;
use crate::error::{Error, Result};
use crate::fit::{fit_surface, FitSettings, FitTrace, OrderPolicy};
use crate::io::{read_cloud, read_surface, read_vox, write_cloud, write_surface, SurfaceDocument};
use crate::projection::{project_point, ProjectionSettings};
use crate::sim::{format_long, format_results, parse_study_config, read_study_config, run_study};
use crate::voxel::{extract_cloud, select_points, SelectSettings, WeightMode};

/// Study configs shipped with the crate, addressable by name.
pub const BUNDLED_CONFIGS: &[(&str, &str)] = &[
    ("noise_trends", include_str!("../configs/noise_trends.conf")),
    ("plane_orders", include_str!("../configs/plane_orders.conf")),
    ("rosenbrock_orders", include_str!("../configs/rosenbrock_orders.conf")),
];

#[derive(Debug, Parser)]
#[command(name = "bezfit", version, about = "Local Bézier surface fitting to point clouds")]
pub struct Cli {
    /// Seed for all randomness (overrides a study config's `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select boundary points near a seed in a VOX1 occupancy grid.
    Select(SelectArgs),
    /// Fit a surface to a point cloud.
    Fit(FitArgs),
    /// Project points onto a fitted surface.
    Project(ProjectArgs),
    /// Run a simulation study.
    Study(StudyArgs),
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Binary occupancy grid (VOX1).
    pub grid: PathBuf,
    /// Seed voxel as `i,j,k`.
    #[arg(long, value_parser = parse_triple::<usize>, conflicts_with = "at", required_unless_present = "at")]
    pub voxel: Option<[usize; 3]>,
    /// Seed as a physical point `x,y,z`.
    #[arg(long, value_parser = parse_triple::<f64>, allow_negative_numbers = true)]
    pub at: Option<[f64; 3]>,
    /// Output point cloud (x,y,z,w CSV).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Growth kernel edge length (odd); also the seed snap radius.
    #[arg(long, default_value_t = 3)]
    pub kernel_edge: usize,
    /// Growth passes.
    #[arg(long, default_value_t = 7)]
    pub max_iters: usize,
    /// Exterior-neighbor threshold for boundary voxels.
    #[arg(long, default_value_t = 9)]
    pub epsilon: i64,
    /// Point weights: `uniform`, `inverse-distance`, or a VOX1 weight-grid path.
    #[arg(long, default_value = "uniform")]
    pub weights: String,
}

#[derive(Debug, Args)]
pub struct ProjectionArgs {
    #[arg(long, default_value_t = 20)]
    pub max_newton_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub armijo_c: f64,
    #[arg(long, default_value_t = 0.5)]
    pub backtrack_factor: f64,
    #[arg(long, default_value_t = 50)]
    pub max_backtracks: usize,
}

impl ProjectionArgs {
    fn settings(&self) -> ProjectionSettings {
        ProjectionSettings {
            max_newton_iters: self.max_newton_iters,
            grad_tol: self.grad_tol,
            armijo_c: self.armijo_c,
            backtrack_factor: self.backtrack_factor,
            max_backtracks: self.max_backtracks,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input point cloud (x,y,z,w CSV).
    pub cloud: PathBuf,
    /// Output surface document (JSON).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Optional per-iteration trace (CSV).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub max_outer_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_sigma2_tol: f64,
    /// Ridge strength λ.
    #[arg(long, short = 'l', default_value_t = 1e-3)]
    pub lambda: f64,
    /// Largest orders `n_u,n_v`.
    #[arg(long, value_parser = parse_pair, default_value = "6,6")]
    pub order_cap: (usize, usize),
    /// Freeze orders at `n_u,n_v` instead of selecting them.
    #[arg(long, value_parser = parse_pair)]
    pub fixed_order: Option<(usize, usize)>,
    /// Project points on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub projection: ProjectionArgs,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Surface document written by `fit`.
    pub surface: PathBuf,
    /// Points to project (x,y,z,w CSV).
    pub cloud: PathBuf,
    /// Output table (CSV: index,u,v,distance,converged,status).
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub projection: ProjectionArgs,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Config file, or the name of a bundled config (noise_trends, plane_orders, rosenbrock_orders).
    pub config: String,
    /// Aggregate results table (CSV).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Per-trial long-format table (CSV).
    #[arg(long)]
    pub long: Option<PathBuf>,
    /// Override the config's trial count.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Record wall time in the `ms` column (makes outputs run-dependent).
    #[arg(long)]
    pub record_timing: bool,
}

fn parse_list<T: std::str::FromStr>(s: &str, n: usize) -> std::result::Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated values, got `{s}`"));
    }
    parts
        .iter()
        .map(|p| p.parse().map_err(|_| format!("cannot parse `{p}`")))
        .collect()
}

fn parse_triple<T: std::str::FromStr + Copy>(s: &str) -> std::result::Result<[T; 3], String> {
    let v = parse_list::<T>(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let v = parse_list::<usize>(s, 2)?;
    Ok((v[0], v[1]))
}

/// Process exit code for an error: 2 usage/parse, 3 numerical, 4 nothing selected.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::EmptySelection | Error::NoSurfaceFound { .. } => 4,
        Error::NumericalFailure { .. } | Error::RankDeficient { .. } | Error::DegenerateGeometry(_) => 3,
        _ => 2,
    }
}

/// Parses `args` and runs the command, writing the report to `out` and
/// errors to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{e}");
            return 2;
        }
        Err(e) => {
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let result = match &cli.command {
        Command::Select(a) => cmd_select(a, out),
        Command::Fit(a) => cmd_fit(a, out),
        Command::Project(a) => cmd_project(a, out),
        Command::Study(a) => cmd_study(a, cli.seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn report(out: &mut dyn Write, text: std::fmt::Arguments<'_>) {
    let _ = out.write_fmt(text);
}

pub fn cmd_select(args: &SelectArgs, out: &mut dyn Write) -> Result<i32> {
    let grid = read_vox::<i64>(&args.grid)?;
    if !grid.is_binary() {
        return Err(Error::parse(args.grid.display().to_string(), 1, "occupancy values must be 0 or 1"));
    }
    let seed = match (args.voxel, args.at) {
        (Some(v), _) => v,
        (None, Some(p)) => grid
            .voxel_of(&Vec3::new(p[0], p[1], p[2]))
            .ok_or_else(|| Error::Domain(format!("point {p:?} lies outside the grid")))?,
        (None, None) => return Err(Error::config("voxel", "a seed voxel or point is required")),
    };
    let settings = SelectSettings {
        kernel_edge: args.kernel_edge,
        max_iters: args.max_iters,
        epsilon: args.epsilon,
    };
    let sel = select_points(&grid, seed, &settings)?;
    let external;
    let mode = match args.weights.as_str() {
        "uniform" => WeightMode::Uniform,
        "inverse-distance" => WeightMode::InverseDistance,
        path => {
            external = read_vox::<f64>(Path::new(path))?;
            WeightMode::ExternalMap(&external)
        }
    };
    let cloud = extract_cloud(&sel.region, mode)?;
    write_cloud(&args.output, &cloud)?;
    report(
        out,
        format_args!(
            "n_x = {}\ngrowth iterations = {}\nseed = {:?}{}\n",
            cloud.len(),
            sel.iterations,
            sel.seed,
            if sel.snapped { " (snapped)" } else { "" }
        ),
    );
    if sel.truncated {
        report(out, format_args!("warning: region touches the grid boundary\n"));
    }
    Ok(0)
}

fn format_trace(trace: &FitTrace) -> String {
    let opt = |x: Option<f64>| x.map_or("NA".to_string(), |v| format!("{v:e}"));
    let mut s = String::from(
        "iteration,n_u,n_v,sigma2,t,f,f_before_projection,f_after_projection,f_lambda_before_solve,f_lambda_after_solve,projection_failures,runaway\n",
    );
    for r in &trace.records {
        s.push_str(&format!(
            "{},{},{},{:e},{:e},{:e},{},{},{},{},{},{}\n",
            r.iteration,
            r.n_u,
            r.n_v,
            r.sigma2,
            r.t,
            r.f,
            opt(r.f_before_projection),
            opt(r.f_after_projection),
            opt(r.f_lambda_before_solve),
            opt(r.f_lambda_after_solve),
            r.projection_failures,
            r.runaway
        ));
    }
    s
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<i32> {
    let cloud = read_cloud(&args.cloud)?;
    let settings = FitSettings {
        max_outer_iters: args.max_outer_iters,
        rel_sigma2_tol: args.rel_sigma2_tol,
        lambda: args.lambda,
        projection: args.projection.settings(),
        order_cap: args.order_cap,
        orders: args
            .fixed_order
            .map_or(OrderPolicy::Auto, |(u, v)| OrderPolicy::Fixed(u, v)),
        parallel: !args.sequential,
    };
    let start = Instant::now();
    let (model, trace) = fit_surface(&cloud, &settings)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    write_surface(&args.output, &SurfaceDocument::from_model(&model, &cloud)?)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, format_trace(&trace)).map_err(|e| Error::io(path, e))?;
    }
    let (nu, nv) = model.orders();
    report(
        out,
        format_args!(
            "orders = ({nu}, {nv})\nsigma2 = {:e}\nt = {}\niterations = {}\nwall time = {ms:.1} ms\n",
            model.sigma2,
            model.t,
            trace.iterations()
        ),
    );
    Ok(0)
}

/// Start for projecting `x`: the stored parameter or coarse grid node whose
/// surface point is nearest.
fn initial_guess(x: &Vec3, doc_params: &[(f64, f64)], surface: &crate::bezier::BezierSurface) -> (f64, f64) {
    const GRID: usize = 10;
    let grid = (0..=GRID).flat_map(|i| (0..=GRID).map(move |j| (i as f64 / GRID as f64, j as f64 / GRID as f64)));
    doc_params
        .iter()
        .copied()
        .chain(grid)
        .map(|(u, v)| ((x - surface.eval(u, v)).norm_squared(), (u, v)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, uv)| uv)
        .unwrap_or((0.5, 0.5))
}

pub fn cmd_project(args: &ProjectArgs, out: &mut dyn Write) -> Result<i32> {
    let doc = read_surface(&args.surface)?;
    let surface = doc.surface()?;
    let cloud = read_cloud(&args.cloud)?;
    if cloud.is_empty() {
        return Err(Error::config("cloud", "no points to project"));
    }
    let settings = args.projection.settings();
    settings.validate()?;
    let (du, dv) = doc.params();
    let params: Vec<(f64, f64)> = du.into_iter().zip(dv).collect();
    let mut table = String::from("index,u,v,distance,converged,status\n");
    let mut ok = 0usize;
    for (i, x) in cloud.points().iter().enumerate() {
        let (u0, v0) = initial_guess(x, &params, &surface);
        match project_point(x, &surface, u0, v0, &settings) {
            Ok(p) => {
                ok += 1;
                table.push_str(&format!(
                    "{i},{:?},{:?},{:?},{},{}\n",
                    p.u,
                    p.v,
                    p.distance(),
                    p.converged,
                    if p.runaway { "runaway" } else { "ok" }
                ));
            }
            Err(e) => {
                log::warn!("point {i}: {e}");
                table.push_str(&format!("{i},NA,NA,NA,false,failed\n"));
            }
        }
    }
    std::fs::write(&args.output, table).map_err(|e| Error::io(&args.output, e))?;
    report(out, format_args!("projected {ok} of {} points\n", cloud.len()));
    Ok(if ok > 0 { 0 } else { 3 })
}

pub fn cmd_study(args: &StudyArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<i32> {
    let path = Path::new(&args.config);
    let mut specs = match BUNDLED_CONFIGS.iter().find(|(name, _)| *name == args.config) {
        Some((_, text)) if !path.exists() => parse_study_config(text)?,
        _ => read_study_config(path)?,
    };
    for s in &mut specs {
        if let Some(seed) = seed {
            s.seed = seed;
        }
        if let Some(t) = args.trials {
            s.trials = t;
        }
        s.record_timing |= args.record_timing;
        s.validate()?;
    }
    let rows = run_study(&specs)?;
    let table = format_results(&rows);
    std::fs::write(&args.output, &table).map_err(|e| Error::io(&args.output, e))?;
    if let Some(long) = &args.long {
        std::fs::write(long, format_long(&rows)).map_err(|e| Error::io(long, e))?;
    }
    report(out, format_args!("{table}"));
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::EmptySelection), 4);
        assert_eq!(exit_code(&Error::NoSurfaceFound { seed: [0; 3], radius: 3 }), 4);
        let wrapped = Error::Iteration {
            iteration: 2,
            source: Box::new(Error::RankDeficient { min_pivot: 0.0, max_diag: 1.0 }),
        };
        assert_eq!(exit_code(&wrapped), 3);
        assert_eq!(exit_code(&Error::config("x", "y")), 2);
    }

    #[test]
    fn bundled_configs_parse() {
        for (name, text) in BUNDLED_CONFIGS {
            assert!(!parse_study_config(text).unwrap().is_empty(), "{name}");
        }
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["bezfit", "fit"], &mut Vec::new(), &mut Vec::new()), 2);
        assert_eq!(run(["bezfit", "select", "g.vox", "-o", "c.csv"], &mut Vec::new(), &mut Vec::new()), 2);
    }

    #[test]
    fn help_shows_module_defaults() {
        let mut buf = Vec::new();
        assert_eq!(run(["bezfit", "fit", "--help"], &mut buf, &mut Vec::new()), 0);
        let help = String::from_utf8(buf).unwrap();
        let d = FitSettings::default();
        assert!(help.contains(&format!("[default: {}]", d.lambda)));
        assert!(help.contains(&format!("[default: {}]", d.max_outer_iters)));
        assert!(help.contains(&format!("[default: {}]", d.projection.grad_tol)));
        assert!(help.contains(&format!("[default: {},{}]", d.order_cap.0, d.order_cap.1)));
    }
}
