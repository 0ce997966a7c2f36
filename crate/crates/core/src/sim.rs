//! Synthetic train/test studies on known latent surfaces.
//!
//! A study is a list of [`ExperimentSpec`]s. Each spec runs `trials`
//! independent trials; trial `k` draws from its own ChaCha stream derived
//! from `(seed, k)`, so results do not depend on thread scheduling. The
//! rotation applied to the latent surface comes from stream 0 of the same
//! seed and is therefore shared by every trial and every spec with that seed.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{Matrix3, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::bezier::Vec3;
use crate::error::{Error, Result};
use crate::fit::{fit_surface, init_uv, FitSettings, OrderPolicy};
use crate::projection::{project_point, ProjectionSettings};
use crate::selection::{compare_models, FitModel};
use crate::voxel::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    /// `z = 0` over `[-1, 1]²`.
    Plane,
    /// `z = α[(a − x)² + b(y − x²)²]`.
    Rosenbrock,
}

impl FromStr for SurfaceKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plane" => Ok(Self::Plane),
            "rosenbrock" => Ok(Self::Rosenbrock),
            _ => Err(format!("unknown surface `{s}` (plane | rosenbrock)")),
        }
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plane => "plane",
            Self::Rosenbrock => "rosenbrock",
        })
    }
}

/// Shape parameters of a latent surface, before rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceConfig {
    pub kind: SurfaceKind,
    /// `[x_min, x_max, y_min, y_max]`.
    pub domain: [f64; 4],
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
}

impl SurfaceConfig {
    pub fn plane() -> Self {
        Self {
            kind: SurfaceKind::Plane,
            domain: [-1.0, 1.0, -1.0, 1.0],
            alpha: 1.0,
            a: 1.0,
            b: 100.0,
        }
    }

    /// Scaled so the height range over the domain is of order one.
    pub fn rosenbrock() -> Self {
        Self {
            kind: SurfaceKind::Rosenbrock,
            domain: [-1.0, 1.0, -0.5, 1.5],
            alpha: 0.01,
            a: 1.0,
            b: 100.0,
        }
    }

    pub fn default_for(kind: SurfaceKind) -> Self {
        match kind {
            SurfaceKind::Plane => Self::plane(),
            SurfaceKind::Rosenbrock => Self::rosenbrock(),
        }
    }

    pub fn height(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            SurfaceKind::Plane => 0.0,
            SurfaceKind::Rosenbrock => {
                let p = self.a - x;
                let q = y - x * x;
                self.alpha * (p * p + self.b * q * q)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let [x0, x1, y0, y1] = self.domain;
        if !(x0 < x1 && y0 < y1) || self.domain.iter().any(|d| !d.is_finite()) {
            return Err(Error::config("domain", "must satisfy x_min < x_max and y_min < y_max"));
        }
        if !(self.alpha.is_finite() && self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::config("alpha", "surface parameters must be finite"));
        }
        Ok(())
    }
}

/// A latent surface with its rigid rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSurface {
    pub config: SurfaceConfig,
    pub rotation: Matrix3<f64>,
}

impl LatentSurface {
    pub fn new(config: SurfaceConfig, rotation: Matrix3<f64>) -> Result<Self> {
        config.validate()?;
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if ortho > 1e-12 || (rotation.determinant() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("rotation must be orthonormal with det +1".into()));
        }
        Ok(Self { config, rotation })
    }

    /// Unrotated latent point at `(x, y)`.
    pub fn local(&self, x: f64, y: f64) -> Vec3 {
        Vec3::new(x, y, self.config.height(x, y))
    }

    pub fn eval(&self, x: f64, y: f64) -> Vec3 {
        self.rotation * self.local(x, y)
    }
}

/// Rotated latent points at each `(x, y)`.
pub fn latent_eval(surface: &LatentSurface, coords: &[(f64, f64)]) -> Vec<Vec3> {
    coords.iter().map(|&(x, y)| surface.eval(x, y)).collect()
}

/// Orthonormalized Gaussian matrix, signs fixed so `R` has positive diagonal
/// in its QR factor and determinant `+1`.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    let g = Matrix3::from_fn(|_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..3 {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(2).neg_mut();
    }
    q
}

/// Order handling in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Online BIC order growth.
    Auto,
    /// Orders frozen at `(n_u, n_v)`.
    Fixed(usize, usize),
    /// Every fixed order up to the cap; keep the best statistic.
    BruteForce,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        match s {
            "auto" => return Ok(Self::Auto),
            "brute" | "brute-force" => return Ok(Self::BruteForce),
            _ => {}
        }
        let inner = s
            .strip_prefix("fixed(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("unknown mode `{s}` (auto | fixed(n_u,n_v) | brute-force)"))?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [a, b] => {
                let nu = a.parse().map_err(|_| format!("bad order `{a}`"))?;
                let nv = b.parse().map_err(|_| format!("bad order `{b}`"))?;
                Ok(Self::Fixed(nu, nv))
            }
            _ => Err(format!("fixed mode needs two orders, got `{inner}`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(a, b) => write!(f, "fixed({a},{b})"),
            Self::BruteForce => f.write_str("brute-force"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub surface: SurfaceConfig,
    pub n_tr: usize,
    pub n_te: usize,
    pub sigma2_y: f64,
    pub seed: u64,
    pub trials: usize,
    pub mode: Mode,
    pub fit: FitSettings,
    /// Report wall time; off by default so outputs are reproducible.
    pub record_timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            surface: SurfaceConfig::rosenbrock(),
            n_tr: 100,
            n_te: 200,
            sigma2_y: 1e-2,
            seed: 0,
            trials: 20,
            mode: Mode::Auto,
            fit: FitSettings { parallel: false, ..FitSettings::default() },
            record_timing: false,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.surface.validate()?;
        if self.n_tr < 3 {
            return Err(Error::config("n_tr", "must be at least 3"));
        }
        if self.n_te < 1 {
            return Err(Error::config("n_te", "must be positive"));
        }
        if !(self.sigma2_y >= 0.0 && self.sigma2_y.is_finite()) {
            return Err(Error::config("sigma2_y", "must be a finite value >= 0"));
        }
        if self.trials < 1 {
            return Err(Error::config("trials", "must be positive"));
        }
        if let Mode::Fixed(nu, nv) = self.mode {
            if nu < 1 || nv < 1 {
                return Err(Error::config("mode", "fixed orders must be at least 1"));
            }
        }
        self.fit.validate()
    }

    /// The spec's shared latent surface.
    pub fn latent(&self) -> Result<LatentSurface> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        LatentSurface::new(self.surface, random_rotation(&mut rng))
    }

    fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64 + 1);
        rng
    }
}

/// Training and test samples of one trial. Columns are points.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x_tr: Vec<Vec3>,
    pub s_tr: Vec<Vec3>,
    pub s_te: Vec<Vec3>,
}

/// Draws `n_tr + n_te` uniform latent points, keeps the first `n_tr` for
/// training (with additive noise) and the rest for testing.
pub fn make_dataset(spec: &ExperimentSpec, trial: usize) -> Result<Dataset> {
    spec.validate()?;
    let latent = spec.latent()?;
    let mut rng = spec.trial_rng(trial);
    let [x0, x1, y0, y1] = spec.surface.domain;
    let coords: Vec<(f64, f64)> = (0..spec.n_tr + spec.n_te)
        .map(|_| (rng.random_range(x0..x1), rng.random_range(y0..y1)))
        .collect();
    let all = latent_eval(&latent, &coords);
    let s_te = all[spec.n_tr..].to_vec();
    let s_tr = all[..spec.n_tr].to_vec();
    let noise = Normal::new(0.0, spec.sigma2_y.sqrt())
        .map_err(|e| Error::config("sigma2_y", e.to_string()))?;
    let x_tr = s_tr
        .iter()
        .map(|s| s + Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng)))
        .collect();
    Ok(Dataset { x_tr, s_tr, s_te })
}

/// Train/test metrics of one fitted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub sigma2_tr: f64,
    pub sigma2_te: f64,
    /// Test points whose projection failed; excluded from `sigma2_te`.
    pub failures: usize,
}

/// `σ̂²_TR` from the model's own parameters and `σ̂²_TE` from projecting each
/// test point. Each test projection starts from the parameters of the
/// training point whose fitted foot point is nearest.
pub fn eval_fit(
    model: &FitModel,
    x_tr: &[Vec3],
    s_te: &[Vec3],
    settings: &ProjectionSettings,
) -> Result<Evaluation> {
    if model.u.len() != x_tr.len() {
        return Err(Error::Dimension("model parameters do not match the training set".into()));
    }
    let feet: Vec<Vec3> = model.u.iter().zip(&model.v).map(|(&u, &v)| model.surface.eval(u, v)).collect();
    let sigma2_tr = x_tr
        .iter()
        .zip(&feet)
        .map(|(x, s)| (x - s).norm_squared())
        .sum::<f64>()
        / (3 * x_tr.len()) as f64;

    let mut sum = 0.0;
    let mut ok = 0usize;
    for p in s_te {
        let nearest = feet
            .iter()
            .enumerate()
            .min_by(|a, b| (p - a.1).norm_squared().total_cmp(&(p - b.1).norm_squared()))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Dimension("empty training set".into()))?;
        match project_point(p, &model.surface, model.u[nearest], model.v[nearest], settings) {
            Ok(proj) => {
                sum += 2.0 * proj.g;
                ok += 1;
            }
            Err(e) => log::debug!("test projection failed: {e}"),
        }
    }
    let sigma2_te = if ok > 0 { sum / (3 * ok) as f64 } else { f64::NAN };
    Ok(Evaluation {
        sigma2_tr,
        sigma2_te,
        failures: s_te.len() - ok,
    })
}

fn fit_for_mode(cloud: &PointCloud, spec: &ExperimentSpec) -> Result<(FitModel, usize)> {
    match spec.mode {
        Mode::Auto => {
            let settings = FitSettings { orders: OrderPolicy::Auto, ..spec.fit };
            fit_surface(cloud, &settings).map(|(m, t)| (m, t.iterations()))
        }
        Mode::Fixed(nu, nv) => {
            let settings = FitSettings { orders: OrderPolicy::Fixed(nu, nv), ..spec.fit };
            fit_surface(cloud, &settings).map(|(m, t)| (m, t.iterations()))
        }
        Mode::BruteForce => {
            let (cu, cv) = spec.fit.order_cap;
            let (u0, v0) = init_uv(cloud)?;
            let mut best: Option<(FitModel, usize)> = None;
            let mut last_err = None;
            for nu in 1..=cu {
                for nv in 1..=cv {
                    let settings = FitSettings { orders: OrderPolicy::Fixed(nu, nv), ..spec.fit };
                    match crate::fit::fit_surface_from(cloud, u0.clone(), v0.clone(), &settings) {
                        Ok((m, t)) => {
                            let better = best
                                .as_ref()
                                .is_none_or(|(b, _)| compare_models(&m, b) == std::cmp::Ordering::Greater);
                            if better {
                                best = Some((m, t.iterations()));
                            }
                        }
                        Err(e) => last_err = Some(e),
                    }
                }
            }
            best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Domain("no orders evaluated".into())))
        }
    }
}

/// Outcome of one trial. `error` is set when the fit failed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub iterations: usize,
    pub n_u: usize,
    pub n_v: usize,
    pub sigma2_tr: f64,
    pub sigma2_te: f64,
    pub ms: f64,
    pub projection_failures: usize,
    pub error: Option<String>,
}

impl TrialOutcome {
    pub fn size(&self) -> usize {
        (self.n_u + 1) * (self.n_v + 1)
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

pub fn run_trial(spec: &ExperimentSpec, trial: usize) -> Result<TrialOutcome> {
    let data = make_dataset(spec, trial)?;
    let cloud = PointCloud::unweighted(data.x_tr.clone())?;
    let start = Instant::now();
    let fitted = fit_for_mode(&cloud, spec);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let ms = if spec.record_timing { ms } else { f64::NAN };
    let failed = |msg: String| TrialOutcome {
        trial,
        iterations: 0,
        n_u: 0,
        n_v: 0,
        sigma2_tr: f64::NAN,
        sigma2_te: f64::NAN,
        ms,
        projection_failures: 0,
        error: Some(msg),
    };
    let (model, iterations) = match fitted {
        Ok(v) => v,
        Err(e) => return Ok(failed(e.to_string())),
    };
    let eval = eval_fit(&model, &data.x_tr, &data.s_te, &spec.fit.projection)?;
    if eval.failures == data.s_te.len() {
        return Ok(failed("every test projection failed".into()));
    }
    let (n_u, n_v) = model.orders();
    Ok(TrialOutcome {
        trial,
        iterations,
        n_u,
        n_v,
        sigma2_tr: eval.sigma2_tr,
        sigma2_te: eval.sigma2_te,
        ms,
        projection_failures: eval.failures,
        error: None,
    })
}

/// Means over the successful trials of one spec.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub iterations: f64,
    pub size: f64,
    pub sigma2_tr: f64,
    pub sigma2_te: f64,
    /// NaN unless timing was recorded.
    pub ms: f64,
    /// Trials that failed and were excluded.
    pub failures: usize,
    pub projection_failures: usize,
}

impl ExperimentResult {
    pub fn from_trials(trials: &[TrialOutcome]) -> Self {
        let good: Vec<&TrialOutcome> = trials.iter().filter(|t| t.ok()).collect();
        let n = good.len() as f64;
        let mean = |f: &dyn Fn(&TrialOutcome) -> f64| good.iter().map(|t| f(t)).sum::<f64>() / n;
        Self {
            iterations: mean(&|t| t.iterations as f64),
            size: mean(&|t| t.size() as f64),
            sigma2_tr: mean(&|t| t.sigma2_tr),
            sigma2_te: mean(&|t| t.sigma2_te),
            ms: mean(&|t| t.ms),
            failures: trials.len() - good.len(),
            projection_failures: good.iter().map(|t| t.projection_failures).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub spec: ExperimentSpec,
    pub result: ExperimentResult,
    pub trials: Vec<TrialOutcome>,
}

/// Runs every spec; trials run on the rayon pool.
pub fn run_study(specs: &[ExperimentSpec]) -> Result<Vec<StudyRow>> {
    for s in specs {
        s.validate()?;
    }
    specs
        .iter()
        .map(|spec| {
            let trials = (0..spec.trials)
                .into_par_iter()
                .map(|k| run_trial(spec, k))
                .collect::<Result<Vec<_>>>()?;
            for t in trials.iter().filter(|t| !t.ok()) {
                log::warn!("{} trial {}: {}", spec.mode, t.trial, t.error.as_deref().unwrap_or(""));
            }
            Ok(StudyRow {
                spec: spec.clone(),
                result: ExperimentResult::from_trials(&trials),
                trials,
            })
        })
        .collect()
}

fn sci(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else {
        format!("{x:.6e}")
    }
}

/// Aggregate table, one row per spec.
pub fn format_results(rows: &[StudyRow]) -> String {
    let mut out = String::from("surface,mode,n_TR,sigma2_Y,iter,size,sigma2_TR,sigma2_TE,ms,failures,projection_failures\n");
    for r in rows {
        let s = &r.spec;
        let m = &r.result;
        let _ = writeln!(
            out,
            "{},{},{},{:e},{:.4},{:.4},{},{},{},{},{}",
            s.surface.kind,
            s.mode,
            s.n_tr,
            s.sigma2_y,
            m.iterations,
            m.size,
            sci(m.sigma2_tr),
            sci(m.sigma2_te),
            if m.ms.is_nan() { "NA".into() } else { format!("{:.3}", m.ms) },
            m.failures,
            m.projection_failures
        );
    }
    out
}

/// One row per trial, for plotting.
pub fn format_long(rows: &[StudyRow]) -> String {
    let mut out =
        String::from("surface,mode,n_TR,sigma2_Y,trial,iter,n_u,n_v,size,sigma2_TR,sigma2_TE,ms,projection_failures,error\n");
    for r in rows {
        let s = &r.spec;
        for t in &r.trials {
            let _ = writeln!(
                out,
                "{},{},{},{:e},{},{},{},{},{},{},{},{},{},{}",
                s.surface.kind,
                s.mode,
                s.n_tr,
                s.sigma2_y,
                t.trial,
                t.iterations,
                t.n_u,
                t.n_v,
                t.size(),
                sci(t.sigma2_tr),
                sci(t.sigma2_te),
                if t.ms.is_nan() { "NA".into() } else { format!("{:.3}", t.ms) },
                t.projection_failures,
                t.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
            );
        }
    }
    out
}

/// Splits on commas that are not inside parentheses.
fn split_list(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts
}

fn parse_one<T: FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::config(field, format!("cannot parse `{value}`: {e}")))
}

fn parse_many<T: FromStr>(field: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    split_list(value).into_iter().map(|v| parse_one(field, v)).collect()
}

fn parse_pair(field: &str, value: &str) -> Result<(usize, usize)> {
    match parse_many::<usize>(field, value)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::config(field, "expects two comma-separated integers")),
    }
}

/// A parsed study config: the cartesian product of its list-valued keys.
///
/// ```text
/// # comments start with '#'
/// surface = rosenbrock
/// n_tr = 50, 100, 1000
/// sigma2_y = 1e-2
/// mode = auto, fixed(1,1)
/// trials = 20
/// seed = 7
/// ```
///
/// List keys: `surface`, `n_tr`, `sigma2_y`, `mode`. Scalar keys: `n_te`,
/// `seed`, `trials`, `lambda`, `max_outer_iters`, `rel_sigma2_tol`,
/// `order_cap` (two integers), `domain` (four reals), `alpha`, `a`, `b`,
/// `record_timing`. Specs are ordered surface, n_tr, sigma2_y, then mode.
pub fn parse_study_config(text: &str) -> Result<Vec<ExperimentSpec>> {
    let mut kinds = vec![SurfaceKind::Rosenbrock];
    let mut n_trs = vec![100usize];
    let mut sigmas = vec![1e-2f64];
    let mut modes = vec![Mode::Auto];
    let mut base = ExperimentSpec::default();
    let mut domain = None;
    let mut alpha = None;
    let mut a = None;
    let mut b = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", i + 1), "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "surface" => kinds = parse_many(key, value)?,
            "n_tr" => n_trs = parse_many(key, value)?,
            "sigma2_y" => sigmas = parse_many(key, value)?,
            "mode" => modes = parse_many(key, value)?,
            "n_te" => base.n_te = parse_one(key, value)?,
            "seed" => base.seed = parse_one(key, value)?,
            "trials" => base.trials = parse_one(key, value)?,
            "lambda" => base.fit.lambda = parse_one(key, value)?,
            "max_outer_iters" => base.fit.max_outer_iters = parse_one(key, value)?,
            "rel_sigma2_tol" => base.fit.rel_sigma2_tol = parse_one(key, value)?,
            "order_cap" => base.fit.order_cap = parse_pair(key, value)?,
            "record_timing" => base.record_timing = parse_one(key, value)?,
            "domain" => {
                let d: Vec<f64> = parse_many(key, value)?;
                domain = Some(
                    <[f64; 4]>::try_from(d.as_slice())
                        .map_err(|_| Error::config(key, "expects four reals"))?,
                );
            }
            "alpha" => alpha = Some(parse_one(key, value)?),
            "a" => a = Some(parse_one(key, value)?),
            "b" => b = Some(parse_one(key, value)?),
            _ => return Err(Error::config(key, "unknown key")),
        }
    }
    let mut specs = Vec::new();
    for &kind in &kinds {
        let mut surface = SurfaceConfig::default_for(kind);
        surface.domain = domain.unwrap_or(surface.domain);
        surface.alpha = alpha.unwrap_or(surface.alpha);
        surface.a = a.unwrap_or(surface.a);
        surface.b = b.unwrap_or(surface.b);
        for &n_tr in &n_trs {
            for &sigma2_y in &sigmas {
                for &mode in &modes {
                    let spec = ExperimentSpec { surface, n_tr, sigma2_y, mode, ..base.clone() };
                    spec.validate()?;
                    specs.push(spec);
                }
            }
        }
    }
    Ok(specs)
}

pub fn read_study_config(path: &Path) -> Result<Vec<ExperimentSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_study_config(&text)
}

/// Latent `(x, y)` of a rotated point that lies on the surface.
pub fn latent_coords(surface: &LatentSurface, p: &Vec3) -> Vector2<f64> {
    let q = surface.rotation.transpose() * p;
    Vector2::new(q.x, q.y)
}
