//! Point selection from a binary occupancy grid.
//!
//! Interior boundary voxels are found by thresholding a 3D Laplacian
//! response, then a region is grown from a seed voxel by repeated
//! convolution with an all-ones cube, masked to the boundary set. The grown
//! values act as an inverse along-surface distance to the seed.

use crate::bezier::Vec3;
use crate::error::{Error, Result};

/// Ceiling for grown region values; only relative magnitudes matter.
pub const REGION_CEILING: i64 = 1 << 52;

/// Default exterior-neighbor threshold for boundary detection.
pub const DEFAULT_EPSILON: i64 = 9;
/// Default growth kernel edge length.
pub const DEFAULT_KERNEL_EDGE: usize = 3;
/// Default number of growth passes (a 15 mm cube at 1 mm voxels).
pub const DEFAULT_MAX_ITERS: usize = 7;

/// Dense 3D lattice stored x-fastest: index `i + n * (j + m * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid<T> {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    data: Vec<T>,
}

impl<T: Copy> VoxelGrid<T> {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], data: Vec<T>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension(format!("grid dims must be positive, got {dims:?}")));
        }
        let len = dims[0] * dims[1] * dims[2];
        if data.len() != len {
            return Err(Error::Dimension(format!(
                "grid {dims:?} needs {len} values, got {}",
                data.len()
            )));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Domain(format!("spacing must be positive, got {spacing:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Domain("origin must be finite".into()));
        }
        Ok(Self { dims, spacing, origin, data })
    }

    pub fn filled(dims: [usize; 3], value: T) -> Result<Self> {
        Self::new(dims, [1.0; 3], [0.0; 3], vec![value; dims.iter().product()])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, [i, j, k]: [usize; 3]) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn get(&self, ijk: [usize; 3]) -> T {
        self.data[self.index(ijk)]
    }

    pub fn set(&mut self, ijk: [usize; 3], value: T) {
        let idx = self.index(ijk);
        self.data[idx] = value;
    }

    pub fn contains(&self, ijk: [usize; 3]) -> bool {
        ijk.iter().zip(&self.dims).all(|(a, d)| a < d)
    }

    /// Physical center of a voxel: `origin + spacing * index`.
    pub fn center(&self, ijk: [usize; 3]) -> Vec3 {
        Vec3::new(
            self.origin[0] + self.spacing[0] * ijk[0] as f64,
            self.origin[1] + self.spacing[1] * ijk[1] as f64,
            self.origin[2] + self.spacing[2] * ijk[2] as f64,
        )
    }

    /// Voxel whose center is nearest to a physical point, if inside the grid.
    pub fn voxel_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.spacing[a]).round();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }

    /// True when the voxel lies on the outer face of the lattice.
    pub fn on_perimeter(&self, ijk: [usize; 3]) -> bool {
        ijk.iter().zip(&self.dims).any(|(&a, &d)| a == 0 || a + 1 == d)
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> VoxelGrid<U> {
        VoxelGrid {
            dims: self.dims,
            spacing: self.spacing,
            origin: self.origin,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    fn with_data<U>(&self, data: Vec<U>) -> VoxelGrid<U> {
        VoxelGrid {
            dims: self.dims,
            spacing: self.spacing,
            origin: self.origin,
            data,
        }
    }
}

impl VoxelGrid<i64> {
    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0).count()
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&x| x == 0 || x == 1)
    }
}

/// Odd-sized integer convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel3 {
    dims: [usize; 3],
    weights: Vec<i64>,
}

impl Kernel3 {
    pub fn new(dims: [usize; 3], weights: Vec<i64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0 || d % 2 == 0) {
            return Err(Error::Dimension(format!("kernel dims must be odd, got {dims:?}")));
        }
        if weights.len() != dims.iter().product::<usize>() {
            return Err(Error::Dimension("kernel weight count does not match dims".into()));
        }
        Ok(Self { dims, weights })
    }

    /// `l × l × l` cube of ones.
    pub fn ones(l: usize) -> Result<Self> {
        Self::new([l; 3], vec![1; l * l * l])
    }

    /// Single one at the center.
    pub fn identity(dims: [usize; 3]) -> Result<Self> {
        let mut w = vec![0; dims.iter().product()];
        let c = dims[0] / 2 + dims[0] * (dims[1] / 2 + dims[1] * (dims[2] / 2));
        if let Some(x) = w.get_mut(c) {
            *x = 1;
        }
        Self::new(dims, w)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn get(&self, [a, b, c]: [usize; 3]) -> i64 {
        self.weights[a + self.dims[0] * (b + self.dims[1] * c)]
    }

    pub fn sum(&self) -> i64 {
        self.weights.iter().sum()
    }
}

/// 3×3×3 Laplacian: 26 at the center, −1 elsewhere.
pub fn laplacian_kernel() -> Kernel3 {
    let mut w = vec![-1; 27];
    w[13] = 26;
    Kernel3 { dims: [3; 3], weights: w }
}

/// Same-size 3D convolution with zero padding outside the grid.
pub fn convolve3(grid: &VoxelGrid<i64>, kernel: &Kernel3) -> Result<VoxelGrid<i64>> {
    let [n, m, p] = grid.dims;
    let [kn, km, kp] = kernel.dims;
    if kn > n || km > m || kp > p {
        return Err(Error::Dimension(format!(
            "kernel {:?} exceeds grid {:?}",
            kernel.dims, grid.dims
        )));
    }
    let (hn, hm, hp) = ((kn / 2) as isize, (km / 2) as isize, (kp / 2) as isize);
    let mut out = vec![0i64; grid.len()];
    for k in 0..p {
        for j in 0..m {
            for i in 0..n {
                let mut acc = 0i64;
                for c in 0..kp {
                    let z = k as isize + hp - c as isize;
                    if z < 0 || z >= p as isize {
                        continue;
                    }
                    for b in 0..km {
                        let y = j as isize + hm - b as isize;
                        if y < 0 || y >= m as isize {
                            continue;
                        }
                        for a in 0..kn {
                            let x = i as isize + hn - a as isize;
                            if x < 0 || x >= n as isize {
                                continue;
                            }
                            let w = kernel.get([a, b, c]);
                            if w != 0 {
                                let val = grid.get([x as usize, y as usize, z as usize]);
                                acc = acc.saturating_add(w.saturating_mul(val));
                            }
                        }
                    }
                }
                out[i + n * (j + m * k)] = acc;
            }
        }
    }
    Ok(grid.with_data(out))
}

/// Interior boundary voxels: occupied voxels whose Laplacian response (the
/// number of unoccupied voxels among their 26 neighbors) reaches `epsilon`.
pub fn boundary_mask(occupancy: &VoxelGrid<i64>, epsilon: i64) -> Result<VoxelGrid<i64>> {
    if !occupancy.is_binary() {
        return Err(Error::Domain("occupancy grid must be binary".into()));
    }
    let response = convolve3(occupancy, &laplacian_kernel())?;
    let data = response
        .data
        .iter()
        .zip(&occupancy.data)
        .map(|(&r, &v)| i64::from(v == 1 && r >= epsilon))
        .collect();
    Ok(occupancy.with_data(data))
}

/// Region-growing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectSettings {
    /// Edge length of the all-ones growth kernel (odd).
    pub kernel_edge: usize,
    /// Number of growth passes, counting the initial seed spread.
    pub max_iters: usize,
    /// Boundary threshold on exterior neighbors.
    pub epsilon: i64,
}

impl Default for SelectSettings {
    fn default() -> Self {
        Self {
            kernel_edge: DEFAULT_KERNEL_EDGE,
            max_iters: DEFAULT_MAX_ITERS,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Result of [`select_points`].
#[derive(Debug, Clone)]
pub struct Selection {
    pub region: VoxelGrid<i64>,
    /// Seed actually used (after snapping).
    pub seed: [usize; 3],
    pub snapped: bool,
    /// Growth passes performed.
    pub iterations: usize,
    /// Region reached the lattice perimeter, where boundary labels are unreliable.
    pub truncated: bool,
}

/// Grows a single-surface region from `seed` over the boundary mask.
///
/// Pass 1 spreads the seed indicator by the all-ones kernel and masks it;
/// each later pass adds the masked convolution of the current region. After
/// `max_iters` passes the support is every boundary voxel reachable from the
/// seed in at most `max_iters` kernel-neighborhood hops.
pub fn select_points(
    occupancy: &VoxelGrid<i64>,
    seed: [usize; 3],
    settings: &SelectSettings,
) -> Result<Selection> {
    if settings.max_iters == 0 {
        return Err(Error::Domain("max_iters must be at least 1".into()));
    }
    if !occupancy.contains(seed) {
        return Err(Error::Domain(format!(
            "seed {seed:?} outside grid {:?}",
            occupancy.dims()
        )));
    }
    let mask = boundary_mask(occupancy, settings.epsilon)?;
    let ones = Kernel3::ones(settings.kernel_edge)?;
    let (seed_used, snapped) = snap_seed(&mask, seed, settings.kernel_edge)?;

    let mut delta = mask.map(|_| 0i64);
    delta.set(seed_used, 1);
    let mut region = mask_product(&convolve3(&delta, &ones)?, &mask);
    for _ in 1..settings.max_iters {
        let spread = mask_product(&convolve3(&region, &ones)?, &mask);
        for (r, s) in region.data.iter_mut().zip(&spread.data) {
            *r = r.saturating_add(*s).min(REGION_CEILING);
        }
    }
    let truncated = region
        .data
        .iter()
        .enumerate()
        .any(|(idx, &r)| r != 0 && region.on_perimeter(region.coords(idx)));
    if truncated {
        log::warn!("region growth reached the grid perimeter; selection may be truncated");
    }
    Ok(Selection {
        region,
        seed: seed_used,
        snapped,
        iterations: settings.max_iters,
        truncated,
    })
}

fn mask_product(a: &VoxelGrid<i64>, mask: &VoxelGrid<i64>) -> VoxelGrid<i64> {
    let data = a
        .data
        .iter()
        .zip(&mask.data)
        .map(|(&x, &m)| (x * m).min(REGION_CEILING))
        .collect();
    a.with_data(data)
}

/// Nearest mask voxel within Chebyshev radius `radius`; ties break on the
/// smallest x-fastest linear index.
fn snap_seed(mask: &VoxelGrid<i64>, seed: [usize; 3], radius: usize) -> Result<([usize; 3], bool)> {
    if mask.get(seed) == 1 {
        return Ok((seed, false));
    }
    let lo = |a: usize| a.saturating_sub(radius);
    let hi = |a: usize, d: usize| (a + radius).min(d - 1);
    let d = mask.dims();
    let mut best: Option<(usize, usize)> = None;
    for k in lo(seed[2])..=hi(seed[2], d[2]) {
        for j in lo(seed[1])..=hi(seed[1], d[1]) {
            for i in lo(seed[0])..=hi(seed[0], d[0]) {
                if mask.get([i, j, k]) != 1 {
                    continue;
                }
                let dist = [i.abs_diff(seed[0]), j.abs_diff(seed[1]), k.abs_diff(seed[2])]
                    .iter()
                    .map(|x| x * x)
                    .sum::<usize>();
                let idx = mask.index([i, j, k]);
                if best.is_none_or(|(bd, bi)| (dist, idx) < (bd, bi)) {
                    best = Some((dist, idx));
                }
            }
        }
    }
    match best {
        Some((_, idx)) => Ok((mask.coords(idx), true)),
        None => Err(Error::NoSurfaceFound { seed, radius }),
    }
}

/// How per-point weights are assigned in [`extract_cloud`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode<'a> {
    Uniform,
    /// `R_i / max(R)`.
    InverseDistance,
    /// Weights read from a scalar grid of the same shape.
    ExternalMap(&'a VoxelGrid<f64>),
}

/// Indexed points with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    weights: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!(
                "weight {i} is {} but must be strictly positive",
                weights[i]
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Domain(format!("point {i} is not finite")));
        }
        Ok(Self { points, weights })
    }

    /// All weights set to one.
    pub fn unweighted(points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies `f` to every point, keeping weights.
    pub fn map_points(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        Self {
            points: self.points.iter().map(f).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// One point per nonzero region voxel, at the voxel center, in x-fastest order.
pub fn extract_cloud(region: &VoxelGrid<i64>, mode: WeightMode<'_>) -> Result<PointCloud> {
    let max = region.data.iter().copied().max().unwrap_or(0);
    if region.count_nonzero() == 0 {
        return Err(Error::EmptySelection);
    }
    if let WeightMode::ExternalMap(map) = mode {
        if map.dims() != region.dims() {
            return Err(Error::Dimension(format!(
                "weight grid {:?} does not match region {:?}",
                map.dims(),
                region.dims()
            )));
        }
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (idx, &r) in region.data.iter().enumerate() {
        if r == 0 {
            continue;
        }
        if r < 0 {
            return Err(Error::Domain("region values must be nonnegative".into()));
        }
        points.push(region.center(region.coords(idx)));
        weights.push(match mode {
            WeightMode::Uniform => 1.0,
            WeightMode::InverseDistance => r as f64 / max as f64,
            WeightMode::ExternalMap(map) => map.data[idx],
        });
    }
    PointCloud::new(points, weights)
}
