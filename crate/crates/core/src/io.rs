//! Plain-text file formats.
//!
//! * `VOX1` grids: header `VOX1 n m p sx sy sz ox oy oz`, then `n*m*p`
//!   whitespace-separated values in x-fastest order.
//! * Point clouds: CSV with header `x,y,z,w`.
//! * Surfaces: a JSON [`SurfaceDocument`].

use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bezier::{BezierSurface, Vec3};
use crate::error::{Error, Result};
use crate::selection::FitModel;
use crate::voxel::{PointCloud, VoxelGrid};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses a `VOX1` document. `label` names the source in error messages.
pub fn parse_vox<T: Copy + FromStr>(text: &str, label: &str) -> Result<VoxelGrid<T>>
where
    T::Err: Display,
{
    let mut lines = text.lines().enumerate();
    let (header_line, header) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => break (i + 1, l),
            None => return Err(Error::parse(label, 1, "missing VOX1 header")),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&"VOX1") {
        return Err(Error::parse(label, header_line, "header must start with VOX1"));
    }
    if fields.len() != 10 {
        return Err(Error::parse(
            label,
            header_line,
            format!("header needs 9 fields after VOX1, got {}", fields.len() - 1),
        ));
    }
    let mut dims = [0usize; 3];
    for (d, f) in dims.iter_mut().zip(&fields[1..4]) {
        *d = f
            .parse()
            .map_err(|e| Error::parse(label, header_line, format!("bad dimension `{f}`: {e}")))?;
    }
    let mut real = [0f64; 6];
    for (r, f) in real.iter_mut().zip(&fields[4..10]) {
        *r = f
            .parse()
            .map_err(|e| Error::parse(label, header_line, format!("bad number `{f}`: {e}")))?;
    }
    let expected: usize = dims.iter().product();
    let mut data = Vec::with_capacity(expected);
    let mut last_line = header_line;
    for (i, line) in lines {
        last_line = i + 1;
        for tok in line.split_whitespace() {
            if data.len() == expected {
                return Err(Error::parse(label, i + 1, format!("more than {expected} values")));
            }
            data.push(
                tok.parse::<T>()
                    .map_err(|e| Error::parse(label, i + 1, format!("bad value `{tok}`: {e}")))?,
            );
        }
    }
    if data.len() != expected {
        return Err(Error::parse(
            label,
            last_line,
            format!("expected {expected} values, found {}", data.len()),
        ));
    }
    VoxelGrid::new(
        dims,
        [real[0], real[1], real[2]],
        [real[3], real[4], real[5]],
        data,
    )
    .map_err(|e| Error::parse(label, header_line, e.to_string()))
}

/// Formats a grid as `VOX1`, one x-row per line.
pub fn format_vox<T: Copy + Display>(grid: &VoxelGrid<T>) -> String {
    let [n, m, p] = grid.dims();
    let s = grid.spacing();
    let o = grid.origin();
    let mut out = format!(
        "VOX1 {n} {m} {p} {:?} {:?} {:?} {:?} {:?} {:?}\n",
        s[0], s[1], s[2], o[0], o[1], o[2]
    );
    for row in grid.data().chunks(n) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_vox<T: Copy + FromStr>(path: &Path) -> Result<VoxelGrid<T>>
where
    T::Err: Display,
{
    parse_vox(&read_text(path)?, &path.display().to_string())
}

pub fn write_vox<T: Copy + Display>(path: &Path, grid: &VoxelGrid<T>) -> Result<()> {
    write_text(path, &format_vox(grid))
}

/// Parses an `x,y,z,w` point-cloud CSV. A missing `w` column means unit weights.
pub fn parse_cloud(text: &str, label: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut header_seen = false;
    let mut has_w = true;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if !header_seen {
            header_seen = true;
            match cols.as_slice() {
                ["x", "y", "z", "w"] => {}
                ["x", "y", "z"] => has_w = false,
                _ => return Err(Error::parse(label, line_no, "header must be `x,y,z,w`")),
            }
            continue;
        }
        let want = if has_w { 4 } else { 3 };
        if cols.len() != want {
            return Err(Error::parse(
                label,
                line_no,
                format!("expected {want} columns, got {}", cols.len()),
            ));
        }
        let mut vals = [1.0f64; 4];
        for (k, c) in cols.iter().enumerate() {
            vals[k] = c
                .parse()
                .map_err(|e| Error::parse(label, line_no, format!("bad number `{c}`: {e}")))?;
        }
        points.push(Vec3::new(vals[0], vals[1], vals[2]));
        weights.push(vals[3]);
    }
    if !header_seen {
        return Err(Error::parse(label, 1, "missing `x,y,z,w` header"));
    }
    PointCloud::new(points, weights).map_err(|e| Error::parse(label, 0, e.to_string()))
}

pub fn format_cloud(cloud: &PointCloud) -> String {
    let mut out = String::from("x,y,z,w\n");
    for (p, w) in cloud.points().iter().zip(cloud.weights()) {
        out.push_str(&format!("{:?},{:?},{:?},{:?}\n", p.x, p.y, p.z, w));
    }
    out
}

pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    parse_cloud(&read_text(path)?, &path.display().to_string())
}

pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    write_text(path, &format_cloud(cloud))
}

/// Per-point record of a fitted surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub u: f64,
    pub v: f64,
    /// Euclidean distance from the point to `s(u, v)`.
    pub residual: f64,
}

/// Serialized form of a [`FitModel`].
///
/// `control_points[i][j]` is `[x, y, z]` of control point `(i, j)`, with `i`
/// the u-index. The surface is stored in the data frame; `centroid` is the
/// offset that was removed during fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDocument {
    pub n_u: usize,
    pub n_v: usize,
    pub control_points: Vec<Vec<[f64; 3]>>,
    pub sigma2: f64,
    pub t: f64,
    pub centroid: [f64; 3],
    pub points: Vec<PointRecord>,
}

impl SurfaceDocument {
    /// Builds a document from a model fitted to `cloud`.
    pub fn from_model(model: &FitModel, cloud: &PointCloud) -> Result<Self> {
        if model.u.len() != cloud.len() {
            return Err(Error::Dimension("model parameters do not match the cloud".into()));
        }
        let control_points = model
            .surface
            .to_tensor()
            .iter()
            .map(|row| row.iter().map(|p| [p.x, p.y, p.z]).collect())
            .collect();
        let points = cloud
            .points()
            .iter()
            .zip(model.u.iter().zip(&model.v))
            .map(|(x, (&u, &v))| PointRecord {
                u,
                v,
                residual: (x - model.surface.eval(u, v)).norm(),
            })
            .collect();
        let c = model.centroid;
        Ok(Self {
            n_u: model.surface.n_u(),
            n_v: model.surface.n_v(),
            control_points,
            sigma2: model.sigma2,
            t: model.t,
            centroid: [c.x, c.y, c.z],
            points,
        })
    }

    pub fn surface(&self) -> Result<BezierSurface> {
        if self.control_points.len() != self.n_u + 1
            || self.control_points.iter().any(|r| r.len() != self.n_v + 1)
        {
            return Err(Error::Dimension(format!(
                "control points do not match orders ({}, {})",
                self.n_u, self.n_v
            )));
        }
        let tensor: Vec<Vec<Vec3>> = self
            .control_points
            .iter()
            .map(|row| row.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect())
            .collect();
        BezierSurface::from_tensor(&tensor)
    }

    pub fn params(&self) -> (Vec<f64>, Vec<f64>) {
        self.points.iter().map(|p| (p.u, p.v)).unzip()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document is always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, label: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(label, e.line(), e.to_string()))
    }
}

pub fn read_surface(path: &Path) -> Result<SurfaceDocument> {
    SurfaceDocument::from_json(&read_text(path)?, &path.display().to_string())
}

pub fn write_surface(path: &Path, doc: &SurfaceDocument) -> Result<()> {
    write_text(path, &doc.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vox_round_trip() {
        let data: Vec<i64> = (0..24).map(|i| i % 2).collect();
        let g = VoxelGrid::new([2, 3, 4], [0.5, 1.0, 2.0], [-1.0, 0.25, 3.0], data).unwrap();
        let back: VoxelGrid<i64> = parse_vox(&format_vox(&g), "mem").unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn vox_errors_carry_line_numbers() {
        let text = "VOX1 2 1 1 1 1 1 0 0 0\n1\nx\n";
        match parse_vox::<i64>(text, "g.vox") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_vox::<i64>("VOX1 2 2 1 1 1 1 0 0 0\n1 0 1\n", "g.vox") {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("expected 4"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_vox::<i64>("VOX2 1 1 1 1 1 1 0 0 0\n1\n", "g"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn weight_grid_parses_reals() {
        let g: VoxelGrid<f64> = parse_vox("VOX1 2 1 1 1 1 1 0 0 0\n0.5 1e-3\n", "w").unwrap();
        assert_eq!(g.data(), &[0.5, 1e-3]);
    }

    #[test]
    fn cloud_round_trip_is_exact() {
        let pts = vec![Vec3::new(0.1, -1.0 / 3.0, 1e-17), Vec3::new(2.0, 3.5, -7.25)];
        let c = PointCloud::new(pts, vec![1.0, 0.3]).unwrap();
        let back = parse_cloud(&format_cloud(&c), "mem").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn cloud_errors() {
        assert!(matches!(parse_cloud("a,b\n", "c"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_cloud("x,y,z,w\n1,2,3,1\n1,2\n", "c"), Err(Error::Parse { line: 3, .. })));
        let c = parse_cloud("x,y,z\n1,2,3\n", "c").unwrap();
        assert_eq!(c.weights(), &[1.0]);
        assert!(parse_cloud("x,y,z,w\n", "c").unwrap().is_empty());
    }
}
