//! Local Bézier surface fitting for occupancy-grid point clouds.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`voxel`] finds interior boundary voxels in a binary occupancy grid
//!    and grows a single-surface region around a query voxel.
//! 2. [`fit`] alternates foot-point projection ([`projection`]) with a
//!    ridge-regularized control-point solve ([`control`]).
//! 3. Every control-point solve also tries raising each surface order by one
//!    and keeps the candidate with the best BIC statistic ([`selection`]).
//! 4. [`sim`] generates noisy samples of latent surfaces and runs the
//!    train/test studies used to check order selection.
//!
//! File formats live in [`io`]; the `bezfit` binary wraps [`cli`].

pub mod bezier;
pub mod cli;
pub mod control;
pub mod error;
pub mod fit;
pub mod io;
pub mod projection;
pub mod selection;
pub mod sim;
pub mod voxel;

pub use bezier::{BezierSurface, Vec3};
pub use error::{Error, Result};
pub use fit::{fit_surface, FitSettings, FitTrace, OrderPolicy};
pub use projection::ProjectionSettings;
pub use selection::FitModel;
pub use voxel::{PointCloud, VoxelGrid};
