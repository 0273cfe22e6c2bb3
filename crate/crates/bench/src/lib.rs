//! Desk-scale evaluation harness: per-view rendering statistics,
//! frame-time distributions over position grids and preprocessing timings.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod grid;
pub mod preprocess;
pub mod report;
pub mod scenes;
pub mod views;

pub use grid::{run_position_grid, GridConfig};
pub use preprocess::{time_preprocessing, time_preprocessing_sources, PreprocessRow};
pub use report::{BenchReport, FrameSample, FrameTimeDistribution, Quartiles, ViewRow};
pub use scenes::{grid_scene, reference_scene, GridSceneConfig, REFERENCE_TRIANGLES};
pub use views::{run_views, FrameClock, ViewOptions};
