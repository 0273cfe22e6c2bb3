//! Report rows and their CSV encodings.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use surfel_core::error::io_err;
use surfel_core::metrics::quantile_sorted;
use surfel_core::{Error, Result};

/// One view at one resolution, rendered with or without LODs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewRow {
    pub view: usize,
    pub width: u32,
    pub height: u32,
    pub lod: bool,
    /// Draw-call-equivalent count: emitted non-skip actions.
    pub actions: usize,
    pub triangles: u64,
    pub surfels: u64,
    pub frame_ms: f64,
    /// Mean SSIM against the no-LOD image of the same view.
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSample {
    pub position: usize,
    /// Index into the four cardinal directions `+x, -x, +z, -z`.
    pub direction: usize,
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub frame_ms: f64,
    /// Surfel size the frame was rendered with.
    pub surfel_size: f64,
    pub actions: usize,
    pub surfels: u64,
    pub triangles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("no samples"));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(Self {
            count: v.len(),
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameTimeDistribution {
    pub samples: Vec<FrameSample>,
    pub quartiles: Quartiles,
}

impl FrameTimeDistribution {
    pub fn from_samples(samples: Vec<FrameSample>) -> Result<Self> {
        let times: Vec<f64> = samples.iter().map(|s| s.frame_ms).collect();
        let quartiles = Quartiles::of(&times)?;
        Ok(Self { samples, quartiles })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub views: Vec<ViewRow>,
    pub regions: Vec<FrameTimeDistribution>,
}

/// Serializes rows with a header line taken from the field names.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_rows<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(io_err(path))?;
    write_rows(f, rows)
}
