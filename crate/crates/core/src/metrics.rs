//! Distribution statistics of surfel prefixes and single-scale SSIM.

use std::io::Write;
use std::path::Path;

use glam::Vec3;
use image::{GrayImage, Luma, Rgb32FImage};
use serde::Serialize;

use crate::color::luma;
use crate::error::{io_err, Error, Result};
use crate::sampling::SurfelCloud;
use crate::spatial::PointOctree;

/// Nearest-neighbour distances within a prefix and their five-number summary.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceStats {
    pub prefix: usize,
    /// Per-point distance to the nearest other point, in prefix order.
    pub distances: Vec<f64>,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// One CSV row of [`DistanceStats`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceSummary {
    pub prefix: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl DistanceStats {
    pub fn from_distances(distances: Vec<f64>) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::EmptyInput("no distances"));
        }
        let mut sorted = distances.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            prefix: distances.len(),
            min: sorted[0],
            q1: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q3: quantile_sorted(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            distances,
        })
    }

    /// Distances divided by `scale` (typically the bounds diagonal).
    pub fn normalized(&self, scale: f64) -> Self {
        let s = if scale > 0.0 { scale } else { 1.0 };
        Self {
            prefix: self.prefix,
            distances: self.distances.iter().map(|d| d / s).collect(),
            min: self.min / s,
            q1: self.q1 / s,
            median: self.median / s,
            q3: self.q3 / s,
            max: self.max / s,
        }
    }

    pub fn summary(&self) -> DistanceSummary {
        DistanceSummary {
            prefix: self.prefix,
            min: self.min,
            q1: self.q1,
            median: self.median,
            q3: self.q3,
            max: self.max,
        }
    }
}

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Distance from each point to its nearest other point.
pub fn nearest_neighbor_distances(points: &[Vec3]) -> Vec<f64> {
    let tree = PointOctree::from_points(points);
    (0..points.len())
        .map(|i| {
            let (d2, _) = tree.nearest_excluding(points[i], i as u32);
            (d2 as f64).sqrt()
        })
        .collect()
}

/// Median nearest-neighbour distance, 0 for fewer than two points.
pub fn median_min_distance(points: &[Vec3]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let mut d = nearest_neighbor_distances(points);
    d.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&d, 0.5)
}

pub fn min_neighbor_distances(cloud: &SurfelCloud, prefix: usize) -> Result<DistanceStats> {
    if prefix < 2 {
        return Err(Error::InvalidArgument(format!(
            "prefix must be >= 2, got {prefix}"
        )));
    }
    if prefix > cloud.len() {
        return Err(Error::InvalidArgument(format!(
            "prefix {prefix} exceeds cloud size {}",
            cloud.len()
        )));
    }
    let pts: Vec<Vec3> = cloud.surfels[..prefix].iter().map(|s| s.position).collect();
    DistanceStats::from_distances(nearest_neighbor_distances(&pts))
}

/// Recomputes `r_m` over the first `min(p_m, len)` surfels and stores it,
/// together with the clamped `p_m`, in the cloud.
pub fn compute_r_m(cloud: &mut SurfelCloud, p_m: usize) -> Result<f64> {
    if cloud.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "r_m needs at least 2 surfels, cloud has {}",
            cloud.len()
        )));
    }
    let p = p_m.clamp(2, cloud.len());
    let r_m = min_neighbor_distances(cloud, p)?.median;
    cloud.p_m = p as u64;
    cloud.r_m = r_m;
    Ok(r_m)
}

/// Writes summaries as CSV with the columns `prefix,min,q1,median,q3,max`.
pub fn write_distance_csv<W: Write>(out: W, rows: &[DistanceSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err("<csv>"))?;
    Ok(())
}

pub fn save_distance_csv(path: impl AsRef<Path>, rows: &[DistanceSummary]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(io_err(path))?;
    write_distance_csv(std::io::BufWriter::new(f), rows)
}

pub const SSIM_WINDOW: u32 = 8;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, PartialEq)]
pub struct SsimResult {
    pub mean: f64,
    /// Index per window position, row-major, `map_width * map_height` entries.
    pub map: Vec<f64>,
    pub map_width: u32,
    pub map_height: u32,
}

impl SsimResult {
    /// Index map scaled from `[0, 1]` to gray levels; negative values clamp to black.
    pub fn map_image(&self) -> GrayImage {
        GrayImage::from_fn(self.map_width, self.map_height, |x, y| {
            let v = self.map[(y * self.map_width + x) as usize];
            Luma([(v.clamp(0.0, 1.0) * 255.0).round() as u8])
        })
    }

    pub fn save_map(&self, path: impl AsRef<Path>) -> Result<()> {
        self.map_image().save(path.as_ref())?;
        Ok(())
    }
}

fn luma_plane(img: &Rgb32FImage) -> Vec<f64> {
    img.pixels()
        .map(|p| luma(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64))
        .collect()
}

/// Window mean and centered second moments, computed identically for both
/// operands so that `ssim(a, a)` is exactly 1 and `ssim(a, b) == ssim(b, a)`.
fn window_stats(
    x: &[f64],
    y: &[f64],
    width: usize,
    x0: usize,
    y0: usize,
) -> (f64, f64, f64, f64, f64) {
    let w = SSIM_WINDOW as usize;
    let n = (w * w) as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for r in 0..w {
        let row = (y0 + r) * width + x0;
        for c in 0..w {
            sx += x[row + c];
            sy += y[row + c];
        }
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for r in 0..w {
        let row = (y0 + r) * width + x0;
        for c in 0..w {
            let dx = x[row + c] - mx;
            let dy = y[row + c] - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    }
    (mx, my, vx / n, vy / n, cxy / n)
}

/// Single-scale SSIM on luma with 8x8 windows at stride 1 and dynamic range 1.
pub fn ssim(a: &Rgb32FImage, b: &Rgb32FImage) -> Result<SsimResult> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::SizeMismatch {
            a: a.dimensions(),
            b: b.dimensions(),
        });
    }
    let (w, h) = a.dimensions();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "images must be at least 8x8, got {w}x{h}"
        )));
    }
    let (la, lb) = (luma_plane(a), luma_plane(b));
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let (mw, mh) = (w - SSIM_WINDOW + 1, h - SSIM_WINDOW + 1);
    let mut map = Vec::with_capacity(mw as usize * mh as usize);
    for y0 in 0..mh as usize {
        for x0 in 0..mw as usize {
            let (mx, my, vx, vy, cxy) = window_stats(&la, &lb, w as usize, x0, y0);
            let num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
            let den = (mx * mx + my * my + c1) * (vx + vy + c2);
            map.push(num / den);
        }
    }
    let mean = map.iter().sum::<f64>() / map.len() as f64;
    Ok(SsimResult {
        mean,
        map,
        map_width: mw,
        map_height: mh,
    })
}
