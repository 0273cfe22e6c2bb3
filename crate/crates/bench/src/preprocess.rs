//! Stage timings of the per-node preprocessing pipeline.

use std::time::{Duration, Instant};

use serde::Serialize;
use surfel_core::glam::Mat4;
use surfel_core::lodpipe::capture_candidates;
use surfel_core::raster::CaptureSource;
use surfel_core::sampling::progressive_order;
use surfel_core::{CaptureConfig, Error, Result, SamplingConfig, TriangleMesh};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessRow {
    pub target: usize,
    pub candidates: usize,
    pub capture_ms: f64,
    pub candidate_ms: f64,
    pub sampling_ms: f64,
    pub total_ms: f64,
}

fn median_ms(mut v: Vec<Duration>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    let d = if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2
    };
    d.as_secs_f64() * 1e3
}

/// Wall-clock capture, candidate and sampling times for each target count.
/// After one untimed warm-up capture, the capture and candidate stages run
/// `repeats` rounds, each round visiting every count once so that drift over
/// the run is spread evenly; medians are reported. Sampling then runs once
/// per count. `sampling.target_count` is replaced by each entry of `counts`.
pub fn time_preprocessing(
    mesh: &TriangleMesh,
    counts: &[usize],
    capture: &CaptureConfig,
    sampling: &SamplingConfig,
    repeats: usize,
) -> Result<Vec<PreprocessRow>> {
    let sources = [CaptureSource::Mesh {
        transform: Mat4::IDENTITY,
        mesh,
    }];
    time_preprocessing_sources(&sources, counts, capture, sampling, repeats)
}

/// [`time_preprocessing`] over arbitrary capture sources, such as a whole
/// scene subtree.
pub fn time_preprocessing_sources(
    sources: &[CaptureSource<'_>],
    counts: &[usize],
    capture: &CaptureConfig,
    sampling: &SamplingConfig,
    repeats: usize,
) -> Result<Vec<PreprocessRow>> {
    if counts.is_empty() || repeats == 0 {
        return Err(Error::InvalidArgument(
            "need at least one count and one repeat".into(),
        ));
    }
    let (candidates, _) = capture_candidates(sources, capture)?;
    let mut cap = vec![Vec::with_capacity(repeats); counts.len()];
    let mut cand = vec![Vec::with_capacity(repeats); counts.len()];
    for _ in 0..repeats {
        for k in 0..counts.len() {
            let (_, t) = capture_candidates(sources, capture)?;
            cap[k].push(t.capture);
            cand[k].push(t.candidates);
        }
    }
    let mut rows = Vec::with_capacity(counts.len());
    for (k, &target) in counts.iter().enumerate() {
        let config = SamplingConfig {
            target_count: target,
            ..sampling.clone()
        };
        let start = Instant::now();
        let order = progressive_order(&candidates, &config)?;
        let sampling_ms = start.elapsed().as_secs_f64() * 1e3;
        log::debug!(
            "target {target}: {} surfels from {} candidates",
            order.len(),
            candidates.len()
        );
        let capture_ms = median_ms(std::mem::take(&mut cap[k]));
        let candidate_ms = median_ms(std::mem::take(&mut cand[k]));
        rows.push(PreprocessRow {
            target,
            candidates: candidates.len(),
            capture_ms,
            candidate_ms,
            sampling_ms,
            total_ms: capture_ms + candidate_ms + sampling_ms,
        });
    }
    Ok(rows)
}
