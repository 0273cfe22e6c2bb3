//! Candidate collection and the three orderings: progressive randomized
//! farthest-point sampling, the exact greedy permutation and a uniform
//! random baseline.

use glam::Vec3;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::color::Rgba8;
use crate::error::{Error, Result};
use crate::geom::{dist2, Aabb};
use crate::metrics;
use crate::raster::{GBuffer, GBufferSet};
use crate::spatial::PointOctree;

pub const DEFAULT_SAMPLE_SIZE: usize = 200;
pub const DEFAULT_HEURISTIC_PERIOD: usize = 500;
pub const DEFAULT_REFERENCE_PREFIX: usize = 1000;

/// Candidate positions closer than this (per axis, after rounding) are merged.
pub const DEDUP_QUANTUM: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surfel {
    /// Node-local position.
    pub position: Vec3,
    /// Unit normal in the node's frame.
    pub normal: Vec3,
    pub color: Rgba8,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub surfels: Vec<Surfel>,
    pub source_resolution: u32,
    pub source_directions: u32,
    pub bounds: Aabb,
}

impl CandidateSet {
    pub fn from_surfels(surfels: Vec<Surfel>) -> Self {
        let bounds = Aabb::from_points(surfels.iter().map(|s| s.position));
        Self {
            surfels,
            source_resolution: 0,
            source_directions: 0,
            bounds,
        }
    }

    /// Candidates with the given positions, a `+z` normal and mid-gray color.
    pub fn from_positions(points: impl IntoIterator<Item = Vec3>) -> Self {
        Self::from_surfels(
            points
                .into_iter()
                .map(|position| Surfel {
                    position,
                    normal: Vec3::Z,
                    color: Rgba8::MID_GRAY,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.surfels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfels.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.surfels.iter().map(|s| s.position).collect()
    }
}

fn dedup_key(p: Vec3) -> [i64; 3] {
    let q = |v: f32| (v as f64 / DEDUP_QUANTUM).round() as i64;
    [q(p.x), q(p.y), q(p.z)]
}

/// Incremental candidate collection, so buffers can be dropped as soon as they
/// have been read.
#[derive(Debug, Default)]
pub struct CandidateCollector {
    seen: FxHashSet<[i64; 3]>,
    set: CandidateSet,
    covered: usize,
}

impl CandidateCollector {
    pub fn new() -> Self {
        Self {
            set: CandidateSet {
                bounds: Aabb::EMPTY,
                ..CandidateSet::default()
            },
            ..Self::default()
        }
    }

    /// Adds one candidate per covered pixel, in row-major order, skipping
    /// positions that were already seen.
    pub fn add_buffer(&mut self, gb: &GBuffer) {
        self.set.source_resolution = self.set.source_resolution.max(gb.width.max(gb.height));
        self.set.source_directions += 1;
        for i in 0..gb.covered.len() {
            if !gb.covered[i] {
                continue;
            }
            self.covered += 1;
            let position = gb.position[i];
            if self.seen.insert(dedup_key(position)) {
                self.set.bounds = self.set.bounds.including(position);
                self.set.surfels.push(Surfel {
                    position,
                    normal: gb.normal[i],
                    color: gb.color[i],
                });
            }
        }
    }

    /// Covered pixels seen so far, before deduplication.
    pub fn covered_pixels(&self) -> usize {
        self.covered
    }

    pub fn finish(self) -> CandidateSet {
        self.set
    }
}

/// One candidate per covered pixel across all buffers, deduplicated by position.
pub fn collect_candidates(buffers: &GBufferSet) -> CandidateSet {
    let mut c = CandidateCollector::new();
    for gb in &buffers.buffers {
        c.add_buffer(gb);
    }
    c.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingConfig {
    pub target_count: usize,
    /// Candidates drawn per round.
    pub sample_size: usize,
    /// Every `heuristic_period` chosen surfels the draw grows by one.
    pub heuristic_period: usize,
    /// When positive, drawn candidates within this factor of the winning
    /// distance around the winner are discarded as well.
    pub removal_radius_factor: f32,
    pub seed: u64,
    /// Forces the first surfel instead of drawing it.
    pub start: Option<usize>,
    /// Prefix length over which `r_m` is measured.
    pub reference_prefix: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            target_count: 10_000,
            sample_size: DEFAULT_SAMPLE_SIZE,
            heuristic_period: DEFAULT_HEURISTIC_PERIOD,
            removal_radius_factor: 0.0,
            seed: 0,
            start: None,
            reference_prefix: DEFAULT_REFERENCE_PREFIX,
        }
    }
}

impl SamplingConfig {
    pub fn new(target_count: usize, seed: u64) -> Self {
        Self {
            target_count,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_count == 0 {
            return Err(Error::InvalidArgument("target count must be >= 1".into()));
        }
        if self.sample_size == 0 || self.heuristic_period == 0 {
            return Err(Error::InvalidArgument(
                "sample size and heuristic period must be >= 1".into(),
            ));
        }
        if !(self.removal_radius_factor.is_finite() && self.removal_radius_factor >= 0.0) {
            return Err(Error::InvalidArgument(
                "removal radius factor must be finite and >= 0".into(),
            ));
        }
        if self.reference_prefix == 0 {
            return Err(Error::InvalidArgument(
                "reference prefix must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Ordered surfel approximation of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfelCloud {
    pub surfels: Vec<Surfel>,
    /// Reference prefix length, already clamped to the cloud size.
    pub p_m: u64,
    /// Median nearest-neighbour distance within the first `p_m` surfels;
    /// zero when the cloud has fewer than two surfels.
    pub r_m: f64,
    /// Node-local bounds of the candidate set the cloud was drawn from.
    pub bounds: Aabb,
}

impl SurfelCloud {
    /// Cloud from an ordering of `candidates`, measuring `r_m` over the first
    /// `min(reference_prefix, len)` surfels.
    pub fn from_order(candidates: &CandidateSet, order: &[u32], reference_prefix: usize) -> Self {
        let surfels: Vec<Surfel> = order
            .iter()
            .map(|&i| candidates.surfels[i as usize])
            .collect();
        Self::from_surfels(surfels, reference_prefix, candidates.bounds)
    }

    pub fn from_surfels(surfels: Vec<Surfel>, reference_prefix: usize, bounds: Aabb) -> Self {
        let p_m = reference_prefix.min(surfels.len());
        let r_m = if p_m >= 2 {
            let pts: Vec<Vec3> = surfels[..p_m].iter().map(|s| s.position).collect();
            metrics::median_min_distance(&pts)
        } else {
            0.0
        };
        Self {
            surfels,
            p_m: p_m as u64,
            r_m,
            bounds,
        }
    }

    pub fn len(&self) -> usize {
        self.surfels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfels.is_empty()
    }

    /// Whether the prefix statistics can drive the prefix-length formula.
    pub fn has_valid_r_m(&self) -> bool {
        self.surfels.len() >= 2 && self.r_m > 0.0 && self.r_m.is_finite()
    }

    /// Smallest radius at which the whole cloud still covers the surface:
    /// `r_m * sqrt(p_m / total)`.
    pub fn full_coverage_radius(&self) -> f32 {
        if !self.has_valid_r_m() {
            return 0.0;
        }
        (self.r_m * (self.p_m as f64 / self.surfels.len() as f64).sqrt()) as f32
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.surfels.iter().map(|s| s.position).collect()
    }
}

/// Candidate indices in progressive sampling order.
pub fn progressive_order(candidates: &CandidateSet, config: &SamplingConfig) -> Result<Vec<u32>> {
    config.validate()?;
    let n = candidates.len();
    if n == 0 {
        return Err(Error::EmptyInput("no candidates to sample"));
    }
    if let Some(s) = config.start {
        if s >= n {
            return Err(Error::InvalidArgument(format!(
                "start index {s} out of range ({n} candidates)"
            )));
        }
    }
    let target = config.target_count.min(n);
    let pos = &candidates.surfels;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut remaining: Vec<u32> = (0..n as u32).collect();
    let mut order = Vec::with_capacity(target);
    let mut tree = PointOctree::new(candidates.bounds);

    let first = config.start.unwrap_or_else(|| rng.random_range(0..n));
    order.push(remaining.swap_remove(first));
    tree.insert(pos[first].position);

    let factor2 = config.removal_radius_factor * config.removal_radius_factor;
    let mut drawn: Vec<usize> = Vec::new();
    while order.len() < target && !remaining.is_empty() {
        let i = order.len();
        let m = config.sample_size + i / config.heuristic_period;
        drawn.clear();
        if m >= remaining.len() {
            drawn.extend(0..remaining.len());
        } else {
            drawn.extend(index::sample(&mut rng, remaining.len(), m));
        }

        let mut best = f32::NEG_INFINITY;
        let mut best_slot = usize::MAX;
        for &slot in &drawn {
            let idx = remaining[slot];
            let stop = (best > f32::NEG_INFINITY).then_some(best);
            let d = tree.nearest_dist2(pos[idx as usize].position, stop);
            if d > best || (d == best && idx < remaining[best_slot]) {
                best = d;
                best_slot = slot;
            }
        }

        let winner = remaining[best_slot];
        let wp = pos[winner as usize].position;
        order.push(winner);
        tree.insert(wp);

        if factor2 > 0.0 {
            let limit = factor2 * best;
            let mut gone: Vec<usize> = drawn
                .iter()
                .copied()
                .filter(|&s| {
                    s == best_slot || dist2(pos[remaining[s] as usize].position, wp) <= limit
                })
                .collect();
            gone.sort_unstable_by(|a, b| b.cmp(a));
            for s in gone {
                remaining.swap_remove(s);
            }
        } else {
            remaining.swap_remove(best_slot);
        }
    }
    Ok(order)
}

/// Progressive randomized approximation of a greedy permutation.
pub fn sample_progressive(
    candidates: &CandidateSet,
    config: &SamplingConfig,
) -> Result<SurfelCloud> {
    let order = progressive_order(candidates, config)?;
    Ok(SurfelCloud::from_order(
        candidates,
        &order,
        config.reference_prefix,
    ))
}

/// First `count` indices of the exact farthest-first traversal from `start`.
/// Ties go to the lowest candidate index.
pub fn exact_greedy_order(
    candidates: &CandidateSet,
    start: usize,
    count: usize,
) -> Result<Vec<u32>> {
    let n = candidates.len();
    if n == 0 {
        return Err(Error::EmptyInput("no candidates to sample"));
    }
    if start >= n {
        return Err(Error::InvalidArgument(format!(
            "start index {start} out of range ({n} candidates)"
        )));
    }
    let target = count.min(n);
    let pos: Vec<Vec3> = candidates.positions();
    // Negative marks an already chosen candidate.
    let mut min_d2 = vec![f32::INFINITY; n];
    let mut order = Vec::with_capacity(target);
    order.push(start as u32);
    min_d2[start] = -1.0;
    let mut newest = pos[start];
    while order.len() < target {
        let mut best = f32::NEG_INFINITY;
        let mut arg = usize::MAX;
        for (j, (m, &p)) in min_d2.iter_mut().zip(&pos).enumerate() {
            if *m < 0.0 {
                continue;
            }
            let d = dist2(p, newest);
            if d < *m {
                *m = d;
            }
            if *m > best {
                best = *m;
                arg = j;
            }
        }
        order.push(arg as u32);
        min_d2[arg] = -1.0;
        newest = pos[arg];
    }
    Ok(order)
}

/// Exact greedy permutation of all candidates.
pub fn exact_greedy_permutation(candidates: &CandidateSet, start: usize) -> Result<SurfelCloud> {
    exact_greedy_permutation_prefix(
        candidates,
        start,
        candidates.len(),
        DEFAULT_REFERENCE_PREFIX,
    )
}

pub fn exact_greedy_permutation_prefix(
    candidates: &CandidateSet,
    start: usize,
    count: usize,
    reference_prefix: usize,
) -> Result<SurfelCloud> {
    let order = exact_greedy_order(candidates, start, count)?;
    Ok(SurfelCloud::from_order(
        candidates,
        &order,
        reference_prefix,
    ))
}

pub fn random_order(n: usize, target_count: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<u32> = (0..n as u32).collect();
    let target = target_count.min(n);
    let (prefix, _) = all.partial_shuffle(&mut rng, target);
    prefix.to_vec()
}

/// Uniformly random prefix, the baseline the orderings are compared against.
pub fn sample_random(
    candidates: &CandidateSet,
    target_count: usize,
    seed: u64,
) -> Result<SurfelCloud> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("no candidates to sample"));
    }
    let order = random_order(candidates.len(), target_count, seed);
    Ok(SurfelCloud::from_order(
        candidates,
        &order,
        DEFAULT_REFERENCE_PREFIX,
    ))
}
