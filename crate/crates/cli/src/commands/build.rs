use std::time::Instant;

use serde::Serialize;
use surfel_bench::report::save_rows;
use surfel_core::lodpipe::NodeLodStats;
use surfel_core::{generate_lods, write_manifest, CaptureConfig, LodPolicy, SamplingConfig, Scene};

use super::{create_dir, load_scene};
use crate::args::BuildArgs;
use crate::error::{CliError, Result};

pub const BUILD_REPORT_FILE: &str = "build_report.csv";

#[derive(Debug, Serialize)]
struct BuildRow<'a> {
    node: u32,
    name: &'a str,
    triangles: u64,
    candidates: usize,
    surfels: usize,
    seed: u64,
    used_child_lods: bool,
    capture_ms: f64,
    candidate_ms: f64,
    sampling_ms: f64,
}

fn row<'a>(scene: &'a Scene, s: &NodeLodStats) -> BuildRow<'a> {
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    BuildRow {
        node: s.node.0,
        name: &scene.node(s.node).name,
        triangles: s.triangles,
        candidates: s.candidates,
        surfels: s.surfels,
        seed: s.seed,
        used_child_lods: s.used_child_lods,
        capture_ms: ms(s.timings.capture),
        candidate_ms: ms(s.timings.candidates),
        sampling_ms: ms(s.timings.sampling),
    }
}

pub fn run(args: &BuildArgs) -> Result<()> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot use {n} threads: {e}")))?;
    }
    let mut scene = load_scene(&args.scene)?;
    scene.clear_lods();
    let policy = LodPolicy {
        min_triangles_for_lod: args.min_triangles,
        lod_triangle_threshold: args.lod_threshold,
        max_surfels: args.max_surfels,
        bottom_up: !args.top_down,
        ..LodPolicy::default()
    };
    let capture = CaptureConfig {
        resolution: args.resolution,
        cull_backfaces: !args.no_cull,
        ..CaptureConfig::default()
    };
    let sampling = SamplingConfig {
        sample_size: args.sample_size,
        heuristic_period: args.k,
        seed: args.seed,
        ..SamplingConfig::default()
    };
    let start = Instant::now();
    let report = generate_lods(&mut scene, &policy, &capture, &sampling)?;
    let elapsed = start.elapsed();

    create_dir(&args.out)?;
    let manifest = write_manifest(&scene, &args.out)?;
    let rows: Vec<BuildRow> = report.generated.iter().map(|s| row(&scene, s)).collect();
    save_rows(args.out.join(BUILD_REPORT_FILE), &rows)?;
    for id in &report.skipped {
        log::warn!("node {id}: no candidates captured, no LOD written");
    }
    println!(
        "{} nodes, {} LODs ({} surfels, {} skipped) in {:.2} s -> {}",
        scene.len(),
        report.generated.len(),
        report.generated.iter().map(|s| s.surfels).sum::<usize>(),
        report.skipped.len(),
        elapsed.as_secs_f64(),
        manifest.display()
    );
    Ok(())
}
