use surfel_bench::report::save_rows;
use surfel_bench::views::orbit_views;
use surfel_bench::{
    run_position_grid, run_views, time_preprocessing_sources, GridConfig, ViewOptions,
};
use surfel_core::glam::Vec3;
use surfel_core::raster::gather_sources;
use surfel_core::{read_manifest, Aabb, CameraPose, CaptureConfig, SamplingConfig};

use super::{load_scene, node_id, read_json};
use crate::args::{BenchCommand, BenchGridArgs, BenchPreprocessArgs, BenchViewsArgs};
use crate::error::{CliError, Result};

pub fn run(cmd: &BenchCommand) -> Result<()> {
    match cmd {
        BenchCommand::Views(a) => views(a),
        BenchCommand::Grid(a) => grid(a),
        BenchCommand::Preprocess(a) => preprocess(a),
    }
}

fn views(args: &BenchViewsArgs) -> Result<()> {
    let scene = read_manifest(&args.scene)?;
    let poses: Vec<CameraPose> = match &args.cameras {
        Some(path) => read_json(path)?,
        None => orbit_views(&scene, args.views, args.distance, args.fov),
    };
    if poses.is_empty() {
        return Err(CliError::Usage("no views to render".into()));
    }
    let sizes: Vec<(u32, u32)> = args.sizes.iter().map(|s| (s.width, s.height)).collect();
    let options = ViewOptions {
        surfel_size: args.surfel_size,
        rule: args.rule.into(),
        zones: None,
        clock: args.clock.into(),
    };
    let report = run_views(&scene, &poses, &sizes, &options)?;
    save_rows(&args.out, &report.views)?;
    for lod in [false, true] {
        let rows: Vec<_> = report.views.iter().filter(|r| r.lod == lod).collect();
        let n = rows.len() as f64;
        println!(
            "{}: mean actions {:.1}, mean frame {:.2} ms, mean SSIM {:.4}",
            if lod { "lod" } else { "no-lod" },
            rows.iter().map(|r| r.actions as f64).sum::<f64>() / n,
            rows.iter().map(|r| r.frame_ms).sum::<f64>() / n,
            rows.iter().map(|r| r.ssim).sum::<f64>() / n,
        );
    }
    Ok(())
}

fn grid(args: &BenchGridArgs) -> Result<()> {
    let scene = read_manifest(&args.scene)?;
    let region = match &args.region {
        Some(v) => Aabb::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5])),
        None => scene.node(scene.root()).bounds,
    };
    let config = GridConfig {
        initial_size: args.initial_size,
        width: args.size.width,
        height_px: args.size.height,
        fov_y_degrees: args.fov,
        rule: args.rule.into(),
        warmup_ms: args.warmup,
        frame_repeats: args.repeats,
        clock: args.clock.into(),
        ..GridConfig::new(region, args.count, args.height, args.t_target)
    };
    let dist = run_position_grid(&scene, &config)?;
    save_rows(&args.out, &dist.samples)?;
    let q = dist.quartiles;
    println!(
        "{} frames: min {:.2}, q1 {:.2}, median {:.2}, q3 {:.2}, max {:.2} ms",
        q.count, q.min, q.q1, q.median, q.q3, q.max
    );
    Ok(())
}

fn preprocess(args: &BenchPreprocessArgs) -> Result<()> {
    let scene = load_scene(&args.scene)?;
    let node = node_id(&scene, args.node)?;
    let sources = gather_sources(&scene, node, false);
    let capture = CaptureConfig::with_resolution(args.resolution);
    let sampling = SamplingConfig {
        sample_size: args.sample_size,
        heuristic_period: args.k,
        seed: args.seed,
        ..SamplingConfig::default()
    };
    let rows =
        time_preprocessing_sources(&sources, &args.counts, &capture, &sampling, args.repeats)?;
    save_rows(&args.out, &rows)?;
    for r in &rows {
        println!(
            "{}: capture {:.1} ms, candidates {:.1} ms, sampling {:.1} ms ({} candidates)",
            r.target, r.capture_ms, r.candidate_ms, r.sampling_ms, r.candidates
        );
    }
    Ok(())
}
