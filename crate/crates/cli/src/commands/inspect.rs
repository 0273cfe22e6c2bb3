//! G-buffer dumps, prefix distance statistics and image comparison.

use std::path::Path;

use surfel_core::metrics::save_distance_csv;
use surfel_core::{
    capture_gbuffers, min_neighbor_distances, read_manifest, ssim, CaptureConfig, DistanceStats,
};

use super::{create_dir, load_scene, node_id};
use crate::args::{GbufferArgs, SsimArgs, StatsArgs};
use crate::error::{CliError, Result};

pub fn gbuffer(args: &GbufferArgs) -> Result<()> {
    let scene = load_scene(&args.scene)?;
    let node = node_id(&scene, args.node)?;
    let config = CaptureConfig {
        resolution: args.resolution,
        cull_backfaces: !args.no_cull,
        ..CaptureConfig::default()
    };
    let set = capture_gbuffers(&scene, node, &config)?;
    create_dir(&args.out)?;
    let mut written = 0;
    for (d, gb) in set.buffers.iter().enumerate() {
        for &channel in &args.channel {
            let name = format!(
                "node{}_dir{d}_{}.{}",
                node.0,
                channel.name(),
                args.format.extension()
            );
            gb.save_channel(channel.into(), args.out.join(name))?;
            written += 1;
        }
    }
    println!(
        "node {}: {} directions, {} covered pixels, {written} images -> {}",
        node.0,
        set.buffers.len(),
        set.covered_count(),
        args.out.display()
    );
    Ok(())
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    let scene = read_manifest(&args.scene)?;
    let node = node_id(&scene, args.node)?;
    let cloud = scene
        .node(node)
        .lod
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("node {} has no LOD", node.0)))?;
    let rows = args
        .prefixes
        .iter()
        .map(|&p| {
            let s: DistanceStats = min_neighbor_distances(cloud, p)?;
            Ok(if args.normalize {
                s.normalized(f64::from(cloud.bounds.diagonal()))
            } else {
                s
            }
            .summary())
        })
        .collect::<Result<Vec<_>>>()?;
    save_distance_csv(&args.out, &rows)?;
    for r in &rows {
        println!(
            "prefix {}: median {:.6e}, min {:.6e}",
            r.prefix, r.median, r.min
        );
    }
    Ok(())
}

fn load_rgb(path: &Path) -> Result<image::Rgb32FImage> {
    let img = image::open(path).map_err(|source| CliError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(img.to_rgb32f())
}

pub fn compare(args: &SsimArgs) -> Result<()> {
    let result = ssim(&load_rgb(&args.a)?, &load_rgb(&args.b)?)?;
    if let Some(map) = &args.map {
        result.save_map(map)?;
    }
    println!("{:.6}", result.mean);
    Ok(())
}
