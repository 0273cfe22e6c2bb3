use std::fs;
use std::io::Write;

use surfel_bench::{grid_scene, reference_scene, GridSceneConfig, REFERENCE_TRIANGLES};
use surfel_core::prefixmath::test_vectors;
use surfel_core::write_manifest;

use super::create_dir;
use crate::args::{GenerateArgs, SceneKind, VectorsArgs};
use crate::error::{io_err, Result};

pub fn scene(args: &GenerateArgs) -> Result<()> {
    let scene = match args.kind {
        SceneKind::Reference => reference_scene(args.triangles.unwrap_or(REFERENCE_TRIANGLES)),
        SceneKind::Grid => grid_scene(&GridSceneConfig {
            rows: args.rows,
            cols: args.cols,
            spacing: args.spacing,
            triangles_per_object: args.triangles.unwrap_or(3000),
            seed: args.seed,
        })?,
    };
    create_dir(&args.out)?;
    let path = write_manifest(&scene, &args.out)?;
    println!(
        "{} nodes, {} triangles -> {}",
        scene.len(),
        scene.node(scene.root()).triangle_count,
        path.display()
    );
    Ok(())
}

pub fn vectors(args: &VectorsArgs) -> Result<()> {
    let text = serde_json::to_string_pretty(&test_vectors()).expect("JSON values serialize");
    match &args.out {
        Some(path) => fs::write(path, text + "\n").map_err(io_err(path))?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(io_err("<stdout>"))?;
        }
    }
    Ok(())
}
