use std::time::Instant;

use surfel_core::prefixmath::{draw_call_count, select_render_actions};
use surfel_core::renderer::render_geometry;
use surfel_core::{read_manifest, render_frame, FrameBuffer, SelectOptions, Viewport};

use super::read_pose;
use crate::args::RenderArgs;
use crate::error::{CliError, Result};

pub fn run(args: &RenderArgs) -> Result<()> {
    if !(args.surfel_size.is_finite() && args.surfel_size > 0.0) {
        return Err(CliError::Usage("surfel size must be positive".into()));
    }
    let scene = read_manifest(&args.scene)?;
    let pose = read_pose(&args.camera)?;
    let camera = pose.to_camera(Viewport::new(args.size.width, args.size.height));
    let mut fb = FrameBuffer::new(args.size.width, args.size.height);

    let start = Instant::now();
    let (actions, stats) = if args.geometry {
        let stats = render_geometry(&scene, &camera, &mut fb);
        (stats.draw_calls as usize, stats)
    } else {
        let options = SelectOptions {
            rule: args.rule.into(),
            use_lod: !args.no_lod,
            ..SelectOptions::default()
        };
        let items = select_render_actions(&scene, &camera, args.surfel_size, None, &options);
        (
            draw_call_count(&items),
            render_frame(&scene, &items, &camera, &mut fb),
        )
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    fb.save(&args.out)?;
    println!(
        "{} {}: {actions} actions, {} triangles, {} surfels, {ms:.2} ms",
        args.out.display(),
        args.size,
        stats.triangles,
        stats.surfels
    );
    Ok(())
}
