use criterion::{criterion_group, criterion_main, Criterion};
use surfel_bench::scenes::{grid_scene, GridSceneConfig};
use surfel_bench::views::orbit_views;
use surfel_core::prefixmath::select_render_actions;
use surfel_core::{
    generate_lods, render_frame, CaptureConfig, FrameBuffer, LodPolicy, SamplingConfig,
    SelectOptions, Viewport,
};

fn render(c: &mut Criterion) {
    let mut scene = grid_scene(&GridSceneConfig {
        rows: 4,
        cols: 4,
        ..Default::default()
    })
    .unwrap();
    generate_lods(
        &mut scene,
        &LodPolicy::default(),
        &CaptureConfig::with_resolution(128),
        &SamplingConfig::new(1, 1),
    )
    .unwrap();
    let camera = orbit_views(&scene, 1, 1.5, 60.0)[0].to_camera(Viewport::new(320, 240));
    let mut fb = FrameBuffer::new(320, 240);

    for (name, use_lod) in [("frame_lod", true), ("frame_geometry", false)] {
        let options = SelectOptions {
            use_lod,
            ..SelectOptions::default()
        };
        c.bench_function(name, |b| {
            b.iter(|| {
                fb.clear();
                let items = select_render_actions(&scene, &camera, 2.0, None, &options);
                render_frame(&scene, &items, &camera, &mut fb)
            })
        });
    }
}

criterion_group!(benches, render);
criterion_main!(benches);
