use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use surfel_core::glam::Mat4;
use surfel_core::lodpipe::capture_candidates;
use surfel_core::raster::CaptureSource;
use surfel_core::sampling::{exact_greedy_order, progressive_order};
use surfel_core::scene::shapes;
use surfel_core::{CaptureConfig, SamplingConfig};

fn sampling(c: &mut Criterion) {
    let mesh = shapes::reference_object(35_000);
    let sources = [CaptureSource::Mesh {
        transform: Mat4::IDENTITY,
        mesh: &mesh,
    }];
    let (candidates, _) =
        capture_candidates(&sources, &CaptureConfig::with_resolution(256)).unwrap();

    let mut g = c.benchmark_group("sampling");
    g.sample_size(10);
    for target in [1_000usize, 5_000] {
        g.bench_with_input(BenchmarkId::new("progressive", target), &target, |b, &t| {
            b.iter(|| progressive_order(&candidates, &SamplingConfig::new(t, 1)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("exact", target), &target, |b, &t| {
            b.iter(|| exact_greedy_order(&candidates, 0, t).unwrap())
        });
    }
    g.finish();

    c.bench_function("capture_256", |b| {
        b.iter(|| capture_candidates(&sources, &CaptureConfig::with_resolution(256)).unwrap())
    });
}

criterion_group!(benches, sampling);
criterion_main!(benches);
