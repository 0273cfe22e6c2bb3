//! Acceptance suite. Runs every criterion in sequence (timings are not
//! disturbed by parallel work) and prints one PASS/FAIL line per criterion.
//! Pass a substring as the first argument to run a subset.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfel_bench::preprocess::time_preprocessing;
use surfel_bench::scenes::REFERENCE_TRIANGLES;
use surfel_core::glam::{Mat4, Vec3};
use surfel_core::lodpipe::{capture_candidates, decode_surfels, encode_surfels};
use surfel_core::metrics::min_neighbor_distances;
use surfel_core::prefixmath::{projected_pixel_distance, radius_for_screen, PrefixModel};
use surfel_core::raster::CaptureSource;
use surfel_core::renderer::{render_geometry, splat_surfels};
use surfel_core::sampling::{exact_greedy_order, progressive_order, random_order};
use surfel_core::scene::shapes;
use surfel_core::{
    read_manifest, read_surfel_file, ssim, write_manifest, write_surfel_file, Aabb,
    BudgetController, Camera, CandidateSet, CaptureConfig, FrameBuffer, Projection, RadiusRule,
    Rgba8, SamplingConfig, Scene, Surfel, SurfelCloud, TriangleMesh, Viewport,
};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [(&str, Duration, Check); 10] = [
        (
            "oracle_equivalence",
            Duration::from_secs(60),
            oracle_equivalence,
        ),
        ("r_net_property", Duration::from_secs(60), r_net_property),
        (
            "distribution_quality",
            Duration::from_secs(300),
            distribution_quality,
        ),
        ("speed_asymmetry", Duration::from_secs(600), speed_asymmetry),
        ("prefix_formula", Duration::from_secs(10), prefix_formula),
        ("coverage", Duration::from_secs(300), coverage),
        ("controller", Duration::from_secs(10), controller),
        ("ssim", Duration::from_secs(10), ssim_properties),
        ("persistence", Duration::from_secs(10), persistence),
        (
            "preprocessing_table",
            Duration::from_secs(300),
            preprocessing_table,
        ),
    ];
    let filter = std::env::args().nth(1).filter(|a| !a.starts_with('-'));
    let mut failed = 0;
    let mut ran = 0;
    for (name, budget, check) in criteria {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!(
                "{detail}; took {:.1}s, budget {}s",
                elapsed.as_secs_f64(),
                budget.as_secs()
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name} ({:.1}s): {detail}", elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({:.1}s): {detail}", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

// Fixtures

fn reference_mesh() -> &'static TriangleMesh {
    static MESH: OnceLock<TriangleMesh> = OnceLock::new();
    MESH.get_or_init(|| shapes::reference_object(REFERENCE_TRIANGLES))
}

fn capture_reference(resolution: u32) -> CandidateSet {
    let sources = [CaptureSource::Mesh {
        transform: Mat4::IDENTITY,
        mesh: reference_mesh(),
    }];
    capture_candidates(&sources, &CaptureConfig::with_resolution(resolution))
        .expect("capture")
        .0
}

/// Candidates of the reference object captured at 1024 x 1024.
fn dense_candidates() -> &'static CandidateSet {
    static SET: OnceLock<CandidateSet> = OnceLock::new();
    SET.get_or_init(|| capture_reference(1024))
}

fn random_points(rng: &mut impl Rng, n: usize) -> CandidateSet {
    CandidateSet::from_positions(
        (0..n).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())),
    )
}

fn subset(c: &CandidateSet, n: usize, seed: u64) -> CandidateSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = index::sample(&mut rng, c.len(), n).into_vec();
    idx.sort_unstable();
    CandidateSet::from_surfels(idx.into_iter().map(|i| c.surfels[i]).collect())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

// Independent brute-force oracles

fn d2(a: Vec3, b: Vec3) -> f32 {
    (a - b).length_squared()
}

/// Farthest-point order by definition: each step takes the point with the
/// largest distance to the chosen set, the lowest index on ties.
fn brute_greedy(points: &[Vec3], start: usize) -> Vec<u32> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let mut order = vec![start as u32];
    chosen[start] = true;
    while order.len() < n {
        let mut best = (f32::NEG_INFINITY, usize::MAX);
        for i in (0..n).filter(|&i| !chosen[i]) {
            let d = order
                .iter()
                .map(|&j| d2(points[i], points[j as usize]))
                .fold(f32::INFINITY, f32::min);
            if d > best.0 {
                best = (d, i);
            }
        }
        chosen[best.1] = true;
        order.push(best.1 as u32);
    }
    order
}

fn brute_median_nn(points: &[Vec3]) -> f64 {
    let nn: Vec<f64> = (0..points.len())
        .map(|i| {
            let m = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| d2(points[i], points[j]))
                .fold(f32::INFINITY, f32::min);
            (m as f64).sqrt()
        })
        .collect();
    median(nn)
}

// Criteria

fn oracle_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let instances = 120;
    for k in 0..instances {
        let n = rng.random_range(1..=200);
        let c = random_points(&mut rng, n);
        let start = rng.random_range(0..n);
        let config = SamplingConfig {
            target_count: n,
            sample_size: n + rng.random_range(0..10),
            seed: rng.random(),
            start: Some(start),
            ..SamplingConfig::default()
        };
        let progressive = progressive_order(&c, &config).map_err(|e| e.to_string())?;
        let exact = exact_greedy_order(&c, start, n).map_err(|e| e.to_string())?;
        ensure!(
            progressive == exact,
            "instance {k} (n = {n}): progressive and exact orders differ"
        );
        ensure!(
            exact == brute_greedy(&c.positions(), start),
            "instance {k}: exact order differs from brute force"
        );
    }
    Ok(format!("{instances} instances, n <= 200, identical orders"))
}

fn r_net_property() -> Result<String, String> {
    let n = 500;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_points(&mut rng, n);
        let pts = c.positions();
        let order = exact_greedy_order(&c, rng.random_range(0..n), n).map_err(|e| e.to_string())?;
        let mut seen = vec![false; n];
        for &i in &order {
            ensure!(!seen[i as usize], "seed {seed}: index {i} repeated");
            seen[i as usize] = true;
        }
        // cover[j]: squared distance from point j to the current prefix.
        let mut cover = vec![f32::INFINITY; n];
        let mut packing = f32::INFINITY;
        for (k, &i) in order.iter().enumerate() {
            let p = pts[i as usize];
            for &j in &order[..k] {
                packing = packing.min(d2(p, pts[j as usize]));
            }
            for (j, c) in cover.iter_mut().enumerate() {
                *c = c.min(d2(pts[j], p));
            }
            if k >= 1 {
                let covering = cover.iter().copied().fold(0.0f32, f32::max);
                ensure!(
                    covering <= packing,
                    "seed {seed}, prefix {}: covering radius^2 {covering} exceeds packing radius^2 {packing}",
                    k + 1
                );
            }
        }
    }
    Ok(format!("20 seeds x {n} points, every prefix is an r-net"))
}

fn distribution_quality() -> Result<String, String> {
    let c = capture_reference(384);
    let prefixes = [1_000usize, 5_000, 10_000];
    let exact = exact_greedy_order(&c, 0, 10_000).map_err(|e| e.to_string())?;
    let exact_cloud = SurfelCloud::from_order(&c, &exact, 1000);
    let med = |cloud: &SurfelCloud, p: usize| {
        min_neighbor_distances(cloud, p)
            .map(|s| s.median)
            .map_err(|e| e.to_string())
    };
    let exact_med: Vec<f64> = prefixes
        .iter()
        .map(|&p| med(&exact_cloud, p))
        .collect::<Result<_, _>>()?;
    // Spot check of the metric against a brute-force median.
    let brute = brute_median_nn(&exact_cloud.positions()[..1000]);
    ensure!(
        brute == exact_med[0],
        "metric mismatch at prefix 1000: {brute} vs {}",
        exact_med[0]
    );

    let mut worst_vs_exact = f64::INFINITY;
    let mut worst_vs_random = f64::INFINITY;
    for seed in 0..20u64 {
        let order =
            progressive_order(&c, &SamplingConfig::new(10_000, seed)).map_err(|e| e.to_string())?;
        let prog = SurfelCloud::from_order(&c, &order, 1000);
        let rand = SurfelCloud::from_order(&c, &random_order(c.len(), 10_000, seed), 1000);
        for (k, &p) in prefixes.iter().enumerate() {
            let (mp, mr) = (med(&prog, p)?, med(&rand, p)?);
            ensure!(
                mp > mr,
                "seed {seed}, prefix {p}: progressive {mp} <= random {mr}"
            );
            ensure!(
                mp >= 0.5 * exact_med[k],
                "seed {seed}, prefix {p}: progressive {mp} < 0.5 x exact {}",
                exact_med[k]
            );
            worst_vs_exact = worst_vs_exact.min(mp / exact_med[k]);
            worst_vs_random = worst_vs_random.min(mp / mr);
        }
    }
    Ok(format!(
        "{} candidates; min progressive/exact {:.3}, min progressive/random {:.2} over 20 seeds",
        c.len(),
        worst_vs_exact,
        worst_vs_random
    ))
}

fn speed_asymmetry() -> Result<String, String> {
    let full = dense_candidates();
    ensure!(full.len() >= 1_000_000, "only {} candidates", full.len());
    let small = subset(full, full.len() / 10, 7);
    let target = 10_000;
    let prog = |c: &CandidateSet, seed| {
        timed(|| progressive_order(c, &SamplingConfig::new(target, seed)).map(|o| o.len())).1
    };
    let t_full = median((0..3).map(|s| prog(full, s)).collect());
    let t_small = median((0..3).map(|s| prog(&small, s)).collect());
    let (exact, t_exact) = timed(|| exact_greedy_order(full, 0, target));
    ensure!(
        exact.map_err(|e| e.to_string())?.len() == target,
        "exact sampler returned a short order"
    );
    let speedup = t_exact / t_full;
    let growth = t_full / t_small;
    let detail = format!(
        "{} candidates: exact {t_exact:.2}s, progressive {t_full:.3}s ({speedup:.1}x); {} candidates: progressive {t_small:.3}s (growth {growth:.2}x)",
        full.len(),
        small.len()
    );
    ensure!(speedup >= 10.0, "{detail}: speedup below 10x");
    ensure!(growth < 2.0, "{detail}: growth not below 2x");
    Ok(detail)
}

fn prefix_formula() -> Result<String, String> {
    let models = [
        PrefixModel::new(1000, 0.05, 1_000_000),
        PrefixModel::new(1000, 0.123456789, 100_000),
        PrefixModel::new(7, 3.0e-3, 28),
        PrefixModel::new(2, 1.0, 8),
    ];
    for m in models {
        let m = m.map_err(|e| e.to_string())?;
        let at = m.prefix_for_radius(m.r_m);
        ensure!(at.p == m.p_m && !at.saturated, "p(r_m) = {at:?} for {m:?}");
        let half = m.prefix_for_radius(m.r_m / 2.0);
        ensure!(
            half.p == 4 * m.p_m && !half.saturated,
            "p(r_m/2) = {half:?} for {m:?}"
        );
        let mut prev = u64::MAX;
        for k in 0..100 {
            let r = m.r_m * 10f64.powf(-2.0 + 4.0 * k as f64 / 99.0);
            let p = m.prefix_for_radius(r).p;
            ensure!(p <= prev, "not monotone at r = {r}: {p} > {prev}");
            ensure!(
                (1..=m.total).contains(&p),
                "p = {p} outside [1, {}]",
                m.total
            );
            prev = p;
        }
    }
    Ok("4 models: p(r_m) = p_m, p(r_m/2) = 4 p_m, non-increasing over 100 radii".into())
}

/// Cloud of 100k surfels ordered progressively from the 1024^2 capture.
fn coverage_cloud() -> &'static SurfelCloud {
    static CLOUD: OnceLock<SurfelCloud> = OnceLock::new();
    CLOUD.get_or_init(|| {
        let c = dense_candidates();
        let order = progressive_order(c, &SamplingConfig::new(100_000, 11)).expect("sampling");
        SurfelCloud::from_order(c, &order, 1000)
    })
}

const VIEW_DIR: Vec3 = Vec3::new(0.35, 0.45, 1.0);

fn view_camera(distance: f32, res: u32) -> Camera {
    Camera::look_at(
        VIEW_DIR.normalize() * distance,
        Vec3::ZERO,
        Vec3::Y,
        Projection::Perspective {
            fov_y: 45f32.to_radians(),
        },
        Viewport::new(res, res),
    )
}

struct SplatResult {
    prefix: u64,
    saturated: bool,
    holes: f64,
}

fn splat_with_rule(
    scene: &Scene,
    cloud: &SurfelCloud,
    camera: &Camera,
    s: f64,
    rule: RadiusRule,
) -> Result<SplatResult, String> {
    let model = PrefixModel::from_cloud(cloud).ok_or("cloud without r_m")?;
    let d_p =
        projected_pixel_distance(camera, scene.node(scene.root())).map_err(|e| e.to_string())?;
    let r = radius_for_screen(s, d_p, rule).map_err(|e| e.to_string())?;
    let est = model.prefix_for_radius(r);
    let (w, h) = (camera.viewport.width, camera.viewport.height);
    let mut truth = FrameBuffer::new(w, h);
    render_geometry(scene, camera, &mut truth);
    let mut fb = FrameBuffer::new(w, h);
    splat_surfels(
        &mut fb,
        camera,
        &Mat4::IDENTITY,
        cloud,
        est.p as usize,
        s as f32,
        r as f32,
    );
    let (mask, painted) = (truth.painted_mask(), fb.painted_mask());
    let covered = mask.iter().filter(|&&m| m).count();
    let holes = mask
        .iter()
        .zip(&painted)
        .filter(|&(&m, &p)| m && !p)
        .count();
    Ok(SplatResult {
        prefix: est.p,
        saturated: est.saturated,
        holes: holes as f64 / covered.max(1) as f64,
    })
}

fn coverage() -> Result<String, String> {
    let scene = Scene::single_mesh(reference_mesh().clone());
    let cloud = coverage_cloud();
    ensure!(cloud.len() == 100_000, "cloud has {} surfels", cloud.len());
    let s = 4.0;
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for distance in [5.0f32, 7.0, 10.0] {
        let cam = view_camera(distance, 512);
        let ok = splat_with_rule(&scene, cloud, &cam, s, RadiusRule::Consistent)?;
        let printed = splat_with_rule(&scene, cloud, &cam, s, RadiusRule::AsPrinted)?;
        lines.push(format!(
            "d={distance}: consistent p={} holes {:.2}%, as-printed p={} holes {:.2}%",
            ok.prefix,
            ok.holes * 100.0,
            printed.prefix,
            printed.holes * 100.0
        ));
        if ok.saturated {
            failures.push(format!("d={distance}: prefix saturated"));
        }
        if ok.holes > 0.05 {
            failures.push(format!("d={distance}: {:.2}% holes", ok.holes * 100.0));
        }
    }

    // Quality against the triangle render for growing prefixes at one view.
    let cam = view_camera(6.0, 512);
    let model = PrefixModel::from_cloud(cloud).ok_or("cloud without r_m")?;
    let d_p =
        projected_pixel_distance(&cam, scene.node(scene.root())).map_err(|e| e.to_string())?;
    let mut truth = FrameBuffer::new(512, 512);
    render_geometry(&scene, &cam, &mut truth);
    let truth = truth.to_rgb32f();
    let mut scores = Vec::new();
    for p in [100u64, 1_000, 10_000, 100_000] {
        let r = model.radius_for_prefix(p);
        let size = (2.0 * r / d_p) as f32;
        let mut fb = FrameBuffer::new(512, 512);
        splat_surfels(
            &mut fb,
            &cam,
            &Mat4::IDENTITY,
            cloud,
            p as usize,
            size,
            r as f32,
        );
        scores.push(
            ssim(&fb.to_rgb32f(), &truth)
                .map_err(|e| e.to_string())?
                .mean,
        );
    }
    for w in scores.windows(2) {
        if w[1] < w[0] - 0.01 {
            failures.push(format!("SSIM drops from {:.4} to {:.4}", w[0], w[1]));
        }
    }
    lines.push(format!(
        "SSIM over prefixes 100/1k/10k/100k: {:.4?}",
        scores
    ));
    let detail = lines.join("; ");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join(", ")))
    }
}

fn controller() -> Result<String, String> {
    for ratio in [0.9, 0.95, 1.0, 1.05, 1.1] {
        let mut c = BudgetController::new(10.0, 4.0);
        let s = c.update(10.0 * ratio);
        ensure!(s == 4.0, "deadband ratio {ratio} changed the size to {s}");
    }
    let mut c = BudgetController::new(10.0, 4.0);
    ensure!(c.update(20.0) == 5.0, "s_old 4, ratio 2 gave {}", c.size);
    let mut c = BudgetController::new(10.0, 8.0);
    ensure!(c.update(20.0) == 8.0, "upper clamp gave {}", c.size);
    let mut c = BudgetController::new(10.0, 1.0);
    ensure!(c.update(1.0) == 1.0, "lower clamp gave {}", c.size);

    // Constant scene load: frame time inversely proportional to the splat
    // area, t(s) = t_target * (s_eq / s)^2.
    let mut worst = 0;
    for (s0, s_eq) in [(1.0, 5.0), (8.0, 1.7), (2.0, 7.5), (6.0, 3.0), (1.0, 1.2)] {
        let t_target = 16.0;
        let mut c = BudgetController::new(t_target, s0);
        let mut settled = None;
        for it in 0..200 {
            let t = t_target * (s_eq / c.size).powi(2);
            let inside = (0.9..=1.1).contains(&(t / t_target));
            match (inside, settled) {
                (true, None) => settled = Some(it),
                (false, Some(_)) => settled = None,
                _ => {}
            }
            c.update(t);
            ensure!((1.0..=8.0).contains(&c.size), "size {} left [1, 8]", c.size);
        }
        let it = settled.ok_or(format!("no convergence from {s0} towards {s_eq}"))?;
        ensure!(
            it <= 60,
            "converged from {s0} towards {s_eq} only after {it} iterations"
        );
        worst = worst.max(it);
    }
    Ok(format!(
        "deadband, 4 -> 5, clamps exact; convergence within {worst} iterations"
    ))
}

fn ssim_properties() -> Result<String, String> {
    let scene = Scene::single_mesh(shapes::reference_object(4000));
    let render = |dir: Vec3| {
        let cam = Camera::look_at(
            dir * 3.5,
            Vec3::ZERO,
            Vec3::Y,
            Projection::Perspective { fov_y: 0.8 },
            Viewport::new(96, 80),
        );
        let mut fb = FrameBuffer::new(96, 80);
        render_geometry(&scene, &cam, &mut fb);
        fb.to_rgb32f()
    };
    let (a, b) = (
        render(Vec3::Z),
        render(Vec3::new(0.3, 0.2, 1.0).normalize()),
    );
    let err = |e: surfel_core::Error| e.to_string();
    let self_a = ssim(&a, &a).map_err(err)?.mean;
    ensure!(self_a == 1.0, "self SSIM {self_a}");
    let (ab, ba) = (
        ssim(&a, &b).map_err(err)?.mean,
        ssim(&b, &a).map_err(err)?.mean,
    );
    ensure!((ab - ba).abs() <= 1e-12, "asymmetric: {ab} vs {ba}");

    let mut worst = 0.0f64;
    for (x, y) in [
        (0.2f32, 0.7f32),
        (0.0, 1.0),
        (0.5, 0.5),
        (0.9, 0.1),
        (0.33, 0.34),
    ] {
        let fill = |v: f32| surfel_core::glam::Vec3::splat(v);
        let img = |v: Vec3| image::Rgb32FImage::from_pixel(24, 16, image::Rgb(v.to_array()));
        let got = ssim(&img(fill(x)), &img(fill(y))).map_err(err)?.mean;
        let (x, y) = (x as f64, y as f64);
        let c1 = 1e-4;
        let expected = (2.0 * x * y + c1) / (x * x + y * y + c1);
        worst = worst.max((got - expected).abs());
    }
    ensure!(worst <= 1e-9, "constant-image error {worst}");
    Ok(format!(
        "self 1.0, |ab - ba| = {:.1e}, constant-image error {worst:.1e}",
        (ab - ba).abs()
    ))
}

fn random_cloud(rng: &mut ChaCha8Rng) -> SurfelCloud {
    let n = rng.random_range(0..400);
    let mut v = || {
        Vec3::new(
            rng.random_range(-1e3..1e3),
            rng.random_range(-1e-3..1e-3),
            rng.random::<f32>(),
        )
    };
    let surfels: Vec<Surfel> = (0..n)
        .map(|_| Surfel {
            position: v(),
            normal: v().normalize_or(Vec3::Z),
            color: Rgba8([0; 4]),
        })
        .collect();
    let surfels = surfels
        .into_iter()
        .map(|mut s| {
            s.color = Rgba8(rng.random());
            s
        })
        .collect();
    let lo = Vec3::new(rng.random(), rng.random(), rng.random()) * -10.0;
    let mut cloud =
        SurfelCloud::from_surfels(surfels, rng.random_range(1..2000), Aabb::new(lo, lo.abs()));
    if rng.random_bool(0.5) {
        cloud.r_m = rng.random::<f64>() * 10f64.powi(rng.random_range(-8..8));
    }
    cloud
}

fn persistence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let err = |e: surfel_core::Error| e.to_string();
    for k in 0..100 {
        let cloud = random_cloud(&mut rng);
        let bytes = encode_surfels(&cloud);
        let path = dir.path().join(format!("c{k}.pbs"));
        write_surfel_file(&cloud, &path).map_err(err)?;
        let back = read_surfel_file(&path).map_err(err)?;
        ensure!(
            encode_surfels(&back) == bytes,
            "cloud {k}: re-encoded bytes differ"
        );
        ensure!(
            decode_surfels(&bytes, &path).map_err(err)? == back,
            "cloud {k}: decode mismatch"
        );
        ensure!(
            back.r_m.to_bits() == cloud.r_m.to_bits() && back.p_m == cloud.p_m,
            "cloud {k}: header differs"
        );
        ensure!(
            back.surfels.iter().zip(&cloud.surfels).all(|(a, b)| a
                .position
                .to_array()
                .map(f32::to_bits)
                == b.position.to_array().map(f32::to_bits)
                && a.normal.to_array().map(f32::to_bits) == b.normal.to_array().map(f32::to_bits)
                && a.color == b.color),
            "cloud {k}: surfels differ"
        );

        let mut scene = Scene::single_mesh(shapes::quad());
        let root = scene.root();
        let seed = rng.random();
        scene.set_lod(root, Some(Arc::new(cloud.clone())));
        scene.set_lod_seed(root, Some(seed));
        let sdir = dir.path().join(format!("scene{k}"));
        write_manifest(&scene, &sdir).map_err(err)?;
        let loaded = read_manifest(&sdir).map_err(err)?;
        let node = loaded.node(loaded.root());
        let lod = node.lod.as_ref().ok_or(format!("cloud {k}: LOD lost"))?;
        ensure!(
            encode_surfels(lod) == bytes,
            "cloud {k}: manifest LOD bytes differ"
        );
        ensure!(
            lod.r_m.to_bits() == cloud.r_m.to_bits(),
            "cloud {k}: manifest r_m differs"
        );
        ensure!(node.lod_seed == Some(seed), "cloud {k}: seed differs");
        ensure!(
            node.transform.to_cols_array().map(f32::to_bits)
                == scene.node(root).transform.to_cols_array().map(f32::to_bits),
            "cloud {k}: transform differs"
        );
    }
    Ok("100 random clouds, surfel file and manifest round-trips bit-exact".into())
}

fn preprocessing_table() -> Result<String, String> {
    let counts = [10_000usize, 50_000, 100_000];
    let rows = time_preprocessing(
        reference_mesh(),
        &counts,
        &CaptureConfig::with_resolution(512),
        &SamplingConfig::new(1, 5),
        5,
    )
    .map_err(|e| e.to_string())?;
    let front: Vec<f64> = rows.iter().map(|r| r.capture_ms + r.candidate_ms).collect();
    let mean = front.iter().sum::<f64>() / front.len() as f64;
    let table: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{}: capture {:.0} ms, candidates {:.0} ms, sampling {:.0} ms",
                r.target, r.capture_ms, r.candidate_ms, r.sampling_ms
            )
        })
        .collect();
    let detail = format!("{} candidates; {}", rows[0].candidates, table.join("; "));
    for (r, f) in rows.iter().zip(&front) {
        ensure!(
            (f / mean - 1.0).abs() <= 0.2,
            "{detail}: capture+candidates at {} deviates {:.0}% from the mean",
            r.target,
            (f / mean - 1.0) * 100.0
        );
    }
    for w in rows.windows(2) {
        ensure!(
            w[1].sampling_ms > w[0].sampling_ms,
            "{detail}: sampling time not increasing at {}",
            w[1].target
        );
    }
    Ok(detail)
}
