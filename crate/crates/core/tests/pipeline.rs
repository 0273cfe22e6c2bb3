use std::fs;

use glam::{Mat4, Vec3};
use surfel_core::lodpipe::{encode_surfels, read_manifest_file};
use surfel_core::prefixmath::{draw_call_count, select_render_actions, PrefixModel};
use surfel_core::raster::{capture_camera, rasterize_sources, CaptureSource};
use surfel_core::renderer::{render_frame, render_geometry, splat_surfels};
use surfel_core::sampling::{CandidateCollector, SurfelCloud};
use surfel_core::scene::shapes;
use surfel_core::{
    generate_lods, read_manifest, ssim, write_manifest, Camera, CaptureConfig, Error, FrameBuffer,
    LodPolicy, NodeId, Projection, RenderAction, SamplingConfig, Scene, SceneBuilder,
    SelectOptions, Viewport,
};

/// 2x2 grid of 3000-triangle objects under one group (12k triangles total).
fn grid_scene() -> Scene {
    let mut b = SceneBuilder::new();
    let m = b.add_mesh(shapes::reference_object(3000));
    let leaves: Vec<NodeId> = (0..4)
        .map(|i| {
            let t = Vec3::new((i % 2) as f32 * 3.0, 0.0, (i / 2) as f32 * 3.0);
            b.add_leaf(format!("obj{i}"), Mat4::from_translation(t), m)
        })
        .collect();
    let root = b.add_group("root", Mat4::IDENTITY, leaves);
    b.build(root).unwrap()
}

fn small_capture() -> CaptureConfig {
    CaptureConfig::with_resolution(64)
}

fn built(bottom_up: bool) -> (Scene, surfel_core::lodpipe::LodReport) {
    let mut scene = grid_scene();
    let policy = LodPolicy {
        bottom_up,
        ..LodPolicy::default()
    };
    let report = generate_lods(
        &mut scene,
        &policy,
        &small_capture(),
        &SamplingConfig::new(1, 7),
    )
    .unwrap();
    (scene, report)
}

#[test]
fn lods_follow_the_policy_in_both_orders() {
    let (bu, bu_report) = built(true);
    let (td, td_report) = built(false);
    let policy = LodPolicy::default();
    for (scene, report) in [(&bu, &bu_report), (&td, &td_report)] {
        assert!(report.skipped.is_empty());
        assert_eq!(report.generated.len(), 5);
        for s in &report.generated {
            assert!(s.surfels <= policy.surfel_count(s.triangles));
            assert!(s.surfels <= s.candidates);
            let cloud = scene.node(s.node).lod.as_ref().unwrap();
            assert_eq!(cloud.len(), s.surfels);
            assert!(cloud.has_valid_r_m());
        }
    }
    let placed = |s: &Scene| {
        s.nodes()
            .iter()
            .map(|n| n.lod.is_some())
            .collect::<Vec<_>>()
    };
    assert_eq!(placed(&bu), placed(&td));

    let root_bu = bu_report
        .generated
        .iter()
        .find(|s| s.node == bu.root())
        .unwrap();
    let root_td = td_report
        .generated
        .iter()
        .find(|s| s.node == td.root())
        .unwrap();
    assert!(root_bu.used_child_lods);
    assert!(!root_td.used_child_lods);
}

#[test]
fn bottom_up_parent_captures_child_discs_not_triangles() {
    let (scene, _) = built(true);
    let sources = surfel_core::raster::gather_sources(&scene, scene.root(), true);
    assert_eq!(sources.len(), 4);
    assert!(sources
        .iter()
        .all(|s| matches!(s, CaptureSource::Surfels { .. })));
}

#[test]
fn manifest_round_trip_is_exact() {
    let (scene, _) = built(true);
    let dir = tempfile::tempdir().unwrap();
    write_manifest(&scene, dir.path()).unwrap();
    // The shared mesh is stored once.
    assert_eq!(fs::read_dir(dir.path().join("meshes")).unwrap().count(), 1);
    let back = read_manifest(dir.path()).unwrap();
    assert_eq!(back.len(), scene.len());
    assert_eq!(back.root(), scene.root());
    for (a, b) in scene.nodes().iter().zip(back.nodes()) {
        assert_eq!(
            a.transform.to_cols_array().map(f32::to_bits),
            b.transform.to_cols_array().map(f32::to_bits)
        );
        assert_eq!(a.bounds, b.bounds);
        assert_eq!(a.triangle_count, b.triangle_count);
        assert_eq!(a.lod_seed, b.lod_seed);
        match (&a.lod, &b.lod) {
            (Some(x), Some(y)) => {
                assert_eq!(encode_surfels(x), encode_surfels(y));
                assert_eq!(x.r_m.to_bits(), y.r_m.to_bits());
            }
            (None, None) => {}
            _ => panic!("LOD presence differs"),
        }
    }
    // Writing the loaded scene again reproduces the manifest text.
    let dir2 = tempfile::tempdir().unwrap();
    write_manifest(&back, dir2.path()).unwrap();
    assert_eq!(
        fs::read_to_string(dir.path().join("scene.json")).unwrap(),
        fs::read_to_string(dir2.path().join("scene.json")).unwrap()
    );
}

#[test]
fn single_node_manifest_round_trips() {
    let scene = Scene::single_mesh(shapes::cube(Vec3::ZERO, Vec3::ONE));
    let dir = tempfile::tempdir().unwrap();
    write_manifest(&scene, dir.path()).unwrap();
    let m = read_manifest_file(dir.path()).unwrap();
    assert_eq!(m.nodes.len(), 1);
    let back = read_manifest(dir.path()).unwrap();
    assert_eq!(back.len(), 1);
    assert_eq!(
        back.node(back.root()).bounds,
        scene.node(scene.root()).bounds
    );
}

#[test]
fn missing_surfel_file_is_a_load_error() {
    let (scene, _) = built(true);
    let dir = tempfile::tempdir().unwrap();
    write_manifest(&scene, dir.path()).unwrap();
    let path = dir.path().join("scene.json");
    let text = fs::read_to_string(&path)
        .unwrap()
        .replace("lods/node_0.pbs", "lods/missing.pbs");
    fs::write(&path, text).unwrap();
    assert!(matches!(
        read_manifest(dir.path()),
        Err(Error::DanglingReference(_))
    ));
}

fn persp(position: Vec3, target: Vec3, w: u32, h: u32) -> Camera {
    Camera::look_at(
        position,
        target,
        Vec3::Y,
        Projection::Perspective { fov_y: 1.0 },
        Viewport::new(w, h),
    )
}

#[test]
fn selection_examples() {
    let (scene, _) = built(true);
    let center = scene.node(scene.root()).bounds.center();
    let opts = SelectOptions::default();

    let away = persp(
        center + Vec3::new(0.0, 0.0, 50.0),
        center + Vec3::new(0.0, 0.0, 100.0),
        256,
        256,
    );
    let items = select_render_actions(&scene, &away, 2.0, None, &opts);
    assert_eq!(items.len(), 1);
    assert!(matches!(items[0].action, RenderAction::Skip));
    assert_eq!(draw_call_count(&items), 0);

    let far = persp(center + Vec3::new(0.0, 0.0, 200.0), center, 256, 256);
    let items = select_render_actions(&scene, &far, 2.0, None, &opts);
    let root_model =
        PrefixModel::from_cloud(scene.node(scene.root()).lod.as_ref().unwrap()).unwrap();
    match items.as_slice() {
        [item] => match item.action {
            RenderAction::SurfelPrefix { count, radius, .. } => {
                assert!(radius as f64 >= root_model.r_m);
                assert!(count <= root_model.p_m);
            }
            other => panic!("{other:?}"),
        },
        other => panic!("{other:?}"),
    }
    let no_lod = SelectOptions {
        use_lod: false,
        ..opts
    };
    let geo = select_render_actions(&scene, &far, 2.0, None, &no_lod);
    assert_eq!(draw_call_count(&geo), 4);
    assert!(draw_call_count(&items) < draw_call_count(&geo));
}

#[test]
fn approaching_camera_never_decreases_alpha() {
    let (scene, _) = built(true);
    let center = scene.node(scene.root()).bounds.center();
    let opts = SelectOptions::default();
    let mut prev_alpha = 0.0;
    let mut saw_blend = false;
    for step in 0..120 {
        let dist = 60.0 * 0.96f32.powi(step) + 4.0;
        let cam = persp(center + Vec3::new(0.0, 2.0, dist), center, 320, 240);
        let items = select_render_actions(&scene, &cam, 2.0, None, &opts);
        // A fully blended-out parent emits nothing and hands over to its children.
        let alpha = match items
            .iter()
            .find(|i| i.node == scene.root())
            .map(|i| i.action)
        {
            Some(RenderAction::SurfelPrefix { .. }) => 0.0,
            Some(RenderAction::BlendParentChild { alpha, .. }) => {
                saw_blend = true;
                alpha
            }
            Some(other) => panic!("step {step}: {other:?}"),
            None => 1.0,
        };
        assert!(alpha >= prev_alpha, "step {step}: {alpha} < {prev_alpha}");
        prev_alpha = alpha;
        // Prefixes are only drawn when the cloud is dense enough.
        for item in &items {
            if let RenderAction::SurfelPrefix { count, .. } = item.action {
                let cloud = scene.node(item.node).lod.as_ref().unwrap();
                assert!(count as usize <= cloud.len());
            }
        }
    }
    assert!(saw_blend);
}

#[test]
fn dense_prefix_matches_geometry_at_capture_view() {
    let mesh = shapes::reference_object(20_000);
    let scene = Scene::single_mesh(mesh.clone());
    let cam = capture_camera(&mesh.bounds(), Vec3::new(-0.6, -0.4, -1.0), 160);
    let gb = rasterize_sources(
        &[CaptureSource::Mesh {
            transform: Mat4::IDENTITY,
            mesh: &mesh,
        }],
        cam,
        true,
    );
    let mut c = CandidateCollector::new();
    c.add_buffer(&gb);
    let candidates = c.finish();
    let order: Vec<u32> = (0..candidates.len() as u32).collect();
    let cloud = SurfelCloud::from_order(&candidates, &order, 1000);

    let mut truth = FrameBuffer::new(160, 160);
    render_geometry(&scene, &cam, &mut truth);
    let mut fb = FrameBuffer::new(160, 160);
    let radius = cam.pixel_spacing_at(1.0) * 0.5;
    splat_surfels(
        &mut fb,
        &cam,
        &Mat4::IDENTITY,
        &cloud,
        cloud.len(),
        1.0,
        radius,
    );
    let s = ssim(&fb.to_rgb32f(), &truth.to_rgb32f()).unwrap().mean;
    assert!(s >= 0.8, "ssim {s}");

    // render_frame with a Geometry action reproduces the reference.
    let mut again = FrameBuffer::new(160, 160);
    let items = [surfel_core::RenderItem {
        node: scene.root(),
        action: RenderAction::Geometry,
    }];
    render_frame(&scene, &items, &cam, &mut again);
    assert_eq!(again, truth);
}
