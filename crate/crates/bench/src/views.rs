//! Per-view rendering statistics with and without LODs.

use std::time::Instant;

use cpu_time::ThreadTime;
use surfel_core::prefixmath::{draw_call_count, select_render_actions};
use surfel_core::{
    render_frame, ssim, CameraPose, FoveaZones, FrameBuffer, FrameStats, RadiusRule, Result, Scene,
    SelectOptions, Viewport,
};

use crate::report::{BenchReport, ViewRow};

#[derive(Debug, Clone, PartialEq)]
pub struct ViewOptions {
    pub surfel_size: f64,
    pub rule: RadiusRule,
    pub zones: Option<FoveaZones>,
    pub clock: FrameClock,
}

impl Default for ViewOptions {
    fn default() -> Self {
        Self {
            surfel_size: 2.0,
            rule: RadiusRule::Consistent,
            zones: None,
            clock: FrameClock::Wall,
        }
    }
}

/// How frame times are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameClock {
    #[default]
    Wall,
    /// CPU time of the rendering thread; excludes time spent preempted by
    /// other processes.
    ThreadCpu,
}

/// Selection plus rendering of one frame, timed together.
pub(crate) fn timed_frame(
    scene: &Scene,
    camera: &surfel_core::Camera,
    surfel_size: f64,
    zones: Option<&FoveaZones>,
    options: &SelectOptions,
    fb: &mut FrameBuffer,
    clock: FrameClock,
) -> (usize, FrameStats, f64) {
    let wall = Instant::now();
    let cpu = ThreadTime::now();
    fb.clear();
    let items = select_render_actions(scene, camera, surfel_size, zones, options);
    let stats = render_frame(scene, &items, camera, fb);
    let elapsed = match clock {
        FrameClock::Wall => wall.elapsed(),
        FrameClock::ThreadCpu => cpu.elapsed(),
    };
    (draw_call_count(&items), stats, elapsed.as_secs_f64() * 1e3)
}

/// For every view and resolution, renders the scene without LODs (the
/// reference) and with LODs, recording counts, times and SSIM.
pub fn run_views(
    scene: &Scene,
    views: &[CameraPose],
    resolutions: &[(u32, u32)],
    options: &ViewOptions,
) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    let lod = SelectOptions {
        rule: options.rule,
        ..SelectOptions::default()
    };
    let no_lod = SelectOptions {
        use_lod: false,
        ..lod
    };
    for (v, pose) in views.iter().enumerate() {
        for &(w, h) in resolutions {
            let camera = pose.to_camera(Viewport::new(w, h));
            let mut reference = FrameBuffer::new(w, h);
            let (actions, stats, ms) = timed_frame(
                scene,
                &camera,
                options.surfel_size,
                options.zones.as_ref(),
                &no_lod,
                &mut reference,
                options.clock,
            );
            let ref_img = reference.to_rgb32f();
            report.views.push(ViewRow {
                view: v,
                width: w,
                height: h,
                lod: false,
                actions,
                triangles: stats.triangles,
                surfels: stats.surfels,
                frame_ms: ms,
                ssim: ssim(&ref_img, &ref_img)?.mean,
            });

            let mut fb = FrameBuffer::new(w, h);
            let (actions, stats, ms) = timed_frame(
                scene,
                &camera,
                options.surfel_size,
                options.zones.as_ref(),
                &lod,
                &mut fb,
                options.clock,
            );
            report.views.push(ViewRow {
                view: v,
                width: w,
                height: h,
                lod: true,
                actions,
                triangles: stats.triangles,
                surfels: stats.surfels,
                frame_ms: ms,
                ssim: ssim(&fb.to_rgb32f(), &ref_img)?.mean,
            });
            log::debug!("view {v} at {w}x{h} done");
        }
    }
    Ok(report)
}

/// Evenly spaced views on a horizontal circle around the scene, all aimed
/// at its center.
pub fn orbit_views(
    scene: &Scene,
    count: usize,
    distance_factor: f32,
    fov_y_degrees: f32,
) -> Vec<CameraPose> {
    let b = scene.node(scene.root()).bounds;
    let c = b.center();
    let r = b.diagonal() * 0.5 * distance_factor;
    (0..count)
        .map(|i| {
            let a = std::f32::consts::TAU * i as f32 / count as f32;
            CameraPose {
                position: c + surfel_core::glam::Vec3::new(a.cos() * r, r * 0.35, a.sin() * r),
                target: c,
                up: surfel_core::glam::Vec3::Y,
                fov_y_degrees,
                ortho_height: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes::{grid_scene, GridSceneConfig};
    use surfel_core::{generate_lods, CaptureConfig, LodPolicy, SamplingConfig};

    fn small_lod_scene() -> Scene {
        let mut scene = grid_scene(&GridSceneConfig {
            rows: 3,
            cols: 3,
            triangles_per_object: 1200,
            ..Default::default()
        })
        .unwrap();
        generate_lods(
            &mut scene,
            &LodPolicy::default(),
            &CaptureConfig::with_resolution(48),
            &SamplingConfig::new(1, 3),
        )
        .unwrap();
        scene
    }

    #[test]
    fn view_rows_follow_the_table_semantics() {
        let scene = small_lod_scene();
        let views = orbit_views(&scene, 3, 4.0, 50.0);
        let report = run_views(
            &scene,
            &views,
            &[(64, 48), (96, 72)],
            &ViewOptions::default(),
        )
        .unwrap();
        assert_eq!(report.views.len(), 3 * 2 * 2);
        for pair in report.views.chunks(2) {
            let (base, lod) = (&pair[0], &pair[1]);
            assert!(!base.lod && lod.lod);
            assert_eq!(base.surfels, 0);
            assert_eq!(base.ssim, 1.0);
            assert!(lod.triangles <= base.triangles);
            assert!((0.0..=1.0).contains(&lod.ssim.abs()));
        }
        // From far away the whole grid collapses to fewer draws.
        assert!(report.views.chunks(2).any(|p| p[1].actions < p[0].actions));
    }
}
