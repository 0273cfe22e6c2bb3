//! Frame-time distributions over a grid of camera positions.

use std::time::Instant;

use surfel_core::glam::Vec3;
use surfel_core::{
    Aabb, BudgetController, Camera, Error, FrameBuffer, FrameStats, Projection, RadiusRule, Result,
    Scene, SelectOptions, Viewport,
};

use crate::report::{FrameSample, FrameTimeDistribution};
use crate::views::{timed_frame, FrameClock};

/// Cardinal viewing directions, in sample order.
pub const DIRECTIONS: [Vec3; 4] = [Vec3::X, Vec3::NEG_X, Vec3::Z, Vec3::NEG_Z];

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Positions are spread over the `x`/`z` extent of this box.
    pub region: Aabb,
    pub count: usize,
    /// Eye height above `region.min.y`.
    pub height: f32,
    pub t_target_ms: f64,
    pub initial_size: f64,
    pub width: u32,
    pub height_px: u32,
    pub fov_y_degrees: f32,
    pub rule: RadiusRule,
    /// Untimed rendering of the first view before measuring, in milliseconds.
    pub warmup_ms: f64,
    /// Renders per view; the median time is recorded and fed to the controller.
    pub frame_repeats: usize,
    pub clock: FrameClock,
}

impl GridConfig {
    pub fn new(region: Aabb, count: usize, height: f32, t_target_ms: f64) -> Self {
        Self {
            region,
            count,
            height,
            t_target_ms,
            initial_size: 2.0,
            width: 320,
            height_px: 240,
            fov_y_degrees: 60.0,
            rule: RadiusRule::Consistent,
            warmup_ms: 100.0,
            frame_repeats: 1,
            clock: FrameClock::Wall,
        }
    }
}

/// `count` eye positions at the centers of a near-square grid of cells,
/// filled row by row.
pub fn grid_positions(region: &Aabb, count: usize, height: f32) -> Vec<Vec3> {
    let n = (count as f64).sqrt().ceil().max(1.0) as usize;
    let size = region.size();
    (0..count)
        .map(|i| {
            let (r, c) = (i / n, i % n);
            Vec3::new(
                region.min.x + size.x * (c as f32 + 0.5) / n as f32,
                region.min.y + height,
                region.min.z + size.z * (r as f32 + 0.5) / n as f32,
            )
        })
        .collect()
}

/// Renders four cardinal views per position with the adaptive size
/// controller in the loop and returns every frame time.
pub fn run_position_grid(scene: &Scene, config: &GridConfig) -> Result<FrameTimeDistribution> {
    if config.count == 0 {
        return Err(Error::InvalidArgument("position count must be >= 1".into()));
    }
    if config.frame_repeats == 0 {
        return Err(Error::InvalidArgument("frame repeats must be >= 1".into()));
    }
    if !(config.t_target_ms > 0.0) {
        return Err(Error::InvalidArgument(
            "target frame time must be positive".into(),
        ));
    }
    let options = SelectOptions {
        rule: config.rule,
        ..SelectOptions::default()
    };
    let mut ctrl = BudgetController::new(config.t_target_ms, config.initial_size);
    let mut fb = FrameBuffer::new(config.width, config.height_px);
    let projection = Projection::Perspective {
        fov_y: config.fov_y_degrees.to_radians(),
    };
    let viewport = Viewport::new(config.width, config.height_px);
    let positions = grid_positions(&config.region, config.count, config.height);
    let warm = Camera::new(positions[0], DIRECTIONS[0], Vec3::Y, projection, viewport);
    let start = Instant::now();
    loop {
        timed_frame(
            scene,
            &warm,
            ctrl.size,
            None,
            &options,
            &mut fb,
            config.clock,
        );
        if start.elapsed().as_secs_f64() * 1e3 >= config.warmup_ms {
            break;
        }
    }
    let mut samples = Vec::with_capacity(config.count * 4);
    for (p, eye) in positions.into_iter().enumerate() {
        for (d, dir) in DIRECTIONS.iter().enumerate() {
            let camera = Camera::new(eye, *dir, Vec3::Y, projection, viewport);
            let size = ctrl.size;
            let mut times = Vec::with_capacity(config.frame_repeats);
            let (mut actions, mut stats) = (0, FrameStats::default());
            for _ in 0..config.frame_repeats {
                let (a, st, ms) =
                    timed_frame(scene, &camera, size, None, &options, &mut fb, config.clock);
                (actions, stats) = (a, st);
                times.push(ms);
            }
            times.sort_by(f64::total_cmp);
            let ms = times[times.len() / 2];
            ctrl.update(ms);
            samples.push(FrameSample {
                position: p,
                direction: d,
                x: eye.x,
                y: eye.y,
                z: eye.z,
                frame_ms: ms,
                surfel_size: size,
                actions,
                surfels: stats.surfels,
                triangles: stats.triangles,
            });
        }
    }
    FrameTimeDistribution::from_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use surfel_core::scene::shapes;

    #[test]
    fn positions_fill_the_region() {
        let region = Aabb::new(Vec3::ZERO, Vec3::new(4.0, 1.0, 2.0));
        let p = grid_positions(&region, 4, 1.5);
        assert_eq!(
            p,
            vec![
                Vec3::new(1.0, 1.5, 0.5),
                Vec3::new(3.0, 1.5, 0.5),
                Vec3::new(1.0, 1.5, 1.5),
                Vec3::new(3.0, 1.5, 1.5)
            ]
        );
        assert_eq!(grid_positions(&region, 5, 0.0).len(), 5);
    }

    #[test]
    fn one_position_gives_four_samples() {
        let scene = Scene::single_mesh(shapes::cube(Vec3::ZERO, Vec3::ONE));
        let cfg = GridConfig {
            width: 32,
            height_px: 24,
            ..GridConfig::new(Aabb::new(Vec3::splat(-3.0), Vec3::splat(3.0)), 1, 3.5, 10.0)
        };
        let dist = run_position_grid(&scene, &cfg).unwrap();
        assert_eq!(dist.samples.len(), 4);
        assert_eq!(dist.quartiles.count, 4);
        let dirs: Vec<usize> = dist.samples.iter().map(|s| s.direction).collect();
        assert_eq!(dirs, vec![0, 1, 2, 3]);
    }

    #[test]
    fn heavy_views_keep_the_size_clamped() {
        let scene = Scene::single_mesh(shapes::reference_object(20_000));
        // An unreachable budget drives the size up to the clamp.
        let cfg = GridConfig {
            width: 64,
            height_px: 48,
            ..GridConfig::new(
                Aabb::new(Vec3::new(-4.0, -1.0, -4.0), Vec3::new(4.0, 1.0, 4.0)),
                9,
                1.0,
                1e-6,
            )
        };
        let dist = run_position_grid(&scene, &cfg).unwrap();
        assert_eq!(dist.samples.len(), 36);
        assert!(dist
            .samples
            .iter()
            .all(|s| (1.0..=8.0).contains(&s.surfel_size)));
        assert_eq!(dist.samples.last().unwrap().surfel_size, 8.0);
    }

    #[test]
    fn invalid_grid_arguments() {
        let scene = Scene::single_mesh(shapes::quad());
        let region = Aabb::new(Vec3::ZERO, Vec3::ONE);
        assert!(run_position_grid(&scene, &GridConfig::new(region, 0, 1.0, 10.0)).is_err());
        assert!(run_position_grid(&scene, &GridConfig::new(region, 1, 1.0, 0.0)).is_err());
        let cfg = GridConfig {
            frame_repeats: 0,
            ..GridConfig::new(region, 1, 1.0, 10.0)
        };
        assert!(run_position_grid(&scene, &cfg).is_err());
    }
}
