//! Headless renderer: triangle geometry plus surfel prefixes drawn as opaque
//! oriented discs.

use std::path::Path;

use glam::{Mat3, Mat4, Vec4};
use image::{Rgb, Rgb32FImage, RgbImage};

use crate::camera::Camera;
use crate::color::Rgba8;
use crate::error::Result;
use crate::prefixmath::{RenderAction, RenderItem};
use crate::raster::{draw_mesh, Attrs};
use crate::sampling::SurfelCloud;
use crate::scene::{NodePayload, Scene};

#[derive(Debug, Clone, PartialEq)]
pub struct FrameBuffer {
    width: u32,
    height: u32,
    pub color: Vec<Vec4>,
    /// View depth per pixel, `+inf` where nothing was drawn.
    pub depth: Vec<f32>,
}

impl FrameBuffer {
    pub fn new(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            color: vec![Vec4::new(0.0, 0.0, 0.0, 1.0); n],
            depth: vec![f32::INFINITY; n],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn clear(&mut self) {
        self.color.fill(Vec4::new(0.0, 0.0, 0.0, 1.0));
        self.depth.fill(f32::INFINITY);
    }

    #[inline]
    fn test_and_set(&mut self, x: u32, y: u32, depth: f32, color: Vec4) {
        let i = (y * self.width + x) as usize;
        if depth < self.depth[i] {
            self.depth[i] = depth;
            self.color[i] = color;
        }
    }

    /// Pixels that received at least one fragment.
    pub fn painted_mask(&self) -> Vec<bool> {
        self.depth.iter().map(|d| d.is_finite()).collect()
    }

    pub fn painted_count(&self) -> usize {
        self.depth.iter().filter(|d| d.is_finite()).count()
    }

    pub fn to_rgb32f(&self) -> Rgb32FImage {
        Rgb32FImage::from_fn(self.width, self.height, |x, y| {
            let c = self.color[(y * self.width + x) as usize];
            Rgb([c.x, c.y, c.z])
        })
    }

    pub fn to_rgb8(&self) -> RgbImage {
        RgbImage::from_fn(self.width, self.height, |x, y| {
            let [r, g, b, _] = Rgba8::from_unit(self.color[(y * self.width + x) as usize]).0;
            Rgb([r, g, b])
        })
    }

    /// PNG or PPM depending on the extension.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_rgb8().save(path.as_ref())?;
        Ok(())
    }
}

/// What a frame drew.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameStats {
    pub draw_calls: u64,
    pub triangles: u64,
    pub surfels: u64,
}

fn max_axis_scale(m: &Mat4) -> f32 {
    let m3 = Mat3::from_mat4(*m);
    m3.x_axis
        .length()
        .max(m3.y_axis.length())
        .max(m3.z_axis.length())
}

/// Draws the first `prefix` surfels. Each covers a `size` x `size` pixel
/// square around its projected center; fragments whose view ray hits the
/// surfel plane farther than `radius` (node-local) from the center are
/// discarded. Fragments use the center's depth and the surfel's exact color.
pub fn splat_surfels(
    fb: &mut FrameBuffer,
    camera: &Camera,
    model: &Mat4,
    cloud: &SurfelCloud,
    prefix: usize,
    size: f32,
    radius: f32,
) -> u64 {
    let prefix = prefix.min(cloud.len());
    let n_side = size.round().max(1.0) as i64;
    let half = n_side as f32 * 0.5;
    let normal_m = Mat3::from_mat4(*model).inverse().transpose();
    let r = radius * max_axis_scale(model);
    let r2 = r * r;
    let (w, h) = (fb.width as i64, fb.height as i64);
    for s in &cloud.surfels[..prefix] {
        let center = model.transform_point3(s.position);
        let Some(sp) = camera.project(center) else {
            continue;
        };
        let n = (normal_m * s.normal).normalize_or_zero();
        let color = s.color.to_unit();
        let x0 = (sp.x - half - 0.5).ceil() as i64;
        let y0 = (sp.y - half - 0.5).ceil() as i64;
        for y in y0.max(0)..(y0 + n_side).min(h) {
            for x in x0.max(0)..(x0 + n_side).min(w) {
                let (o, d) = camera.screen_ray(x as f32 + 0.5, y as f32 + 0.5);
                let denom = n.dot(d);
                if denom.abs() < 1e-12 {
                    continue;
                }
                let t = n.dot(center - o) / denom;
                let hit = o + d * t;
                if (hit - center).length_squared() > r2 {
                    continue;
                }
                fb.test_and_set(x as u32, y as u32, sp.depth, color);
            }
        }
    }
    prefix as u64
}

/// Rasterizes a mesh node with back-face culling and per-pixel depth.
pub fn draw_geometry(
    fb: &mut FrameBuffer,
    camera: &Camera,
    model: &Mat4,
    mesh: &crate::scene::TriangleMesh,
) -> u64 {
    let mut sink = |x: u32, y: u32, depth: f32, a: &Attrs| {
        let c = Rgba8::from_unit(Vec4::new(a[6], a[7], a[8], a[9])).to_unit();
        fb.test_and_set(x, y, depth, c);
    };
    draw_mesh(camera, model, mesh, true, &mut sink);
    mesh.triangle_count() as u64
}

/// Depth-tested composition of the selected actions.
pub fn render_frame(
    scene: &Scene,
    items: &[RenderItem],
    camera: &Camera,
    fb: &mut FrameBuffer,
) -> FrameStats {
    let mut stats = FrameStats::default();
    for item in items {
        let node = scene.node(item.node);
        match item.action {
            RenderAction::Skip => continue,
            RenderAction::Geometry => {
                if let NodePayload::Mesh(m) = node.payload {
                    stats.triangles += draw_geometry(fb, camera, &node.transform, scene.mesh(m));
                }
            }
            RenderAction::SurfelPrefix {
                count,
                size,
                radius,
            }
            | RenderAction::BlendParentChild {
                count,
                size,
                radius,
                ..
            } => {
                if let Some(cloud) = &node.lod {
                    stats.surfels += splat_surfels(
                        fb,
                        camera,
                        &node.transform,
                        cloud,
                        count as usize,
                        size,
                        radius,
                    );
                }
            }
        }
        stats.draw_calls += 1;
    }
    stats
}

/// Renders every leaf as geometry, the reference image for quality metrics.
pub fn render_geometry(scene: &Scene, camera: &Camera, fb: &mut FrameBuffer) -> FrameStats {
    let mut stats = FrameStats::default();
    for (leaf, mesh) in scene.leaves(scene.root()) {
        let node = scene.node(leaf);
        if camera.frustum_intersects(&node.bounds) {
            stats.triangles += draw_geometry(fb, camera, &node.transform, scene.mesh(mesh));
            stats.draw_calls += 1;
        }
    }
    stats
}

/// Screen-space footprint helper: the node-local disc radius spanning
/// `size` pixels at view depth `depth`.
pub fn radius_for_pixels(camera: &Camera, depth: f32, size: f32) -> f32 {
    camera.pixel_spacing_at(depth) * size * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{Projection, Viewport};
    use crate::geom::Aabb;
    use crate::raster::{capture_camera, rasterize_sources, CaptureSource, GBufferChannel};
    use crate::sampling::Surfel;
    use crate::scene::shapes;
    use glam::Vec3;

    fn ortho(res: u32, height: f32) -> Camera {
        Camera::new(
            Vec3::new(0.0, 0.0, 10.0),
            Vec3::NEG_Z,
            Vec3::Y,
            Projection::Orthographic { height },
            Viewport::new(res, res),
        )
    }

    fn cloud(surfels: Vec<Surfel>) -> SurfelCloud {
        SurfelCloud {
            surfels,
            p_m: 0,
            r_m: 0.0,
            bounds: Aabb::EMPTY,
        }
    }

    fn surfel(p: Vec3, n: Vec3, c: [u8; 4]) -> Surfel {
        Surfel {
            position: p,
            normal: n,
            color: Rgba8(c),
        }
    }

    #[test]
    fn empty_frame_is_cleared() {
        let scene = Scene::single_mesh(shapes::quad());
        let mut fb = FrameBuffer::new(8, 8);
        let stats = render_frame(&scene, &[], &ortho(8, 8.0), &mut fb);
        assert_eq!(stats, FrameStats::default());
        assert_eq!(fb, FrameBuffer::new(8, 8));
    }

    #[test]
    fn facing_disc_stays_within_square() {
        let cam = ortho(32, 32.0);
        let mut fb = FrameBuffer::new(32, 32);
        let c = cloud(vec![surfel(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::Z,
            [255, 0, 0, 255],
        )]);
        splat_surfels(&mut fb, &cam, &Mat4::IDENTITY, &c, 1, 6.0, 3.0);
        let painted: Vec<(u32, u32)> = (0..32 * 32)
            .filter(|&i| fb.depth[i as usize].is_finite())
            .map(|i| (i % 32, i / 32))
            .collect();
        assert!(!painted.is_empty());
        let (minx, maxx) = (
            painted.iter().map(|p| p.0).min().unwrap(),
            painted.iter().map(|p| p.0).max().unwrap(),
        );
        let (miny, maxy) = (
            painted.iter().map(|p| p.1).min().unwrap(),
            painted.iter().map(|p| p.1).max().unwrap(),
        );
        assert!(maxx - minx < 6 && maxy - miny < 6);
        // A disc, not the full square.
        assert!(painted.len() < 36);
    }

    #[test]
    fn edge_on_disc_is_a_sliver() {
        let cam = ortho(32, 32.0);
        let mut fb = FrameBuffer::new(32, 32);
        let c = cloud(vec![surfel(
            Vec3::new(0.25, 0.25, 0.0),
            Vec3::X,
            [255, 0, 0, 255],
        )]);
        splat_surfels(&mut fb, &cam, &Mat4::IDENTITY, &c, 1, 8.0, 4.0);
        assert_eq!(fb.painted_count(), 0);
    }

    #[test]
    fn nearer_surfel_wins_and_colors_are_exact() {
        let cam = ortho(16, 16.0);
        let mut fb = FrameBuffer::new(16, 16);
        let far = surfel(Vec3::new(0.0, 0.0, -1.0), Vec3::Z, [10, 20, 30, 255]);
        let near = surfel(Vec3::new(1.0, 0.0, 1.0), Vec3::Z, [200, 100, 50, 255]);
        for order in [vec![far, near], vec![near, far]] {
            fb.clear();
            splat_surfels(&mut fb, &cam, &Mat4::IDENTITY, &cloud(order), 2, 6.0, 3.0);
            let overlap = (8 * 16 + 8) as usize;
            assert_eq!(Rgba8::from_unit(fb.color[overlap]), near.color);
            for i in 0..fb.color.len() {
                if fb.depth[i].is_finite() {
                    let c = Rgba8::from_unit(fb.color[i]);
                    assert!(c == near.color || c == far.color);
                }
            }
        }
    }

    #[test]
    fn geometry_matches_capture_color_channel() {
        let scene = Scene::single_mesh(shapes::uv_sphere(Vec3::ZERO, 1.0, 12, 16));
        let mesh = scene.mesh(crate::scene::MeshId(0));
        let cam = capture_camera(&mesh.bounds(), Vec3::new(-1.0, -0.5, -0.7), 48);
        let gb = rasterize_sources(
            &[CaptureSource::Mesh {
                transform: Mat4::IDENTITY,
                mesh,
            }],
            cam,
            true,
        );
        let items = [RenderItem {
            node: scene.root(),
            action: RenderAction::Geometry,
        }];
        let mut fb = FrameBuffer::new(48, 48);
        render_frame(&scene, &items, &cam, &mut fb);
        assert_eq!(fb.to_rgb8(), gb.channel_image(GBufferChannel::Color));
    }
}
