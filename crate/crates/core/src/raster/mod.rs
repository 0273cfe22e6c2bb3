//! Orthographic multi-direction capture of a node's externally visible surface
//! into G-buffers (position, normal, color, depth, coverage).

pub mod fill;

use std::path::Path;

use glam::{Mat3, Mat4, Vec3};
use image::{Rgb, RgbImage};
use rayon::prelude::*;

use crate::camera::{Camera, Projection, Viewport};
use crate::color::Rgba8;
use crate::error::{Error, Result};
use crate::geom::Aabb;
use crate::sampling::SurfelCloud;
use crate::scene::{NodeId, Scene, TriangleMesh};

pub use fill::{draw_mesh, fill_triangle, Attrs, FragmentSink, ATTRS};

#[derive(Debug, Clone, PartialEq)]
pub enum CaptureDirections {
    /// From each of the eight bounding-box corners toward the box center.
    BoxCorners,
    Explicit(Vec<Vec3>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureConfig {
    /// Pixels per side of each square buffer.
    pub resolution: u32,
    pub directions: CaptureDirections,
    pub cull_backfaces: bool,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        Self {
            resolution: 1024,
            directions: CaptureDirections::BoxCorners,
            cull_backfaces: true,
        }
    }
}

impl CaptureConfig {
    pub fn with_resolution(resolution: u32) -> Self {
        Self {
            resolution,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 {
            return Err(Error::InvalidArgument(
                "capture resolution must be >= 1".into(),
            ));
        }
        if let CaptureDirections::Explicit(d) = &self.directions {
            if d.is_empty() {
                return Err(Error::InvalidArgument(
                    "at least one capture direction is required".into(),
                ));
            }
            if d.iter()
                .any(|v| !v.is_finite() || v.length_squared() < 1e-12)
            {
                return Err(Error::InvalidArgument(
                    "capture directions must be non-zero".into(),
                ));
            }
        }
        Ok(())
    }

    /// Unit view directions for a box in the capture frame.
    pub fn resolve_directions(&self, bounds: &Aabb) -> Vec<Vec3> {
        match &self.directions {
            CaptureDirections::Explicit(d) => d.iter().map(|v| v.normalize()).collect(),
            CaptureDirections::BoxCorners => corner_directions(bounds),
        }
    }
}

/// Directions from the eight box corners toward the center. Each half extent
/// is floored at a tenth of the largest one so that flat boxes are not viewed
/// exactly edge-on.
pub fn corner_directions(bounds: &Aabb) -> Vec<Vec3> {
    let h = if bounds.is_empty() {
        Vec3::ONE
    } else {
        bounds.half_extent()
    };
    let m = h.max_element();
    let h = if m > 0.0 {
        h.max(Vec3::splat(0.1 * m))
    } else {
        Vec3::ONE
    };
    (0..8)
        .map(|i| {
            let s = Vec3::new(
                if i & 1 != 0 { 1.0 } else { -1.0 },
                if i & 2 != 0 { 1.0 } else { -1.0 },
                if i & 4 != 0 { 1.0 } else { -1.0 },
            );
            (-(s * h)).normalize()
        })
        .collect()
}

/// Orthographic camera looking along `direction` whose square view rectangle
/// is the tightest one around the projected box, placed just in front of it.
pub fn capture_camera(bounds: &Aabb, direction: Vec3, resolution: u32) -> Camera {
    let viewport = Viewport::new(resolution, resolution);
    let d = direction.normalize();
    let up_hint = if d.y.abs() > 0.99 { Vec3::Z } else { Vec3::Y };
    let (center, corners) = if bounds.is_empty() {
        (Vec3::ZERO, [Vec3::ZERO; 8])
    } else {
        (bounds.center(), bounds.corners())
    };
    let basis = Camera::new(
        center,
        d,
        up_hint,
        Projection::Orthographic { height: 1.0 },
        viewport,
    );
    let (r, u, f) = (basis.right(), basis.up(), basis.forward());
    let mut half = 0f32;
    let mut front = 0f32;
    for c in corners {
        let o = c - center;
        half = half.max(o.dot(r).abs()).max(o.dot(u).abs());
        front = front.min(o.dot(f));
    }
    let height = (2.0 * half).max(1e-6);
    let margin = 0.01 * bounds.diagonal().max(1e-3);
    let position = center + f * (front - margin);
    Camera::new(
        position,
        d,
        up_hint,
        Projection::Orthographic { height },
        viewport,
    )
    .with_near(0.0)
}

/// Per-pixel capture target. Attribute channels are meaningful only where
/// `covered` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct GBuffer {
    pub width: u32,
    pub height: u32,
    pub covered: Vec<bool>,
    pub position: Vec<Vec3>,
    pub normal: Vec<Vec3>,
    pub color: Vec<Rgba8>,
    pub depth: Vec<f32>,
    /// Camera the buffer was rendered with (in the node's local frame).
    pub camera: Camera,
}

impl GBuffer {
    pub fn new(camera: Camera) -> Self {
        let (w, h) = (camera.viewport.width, camera.viewport.height);
        let n = w as usize * h as usize;
        Self {
            width: w,
            height: h,
            covered: vec![false; n],
            position: vec![Vec3::ZERO; n],
            normal: vec![Vec3::ZERO; n],
            color: vec![Rgba8::default(); n],
            depth: vec![f32::INFINITY; n],
            camera,
        }
    }

    pub fn covered_count(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }

    fn write(&mut self, x: u32, y: u32, depth: f32, position: Vec3, normal: Vec3, color: Rgba8) {
        let i = (y * self.width + x) as usize;
        if depth < self.depth[i] {
            self.depth[i] = depth;
            self.covered[i] = true;
            self.position[i] = position;
            let n = normal.normalize_or_zero();
            self.normal[i] = if n == Vec3::ZERO {
                -self.camera.forward()
            } else {
                n
            };
            self.color[i] = color;
        }
    }

    /// Visualizes one channel. Positions and depths are normalized over the
    /// covered pixels; uncovered pixels are black.
    pub fn channel_image(&self, channel: GBufferChannel) -> RgbImage {
        let covered_pos = Aabb::from_points(
            self.position
                .iter()
                .zip(&self.covered)
                .filter(|(_, &c)| c)
                .map(|(p, _)| *p),
        );
        let (dmin, dmax) = self
            .depth
            .iter()
            .zip(&self.covered)
            .filter(|(_, &c)| c)
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(a, b), (&d, _)| {
                (a.min(d), b.max(d))
            });
        let to8 = |v: f32| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        RgbImage::from_fn(self.width, self.height, |x, y| {
            let i = (y * self.width + x) as usize;
            if !self.covered[i] {
                return Rgb([0, 0, 0]);
            }
            let v = match channel {
                GBufferChannel::Color => {
                    return Rgb([self.color[i].0[0], self.color[i].0[1], self.color[i].0[2]])
                }
                GBufferChannel::Coverage => Vec3::ONE,
                GBufferChannel::Normal => self.normal[i] * 0.5 + 0.5,
                GBufferChannel::Position => {
                    (self.position[i] - covered_pos.min)
                        / covered_pos.size().max(Vec3::splat(1e-12))
                }
                GBufferChannel::Depth => {
                    Vec3::splat(1.0 - (self.depth[i] - dmin) / (dmax - dmin).max(1e-12))
                }
            };
            Rgb([to8(v.x), to8(v.y), to8(v.z)])
        })
    }

    /// Writes a channel as PNG or PPM depending on the file extension.
    pub fn save_channel(&self, channel: GBufferChannel, path: impl AsRef<Path>) -> Result<()> {
        self.channel_image(channel).save(path.as_ref())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GBufferChannel {
    Color,
    Normal,
    Position,
    Depth,
    Coverage,
}

impl std::str::FromStr for GBufferChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "color" => Self::Color,
            "normal" => Self::Normal,
            "position" => Self::Position,
            "depth" => Self::Depth,
            "coverage" => Self::Coverage,
            _ => return Err(Error::InvalidArgument(format!("unknown channel '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GBufferSet {
    pub buffers: Vec<GBuffer>,
}

impl GBufferSet {
    pub fn covered_count(&self) -> usize {
        self.buffers.iter().map(GBuffer::covered_count).sum()
    }
}

/// Something drawn during capture, expressed in the capture (node-local) frame.
#[derive(Debug, Clone)]
pub enum CaptureSource<'a> {
    Mesh {
        transform: Mat4,
        mesh: &'a TriangleMesh,
    },
    /// A finished surfel approximation drawn as oriented discs of `radius`
    /// (in the cloud's own frame).
    Surfels {
        transform: Mat4,
        cloud: &'a SurfelCloud,
        radius: f32,
    },
}

impl CaptureSource<'_> {
    pub fn bounds(&self) -> Aabb {
        match self {
            CaptureSource::Mesh { transform, mesh } => mesh.transformed_bounds(transform),
            CaptureSource::Surfels {
                transform,
                cloud,
                radius,
            } => {
                let scale = max_axis_scale(transform);
                Aabb::from_points(
                    cloud
                        .surfels
                        .iter()
                        .map(|s| transform.transform_point3(s.position)),
                )
                .expanded(radius * scale)
            }
        }
    }
}

fn max_axis_scale(m: &Mat4) -> f32 {
    let m3 = Mat3::from_mat4(*m);
    m3.x_axis
        .length()
        .max(m3.y_axis.length())
        .max(m3.z_axis.length())
}

/// Geometry of `node`'s subtree in the node's local frame. With
/// `use_descendant_lods`, every descendant that already carries a surfel
/// approximation contributes that approximation instead of its geometry.
pub fn gather_sources(
    scene: &Scene,
    node: NodeId,
    use_descendant_lods: bool,
) -> Vec<CaptureSource<'_>> {
    let local_from_world = scene.node(node).transform.inverse();
    let mut out = Vec::new();
    let mut stack = vec![node];
    while let Some(id) = stack.pop() {
        let n = scene.node(id);
        let transform = local_from_world * n.transform;
        if use_descendant_lods && id != node {
            if let Some(cloud) = &n.lod {
                if !cloud.surfels.is_empty() {
                    out.push(CaptureSource::Surfels {
                        transform,
                        cloud,
                        radius: cloud.full_coverage_radius(),
                    });
                    continue;
                }
            }
        }
        match &n.payload {
            crate::scene::NodePayload::Mesh(m) => out.push(CaptureSource::Mesh {
                transform,
                mesh: scene.mesh(*m),
            }),
            crate::scene::NodePayload::Children(c) => stack.extend(c.iter().rev()),
        }
    }
    out
}

pub fn sources_bounds(sources: &[CaptureSource<'_>]) -> Aabb {
    sources.iter().fold(Aabb::EMPTY, |b, s| b.union(s.bounds()))
}

/// Renders the sources with the given camera into a fresh G-buffer.
pub fn rasterize_sources(
    sources: &[CaptureSource<'_>],
    camera: Camera,
    cull_backfaces: bool,
) -> GBuffer {
    let mut gb = GBuffer::new(camera);
    for src in sources {
        match src {
            CaptureSource::Mesh { transform, mesh } => {
                let mut sink = |x: u32, y: u32, depth: f32, a: &Attrs| {
                    let color = Rgba8::from_unit(glam::Vec4::new(a[6], a[7], a[8], a[9]));
                    gb.write(
                        x,
                        y,
                        depth,
                        Vec3::new(a[0], a[1], a[2]),
                        Vec3::new(a[3], a[4], a[5]),
                        color,
                    );
                };
                draw_mesh(&camera, transform, mesh, cull_backfaces, &mut sink);
            }
            CaptureSource::Surfels {
                transform,
                cloud,
                radius,
            } => {
                splat_discs(&mut gb, transform, cloud, *radius, cull_backfaces);
            }
        }
    }
    gb
}

/// Oriented-disc splatting into a G-buffer with exact per-fragment plane depth.
fn splat_discs(
    gb: &mut GBuffer,
    transform: &Mat4,
    cloud: &SurfelCloud,
    radius: f32,
    cull_backfaces: bool,
) {
    let camera = gb.camera;
    let normal_m = Mat3::from_mat4(*transform).inverse().transpose();
    let r = radius * max_axis_scale(transform);
    if r <= 0.0 {
        return;
    }
    let r2 = r * r;
    let (w, h) = (gb.width as i64, gb.height as i64);
    for s in &cloud.surfels {
        let center = transform.transform_point3(s.position);
        let n = (normal_m * s.normal).normalize_or_zero();
        let Some(sp) = camera.project(center) else {
            continue;
        };
        let (_, rd0) = camera.screen_ray(sp.x, sp.y);
        let facing = n.dot(rd0);
        if cull_backfaces && facing > 0.0 {
            continue;
        }
        let rpx = r / camera.pixel_spacing_at(sp.depth.max(camera.near));
        let x0 = ((sp.x - rpx - 0.5).floor() as i64).max(0);
        let x1 = ((sp.x + rpx - 0.5).ceil() as i64).min(w - 1);
        let y0 = ((sp.y - rpx - 0.5).floor() as i64).max(0);
        let y1 = ((sp.y + rpx - 0.5).ceil() as i64).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (o, d) = camera.screen_ray(x as f32 + 0.5, y as f32 + 0.5);
                let denom = n.dot(d);
                if denom.abs() < 1e-6 {
                    continue;
                }
                let t = n.dot(center - o) / denom;
                let hit = o + d * t;
                if (hit - center).length_squared() > r2 {
                    continue;
                }
                let depth = (hit - camera.position).dot(camera.forward());
                if depth < camera.near {
                    continue;
                }
                gb.write(x as u32, y as u32, depth, hit, n, s.color);
            }
        }
    }
}

/// Orthographic depth-buffered capture of the node's subtree along one direction.
pub fn rasterize_direction(
    scene: &Scene,
    node: NodeId,
    direction: Vec3,
    config: &CaptureConfig,
) -> GBuffer {
    let sources = gather_sources(scene, node, false);
    let bounds = sources_bounds(&sources);
    rasterize_sources(
        &sources,
        capture_camera(&bounds, direction, config.resolution),
        config.cull_backfaces,
    )
}

/// One G-buffer per configured direction. Directions are rendered in parallel;
/// the result does not depend on scheduling.
pub fn capture_gbuffers(scene: &Scene, node: NodeId, config: &CaptureConfig) -> Result<GBufferSet> {
    capture_sources(&gather_sources(scene, node, false), config)
}

pub fn capture_sources(
    sources: &[CaptureSource<'_>],
    config: &CaptureConfig,
) -> Result<GBufferSet> {
    config.validate()?;
    let bounds = sources_bounds(sources);
    let dirs = config.resolve_directions(&bounds);
    let buffers = dirs
        .par_iter()
        .map(|&d| {
            rasterize_sources(
                sources,
                capture_camera(&bounds, d, config.resolution),
                config.cull_backfaces,
            )
        })
        .collect();
    Ok(GBufferSet { buffers })
}
