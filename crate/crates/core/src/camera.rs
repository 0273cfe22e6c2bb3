//! Pinhole and orthographic cameras with a pixel-exact screen mapping.
//!
//! View space is right-handed with `x` to the right, `y` up and depth measured
//! along the viewing direction. Screen space has its origin at the top-left
//! corner, `y` pointing down, and the center of pixel `(i, j)` at
//! `(i + 0.5, j + 0.5)`.

use glam::Vec3;
use serde::{Deserialize, Serialize};

use crate::geom::{any_orthogonal, Aabb};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Vertical field of view in radians.
    Perspective { fov_y: f32 },
    /// Height of the view volume in world units.
    Orthographic { height: f32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Viewport {
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub fn aspect(&self) -> f32 {
        self.width as f32 / self.height as f32
    }

    pub fn is_degenerate(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn center(&self) -> (f32, f32) {
        (self.width as f32 * 0.5, self.height as f32 * 0.5)
    }
}

/// A projected point: pixel coordinates, view depth and the perspective
/// interpolation weight (`1/depth` for perspective, `1` for orthographic).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenPoint {
    pub x: f32,
    pub y: f32,
    pub depth: f32,
    pub inv_w: f32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    forward: Vec3,
    up: Vec3,
    pub projection: Projection,
    pub viewport: Viewport,
    /// Near clipping distance along the view direction.
    pub near: f32,
}

impl Camera {
    /// Camera at `position` looking along `direction`. `up_hint` only needs to
    /// be non-parallel to `direction`; a parallel hint is replaced.
    pub fn new(
        position: Vec3,
        direction: Vec3,
        up_hint: Vec3,
        projection: Projection,
        viewport: Viewport,
    ) -> Self {
        let forward = direction.normalize();
        let mut right = forward.cross(up_hint);
        if right.length_squared() < 1e-12 {
            right = any_orthogonal(forward);
        }
        let right = right.normalize();
        let up = right.cross(forward);
        Self {
            position,
            forward,
            up,
            projection,
            viewport,
            near: 1e-3,
        }
    }

    pub fn look_at(
        position: Vec3,
        target: Vec3,
        up_hint: Vec3,
        projection: Projection,
        viewport: Viewport,
    ) -> Self {
        Self::new(position, target - position, up_hint, projection, viewport)
    }

    #[must_use]
    pub fn with_near(mut self, near: f32) -> Self {
        self.near = near;
        self
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }

    pub fn up(&self) -> Vec3 {
        self.up
    }

    pub fn right(&self) -> Vec3 {
        self.forward.cross(self.up)
    }

    pub fn is_orthographic(&self) -> bool {
        matches!(self.projection, Projection::Orthographic { .. })
    }

    /// World point to view coordinates `(right, up, depth)`.
    pub fn to_view(&self, p: Vec3) -> Vec3 {
        let d = p - self.position;
        Vec3::new(d.dot(self.right()), d.dot(self.up), d.dot(self.forward))
    }

    /// Half height of the view volume at the given depth, in world units.
    fn half_height_at(&self, depth: f32) -> f32 {
        match self.projection {
            Projection::Perspective { fov_y } => depth * (fov_y * 0.5).tan(),
            Projection::Orthographic { height } => height * 0.5,
        }
    }

    /// World-space distance between two neighbouring pixel centers on the
    /// plane at `depth`.
    pub fn pixel_spacing_at(&self, depth: f32) -> f32 {
        2.0 * self.half_height_at(depth) / self.viewport.height as f32
    }

    /// Projects a view-space point. Points closer than the near plane yield `None`.
    pub fn project_view(&self, v: Vec3) -> Option<ScreenPoint> {
        if v.z < self.near {
            return None;
        }
        let hh = self.half_height_at(v.z);
        let hw = hh * self.viewport.aspect();
        let ndc_x = v.x / hw;
        let ndc_y = v.y / hh;
        let (w, h) = (self.viewport.width as f32, self.viewport.height as f32);
        Some(ScreenPoint {
            x: (ndc_x + 1.0) * 0.5 * w,
            y: (1.0 - ndc_y) * 0.5 * h,
            depth: v.z,
            inv_w: if self.is_orthographic() {
                1.0
            } else {
                1.0 / v.z
            },
        })
    }

    pub fn project(&self, p: Vec3) -> Option<ScreenPoint> {
        self.project_view(self.to_view(p))
    }

    /// World point on the plane at view depth `depth` under the screen position `(sx, sy)`.
    pub fn unproject(&self, sx: f32, sy: f32, depth: f32) -> Vec3 {
        let (w, h) = (self.viewport.width as f32, self.viewport.height as f32);
        let ndc_x = 2.0 * sx / w - 1.0;
        let ndc_y = 1.0 - 2.0 * sy / h;
        let hh = self.half_height_at(depth);
        let hw = hh * self.viewport.aspect();
        self.position + self.right() * (ndc_x * hw) + self.up * (ndc_y * hh) + self.forward * depth
    }

    /// Ray through a screen position. The direction has unit component along
    /// the view axis, so the ray parameter equals view depth.
    pub fn screen_ray(&self, sx: f32, sy: f32) -> (Vec3, Vec3) {
        match self.projection {
            Projection::Perspective { .. } => {
                let p = self.unproject(sx, sy, 1.0);
                (self.position, p - self.position)
            }
            Projection::Orthographic { .. } => {
                let origin = self.unproject(sx, sy, 0.0);
                (origin, self.forward)
            }
        }
    }

    /// Conservative view-volume test: `false` only when the whole box lies
    /// outside one of the frustum planes (near and the four sides).
    pub fn frustum_intersects(&self, b: &Aabb) -> bool {
        if b.is_empty() {
            return false;
        }
        let corners = b.corners().map(|c| self.to_view(c));
        let aspect = self.viewport.aspect();
        let outside = |f: &dyn Fn(Vec3) -> bool| corners.iter().all(|&c| f(c));
        if outside(&|c| c.z < self.near) {
            return false;
        }
        let (sx, sy) = match self.projection {
            Projection::Perspective { fov_y } => {
                let t = (fov_y * 0.5).tan();
                (t * aspect, t)
            }
            Projection::Orthographic { .. } => (0.0, 0.0),
        };
        let hh_o = self.half_height_at(1.0);
        let (ox, oy) = if self.is_orthographic() {
            (hh_o * aspect, hh_o)
        } else {
            (0.0, 0.0)
        };
        // Side planes: |x| <= sx * depth + ox, |y| <= sy * depth + oy.
        !(outside(&|c| c.x > sx * c.z + ox)
            || outside(&|c| -c.x > sx * c.z + ox)
            || outside(&|c| c.y > sy * c.z + oy)
            || outside(&|c| -c.y > sy * c.z + oy))
    }
}

/// Serializable camera description used by the CLI (`--camera` pose files).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: Vec3,
    pub target: Vec3,
    #[serde(default = "default_up")]
    pub up: Vec3,
    /// Vertical field of view in degrees; ignored when `ortho_height` is set.
    #[serde(default = "default_fov")]
    pub fov_y_degrees: f32,
    #[serde(default)]
    pub ortho_height: Option<f32>,
}

fn default_up() -> Vec3 {
    Vec3::Y
}

fn default_fov() -> f32 {
    60.0
}

impl CameraPose {
    pub fn to_camera(&self, viewport: Viewport) -> Camera {
        let projection = match self.ortho_height {
            Some(height) => Projection::Orthographic { height },
            None => Projection::Perspective {
                fov_y: self.fov_y_degrees.to_radians(),
            },
        };
        Camera::look_at(self.position, self.target, self.up, projection, viewport)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn persp() -> Camera {
        Camera::new(
            Vec3::ZERO,
            Vec3::NEG_Z,
            Vec3::Y,
            Projection::Perspective {
                fov_y: std::f32::consts::FRAC_PI_2,
            },
            Viewport::new(1000, 1000),
        )
    }

    #[test]
    fn project_unproject_round_trip() {
        let cam = persp();
        let p = Vec3::new(1.5, -2.0, -10.0);
        let s = cam.project(p).unwrap();
        assert!((s.depth - 10.0).abs() < 1e-5);
        let q = cam.unproject(s.x, s.y, s.depth);
        assert!((p - q).length() < 1e-4, "{q:?}");
    }

    #[test]
    fn view_center_maps_to_viewport_center() {
        let cam = persp();
        let s = cam.project(Vec3::new(0.0, 0.0, -3.0)).unwrap();
        assert_eq!((s.x, s.y), (500.0, 500.0));
    }

    #[test]
    fn pixel_spacing_matches_frustum_geometry() {
        let cam = persp();
        // 2 * 500 * tan(45deg) / 1000
        assert!((cam.pixel_spacing_at(500.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn frustum_rejects_boxes_behind_and_beside() {
        let cam = persp();
        let ahead = Aabb::from_center_half_extent(Vec3::new(0.0, 0.0, -5.0), Vec3::ONE);
        let behind = Aabb::from_center_half_extent(Vec3::new(0.0, 0.0, 5.0), Vec3::ONE);
        let beside = Aabb::from_center_half_extent(Vec3::new(50.0, 0.0, -5.0), Vec3::ONE);
        assert!(cam.frustum_intersects(&ahead));
        assert!(!cam.frustum_intersects(&behind));
        assert!(!cam.frustum_intersects(&beside));
    }

    #[test]
    fn ortho_frustum_is_a_slab() {
        let cam = Camera::new(
            Vec3::new(0.0, 0.0, 10.0),
            Vec3::NEG_Z,
            Vec3::Y,
            Projection::Orthographic { height: 4.0 },
            Viewport::new(100, 100),
        );
        let inside = Aabb::from_center_half_extent(Vec3::new(1.9, 0.0, 0.0), Vec3::splat(0.05));
        let outside = Aabb::from_center_half_extent(Vec3::new(2.2, 0.0, 0.0), Vec3::splat(0.05));
        assert!(cam.frustum_intersects(&inside));
        assert!(!cam.frustum_intersects(&outside));
    }
}
