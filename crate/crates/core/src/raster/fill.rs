//! Scalar triangle scan conversion shared by capture and frame rendering.

use glam::{Mat3, Mat4, Vec3};

use crate::camera::{Camera, ScreenPoint};
use crate::scene::TriangleMesh;

/// Interpolated vertex payload: world position (3), normal (3), RGBA color (4).
pub const ATTRS: usize = 10;
pub type Attrs = [f32; ATTRS];

/// Receives every fragment that passes coverage: `(x, y, depth, attributes)`.
/// Depth testing is the sink's job.
pub trait FragmentSink {
    fn fragment(&mut self, x: u32, y: u32, depth: f32, attrs: &Attrs);
}

impl<F: FnMut(u32, u32, f32, &Attrs)> FragmentSink for F {
    fn fragment(&mut self, x: u32, y: u32, depth: f32, attrs: &Attrs) {
        self(x, y, depth, attrs)
    }
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    ax: f64,
    ay: f64,
    dx: f64,
    dy: f64,
    top_left: bool,
}

impl Edge {
    fn new(a: &ScreenPoint, b: &ScreenPoint) -> Self {
        let (dx, dy) = (b.x as f64 - a.x as f64, b.y as f64 - a.y as f64);
        Self {
            ax: a.x as f64,
            ay: a.y as f64,
            dx,
            dy,
            // With y pointing down and positive orientation, left edges run
            // downwards and top edges run right-to-left.
            top_left: dy > 0.0 || (dy == 0.0 && dx < 0.0),
        }
    }

    #[inline]
    fn eval(&self, px: f64, py: f64) -> f64 {
        (px - self.ax) * self.dy - (py - self.ay) * self.dx
    }

    #[inline]
    fn covers(&self, w: f64) -> bool {
        w > 0.0 || (w == 0.0 && self.top_left)
    }
}

/// Rasterizes one triangle with pixel centers at `(i + 0.5, j + 0.5)` and the
/// top-left fill rule. Counter-clockwise triangles (as seen on screen with
/// `y` up) are front-facing. Attributes and depth are interpolated
/// perspective-correctly using each vertex's `inv_w`.
pub fn fill_triangle(
    width: u32,
    height: u32,
    v: [(ScreenPoint, Attrs); 3],
    cull_backfaces: bool,
    sink: &mut impl FragmentSink,
) {
    let [a, mut b, mut c] = v;
    let orient = Edge::new(&a.0, &b.0).eval(c.0.x as f64, c.0.y as f64);
    if orient == 0.0 || !orient.is_finite() {
        return;
    }
    if orient < 0.0 {
        if cull_backfaces {
            return;
        }
        std::mem::swap(&mut b, &mut c);
    }
    let area = orient.abs();
    let (e0, e1, e2) = (
        Edge::new(&b.0, &c.0),
        Edge::new(&c.0, &a.0),
        Edge::new(&a.0, &b.0),
    );

    let xs = [a.0.x, b.0.x, c.0.x];
    let ys = [a.0.y, b.0.y, c.0.y];
    let min_x = xs.iter().copied().fold(f32::INFINITY, f32::min);
    let max_x = xs.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let min_y = ys.iter().copied().fold(f32::INFINITY, f32::min);
    let max_y = ys.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let x0 = ((min_x - 0.5).ceil().max(0.0)) as i64;
    let y0 = ((min_y - 0.5).ceil().max(0.0)) as i64;
    let x1 = ((max_x - 0.5).floor() as i64).min(width as i64 - 1);
    let y1 = ((max_y - 0.5).floor() as i64).min(height as i64 - 1);
    if x0 > x1 || y0 > y1 {
        return;
    }

    let w = [a.0.inv_w as f64, b.0.inv_w as f64, c.0.inv_w as f64];
    let z = [a.0.depth as f64, b.0.depth as f64, c.0.depth as f64];
    let mut out = [0f32; ATTRS];
    for y in y0..=y1 {
        let py = y as f64 + 0.5;
        for x in x0..=x1 {
            let px = x as f64 + 0.5;
            let (w0, w1, w2) = (e0.eval(px, py), e1.eval(px, py), e2.eval(px, py));
            if !(e0.covers(w0) && e1.covers(w1) && e2.covers(w2)) {
                continue;
            }
            let q = [w0 / area * w[0], w1 / area * w[1], w2 / area * w[2]];
            let sum = q[0] + q[1] + q[2];
            let depth = (q[0] * z[0] + q[1] * z[1] + q[2] * z[2]) / sum;
            for (k, o) in out.iter_mut().enumerate() {
                *o = ((q[0] * a.1[k] as f64 + q[1] * b.1[k] as f64 + q[2] * c.1[k] as f64) / sum)
                    as f32;
            }
            sink.fragment(x as u32, y as u32, depth as f32, &out);
        }
    }
}

/// Vertex after transformation into the camera's view space.
#[derive(Debug, Clone, Copy)]
struct ViewVertex {
    view: Vec3,
    attrs: Attrs,
}

fn lerp_vertex(a: &ViewVertex, b: &ViewVertex, t: f32) -> ViewVertex {
    let mut attrs = [0f32; ATTRS];
    for (k, o) in attrs.iter_mut().enumerate() {
        *o = a.attrs[k] + (b.attrs[k] - a.attrs[k]) * t;
    }
    ViewVertex {
        view: a.view.lerp(b.view, t),
        attrs,
    }
}

/// Draws a mesh placed by `model` (mesh space to the camera's world space),
/// clipping against the near plane. Fragment attributes carry the
/// world-space position and normal.
pub fn draw_mesh(
    camera: &Camera,
    model: &Mat4,
    mesh: &TriangleMesh,
    cull_backfaces: bool,
    sink: &mut impl FragmentSink,
) {
    let normal_m = Mat3::from_mat4(*model).inverse().transpose();
    let verts: Vec<ViewVertex> = mesh
        .positions()
        .iter()
        .zip(mesh.normals())
        .zip(mesh.colors())
        .map(|((&p, &n), &c)| {
            let wp = model.transform_point3(p);
            let wn = (normal_m * n).normalize_or_zero();
            ViewVertex {
                view: camera.to_view(wp),
                attrs: [wp.x, wp.y, wp.z, wn.x, wn.y, wn.z, c.x, c.y, c.z, c.w],
            }
        })
        .collect();
    let (w, h) = (camera.viewport.width, camera.viewport.height);
    let near = camera.near;
    let project = |v: &ViewVertex| camera.project_view(v.view).map(|s| (s, v.attrs));

    for t in mesh.triangles() {
        let tri = t.map(|i| verts[i as usize]);
        let inside = tri.iter().filter(|v| v.view.z >= near).count();
        match inside {
            0 => continue,
            3 => {
                if let (Some(a), Some(b), Some(c)) =
                    (project(&tri[0]), project(&tri[1]), project(&tri[2]))
                {
                    fill_triangle(w, h, [a, b, c], cull_backfaces, sink);
                }
            }
            _ => {
                // Sutherland-Hodgman against the near plane.
                let mut poly: Vec<ViewVertex> = Vec::with_capacity(4);
                for i in 0..3 {
                    let (cur, nxt) = (&tri[i], &tri[(i + 1) % 3]);
                    let (cin, nin) = (cur.view.z >= near, nxt.view.z >= near);
                    if cin {
                        poly.push(*cur);
                    }
                    if cin != nin {
                        let t = (near - cur.view.z) / (nxt.view.z - cur.view.z);
                        let mut v = lerp_vertex(cur, nxt, t);
                        v.view.z = v.view.z.max(near);
                        poly.push(v);
                    }
                }
                let projected: Option<Vec<_>> = poly.iter().map(project).collect();
                let Some(projected) = projected else { continue };
                for k in 1..projected.len().saturating_sub(1) {
                    fill_triangle(
                        w,
                        h,
                        [projected[0], projected[k], projected[k + 1]],
                        cull_backfaces,
                        sink,
                    );
                }
            }
        }
    }
}
