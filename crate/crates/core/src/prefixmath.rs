//! Runtime selection math: pixel footprint, surfel radius, prefix length,
//! parent/child blending, the adaptive size controller and foveation.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::sampling::SurfelCloud;
use crate::scene::{NodeId, Scene, SceneNode};

pub const DEFAULT_BLEND_WIDTH: f64 = 0.3;

/// How a desired on-screen surfel size maps to an object-space radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusRule {
    /// `r = s * d_p / 2`: a disc spanning `s` pixels whose spacing is `d_p`.
    #[default]
    Consistent,
    /// `r = s / (2 * d_p)`, kept for comparison.
    AsPrinted,
}

impl std::str::FromStr for RadiusRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(Self::Consistent),
            "as-printed" | "as_printed" => Ok(Self::AsPrinted),
            _ => Err(Error::InvalidArgument(format!("unknown radius rule '{s}'"))),
        }
    }
}

/// Object-space surfel radius for a surfel size of `s` pixels when
/// neighbouring pixels are `d_p` apart.
pub fn radius_for_screen(s: f64, d_p: f64, rule: RadiusRule) -> Result<f64> {
    if !(d_p > 0.0) || !d_p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "pixel distance must be positive, got {d_p}"
        )));
    }
    Ok(match rule {
        RadiusRule::Consistent => s * d_p / 2.0,
        RadiusRule::AsPrinted => s / (2.0 * d_p),
    })
}

/// Distance in the node's local frame between two horizontally adjacent
/// pixels at the viewport center, measured on the plane perpendicular to the
/// view direction through the point of the node's bounds closest to the
/// camera. A camera inside the bounds (or a box behind it) gives 0.
pub fn projected_pixel_distance(camera: &Camera, node: &SceneNode) -> Result<f64> {
    if camera.viewport.is_degenerate() {
        return Err(Error::InvalidArgument("viewport has zero size".into()));
    }
    let closest = node.bounds.closest_point(camera.position);
    let depth = if node.bounds.contains_point(camera.position) {
        0.0
    } else {
        (closest - camera.position).dot(camera.forward()).max(0.0)
    };
    let (cx, cy) = camera.viewport.center();
    let a = camera.unproject(cx - 0.5, cy, depth);
    let b = camera.unproject(cx + 0.5, cy, depth);
    let local = node.transform.inverse();
    let (la, lb) = (local.transform_point3(a), local.transform_point3(b));
    Ok((lb - la).length() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrefixModel {
    pub p_m: u64,
    pub r_m: f64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixEstimate {
    /// Prefix length clamped to `[1, total]`.
    pub p: u64,
    /// The rounded estimate before clamping exceeds the cloud size.
    pub saturated: bool,
}

impl PrefixModel {
    pub fn new(p_m: u64, r_m: f64, total: u64) -> Result<Self> {
        if p_m < 2 || !(r_m > 0.0) || !r_m.is_finite() || total < 1 {
            return Err(Error::InvalidArgument(format!(
                "prefix model needs p_m >= 2, r_m > 0 and total >= 1 (p_m {p_m}, r_m {r_m}, total {total})"
            )));
        }
        Ok(Self { p_m, r_m, total })
    }

    pub fn from_cloud(cloud: &SurfelCloud) -> Option<Self> {
        Self::new(cloud.p_m, cloud.r_m, cloud.len() as u64).ok()
    }

    /// `p = round(p_m * (r_m / r)^2)` (halves round up), clamped to `[1, total]`.
    pub fn prefix_for_radius(&self, r: f64) -> PrefixEstimate {
        let q = self.r_m / r;
        let raw = self.p_m as f64 * (q * q);
        let rounded = (raw + 0.5).floor();
        if !(rounded <= self.total as f64) {
            return PrefixEstimate {
                p: self.total,
                saturated: true,
            };
        }
        PrefixEstimate {
            p: (rounded as u64).max(1),
            saturated: false,
        }
    }

    /// Radius at which the whole cloud is needed: `r_m * sqrt(p_m / total)`.
    pub fn min_radius(&self) -> f64 {
        self.r_m * (self.p_m as f64 / self.total as f64).sqrt()
    }

    /// Radius whose estimated prefix is `p`: `r_m * sqrt(p_m / p)`.
    pub fn radius_for_prefix(&self, p: u64) -> f64 {
        self.r_m * (self.p_m as f64 / p.max(1) as f64).sqrt()
    }
}

pub fn prefix_for_radius(model: &PrefixModel, r: f64) -> PrefixEstimate {
    model.prefix_for_radius(r)
}

/// Blend weight of the children of a saturated node.
pub fn blend_alpha(r_min: f64, r: f64, width: f64) -> f64 {
    if !(r > 0.0) {
        return 1.0;
    }
    ((r_min / r - 1.0) / width).clamp(0.0, 1.0)
}

pub const DEADBAND: (f64, f64) = (0.9, 1.1);
pub const SIZE_MIN: f64 = 1.0;
pub const SIZE_MAX: f64 = 8.0;

/// Adaptive surfel-size feedback loop over a three-frame moving average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetController {
    pub t_target_ms: f64,
    pub window: [f64; 3],
    pub deadband: (f64, f64),
    pub size_min: f64,
    pub size_max: f64,
    pub size: f64,
}

impl BudgetController {
    pub fn new(t_target_ms: f64, initial_size: f64) -> Self {
        let s = initial_size.clamp(SIZE_MIN, SIZE_MAX);
        Self {
            t_target_ms,
            window: [s; 3],
            deadband: DEADBAND,
            size_min: SIZE_MIN,
            size_max: SIZE_MAX,
            size: s,
        }
    }

    pub fn window_mean(&self) -> f64 {
        (self.window[0] + self.window[1] + self.window[2]) / 3.0
    }

    /// Feeds one frame time and returns the new size.
    pub fn update(&mut self, t_frame_ms: f64) -> f64 {
        let ratio = t_frame_ms / self.t_target_ms;
        if !(ratio >= self.deadband.0 && ratio <= self.deadband.1) {
            let s_old = self.window_mean();
            self.size = ((s_old * 3.0 + s_old * ratio) / 4.0).clamp(self.size_min, self.size_max);
        }
        self.window = [self.window[1], self.window[2], self.size];
        self.size
    }
}

pub fn budget_update(ctrl: &mut BudgetController, t_frame_ms: f64) -> f64 {
    ctrl.update(t_frame_ms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoveaRing {
    /// Pixels from the zone center.
    pub radius: f64,
    pub multiplier: f64,
}

/// Concentric screen-space zones of one viewport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoveaZones {
    pub center: [f64; 2],
    pub rings: Vec<FoveaRing>,
}

impl FoveaZones {
    pub fn new(center: [f64; 2], rings: Vec<FoveaRing>) -> Result<Self> {
        if rings.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one fovea ring is required".into(),
            ));
        }
        for w in rings.windows(2) {
            if !(w[1].radius > w[0].radius) {
                return Err(Error::InvalidArgument(
                    "fovea radii must be strictly increasing".into(),
                ));
            }
            if w[1].multiplier < w[0].multiplier {
                return Err(Error::InvalidArgument(
                    "fovea multipliers must not decrease outward".into(),
                ));
            }
        }
        if rings
            .iter()
            .any(|r| !(r.multiplier >= 1.0) || !(r.radius >= 0.0))
        {
            return Err(Error::InvalidArgument(
                "fovea multipliers must be >= 1 and radii >= 0".into(),
            ));
        }
        Ok(Self { center, rings })
    }

    /// Single zone with multiplier 1.
    pub fn identity(center: [f64; 2]) -> Self {
        Self {
            center,
            rings: vec![FoveaRing {
                radius: 0.0,
                multiplier: 1.0,
            }],
        }
    }

    pub fn multiplier_at(&self, point: [f64; 2]) -> f64 {
        let d = (point[0] - self.center[0]).hypot(point[1] - self.center[1]);
        let first = self.rings[0];
        if d <= first.radius {
            return first.multiplier;
        }
        for w in self.rings.windows(2) {
            let (a, b) = (w[0], w[1]);
            if d <= b.radius {
                let t = (d - a.radius) / (b.radius - a.radius);
                return a.multiplier + (b.multiplier - a.multiplier) * t;
            }
        }
        self.rings[self.rings.len() - 1].multiplier
    }

    pub fn outermost_multiplier(&self) -> f64 {
        self.rings[self.rings.len() - 1].multiplier
    }
}

pub fn foveated_size(s: f64, screen_center: [f64; 2], zones: &FoveaZones) -> f64 {
    s * zones.multiplier_at(screen_center)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RenderAction {
    /// Draw the first `count` surfels as discs of `radius` (node-local) in
    /// `size`-pixel squares.
    SurfelPrefix {
        count: u64,
        size: f32,
        radius: f32,
    },
    Geometry,
    /// Draw the parent's cloud reduced to `count` surfels while the children
    /// render at weight `alpha`.
    BlendParentChild {
        alpha: f64,
        count: u64,
        size: f32,
        radius: f32,
    },
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenderItem {
    pub node: NodeId,
    pub action: RenderAction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectOptions {
    pub rule: RadiusRule,
    pub use_lod: bool,
    pub blend_width: f64,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self {
            rule: RadiusRule::Consistent,
            use_lod: true,
            blend_width: DEFAULT_BLEND_WIDTH,
        }
    }
}

/// Non-skip actions; each one is a single draw.
pub fn draw_call_count(items: &[RenderItem]) -> usize {
    items
        .iter()
        .filter(|i| !matches!(i.action, RenderAction::Skip))
        .count()
}

/// Depth-first traversal choosing geometry, a surfel prefix or a
/// parent/child blend for every node.
pub fn select_render_actions(
    scene: &Scene,
    camera: &Camera,
    surfel_size: f64,
    zones: Option<&FoveaZones>,
    options: &SelectOptions,
) -> Vec<RenderItem> {
    let mut out = Vec::new();
    visit(
        scene,
        scene.root(),
        camera,
        surfel_size,
        zones,
        options,
        1.0,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn visit(
    scene: &Scene,
    id: NodeId,
    camera: &Camera,
    surfel_size: f64,
    zones: Option<&FoveaZones>,
    options: &SelectOptions,
    weight: f64,
    out: &mut Vec<RenderItem>,
) {
    let node = scene.node(id);
    if !camera.frustum_intersects(&node.bounds) {
        out.push(RenderItem {
            node: id,
            action: RenderAction::Skip,
        });
        return;
    }
    let model = if options.use_lod {
        node.lod.as_deref().and_then(PrefixModel::from_cloud)
    } else {
        None
    };
    let mut child_weight = weight;
    if let Some(model) = model {
        let s = match zones {
            Some(z) => {
                let m = match camera.project(node.bounds.center()) {
                    Some(p) => z.multiplier_at([p.x as f64, p.y as f64]),
                    None => z.outermost_multiplier(),
                };
                surfel_size * m
            }
            None => surfel_size,
        };
        let d_p = projected_pixel_distance(camera, node).unwrap_or(0.0);
        let r = if d_p > 0.0 {
            radius_for_screen(s, d_p, options.rule).unwrap_or(0.0)
        } else {
            0.0
        };
        let est = if r > 0.0 {
            model.prefix_for_radius(r)
        } else {
            PrefixEstimate {
                p: model.total,
                saturated: true,
            }
        };
        if !est.saturated {
            let count = weighted(est.p, weight);
            out.push(RenderItem {
                node: id,
                action: RenderAction::SurfelPrefix {
                    count,
                    size: s as f32,
                    radius: r as f32,
                },
            });
            return;
        }
        let r_min = model.min_radius();
        let alpha = blend_alpha(r_min, r, options.blend_width);
        // The parent keeps covering at its smallest radius; the splat square
        // grows accordingly.
        let size = if r > 0.0 { s * r_min / r } else { s };
        let count = weighted(((1.0 - alpha) * model.total as f64).round() as u64, weight);
        if count > 0 {
            out.push(RenderItem {
                node: id,
                action: RenderAction::BlendParentChild {
                    alpha,
                    count,
                    size: size as f32,
                    radius: r_min as f32,
                },
            });
        }
        child_weight = weight * alpha;
    }
    if node.is_leaf() {
        out.push(RenderItem {
            node: id,
            action: RenderAction::Geometry,
        });
        return;
    }
    for &c in node.children() {
        visit(
            scene,
            c,
            camera,
            surfel_size,
            zones,
            options,
            child_weight,
            out,
        );
    }
}

fn weighted(count: u64, weight: f64) -> u64 {
    if weight >= 1.0 {
        count
    } else {
        ((count as f64 * weight).round() as u64).max(u64::from(weight > 0.0 && count > 0))
    }
}

/// Reference input/output pairs for the prefix, radius, controller and
/// foveation formulas, for checking other implementations.
pub fn test_vectors() -> serde_json::Value {
    let mut prefix = Vec::new();
    let model = PrefixModel {
        p_m: 1000,
        r_m: 0.01,
        total: 200_000,
    };
    for r in [0.01, 0.005, 0.02, 0.0125, 0.003, 0.001, 0.1, 1.0] {
        let e = model.prefix_for_radius(r);
        prefix.push(json!({ "p_m": model.p_m, "r_m": model.r_m, "total": model.total, "r": r, "p": e.p, "saturated": e.saturated }));
    }
    let mut radius = Vec::new();
    for (s, d_p) in [
        (2.0, 1.0),
        (4.0, 0.5),
        (1.0, 2.0),
        (3.0, 0.004),
        (8.0, 0.25),
    ] {
        for rule in [RadiusRule::Consistent, RadiusRule::AsPrinted] {
            radius.push(json!({ "s": s, "d_p": d_p, "rule": rule, "r": radius_for_screen(s, d_p, rule).unwrap() }));
        }
    }
    let mut budget = Vec::new();
    for (s0, frames) in [
        (4.0, vec![10.0]),
        (4.0, vec![20.0]),
        (7.8, vec![15.0]),
        (1.2, vec![2.0, 2.0, 2.0]),
        (2.0, vec![25.0, 9.5, 30.0, 4.0, 10.5]),
    ] {
        let mut c = BudgetController::new(10.0, s0);
        let sizes: Vec<f64> = frames.iter().map(|&t| c.update(t)).collect();
        budget.push(
            json!({ "t_target": 10.0, "initial_size": s0, "frames": frames, "sizes": sizes }),
        );
    }
    let zones = FoveaZones::new(
        [640.0, 360.0],
        vec![
            FoveaRing {
                radius: 100.0,
                multiplier: 1.0,
            },
            FoveaRing {
                radius: 300.0,
                multiplier: 2.0,
            },
            FoveaRing {
                radius: 500.0,
                multiplier: 4.0,
            },
        ],
    )
    .expect("valid zones");
    let mut foveation = Vec::new();
    for p in [
        [640.0, 360.0],
        [740.0, 360.0],
        [840.0, 360.0],
        [640.0, 760.0],
        [1200.0, 700.0],
        [0.0, 0.0],
    ] {
        foveation.push(json!({ "point": p, "s": 2.0, "size": foveated_size(2.0, p, &zones) }));
    }
    json!({
        "prefix": prefix,
        "radius": radius,
        "budget": budget,
        "foveation": { "zones": zones, "cases": foveation },
    })
}
