//! Seeded stand-in scenes.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfel_core::glam::{Mat4, Quat, Vec3};
use surfel_core::scene::{shapes, LeafSpec};
use surfel_core::{MeshId, Result, Scene, TriangleMesh};

/// Triangle count of the high-poly test object.
pub const REFERENCE_TRIANGLES: u32 = 35_000;

/// A single reference object at the origin.
pub fn reference_scene(triangles: u32) -> Scene {
    Scene::single_mesh(shapes::reference_object(triangles))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSceneConfig {
    pub rows: u32,
    pub cols: u32,
    /// Distance between neighbouring instance centers.
    pub spacing: f32,
    /// Approximate triangle count of each instanced mesh.
    pub triangles_per_object: u32,
    pub seed: u64,
}

impl Default for GridSceneConfig {
    fn default() -> Self {
        Self {
            rows: 8,
            cols: 8,
            spacing: 3.0,
            triangles_per_object: 3000,
            seed: 1,
        }
    }
}

/// Instance prototypes shared by every grid cell.
fn prototypes(triangles: u32) -> Vec<Arc<TriangleMesh>> {
    let sides = ((triangles as f32 / 2.0).sqrt().round() as u32).max(3);
    let stacks = ((triangles as f32 / 2.0).sqrt().round() as u32).max(3);
    vec![
        Arc::new(shapes::reference_object(triangles)),
        Arc::new(shapes::torus(0.8, 0.3, sides, sides)),
        Arc::new(shapes::uv_sphere(Vec3::ZERO, 0.9, stacks, stacks)),
    ]
}

/// Grid of randomly rotated and scaled instances on the `y = 0` plane,
/// organized by a loose octree.
pub fn grid_scene(config: &GridSceneConfig) -> Result<Scene> {
    let meshes = prototypes(config.triangles_per_object);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut leaves = Vec::with_capacity((config.rows * config.cols) as usize);
    for r in 0..config.rows {
        for c in 0..config.cols {
            let mesh = rng.random_range(0..meshes.len());
            let angle = rng.random_range(0.0..std::f32::consts::TAU);
            let scale = rng.random_range(0.6f32..1.2);
            let t = Vec3::new(c as f32 * config.spacing, scale, r as f32 * config.spacing);
            leaves.push(LeafSpec {
                name: format!("obj_{r}_{c}"),
                transform: Mat4::from_scale_rotation_translation(
                    Vec3::splat(scale),
                    Quat::from_rotation_y(angle),
                    t,
                ),
                mesh: MeshId(mesh as u32),
            });
        }
    }
    Scene::build_spatial_structure(meshes, leaves)
}
