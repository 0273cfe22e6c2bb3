pub mod bench;
pub mod build;
pub mod generate;
pub mod inspect;
pub mod render;
pub mod serve;

use std::fs;
use std::path::Path;

use surfel_core::scene::{load_mesh, MeshFormat};
use surfel_core::{read_manifest, CameraPose, NodeId, Scene};

use crate::error::{io_err, CliError, Result};

/// A manifest (file or directory) or a single OBJ/PLY mesh.
pub fn load_scene(path: &Path) -> Result<Scene> {
    if let Some(format) = MeshFormat::from_path(path) {
        return Ok(Scene::single_mesh(load_mesh(path, format)?));
    }
    Ok(read_manifest(path)?)
}

pub fn node_id(scene: &Scene, node: Option<u32>) -> Result<NodeId> {
    match node {
        None => Ok(scene.root()),
        Some(n) if (n as usize) < scene.len() => Ok(NodeId(n)),
        Some(n) => Err(CliError::Usage(format!(
            "node {n} does not exist (scene has {} nodes)",
            scene.len()
        ))),
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Pose {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_pose(path: &Path) -> Result<CameraPose> {
    read_json(path)
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}
