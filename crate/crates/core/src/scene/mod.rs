//! Scene graph: meshes in leaves, groups above them, optional surfel LODs on any node.

pub mod io;
pub mod mesh;
pub mod octree;
pub mod shapes;

use std::sync::Arc;

use glam::Mat4;
use serde::{Deserialize, Serialize};

pub use io::{load_mesh, write_ply, MeshFormat};
pub use mesh::TriangleMesh;
pub use octree::LooseOctree;

use crate::error::{Error, Result};
use crate::geom::Aabb;
use crate::sampling::SurfelCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeshId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodePayload {
    Mesh(MeshId),
    Children(Vec<NodeId>),
}

#[derive(Debug, Clone)]
pub struct SceneNode {
    pub id: NodeId,
    pub name: String,
    /// Local-to-world transform. Surfel LODs are expressed in this frame.
    pub transform: Mat4,
    /// World-space bounds of the whole subtree.
    pub bounds: Aabb,
    pub payload: NodePayload,
    pub lod: Option<Arc<SurfelCloud>>,
    /// Seed the LOD was sampled with, when known.
    pub lod_seed: Option<u64>,
    /// Triangles in the subtree.
    pub triangle_count: u64,
}

impl SceneNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.payload, NodePayload::Mesh(_))
    }

    pub fn children(&self) -> &[NodeId] {
        match &self.payload {
            NodePayload::Children(c) => c,
            NodePayload::Mesh(_) => &[],
        }
    }
}

/// Immutable-after-build scene tree. Only LOD attachment mutates it.
#[derive(Debug, Clone)]
pub struct Scene {
    nodes: Vec<SceneNode>,
    meshes: Vec<Arc<TriangleMesh>>,
    root: NodeId,
}

impl Scene {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &SceneNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[SceneNode] {
        &self.nodes
    }

    pub fn mesh(&self, id: MeshId) -> &Arc<TriangleMesh> {
        &self.meshes[id.0 as usize]
    }

    pub fn meshes(&self) -> &[Arc<TriangleMesh>] {
        &self.meshes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn set_lod(&mut self, id: NodeId, cloud: Option<Arc<SurfelCloud>>) {
        self.nodes[id.index()].lod = cloud;
    }

    pub fn set_lod_seed(&mut self, id: NodeId, seed: Option<u64>) {
        self.nodes[id.index()].lod_seed = seed;
    }

    pub fn clear_lods(&mut self) {
        for n in &mut self.nodes {
            n.lod = None;
            n.lod_seed = None;
        }
    }

    /// Scene with a single leaf node holding `mesh` under the identity transform.
    pub fn single_mesh(mesh: impl Into<Arc<TriangleMesh>>) -> Self {
        let mut b = SceneBuilder::new();
        let m = b.add_mesh(mesh);
        let leaf = b.add_leaf("mesh", Mat4::IDENTITY, m);
        b.build(leaf).expect("a single leaf is always a valid tree")
    }

    /// Nodes of the subtree in post-order (children before parents).
    pub fn post_order(&self, from: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![(from, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
                continue;
            }
            stack.push((id, true));
            for &c in self.node(id).children().iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    /// Depth of every node below the root (root = 0), indexed by node id.
    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            for &c in self.node(id).children() {
                depth[c.index()] = depth[id.index()] + 1;
                stack.push(c);
            }
        }
        depth
    }

    /// Leaves of the subtree with their world transforms.
    pub fn leaves(&self, from: NodeId) -> Vec<(NodeId, MeshId)> {
        self.post_order(from)
            .into_iter()
            .filter_map(|id| match self.node(id).payload {
                NodePayload::Mesh(m) => Some((id, m)),
                NodePayload::Children(_) => None,
            })
            .collect()
    }

    /// Tight world-space box over the transformed geometry of the subtree,
    /// recomputed from the vertices.
    pub fn node_bounds_world(&self, id: NodeId) -> Aabb {
        let node = self.node(id);
        match &node.payload {
            NodePayload::Mesh(m) => self.mesh(*m).transformed_bounds(&node.transform),
            NodePayload::Children(children) => children
                .iter()
                .fold(Aabb::EMPTY, |b, &c| b.union(self.node_bounds_world(c))),
        }
    }

    /// Tight box of the subtree's geometry in the node's own local frame.
    pub fn node_bounds_local(&self, id: NodeId) -> Aabb {
        let local_from_world = self.node(id).transform.inverse();
        self.leaves(id)
            .into_iter()
            .fold(Aabb::EMPTY, |b, (leaf, mesh)| {
                let m = local_from_world * self.node(leaf).transform;
                b.union(self.mesh(mesh).transformed_bounds(&m))
            })
    }

    /// Builds a tree over a flat list of leaves using a loose octree
    /// (looseness 2, at most 8 items per cell before it splits). Inner nodes
    /// correspond to non-trivial octree cells; cells holding a single entry
    /// are collapsed into that entry.
    pub fn build_spatial_structure(
        meshes: Vec<Arc<TriangleMesh>>,
        leaves: Vec<LeafSpec>,
    ) -> Result<Scene> {
        Self::build_spatial_structure_with(
            meshes,
            leaves,
            octree::DEFAULT_LOOSENESS,
            octree::DEFAULT_MAX_ITEMS,
        )
    }

    pub fn build_spatial_structure_with(
        meshes: Vec<Arc<TriangleMesh>>,
        leaves: Vec<LeafSpec>,
        looseness: f32,
        max_items: usize,
    ) -> Result<Scene> {
        if leaves.is_empty() {
            return Err(Error::EmptyInput("no scene nodes"));
        }
        let mut b = SceneBuilder::new();
        for m in meshes {
            b.add_mesh(m);
        }
        let mut items = Vec::with_capacity(leaves.len());
        for leaf in leaves {
            let mesh = b
                .meshes
                .get(leaf.mesh.0 as usize)
                .ok_or_else(|| Error::InvalidScene(format!("unknown mesh {}", leaf.mesh.0)))?;
            let bounds = mesh.transformed_bounds(&leaf.transform);
            if bounds.is_empty() || !bounds.min.is_finite() || !bounds.max.is_finite() {
                return Err(Error::InvalidScene(format!(
                    "leaf '{}' has invalid bounds",
                    leaf.name
                )));
            }
            let id = b.add_leaf(leaf.name, leaf.transform, leaf.mesh);
            items.push((id, bounds));
        }
        let tree = LooseOctree::from_items(items, looseness, max_items);
        let root = cell_to_node(&mut b, tree.root()).expect("octree holds at least one item");
        b.build(root)
    }
}

fn cell_to_node(b: &mut SceneBuilder, cell: &octree::OctreeCell<NodeId>) -> Option<NodeId> {
    let mut children: Vec<NodeId> = cell.items().iter().map(|(id, _)| *id).collect();
    children.extend(cell.children().filter_map(|c| cell_to_node(b, c)));
    match children.len() {
        0 => None,
        1 => Some(children[0]),
        _ => {
            let c = cell.center();
            let name = format!("cell_d{}_{:.3}_{:.3}_{:.3}", cell.depth(), c.x, c.y, c.z);
            Some(b.add_group(name, Mat4::IDENTITY, children))
        }
    }
}

/// Input leaf for [`Scene::build_spatial_structure`].
#[derive(Debug, Clone)]
pub struct LeafSpec {
    pub name: String,
    pub transform: Mat4,
    pub mesh: MeshId,
}

#[derive(Debug, Clone)]
struct PendingNode {
    name: String,
    transform: Mat4,
    payload: NodePayload,
    lod: Option<Arc<SurfelCloud>>,
    lod_seed: Option<u64>,
}

/// Single-writer scene construction.
#[derive(Debug, Default)]
pub struct SceneBuilder {
    meshes: Vec<Arc<TriangleMesh>>,
    nodes: Vec<PendingNode>,
}

impl SceneBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_mesh(&mut self, mesh: impl Into<Arc<TriangleMesh>>) -> MeshId {
        self.meshes.push(mesh.into());
        MeshId(self.meshes.len() as u32 - 1)
    }

    pub fn add_leaf(&mut self, name: impl Into<String>, transform: Mat4, mesh: MeshId) -> NodeId {
        self.push(name.into(), transform, NodePayload::Mesh(mesh))
    }

    pub fn add_group(
        &mut self,
        name: impl Into<String>,
        transform: Mat4,
        children: Vec<NodeId>,
    ) -> NodeId {
        self.push(name.into(), transform, NodePayload::Children(children))
    }

    pub fn set_lod(&mut self, id: NodeId, cloud: Arc<SurfelCloud>, seed: Option<u64>) {
        self.nodes[id.index()].lod = Some(cloud);
        self.nodes[id.index()].lod_seed = seed;
    }

    fn push(&mut self, name: String, transform: Mat4, payload: NodePayload) -> NodeId {
        self.nodes.push(PendingNode {
            name,
            transform,
            payload,
            lod: None,
            lod_seed: None,
        });
        NodeId(self.nodes.len() as u32 - 1)
    }

    /// Validates the tree shape and computes bounds and triangle counts.
    pub fn build(self, root: NodeId) -> Result<Scene> {
        let n = self.nodes.len();
        if root.index() >= n {
            return Err(Error::InvalidScene(format!("root {root} does not exist")));
        }
        let mut parent_seen = vec![false; n];
        parent_seen[root.index()] = true;
        let mut stack = vec![root];
        let mut reached = 1usize;
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id.index()];
            if !node.transform.is_finite() || node.transform.determinant().abs() < 1e-12 {
                return Err(Error::InvalidScene(format!(
                    "node {id} has a non-invertible transform"
                )));
            }
            match &node.payload {
                NodePayload::Mesh(m) => {
                    if m.0 as usize >= self.meshes.len() {
                        return Err(Error::InvalidScene(format!(
                            "node {id} references unknown mesh {}",
                            m.0
                        )));
                    }
                }
                NodePayload::Children(children) => {
                    if children.is_empty() {
                        return Err(Error::InvalidScene(format!("group {id} has no children")));
                    }
                    for &c in children {
                        if c.index() >= n {
                            return Err(Error::InvalidScene(format!(
                                "node {id} references unknown child {c}"
                            )));
                        }
                        if std::mem::replace(&mut parent_seen[c.index()], true) {
                            return Err(Error::InvalidScene(format!(
                                "node {c} has more than one parent or forms a cycle"
                            )));
                        }
                        reached += 1;
                        stack.push(c);
                    }
                }
            }
        }
        if reached != n {
            return Err(Error::InvalidScene(format!(
                "{} nodes are not reachable from the root",
                n - reached
            )));
        }

        let mut scene = Scene {
            nodes: self
                .nodes
                .into_iter()
                .enumerate()
                .map(|(i, p)| SceneNode {
                    id: NodeId(i as u32),
                    name: p.name,
                    transform: p.transform,
                    bounds: Aabb::EMPTY,
                    payload: p.payload,
                    lod: p.lod,
                    lod_seed: p.lod_seed,
                    triangle_count: 0,
                })
                .collect(),
            meshes: self.meshes,
            root,
        };
        for id in scene.post_order(root) {
            let (bounds, count) = match &scene.node(id).payload {
                NodePayload::Mesh(m) => {
                    let mesh = scene.mesh(*m);
                    (
                        mesh.transformed_bounds(&scene.node(id).transform),
                        mesh.triangle_count() as u64,
                    )
                }
                NodePayload::Children(children) => {
                    children.iter().fold((Aabb::EMPTY, 0u64), |(b, t), &c| {
                        let child = scene.node(c);
                        (b.union(child.bounds), t + child.triangle_count)
                    })
                }
            };
            let node = &mut scene.nodes[id.index()];
            node.bounds = bounds;
            node.triangle_count = count;
        }
        Ok(scene)
    }
}
