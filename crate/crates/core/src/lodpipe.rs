//! Hierarchical LOD generation and persistence of surfel clouds and scenes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use glam::{Mat4, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::color::Rgba8;
use crate::error::{io_err, Error, Location, Result};
use crate::geom::Aabb;
use crate::raster::{
    capture_camera, gather_sources, rasterize_sources, sources_bounds, CaptureConfig, CaptureSource,
};
use crate::sampling::{
    sample_progressive, CandidateCollector, CandidateSet, SamplingConfig, Surfel, SurfelCloud,
};
use crate::scene::io::write_ply_bytes;
use crate::scene::{load_mesh, MeshFormat, MeshId, NodeId, NodePayload, Scene, SceneBuilder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LodPolicy {
    /// Leaves with at least this many triangles get their own approximation.
    pub min_triangles_for_lod: u64,
    /// Inner nodes with more triangles than this get an approximation.
    pub lod_triangle_threshold: u64,
    pub max_surfels: usize,
    /// Capture parents from their children's finished clouds.
    pub bottom_up: bool,
    pub reference_prefix: usize,
}

impl Default for LodPolicy {
    fn default() -> Self {
        Self {
            min_triangles_for_lod: 1000,
            lod_triangle_threshold: 10_000,
            max_surfels: 200_000,
            bottom_up: true,
            reference_prefix: 1000,
        }
    }
}

impl LodPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.min_triangles_for_lod > self.lod_triangle_threshold {
            return Err(Error::InvalidArgument(
                "min_triangles_for_lod must not exceed lod_triangle_threshold".into(),
            ));
        }
        if self.max_surfels == 0 {
            return Err(Error::InvalidArgument("max_surfels must be >= 1".into()));
        }
        Ok(())
    }

    /// `min(max_surfels, triangles / 2)`.
    pub fn surfel_count(&self, triangles: u64) -> usize {
        (self.max_surfels as u64).min(triangles / 2) as usize
    }

    pub fn wants_lod(&self, is_leaf: bool, triangles: u64) -> bool {
        if triangles < self.min_triangles_for_lod || self.surfel_count(triangles) == 0 {
            return false;
        }
        triangles > self.lod_triangle_threshold || is_leaf
    }

    /// Nodes that receive an approximation, in id order.
    pub fn lod_nodes(&self, scene: &Scene) -> Vec<NodeId> {
        scene
            .nodes()
            .iter()
            .filter(|n| self.wants_lod(n.is_leaf(), n.triangle_count))
            .map(|n| n.id)
            .collect()
    }
}

/// Wall-clock time per preprocessing stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StageTimings {
    pub capture: Duration,
    pub candidates: Duration,
    pub sampling: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.capture + self.candidates + self.sampling
    }
}

/// Captures every configured direction in turn and collects candidates,
/// keeping only one buffer alive at a time.
pub fn capture_candidates(
    sources: &[CaptureSource<'_>],
    config: &CaptureConfig,
) -> Result<(CandidateSet, StageTimings)> {
    config.validate()?;
    let bounds = sources_bounds(sources);
    let mut collector = CandidateCollector::new();
    let mut t = StageTimings::default();
    for d in config.resolve_directions(&bounds) {
        let start = Instant::now();
        let gb = rasterize_sources(
            sources,
            capture_camera(&bounds, d, config.resolution),
            config.cull_backfaces,
        );
        let mid = Instant::now();
        collector.add_buffer(&gb);
        t.capture += mid - start;
        t.candidates += mid.elapsed();
    }
    Ok((collector.finish(), t))
}

/// Seed of one node's sampling stream.
pub fn node_seed(base: u64, node: NodeId) -> u64 {
    // SplitMix64 finalizer over the combined value.
    let mut z = base ^ (u64::from(node.0).wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeLodStats {
    pub node: NodeId,
    pub triangles: u64,
    pub candidates: usize,
    pub surfels: usize,
    pub seed: u64,
    /// Capture drew child clouds instead of child geometry.
    pub used_child_lods: bool,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LodReport {
    pub generated: Vec<NodeLodStats>,
    /// Eligible nodes whose capture produced no candidates.
    pub skipped: Vec<NodeId>,
}

fn build_node_lod(
    scene: &Scene,
    id: NodeId,
    policy: &LodPolicy,
    capture: &CaptureConfig,
    sampling: &SamplingConfig,
) -> Result<(Option<SurfelCloud>, NodeLodStats)> {
    let node = scene.node(id);
    let sources = gather_sources(scene, id, policy.bottom_up);
    let used_child_lods = sources
        .iter()
        .any(|s| matches!(s, CaptureSource::Surfels { .. }));
    let (candidates, mut timings) = capture_candidates(&sources, capture)?;
    let seed = node_seed(sampling.seed, id);
    let mut stats = NodeLodStats {
        node: id,
        triangles: node.triangle_count,
        candidates: candidates.len(),
        surfels: 0,
        seed,
        used_child_lods,
        timings,
    };
    if candidates.is_empty() {
        log::warn!(
            "node {id} ('{}'): capture produced no candidates, skipping",
            node.name
        );
        return Ok((None, stats));
    }
    let config = SamplingConfig {
        target_count: policy
            .surfel_count(node.triangle_count)
            .min(candidates.len()),
        seed,
        start: None,
        reference_prefix: policy.reference_prefix,
        ..sampling.clone()
    };
    let t = Instant::now();
    let cloud = sample_progressive(&candidates, &config)?;
    timings.sampling = t.elapsed();
    stats.timings = timings;
    stats.surfels = cloud.len();
    log::info!(
        "node {id} ('{}'): {} triangles, {} candidates, {} surfels, r_m {:.6}",
        node.name,
        node.triangle_count,
        candidates.len(),
        cloud.len(),
        cloud.r_m
    );
    Ok((Some(cloud), stats))
}

/// Attaches an approximation to every node the policy selects. Bottom-up
/// mode processes deeper levels first so parents can capture their
/// children's clouds; nodes within a level run in parallel.
pub fn generate_lods(
    scene: &mut Scene,
    policy: &LodPolicy,
    capture: &CaptureConfig,
    sampling: &SamplingConfig,
) -> Result<LodReport> {
    policy.validate()?;
    capture.validate()?;
    sampling.validate()?;
    let targets = policy.lod_nodes(scene);
    let mut levels: BTreeMap<std::cmp::Reverse<u32>, Vec<NodeId>> = BTreeMap::new();
    if policy.bottom_up {
        let depths = scene.depths();
        for &id in &targets {
            levels
                .entry(std::cmp::Reverse(depths[id.index()]))
                .or_default()
                .push(id);
        }
    } else if !targets.is_empty() {
        levels.insert(std::cmp::Reverse(0), targets);
    }

    let mut report = LodReport::default();
    for (_, ids) in levels {
        let results: Vec<_> = ids
            .par_iter()
            .map(|&id| build_node_lod(scene, id, policy, capture, sampling))
            .collect::<Result<_>>()?;
        for (cloud, stats) in results {
            match cloud {
                Some(c) => {
                    scene.set_lod(stats.node, Some(Arc::new(c)));
                    scene.set_lod_seed(stats.node, Some(stats.seed));
                    report.generated.push(stats);
                }
                None => report.skipped.push(stats.node),
            }
        }
    }
    report.generated.sort_by_key(|s| s.node);
    Ok(report)
}

pub const SURFEL_MAGIC: [u8; 4] = *b"PBS1";
pub const SURFEL_VERSION: u32 = 1;
pub const SURFEL_HEADER_LEN: usize = 56;
pub const SURFEL_RECORD_LEN: usize = 28;

/// Little-endian encoding: magic, version, count (u64), p_m (u64), r_m (f64),
/// bounds min and max (6 x f32), then per surfel position (3 x f32), normal
/// (3 x f32) and RGBA (4 x u8).
pub fn encode_surfels(cloud: &SurfelCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(SURFEL_HEADER_LEN + cloud.len() * SURFEL_RECORD_LEN);
    out.extend_from_slice(&SURFEL_MAGIC);
    out.extend_from_slice(&SURFEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(cloud.len() as u64).to_le_bytes());
    out.extend_from_slice(&cloud.p_m.to_le_bytes());
    out.extend_from_slice(&cloud.r_m.to_le_bytes());
    for v in cloud
        .bounds
        .min
        .to_array()
        .into_iter()
        .chain(cloud.bounds.max.to_array())
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for s in &cloud.surfels {
        for v in s.position.to_array().into_iter().chain(s.normal.to_array()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&s.color.0);
    }
    out
}

fn f32_at(b: &[u8], o: usize) -> f32 {
    f32::from_le_bytes(b[o..o + 4].try_into().unwrap())
}

fn vec3_at(b: &[u8], o: usize) -> Vec3 {
    Vec3::new(f32_at(b, o), f32_at(b, o + 4), f32_at(b, o + 8))
}

pub fn decode_surfels(bytes: &[u8], path: &Path) -> Result<SurfelCloud> {
    let truncated = |expected: usize| Error::Truncated {
        path: path.to_path_buf(),
        expected: expected as u64,
        actual: bytes.len() as u64,
    };
    if bytes.len() < 4 {
        return Err(truncated(SURFEL_HEADER_LEN));
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != SURFEL_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: magic,
        });
    }
    if bytes.len() < SURFEL_HEADER_LEN {
        return Err(truncated(SURFEL_HEADER_LEN));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != SURFEL_VERSION {
        return Err(Error::UnsupportedVersion {
            path: path.to_path_buf(),
            version,
        });
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let p_m = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let r_m = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let bounds = Aabb::new(vec3_at(bytes, 32), vec3_at(bytes, 44));
    let expected = count
        .checked_mul(SURFEL_RECORD_LEN as u64)
        .and_then(|p| p.checked_add(SURFEL_HEADER_LEN as u64))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            location: Location::Offset(8),
            message: format!("implausible surfel count {count}"),
        })?;
    if (bytes.len() as u64) < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    if (bytes.len() as u64) > expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            location: Location::Offset(expected),
            message: format!("{} trailing bytes", bytes.len() as u64 - expected),
        });
    }
    let surfels = bytes[SURFEL_HEADER_LEN..]
        .chunks_exact(SURFEL_RECORD_LEN)
        .map(|r| Surfel {
            position: vec3_at(r, 0),
            normal: vec3_at(r, 12),
            color: Rgba8(r[24..28].try_into().unwrap()),
        })
        .collect();
    Ok(SurfelCloud {
        surfels,
        p_m,
        r_m,
        bounds,
    })
}

pub fn write_surfel_file(cloud: &SurfelCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_surfels(cloud)).map_err(io_err(path))
}

pub fn read_surfel_file(path: impl AsRef<Path>) -> Result<SurfelCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_surfels(&bytes, path)
}

pub const MANIFEST_FILE: &str = "scene.json";
pub const MANIFEST_FORMAT: &str = "surfel-scene";
pub const MANIFEST_VERSION: u32 = 1;

/// Floats are stored as `f64` so that every `f32` survives the text round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub root: u32,
    pub nodes: Vec<ManifestNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestBounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestNode {
    pub id: u32,
    pub name: String,
    /// Local-to-world, row-major.
    pub transform: [f64; 16],
    pub bounds: ManifestBounds,
    pub triangle_count: u64,
    /// Mesh file relative to the manifest directory (leaves only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lod: Option<ManifestLod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestLod {
    pub file: String,
    pub count: u64,
    pub p_m: u64,
    pub r_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn to_f64<const N: usize>(v: [f32; N]) -> [f64; N] {
    v.map(f64::from)
}

fn to_f32<const N: usize>(v: [f64; N]) -> [f32; N] {
    v.map(|x| x as f32)
}

fn bounds_to_manifest(b: &Aabb) -> ManifestBounds {
    ManifestBounds {
        min: to_f64(b.min.to_array()),
        max: to_f64(b.max.to_array()),
    }
}

/// Writes `scene.json`, one PLY per distinct mesh content under `meshes/`
/// and one surfel file per LOD under `lods/`.
pub fn write_manifest(scene: &Scene, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    for sub in ["meshes", "lods"] {
        fs::create_dir_all(dir.join(sub)).map_err(io_err(dir.join(sub)))?;
    }
    let mut mesh_files: BTreeMap<MeshId, String> = BTreeMap::new();
    let mut written: BTreeMap<String, ()> = BTreeMap::new();
    let mut nodes = Vec::with_capacity(scene.len());
    for node in scene.nodes() {
        let mesh = match node.payload {
            NodePayload::Mesh(m) => {
                if let std::collections::btree_map::Entry::Vacant(e) = mesh_files.entry(m) {
                    let bytes = write_ply_bytes(scene.mesh(m));
                    let name = format!("meshes/{}.ply", hex::encode(Sha256::digest(&bytes)));
                    if written.insert(name.clone(), ()).is_none() {
                        let p = dir.join(&name);
                        fs::write(&p, &bytes).map_err(io_err(p))?;
                    }
                    e.insert(name);
                }
                Some(mesh_files[&m].clone())
            }
            NodePayload::Children(_) => None,
        };
        let lod = match &node.lod {
            Some(cloud) => {
                let file = format!("lods/node_{}.pbs", node.id.0);
                write_surfel_file(cloud, dir.join(&file))?;
                Some(ManifestLod {
                    file,
                    count: cloud.len() as u64,
                    p_m: cloud.p_m,
                    r_m: cloud.r_m,
                    seed: node.lod_seed,
                })
            }
            None => None,
        };
        nodes.push(ManifestNode {
            id: node.id.0,
            name: node.name.clone(),
            transform: to_f64(node.transform.transpose().to_cols_array()),
            bounds: bounds_to_manifest(&node.bounds),
            triangle_count: node.triangle_count,
            mesh,
            children: node.children().iter().map(|c| c.0).collect(),
            lod,
        });
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        root: scene.root().0,
        nodes,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Manifest {
        path: path.clone(),
        source,
    })?;
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

/// Accepts either the manifest file itself or its directory.
pub fn manifest_path(path: impl AsRef<Path>) -> PathBuf {
    let p = path.as_ref();
    if p.is_dir() {
        p.join(MANIFEST_FILE)
    } else {
        p.to_path_buf()
    }
}

pub fn read_manifest_file(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = manifest_path(path);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|source| Error::Manifest {
        path: path.clone(),
        source,
    })?;
    if m.format != MANIFEST_FORMAT {
        return Err(Error::InvalidScene(format!(
            "unexpected manifest format '{}'",
            m.format
        )));
    }
    if m.version != MANIFEST_VERSION {
        return Err(Error::InvalidScene(format!(
            "unsupported manifest version {}",
            m.version
        )));
    }
    Ok(m)
}

fn resolve(dir: &Path, rel: &str) -> Result<PathBuf> {
    let p = dir.join(rel);
    if p.is_file() {
        Ok(p)
    } else {
        Err(Error::DanglingReference(p))
    }
}

/// Loads a scene written by [`write_manifest`], including meshes and LODs.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Scene> {
    let path = manifest_path(path);
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let m = read_manifest_file(&path)?;
    let mut b = SceneBuilder::new();
    let mut meshes: BTreeMap<String, MeshId> = BTreeMap::new();
    for (i, n) in m.nodes.iter().enumerate() {
        if n.id as usize != i {
            return Err(Error::InvalidScene(format!(
                "node ids must be dense and ordered, found {} at {i}",
                n.id
            )));
        }
        let transform = Mat4::from_cols_array(&to_f32(n.transform)).transpose();
        let id = match (&n.mesh, n.children.is_empty()) {
            (Some(file), true) => {
                let mesh = match meshes.get(file) {
                    Some(&id) => id,
                    None => {
                        let p = resolve(&dir, file)?;
                        let id = b.add_mesh(load_mesh(&p, MeshFormat::Ply)?);
                        meshes.insert(file.clone(), id);
                        id
                    }
                };
                b.add_leaf(n.name.clone(), transform, mesh)
            }
            (None, false) => b.add_group(
                n.name.clone(),
                transform,
                n.children.iter().map(|&c| NodeId(c)).collect(),
            ),
            _ => {
                return Err(Error::InvalidScene(format!(
                    "node {} must have either a mesh or children",
                    n.id
                )))
            }
        };
        if let Some(lod) = &n.lod {
            let p = resolve(&dir, &lod.file)?;
            let cloud = read_surfel_file(&p)?;
            if cloud.len() as u64 != lod.count
                || cloud.p_m != lod.p_m
                || cloud.r_m.to_bits() != lod.r_m.to_bits()
            {
                return Err(Error::InvalidScene(format!(
                    "{}: header disagrees with the manifest entry of node {}",
                    p.display(),
                    n.id
                )));
            }
            b.set_lod(id, Arc::new(cloud), lod.seed);
        }
    }
    b.build(NodeId(m.root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::shapes;
    use proptest::prelude::*;

    #[test]
    fn policy_examples() {
        let p = LodPolicy::default();
        assert!(!p.wants_lod(true, 500));
        assert_eq!(p.surfel_count(30_000), 15_000);
        assert!(p.wants_lod(false, 30_000));
        assert!(!p.wants_lod(false, 5_000));
        assert_eq!(p.surfel_count(1_000_000), 200_000);
        assert!(LodPolicy {
            min_triangles_for_lod: 20_000,
            ..p
        }
        .validate()
        .is_err());
    }

    #[test]
    fn node_seeds_differ() {
        assert_ne!(node_seed(1, NodeId(0)), node_seed(1, NodeId(1)));
        assert_ne!(node_seed(1, NodeId(0)), node_seed(2, NodeId(0)));
    }

    #[test]
    fn empty_cloud_round_trips() {
        let c = SurfelCloud {
            surfels: vec![],
            p_m: 0,
            r_m: 0.0,
            bounds: Aabb::EMPTY,
        };
        let back = decode_surfels(&encode_surfels(&c), Path::new("x")).unwrap();
        assert_eq!(encode_surfels(&back), encode_surfels(&c));
        assert!(back.is_empty());
    }

    #[test]
    fn truncation_reports_sizes() {
        let c = SurfelCloud {
            surfels: vec![
                Surfel {
                    position: Vec3::ONE,
                    normal: Vec3::Z,
                    color: Rgba8([1, 2, 3, 4])
                };
                3
            ],
            p_m: 3,
            r_m: 0.0,
            bounds: Aabb::new(Vec3::ZERO, Vec3::ONE),
        };
        let bytes = encode_surfels(&c);
        assert_eq!(bytes.len(), SURFEL_HEADER_LEN + 3 * SURFEL_RECORD_LEN);
        match decode_surfels(&bytes[..bytes.len() - 5], Path::new("t.pbs")) {
            Err(Error::Truncated {
                expected, actual, ..
            }) => {
                assert_eq!(expected, bytes.len() as u64);
                assert_eq!(actual, bytes.len() as u64 - 5);
            }
            other => panic!("{other:?}"),
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            decode_surfels(&bad, Path::new("t")),
            Err(Error::BadMagic { .. })
        ));
        let mut v2 = bytes;
        v2[4] = 2;
        assert!(matches!(
            decode_surfels(&v2, Path::new("t")),
            Err(Error::UnsupportedVersion { version: 2, .. })
        ));
    }

    #[test]
    fn leaf_below_threshold_gets_no_lod() {
        let mut scene = Scene::single_mesh(shapes::uv_sphere(Vec3::ZERO, 1.0, 10, 12));
        assert!(scene.node(scene.root()).triangle_count < 1000);
        let r = generate_lods(
            &mut scene,
            &LodPolicy::default(),
            &CaptureConfig::with_resolution(32),
            &SamplingConfig::default(),
        )
        .unwrap();
        assert!(r.generated.is_empty());
        assert!(scene.node(scene.root()).lod.is_none());
    }

    #[test]
    fn shared_mesh_written_once() {
        let mut b = SceneBuilder::new();
        let m = b.add_mesh(shapes::cube(Vec3::ZERO, Vec3::ONE));
        let a = b.add_leaf("a", Mat4::IDENTITY, m);
        let c = b.add_leaf("c", Mat4::from_translation(Vec3::X * 3.0), m);
        let root = b.add_group("root", Mat4::IDENTITY, vec![a, c]);
        let scene = b.build(root).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_manifest(&scene, dir.path()).unwrap();
        assert_eq!(fs::read_dir(dir.path().join("meshes")).unwrap().count(), 1);
        let manifest = read_manifest_file(dir.path()).unwrap();
        assert_eq!(manifest.nodes[0].mesh, manifest.nodes[1].mesh);
        let back = read_manifest(dir.path()).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(
            back.node(NodeId(1)).transform,
            scene.node(NodeId(1)).transform
        );
    }

    fn arb_cloud() -> impl Strategy<Value = SurfelCloud> {
        let surfel =
            (any::<[f32; 3]>(), any::<[f32; 3]>(), any::<[u8; 4]>()).prop_map(|(p, n, c)| Surfel {
                position: Vec3::from_array(p),
                normal: Vec3::from_array(n),
                color: Rgba8(c),
            });
        (
            prop::collection::vec(surfel, 0..64),
            any::<u64>(),
            any::<f64>(),
            any::<[f32; 6]>(),
        )
            .prop_map(|(s, p_m, r_m, b)| SurfelCloud {
                surfels: s,
                p_m,
                r_m,
                bounds: Aabb {
                    min: Vec3::new(b[0], b[1], b[2]),
                    max: Vec3::new(b[3], b[4], b[5]),
                },
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn surfel_encoding_is_bit_exact(c in arb_cloud()) {
            let bytes = encode_surfels(&c);
            let back = decode_surfels(&bytes, Path::new("p")).unwrap();
            prop_assert_eq!(encode_surfels(&back), bytes);
        }
    }
}
