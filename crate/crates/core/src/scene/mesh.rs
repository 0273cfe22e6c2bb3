use glam::{Mat4, Vec3, Vec4};

use crate::error::{Error, Result};
use crate::geom::Aabb;

pub const DEFAULT_COLOR: Vec4 = Vec4::new(0.5, 0.5, 0.5, 1.0);

/// Indexed triangle mesh with per-vertex unit normals and RGBA colors.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    positions: Vec<Vec3>,
    normals: Vec<Vec3>,
    colors: Vec<Vec4>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Validates indices and fills in what is missing: area-weighted normals
    /// when `normals` is `None`, mid-gray when `colors` is `None`. Supplied
    /// normals are renormalized; zero-length ones are replaced by the
    /// area-weighted normal.
    pub fn new(
        positions: Vec<Vec3>,
        normals: Option<Vec<Vec3>>,
        colors: Option<Vec<Vec4>>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let n = positions.len();
        if let Some(bad) = triangles.iter().flatten().find(|&&i| i as usize >= n) {
            return Err(Error::InvalidMesh(format!(
                "triangle index {bad} out of range ({n} vertices)"
            )));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex position".into()));
        }
        let computed = area_weighted_normals(&positions, &triangles);
        let normals = match normals {
            Some(given) => {
                if given.len() != n {
                    return Err(Error::InvalidMesh(format!(
                        "{} normals for {n} vertices",
                        given.len()
                    )));
                }
                given
                    .into_iter()
                    .zip(&computed)
                    .map(|(g, &c)| match g.length_squared() {
                        // Already unit: kept as is so a save/load cycle is bit-exact.
                        l if (l - 1.0).abs() <= 1e-6 => g,
                        l if l > 1e-20 && g.is_finite() => g.normalize(),
                        _ => c,
                    })
                    .collect()
            }
            None => computed,
        };
        let colors = match colors {
            Some(c) if c.len() != n => {
                return Err(Error::InvalidMesh(format!(
                    "{} colors for {n} vertices",
                    c.len()
                )))
            }
            Some(c) => c
                .into_iter()
                .map(|c| c.clamp(Vec4::ZERO, Vec4::ONE))
                .collect(),
            None => vec![DEFAULT_COLOR; n],
        };
        Ok(Self {
            positions,
            normals,
            colors,
            triangles,
        })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn colors(&self) -> &[Vec4] {
        &self.colors
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.positions.iter().copied())
    }

    /// Tight box around the vertices after applying `m`.
    pub fn transformed_bounds(&self, m: &Mat4) -> Aabb {
        Aabb::from_points(self.positions.iter().map(|&p| m.transform_point3(p)))
    }

    /// Replaces all vertex colors.
    #[must_use]
    pub fn with_uniform_color(mut self, c: Vec4) -> Self {
        self.colors.fill(c.clamp(Vec4::ZERO, Vec4::ONE));
        self
    }
}

/// Per-vertex sum of unnormalized face normals (weights proportional to area).
/// Vertices without incident area get +Z.
pub fn area_weighted_normals(positions: &[Vec3], triangles: &[[u32; 3]]) -> Vec<Vec3> {
    let mut acc = vec![Vec3::ZERO; positions.len()];
    for t in triangles {
        let [a, b, c] = t.map(|i| positions[i as usize]);
        let n = (b - a).cross(c - a);
        for &i in t {
            acc[i as usize] += n;
        }
    }
    acc.into_iter()
        .map(|n| {
            if n.length_squared() > 0.0 {
                n.normalize()
            } else {
                Vec3::Z
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> (Vec<Vec3>, Vec<[u32; 3]>) {
        (vec![Vec3::ZERO, Vec3::X, Vec3::Y], vec![[0, 1, 2]])
    }

    #[test]
    fn computes_normals_and_default_color() {
        let (p, t) = tri();
        let m = TriangleMesh::new(p, None, None, t).unwrap();
        assert!(m.normals().iter().all(|n| (*n - Vec3::Z).length() < 1e-6));
        assert!(m.colors().iter().all(|&c| c == DEFAULT_COLOR));
    }

    #[test]
    fn renormalizes_supplied_normals() {
        let (p, t) = tri();
        let m = TriangleMesh::new(p, Some(vec![Vec3::new(0.0, 0.0, 3.0); 3]), None, t).unwrap();
        for n in m.normals() {
            assert!((n.length() - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_bad_indices_and_empty() {
        let (p, _) = tri();
        assert!(matches!(
            TriangleMesh::new(p.clone(), None, None, vec![[0, 1, 9]]),
            Err(Error::InvalidMesh(_))
        ));
        assert!(matches!(
            TriangleMesh::new(p, None, None, vec![]),
            Err(Error::EmptyMesh)
        ));
    }
}
