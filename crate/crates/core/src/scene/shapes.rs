//! Procedural meshes used by tests, benchmarks and the stand-in scenes.
//! All shapes use counter-clockwise winding seen from outside.

use std::f32::consts::{PI, TAU};

use glam::{Vec3, Vec4};

use super::mesh::TriangleMesh;

/// Unit quad `[0,1]^2` in the `z = 0` plane facing `+z`.
pub fn quad() -> TriangleMesh {
    let p = vec![Vec3::ZERO, Vec3::X, Vec3::new(1.0, 1.0, 0.0), Vec3::Y];
    TriangleMesh::new(p, Some(vec![Vec3::Z; 4]), None, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
}

/// Axis-aligned box with flat-shaded faces (24 vertices, 12 triangles).
pub fn cube(min: Vec3, max: Vec3) -> TriangleMesh {
    let mut positions = Vec::with_capacity(24);
    let mut normals = Vec::with_capacity(24);
    let mut triangles = Vec::with_capacity(12);
    let faces: [(Vec3, Vec3, Vec3); 6] = [
        (Vec3::X, Vec3::Y, Vec3::Z),
        (Vec3::NEG_X, Vec3::Z, Vec3::Y),
        (Vec3::Y, Vec3::Z, Vec3::X),
        (Vec3::NEG_Y, Vec3::X, Vec3::Z),
        (Vec3::Z, Vec3::X, Vec3::Y),
        (Vec3::NEG_Z, Vec3::Y, Vec3::X),
    ];
    let center = (min + max) * 0.5;
    let half = (max - min) * 0.5;
    for (n, u, v) in faces {
        let base = positions.len() as u32;
        for (su, sv) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            positions.push(center + (n + u * su + v * sv) * half);
            normals.push(n);
        }
        triangles.push([base, base + 1, base + 2]);
        triangles.push([base, base + 2, base + 3]);
    }
    TriangleMesh::new(positions, Some(normals), None, triangles).unwrap()
}

/// Latitude/longitude sphere with smooth normals. Triangles: `2 * slices * (stacks - 1)`.
pub fn uv_sphere(center: Vec3, radius: f32, stacks: u32, slices: u32) -> TriangleMesh {
    displaced_sphere(
        center,
        stacks,
        slices,
        |_, _| radius,
        |n| (n * 0.5 + 0.5).extend(1.0),
    )
}

/// Sphere whose radius is `radius(theta, phi)` (polar angle from +y, azimuth).
fn displaced_sphere(
    center: Vec3,
    stacks: u32,
    slices: u32,
    radius: impl Fn(f32, f32) -> f32,
    color: impl Fn(Vec3) -> Vec4,
) -> TriangleMesh {
    assert!(stacks >= 2 && slices >= 3);
    let mut positions = Vec::new();
    let mut colors = Vec::new();
    // Poles are single vertices.
    let dir = |theta: f32, phi: f32| {
        Vec3::new(
            theta.sin() * phi.cos(),
            theta.cos(),
            theta.sin() * phi.sin(),
        )
    };
    positions.push(center + Vec3::Y * radius(0.0, 0.0));
    colors.push(color(Vec3::Y));
    for i in 1..stacks {
        let theta = PI * i as f32 / stacks as f32;
        for j in 0..slices {
            let phi = TAU * j as f32 / slices as f32;
            let d = dir(theta, phi);
            positions.push(center + d * radius(theta, phi));
            colors.push(color(d));
        }
    }
    positions.push(center + Vec3::NEG_Y * radius(PI, 0.0));
    colors.push(color(Vec3::NEG_Y));
    let south = positions.len() as u32 - 1;
    let ring = |i: u32, j: u32| 1 + (i - 1) * slices + (j % slices);
    let mut triangles = Vec::new();
    for j in 0..slices {
        triangles.push([0, ring(1, j + 1), ring(1, j)]);
    }
    for i in 1..stacks - 1 {
        for j in 0..slices {
            let (a, b, c, d) = (
                ring(i, j),
                ring(i, j + 1),
                ring(i + 1, j),
                ring(i + 1, j + 1),
            );
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    for j in 0..slices {
        triangles.push([south, ring(stacks - 1, j), ring(stacks - 1, j + 1)]);
    }
    TriangleMesh::new(positions, None, Some(colors), triangles).unwrap()
}

/// Bumpy, banded sphere of roughly unit radius used as the high-poly
/// reference object. The triangle count is close to `target_triangles`.
pub fn reference_object(target_triangles: u32) -> TriangleMesh {
    // 2 * slices * (stacks - 1) triangles with slices ~ stacks.
    let stacks = ((target_triangles as f32 / 2.0).sqrt().round() as u32).max(3);
    let slices = (target_triangles / (2 * (stacks - 1))).max(3);
    displaced_sphere(
        Vec3::ZERO,
        stacks,
        slices,
        |theta, phi| {
            1.0 + 0.12 * (5.0 * theta).sin() * (4.0 * phi).cos()
                + 0.05 * (11.0 * phi).sin() * theta.sin()
        },
        |d| {
            let band = ((d.y * 6.0).floor() as i32).rem_euclid(3);
            let base = match band {
                0 => Vec3::new(0.85, 0.35, 0.2),
                1 => Vec3::new(0.25, 0.6, 0.85),
                _ => Vec3::new(0.9, 0.85, 0.3),
            };
            let stripe = if ((d.x.atan2(d.z) * 8.0 / PI).floor() as i32).rem_euclid(2) == 0 {
                1.0
            } else {
                0.7
            };
            (base * stripe).extend(1.0)
        },
    )
}

/// Torus around the `y` axis.
pub fn torus(major: f32, minor: f32, rings: u32, sides: u32) -> TriangleMesh {
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut colors = Vec::new();
    for i in 0..rings {
        let u = TAU * i as f32 / rings as f32;
        let (su, cu) = u.sin_cos();
        for j in 0..sides {
            let v = TAU * j as f32 / sides as f32;
            let (sv, cv) = v.sin_cos();
            let n = Vec3::new(cu * cv, sv, su * cv);
            positions.push(Vec3::new(cu * major, 0.0, su * major) + n * minor);
            normals.push(n);
            colors.push(Vec4::new(
                0.3 + 0.6 * (i % 2) as f32,
                0.4,
                0.3 + 0.6 * (j % 2) as f32,
                1.0,
            ));
        }
    }
    let idx = |i: u32, j: u32| (i % rings) * sides + (j % sides);
    let mut triangles = Vec::new();
    for i in 0..rings {
        for j in 0..sides {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    TriangleMesh::new(positions, Some(normals), Some(colors), triangles).unwrap()
}
