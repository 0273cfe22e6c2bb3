//! Incremental point octree with exact nearest-neighbour distance queries.

use glam::Vec3;

use crate::geom::{dist2, Aabb};

pub const DEFAULT_LEAF_CAPACITY: usize = 16;
const MAX_DEPTH: u32 = 24;

/// Box-distance pruning keeps a small relative margin so that rounding in the
/// box distance can never hide a point whose computed distance is the minimum.
const PRUNE_SLACK: f32 = 1.0 + 1e-5;

#[derive(Debug, Clone)]
struct Node {
    center: Vec3,
    half: f32,
    depth: u32,
    /// Index of the first of eight contiguous children, or `u32::MAX` for leaves.
    first_child: u32,
    items: Vec<u32>,
    /// Positions of `items`, stored alongside for cache-friendly scans.
    item_pos: Vec<Vec3>,
    /// Bit `k` is set when child `k` holds at least one point.
    occupied: u8,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.first_child == u32::MAX
    }

    fn box_dist2(&self, q: Vec3) -> f32 {
        let d = (q - self.center).abs() - Vec3::splat(self.half);
        d.max(Vec3::ZERO).length_squared()
    }
}

#[derive(Debug, Clone)]
pub struct PointOctree {
    nodes: Vec<Node>,
    points: Vec<Vec3>,
    leaf_capacity: usize,
}

impl PointOctree {
    pub fn new(bounds: Aabb) -> Self {
        Self::with_capacity(bounds, DEFAULT_LEAF_CAPACITY)
    }

    pub fn with_capacity(bounds: Aabb, leaf_capacity: usize) -> Self {
        let (center, half) = if bounds.is_empty() {
            (Vec3::ZERO, 1.0)
        } else {
            // Slightly enlarged so that points on the max faces are strictly inside.
            (
                bounds.center(),
                bounds.half_extent().max_element().max(1e-6) * 1.001,
            )
        };
        Self {
            nodes: vec![Node {
                center,
                half,
                depth: 0,
                first_child: u32::MAX,
                items: Vec::new(),
                item_pos: Vec::new(),
                occupied: 0,
            }],
            points: Vec::new(),
            leaf_capacity: leaf_capacity.max(1),
        }
    }

    pub fn from_points(points: &[Vec3]) -> Self {
        let mut t = Self::new(Aabb::from_points(points.iter().copied()));
        for &p in points {
            t.insert(p);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Inserts a point and returns its index. The root grows when the point
    /// lies outside the current cube.
    pub fn insert(&mut self, p: Vec3) -> u32 {
        assert!(p.is_finite(), "non-finite point");
        while !self.root_contains(p) {
            self.grow_towards(p);
        }
        let idx = self.points.len() as u32;
        self.points.push(p);
        let mut n = 0usize;
        loop {
            let node = &self.nodes[n];
            if node.is_leaf() {
                break;
            }
            let k = octant(node.center, p);
            self.nodes[n].occupied |= 1 << k;
            n = self.nodes[n].first_child as usize + k;
        }
        self.nodes[n].items.push(idx);
        self.nodes[n].item_pos.push(p);
        if self.nodes[n].items.len() > self.leaf_capacity && self.nodes[n].depth < MAX_DEPTH {
            self.split(n);
        }
        idx
    }

    fn root_contains(&self, p: Vec3) -> bool {
        let r = &self.nodes[0];
        ((p - r.center).abs()).cmple(Vec3::splat(r.half)).all()
    }

    /// Doubles the root cube towards `p`, making the old root one of its octants.
    fn grow_towards(&mut self, p: Vec3) {
        let old = self.nodes[0].clone();
        let dir = Vec3::select(p.cmpge(old.center), Vec3::ONE, Vec3::NEG_ONE);
        let center = old.center + dir * old.half;
        let half = old.half * 2.0;
        // Rebuild from scratch: growth is rare (only for out-of-bounds inserts).
        let points = std::mem::take(&mut self.points);
        self.nodes = vec![Node {
            center,
            half,
            depth: 0,
            first_child: u32::MAX,
            items: Vec::new(),
            item_pos: Vec::new(),
            occupied: 0,
        }];
        for q in points {
            self.insert(q);
        }
    }

    fn split(&mut self, n: usize) {
        let first = self.nodes.len() as u32;
        let (center, half, depth) = (
            self.nodes[n].center,
            self.nodes[n].half,
            self.nodes[n].depth,
        );
        for slot in 0..8 {
            let q = half * 0.5;
            let s = |bit: usize| if slot & bit != 0 { q } else { -q };
            self.nodes.push(Node {
                center: center + Vec3::new(s(1), s(2), s(4)),
                half: q,
                depth: depth + 1,
                first_child: u32::MAX,
                items: Vec::new(),
                item_pos: Vec::new(),
                occupied: 0,
            });
        }
        let items = std::mem::take(&mut self.nodes[n].items);
        let item_pos = std::mem::take(&mut self.nodes[n].item_pos);
        self.nodes[n].first_child = first;
        for (i, p) in items.into_iter().zip(item_pos) {
            let k = octant(center, p);
            self.nodes[n].occupied |= 1 << k;
            let c = first as usize + k;
            self.nodes[c].items.push(i);
            self.nodes[c].item_pos.push(p);
        }
        for c in first as usize..first as usize + 8 {
            if self.nodes[c].items.len() > self.leaf_capacity && self.nodes[c].depth < MAX_DEPTH {
                self.split(c);
            }
        }
    }

    /// Squared distance from `q` to the nearest stored point, `f32::INFINITY`
    /// when empty.
    ///
    /// When `stop_below` is given the search may return early with any value
    /// strictly below it, which is enough for callers that only need to know
    /// whether `q` can beat a threshold.
    pub fn nearest_dist2(&self, q: Vec3, stop_below: Option<f32>) -> f32 {
        self.nearest(q, None, stop_below).0
    }

    /// Nearest stored point other than `exclude`: `(squared distance, index)`.
    pub fn nearest_excluding(&self, q: Vec3, exclude: u32) -> (f32, Option<u32>) {
        self.nearest(q, Some(exclude), None)
    }

    fn nearest(
        &self,
        q: Vec3,
        exclude: Option<u32>,
        stop_below: Option<f32>,
    ) -> (f32, Option<u32>) {
        let mut best = f32::INFINITY;
        let mut best_idx = None;
        let stop = stop_below.unwrap_or(f32::NEG_INFINITY);
        // Each level pushes at most eight entries.
        let mut stack = [(0.0f32, 0u32); 8 * (MAX_DEPTH as usize + 1)];
        let mut len = 1;
        while len > 0 {
            len -= 1;
            let (lower, n) = stack[len];
            if lower > best * PRUNE_SLACK {
                continue;
            }
            let node = &self.nodes[n as usize];
            let bd = node.box_dist2(q);
            if bd > best * PRUNE_SLACK {
                continue;
            }
            if node.is_leaf() {
                for (&i, &p) in node.items.iter().zip(&node.item_pos) {
                    if Some(i) == exclude {
                        continue;
                    }
                    let d = dist2(q, p);
                    if d < best || (d == best && best_idx.is_some_and(|b| i < b)) {
                        best = d;
                        best_idx = Some(i);
                    }
                }
                if best < stop {
                    return (best, best_idx);
                }
                continue;
            }
            // Children inherit the parent's box distance as a lower bound and
            // compute their own when popped. The child containing `q` is
            // pushed last so the descent reaches its leaf first.
            let own = octant(node.center, q) as u32;
            let others = node.occupied & !(1u8 << own);
            for slot in 0..8u32 {
                if others & (1 << slot) != 0 {
                    stack[len] = (bd, node.first_child + slot);
                    len += 1;
                }
            }
            if node.occupied & (1 << own) != 0 {
                stack[len] = (bd, node.first_child + own);
                len += 1;
            }
        }
        (best, best_idx)
    }
}

#[inline]
fn octant(center: Vec3, p: Vec3) -> usize {
    (p.x >= center.x) as usize
        | ((p.y >= center.y) as usize) << 1
        | ((p.z >= center.z) as usize) << 2
}
