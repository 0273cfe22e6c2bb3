//! Loose octree over bounded items.
//!
//! Cells are cubes; a cell's loose bounds are its cube scaled by the
//! looseness factor around the same center. An item is stored in the deepest
//! cell whose loose bounds contain it, so every item lives in exactly one cell.

use glam::Vec3;

use crate::geom::Aabb;

pub const DEFAULT_LOOSENESS: f32 = 2.0;
pub const DEFAULT_MAX_ITEMS: usize = 8;
const MAX_DEPTH: u32 = 16;

#[derive(Debug, Clone)]
pub struct OctreeCell<T> {
    center: Vec3,
    half: f32,
    depth: u32,
    items: Vec<(T, Aabb)>,
    children: Option<Box<[OctreeCell<T>; 8]>>,
}

impl<T> OctreeCell<T> {
    fn new(center: Vec3, half: f32, depth: u32) -> Self {
        Self {
            center,
            half,
            depth,
            items: Vec::new(),
            children: None,
        }
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The cell's cube without loosening.
    pub fn tight_bounds(&self) -> Aabb {
        Aabb::from_center_half_extent(self.center, Vec3::splat(self.half))
    }

    pub fn loose_bounds(&self, looseness: f32) -> Aabb {
        Aabb::from_center_half_extent(self.center, Vec3::splat(self.half * looseness))
    }

    pub fn items(&self) -> &[(T, Aabb)] {
        &self.items
    }

    pub fn children(&self) -> impl Iterator<Item = &OctreeCell<T>> {
        self.children.iter().flat_map(|c| c.iter())
    }

    fn is_empty_subtree(&self) -> bool {
        self.items.is_empty() && self.children().all(|c| c.is_empty_subtree())
    }
}

#[derive(Debug, Clone)]
pub struct LooseOctree<T> {
    root: OctreeCell<T>,
    looseness: f32,
    max_items: usize,
    len: usize,
}

impl<T: Copy> LooseOctree<T> {
    /// Octree whose root cube is the bounding cube of `bounds`.
    pub fn new(bounds: Aabb, looseness: f32, max_items: usize) -> Self {
        assert!(looseness >= 1.0, "looseness must be >= 1");
        assert!(max_items >= 1);
        let (center, half) = if bounds.is_empty() {
            (Vec3::ZERO, 1.0)
        } else {
            (
                bounds.center(),
                bounds.half_extent().max_element().max(1e-6),
            )
        };
        Self {
            root: OctreeCell::new(center, half, 0),
            looseness,
            max_items,
            len: 0,
        }
    }

    /// Builds an octree sized to the union of the item bounds.
    pub fn from_items(
        items: impl IntoIterator<Item = (T, Aabb)>,
        looseness: f32,
        max_items: usize,
    ) -> Self {
        let items: Vec<_> = items.into_iter().collect();
        let bounds = items.iter().fold(Aabb::EMPTY, |b, (_, ib)| b.union(*ib));
        let mut tree = Self::new(bounds, looseness, max_items);
        for (item, b) in items {
            let inserted = tree.insert(item, b);
            debug_assert!(inserted);
        }
        tree
    }

    pub fn looseness(&self) -> f32 {
        self.looseness
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn root(&self) -> &OctreeCell<T> {
        &self.root
    }

    /// Inserts an item. Returns `false` (and does not insert) when the item
    /// does not fit inside the root's loose bounds.
    pub fn insert(&mut self, item: T, bounds: Aabb) -> bool {
        if !self.root.loose_bounds(self.looseness).contains(&bounds) {
            return false;
        }
        let (k, m) = (self.looseness, self.max_items);
        insert_into(&mut self.root, item, bounds, k, m);
        self.len += 1;
        true
    }

    /// All items whose bounds intersect `query`.
    pub fn query(&self, query: &Aabb) -> Vec<T> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(cell) = stack.pop() {
            if !cell.loose_bounds(self.looseness).intersects(query) {
                continue;
            }
            out.extend(
                cell.items
                    .iter()
                    .filter(|(_, b)| b.intersects(query))
                    .map(|(t, _)| *t),
            );
            stack.extend(cell.children());
        }
        out
    }

    /// Visits every non-empty cell together with its items.
    pub fn for_each_cell(&self, mut f: impl FnMut(&OctreeCell<T>)) {
        let mut stack = vec![&self.root];
        while let Some(cell) = stack.pop() {
            if cell.is_empty_subtree() {
                continue;
            }
            f(cell);
            stack.extend(cell.children());
        }
    }
}

fn child_slot(center: Vec3, p: Vec3) -> usize {
    (p.x >= center.x) as usize
        | ((p.y >= center.y) as usize) << 1
        | ((p.z >= center.z) as usize) << 2
}

fn child_center(center: Vec3, half: f32, slot: usize) -> Vec3 {
    let q = half * 0.5;
    let s = |bit: usize| if slot & bit != 0 { q } else { -q };
    center + Vec3::new(s(1), s(2), s(4))
}

fn fitting_child<T>(cell: &OctreeCell<T>, b: &Aabb, looseness: f32) -> Option<usize> {
    let slot = child_slot(cell.center, b.center());
    let c = child_center(cell.center, cell.half, slot);
    let loose = Aabb::from_center_half_extent(c, Vec3::splat(cell.half * 0.5 * looseness));
    loose.contains(b).then_some(slot)
}

fn insert_into<T: Copy>(
    cell: &mut OctreeCell<T>,
    item: T,
    b: Aabb,
    looseness: f32,
    max_items: usize,
) {
    if cell.children.is_some() {
        match (fitting_child(cell, &b, looseness), cell.children.as_mut()) {
            (Some(slot), Some(children)) => {
                insert_into(&mut children[slot], item, b, looseness, max_items)
            }
            _ => cell.items.push((item, b)),
        }
        return;
    }
    cell.items.push((item, b));
    if cell.items.len() > max_items && cell.depth < MAX_DEPTH {
        let (center, half, depth) = (cell.center, cell.half, cell.depth);
        cell.children = Some(Box::new(std::array::from_fn(|slot| {
            OctreeCell::new(child_center(center, half, slot), half * 0.5, depth + 1)
        })));
        let items = std::mem::take(&mut cell.items);
        for (it, ib) in items {
            match fitting_child(cell, &ib, looseness) {
                Some(slot) => {
                    let child = &mut cell.children.as_mut().unwrap()[slot];
                    insert_into(child, it, ib, looseness, max_items);
                }
                None => cell.items.push((it, ib)),
            }
        }
    }
}
