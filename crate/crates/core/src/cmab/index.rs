//! Exact nearest-context search.
//!
//! Contexts live on the integer bin lattice, so squared distances between bin
//! centres are `width² · Σ (Δbin)²` and can be compared exactly in integer
//! arithmetic. One k-d tree is kept per serving station; ties between equally
//! distant contexts resolve to the lowest `(serving_bs, bins)` key, which is
//! the rank order of the table.

use super::{QTable, QuantizedContext};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: i32, left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct KdTree {
    dims: usize,
    /// Points in tree order, row-major.
    coords: Vec<i32>,
    /// Table rank of each point in tree order.
    ranks: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    fn build(dims: usize, points: Vec<(usize, &[i32])>) -> Self {
        let mut items: Vec<(usize, &[i32])> = points;
        let mut nodes = Vec::new();
        if !items.is_empty() {
            let n = items.len();
            build_node(&mut items, 0, n, &mut nodes);
        }
        let mut coords = Vec::with_capacity(items.len() * dims);
        let mut ranks = Vec::with_capacity(items.len());
        for (rank, p) in &items {
            coords.extend_from_slice(p);
            ranks.push(*rank);
        }
        Self {
            dims,
            coords,
            ranks,
            nodes,
        }
    }

    fn point(&self, i: usize) -> &[i32] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    /// Best `(dist², rank)` in this tree that beats `best`.
    fn search(&self, probe: &[i32], best: &mut Option<(u64, usize)>) {
        if !self.nodes.is_empty() {
            self.visit(0, probe, best);
        }
    }

    fn visit(&self, node: usize, probe: &[i32], best: &mut Option<(u64, usize)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for i in start..end {
                    let bound = best.map_or(u64::MAX, |b| b.0);
                    if let Some(d) = bounded_distance(probe, self.point(i), bound) {
                        let cand = (d, self.ranks[i]);
                        if best.is_none_or(|b| cand < b) {
                            *best = Some(cand);
                        }
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = i64::from(probe[axis]) - i64::from(value);
                let (near, far) = if diff < 0 { (left, right) } else { (right, left) };
                self.visit(near, probe, best);
                // points on the far side are at least |diff| away on this axis;
                // equality is kept so equally distant lower ranks are still found
                let gap = (diff * diff) as u64;
                if best.is_none_or(|b| gap <= b.0) {
                    self.visit(far, probe, best);
                }
            }
        }
    }
}

fn build_node(items: &mut [(usize, &[i32])], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let slice = &mut items[start..end];
    let dims = slice[0].1.len();
    let axis = (0..dims)
        .max_by_key(|&a| {
            let (lo, hi) = slice
                .iter()
                .fold((i32::MAX, i32::MIN), |(lo, hi), p| (lo.min(p.1[a]), hi.max(p.1[a])));
            (i64::from(hi) - i64::from(lo), std::cmp::Reverse(a))
        })
        .unwrap_or(0);
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by_key(mid, |p| p.1[axis]);
    let value = slice[mid].1[axis];
    nodes.push(Node::Leaf { start, end }); // placeholder
    let left = build_node(items, start, start + mid, nodes);
    let right = build_node(items, start + mid, end, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}

/// Squared lattice distance, or `None` once it exceeds `bound`.
#[inline]
fn bounded_distance(a: &[i32], b: &[i32], bound: u64) -> Option<u64> {
    let mut acc: u64 = 0;
    for (x, y) in a.iter().zip(b) {
        let d = i64::from(*x) - i64::from(*y);
        acc += (d * d) as u64;
        if acc > bound {
            return None;
        }
    }
    Some(acc)
}

/// Nearest-context index over a frozen [`QTable`].
#[derive(Debug, Clone)]
pub struct ContextIndex {
    keys: Vec<QuantizedContext>,
    by_serving: Vec<KdTree>,
}

impl ContextIndex {
    pub fn build(table: &QTable) -> Self {
        let dims = table.num_actions();
        let keys: Vec<QuantizedContext> = table.iter().map(|(k, _)| k.clone()).collect();
        let mut groups: Vec<Vec<(usize, &[i32])>> = vec![Vec::new(); dims];
        for (rank, k) in keys.iter().enumerate() {
            groups[k.serving_bs].push((rank, &k.bins));
        }
        let by_serving = groups.into_iter().map(|g| KdTree::build(dims, g)).collect();
        Self { keys, by_serving }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Closest stored context to `probe` and its squared lattice distance.
    ///
    /// Contexts sharing the probe's serving station are searched first; only
    /// when there are none is the whole table searched.
    pub fn nearest(&self, probe: &QuantizedContext) -> Option<(&QuantizedContext, u64)> {
        let mut best = None;
        match self.by_serving.get(probe.serving_bs) {
            Some(tree) if !tree.ranks.is_empty() => tree.search(&probe.bins, &mut best),
            _ => {
                for tree in &self.by_serving {
                    tree.search(&probe.bins, &mut best);
                }
            }
        }
        best.map(|(d, rank)| (&self.keys[rank], d))
    }
}
