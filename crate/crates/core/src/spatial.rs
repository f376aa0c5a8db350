//! Hierarchical axis-aligned box tree shared by ball queries and the treecode.
//!
//! Each internal node splits its cube into up to `2^d` orthants. Partitioning
//! is stable, so indices inside every leaf stay in ascending order and a
//! single-leaf tree visits points in their original order.

/// Euclidean distance. Every distance comparison in the crate goes through
/// this function so that ball membership is decided identically everywhere.
#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s.sqrt()
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    /// Range into [`BoxTree::order`].
    pub start: usize,
    pub end: usize,
    pub weight: f64,
    /// Weighted centroid.
    pub centroid: Vec<f64>,
    /// Tight bounding box of the node's points.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Half-width of the (cubic) splitting box.
    pub half_width: f64,
    /// max |y - centroid| over the node's points.
    pub radius: f64,
    pub children: Vec<usize>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    /// Distance from `c` to the nearest point of the bounding box.
    pub fn min_dist(&self, c: &[f64]) -> f64 {
        let mut s = 0.0;
        for ((&x, &lo), &hi) in c.iter().zip(&self.lo).zip(&self.hi) {
            let t = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            s += t * t;
        }
        s.sqrt()
    }

    /// Distance from `c` to the farthest corner of the bounding box.
    pub fn max_dist(&self, c: &[f64]) -> f64 {
        let mut s = 0.0;
        for ((&x, &lo), &hi) in c.iter().zip(&self.lo).zip(&self.hi) {
            let t = (x - lo).abs().max((x - hi).abs());
            s += t * t;
        }
        s.sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct BoxTree {
    pub dim: usize,
    pub leaf_cap: usize,
    pub nodes: Vec<TreeNode>,
    /// Permutation of point indices; node ranges index into it.
    pub order: Vec<usize>,
}

impl BoxTree {
    /// Build over `coords` (row-major, `dim` per point). `leaf_cap` is clamped to 1.
    pub fn build(coords: &[f64], weights: &[f64], dim: usize, leaf_cap: usize) -> Self {
        let n = weights.len();
        assert_eq!(coords.len(), n * dim, "coords/weights length mismatch");
        assert!(n > 0, "empty point set");
        let leaf_cap = leaf_cap.max(1);
        let mut tree = BoxTree {
            dim,
            leaf_cap,
            nodes: Vec::new(),
            order: (0..n).collect(),
        };
        let root = tree.make_node(coords, weights, 0, n, None);
        tree.nodes.push(root);
        let mut stack = vec![0usize];
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); 1 << dim];
        while let Some(id) = stack.pop() {
            let (start, end) = (tree.nodes[id].start, tree.nodes[id].end);
            let extent = tree.nodes[id]
                .lo
                .iter()
                .zip(&tree.nodes[id].hi)
                .fold(0.0f64, |m, (l, h)| m.max(h - l));
            if end - start <= leaf_cap || extent == 0.0 {
                continue;
            }
            let center: Vec<f64> = tree.nodes[id]
                .lo
                .iter()
                .zip(&tree.nodes[id].hi)
                .map(|(l, h)| 0.5 * (l + h))
                .collect();
            let half = 0.5 * extent;
            for b in buckets.iter_mut() {
                b.clear();
            }
            for &idx in &tree.order[start..end] {
                let p = &coords[idx * dim..(idx + 1) * dim];
                let mut code = 0usize;
                for a in 0..dim {
                    if p[a] >= center[a] {
                        code |= 1 << a;
                    }
                }
                buckets[code].push(idx);
            }
            let mut cursor = start;
            let mut children = Vec::new();
            for b in buckets.iter() {
                if b.is_empty() {
                    continue;
                }
                tree.order[cursor..cursor + b.len()].copy_from_slice(b);
                let child = tree.make_node(coords, weights, cursor, cursor + b.len(), Some(half * 0.5));
                cursor += b.len();
                children.push(tree.nodes.len());
                tree.nodes.push(child);
            }
            tree.nodes[id].half_width = half;
            // Children are pushed in reverse so traversal order stays by orthant code.
            for &c in children.iter().rev() {
                stack.push(c);
            }
            tree.nodes[id].children = children;
        }
        tree
    }

    fn make_node(
        &self,
        coords: &[f64],
        weights: &[f64],
        start: usize,
        end: usize,
        half_width: Option<f64>,
    ) -> TreeNode {
        let dim = self.dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        let mut weight = 0.0;
        let mut moment = vec![0.0; dim];
        for &idx in &self.order[start..end] {
            let p = &coords[idx * dim..(idx + 1) * dim];
            let w = weights[idx];
            weight += w;
            for a in 0..dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
                moment[a] += w * p[a];
            }
        }
        let centroid: Vec<f64> = moment
            .iter()
            .enumerate()
            .map(|(a, m)| (m / weight).clamp(lo[a], hi[a]))
            .collect();
        let radius = self.order[start..end]
            .iter()
            .map(|&idx| dist(&coords[idx * dim..(idx + 1) * dim], &centroid))
            .fold(0.0, f64::max);
        let half_width = half_width.unwrap_or_else(|| {
            0.5 * lo.iter().zip(&hi).fold(0.0f64, |m, (l, h)| m.max(h - l))
        });
        TreeNode {
            start,
            end,
            weight,
            centroid,
            lo,
            hi,
            half_width,
            radius,
            children: Vec::new(),
        }
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    /// Indices of a node's points (ascending inside leaves).
    pub fn indices(&self, node: &TreeNode) -> &[usize] {
        &self.order[node.start..node.end]
    }
}
