//! Hierarchical far-field summation for `R_{μ,ε} f`.
//!
//! A node whose radius about its centroid is below `θ · dist(target, centroid)`
//! and which lies strictly outside the ε-ball is replaced by a Taylor expansion
//! of the kernel about the centroid. Nodes entirely inside the ε-ball are
//! skipped (truncated) or summed exactly from their first moments
//! (regularized, where the kernel is linear there). Nodes straddling the
//! ε-sphere are opened, and leaves are always summed directly.

mod expansion;

pub use expansion::MultiIndexSet;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::measure::DiscreteMeasure;
use crate::riesz::{check_density, check_targets, direct_sum, pow_n1, KernelConfig, KernelMode, VectorField};
use crate::spatial::{dist, BoxTree, TreeNode};
use crate::{Error, Result};

const EDGE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreecodeParams {
    pub theta: f64,
    pub leaf_cap: usize,
    /// Taylor order; 0 is the monopole at the weighted centroid.
    pub order: usize,
}

impl Default for TreecodeParams {
    fn default() -> Self {
        TreecodeParams {
            theta: 0.3,
            leaf_cap: 32,
            order: 0,
        }
    }
}

impl TreecodeParams {
    pub fn new(theta: f64, leaf_cap: usize, order: usize) -> Result<Self> {
        let p = TreecodeParams {
            theta,
            leaf_cap,
            order,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Precondition(format!("theta {} outside (0, 1)", self.theta)));
        }
        if self.leaf_cap == 0 {
            return Err(Error::Precondition("leaf cap must be >= 1".into()));
        }
        if self.order > 24 {
            return Err(Error::Precondition("expansion order above 24".into()));
        }
        Ok(())
    }
}

/// Box tree over a measure's support with its points copied in leaf order.
#[derive(Clone, Debug)]
pub struct SpatialTree {
    tree: BoxTree,
    sorted_coords: Vec<f64>,
}

impl SpatialTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.tree.nodes
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.tree.leaves()
    }

    pub fn indices(&self, node: &TreeNode) -> &[usize] {
        self.tree.indices(node)
    }

    pub fn leaf_cap(&self) -> usize {
        self.tree.leaf_cap
    }

    pub fn len(&self) -> usize {
        self.tree.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.order.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.tree.dim
    }

    /// Max relative mismatch between a node's weight and the sum of its children's.
    pub fn weight_consistency(&self) -> f64 {
        self.tree
            .nodes
            .iter()
            .filter(|n| !n.is_leaf())
            .map(|n| {
                let s: f64 = n.children.iter().map(|&c| self.tree.nodes[c].weight).sum();
                (s - n.weight).abs() / n.weight
            })
            .fold(0.0, f64::max)
    }
}

pub fn build_tree(mu: &DiscreteMeasure, params: &TreecodeParams) -> SpatialTree {
    let tree = BoxTree::build(mu.coords(), mu.weights(), mu.ambient_dim(), params.leaf_cap);
    let d = mu.ambient_dim();
    let mut sorted_coords = Vec::with_capacity(mu.coords().len());
    for &i in &tree.order {
        sorted_coords.extend_from_slice(&mu.coords()[i * d..(i + 1) * d]);
    }
    SpatialTree {
        tree,
        sorted_coords,
    }
}

pub fn treecode_apply(
    mu: &DiscreteMeasure,
    f: &[f64],
    cfg: &KernelConfig,
    tree: &SpatialTree,
    params: &TreecodeParams,
    targets: &[f64],
) -> Result<VectorField> {
    treecode_apply_with(Exec::default(), mu, f, cfg, tree, params, targets)
}

pub fn treecode_apply_with(
    exec: Exec,
    mu: &DiscreteMeasure,
    f: &[f64],
    cfg: &KernelConfig,
    tree: &SpatialTree,
    params: &TreecodeParams,
    targets: &[f64],
) -> Result<VectorField> {
    cfg.validate()?;
    params.validate()?;
    check_density(mu, f)?;
    check_targets(mu, targets)?;
    if tree.len() != mu.len() || tree.dim() != mu.ambient_dim() {
        return Err(Error::Precondition("tree was built over a different measure".into()));
    }
    let q: Vec<f64> = f.iter().zip(mu.weights()).map(|(a, b)| a * b).collect();
    Ok(apply_charges_tree(exec, tree, &q, cfg, params, targets))
}

/// Per-node moments `M_k = Σ q_j (c − y_j)^k` for `|k| ≤ max(order, 1)`.
struct Moments {
    set: MultiIndexSet,
    stride: usize,
    data: Vec<f64>,
}

fn compute_moments(exec: Exec, tree: &SpatialTree, q: &[f64], order: usize) -> Moments {
    let d = tree.dim();
    let set = MultiIndexSet::new(d, order.max(1));
    let stride = set.len();
    let per_node = exec.map(tree.nodes().len(), |id| {
        let node = &tree.nodes()[id];
        let mut m = vec![0.0; stride];
        let mut pows = vec![0.0; d * (set.order + 1)];
        let mut h = vec![0.0; d];
        for pos in node.start..node.end {
            let y = &tree.sorted_coords[pos * d..(pos + 1) * d];
            for a in 0..d {
                h[a] = node.centroid[a] - y[a];
            }
            set.add_monomials(&h, q[tree.tree.order[pos]], &mut pows, &mut m);
        }
        m
    });
    Moments {
        set,
        stride,
        data: per_node.into_iter().flatten().collect(),
    }
}

pub(crate) fn apply_charges_tree(
    exec: Exec,
    tree: &SpatialTree,
    q: &[f64],
    cfg: &KernelConfig,
    params: &TreecodeParams,
    targets: &[f64],
) -> VectorField {
    let d = tree.dim();
    let moments = compute_moments(exec, tree, q, params.order);
    let eval_set = MultiIndexSet::new(d, params.order);
    let sorted_q: Vec<f64> = tree.tree.order.iter().map(|&i| q[i]).collect();
    let units: Vec<usize> = (0..d).map(|a| moments.set.unit(a)).collect();
    let eps = cfg.epsilon;
    let inv_eps = 1.0 / pow_n1(eps, eps * eps, cfg.n);
    let two_nu = (cfg.n + 1) as f64;
    let mut values = vec![0.0; targets.len()];
    exec.fill_chunks(&mut values, d, |ti, out| {
        let t = &targets[ti * d..(ti + 1) * d];
        let mut b = vec![0.0; eval_set.len()];
        let mut x = vec![0.0; d];
        let mut leaf = vec![0.0; d];
        let mut stack = vec![0usize];
        out.iter_mut().for_each(|v| *v = 0.0);
        while let Some(id) = stack.pop() {
            let node = &tree.nodes()[id];
            let dc = dist(t, &node.centroid);
            let r = node.radius;
            let m = &moments.data[id * moments.stride..(id + 1) * moments.stride];
            if !node.is_leaf() {
                if dc + r <= eps * (1.0 - EDGE) {
                    if cfg.mode == KernelMode::Regularized {
                        for a in 0..d {
                            let xa = t[a] - node.centroid[a];
                            out[a] += (xa * m[0] + m[units[a]]) * inv_eps;
                        }
                    }
                    continue;
                }
                if dc - r > eps * (1.0 + EDGE) && r < params.theta * dc {
                    let mut r2 = 0.0;
                    for a in 0..d {
                        x[a] = t[a] - node.centroid[a];
                        r2 += x[a] * x[a];
                    }
                    let b0 = 1.0 / pow_n1(r2.sqrt(), r2, cfg.n);
                    eval_set.scalar_coefficients(&x, r2, b0, two_nu, &mut b);
                    eval_set.contract(&x, &b, &m[..eval_set.len()], out);
                    continue;
                }
                stack.extend(node.children.iter().rev());
                continue;
            }
            direct_sum(
                t,
                &tree.sorted_coords[node.start * d..node.end * d],
                &sorted_q[node.start..node.end],
                cfg,
                &mut leaf,
            );
            for a in 0..d {
                out[a] += leaf[a];
            }
        }
    });
    VectorField::new(d, values).expect("finite inputs give finite sums")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_four_corners, gen_segment};
    use crate::riesz::riesz_apply;

    fn rel_err(a: &VectorField, b: &VectorField) -> f64 {
        a.rows()
            .zip(b.rows())
            .map(|(x, y)| dist(x, y) / y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300))
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_leaf_is_direct() {
        let fc = gen_four_corners(3).unwrap();
        let params = TreecodeParams::new(0.5, 1000, 0).unwrap();
        let tree = build_tree(&fc, &params);
        assert_eq!(tree.nodes().len(), 1);
        let f: Vec<f64> = (0..fc.len()).map(|i| 1.0 + (i % 5) as f64).collect();
        for mode in [KernelMode::Truncated, KernelMode::Regularized] {
            let cfg = KernelConfig::new(1, 0.05, mode).unwrap();
            let a = treecode_apply(&fc, &f, &cfg, &tree, &params, fc.coords()).unwrap();
            let b = riesz_apply(&fc, &f, &cfg, fc.coords()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn one_point_is_single_leaf() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.1, 0.2], vec![1.0], 1.0).unwrap();
        let tree = build_tree(&mu, &TreecodeParams::default());
        assert_eq!(tree.nodes().len(), 1);
        assert!(tree.nodes()[0].is_leaf());
    }

    #[test]
    fn four_corners_tree_structure() {
        let fc = gen_four_corners(6).unwrap();
        let params = TreecodeParams::new(0.3, 16, 0).unwrap();
        let tree = build_tree(&fc, &params);
        assert!(tree.leaves().all(|l| l.len() <= 16));
        assert!(tree.weight_consistency() <= 1e-12);
        let covered: usize = tree.leaves().map(|l| l.len()).sum();
        assert_eq!(covered, fc.len());
    }

    #[test]
    fn tiny_theta_matches_direct() {
        let seg = gen_segment(2000, 2).unwrap();
        let params = TreecodeParams::new(1e-9, 8, 0).unwrap();
        let tree = build_tree(&seg, &params);
        let f = vec![1.0; seg.len()];
        let cfg = KernelConfig::truncated(1, 4.0 * seg.resolution()).unwrap();
        let a = treecode_apply(&seg, &f, &cfg, &tree, &params, seg.coords()).unwrap();
        let b = riesz_apply(&seg, &f, &cfg, seg.coords()).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-12 * b.max_norm());
    }

    #[test]
    fn error_decreases_with_order() {
        let fc = gen_four_corners(5).unwrap();
        let f: Vec<f64> = (0..fc.len()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let cfg = KernelConfig::regularized(1, 0.002).unwrap();
        let targets: Vec<f64> = (0..50)
            .flat_map(|i| [0.02 * i as f64, 1.0 - 0.013 * i as f64])
            .collect();
        let direct = riesz_apply(&fc, &f, &cfg, &targets).unwrap();
        let mut prev = f64::INFINITY;
        for order in [0, 2, 4, 8] {
            let params = TreecodeParams::new(0.4, 8, order).unwrap();
            let tree = build_tree(&fc, &params);
            let tc = treecode_apply(&fc, &f, &cfg, &tree, &params, &targets).unwrap();
            let e = tc.max_abs_diff(&direct) / direct.max_norm();
            assert!(e < prev, "order {order}: {e}");
            prev = e;
        }
        assert!(prev < 0.4f64.powi(9), "{prev}");
    }

    #[test]
    fn regularized_inner_nodes_exact() {
        // With θ tiny only the inside-ε shortcut is taken; it is exact up to rounding.
        let fc = gen_four_corners(4).unwrap();
        let f: Vec<f64> = (0..fc.len()).map(|i| 1.0 + (i % 3) as f64).collect();
        let cfg = KernelConfig::regularized(1, 0.3).unwrap();
        let params = TreecodeParams::new(1e-9, 4, 0).unwrap();
        let tree = build_tree(&fc, &params);
        let a = treecode_apply(&fc, &f, &cfg, &tree, &params, fc.coords()).unwrap();
        let b = riesz_apply(&fc, &f, &cfg, fc.coords()).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-12 * b.max_norm());
        assert!(rel_err(&a, &b) < 1e-9);
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let fc = gen_four_corners(5).unwrap();
        let f: Vec<f64> = (0..fc.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let cfg = KernelConfig::truncated(1, 0.004).unwrap();
        let params = TreecodeParams::new(0.3, 16, 3).unwrap();
        let tree = build_tree(&fc, &params);
        let a = treecode_apply_with(Exec::Sequential, &fc, &f, &cfg, &tree, &params, fc.coords()).unwrap();
        let b = treecode_apply_with(Exec::Parallel, &fc, &f, &cfg, &tree, &params, fc.coords()).unwrap();
        let c = treecode_apply_with(Exec::Parallel, &fc, &f, &cfg, &tree, &params, fc.coords()).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }
}
