//! Depth-limited regression trees fit by greedy variance reduction.

use serde::{Deserialize, Serialize};

/// Tree node in a flat arena; child fields index into the arena.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        /// Documents with `x[feature] <= threshold` go left.
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

/// Binary regression tree stored as a pre-order arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    /// Single-leaf tree.
    pub fn leaf(value: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    /// Joins two subtrees under a new split root.
    pub fn split(
        feature: usize,
        threshold: f64,
        left: RegressionTree,
        right: RegressionTree,
    ) -> Self {
        let mut nodes = Vec::with_capacity(1 + left.nodes.len() + right.nodes.len());
        nodes.push(Node::Leaf { value: 0.0 });
        let li = append(&mut nodes, &left.nodes, 0);
        let ri = append(&mut nodes, &right.nodes, 0);
        nodes[0] = Node::Split {
            feature,
            threshold,
            left: li,
            right: ri,
        };
        RegressionTree { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Length of the longest root-to-leaf path, in split edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: u32) -> usize {
            match nodes[at as usize] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Routes a feature vector to its leaf value. Feature indices must be
    /// in range; the owning model checks dimensionality once per vector.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut at = 0u32;
        loop {
            match self.nodes[at as usize] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Fits a tree to `(rows, targets)` by recursive greedy splitting.
    ///
    /// A node splits only if some `(feature, threshold)` strictly reduces
    /// the summed squared error (beyond a relative epsilon absorbing
    /// floating-point noise) while leaving at least `min_samples_leaf`
    /// rows on each side. Split ties resolve to the lowest feature index,
    /// then the lowest threshold. Leaves predict the mean target.
    pub(crate) fn fit(
        rows: &[&[f64]],
        targets: &[f64],
        max_depth: usize,
        min_samples_leaf: usize,
    ) -> Self {
        debug_assert_eq!(rows.len(), targets.len());
        debug_assert!(!rows.is_empty());
        let mut nodes = Vec::new();
        let items: Vec<u32> = (0..rows.len() as u32).collect();
        build(
            &mut nodes,
            rows,
            targets,
            items,
            0,
            max_depth,
            min_samples_leaf,
        );
        RegressionTree { nodes }
    }
}

fn append(dst: &mut Vec<Node>, src: &[Node], at: u32) -> u32 {
    match src[at as usize] {
        Node::Leaf { value } => {
            dst.push(Node::Leaf { value });
            (dst.len() - 1) as u32
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let slot = dst.len();
            dst.push(Node::Leaf { value: 0.0 });
            let li = append(dst, src, left);
            let ri = append(dst, src, right);
            dst[slot] = Node::Split {
                feature,
                threshold,
                left: li,
                right: ri,
            };
            slot as u32
        }
    }
}

fn build(
    nodes: &mut Vec<Node>,
    rows: &[&[f64]],
    targets: &[f64],
    items: Vec<u32>,
    depth: usize,
    max_depth: usize,
    min_samples_leaf: usize,
) -> u32 {
    let mean = items.iter().map(|&i| targets[i as usize]).sum::<f64>() / items.len() as f64;
    let splittable = depth < max_depth && items.len() >= 2 * min_samples_leaf;
    let choice = if splittable {
        best_split(rows, targets, &items, mean, min_samples_leaf)
    } else {
        None
    };
    match choice {
        None => {
            nodes.push(Node::Leaf { value: mean });
            (nodes.len() - 1) as u32
        }
        Some((feature, threshold)) => {
            let slot = nodes.len();
            nodes.push(Node::Leaf { value: mean });
            let (left_items, right_items): (Vec<u32>, Vec<u32>) = items
                .into_iter()
                .partition(|&i| rows[i as usize][feature] <= threshold);
            let li = build(
                nodes,
                rows,
                targets,
                left_items,
                depth + 1,
                max_depth,
                min_samples_leaf,
            );
            let ri = build(
                nodes,
                rows,
                targets,
                right_items,
                depth + 1,
                max_depth,
                min_samples_leaf,
            );
            nodes[slot] = Node::Split {
                feature,
                threshold,
                left: li,
                right: ri,
            };
            slot as u32
        }
    }
}

/// Scans all features for the (feature, threshold) with the largest SSE
/// reduction. Targets are centered on the node mean before the prefix-sum
/// scan, which keeps the quadratic terms small and the gains stable.
fn best_split(
    rows: &[&[f64]],
    targets: &[f64],
    items: &[u32],
    node_mean: f64,
    min_samples_leaf: usize,
) -> Option<(usize, f64)> {
    let n = items.len();
    let dim = rows[items[0] as usize].len();
    let mut order: Vec<u32> = items.to_vec();
    let mut best: Option<(f64, usize, f64)> = None;

    // Total centered moments; t1 ~ 0 by construction but kept exact.
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for &i in items {
        let y = targets[i as usize] - node_mean;
        t1 += y;
        t2 += y * y;
    }
    if t2 <= 0.0 {
        return None;
    }
    let sse_parent = t2 - t1 * t1 / n as f64;
    let noise_floor = t2 * 1e-12;

    #[allow(clippy::needless_range_loop)] // `feature` indexes columns, not `rows` itself
    for feature in 0..dim {
        order.copy_from_slice(items);
        order.sort_unstable_by(|&a, &b| {
            rows[a as usize][feature].total_cmp(&rows[b as usize][feature])
        });
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for pos in 1..n {
            let y = targets[order[pos - 1] as usize] - node_mean;
            s1 += y;
            s2 += y * y;
            if pos < min_samples_leaf || n - pos < min_samples_leaf {
                continue;
            }
            let a = rows[order[pos - 1] as usize][feature];
            let b = rows[order[pos] as usize][feature];
            if a == b {
                continue;
            }
            let left = s2 - s1 * s1 / pos as f64;
            let r1 = t1 - s1;
            let r2 = t2 - s2;
            let right = r2 - r1 * r1 / (n - pos) as f64;
            let gain = sse_parent - left - right;
            if gain <= noise_floor {
                continue;
            }
            if best.is_none_or(|(g, _, _)| gain > g) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    // Midpoint rounded up between adjacent floats; fall
                    // back to the left value so routing matches the scan.
                    threshold = a;
                }
                best = Some((gain, feature, threshold));
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit_owned(rows: &[Vec<f64>], targets: &[f64], depth: usize, msl: usize) -> RegressionTree {
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        RegressionTree::fit(&refs, targets, depth, msl)
    }

    #[test]
    fn constant_targets_fit_single_leaf() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let tree = fit_owned(&rows, &[2.5; 4], 3, 1);
        assert_eq!(tree.nodes().len(), 1);
        assert_eq!(tree.eval(&[99.0]), 2.5);
    }

    #[test]
    fn two_point_split_separates_targets() {
        let rows = vec![vec![0.0], vec![1.0]];
        let tree = fit_owned(&rows, &[0.0, 1.0], 1, 1);
        assert_eq!(tree.depth(), 1);
        assert_eq!(tree.eval(&[0.0]), 0.0);
        assert_eq!(tree.eval(&[1.0]), 1.0);
        match tree.nodes()[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert!((threshold - 0.5).abs() < 1e-15);
            }
            _ => panic!("expected a split at the root"),
        }
    }

    #[test]
    fn min_samples_leaf_forces_balanced_split() {
        // Unconstrained, the best cut isolates the first row (gain from
        // separating 0 from the tens); msl 2 forbids a 1/3 split.
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let targets = [0.0, 10.0, 10.0, 10.0];
        let tree = fit_owned(&rows, &targets, 1, 2);
        match tree.nodes()[0] {
            Node::Split { threshold, .. } => assert!((threshold - 1.5).abs() < 1e-15),
            _ => panic!("expected a split at the root"),
        }
        assert_eq!(tree.eval(&[0.5]), 5.0);
        assert_eq!(tree.eval(&[2.5]), 10.0);
    }

    #[test]
    fn split_ties_prefer_lowest_feature() {
        // Both features separate the targets identically.
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let tree = fit_owned(&rows, &[0.0, 1.0], 1, 1);
        match tree.nodes()[0] {
            Node::Split { feature, .. } => assert_eq!(feature, 0),
            _ => panic!("expected a split at the root"),
        }
    }

    #[test]
    fn depth_limit_is_respected() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![f64::from(i)]).collect();
        let targets: Vec<f64> = (0..8).map(f64::from).collect();
        for max_depth in 1..=3 {
            let tree = fit_owned(&rows, &targets, max_depth, 1);
            assert!(tree.depth() <= max_depth);
        }
        let deep = fit_owned(&rows, &targets, 10, 1);
        assert_eq!(deep.num_leaves(), 8);
    }

    #[test]
    fn boundary_values_route_left() {
        let tree =
            RegressionTree::split(0, 0.5, RegressionTree::leaf(1.0), RegressionTree::leaf(2.0));
        assert_eq!(tree.eval(&[0.5]), 1.0);
        assert_eq!(tree.eval(&[0.5000001]), 2.0);
    }

    #[test]
    fn identical_features_cannot_split() {
        let rows = vec![vec![1.0], vec![1.0], vec![1.0]];
        let tree = fit_owned(&rows, &[0.0, 5.0, 10.0], 3, 1);
        assert_eq!(tree.nodes().len(), 1);
        assert_eq!(tree.eval(&[1.0]), 5.0);
    }

    #[test]
    fn every_split_reduces_weighted_sse() {
        // Recompute SSEs from scratch for each split and check the fit's
        // choices actually improved the objective.
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![f64::from(i % 7), f64::from((i * 13) % 11), f64::from(i / 5)])
            .collect();
        let targets: Vec<f64> = (0..40)
            .map(|i| f64::from(i % 7) * 0.5 - f64::from((i * 13) % 11) * 0.25)
            .collect();
        let tree = fit_owned(&rows, &targets, 4, 3);
        assert!(tree.depth() >= 1);

        fn sse(items: &[usize], targets: &[f64]) -> f64 {
            let mean = items.iter().map(|&i| targets[i]).sum::<f64>() / items.len() as f64;
            items.iter().map(|&i| (targets[i] - mean).powi(2)).sum()
        }
        fn check(
            tree: &RegressionTree,
            at: u32,
            items: Vec<usize>,
            rows: &[Vec<f64>],
            targets: &[f64],
        ) {
            if let Node::Split {
                feature,
                threshold,
                left,
                right,
            } = tree.nodes()[at as usize]
            {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    items.iter().partition(|&&i| rows[i][feature] <= threshold);
                assert!(!l.is_empty() && !r.is_empty());
                assert!(sse(&l, targets) + sse(&r, targets) < sse(&items, targets));
                check(tree, left, l, rows, targets);
                check(tree, right, r, rows, targets);
            }
        }
        check(&tree, 0, (0..rows.len()).collect(), &rows, &targets);
    }

    #[test]
    fn serde_round_trip() {
        let rows = vec![
            vec![0.0, 4.0],
            vec![1.0, 3.0],
            vec![2.0, 2.0],
            vec![3.0, 1.0],
        ];
        let tree = fit_owned(&rows, &[1.0, 2.0, 4.0, 8.0], 2, 1);
        let json = serde_json::to_string(&tree).unwrap();
        let back: RegressionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(tree, back);
    }
}
