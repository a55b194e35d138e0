//! CART trees: gini for binary targets, variance for regression.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::prepare::{Matrix, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub(crate) enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Tree {
    nodes: Vec<Node>,
    /// Total impurity decrease per feature.
    gains: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per node; `None` tries all.
    pub max_features: Option<usize>,
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    task: Task,
    params: TreeParams,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
    gains: Vec<f64>,
}

/// Sum of squared deviations (regression) or n * gini (classification).
fn impurity(task: Task, n: f64, sum: f64, sum_sq: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    match task {
        Task::Classification => {
            let p = sum / n;
            n * 2.0 * p * (1.0 - p)
        }
        Task::Regression => (sum_sq - sum * sum / n).max(0.0),
    }
}

impl Builder<'_> {
    fn build(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let n = rows.len() as f64;
        let sum: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let sum_sq: f64 = rows.iter().map(|&r| self.y[r] * self.y[r]).sum();
        let parent = impurity(self.task, n, sum, sum_sq);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: sum / n });
        if depth >= self.params.max_depth || rows.len() < 2 * self.params.min_leaf || parent <= 1e-12 {
            return id;
        }
        let p = self.x.cols;
        let features: Vec<usize> = match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < p => {
                let mut f = sample(rng, p, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        };
        let min_leaf = self.params.min_leaf;
        // (weighted child impurity, feature, threshold)
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &features {
            rows.sort_by(|&a, &b| self.x.row(a)[f].total_cmp(&self.x.row(b)[f]).then(a.cmp(&b)));
            let (mut ls, mut lsq) = (0.0, 0.0);
            for i in 0..rows.len() - 1 {
                let yi = self.y[rows[i]];
                ls += yi;
                lsq += yi * yi;
                let nl = i + 1;
                let (xa, xb) = (self.x.row(rows[i])[f], self.x.row(rows[i + 1])[f]);
                if nl < min_leaf || rows.len() - nl < min_leaf || xa == xb {
                    continue;
                }
                let nr = (rows.len() - nl) as f64;
                let child = impurity(self.task, nl as f64, ls, lsq) + impurity(self.task, nr, sum - ls, sum_sq - lsq);
                if best.is_none_or(|(b, _, _)| child < b - 1e-12) {
                    best = Some((child, f, xa + (xb - xa) / 2.0));
                }
            }
        }
        let Some((child, feature, threshold)) = best else { return id };
        if parent - child <= 1e-12 {
            return id;
        }
        self.gains[feature] += parent - child;
        let (mut left, mut right): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.x.row(r)[feature] <= threshold);
        let l = self.build(&mut left, depth + 1);
        let r = self.build(&mut right, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left: l, right: r };
        id
    }
}

impl Tree {
    pub fn fit(
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
        task: Task,
        params: TreeParams,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Tree {
        let mut b = Builder { x, y, task, params, rng, nodes: Vec::new(), gains: alloc::vec![0.0; x.cols] };
        let mut rows = rows.to_vec();
        b.build(&mut rows, 0);
        Tree { nodes: b.nodes, gains: b.gains }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    #[cfg(test)]
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
