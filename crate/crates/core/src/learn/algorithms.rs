//! The five native learners.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{Tree, TreeParams};
use crate::error::{Error, Result};
use crate::math;
use crate::prepare::{Matrix, Task};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Logistic,
    Linear,
    DecisionTree,
    RandomForest,
    Knn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Logistic, Algorithm::Linear, Algorithm::DecisionTree, Algorithm::RandomForest, Algorithm::Knn];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Logistic => "logistic",
            Algorithm::Linear => "linear",
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::RandomForest => "random_forest",
            Algorithm::Knn => "knn",
        }
    }

    /// Hyperparameter names and defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            Algorithm::Logistic => &[("l2", 0.0), ("learning_rate", 0.5), ("max_iter", 500.0), ("tol", 1e-6)],
            Algorithm::Linear => &[("ridge", 0.0)],
            Algorithm::DecisionTree => &[("max_depth", 6.0), ("min_leaf", 2.0)],
            Algorithm::RandomForest => &[("max_depth", 6.0), ("max_features", 0.0), ("min_leaf", 2.0), ("n_trees", 50.0)],
            Algorithm::Knn => &[("k", 5.0)],
        }
    }

    pub fn supports(self, task: Task) -> bool {
        !matches!((self, task), (Algorithm::Logistic, Task::Regression) | (Algorithm::Linear, Task::Classification))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown algorithm {s:?}")))
    }
}

/// Hyperparameter overrides by name. Integer-valued parameters must be
/// whole numbers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hyperparameters(pub BTreeMap<String, f64>);

impl Hyperparameters {
    pub fn new() -> Hyperparameters {
        Hyperparameters::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Hyperparameters {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    /// Checks names against `algo` and fills in defaults.
    pub(crate) fn resolve(&self, algo: Algorithm) -> Result<Hyperparameters> {
        let defaults = algo.defaults();
        for (name, v) in &self.0 {
            if !defaults.iter().any(|(d, _)| d == name) {
                return Err(Error::Config(alloc::format!("unknown hyperparameter {name:?} for {algo}")));
            }
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Config(alloc::format!("hyperparameter {name} must be finite and >= 0, got {v}")));
            }
        }
        let mut out = BTreeMap::new();
        for (name, d) in defaults {
            out.insert(name.to_string(), self.0.get(*name).copied().unwrap_or(*d));
        }
        let h = Hyperparameters(out);
        for name in ["max_iter", "max_depth", "min_leaf", "n_trees", "k", "max_features"] {
            if let Some(v) = h.get(name) {
                let at_least = if name == "max_features" { 0.0 } else { 1.0 };
                if !math::is_integral(v) || v < at_least {
                    return Err(Error::Config(alloc::format!("hyperparameter {name} must be an integer >= {at_least}")));
                }
            }
        }
        Ok(h)
    }

    fn int(&self, name: &str) -> usize {
        self.get(name).expect("resolved") as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub(crate) enum Learner {
    Linear { weights: Vec<f64>, bias: f64, logistic: bool },
    Tree { tree: Tree },
    Forest { trees: Vec<Tree> },
    Knn { k: usize, cols: usize, x: Vec<f64>, y: Vec<f64> },
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + math::exp(-z))
    } else {
        let e = math::exp(z);
        e / (1.0 + e)
    }
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl Learner {
    pub fn fit(algo: Algorithm, task: Task, x: &Matrix, y: &[f64], hp: &Hyperparameters, seed: u64) -> Result<Learner> {
        if !algo.supports(task) {
            return Err(Error::Config(alloc::format!("{algo} does not support {task:?} targets")));
        }
        if x.rows == 0 {
            return Err(Error::Data("cannot fit on zero rows".into()));
        }
        let rows: Vec<usize> = (0..x.rows).collect();
        Ok(match algo {
            Algorithm::Logistic => fit_logistic(x, y, hp),
            Algorithm::Linear => fit_linear(x, y, hp.get("ridge").unwrap_or(0.0)),
            Algorithm::DecisionTree => {
                let params = TreeParams { max_depth: hp.int("max_depth"), min_leaf: hp.int("min_leaf"), max_features: None };
                Learner::Tree { tree: Tree::fit(x, y, &rows, task, params, None) }
            }
            Algorithm::RandomForest => {
                let m = match hp.int("max_features") {
                    0 => (math::sqrt(x.cols as f64) as usize).max(1),
                    m => m.min(x.cols),
                };
                let params = TreeParams { max_depth: hp.int("max_depth"), min_leaf: hp.int("min_leaf"), max_features: Some(m) };
                let trees = (0..hp.int("n_trees"))
                    .map(|t| {
                        let mut r = rng::stream(seed, 1_000 + t as u64);
                        let boot: Vec<usize> = (0..x.rows).map(|_| r.random_range(0..x.rows)).collect();
                        Tree::fit(x, y, &boot, task, params, Some(&mut r))
                    })
                    .collect();
                Learner::Forest { trees }
            }
            Algorithm::Knn => Learner::Knn { k: hp.int("k").min(x.rows), cols: x.cols, x: x.data.clone(), y: y.to_vec() },
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            Learner::Linear { weights, bias, logistic } => {
                let z = dot(weights, row) + bias;
                if *logistic {
                    sigmoid(z)
                } else {
                    z
                }
            }
            Learner::Tree { tree } => tree.predict_row(row),
            Learner::Forest { trees } => trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / trees.len() as f64,
            Learner::Knn { k, cols, x, y } => {
                let mut dist: Vec<(f64, usize)> = x
                    .chunks_exact(*cols)
                    .enumerate()
                    .map(|(i, p)| (p.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum(), i))
                    .collect();
                dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                dist.iter().take(*k).map(|(_, i)| y[*i]).sum::<f64>() / *k as f64
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows).map(|i| self.predict_row(x.row(i))).collect()
    }

    /// Split gains for trees, |coefficients| for linear models.
    pub fn intrinsic_importance(&self) -> Option<Vec<f64>> {
        match self {
            Learner::Linear { weights, .. } => Some(weights.iter().map(|w| w.abs()).collect()),
            Learner::Tree { tree } => Some(tree.gains().to_vec()),
            Learner::Forest { trees } => {
                let p = trees.first().map_or(0, |t| t.gains().len());
                let mut g = alloc::vec![0.0; p];
                for t in trees {
                    for (acc, v) in g.iter_mut().zip(t.gains()) {
                        *acc += v / trees.len() as f64;
                    }
                }
                Some(g)
            }
            Learner::Knn { .. } => None,
        }
    }
}

/// Full-batch gradient descent on mean log-loss.
fn fit_logistic(x: &Matrix, y: &[f64], hp: &Hyperparameters) -> Learner {
    let (n, p) = (x.rows, x.cols);
    let lr = hp.get("learning_rate").unwrap_or(0.5);
    let l2 = hp.get("l2").unwrap_or(0.0);
    let tol = hp.get("tol").unwrap_or(1e-6);
    let mut w = alloc::vec![0.0; p];
    let mut b = 0.0;
    let mut grad = alloc::vec![0.0; p];
    for _ in 0..hp.int("max_iter") {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        for i in 0..n {
            let row = x.row(i);
            let err = sigmoid(dot(&w, row) + b) - y[i];
            for (g, v) in grad.iter_mut().zip(row) {
                *g += err * v;
            }
            gb += err;
        }
        let mut largest = (lr * gb / n as f64).abs();
        b -= lr * gb / n as f64;
        for (wj, g) in w.iter_mut().zip(&grad) {
            let step = lr * (g / n as f64 + l2 * *wj);
            *wj -= step;
            largest = largest.max(step.abs());
        }
        if largest < tol {
            break;
        }
    }
    Learner::Linear { weights: w, bias: b, logistic: true }
}

/// Least squares via the normal equations; a small ridge is added when the
/// system is singular.
fn fit_linear(x: &Matrix, y: &[f64], ridge: f64) -> Learner {
    let p = x.cols + 1;
    let mut a = alloc::vec![0.0; p * p];
    let mut rhs = alloc::vec![0.0; p];
    for i in 0..x.rows {
        let row = x.row(i);
        let v = |j: usize| if j == 0 { 1.0 } else { row[j - 1] };
        for r in 0..p {
            rhs[r] += v(r) * y[i];
            for c in 0..p {
                a[r * p + c] += v(r) * v(c);
            }
        }
    }
    let mut lambda = ridge;
    let coef = loop {
        let mut m = a.clone();
        for j in 1..p {
            m[j * p + j] += lambda;
        }
        match solve(m, rhs.clone(), p) {
            Some(c) => break c,
            None => lambda = if lambda == 0.0 { 1e-8 } else { lambda * 10.0 },
        }
        if lambda > 1e6 {
            break alloc::vec![0.0; p];
        }
    };
    Learner::Linear { weights: coef[1..].to_vec(), bias: coef[0], logistic: false }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-12 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = alloc::vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}
