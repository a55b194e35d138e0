//! The shared scorer. `evaluate`, `assess` and CV fitting all score
//! predictions through [`score`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::prepare::Task;

const LOG_LOSS_EPS: f64 = 1e-15;

/// Fraction of rows where `p >= 0.5` matches the 0/1 label.
pub fn accuracy(labels: &[f64], probs: &[f64]) -> Option<f64> {
    if labels.is_empty() {
        return None;
    }
    let hits = labels.iter().zip(probs).filter(|(y, p)| (**p >= 0.5) == (**y >= 0.5)).count();
    Some(hits as f64 / labels.len() as f64)
}

/// Rank-based AUC with tied scores given their average rank. `None` when
/// either class is absent.
pub fn roc_auc(labels: &[f64], scores: &[f64]) -> Option<f64> {
    let n = labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // One-based ranks i+1..=j+1 share their mean.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    let n_pos = labels.iter().filter(|y| **y >= 0.5).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let rank_sum: f64 = labels.iter().zip(&ranks).filter(|(y, _)| **y >= 0.5).map(|(_, r)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Mean negative log-likelihood with probabilities clamped to
/// `[1e-15, 1 - 1e-15]`.
pub fn log_loss(labels: &[f64], probs: &[f64]) -> Option<f64> {
    if labels.is_empty() {
        return None;
    }
    let total: f64 = labels
        .iter()
        .zip(probs)
        .map(|(y, p)| {
            let p = p.clamp(LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS);
            -(y * math::ln(p) + (1.0 - y) * math::ln(1.0 - p))
        })
        .sum();
    Some(total / labels.len() as f64)
}

pub fn rmse(y: &[f64], pred: &[f64]) -> Option<f64> {
    if y.is_empty() {
        return None;
    }
    let mse = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64;
    Some(math::sqrt(mse))
}

pub fn mae(y: &[f64], pred: &[f64]) -> Option<f64> {
    if y.is_empty() {
        return None;
    }
    Some(y.iter().zip(pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

/// Coefficient of determination; `None` for a constant target.
pub fn r2(y: &[f64], pred: &[f64]) -> Option<f64> {
    let m = math::mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    if y.is_empty() || ss_tot == 0.0 {
        return None;
    }
    let ss_res: f64 = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum();
    Some(1.0 - ss_res / ss_tot)
}

/// Metric used to rank models: roc_auc for classification, r2 for regression.
pub fn primary(task: Task) -> &'static str {
    match task {
        Task::Classification => "roc_auc",
        Task::Regression => "r2",
    }
}

/// True when larger values of `metric` are better.
pub fn higher_is_better(metric: &str) -> bool {
    !matches!(metric, "log_loss" | "rmse" | "mae")
}

/// Every defined metric for `task`. Undefined metrics are left out.
pub(crate) fn score(task: Task, y: &[f64], pred: &[f64]) -> BTreeMap<String, f64> {
    let candidates: [(&str, Option<f64>); 3] = match task {
        Task::Classification => [("accuracy", accuracy(y, pred)), ("log_loss", log_loss(y, pred)), ("roc_auc", roc_auc(y, pred))],
        Task::Regression => [("mae", mae(y, pred)), ("r2", r2(y, pred)), ("rmse", rmse(y, pred))],
    };
    candidates.into_iter().filter_map(|(k, v)| v.map(|v| (k.into(), v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_cases() {
        assert_eq!(roc_auc(&[0.0, 1.0], &[0.2, 0.8]), Some(1.0));
        assert_eq!(roc_auc(&[0.0, 1.0, 0.0, 1.0], &[0.5; 4]), Some(0.5));
        let auc = roc_auc(&[0.0, 0.0, 1.0, 1.0, 1.0], &[0.1, 0.4, 0.35, 0.8, 0.9]).unwrap();
        assert!((auc - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(roc_auc(&[1.0, 1.0], &[0.1, 0.2]), None);
    }

    #[test]
    fn regression_metrics() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&y, &y), Some(0.0));
        assert_eq!(r2(&y, &y), Some(1.0));
        assert_eq!(mae(&y, &[2.0, 2.0, 2.0]), Some(2.0 / 3.0));
        assert_eq!(r2(&[1.0, 1.0], &[1.0, 1.0]), None);
    }

    #[test]
    fn log_loss_is_clamped() {
        let v = log_loss(&[1.0], &[0.0]).unwrap();
        assert!(v.is_finite() && (v - 34.538776394910684).abs() < 1e-6);
    }

    #[test]
    fn score_omits_undefined() {
        let m = score(Task::Classification, &[1.0, 1.0], &[0.9, 0.8]);
        assert!(m.contains_key("accuracy") && !m.contains_key("roc_auc"));
    }
}
