//! Rotation schedules over the dev rows of a partition.
//!
//! A [`CVResult`] holds index pairs only. It keeps a private copy of dev for
//! `fit`, and offers no way back to the partition or its test member.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};
use crate::frame::{DataFrame, Digest, Value};
use crate::registry::{Role, Session, SplitId};
use crate::rng;
use crate::split::{Partition, SplitKind};

/// One rotation: row indices into dev, both ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Expanding,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvKind {
    Kfold,
    Temporal,
    Group,
}

#[derive(Clone)]
pub struct CVResult {
    folds: Vec<Fold>,
    target: String,
    source_split_id: SplitId,
    kind: CvKind,
    dev: DataFrame,
    guards_bypassed: bool,
}

// Hand-written so the private dev copy never leaks through formatting.
impl fmt::Debug for CVResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CVResult")
            .field("k", &self.folds.len())
            .field("kind", &self.kind)
            .field("target", &self.target)
            .field("source_split_id", &self.source_split_id)
            .finish_non_exhaustive()
    }
}

impl CVResult {
    pub fn folds(&self) -> &[Fold] {
        &self.folds
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn source_split_id(&self) -> &SplitId {
        &self.source_split_id
    }

    pub fn kind(&self) -> CvKind {
        self.kind
    }

    pub fn guards_bypassed(&self) -> bool {
        self.guards_bypassed
    }

    /// Hash of the fold index lists; equal digests mean identical folds.
    pub fn folds_digest(&self) -> Digest {
        let mut h = Sha256::new();
        for fold in &self.folds {
            for part in [&fold.train, &fold.valid] {
                h.update((part.len() as u64).to_be_bytes());
                for i in part {
                    h.update((*i as u64).to_be_bytes());
                }
            }
        }
        Digest(h.finalize().into())
    }

    pub(crate) fn dev(&self) -> &DataFrame {
        &self.dev
    }

    pub(crate) fn fold_frames(&self, i: usize) -> (DataFrame, DataFrame) {
        let f = &self.folds[i];
        (self.dev.take_rows(&f.train), self.dev.take_rows(&f.valid))
    }
}

fn check_partition(session: &Session, p: &Partition, wanted: CvKind) -> Result<()> {
    let profile = match p.kind() {
        SplitKind::Random => CvKind::Kfold,
        SplitKind::Temporal { .. } => CvKind::Temporal,
        SplitKind::Group { .. } => CvKind::Group,
    };
    if profile != wanted {
        return Err(Error::Cv(alloc::format!(
            "partition came from a {profile:?} split; use the matching cv variant, not {wanted:?}"
        )));
    }
    if !session.guards_on() {
        return Ok(());
    }
    match session.lookup(p.dev()) {
        Ok(Some(rec)) if rec.role == Role::Dev && &rec.split_id == p.split_id() => Ok(()),
        _ => Err(Error::Cv("partition is not registered in this session; call split first".into())),
    }
}

fn build(session: &Session, p: &Partition, kind: CvKind, folds: Vec<Fold>) -> CVResult {
    CVResult {
        folds,
        target: p.target().to_string(),
        source_split_id: p.split_id().clone(),
        kind,
        dev: p.dev().clone(),
        guards_bypassed: !session.guards_on(),
    }
}

/// Sizes of `k` near-equal blocks of `n`; the first `n mod k` get one extra.
fn block_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// Complement folds from a list of valid-index blocks.
fn folds_from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Vec<Fold> {
    blocks
        .into_iter()
        .map(|mut valid| {
            valid.sort_unstable();
            let mut in_valid = alloc::vec![false; n];
            for &i in &valid {
                in_valid[i] = true;
            }
            let train = (0..n).filter(|&i| !in_valid[i]).collect();
            Fold { train, valid }
        })
        .collect()
}

/// Shuffled k-fold over dev.
pub fn cv(session: &Session, p: &Partition, k: usize, seed: u64) -> Result<CVResult> {
    check_partition(session, p, CvKind::Kfold)?;
    let n = p.dev().row_count();
    if k < 2 || k > n {
        return Err(Error::Cv(alloc::format!("k must be in 2..={n}, got {k}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, 1));
    let mut blocks = Vec::with_capacity(k);
    let mut start = 0;
    for size in block_sizes(n, k) {
        blocks.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(build(session, p, CvKind::Kfold, folds_from_blocks(n, blocks)))
}

/// Forward-chaining folds over time-ordered dev rows.
///
/// Valid blocks tile `[min_train + embargo, n)`; each train window ends
/// `embargo` rows before its valid block.
pub fn cv_temporal(
    session: &Session,
    p: &Partition,
    k: usize,
    window: Window,
    min_train: usize,
    embargo: usize,
) -> Result<CVResult> {
    check_partition(session, p, CvKind::Temporal)?;
    let SplitKind::Temporal { time_col, .. } = p.kind() else { unreachable!("checked profile") };
    let n = p.dev().row_count();
    if k == 0 || min_train == 0 {
        return Err(Error::Cv("cv_temporal needs k >= 1 and min_train >= 1".into()));
    }
    let usable = n.saturating_sub(min_train + embargo);
    if usable < k {
        return Err(Error::Cv(alloc::format!(
            "{n} dev rows leave {usable} rows after min_train {min_train} and embargo {embargo}; not enough for {k} folds"
        )));
    }
    let col = p.dev().column(time_col).expect("split_temporal checked the time column");
    let times: Vec<Value> = (0..n).map(|r| col.get(r)).collect();
    let mut folds = Vec::with_capacity(k);
    let mut vstart = min_train + embargo;
    for size in block_sizes(usable, k) {
        let train_end = vstart - embargo;
        let train_start = match window {
            Window::Expanding => 0,
            Window::Sliding => train_end - min_train,
        };
        let train: Vec<usize> = (train_start..train_end).collect();
        let valid: Vec<usize> = (vstart..vstart + size).collect();
        let latest = train.iter().map(|&i| &times[i]).max_by(|a, b| a.total_cmp(b));
        let earliest = valid.iter().map(|&i| &times[i]).min_by(|a, b| a.total_cmp(b));
        if let (Some(a), Some(b)) = (latest, earliest) {
            if a.total_cmp(b) != Ordering::Less {
                return Err(Error::TemporalTie { boundary: "fold train/valid", value: alloc::format!("{a}") });
            }
        }
        folds.push(Fold { train, valid });
        vstart += size;
    }
    Ok(build(session, p, CvKind::Temporal, folds))
}

/// Folds made of whole groups; the first `G mod k` folds take one extra group.
pub fn cv_group(session: &Session, p: &Partition, k: usize, seed: u64) -> Result<CVResult> {
    check_partition(session, p, CvKind::Group)?;
    let SplitKind::Group { group_col } = p.kind() else { unreachable!("checked profile") };
    let dev = p.dev();
    let col = dev.column(group_col).expect("split_group checked the group column");
    let mut keys: Vec<Vec<u8>> = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut index = alloc::collections::BTreeMap::new();
    for r in 0..dev.row_count() {
        let key = crate::frame::canonical_encode(&col.get(r));
        let slot = *index.entry(key.clone()).or_insert_with(|| {
            keys.push(key);
            rows.push(Vec::new());
            rows.len() - 1
        });
        rows[slot].push(r);
    }
    let g = rows.len();
    if k < 2 || k > g {
        return Err(Error::Cv(alloc::format!("k must be in 2..={g} (dev groups), got {k}")));
    }
    rows.shuffle(&mut rng::stream(seed, 1));
    let mut blocks = Vec::with_capacity(k);
    let mut it = rows.into_iter();
    for size in block_sizes(g, k) {
        blocks.push(it.by_ref().take(size).flatten().collect());
    }
    Ok(build(session, p, CvKind::Group, folds_from_blocks(dev.row_count(), blocks)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Column;
    use crate::split::{split, split_group, split_temporal, Ratios, SplitOptions};
    use alloc::vec;

    fn frame(n: usize) -> DataFrame {
        DataFrame::new(vec![
            ("x".into(), Column::Float((0..n).map(|i| Some(i as f64)).collect())),
            ("t".into(), Column::Int((0..n).map(|i| Some(i as i64)).collect())),
            ("g".into(), Column::Categorical((0..n).map(|i| Some(alloc::format!("g{}", i % 9))).collect())),
            ("y".into(), Column::Int((0..n).map(|i| Some((i % 2) as i64)).collect())),
        ])
        .unwrap()
    }

    #[test]
    fn kfold_sizes_and_coverage() {
        let s = Session::new();
        let p = split(&s, &frame(125), "y", &SplitOptions::default()).unwrap();
        assert_eq!(p.dev().row_count(), 100);
        let c = cv(&s, &p, 5, 42).unwrap();
        let mut all: Vec<usize> = Vec::new();
        for f in c.folds() {
            assert_eq!((f.train.len(), f.valid.len()), (80, 20));
            all.extend(&f.valid);
        }
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert!(matches!(cv(&s, &p, 101, 42), Err(Error::Cv(_))));
        assert!(matches!(cv(&s, &p, 1, 42), Err(Error::Cv(_))));
        assert_eq!(cv(&s, &p, 5, 42).unwrap().folds_digest(), c.folds_digest());
    }

    #[test]
    fn uneven_k_front_loads_extras() {
        let s = Session::new();
        let p = split(&s, &frame(30), "y", &SplitOptions::default().stratify(false)).unwrap();
        let sizes: Vec<usize> = cv(&s, &p, 7, 1).unwrap().folds().iter().map(|f| f.valid.len()).collect();
        assert_eq!(p.dev().row_count(), 24);
        assert_eq!(sizes, vec![4, 4, 4, 3, 3, 3, 3]);
    }

    #[test]
    fn foreign_partition_rejected() {
        let s = Session::new();
        let p = split(&s, &frame(40), "y", &SplitOptions::default()).unwrap();
        assert!(matches!(cv(&Session::new(), &p, 4, 1), Err(Error::Cv(_))));
        let off = Session::new();
        off.set_guards(crate::registry::GuardMode::Off);
        assert!(cv(&off, &p, 4, 1).unwrap().guards_bypassed());
    }

    #[test]
    fn temporal_expanding_and_sliding() {
        let s = Session::new();
        let p = split_temporal(&s, &frame(125), "y", "t", Ratios::default(), 0).unwrap();
        assert_eq!(p.dev().row_count(), 100);
        let c = cv_temporal(&s, &p, 4, Window::Expanding, 20, 0).unwrap();
        for (i, f) in c.folds().iter().enumerate() {
            assert_eq!(f.valid, (20 * (i + 1)..20 * (i + 2)).collect::<Vec<_>>());
            assert_eq!(f.train, (0..20 * (i + 1)).collect::<Vec<_>>());
        }
        let c = cv_temporal(&s, &p, 4, Window::Sliding, 20, 0).unwrap();
        for (i, f) in c.folds().iter().enumerate() {
            assert_eq!(f.train, (20 * i..20 * (i + 1)).collect::<Vec<_>>());
        }
        let c = cv_temporal(&s, &p, 4, Window::Expanding, 20, 5).unwrap();
        for f in c.folds() {
            assert!(f.valid[0] - f.train.last().unwrap() >= 6);
        }
        assert!(matches!(cv_temporal(&s, &p, 90, Window::Expanding, 20, 0), Err(Error::Cv(_))));
        assert!(matches!(cv(&s, &p, 4, 1), Err(Error::Cv(_))));
    }

    #[test]
    fn group_folds_hold_whole_groups() {
        let s = Session::new();
        let df = frame(90);
        let p = split_group(&s, &df, "y", "g", Ratios::new(0.6, 0.1, 0.3), 5).unwrap();
        let c = cv_group(&s, &p, 3, 2).unwrap();
        let dev = p.dev();
        let key = |r: usize| alloc::format!("{}", dev.value(r, "g").unwrap());
        for f in c.folds() {
            let tg: alloc::collections::BTreeSet<_> = f.train.iter().map(|&r| key(r)).collect();
            let vg: alloc::collections::BTreeSet<_> = f.valid.iter().map(|&r| key(r)).collect();
            assert!(tg.is_disjoint(&vg));
            assert_eq!(vg.len(), 2);
        }
        assert!(matches!(cv_group(&s, &p, 7, 2), Err(Error::Cv(_))));
    }
}
