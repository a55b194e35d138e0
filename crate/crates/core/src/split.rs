//! Assessment boundary: random, temporal and grouped three-way splits.
//!
//! Each split returns a [`Partition`] whose members are tagged and whose
//! fingerprints are registered in the session under one [`SplitId`].

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};
use crate::frame::{Column, DataFrame, PartitionTag, Value};
use crate::math;
use crate::prepare::{infer_task, Task};
use crate::registry::{Role, Session, SplitId};
use crate::rng;

/// Train/valid/test fractions. Must be positive and sum to 1 within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for Ratios {
    fn default() -> Self {
        Ratios { train: 0.6, valid: 0.2, test: 0.2 }
    }
}

impl Ratios {
    pub fn new(train: f64, valid: f64, test: f64) -> Ratios {
        Ratios { train, valid, test }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.valid, self.test]
    }

    fn validate(&self) -> Result<()> {
        let r = self.as_array();
        if r.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Partition("split ratios must be positive".into()));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Partition(alloc::format!("split ratios must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    pub ratios: Ratios,
    pub seed: u64,
    /// Keep class proportions per member (classification targets only).
    pub stratify: bool,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions { ratios: Ratios::default(), seed: 42, stratify: true }
    }
}

impl SplitOptions {
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn ratios(mut self, ratios: Ratios) -> Self {
        self.ratios = ratios;
        self
    }

    pub fn stratify(mut self, stratify: bool) -> Self {
        self.stratify = stratify;
        self
    }
}

/// Which split produced a partition; `cv` variants must match it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitKind {
    Random,
    Temporal { time_col: String, embargo: usize },
    Group { group_col: String },
}

/// Result of a split: three disjoint members plus `dev = train ∪ valid`.
#[derive(Debug, Clone)]
pub struct Partition {
    train: DataFrame,
    valid: DataFrame,
    test: DataFrame,
    dev: DataFrame,
    target: String,
    split_id: SplitId,
    seed: u64,
    kind: SplitKind,
    guards_bypassed: bool,
}

impl Partition {
    pub fn train(&self) -> &DataFrame {
        &self.train
    }

    pub fn valid(&self) -> &DataFrame {
        &self.valid
    }

    pub fn test(&self) -> &DataFrame {
        &self.test
    }

    /// `train ∪ valid`, tagged `dev`.
    pub fn dev(&self) -> &DataFrame {
        &self.dev
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn split_id(&self) -> &SplitId {
        &self.split_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> &SplitKind {
        &self.kind
    }

    pub fn guards_bypassed(&self) -> bool {
        self.guards_bypassed
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.row_count(), self.valid.row_count(), self.test.row_count())
    }
}

/// Largest-remainder apportionment of `total` items over `ratios`.
///
/// Shares are snapped to 1e-9 before flooring; ties in the fractional part
/// go to the later member.
pub(crate) fn largest_remainder(total: usize, ratios: &[f64]) -> Vec<usize> {
    let shares: Vec<f64> = ratios.iter().map(|r| math::snap(total as f64 * r)).collect();
    let mut sizes: Vec<usize> = shares.iter().map(|s| math::floor(*s) as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - math::floor(shares[a]);
        let fb = shares[b] - math::floor(shares[b]);
        fb.total_cmp(&fa).then(b.cmp(&a))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

fn check_input(session: &Session, df: &DataFrame, target: &str) -> Result<()> {
    if !df.has_column(target) {
        return Err(Error::Schema(alloc::format!("target column {target:?} not found")));
    }
    if !session.guards_on() {
        return Ok(());
    }
    if df.tag() != PartitionTag::Untagged {
        return Err(Error::Partition(alloc::format!(
            "input is already tagged {}; split an untagged frame, not a partition member",
            df.tag()
        )));
    }
    if let Some(rec) = session.lookup(df)? {
        return Err(Error::Partition(alloc::format!(
            "input is registered as a {} partition of split {}; re-splitting a member is not allowed",
            rec.role,
            rec.split_id
        )));
    }
    Ok(())
}

fn split_id_for(df: &DataFrame, params: &[u8]) -> SplitId {
    let mut h = Sha256::new();
    h.update(df.fingerprint().summary().0);
    h.update(params);
    let digest: [u8; 32] = h.finalize().into();
    SplitId::new(hex::encode(&digest[..8]))
}

fn ratio_bytes(r: &Ratios) -> Vec<u8> {
    r.as_array().iter().flat_map(|x| x.to_bits().to_be_bytes()).collect()
}

fn assemble(
    session: &Session,
    df: &DataFrame,
    target: &str,
    members: [Vec<usize>; 3],
    split_id: SplitId,
    seed: u64,
    kind: SplitKind,
) -> Result<Partition> {
    for (rows, name) in members.iter().zip(["train", "valid", "test"]) {
        if rows.is_empty() {
            return Err(Error::Partition(alloc::format!("{name} partition would be empty")));
        }
    }
    let [tr, va, te] = members;
    let train = df.take_rows(&tr);
    let valid = df.take_rows(&va);
    let test = df.take_rows(&te);
    let dev = train.concat(&valid)?;
    let batch = vec![
        (train.fingerprint(), Role::Train),
        (valid.fingerprint(), Role::Valid),
        (test.fingerprint(), Role::Test),
        (dev.fingerprint(), Role::Dev),
    ];
    session.register_batch(batch, &split_id);
    Ok(Partition {
        train: train.with_tag(PartitionTag::Train),
        valid: valid.with_tag(PartitionTag::Valid),
        test: test.with_tag(PartitionTag::Test),
        dev: dev.with_tag(PartitionTag::Dev),
        target: target.to_string(),
        split_id,
        seed,
        kind,
        guards_bypassed: !session.guards_on(),
    })
}

/// Random three-way split, optionally stratified on a classification target.
pub fn split(session: &Session, df: &DataFrame, target: &str, opts: &SplitOptions) -> Result<Partition> {
    opts.ratios.validate()?;
    check_input(session, df, target)?;
    let n = df.row_count();
    if n < 3 {
        return Err(Error::Partition(alloc::format!("split needs at least 3 rows, got {n}")));
    }
    let ratios = opts.ratios.as_array();
    let sizes = largest_remainder(n, &ratios);
    let mut rng = rng::stream(opts.seed, 0);
    let target_col = df.column(target).expect("checked");

    let stratified = opts.stratify && infer_task(target_col) == Task::Classification;
    if opts.stratify && !stratified {
        log::warn!("target {target:?} looks like regression; ignoring stratify");
    }
    let mut members: [Vec<usize>; 3] = Default::default();
    if stratified {
        let classes = class_rows(target_col);
        for (key, rows) in &classes {
            if rows.len() < 3 {
                return Err(Error::Stratify(alloc::format!(
                    "class {key} has {} rows; stratification needs at least one per member",
                    rows.len()
                )));
            }
        }
        let counts: Vec<usize> = classes.iter().map(|(_, r)| r.len()).collect();
        let alloc = stratified_allocation(&counts, &ratios, &sizes);
        for ((_, rows), per_member) in classes.into_iter().zip(alloc) {
            let mut rows = rows;
            rows.shuffle(&mut rng);
            let mut start = 0;
            for (m, count) in per_member.into_iter().enumerate() {
                members[m].extend_from_slice(&rows[start..start + count]);
                start += count;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut start = 0;
        for (m, size) in sizes.iter().enumerate() {
            members[m] = order[start..start + size].to_vec();
            start += size;
        }
    }
    for m in members.iter_mut() {
        m.sort_unstable();
    }
    let mut params = vec![b'r', opts.stratify as u8];
    params.extend(ratio_bytes(&opts.ratios));
    params.extend(opts.seed.to_be_bytes());
    params.extend(target.as_bytes());
    let id = split_id_for(df, &params);
    assemble(session, df, target, members, id, opts.seed, SplitKind::Random)
}

/// Rows per class, classes in first-appearance order. Missing is its own class.
fn class_rows(col: &Column) -> Vec<(Value, Vec<usize>)> {
    let mut index: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut out: Vec<(Value, Vec<usize>)> = Vec::new();
    for row in 0..col.len() {
        let v = col.get(row);
        let key = crate::frame::canonical_encode(&v);
        let slot = *index.entry(key).or_insert_with(|| {
            out.push((v, Vec::new()));
            out.len() - 1
        });
        out[slot].1.push(row);
    }
    out
}

/// Per-class member counts: each cell is the floor or ceiling of the class's
/// proportional share, and member totals equal `sizes`.
fn stratified_allocation(counts: &[usize], ratios: &[f64], sizes: &[usize]) -> Vec<Vec<usize>> {
    let m = ratios.len();
    let mut base = vec![vec![0usize; m]; counts.len()];
    let mut frac = vec![vec![0f64; m]; counts.len()];
    for (c, &nc) in counts.iter().enumerate() {
        for i in 0..m {
            let share = math::snap(nc as f64 * ratios[i]);
            base[c][i] = math::floor(share) as usize;
            frac[c][i] = share - math::floor(share);
        }
    }
    let mut class_left: Vec<usize> = counts.iter().zip(&base).map(|(n, b)| n - b.iter().sum::<usize>()).collect();
    let mut member_left: Vec<usize> =
        (0..m).map(|i| sizes[i].saturating_sub(base.iter().map(|b| b[i]).sum::<usize>())).collect();

    // Unit-capacity bipartite flow (class -> member), preferring large
    // fractional parts; augmenting paths repair greedy dead ends.
    let mut extra = vec![vec![false; m]; counts.len()];
    let mut cells: Vec<(usize, usize)> = (0..counts.len()).flat_map(|c| (0..m).map(move |i| (c, i))).collect();
    cells.sort_by(|a, b| frac[b.0][b.1].total_cmp(&frac[a.0][a.1]).then(a.cmp(b)));
    for &(c, i) in &cells {
        if class_left[c] > 0 && member_left[i] > 0 {
            extra[c][i] = true;
            class_left[c] -= 1;
            member_left[i] -= 1;
        }
    }
    for c in 0..counts.len() {
        while class_left[c] > 0 {
            let mut seen_members = vec![false; m];
            if augment(c, &mut extra, &mut member_left, &mut seen_members) {
                class_left[c] -= 1;
            } else {
                break;
            }
        }
    }
    // Anything still unplaced breaks the one-row bound but keeps sizes exact.
    for c in 0..counts.len() {
        while class_left[c] > 0 {
            let i = (0..m).find(|&i| member_left[i] > 0).expect("sizes sum to total");
            base[c][i] += 1;
            class_left[c] -= 1;
            member_left[i] -= 1;
        }
    }
    base.iter()
        .zip(&extra)
        .map(|(b, e)| b.iter().zip(e).map(|(x, add)| x + *add as usize).collect())
        .collect()
}

fn augment(c: usize, extra: &mut [Vec<bool>], member_left: &mut [usize], seen: &mut [bool]) -> bool {
    let m = member_left.len();
    for i in 0..m {
        if extra[c][i] || seen[i] {
            continue;
        }
        seen[i] = true;
        if member_left[i] > 0 {
            member_left[i] -= 1;
            extra[c][i] = true;
            return true;
        }
        // Member i is full: try to move one of its other classes elsewhere.
        for other in 0..extra.len() {
            if other != c && extra[other][i] {
                extra[other][i] = false;
                if augment(other, extra, member_left, seen) {
                    extra[c][i] = true;
                    return true;
                }
                extra[other][i] = true;
            }
        }
    }
    false
}

/// Ordered three-way cut on `time_col` with `embargo` rows dropped after the
/// train and valid blocks.
///
/// Sizes are the largest-remainder shares of the full row count; the embargo
/// rows come out of the test block.
pub fn split_temporal(
    session: &Session,
    df: &DataFrame,
    target: &str,
    time_col: &str,
    ratios: Ratios,
    embargo: usize,
) -> Result<Partition> {
    ratios.validate()?;
    check_input(session, df, target)?;
    let col = df.column(time_col).ok_or_else(|| Error::Schema(alloc::format!("time column {time_col:?} not found")))?;
    let n = df.row_count();
    if n < 3 {
        return Err(Error::Partition(alloc::format!("split needs at least 3 rows, got {n}")));
    }
    if (0..n).any(|r| col.is_missing(r)) {
        return Err(Error::Partition(alloc::format!("time column {time_col:?} has missing values")));
    }
    let times: Vec<Value> = (0..n).map(|r| col.get(r)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));

    let sizes = largest_remainder(n, &ratios.as_array());
    let (n_train, n_valid) = (sizes[0], sizes[1]);
    let valid_start = n_train + embargo;
    let test_start = valid_start + n_valid + embargo;
    if test_start >= n {
        return Err(Error::Partition(alloc::format!(
            "embargo {embargo} leaves no rows for the test partition ({n} rows)"
        )));
    }
    let cuts = [(n_train, valid_start, "train/valid"), (valid_start + n_valid, test_start, "valid/test")];
    for (end, next_start, boundary) in cuts {
        let last = &times[order[end - 1]];
        let first = &times[order[next_start]];
        if last.total_cmp(first) != core::cmp::Ordering::Less {
            return Err(Error::TemporalTie { boundary, value: alloc::format!("{last}") });
        }
    }
    let members = [
        order[..n_train].to_vec(),
        order[valid_start..valid_start + n_valid].to_vec(),
        order[test_start..].to_vec(),
    ];
    let mut params = vec![b't'];
    params.extend(ratio_bytes(&ratios));
    params.extend((embargo as u64).to_be_bytes());
    params.extend(time_col.as_bytes());
    params.push(0);
    params.extend(target.as_bytes());
    let id = split_id_for(df, &params);
    let kind = SplitKind::Temporal { time_col: time_col.to_string(), embargo };
    assemble(session, df, target, members, id, 0, kind)
}

/// Split whole groups of `group_col` across members; group counts follow
/// `ratios` by largest remainder over groups.
pub fn split_group(
    session: &Session,
    df: &DataFrame,
    target: &str,
    group_col: &str,
    ratios: Ratios,
    seed: u64,
) -> Result<Partition> {
    ratios.validate()?;
    check_input(session, df, target)?;
    let col =
        df.column(group_col).ok_or_else(|| Error::Schema(alloc::format!("group column {group_col:?} not found")))?;
    if (0..df.row_count()).any(|r| col.is_missing(r)) {
        return Err(Error::Group(alloc::format!("group column {group_col:?} has missing values")));
    }
    let mut groups = class_rows(col);
    if groups.len() < 3 {
        return Err(Error::Group(alloc::format!("need at least 3 distinct groups, found {}", groups.len())));
    }
    let sizes = largest_remainder(groups.len(), &ratios.as_array());
    let mut rng = rng::stream(seed, 0);
    groups.shuffle(&mut rng);
    let mut members: [Vec<usize>; 3] = Default::default();
    let mut iter = groups.into_iter();
    for (m, &count) in sizes.iter().enumerate() {
        for (_, rows) in iter.by_ref().take(count) {
            members[m].extend(rows);
        }
        members[m].sort_unstable();
    }
    let mut params = vec![b'g'];
    params.extend(ratio_bytes(&ratios));
    params.extend(seed.to_be_bytes());
    params.extend(group_col.as_bytes());
    params.push(0);
    params.extend(target.as_bytes());
    let id = split_id_for(df, &params);
    assemble(session, df, target, members, id, seed, SplitKind::Group { group_col: group_col.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn frame(n: usize) -> DataFrame {
        DataFrame::new(vec![
            ("x".into(), Column::Float((0..n).map(|i| Some(i as f64 * 0.5)).collect())),
            ("t".into(), Column::Int((0..n).map(|i| Some(i as i64)).collect())),
            ("y".into(), Column::Int((0..n).map(|i| Some((i % 2) as i64)).collect())),
        ])
        .unwrap()
    }

    #[test]
    fn largest_remainder_examples() {
        assert_eq!(largest_remainder(10, &[0.6, 0.2, 0.2]), vec![6, 2, 2]);
        assert_eq!(largest_remainder(100, &[0.6, 0.2, 0.2]), vec![60, 20, 20]);
        assert_eq!(largest_remainder(6, &[0.5, 0.25, 0.25]), vec![3, 1, 2]);
        assert_eq!(largest_remainder(7, &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).iter().sum::<usize>(), 7);
    }

    #[test]
    fn ten_rows_split_six_two_two() {
        let s = Session::new();
        let p = split(&s, &frame(10), "y", &SplitOptions::default().stratify(false)).unwrap();
        assert_eq!(p.sizes(), (6, 2, 2));
        assert_eq!(p.dev().row_count(), 8);
        assert_eq!(p.train().tag(), PartitionTag::Train);
        assert_eq!(p.dev().tag(), PartitionTag::Dev);
    }

    #[test]
    fn same_seed_same_fingerprints() {
        let (a, b) = (Session::new(), Session::new());
        let pa = split(&a, &frame(30), "y", &SplitOptions::default()).unwrap();
        let pb = split(&b, &frame(30), "y", &SplitOptions::default()).unwrap();
        assert_eq!(pa.test().fingerprint(), pb.test().fingerprint());
        assert_eq!(pa.split_id(), pb.split_id());
        let pc = split(&Session::new(), &frame(30), "y", &SplitOptions::default().seed(7)).unwrap();
        assert_ne!(pa.test().fingerprint(), pc.test().fingerprint());
    }

    #[test]
    fn bad_ratios_rejected() {
        let s = Session::new();
        let err = split(&s, &frame(10), "y", &SplitOptions::default().ratios(Ratios::new(0.5, 0.5, 0.5)));
        assert!(matches!(err, Err(Error::Partition(_))));
        let err = split(&s, &frame(10), "y", &SplitOptions::default().ratios(Ratios::new(1.0, 0.0, 0.0)));
        assert!(matches!(err, Err(Error::Partition(_))));
    }

    #[test]
    fn tiny_and_tagged_inputs_rejected() {
        let s = Session::new();
        assert!(matches!(split(&s, &frame(2), "y", &SplitOptions::default()), Err(Error::Partition(_))));
        let p = split(&s, &frame(20), "y", &SplitOptions::default()).unwrap();
        assert!(matches!(split(&s, p.train(), "y", &SplitOptions::default()), Err(Error::Partition(_))));
        // A rebuilt copy of a member is still recognised by content.
        let rebuilt = p.train().take_rows(&(0..p.train().row_count()).collect::<Vec<_>>());
        assert_eq!(rebuilt.tag(), PartitionTag::Untagged);
        assert!(matches!(split(&s, &rebuilt, "y", &SplitOptions::default()), Err(Error::Partition(_))));
    }

    #[test]
    fn stratify_error_for_rare_class() {
        let mut df = frame(12);
        let mut y: Vec<Option<i64>> = vec![Some(0); 12];
        y[3] = Some(1);
        y[7] = Some(1);
        df = df.with_column("y", Column::Int(y)).unwrap();
        let s = Session::new();
        assert!(matches!(split(&s, &df, "y", &SplitOptions::default()), Err(Error::Stratify(_))));
        assert!(split(&s, &df, "y", &SplitOptions::default().stratify(false)).is_ok());
    }

    #[test]
    fn members_are_registered_with_their_roles() {
        let s = Session::new();
        let p = split(&s, &frame(20), "y", &SplitOptions::default()).unwrap();
        for (f, role) in [(p.train(), Role::Train), (p.valid(), Role::Valid), (p.test(), Role::Test), (p.dev(), Role::Dev)]
        {
            let rec = s.lookup(f).unwrap().unwrap();
            assert_eq!(rec.role, role);
            assert_eq!(&rec.split_id, p.split_id());
        }
    }

    #[test]
    fn temporal_examples() {
        let s = Session::new();
        let df = frame(100);
        let p = split_temporal(&s, &df, "y", "t", Ratios::default(), 0).unwrap();
        let times = |f: &DataFrame| -> Vec<i64> {
            (0..f.row_count()).map(|r| match f.value(r, "t").unwrap() { Value::Int(v) => v, _ => unreachable!() }).collect()
        };
        assert_eq!(times(p.train()), (0..60).collect::<Vec<_>>());
        assert_eq!(times(p.valid()), (60..80).collect::<Vec<_>>());
        assert_eq!(times(p.test()), (80..100).collect::<Vec<_>>());

        let s = Session::new();
        let p = split_temporal(&s, &df, "y", "t", Ratios::default(), 5).unwrap();
        assert_eq!(times(p.valid())[0], 65); // row 66, one-based
        assert_eq!(times(p.test())[0], 90); // row 91, one-based
        let (a, b, c) = p.sizes();
        assert_eq!(a + b + c, 90);
    }

    #[test]
    fn temporal_sorts_unsorted_input_and_rejects_ties() {
        let s = Session::new();
        let rev: Vec<usize> = (0..10).rev().collect();
        let df = frame(10).take_rows(&rev);
        let p = split_temporal(&s, &df, "y", "t", Ratios::default(), 0).unwrap();
        assert_eq!(p.train().value(0, "t"), Some(Value::Int(0)));

        let mut t: Vec<Option<i64>> = (0..10).map(|i| Some(i as i64)).collect();
        t[6] = Some(5); // rows 6 and 7 (one-based) share a timestamp across the cut
        let tied = frame(10).with_column("t", Column::Int(t)).unwrap();
        let err = split_temporal(&Session::new(), &tied, "y", "t", Ratios::default(), 0);
        assert!(matches!(err, Err(Error::TemporalTie { boundary: "train/valid", .. })));
    }

    #[test]
    fn group_examples() {
        let g: Vec<Option<String>> = (0..12).map(|i| Some(alloc::format!("g{}", i / 2))).collect();
        let df = frame(12).with_column("g", Column::Categorical(g)).unwrap();
        let s = Session::new();
        let p = split_group(&s, &df, "y", "g", Ratios::new(0.5, 0.25, 0.25), 3).unwrap();
        let groups = |f: &DataFrame| -> BTreeSet<String> {
            (0..f.row_count()).map(|r| alloc::format!("{}", f.value(r, "g").unwrap())).collect()
        };
        let (a, b, c) = (groups(p.train()), groups(p.valid()), groups(p.test()));
        assert_eq!((a.len(), b.len(), c.len()), (3, 1, 2));
        assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));

        let again = split_group(&Session::new(), &df, "y", "g", Ratios::new(0.5, 0.25, 0.25), 3).unwrap();
        assert_eq!(again.test().fingerprint(), p.test().fingerprint());

        let two: Vec<Option<String>> = (0..12).map(|i| Some(alloc::format!("g{}", i % 2))).collect();
        let df2 = frame(12).with_column("g", Column::Categorical(two)).unwrap();
        assert!(matches!(split_group(&Session::new(), &df2, "y", "g", Ratios::default(), 1), Err(Error::Group(_))));
    }
}
