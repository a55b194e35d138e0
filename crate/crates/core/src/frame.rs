//! Immutable named-column tables and their content fingerprints.
//!
//! A [`DataFrame`] never changes after construction; every transformation
//! returns a new frame. Identity for provenance purposes is the frame's
//! [`FrameFingerprint`]: one SHA-256 digest per column over the row-ordered
//! canonical encoding of its cells. Selecting columns keeps the remaining
//! digests intact, while editing a value, reordering rows or dropping rows
//! changes them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};

/// Role label carried by a frame. Fresh data is `Untagged`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PartitionTag {
    #[default]
    #[serde(rename = "none")]
    Untagged,
    Train,
    Valid,
    Test,
    Dev,
}

impl fmt::Display for PartitionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionTag::Untagged => "none",
            PartitionTag::Train => "train",
            PartitionTag::Valid => "valid",
            PartitionTag::Test => "test",
            PartitionTag::Dev => "dev",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Float,
    Int,
    Bool,
    Categorical,
}

/// A typed column. `None` cells are missing values; NaN floats are
/// normalized to `None` when a frame is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum Column {
    Float(Vec<Option<f64>>),
    Int(Vec<Option<i64>>),
    Bool(Vec<Option<bool>>),
    Categorical(Vec<Option<String>>),
}

/// A single cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
            Value::Missing => f.write_str("NA"),
        }
    }
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing) || matches!(self, Value::Float(v) if v.is_nan())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(v) if !v.is_nan() => Some(*v),
            Value::Int(v) => Some(*v as f64),
            Value::Bool(v) => Some(if *v { 1.0 } else { 0.0 }),
            _ => None,
        }
    }

    /// Total order used for sorting time columns and class labels.
    /// Numbers compare numerically, then bools, then text; missing sorts last.
    pub(crate) fn total_cmp(&self, other: &Value) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Float(x) if x.is_nan() => 3,
                Value::Float(_) | Value::Int(_) => 0,
                Value::Bool(_) => 1,
                Value::Text(_) => 2,
                Value::Missing => 3,
            }
        }
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(a), Some(b)) if rank(self) == 0 && rank(other) == 0 => a.total_cmp(&b),
                _ => rank(self).cmp(&rank(other)),
            },
        }
    }
}

const TAG_FLOAT: u8 = 0x01;
const TAG_INT: u8 = 0x02;
const TAG_BOOL: u8 = 0x03;
const TAG_TEXT: u8 = 0x04;
/// Reserved encoding of a missing cell (including every NaN payload).
pub const MISSING_SENTINEL: u8 = 0xFF;

fn int_exact_in_f64(v: i64) -> bool {
    (v as f64) as i128 == v as i128
}

fn encode_float(v: f64, out: &mut Vec<u8>) {
    if v.is_nan() {
        out.push(MISSING_SENTINEL);
    } else {
        out.push(TAG_FLOAT);
        out.extend_from_slice(&v.to_bits().to_be_bytes());
    }
}

fn encode_int(v: i64, out: &mut Vec<u8>) {
    if int_exact_in_f64(v) {
        encode_float(v as f64, out);
    } else {
        out.push(TAG_INT);
        out.extend_from_slice(&v.to_be_bytes());
    }
}

fn encode_text(v: &str, out: &mut Vec<u8>) {
    out.push(TAG_TEXT);
    out.extend_from_slice(&(v.len() as u64).to_be_bytes());
    out.extend_from_slice(v.as_bytes());
}

/// Canonical byte encoding of a cell.
///
/// Integers that are exactly representable as `f64` encode as that float, so
/// dtype coercion between the two preserves fingerprints. Missing values and
/// every NaN encode as the single byte [`MISSING_SENTINEL`]. Text is
/// length-prefixed UTF-8.
pub fn canonical_encode(value: &Value) -> Vec<u8> {
    let mut out = Vec::with_capacity(9);
    match value {
        Value::Float(v) => encode_float(*v, &mut out),
        Value::Int(v) => encode_int(*v, &mut out),
        Value::Bool(v) => {
            out.push(TAG_BOOL);
            out.push(*v as u8);
        }
        Value::Text(v) => encode_text(v, &mut out),
        Value::Missing => out.push(MISSING_SENTINEL),
    }
    out
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Float(v) => v.len(),
            Column::Int(v) => v.len(),
            Column::Bool(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Float(_) => ColumnKind::Float,
            Column::Int(_) => ColumnKind::Int,
            Column::Bool(_) => ColumnKind::Bool,
            Column::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, Column::Categorical(_))
    }

    pub fn get(&self, row: usize) -> Value {
        match self {
            Column::Float(v) => v[row].filter(|x| !x.is_nan()).map_or(Value::Missing, Value::Float),
            Column::Int(v) => v[row].map_or(Value::Missing, Value::Int),
            Column::Bool(v) => v[row].map_or(Value::Missing, Value::Bool),
            Column::Categorical(v) => v[row].clone().map_or(Value::Missing, Value::Text),
        }
    }

    /// Numeric view of a cell; `None` for missing or text.
    pub fn f64_at(&self, row: usize) -> Option<f64> {
        match self {
            Column::Float(v) => v[row].filter(|x| !x.is_nan()),
            Column::Int(v) => v[row].map(|x| x as f64),
            Column::Bool(v) => v[row].map(|x| if x { 1.0 } else { 0.0 }),
            Column::Categorical(_) => None,
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            Column::Float(v) => v[row].is_none_or(|x| x.is_nan()),
            Column::Int(v) => v[row].is_none(),
            Column::Bool(v) => v[row].is_none(),
            Column::Categorical(v) => v[row].is_none(),
        }
    }

    pub(crate) fn encode_cell(&self, row: usize, out: &mut Vec<u8>) {
        match self {
            Column::Float(v) => match v[row] {
                Some(x) => encode_float(x, out),
                None => out.push(MISSING_SENTINEL),
            },
            Column::Int(v) => match v[row] {
                Some(x) => encode_int(x, out),
                None => out.push(MISSING_SENTINEL),
            },
            Column::Bool(v) => match v[row] {
                Some(x) => {
                    out.push(TAG_BOOL);
                    out.push(x as u8);
                }
                None => out.push(MISSING_SENTINEL),
            },
            Column::Categorical(v) => match &v[row] {
                Some(x) => encode_text(x, out),
                None => out.push(MISSING_SENTINEL),
            },
        }
    }

    /// New column holding the given rows, in the given order.
    pub fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Float(v) => Column::Float(rows.iter().map(|&r| v[r]).collect()),
            Column::Int(v) => Column::Int(rows.iter().map(|&r| v[r]).collect()),
            Column::Bool(v) => Column::Bool(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical(v) => Column::Categorical(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }

    fn append(&mut self, other: &Column) -> Result<()> {
        match (self, other) {
            (Column::Float(a), Column::Float(b)) => a.extend_from_slice(b),
            (Column::Int(a), Column::Int(b)) => a.extend_from_slice(b),
            (Column::Bool(a), Column::Bool(b)) => a.extend_from_slice(b),
            (Column::Categorical(a), Column::Categorical(b)) => a.extend(b.iter().cloned()),
            (a, b) => {
                return Err(Error::Schema(alloc::format!(
                    "cannot concatenate {:?} and {:?} columns",
                    a.kind(),
                    b.kind()
                )))
            }
        }
        Ok(())
    }

    fn digest(&self) -> Digest {
        let mut hasher = Sha256::new();
        let mut buf = Vec::with_capacity(16);
        for row in 0..self.len() {
            buf.clear();
            self.encode_cell(row, &mut buf);
            hasher.update(&buf);
        }
        Digest(hasher.finalize().into())
    }

    fn normalized(self) -> Column {
        match self {
            Column::Float(v) => Column::Float(v.into_iter().map(|x| x.filter(|x| !x.is_nan())).collect()),
            other => other,
        }
    }
}

/// A 32-byte SHA-256 digest, rendered as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn of(bytes: &[u8]) -> Digest {
        Digest(Sha256::digest(bytes).into())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Digest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut out = [0u8; 32];
        hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
        Ok(Digest(out))
    }
}

/// Per-column content digests plus the row count.
///
/// Independent of column order: two frames holding the same named columns
/// in a different order have equal fingerprints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FrameFingerprint {
    pub column_digests: BTreeMap<String, Digest>,
    pub row_count: usize,
}

impl FrameFingerprint {
    /// One digest summarizing the whole fingerprint (names, digests, rows).
    pub fn summary(&self) -> Digest {
        let mut hasher = Sha256::new();
        hasher.update((self.row_count as u64).to_be_bytes());
        for (name, digest) in &self.column_digests {
            hasher.update((name.len() as u64).to_be_bytes());
            hasher.update(name.as_bytes());
            hasher.update(digest.0);
        }
        Digest(hasher.finalize().into())
    }

    /// True when every (name, digest) pair of `self` appears in `other`.
    pub fn is_column_subset_of(&self, other: &FrameFingerprint) -> bool {
        self.row_count == other.row_count
            && !self.column_digests.is_empty()
            && self.column_digests.iter().all(|(name, d)| other.column_digests.get(name) == Some(d))
    }
}

impl fmt::Display for FrameFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.summary())
    }
}

/// Immutable tabular data with named, equal-length columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataFrame {
    names: Vec<String>,
    columns: Vec<Column>,
    row_count: usize,
    tag: PartitionTag,
}

impl DataFrame {
    /// Builds an untagged frame. Column names must be unique and all columns
    /// the same length; at least one column is required.
    pub fn new(columns: Vec<(String, Column)>) -> Result<DataFrame> {
        if columns.is_empty() {
            return Err(Error::Schema("a frame needs at least one column".into()));
        }
        let row_count = columns[0].1.len();
        let mut seen = BTreeSet::new();
        let mut names = Vec::with_capacity(columns.len());
        let mut cols = Vec::with_capacity(columns.len());
        for (name, col) in columns {
            if !seen.insert(name.clone()) {
                return Err(Error::Schema(alloc::format!("duplicate column name {name:?}")));
            }
            if col.len() != row_count {
                return Err(Error::Schema(alloc::format!(
                    "column {name:?} has {} rows, expected {row_count}",
                    col.len()
                )));
            }
            names.push(name);
            cols.push(col.normalized());
        }
        Ok(DataFrame { names, columns: cols, row_count, tag: PartitionTag::Untagged })
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn tag(&self) -> PartitionTag {
        self.tag
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.names.iter().position(|n| n == name).map(|i| &self.columns[i])
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Column)> {
        self.names.iter().map(String::as_str).zip(self.columns.iter())
    }

    pub fn value(&self, row: usize, column: &str) -> Option<Value> {
        self.column(column).map(|c| c.get(row))
    }

    /// Canonical encoding of one row, in column order. Used to compare rows
    /// across frames.
    pub fn row_key(&self, row: usize) -> Vec<u8> {
        let mut out = Vec::new();
        for (name, col) in self.names.iter().zip(&self.columns) {
            out.extend_from_slice(name.as_bytes());
            out.push(0);
            col.encode_cell(row, &mut out);
        }
        out
    }

    pub fn fingerprint(&self) -> FrameFingerprint {
        let column_digests = self.names.iter().cloned().zip(self.columns.iter().map(Column::digest)).collect();
        FrameFingerprint { column_digests, row_count: self.row_count }
    }

    /// Projection onto `names`, in the given order. Keeps the partition tag;
    /// the selected columns keep their digests, so provenance survives.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<DataFrame> {
        if names.is_empty() {
            return Err(Error::Schema("empty projection: select at least one column".into()));
        }
        let mut seen = BTreeSet::new();
        let mut out_names = Vec::with_capacity(names.len());
        let mut out_cols = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref();
            if !seen.insert(name) {
                return Err(Error::Schema(alloc::format!("column {name:?} selected twice")));
            }
            let col = self.column(name).ok_or_else(|| Error::Schema(alloc::format!("unknown column {name:?}")))?;
            out_names.push(name.to_string());
            out_cols.push(col.clone());
        }
        Ok(DataFrame { names: out_names, columns: out_cols, row_count: self.row_count, tag: self.tag })
    }

    /// Copy without `name`. Untagged: dropping is outside the grammar.
    pub fn drop_column(&self, name: &str) -> Result<DataFrame> {
        let idx = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Schema(alloc::format!("unknown column {name:?}")))?;
        if self.names.len() == 1 {
            return Err(Error::Schema("cannot drop the only column".into()));
        }
        let mut out = self.clone();
        out.names.remove(idx);
        out.columns.remove(idx);
        out.tag = PartitionTag::Untagged;
        Ok(out)
    }

    /// Copy with column `name` replaced (or appended). The result is
    /// untagged: it is new content.
    pub fn with_column(&self, name: &str, column: Column) -> Result<DataFrame> {
        if column.len() != self.row_count {
            return Err(Error::Schema(alloc::format!(
                "column {name:?} has {} rows, expected {}",
                column.len(),
                self.row_count
            )));
        }
        let mut out = self.clone();
        match out.names.iter().position(|n| n == name) {
            Some(i) => out.columns[i] = column.normalized(),
            None => {
                out.names.push(name.to_string());
                out.columns.push(column.normalized());
            }
        }
        out.tag = PartitionTag::Untagged;
        Ok(out)
    }

    /// New untagged frame holding `rows` in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> DataFrame {
        DataFrame {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            row_count: rows.len(),
            tag: PartitionTag::Untagged,
        }
    }

    /// Row-wise concatenation; schemas must match exactly. The result is
    /// untagged and unregistered.
    pub fn concat(&self, other: &DataFrame) -> Result<DataFrame> {
        if self.names != other.names {
            return Err(Error::Schema("cannot concatenate frames with different columns".into()));
        }
        let mut out = self.clone();
        for (col, extra) in out.columns.iter_mut().zip(&other.columns) {
            col.append(extra)?;
        }
        out.row_count += other.row_count;
        out.tag = PartitionTag::Untagged;
        Ok(out)
    }

    pub(crate) fn with_tag(mut self, tag: PartitionTag) -> DataFrame {
        self.tag = tag;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn frame() -> DataFrame {
        DataFrame::new(vec![
            ("a".into(), Column::Float(vec![Some(1.0), Some(2.0), Some(2.0)])),
            ("b".into(), Column::Categorical(vec![Some("x".into()), Some("y".into()), None])),
            ("c".into(), Column::Int(vec![Some(7), Some(7), Some(7)])),
        ])
        .unwrap()
    }

    #[test]
    fn int_and_float_encode_identically() {
        assert_eq!(canonical_encode(&Value::Int(3)), canonical_encode(&Value::Float(3.0)));
        assert_eq!(canonical_encode(&Value::Int(-(1 << 53))), canonical_encode(&Value::Float(-(2f64.powi(53)))));
        // i64::MAX is not exact in f64; it keeps its own encoding.
        assert_ne!(canonical_encode(&Value::Int(i64::MAX)), canonical_encode(&Value::Float(i64::MAX as f64)));
    }

    #[test]
    fn missing_and_nan_share_the_sentinel() {
        assert_eq!(canonical_encode(&Value::Missing), vec![0xFF]);
        assert_eq!(canonical_encode(&Value::Float(f64::NAN)), vec![0xFF]);
        let other_nan = f64::from_bits(0x7ff8_0000_0000_beef);
        assert!(other_nan.is_nan());
        assert_eq!(canonical_encode(&Value::Float(other_nan)), vec![0xFF]);
        assert_eq!(canonical_encode(&Value::Float(-f64::NAN)), vec![0xFF]);
    }

    #[test]
    fn text_is_length_prefixed() {
        assert_ne!(canonical_encode(&Value::Text("a".into())), canonical_encode(&Value::Text("ab".into())));
        // "a" + "b" must not collide with "ab" when concatenated into a digest.
        let mut split = canonical_encode(&Value::Text("a".into()));
        split.extend(canonical_encode(&Value::Text("b".into())));
        let mut joined = canonical_encode(&Value::Text("ab".into()));
        joined.extend(canonical_encode(&Value::Text("".into())));
        assert_ne!(split, joined);
    }

    #[test]
    fn bool_does_not_collide_with_int() {
        assert_ne!(canonical_encode(&Value::Bool(true)), canonical_encode(&Value::Int(1)));
    }

    #[test]
    fn fingerprint_is_deterministic_and_column_order_free() {
        let f = frame();
        assert_eq!(f.fingerprint(), f.fingerprint());
        let reordered = f.select_columns(&["c", "b", "a"]).unwrap();
        assert_eq!(reordered.fingerprint(), f.fingerprint());
    }

    #[test]
    fn row_swap_changes_exactly_the_differing_columns() {
        // Oracle: brute-force digest each column of the swapped frame and
        // compare against whether the two swapped cells differ.
        let f = frame();
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let mut order: Vec<usize> = (0..3).collect();
            order.swap(i, j);
            let swapped = f.take_rows(&order);
            let (before, after) = (f.fingerprint(), swapped.fingerprint());
            for name in f.column_names() {
                let col = f.column(name).unwrap();
                let differs = canonical_encode(&col.get(i)) != canonical_encode(&col.get(j));
                assert_eq!(before.column_digests[name] != after.column_digests[name], differs, "{name} {i}<->{j}");
            }
        }
    }

    #[test]
    fn select_keeps_digest_subset_and_tag() {
        let f = frame().with_tag(PartitionTag::Train);
        let sub = f.select_columns(&["a"]).unwrap();
        let fp = sub.fingerprint();
        assert_eq!(fp.column_digests.len(), 1);
        assert_eq!(fp.column_digests["a"], f.fingerprint().column_digests["a"]);
        assert_eq!(sub.tag(), PartitionTag::Train);
        assert!(fp.is_column_subset_of(&f.fingerprint()));
    }

    #[test]
    fn select_rejects_empty_unknown_and_duplicates() {
        let f = frame();
        assert!(matches!(f.select_columns::<&str>(&[]), Err(Error::Schema(_))));
        assert!(matches!(f.select_columns(&["zz"]), Err(Error::Schema(_))));
        assert!(matches!(f.select_columns(&["a", "a"]), Err(Error::Schema(_))));
    }

    #[test]
    fn construction_validates_schema() {
        let dup = DataFrame::new(vec![
            ("x".into(), Column::Int(vec![Some(1)])),
            ("x".into(), Column::Int(vec![Some(2)])),
        ]);
        assert!(matches!(dup, Err(Error::Schema(_))));
        let ragged = DataFrame::new(vec![
            ("x".into(), Column::Int(vec![Some(1)])),
            ("y".into(), Column::Int(vec![Some(2), Some(3)])),
        ]);
        assert!(matches!(ragged, Err(Error::Schema(_))));
        assert_eq!(frame().tag(), PartitionTag::Untagged);
    }

    #[test]
    fn coercing_int_column_to_float_keeps_fingerprint() {
        let ints = DataFrame::new(vec![("v".into(), Column::Int(vec![Some(1), None, Some(-4)]))]).unwrap();
        let floats = DataFrame::new(vec![("v".into(), Column::Float(vec![Some(1.0), Some(f64::NAN), Some(-4.0)]))])
            .unwrap();
        assert_eq!(ints.fingerprint(), floats.fingerprint());
    }

    #[test]
    fn concat_appends_rows() {
        let f = frame();
        let both = f.concat(&f).unwrap();
        assert_eq!(both.row_count(), 6);
        assert_eq!(both.value(4, "b"), Some(Value::Text("y".into())));
    }

    #[test]
    fn digest_roundtrips_through_hex() {
        let d = frame().fingerprint().summary();
        let back: Digest = Digest::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(
            &d.to_hex(),
        ))
        .unwrap();
        assert_eq!(d, back);
    }
}
