//! Domain types shared by every engine: the series itself, 1-based
//! subsequence indices, discord records and per-length discord sets.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{DiscordError, Result};

/// Smallest subsequence length the distance definitions accept.
pub const MIN_SUBSEQ_LEN: usize = 3;

/// A real-valued series, optionally followed by dummy padding.
///
/// Dummy positions hold `+inf` and are never read by any kernel: every
/// subsequence that would overlap them is excluded up front.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    n: usize,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_SUBSEQ_LEN {
            return Err(DiscordError::SeriesTooShort(values.len()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DiscordError::NonFinite(pos + 1));
        }
        let n = values.len();
        Ok(Self { values, n })
    }

    /// Number of real (non-dummy) elements.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn pad_count(&self) -> usize {
        self.values.len() - self.n
    }

    /// The real region, without padding.
    pub fn values(&self) -> &[f64] {
        &self.values[..self.n]
    }

    /// Every stored element including dummies.
    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    /// `pos` is 0-based.
    pub fn is_dummy(&self, pos: usize) -> bool {
        pos >= self.n && pos < self.values.len()
    }

    /// Copy of the series with exactly `pad` dummy elements on the right.
    pub fn with_padding(&self, pad: usize) -> Self {
        let mut values = self.values[..self.n].to_vec();
        values.resize(self.n + pad, f64::INFINITY);
        Self { values, n: self.n }
    }

    /// Number of subsequences of length `m` over the real region.
    pub fn subseq_count(&self, m: usize) -> usize {
        (self.n + 1).saturating_sub(m)
    }

    /// Validates `3 <= m <= n - 2`.
    pub fn check_length(&self, m: usize) -> Result<()> {
        if m < MIN_SUBSEQ_LEN || m + 2 > self.n {
            return Err(DiscordError::InvalidLength { m, n: self.n });
        }
        Ok(())
    }

    /// Subsequence starting at 1-based position `i`.
    pub fn subsequence(&self, idx: SubseqIndex) -> &[f64] {
        let start = idx.start - 1;
        &self.values[start..start + idx.len]
    }
}

/// 1-based start position and length of a subsequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubseqIndex {
    pub start: usize,
    pub len: usize,
}

impl SubseqIndex {
    pub fn new(start: usize, len: usize, n: usize) -> Result<Self> {
        if len < MIN_SUBSEQ_LEN || 2 * len > n || start == 0 || start + len > n + 1 {
            return Err(DiscordError::InvalidLength { m: len, n });
        }
        Ok(Self { start, len })
    }

    pub(crate) fn from_zero_based(pos: usize, len: usize) -> Self {
        Self { start: pos + 1, len }
    }

    pub fn zero_based(&self) -> usize {
        self.start - 1
    }
}

/// Two same-length subsequences are a non-self match when they do not overlap.
pub fn non_self_match(i: usize, j: usize, m: usize) -> bool {
    i.abs_diff(j) >= m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordRecord {
    pub index: SubseqIndex,
    /// Squared z-normalized distance to the nearest non-self match.
    pub nn_dist_sq: f64,
}

impl DiscordRecord {
    pub fn new(index: SubseqIndex, nn_dist_sq: f64) -> Self {
        Self { index, nn_dist_sq }
    }

    pub fn nn_dist(&self) -> f64 {
        self.nn_dist_sq.sqrt()
    }

    pub fn start(&self) -> usize {
        self.index.start
    }

    pub fn length(&self) -> usize {
        self.index.len
    }
}

/// Largest distance first, lower start index on ties.
pub fn discord_order(a: &DiscordRecord, b: &DiscordRecord) -> Ordering {
    b.nn_dist_sq
        .total_cmp(&a.nn_dist_sq)
        .then(a.index.start.cmp(&b.index.start))
}

pub fn sort_discords(records: &mut [DiscordRecord]) {
    records.sort_by(discord_order);
}

/// Discords keyed by length, each list sorted by [`discord_order`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiLengthDiscordSet {
    per_length: BTreeMap<usize, Vec<DiscordRecord>>,
}

impl MultiLengthDiscordSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces whatever was stored for length `m`.
    pub fn insert(&mut self, m: usize, mut records: Vec<DiscordRecord>) {
        sort_discords(&mut records);
        self.per_length.insert(m, records);
    }

    pub fn push(&mut self, record: DiscordRecord) {
        let list = self.per_length.entry(record.length()).or_default();
        let pos = list
            .binary_search_by(|probe| discord_order(probe, &record))
            .unwrap_or_else(|e| e);
        list.insert(pos, record);
    }

    pub fn get(&self, m: usize) -> Option<&[DiscordRecord]> {
        self.per_length.get(&m).map(Vec::as_slice)
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_length.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[DiscordRecord])> {
        self.per_length.iter().map(|(m, v)| (*m, v.as_slice()))
    }

    pub fn records(&self) -> impl Iterator<Item = &DiscordRecord> {
        self.per_length.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.per_length.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_length(&self) -> Option<usize> {
        self.per_length.keys().next().copied()
    }

    pub fn max_length(&self) -> Option<usize> {
        self.per_length.keys().next_back().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_self_match_examples() {
        assert!(!non_self_match(1, 1, 5));
        assert!(non_self_match(1, 6, 5));
        assert!(!non_self_match(3, 7, 5));
        assert!(non_self_match(7, 2, 5));
    }

    #[test]
    fn rejects_short_or_non_finite() {
        assert!(matches!(
            TimeSeries::new(vec![1.0, 2.0]),
            Err(DiscordError::SeriesTooShort(2))
        ));
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN, 2.0]),
            Err(DiscordError::NonFinite(2))
        ));
    }

    #[test]
    fn padding_is_sentinel_marked() {
        let ts = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let padded = ts.with_padding(3);
        assert_eq!(padded.len(), 4);
        assert_eq!(padded.pad_count(), 3);
        assert_eq!(padded.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(!padded.is_dummy(3));
        assert!(padded.is_dummy(4) && padded.is_dummy(6));
        assert!(padded.raw()[4..].iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn subseq_index_bounds() {
        assert!(SubseqIndex::new(1, 5, 10).is_ok());
        assert!(SubseqIndex::new(6, 5, 10).is_ok());
        assert!(SubseqIndex::new(7, 5, 10).is_err());
        assert!(SubseqIndex::new(0, 5, 10).is_err());
        assert!(SubseqIndex::new(1, 6, 10).is_err());
        assert!(SubseqIndex::new(1, 2, 10).is_err());
    }

    #[test]
    fn set_order_is_distance_desc_then_index() {
        let mut set = MultiLengthDiscordSet::new();
        let rec = |i, d| DiscordRecord::new(SubseqIndex { start: i, len: 4 }, d);
        set.insert(4, vec![rec(9, 1.0), rec(3, 2.0), rec(2, 1.0)]);
        set.push(rec(1, 1.0));
        let starts: Vec<_> = set.get(4).unwrap().iter().map(|r| r.start()).collect();
        assert_eq!(starts, vec![3, 1, 2, 9]);
        assert_eq!(set.len(), 4);
    }
}
