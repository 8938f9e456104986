//! Shared mutable state of the parallel engine. Every mutation is monotone
//! (flags only go TRUE -> FALSE, distances only decrease) and atomic per
//! element, so the final contents do not depend on worker interleaving.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

/// Fixed-size bitmap with atomic clear.
#[derive(Debug)]
pub struct AtomicBitmap {
    words: Vec<AtomicU64>,
    len: usize,
}

impl AtomicBitmap {
    /// Bits in `set` start TRUE, everything else FALSE.
    pub fn new(len: usize, set: Range<usize>) -> Self {
        let words = (0..len.div_ceil(64))
            .map(|w| {
                let lo = w * 64;
                let mut bits = 0u64;
                for b in 0..64 {
                    if set.contains(&(lo + b)) && lo + b < len {
                        bits |= 1 << b;
                    }
                }
                AtomicU64::new(bits)
            })
            .collect();
        Self { words, len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let map = Self::new(bits.len(), 0..0);
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            map.words[i / 64].fetch_or(1 << (i % 64), Ordering::Relaxed);
        }
        map
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64].load(Ordering::Relaxed) >> (i % 64) & 1 == 1
    }

    pub fn clear(&self, i: usize) {
        self.words[i / 64].fetch_and(!(1u64 << (i % 64)), Ordering::Relaxed);
    }

    pub fn any_in(&self, range: Range<usize>) -> bool {
        range.into_iter().any(|i| self.get(i))
    }

    /// `self[i] &= other[i]` for every bit.
    pub fn and_assign(&self, other: &AtomicBitmap) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words) {
            a.fetch_and(b.load(Ordering::Relaxed), Ordering::Relaxed);
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words
            .iter()
            .map(|w| w.load(Ordering::Relaxed).count_ones() as usize)
            .sum()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// Vector of non-negative `f64` with atomic `min`.
///
/// Non-negative IEEE doubles order the same way as their bit patterns read
/// as `u64`, so `fetch_min` on the bits is a float minimum.
#[derive(Debug)]
pub struct AtomicMinF64 {
    slots: Vec<AtomicU64>,
}

impl AtomicMinF64 {
    pub fn new(len: usize, init: f64) -> Self {
        let bits = normalize(init).to_bits();
        Self {
            slots: (0..len).map(|_| AtomicU64::new(bits)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        f64::from_bits(self.slots[i].load(Ordering::Relaxed))
    }

    pub fn fetch_min(&self, i: usize, value: f64) {
        self.slots[i].fetch_min(normalize(value).to_bits(), Ordering::Relaxed);
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.slots.len()).map(|i| self.get(i)).collect()
    }
}

// -0.0 has the sign bit set and would compare as huge
fn normalize(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v
    }
}

/// Nearest neighbour found by a candidate's own segment worker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub dist_sq: f64,
    pub index: Option<usize>,
}

impl Default for Nearest {
    fn default() -> Self {
        Self {
            dist_sq: f64::INFINITY,
            index: None,
        }
    }
}

impl Nearest {
    #[inline]
    pub(crate) fn offer(&mut self, dist_sq: f64, index: usize) {
        if dist_sq < self.dist_sq {
            self.dist_sq = dist_sq;
            self.index = Some(index);
        }
    }
}

/// Candidate and neighbour bitmaps plus the nearest-neighbour distances,
/// sized to the padded candidate count. Padded slots start FALSE.
#[derive(Debug)]
pub struct SelectionState {
    pub cand: AtomicBitmap,
    pub neighbor: AtomicBitmap,
    pub nn_dist_sq: AtomicMinF64,
    /// Per-candidate nearest neighbour from the owning segment's scans.
    pub nearest: Vec<Nearest>,
    real: usize,
}

impl SelectionState {
    pub fn new(padded: usize, real: usize) -> Self {
        Self {
            cand: AtomicBitmap::new(padded, 0..real),
            neighbor: AtomicBitmap::new(padded, 0..real),
            nn_dist_sq: AtomicMinF64::new(padded, f64::INFINITY),
            nearest: vec![Nearest::default(); real],
            real,
        }
    }

    pub fn real_count(&self) -> usize {
        self.real
    }

    pub fn padded_count(&self) -> usize {
        self.cand.len()
    }

    /// 0-based indices still flagged as candidates.
    pub fn candidates(&self) -> Vec<usize> {
        (0..self.real).filter(|&i| self.cand.get(i)).collect()
    }
}
