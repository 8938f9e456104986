//! Segment-parallel range-discord search.
//!
//! The subsequence index space is cut into segments of `seg_n` local
//! candidates (see [`SegmentLayout`]). In the selection phase each segment
//! worker scans chunks of subsequences to its right, in the refinement
//! phase chunks to its left. Dot products inside a chunk are advanced with
//! the O(1) diagonal recurrence; only the first row and first column of a
//! chunk are computed directly.
//!
//! Cross-segment writes go to [`SelectionState`] and are all monotone.

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::distance::{fill_dot_products, sq_ednorm_direct, sq_ednorm_from_dot, step_dot_col};
use crate::drag::boundary_band;
use crate::error::{DiscordError, Result};
use crate::layout::{compute_layout, SegmentLayout};
use crate::series::{sort_discords, DiscordRecord, SubseqIndex, TimeSeries};
use crate::state::{Nearest, SelectionState};
use crate::stats::{init_stats, RollingStats, SIGMA_EPS};

/// Default number of elements per segment.
pub const DEFAULT_SEGLEN: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Right,
    Left,
}

/// Worker pool plus engine switches. Reuse one across calls.
pub struct ParDrag {
    pool: ThreadPool,
    workers: usize,
    early_exit: bool,
}

impl std::fmt::Debug for ParDrag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParDrag")
            .field("workers", &self.workers)
            .field("early_exit", &self.early_exit)
            .finish()
    }
}

impl ParDrag {
    pub fn new(workers: usize) -> Result<Self> {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| DiscordError::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            pool,
            workers,
            early_exit: true,
        })
    }

    /// Turns the "all local candidates cleared" break on or off.
    pub fn with_early_exit(mut self, on: bool) -> Self {
        self.early_exit = on;
        self
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn select(
        &self,
        series: &TimeSeries,
        r_sq: f64,
        stats: &RollingStats,
        layout: &SegmentLayout,
    ) -> Result<SelectionState> {
        let ctx = Kernel::new(series, r_sq, stats, layout)?;
        let state = SelectionState::new(layout.padded_count(), ctx.count);
        let early_exit = self.early_exit;
        let parts: Vec<Vec<Nearest>> = self.pool.install(|| {
            (0..layout.num_seg)
                .into_par_iter()
                .map(|s| {
                    let range = layout.segment_range(s);
                    let mut alive = vec![true; range.len()];
                    let mut nearest = vec![Nearest::default(); range.len()];
                    ctx.scan(s, Direction::Right, &mut alive, &mut nearest, &state, early_exit);
                    nearest
                })
                .collect()
        });
        let mut state = state;
        for (s, part) in parts.into_iter().enumerate() {
            state.nearest[layout.segment_range(s)].copy_from_slice(&part);
        }
        Ok(state)
    }

    pub fn refine(
        &self,
        series: &TimeSeries,
        r_sq: f64,
        stats: &RollingStats,
        layout: &SegmentLayout,
        state: &mut SelectionState,
    ) -> Result<Vec<DiscordRecord>> {
        let ctx = Kernel::new(series, r_sq, stats, layout)?;
        if state.real_count() != ctx.count || state.padded_count() != layout.padded_count() {
            return Err(DiscordError::LengthMismatch(state.real_count(), ctx.count));
        }
        let early_exit = self.early_exit;
        let active: Vec<usize> = (0..layout.num_seg)
            .filter(|&s| state.cand.any_in(layout.segment_range(s)))
            .collect();
        let shared: &SelectionState = state;
        let parts: Vec<(usize, Vec<Nearest>)> = self.pool.install(|| {
            active
                .par_iter()
                .map(|&s| {
                    let range = layout.segment_range(s);
                    let mut alive: Vec<bool> = range.clone().map(|i| shared.cand.get(i)).collect();
                    let mut nearest = shared.nearest[range].to_vec();
                    ctx.scan(s, Direction::Left, &mut alive, &mut nearest, shared, early_exit);
                    (s, nearest)
                })
                .collect()
        });
        for (s, part) in parts {
            state.nearest[layout.segment_range(s)].copy_from_slice(&part);
        }
        Ok(ctx.collect(state))
    }

    /// Selection, bitmap conjunction and refinement for one length.
    pub fn run(
        &self,
        series: &TimeSeries,
        r_sq: f64,
        stats: &RollingStats,
        layout: &SegmentLayout,
    ) -> Result<Vec<DiscordRecord>> {
        let mut state = self.select(series, r_sq, stats, layout)?;
        conjoin_bitmaps(&state);
        self.refine(series, r_sq, stats, layout, &mut state)
    }
}

/// `cand[i] <- cand[i] AND neighbor[i]`.
pub fn conjoin_bitmaps(state: &SelectionState) {
    state.cand.and_assign(&state.neighbor);
}

pub fn par_select(
    series: &TimeSeries,
    r_sq: f64,
    stats: &RollingStats,
    layout: &SegmentLayout,
    workers: usize,
) -> Result<SelectionState> {
    ParDrag::new(workers)?.select(series, r_sq, stats, layout)
}

pub fn par_refine(
    series: &TimeSeries,
    r_sq: f64,
    stats: &RollingStats,
    layout: &SegmentLayout,
    state: &mut SelectionState,
    workers: usize,
) -> Result<Vec<DiscordRecord>> {
    ParDrag::new(workers)?.refine(series, r_sq, stats, layout, state)
}

/// Range discords of length `m` at squared threshold `r_sq`.
pub fn pardrag(series: &TimeSeries, m: usize, r_sq: f64, seglen: usize, workers: usize) -> Result<Vec<DiscordRecord>> {
    let layout = compute_layout(series.len(), m, seglen)?;
    let stats = init_stats(series, m)?;
    ParDrag::new(workers)?.run(series, r_sq, &stats, &layout)
}

/// Read-only inputs shared by all segment workers of one call.
struct Kernel<'a> {
    t: &'a [f64],
    m: usize,
    mu: &'a [f64],
    sigma: &'a [f64],
    /// `1/sigma`, or 0 for constant subsequences.
    inv: Vec<f64>,
    /// `mu/sigma`, or 0 for constant subsequences.
    mu_inv: Vec<f64>,
    r_sq: f64,
    band: f64,
    seg_n: usize,
    count: usize,
}

impl<'a> Kernel<'a> {
    fn new(series: &'a TimeSeries, r_sq: f64, stats: &'a RollingStats, layout: &SegmentLayout) -> Result<Self> {
        let m = layout.m;
        if stats.window() != m || layout.n != series.len() {
            return Err(DiscordError::InvalidLength { m: stats.window(), n: series.len() });
        }
        series.check_length(m)?;
        let count = series.subseq_count(m);
        let (mu, sigma) = (stats.mu(), stats.sigma());
        let (inv, mu_inv) = mu
            .iter()
            .zip(sigma)
            .map(|(&u, &s)| if s < SIGMA_EPS { (0.0, 0.0) } else { (1.0 / s, u / s) })
            .unzip();
        Ok(Self {
            t: series.values(),
            m,
            mu,
            sigma,
            inv,
            mu_inv,
            r_sq: r_sq.max(0.0),
            band: boundary_band(m),
            seg_n: layout.seg_n,
            count,
        })
    }

    #[inline]
    fn fast_dist(&self, dot: f64, a: usize, b: usize) -> f64 {
        let (ia, ib) = (self.inv[a], self.inv[b]);
        if ia == 0.0 || ib == 0.0 {
            return sq_ednorm_from_dot(dot, self.m, self.mu[a], self.mu[b], self.sigma[a], self.sigma[b]);
        }
        let mf = self.m as f64;
        (2.0 * (mf - (dot * ia * ib - mf * self.mu_inv[a] * self.mu_inv[b]))).clamp(0.0, 4.0 * mf)
    }

    /// Returns `(pruned, distance)`; near the threshold the distance is
    /// recomputed with a direct dot product.
    #[inline]
    fn judge(&self, d: f64, a: usize, b: usize) -> (bool, f64) {
        if d < self.r_sq - self.band {
            (true, d)
        } else if d <= self.r_sq + self.band {
            let d = sq_ednorm_direct(self.t, self.m, a, b, self.mu, self.sigma);
            (d < self.r_sq, d)
        } else {
            (false, d)
        }
    }

    /// Chunks as `(first subsequence, subsequence count)`, nearest first.
    fn chunks(&self, seg_start: usize, lanes: usize, dir: Direction) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        match dir {
            Direction::Right => {
                let mut p = seg_start + self.m;
                while p < self.count {
                    let len = self.seg_n.min(self.count - p);
                    out.push((p, len));
                    p += self.seg_n;
                }
            }
            Direction::Left => {
                let mut hi = (seg_start + lanes).saturating_sub(self.m);
                while hi > 0 {
                    let lo = hi.saturating_sub(self.seg_n);
                    out.push((lo, hi - lo));
                    hi = lo;
                }
            }
        }
        out
    }

    /// One segment worker. `alive` and `nearest` are the worker's private
    /// copies for its lanes; shared effects go through `state`.
    fn scan(
        &self,
        s: usize,
        dir: Direction,
        alive: &mut [bool],
        nearest: &mut [Nearest],
        state: &SelectionState,
        early_exit: bool,
    ) {
        let m = self.m;
        let lanes = alive.len();
        let seg_start = s * self.seg_n;
        let seg = &self.t[seg_start..seg_start + lanes + m - 1];
        let mut alive_count = alive.iter().filter(|a| **a).count();
        let mark_neighbors = dir == Direction::Right;
        let mut row = vec![0.0; self.seg_n];
        let mut col = vec![0.0; lanes];

        'chunks: for (start, len) in self.chunks(seg_start, lanes, dir) {
            if early_exit && alive_count == 0 {
                break;
            }
            let chunk = &self.t[start..start + len + m - 1];
            fill_dot_products(&seg[..m], chunk, &mut row[..len]);
            fill_dot_products(&chunk[..m], seg, &mut col);
            for k in 0..len {
                if k > 0 {
                    step_dot_col(&mut col, row[k], seg, chunk, k, m);
                }
                let p = start + k;
                // lanes whose subsequence does not overlap p
                let (lo, hi) = match dir {
                    Direction::Right => (0, (p + 1 - seg_start - m).min(lanes)),
                    Direction::Left => ((p + m).saturating_sub(seg_start), lanes),
                };
                let mut sub_min = f64::INFINITY;
                let mut hit = false;
                for tid in lo..hi {
                    if !mark_neighbors && !alive[tid] {
                        continue;
                    }
                    let c = seg_start + tid;
                    let (pruned, d) = self.judge(self.fast_dist(col[tid], c, p), c, p);
                    if pruned {
                        hit = true;
                        if alive[tid] {
                            alive[tid] = false;
                            alive_count -= 1;
                            state.cand.clear(c);
                        }
                    } else {
                        nearest[tid].offer(d, p);
                        sub_min = sub_min.min(d);
                    }
                }
                if hit && mark_neighbors {
                    state.neighbor.clear(p);
                }
                if sub_min.is_finite() {
                    state.nn_dist_sq.fetch_min(p, sub_min);
                }
                if early_exit && alive_count == 0 {
                    break 'chunks;
                }
            }
        }

        for (tid, near) in nearest.iter().enumerate() {
            if near.index.is_some() {
                state.nn_dist_sq.fetch_min(seg_start + tid, near.dist_sq);
            }
        }
    }

    /// Surviving candidates with their nearest-neighbour distance
    /// recomputed directly.
    fn collect(&self, state: &SelectionState) -> Vec<DiscordRecord> {
        let mut out: Vec<DiscordRecord> = (0..self.count)
            .filter(|&c| state.cand.get(c))
            .filter_map(|c| {
                let j = state.nearest[c].index?;
                let d = sq_ednorm_direct(self.t, self.m, c, j, self.mu, self.sigma);
                (d >= self.r_sq).then(|| DiscordRecord::new(SubseqIndex::from_zero_based(c, self.m), d))
            })
            .collect();
        sort_discords(&mut out);
        out
    }
}
