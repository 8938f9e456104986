//! Discords of every length in `min_l..=max_l` with an adaptive threshold.
//!
//! The threshold `r` lives in unsquared distance units; the engine is
//! handed `r^2`. Lengths are processed in order because both the rolling
//! statistics and the threshold history carry over from one length to the
//! next.

use std::collections::BTreeMap;

use crate::error::{DiscordError, Result};
use crate::layout::{compute_layout, SegmentLayout};
use crate::pardrag::{ParDrag, DEFAULT_SEGLEN};
use crate::series::{DiscordRecord, MultiLengthDiscordSet, TimeSeries, MIN_SUBSEQ_LEN};
use crate::stats::{init_stats, RollingStats};

/// Threshold reductions allowed per length before giving up on it.
pub const MAX_RETRIES: usize = 100;

/// Relative step used when `sigma` is zero or `mu - 2 sigma` is not positive.
pub const RELATIVE_STEP: f64 = 0.01;

/// Number of trailing lengths the steady-phase rule looks at.
pub const HISTORY_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    /// The shortest length; starts from the largest possible distance.
    First { min_l: usize },
    /// The next four lengths; start just below the previous length's result.
    Warmup,
    /// Everything after; start from the spread of the last five results.
    Steady,
}

/// Minimal nearest-neighbour distance (unsquared) of each successful length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ThresholdHistory {
    nn_dist: Vec<f64>,
}

impl ThresholdHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values(values: &[f64]) -> Self {
        Self {
            nn_dist: values.to_vec(),
        }
    }

    pub fn push(&mut self, nn_dist: f64) {
        self.nn_dist.push(nn_dist);
    }

    pub fn len(&self) -> usize {
        self.nn_dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nn_dist.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.nn_dist.last().copied()
    }

    /// Mean and sample standard deviation of the last five entries.
    pub fn window_stats(&self) -> Option<(f64, f64)> {
        if self.nn_dist.len() < HISTORY_WINDOW {
            return None;
        }
        let w = &self.nn_dist[self.nn_dist.len() - HISTORY_WINDOW..];
        let k = w.len() as f64;
        let mean = w.iter().sum::<f64>() / k;
        let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
        Some((mean, var.sqrt()))
    }

    /// Phase for a length `offset` steps above `min_l`, falling back to an
    /// earlier phase when failed lengths left the history short.
    pub fn phase_for(&self, offset: usize, min_l: usize) -> Phase {
        if offset >= HISTORY_WINDOW && self.len() >= HISTORY_WINDOW {
            Phase::Steady
        } else if offset >= 1 && !self.is_empty() {
            Phase::Warmup
        } else {
            Phase::First { min_l }
        }
    }
}

/// Next threshold. `last_r` is the value just tried and is only read when
/// `failed` is set.
pub fn next_threshold(history: &ThresholdHistory, phase: Phase, last_r: f64, failed: bool) -> f64 {
    let r = match (phase, failed) {
        (Phase::First { min_l }, false) => 2.0 * (min_l as f64).sqrt(),
        (Phase::First { .. }, true) => 0.5 * last_r,
        (Phase::Warmup, false) => 0.99 * history.last().unwrap_or(0.0),
        (Phase::Warmup, true) => 0.99 * last_r,
        (Phase::Steady, false) => {
            let (mean, sd) = history.window_stats().unwrap_or((0.0, 0.0));
            let r = mean - 2.0 * sd;
            if r > 0.0 {
                r
            } else {
                RELATIVE_STEP * history.last().unwrap_or(0.0)
            }
        }
        (Phase::Steady, true) => {
            let (_, sd) = history.window_stats().unwrap_or((0.0, 0.0));
            last_r - sd.max(RELATIVE_STEP * last_r)
        }
    };
    r.max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MerlinConfig {
    pub min_l: usize,
    pub max_l: usize,
    pub top_k: usize,
    pub seglen: usize,
    pub workers: usize,
    pub max_retries: usize,
    /// Advance statistics by recurrence instead of recomputing per length.
    pub reuse_stats: bool,
}

impl MerlinConfig {
    pub fn new(min_l: usize, max_l: usize) -> Self {
        Self {
            min_l,
            max_l,
            top_k: 1,
            seglen: DEFAULT_SEGLEN,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            max_retries: MAX_RETRIES,
            reuse_stats: true,
        }
    }

    pub fn top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }

    pub fn seglen(mut self, seglen: usize) -> Self {
        self.seglen = seglen;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn reuse_stats(mut self, on: bool) -> Self {
        self.reuse_stats = on;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.min_l < MIN_SUBSEQ_LEN || self.min_l > self.max_l || 2 * self.max_l > n {
            return Err(DiscordError::InvalidRange {
                min_l: self.min_l,
                max_l: self.max_l,
                n,
            });
        }
        if self.top_k == 0 {
            return Err(DiscordError::Config("topK must be at least 1".into()));
        }
        if self.seglen == 0 || self.workers == 0 {
            return Err(DiscordError::Config("seglen and workers must be positive".into()));
        }
        Ok(())
    }

    /// Segment length used at length `m`: at least `2m` so that a segment
    /// always holds more than `m` subsequences, at most `n`.
    pub fn layout_for(&self, n: usize, m: usize) -> Result<SegmentLayout> {
        let seglen = self.seglen.max(2 * m).min(n);
        compute_layout(n, m, seglen)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MerlinOutcome {
    pub discords: MultiLengthDiscordSet,
    /// Lengths that produced no discord within the retry budget.
    pub failed: Vec<usize>,
    /// Threshold (unsquared) of the successful call at each length.
    pub thresholds: BTreeMap<usize, f64>,
    /// Engine invocations in total.
    pub calls: usize,
}

pub fn merlin(series: &TimeSeries, config: &MerlinConfig) -> Result<MerlinOutcome> {
    let n = series.len();
    config.validate(n)?;
    let engine = ParDrag::new(config.workers)?;
    let mut stats = init_stats(series, config.min_l)?;
    let mut history = ThresholdHistory::new();
    let mut out = MerlinOutcome::default();

    for m in config.min_l..=config.max_l {
        if m > config.min_l {
            if config.reuse_stats {
                stats.advance(series)?;
            } else {
                stats = init_stats(series, m)?;
            }
        }
        let layout = config.layout_for(n, m)?;
        match discover_length(series, &engine, &stats, &layout, config, &history, m, &mut out.calls)? {
            Some((r, records)) => {
                let min_nn = records.iter().map(|d| d.nn_dist()).fold(f64::INFINITY, f64::min);
                history.push(min_nn);
                out.thresholds.insert(m, r);
                out.discords.insert(m, records);
            }
            None => out.failed.push(m),
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn discover_length(
    series: &TimeSeries,
    engine: &ParDrag,
    stats: &RollingStats,
    layout: &SegmentLayout,
    config: &MerlinConfig,
    history: &ThresholdHistory,
    m: usize,
    calls: &mut usize,
) -> Result<Option<(f64, Vec<DiscordRecord>)>> {
    let phase = history.phase_for(m - config.min_l, config.min_l);
    let mut r = next_threshold(history, phase, f64::NAN, false);
    for attempt in 0..=config.max_retries {
        let r_sq = if r > 0.0 { r * r } else { 0.0 };
        let mut found = engine.run(series, r_sq, stats, layout)?;
        *calls += 1;
        if found.len() >= config.top_k || (r_sq == 0.0 && !found.is_empty()) {
            found.truncate(config.top_k);
            return Ok(Some((r, found)));
        }
        if r_sq == 0.0 || attempt == config.max_retries {
            break;
        }
        r = next_threshold(history, phase, r, true);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_phase_constants() {
        let h = ThresholdHistory::new();
        let first = Phase::First { min_l: 64 };
        assert_eq!(next_threshold(&h, first, f64::NAN, false), 16.0);
        assert_eq!(next_threshold(&h, first, 16.0, true), 8.0);
    }

    #[test]
    fn warmup_constants() {
        let h = ThresholdHistory::from_values(&[10.0]);
        assert!((next_threshold(&h, Phase::Warmup, f64::NAN, false) - 9.9).abs() < 1e-12);
        assert!((next_threshold(&h, Phase::Warmup, 9.9, true) - 9.801).abs() < 1e-12);
    }

    #[test]
    fn steady_constants() {
        // mean 4, sample sd 0.5
        let d = 0.5 / 2.5f64.sqrt();
        let h = ThresholdHistory::from_values(&[9.0, 4.0 - 2.0 * d, 4.0 - d, 4.0, 4.0 + d, 4.0 + 2.0 * d]);
        let (mean, sd) = h.window_stats().unwrap();
        assert!((mean - 4.0).abs() < 1e-12 && (sd - 0.5).abs() < 1e-12);
        assert!((next_threshold(&h, Phase::Steady, f64::NAN, false) - 3.0).abs() < 1e-12);
        assert!((next_threshold(&h, Phase::Steady, 3.0, true) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn zero_spread_history() {
        let h = ThresholdHistory::from_values(&[3.0; 5]);
        assert_eq!(next_threshold(&h, Phase::Steady, f64::NAN, false), 3.0);
        assert!((next_threshold(&h, Phase::Steady, 3.0, true) - 2.97).abs() < 1e-12);
    }

    #[test]
    fn non_positive_steady_start_is_clamped() {
        let h = ThresholdHistory::from_values(&[1.0, 9.0, 1.0, 9.0, 2.0]);
        assert!(h.window_stats().unwrap().0 - 2.0 * h.window_stats().unwrap().1 <= 0.0);
        assert!((next_threshold(&h, Phase::Steady, f64::NAN, false) - 0.02).abs() < 1e-15);
        assert_eq!(next_threshold(&h, Phase::Steady, 0.001, true), 0.0);
    }

    #[test]
    fn phase_selection() {
        let mut h = ThresholdHistory::new();
        assert_eq!(h.phase_for(0, 8), Phase::First { min_l: 8 });
        assert_eq!(h.phase_for(3, 8), Phase::First { min_l: 8 });
        h.push(1.0);
        assert_eq!(h.phase_for(3, 8), Phase::Warmup);
        assert_eq!(h.phase_for(7, 8), Phase::Warmup);
        for _ in 0..4 {
            h.push(1.0);
        }
        assert_eq!(h.phase_for(5, 8), Phase::Steady);
    }

    #[test]
    fn rejects_bad_ranges() {
        let s = TimeSeries::new((0..100).map(|i| (i as f64).sin()).collect()).unwrap();
        assert!(merlin(&s, &MerlinConfig::new(10, 9)).is_err());
        assert!(merlin(&s, &MerlinConfig::new(2, 9)).is_err());
        assert!(merlin(&s, &MerlinConfig::new(10, 51)).is_err());
        assert!(merlin(&s, &MerlinConfig::new(10, 12).top_k(0)).is_err());
    }

    #[test]
    fn layout_grows_with_length() {
        let c = MerlinConfig::new(8, 600).seglen(512);
        assert_eq!(c.layout_for(10_000, 8).unwrap().seglen, 512);
        assert_eq!(c.layout_for(10_000, 600).unwrap().seglen, 1200);
        assert_eq!(c.layout_for(300, 8).unwrap().seglen, 300);
    }
}
