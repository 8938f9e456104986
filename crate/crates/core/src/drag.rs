//! Serial two-phase range-discord search: candidate selection followed by
//! refinement with early abandoning. Used as the reference for the
//! segment-parallel engine.

use crate::distance::{early_abandon_sq_ed, sq_ed, sq_ednorm_direct, EarlyAbandon};
use crate::error::Result;
use crate::series::{non_self_match, sort_discords, DiscordRecord, SubseqIndex, TimeSeries};
use crate::stats::{init_stats, RollingStats, SIGMA_EPS};

/// Half-width of the band around `r^2` inside which a kernel's distance is
/// re-evaluated with [`sq_ednorm_direct`] before deciding.
pub fn boundary_band(m: usize) -> f64 {
    1e-7 * m as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub index: SubseqIndex,
    /// Smallest squared distance seen so far (`+inf` if none).
    pub best_sq: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    pub entries: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, start: usize) -> bool {
        self.entries.iter().any(|c| c.index.start == start)
    }
}

pub fn drag_select(series: &TimeSeries, m: usize, r_sq: f64) -> Result<CandidateSet> {
    series.check_length(m)?;
    let stats = init_stats(series, m)?;
    Ok(select_with_stats(series, m, r_sq, &stats))
}

pub(crate) fn select_with_stats(series: &TimeSeries, m: usize, r_sq: f64, stats: &RollingStats) -> CandidateSet {
    let t = series.values();
    let (mu, sigma) = (stats.mu(), stats.sigma());
    let count = series.subseq_count(m);

    let mut cands: Vec<(usize, f64)> = vec![(0, f64::INFINITY)];
    for s in 1..count {
        let mut is_cand = true;
        let mut s_best = f64::INFINITY;
        cands.retain_mut(|(c, best)| {
            if !non_self_match(*c, s, m) {
                return true;
            }
            let d = sq_ednorm_direct(t, m, *c, s, mu, sigma);
            if d < r_sq {
                is_cand = false;
                return false;
            }
            *best = best.min(d);
            s_best = s_best.min(d);
            true
        });
        if is_cand {
            cands.push((s, s_best));
        }
    }
    CandidateSet {
        entries: cands
            .into_iter()
            .map(|(c, best_sq)| Candidate {
                index: SubseqIndex::from_zero_based(c, m),
                best_sq,
            })
            .collect(),
    }
}

pub fn drag_refine(series: &TimeSeries, m: usize, r_sq: f64, cands: &CandidateSet) -> Result<Vec<DiscordRecord>> {
    series.check_length(m)?;
    let stats = init_stats(series, m)?;
    Ok(refine_with_stats(series, m, r_sq, cands, &stats, true))
}

/// Refinement with early abandoning switched on or off.
pub fn drag_refine_with(
    series: &TimeSeries,
    m: usize,
    r_sq: f64,
    cands: &CandidateSet,
    early_abandon: bool,
) -> Result<Vec<DiscordRecord>> {
    series.check_length(m)?;
    let stats = init_stats(series, m)?;
    Ok(refine_with_stats(series, m, r_sq, cands, &stats, early_abandon))
}

fn znorm_with(x: &[f64], mu: f64, sigma: f64) -> Vec<f64> {
    x.iter().map(|v| (v - mu) / sigma).collect()
}

pub(crate) fn refine_with_stats(
    series: &TimeSeries,
    m: usize,
    r_sq: f64,
    cands: &CandidateSet,
    stats: &RollingStats,
    early_abandon: bool,
) -> Vec<DiscordRecord> {
    let t = series.values();
    let (mu, sigma) = (stats.mu(), stats.sigma());
    let count = series.subseq_count(m);
    let band = boundary_band(m);

    struct Live {
        pos: usize,
        z: Option<Vec<f64>>,
        best: f64,
        nearest: Option<usize>,
        alive: bool,
    }
    let mut live: Vec<Live> = cands
        .entries
        .iter()
        .map(|c| {
            let pos = c.index.zero_based();
            let z = (sigma[pos] >= SIGMA_EPS).then(|| znorm_with(&t[pos..pos + m], mu[pos], sigma[pos]));
            Live {
                pos,
                z,
                best: f64::INFINITY,
                nearest: None,
                alive: true,
            }
        })
        .collect();

    for s in 0..count {
        let zs = (sigma[s] >= SIGMA_EPS).then(|| znorm_with(&t[s..s + m], mu[s], sigma[s]));
        for c in live.iter_mut().filter(|c| c.alive) {
            if !non_self_match(c.pos, s, m) {
                continue;
            }
            let d = match (&c.z, &zs) {
                (Some(zc), Some(zs)) if early_abandon => {
                    match early_abandon_sq_ed(zc, zs, c.best + 2.0 * band).expect("equal lengths") {
                        EarlyAbandon::Abandoned => continue,
                        EarlyAbandon::Value(v) => v,
                    }
                }
                (Some(zc), Some(zs)) => sq_ed(zc, zs).expect("equal lengths"),
                // constant subsequences take the fixed convention values
                _ => sq_ednorm_direct(t, m, c.pos, s, mu, sigma),
            };
            let d = if (d - r_sq).abs() <= band {
                sq_ednorm_direct(t, m, c.pos, s, mu, sigma)
            } else {
                d
            };
            if d < r_sq {
                c.alive = false;
                continue;
            }
            if d < c.best {
                c.best = d;
                c.nearest = Some(s);
            }
        }
    }

    let mut out: Vec<DiscordRecord> = live
        .into_iter()
        .filter(|c| c.alive)
        .filter_map(|c| {
            let j = c.nearest?;
            let d = sq_ednorm_direct(t, m, c.pos, j, mu, sigma);
            (d >= r_sq).then(|| DiscordRecord::new(SubseqIndex::from_zero_based(c.pos, m), d))
        })
        .collect();
    sort_discords(&mut out);
    out
}

/// Both phases.
pub fn drag(series: &TimeSeries, m: usize, r_sq: f64) -> Result<Vec<DiscordRecord>> {
    series.check_length(m)?;
    let stats = init_stats(series, m)?;
    Ok(drag_with_stats(series, m, r_sq, &stats))
}

pub fn drag_with_stats(series: &TimeSeries, m: usize, r_sq: f64, stats: &RollingStats) -> Vec<DiscordRecord> {
    let cands = select_with_stats(series, m, r_sq, stats);
    refine_with_stats(series, m, r_sq, &cands, stats, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_nn;

    fn wave(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 * 0.7).sin() + 0.3 * (i as f64 * 0.13).cos()).collect()
    }

    #[test]
    fn zero_threshold_keeps_everything() {
        let s = TimeSeries::new(wave(60)).unwrap();
        let c = drag_select(&s, 5, 0.0).unwrap();
        assert_eq!(c.len(), 56);
        let out = drag_refine(&s, 5, 0.0, &c).unwrap();
        assert_eq!(out.len(), 56);
        let nn = brute_force_nn(&s, 5).unwrap();
        for r in &out {
            let want = nn[r.index.zero_based()];
            assert!((r.nn_dist_sq - want).abs() <= 1e-7 * want.max(1.0));
        }
    }

    #[test]
    fn huge_threshold_hand_trace() {
        // r^2 above 4m: every non-self pair prunes. For n = 12, m = 3
        // (0-based starts 0..=9): {0} -> {0,1} -> {0,1,2}; s=3 drops 0 and is
        // rejected; s=4 drops 1; s=5 drops 2 leaving {}; s=6 joins, 7 and 8
        // overlap it and join; s=9 drops 6. Final {7, 8}, i.e. starts 8 and 9.
        let s = TimeSeries::new(wave(12)).unwrap();
        let c = drag_select(&s, 3, 100.0).unwrap();
        let starts: Vec<usize> = c.entries.iter().map(|e| e.index.start).collect();
        assert_eq!(starts, vec![8, 9]);
        assert!(drag_refine(&s, 3, 100.0, &c).unwrap().is_empty());
    }

    #[test]
    fn planted_spike_is_selected() {
        let mut v = wave(300);
        v[150] += 6.0;
        let s = TimeSeries::new(v).unwrap();
        let m = 12;
        let nn = brute_force_nn(&s, m).unwrap();
        let (top, top_d) = nn
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_finite())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, d)| (i, *d))
            .unwrap();
        assert!((139..=150).contains(&top));
        let c = drag_select(&s, m, top_d * 0.999).unwrap();
        assert!(c.contains(top + 1));
        let out = drag_refine(&s, m, top_d * 0.999, &c).unwrap();
        assert_eq!(out[0].index.zero_based(), top);
    }

    #[test]
    fn early_abandon_does_not_change_results() {
        let s = TimeSeries::new(wave(400)).unwrap();
        let m = 16;
        let nn = brute_force_nn(&s, m).unwrap();
        let mut sorted: Vec<f64> = nn.iter().copied().filter(|d| d.is_finite()).collect();
        sorted.sort_by(f64::total_cmp);
        let r_sq = sorted[sorted.len() / 2];
        let c = drag_select(&s, m, r_sq).unwrap();
        let a = drag_refine_with(&s, m, r_sq, &c, true).unwrap();
        let b = drag_refine_with(&s, m, r_sq, &c, false).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn candidate_order_does_not_matter() {
        let s = TimeSeries::new(wave(200)).unwrap();
        let m = 8;
        let mut c = drag_select(&s, m, 1.0).unwrap();
        let a = drag_refine(&s, m, 1.0, &c).unwrap();
        c.entries.reverse();
        let b = drag_refine(&s, m, 1.0, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_large_threshold_is_empty() {
        let s = TimeSeries::new(wave(200)).unwrap();
        assert!(drag(&s, 8, 4.0 * 8.0 + 1e-6).unwrap().is_empty());
    }
}
