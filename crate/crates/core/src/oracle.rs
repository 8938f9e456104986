//! Brute-force nearest-neighbour distances over every non-self pair.
//! Quadratic by construction; meant for test-scale inputs.

use crate::distance::sq_ednorm_direct;
use crate::error::{DiscordError, Result};
use crate::series::{sort_discords, DiscordRecord, SubseqIndex, TimeSeries};
use crate::stats::init_stats;

/// `out[i]` (0-based) is the squared distance from subsequence `i` to its
/// nearest non-self match, `+inf` when it has none.
pub fn brute_force_nn(series: &TimeSeries, m: usize) -> Result<Vec<f64>> {
    series.check_length(m)?;
    let stats = init_stats(series, m)?;
    let t = series.values();
    let (mu, sigma) = (stats.mu(), stats.sigma());
    let count = series.subseq_count(m);
    let mut nn = vec![f64::INFINITY; count];
    for i in 0..count {
        for j in i + m..count {
            let d = sq_ednorm_direct(t, m, i, j, mu, sigma);
            if d < nn[i] {
                nn[i] = d;
            }
            if d < nn[j] {
                nn[j] = d;
            }
        }
    }
    Ok(nn)
}

/// Every subsequence with a finite nearest-neighbour distance, best first.
pub fn ranked(series: &TimeSeries, m: usize) -> Result<Vec<DiscordRecord>> {
    let nn = brute_force_nn(series, m)?;
    Ok(ranked_from_nn(&nn, m))
}

pub fn ranked_from_nn(nn: &[f64], m: usize) -> Vec<DiscordRecord> {
    let mut out: Vec<DiscordRecord> = nn
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .map(|(i, &d)| DiscordRecord::new(SubseqIndex::from_zero_based(i, m), d))
        .collect();
    sort_discords(&mut out);
    out
}

/// The `k` subsequences with the largest nearest-neighbour distance.
pub fn brute_force_topk(series: &TimeSeries, m: usize, k: usize) -> Result<Vec<DiscordRecord>> {
    series.check_length(m)?;
    let count = series.subseq_count(m);
    if k == 0 || k > count {
        return Err(DiscordError::CountOutOfRange { k, max: count });
    }
    let mut all = ranked(series, m)?;
    all.truncate(k);
    Ok(all)
}

/// `{ i : nn[i] >= r_sq }` with the oracle's distances.
pub fn range_discords(nn: &[f64], m: usize, r_sq: f64) -> Vec<DiscordRecord> {
    let mut out = ranked_from_nn(nn, m);
    out.retain(|r| r.nn_dist_sq >= r_sq);
    out
}
