//! Per-start-index means and standard deviations for the current length.
//!
//! Lengths are visited consecutively, so after the initial O(n) pass every
//! further length is reached by the O(1)-per-index recurrence
//!
//! ```text
//! mu'     = (m*mu + t[i+m]) / (m+1)
//! sigma'^2 = m/(m+1) * (sigma^2 + (mu - t[i+m])^2 / (m+1))
//! ```

use rayon::prelude::*;

use crate::error::{DiscordError, Result};
use crate::series::TimeSeries;

/// Below this a subsequence is treated as constant.
pub const SIGMA_EPS: f64 = 1e-12;

/// Sliding sums are recomputed from scratch this often.
const REFRESH_EVERY: usize = 1024;

/// Parallel per-index update kicks in above this many entries.
const PAR_THRESHOLD: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq)]
pub struct RollingStats {
    m: usize,
    n: usize,
    mu: Vec<f64>,
    var: Vec<f64>,
    sigma: Vec<f64>,
}

impl RollingStats {
    /// Current window length `m`.
    pub fn window(&self) -> usize {
        self.m
    }

    /// Number of meaningful entries, `n - m + 1`.
    pub fn valid_count(&self) -> usize {
        self.n - self.m + 1
    }

    /// Means of the valid prefix (0-based start index).
    pub fn mu(&self) -> &[f64] {
        &self.mu[..self.valid_count()]
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma[..self.valid_count()]
    }

    /// Full backing vectors; entries past `valid_count` are stale.
    pub fn raw_mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn raw_sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Moves to length `m + 1` in place.
    pub fn advance(&mut self, series: &TimeSeries) -> Result<()> {
        if series.len() != self.n {
            return Err(DiscordError::LengthMismatch(series.len(), self.n));
        }
        let m = self.m;
        if m + 1 > self.n {
            return Err(DiscordError::CannotAdvance { m, n: self.n });
        }
        let t = series.values();
        let valid = self.n - m;
        let mf = m as f64;
        let m1 = mf + 1.0;
        let step = |i: usize, mu: &mut f64, var: &mut f64, sigma: &mut f64| {
            let x = t[i + m];
            if *var == 0.0 && x == *mu {
                return;
            }
            let d = *mu - x;
            *var = mf / m1 * (*var + d * d / m1);
            *mu = (mf * *mu + x) / m1;
            *sigma = var.sqrt();
        };
        let mu = &mut self.mu[..valid];
        let var = &mut self.var[..valid];
        let sigma = &mut self.sigma[..valid];
        if valid >= PAR_THRESHOLD {
            mu.par_iter_mut()
                .zip(var.par_iter_mut())
                .zip(sigma.par_iter_mut())
                .enumerate()
                .for_each(|(i, ((mu, var), sigma))| step(i, mu, var, sigma));
        } else {
            for (i, ((mu, var), sigma)) in mu.iter_mut().zip(var).zip(sigma).enumerate() {
                step(i, mu, var, sigma);
            }
        }
        self.m += 1;
        Ok(())
    }
}

/// Direct statistics for length `m` in one sliding pass.
pub fn init_stats(series: &TimeSeries, m: usize) -> Result<RollingStats> {
    let t = series.values();
    let n = t.len();
    if m == 0 || m > n {
        return Err(DiscordError::InvalidLength { m, n });
    }
    let count = n - m + 1;
    let mf = m as f64;

    // runs[i]: how many consecutive elements starting at i equal t[i]
    let mut runs = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        if t[i] == t[i + 1] {
            runs[i] = runs[i + 1] + 1;
        }
    }

    // shifting by the first element keeps the sums small for offset data
    let shift = t[0];
    let window_sums = |i: usize| {
        t[i..i + m].iter().fold((0.0, 0.0), |(s1, s2), &x| {
            let y = x - shift;
            (s1 + y, s2 + y * y)
        })
    };

    let mut mu = Vec::with_capacity(count);
    let mut var = Vec::with_capacity(count);
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..count {
        if i % REFRESH_EVERY == 0 {
            (s1, s2) = window_sums(i);
        } else {
            let out = t[i - 1] - shift;
            let inc = t[i + m - 1] - shift;
            s1 += inc - out;
            s2 += inc * inc - out * out;
        }
        if runs[i] >= m {
            mu.push(t[i]);
            var.push(0.0);
        } else {
            let mean = s1 / mf;
            mu.push(mean + shift);
            var.push((s2 / mf - mean * mean).max(0.0));
        }
    }
    let sigma = var.iter().map(|v| v.sqrt()).collect();
    Ok(RollingStats {
        m,
        n,
        mu,
        var,
        sigma,
    })
}

/// Consuming form of [`RollingStats::advance`].
pub fn advance_stats(mut stats: RollingStats, series: &TimeSeries) -> Result<RollingStats> {
    stats.advance(series)?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn direct(t: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
        t.windows(m)
            .map(|w| {
                let mean = w.iter().sum::<f64>() / m as f64;
                let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
                (mean, var.sqrt())
            })
            .unzip()
    }

    #[test]
    fn init_small_examples() {
        let s = ts(&[1.0, 2.0, 3.0, 4.0]);
        let st = init_stats(&s, 2).unwrap();
        assert_eq!(st.mu(), &[1.5, 2.5, 3.5]);
        assert_eq!(st.sigma(), &[0.5, 0.5, 0.5]);

        let st = init_stats(&s, 3).unwrap();
        let third = (2.0f64 / 3.0).sqrt();
        assert_eq!(st.mu(), &[2.0, 3.0]);
        assert!(st.sigma().iter().all(|sd| (sd - third).abs() < 1e-12));
    }

    #[test]
    fn advance_small_example() {
        let s = ts(&[1.0, 2.0, 3.0, 4.0]);
        let st = advance_stats(init_stats(&s, 2).unwrap(), &s).unwrap();
        assert_eq!(st.window(), 3);
        assert_eq!(st.mu(), &[2.0, 3.0]);
        let third = (2.0f64 / 3.0).sqrt();
        assert!(st.sigma().iter().all(|sd| (sd - third).abs() < 1e-12));
        // backing vectors keep their original size
        assert_eq!(st.raw_mu().len(), 3);
    }

    #[test]
    fn constant_series_is_exact() {
        let s = ts(&[3.7; 40]);
        let mut st = init_stats(&s, 3).unwrap();
        for _ in 0..20 {
            assert!(st.mu().iter().all(|&x| x == 3.7));
            assert!(st.sigma().iter().all(|&x| x == 0.0));
            st.advance(&s).unwrap();
        }
    }

    #[test]
    fn advance_matches_hand_recurrence() {
        // mu_{1,3} = (2*1.5 + 3)/3 = 2 and sigma^2_{1,3} = 2/3 * (0.25 + 1.5^2/3) = 2/3
        let s = ts(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let mut st = init_stats(&s, 3).unwrap();
        st.advance(&s).unwrap();
        assert_eq!(st.window(), 4);
        assert_eq!(st.valid_count(), 5);
        let (mu, sd) = direct(s.values(), 4);
        for i in 0..5 {
            assert!((st.mu()[i] - mu[i]).abs() < 1e-12);
            assert!((st.sigma()[i] - sd[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn advance_refuses_past_limit() {
        let s = ts(&[1.0, 5.0, 2.0, 8.0]);
        let mut st = init_stats(&s, 3).unwrap();
        st.advance(&s).unwrap();
        assert!(matches!(st.advance(&s), Err(DiscordError::CannotAdvance { .. })));
    }

    #[test]
    fn sliding_matches_direct_across_refresh() {
        let t: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 1013) as f64 * 0.37 - 150.0).collect();
        let s = ts(&t);
        let st = init_stats(&s, 17).unwrap();
        let (mu, sd) = direct(&t, 17);
        for i in 0..mu.len() {
            assert!((st.mu()[i] - mu[i]).abs() < 1e-9);
            assert!((st.sigma()[i] - sd[i]).abs() < 1e-9);
        }
    }
}
