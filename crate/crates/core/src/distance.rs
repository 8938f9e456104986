//! z-normalized Euclidean distance in its several forms.
//!
//! All kernels work with the *squared* distance. The dot-product form
//!
//! ```text
//! d^2(X, Y) = 2m * (1 - (X.Y - m*muX*muY) / (m*sigmaX*sigmaY))
//! ```
//!
//! lies in `[0, 4m]`; results are clamped to that range.

use crate::error::{DiscordError, Result};
use crate::stats::SIGMA_EPS;

/// Plain dot product with four interleaved accumulators.
///
/// Summation order depends only on the index, so `dot(a, b)` and
/// `dot(b, a)` are bitwise equal.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Returns the all-zero vector for constant input.
pub fn znormalize(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 3 {
        return Err(DiscordError::InvalidLength { m: x.len(), n: x.len() });
    }
    let m = x.len() as f64;
    let mean = x.iter().sum::<f64>() / m;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    let sd = var.sqrt();
    if sd < SIGMA_EPS {
        return Ok(vec![0.0; x.len()]);
    }
    Ok(x.iter().map(|v| (v - mean) / sd).collect())
}

pub fn sq_ed(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(DiscordError::LengthMismatch(x.len(), y.len()));
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Squared z-normalized distance from a dot product and the two
/// subsequences' moments.
///
/// One constant subsequence gives `2m`, two give `0`.
pub fn sq_ednorm_from_dot(
    dot: f64,
    m: usize,
    mu_x: f64,
    mu_y: f64,
    sigma_x: f64,
    sigma_y: f64,
) -> f64 {
    let mf = m as f64;
    match (sigma_x < SIGMA_EPS, sigma_y < SIGMA_EPS) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 2.0 * mf,
        (false, false) => {
            let corr = (dot - mf * (mu_x * mu_y)) / (mf * (sigma_x * sigma_y));
            (2.0 * mf * (1.0 - corr)).clamp(0.0, 4.0 * mf)
        }
    }
}

/// Distance between two subsequences of `values` starting at 0-based `i`
/// and `j`, through a direct dot product. This is the reference route every
/// threshold decision falls back to near the boundary.
pub fn sq_ednorm_direct(values: &[f64], m: usize, i: usize, j: usize, mu: &[f64], sigma: &[f64]) -> f64 {
    let d = dot(&values[i..i + m], &values[j..j + m]);
    sq_ednorm_from_dot(d, m, mu[i], mu[j], sigma[i], sigma[j])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EarlyAbandon {
    Value(f64),
    Abandoned,
}

/// Stops as soon as the partial sum reaches `bound`.
pub fn early_abandon_sq_ed(xh: &[f64], yh: &[f64], bound: f64) -> Result<EarlyAbandon> {
    if xh.len() != yh.len() {
        return Err(DiscordError::LengthMismatch(xh.len(), yh.len()));
    }
    let mut sum = 0.0;
    for (a, b) in xh.iter().zip(yh) {
        sum += (a - b) * (a - b);
        if sum >= bound {
            return Ok(EarlyAbandon::Abandoned);
        }
    }
    if sum >= bound {
        // only reachable for empty input
        return Ok(EarlyAbandon::Abandoned);
    }
    Ok(EarlyAbandon::Value(sum))
}

/// Dot products of one fixed subsequence against consecutive subsequences
/// of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct DotRow(pub Vec<f64>);

impl DotRow {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `values[k] = q . window[k..k+m]` for `k < seg_n`, each computed directly.
pub fn dot_products_block(q: &[f64], window: &[f64], seg_n: usize) -> Result<DotRow> {
    let m = q.len();
    let need = seg_n + m - 1;
    if window.len() < need {
        return Err(DiscordError::WindowTooShort { got: window.len(), need });
    }
    let mut out = vec![0.0; seg_n];
    fill_dot_products(q, window, &mut out);
    Ok(DotRow(out))
}

pub(crate) fn fill_dot_products(q: &[f64], window: &[f64], out: &mut [f64]) {
    let m = q.len();
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = dot(q, &window[k..k + m]);
    }
}

/// One step of the column recurrence, in place.
///
/// On entry `col[tid]` holds `segment[tid..tid+m] . chunk[k-1..k-1+m]`; on
/// exit it holds the products against `chunk[k..k+m]`. `k` is 0-based
/// and at least 1; `row_k` is `segment[0..m] . chunk[k..k+m]`.
#[inline]
pub(crate) fn step_dot_col(col: &mut [f64], row_k: f64, segment: &[f64], chunk: &[f64], k: usize, m: usize) {
    let last = chunk[k + m - 1];
    let first = chunk[k - 1];
    for tid in (1..col.len()).rev() {
        col[tid] = col[tid - 1] + segment[tid + m - 1] * last - segment[tid - 1] * first;
    }
    col[0] = row_k;
}

/// Column of dot products for chunk subsequence `k` (1-based, `1 < k <= seg_n`)
/// from the column for `k - 1` and the segment's first-subsequence row.
pub fn update_dot_col(
    prev_col: &DotRow,
    row: &DotRow,
    k: usize,
    segment: &[f64],
    chunk: &[f64],
    m: usize,
) -> Result<DotRow> {
    let seg_n = prev_col.len();
    if k < 2 || k > seg_n || k > row.len() {
        return Err(DiscordError::OrdinalOutOfRange { k, seg_n });
    }
    let need = seg_n + m - 1;
    if segment.len() < need {
        return Err(DiscordError::WindowTooShort { got: segment.len(), need });
    }
    if chunk.len() < k + m - 1 {
        return Err(DiscordError::WindowTooShort { got: chunk.len(), need: k + m - 1 });
    }
    let mut col = prev_col.0.clone();
    step_dot_col(&mut col, row.0[k - 1], segment, chunk, k - 1, m);
    Ok(DotRow(col))
}
