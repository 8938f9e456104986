//! Segmentation of the subsequence index space into equal-sized segments.

use crate::error::{DiscordError, Result};
use crate::series::MIN_SUBSEQ_LEN;

/// How the `N = n - m + 1` subsequences are split across segments.
///
/// Segment `j` (0-based) owns subsequences `j*seg_n .. (j+1)*seg_n`
/// (0-based), i.e. elements `j*seg_n .. j*seg_n + seglen`; neighbouring
/// segments share `m - 1` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentLayout {
    pub n: usize,
    pub m: usize,
    pub seglen: usize,
    pub seg_n: usize,
    pub num_seg: usize,
    pub pad: usize,
}

pub fn compute_layout(n: usize, m: usize, seglen: usize) -> Result<SegmentLayout> {
    if m < MIN_SUBSEQ_LEN || m + 2 > n {
        return Err(DiscordError::InvalidLength { m, n });
    }
    if seglen < m {
        return Err(DiscordError::SegmentTooShort { seglen, m });
    }
    if seglen > n {
        return Err(DiscordError::SegmentTooLong { seglen, n });
    }
    let seg_n = seglen - m + 1;
    let subseqs = n - m + 1;
    let num_seg = subseqs.div_ceil(seg_n);
    let pad = num_seg * seg_n + 2 * (m - 1) - n;
    Ok(SegmentLayout {
        n,
        m,
        seglen,
        seg_n,
        num_seg,
        pad,
    })
}

impl SegmentLayout {
    /// Real subsequence count `N`.
    pub fn subseq_count(&self) -> usize {
        self.n - self.m + 1
    }

    /// Candidate slots including the padded tail, `num_seg * seg_n`.
    pub fn padded_count(&self) -> usize {
        self.num_seg * self.seg_n
    }

    /// 0-based subsequence range owned by segment `j`, clipped to real indices.
    pub fn segment_range(&self, j: usize) -> std::ops::Range<usize> {
        let start = j * self.seg_n;
        let end = ((j + 1) * self.seg_n).min(self.subseq_count());
        start..end.max(start)
    }
}
