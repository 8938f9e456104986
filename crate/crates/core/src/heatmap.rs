//! Length-normalized discord scores laid out as a length x position matrix.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{DiscordError, Result};
use crate::series::MultiLengthDiscordSet;

/// Rows are lengths `min_l..=max_l`, columns are 1-based starts
/// `1..=n - min_l`. Cells without a discord are 0. A score is
/// `nnDistSq / (2m)`, which lies in `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub min_l: usize,
    pub max_l: usize,
    pub n: usize,
    width: usize,
    cells: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedDiscord {
    /// 1-based start.
    pub index: usize,
    pub length: usize,
    pub score: f64,
}

pub fn score(nn_dist_sq: f64, m: usize) -> f64 {
    nn_dist_sq / (2.0 * m as f64)
}

pub fn build_heatmap(set: &MultiLengthDiscordSet, n: usize, min_l: usize, max_l: usize) -> Result<Heatmap> {
    if min_l == 0 || min_l > max_l || min_l >= n {
        return Err(DiscordError::InvalidRange { min_l, max_l, n });
    }
    let width = n - min_l;
    let height = max_l - min_l + 1;
    let mut cells = vec![0.0; width * height];
    for (m, records) in set.iter() {
        if m < min_l || m > max_l {
            return Err(DiscordError::Config(format!(
                "discord of length {m} outside {min_l}..={max_l}"
            )));
        }
        for r in records {
            // the last admissible start of the shortest length has no column
            if r.start() <= width {
                cells[(m - min_l) * width + r.start() - 1] = score(r.nn_dist_sq, m);
            }
        }
    }
    Ok(Heatmap {
        min_l,
        max_l,
        n,
        width,
        cells,
    })
}

impl Heatmap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.max_l - self.min_l + 1
    }

    /// Score at length `m`, 1-based start `i`.
    pub fn get(&self, m: usize, i: usize) -> f64 {
        self.cells[(m - self.min_l) * self.width + i - 1]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        let r = m - self.min_l;
        &self.cells[r * self.width..(r + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[f64])> {
        (self.min_l..=self.max_l).map(move |m| (m, self.row(m)))
    }

    /// One row per length, shortest first.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (_, row) in self.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    w.write_all(b",")?;
                }
                first = false;
                if *v == 0.0 {
                    w.write_all(b"0")?;
                } else {
                    write!(w, "{v}")?;
                }
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Binary greyscale image, shortest length on the top row.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height())?;
        let bytes: Vec<u8> = self
            .cells
            .iter()
            .map(|s| (s / 2.0 * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_pgm(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Per column, the best score over all lengths (shortest length on ties);
/// columns sorted by that score, best first, lower index on ties. Columns
/// with no discord are skipped.
pub fn rank_discords(h: &Heatmap, k: usize) -> Result<Vec<RankedDiscord>> {
    if k == 0 {
        return Err(DiscordError::CountOutOfRange { k, max: h.width });
    }
    let mut best: Vec<RankedDiscord> = (1..=h.width)
        .filter_map(|i| {
            let mut top: Option<RankedDiscord> = None;
            for m in h.min_l..=h.max_l {
                let s = h.get(m, i);
                if s > 0.0 && top.is_none_or(|t| s > t.score) {
                    top = Some(RankedDiscord {
                        index: i,
                        length: m,
                        score: s,
                    });
                }
            }
            top
        })
        .collect();
    best.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    best.truncate(k);
    Ok(best)
}

pub fn write_ranking<W: Write>(mut w: W, ranking: &[RankedDiscord]) -> Result<()> {
    writeln!(w, "rank,index,length,score")?;
    for (r, d) in ranking.iter().enumerate() {
        writeln!(w, "{},{},{},{}", r + 1, d.index, d.length, d.score)?;
    }
    Ok(())
}

pub fn save_ranking(path: &Path, ranking: &[RankedDiscord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ranking(&mut w, ranking)?;
    w.flush()?;
    Ok(())
}
