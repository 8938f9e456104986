//! Reading and writing series and discord tables, plus the random-walk
//! generator used for benchmarks.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{DiscordError, Result};
use crate::series::{DiscordRecord, MultiLengthDiscordSet, SubseqIndex, TimeSeries, MIN_SUBSEQ_LEN};

pub const DISCORD_HEADER: &str = "length,index,nn_dist,nn_dist_sq,score";

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> DiscordError {
    DiscordError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Load a series from a file with one value per line, or from a CSV file
/// (any line containing a comma). For CSV, `column` selects a field by
/// header name or by 0-based position; the default is the first field. A
/// first row whose selected field is not a number is taken as the header.
pub fn load_series(path: &Path, column: Option<&str>) -> Result<TimeSeries> {
    let reader = BufReader::new(File::open(path)?);
    let mut values = Vec::new();
    let mut col: Option<usize> = None;
    let mut first = true;

    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = no + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if first {
            first = false;
            let by_name = column.and_then(|c| fields.iter().position(|f| f == &c));
            let idx = match (by_name, column) {
                (Some(i), _) => i,
                (None, Some(c)) => match c.parse::<usize>() {
                    Ok(i) => i,
                    Err(_) => return Err(parse_err(path, line_no, format!("no column named '{c}'"))),
                },
                (None, None) => 0,
            };
            col = Some(idx);
            let field = fields
                .get(idx)
                .ok_or_else(|| parse_err(path, line_no, format!("missing column {idx}")))?;
            if by_name.is_some() || (fields.len() > 1 && field.parse::<f64>().is_err()) {
                continue;
            }
        }
        let idx = col.unwrap_or(0);
        let field = fields
            .get(idx)
            .ok_or_else(|| parse_err(path, line_no, format!("missing column {idx}")))?;
        let v: f64 = field
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("not a number: '{field}'")))?;
        values.push(v);
    }
    if values.len() < MIN_SUBSEQ_LEN {
        return Err(DiscordError::SeriesTooShort(values.len()));
    }
    TimeSeries::new(values)
}

pub fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in series.values() {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// `x_1 = 0`, `x_{i+1} = x_i + e_i` with standard normal `e_i`.
pub fn gen_randomwalk(n: usize, seed: u64) -> Result<TimeSeries> {
    if n < MIN_SUBSEQ_LEN {
        return Err(DiscordError::SeriesTooShort(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0f64;
    let values = (0..n)
        .map(|i| {
            if i > 0 {
                let e: f64 = StandardNormal.sample(&mut rng);
                x += e;
            }
            x
        })
        .collect();
    TimeSeries::new(values)
}

/// Records ordered by length, then by distance descending.
pub fn write_discords<W: Write>(mut w: W, set: &MultiLengthDiscordSet) -> Result<()> {
    writeln!(w, "{DISCORD_HEADER}")?;
    for (m, records) in set.iter() {
        for r in records {
            let score = r.nn_dist_sq / (2.0 * m as f64);
            writeln!(w, "{m},{},{},{},{score}", r.index.start, r.nn_dist(), r.nn_dist_sq)?;
        }
    }
    Ok(())
}

pub fn save_discords(path: &Path, set: &MultiLengthDiscordSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_discords(&mut w, set)?;
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_discords`]. `nn_dist_sq` is
/// authoritative; the other derived columns are ignored. `n` bounds the
/// admissible starts.
pub fn read_discords(path: &Path, n: usize) -> Result<MultiLengthDiscordSet> {
    let reader = BufReader::new(File::open(path)?);
    let mut set = MultiLengthDiscordSet::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = no + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line_no == 1 {
            if line != DISCORD_HEADER {
                return Err(parse_err(path, line_no, format!("expected header '{DISCORD_HEADER}'")));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(path, line_no, format!("expected 5 fields, got {}", fields.len())));
        }
        let m: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, line_no, "bad length"))?;
        let start: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(path, line_no, "bad index"))?;
        let d: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(path, line_no, "bad nn_dist_sq"))?;
        if !d.is_finite() || d < 0.0 {
            return Err(parse_err(path, line_no, "nn_dist_sq must be finite and non-negative"));
        }
        let index = SubseqIndex::new(start, m, n).map_err(|e| parse_err(path, line_no, e.to_string()))?;
        set.push(DiscordRecord::new(index, d));
    }
    Ok(set)
}
