//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{DiscordError, Result};
use crate::heatmap::{build_heatmap, rank_discords, save_ranking};
use crate::io::{gen_randomwalk, load_series, read_discords, save_discords, write_series};
use crate::merlin::{merlin, MerlinConfig};
use crate::oracle::brute_force_topk;
use crate::pardrag::DEFAULT_SEGLEN;
use crate::series::TimeSeries;

/// Largest series `oracle-check` will brute-force.
pub const ORACLE_MAX_N: usize = 5000;

/// Relative tolerance on `nn_dist` used by `oracle-check`.
pub const ORACLE_RTOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "tsdiscord", version, about = "Multi-length time-series discord discovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the top-k discords of every length in a range.
    Discover(DiscoverArgs),
    /// Turn a discord table into a score heatmap and a ranking.
    Heatmap(HeatmapArgs),
    /// Compare discords against brute force (small series only).
    OracleCheck(OracleArgs),
    /// Time the search on random walks.
    Bench(BenchArgs),
    /// Write a seeded random walk.
    GenRw(GenRwArgs),
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Series file: one value per line, or CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// CSV column, by header name or 0-based position.
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub minl: usize,
    #[arg(long)]
    pub maxl: usize,
    #[arg(long, default_value_t = 1)]
    pub topk: usize,
    #[arg(long, default_value_t = DEFAULT_SEGLEN)]
    pub seglen: usize,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
}

impl RunArgs {
    fn config(&self) -> MerlinConfig {
        MerlinConfig::new(self.minl, self.maxl)
            .top_k(self.topk)
            .seglen(self.seglen)
            .workers(self.workers)
    }

    fn load(&self) -> Result<(TimeSeries, MerlinConfig)> {
        let cfg = self.config();
        // range checks that do not need the data go first
        if cfg.min_l > cfg.max_l {
            return Err(DiscordError::InvalidRange {
                min_l: cfg.min_l,
                max_l: cfg.max_l,
                n: 0,
            });
        }
        let series = load_series(&self.input, self.column.as_deref())?;
        cfg.validate(series.len())?;
        Ok((series, cfg))
    }
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Discord table to write.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// Discord table from `discover`.
    #[arg(long)]
    pub input: PathBuf,
    /// Length of the series the table was computed on.
    #[arg(long)]
    pub n: usize,
    /// Defaults to the shortest length in the table.
    #[arg(long)]
    pub minl: Option<usize>,
    /// Defaults to the longest length in the table.
    #[arg(long)]
    pub maxl: Option<usize>,
    /// Entries in the ranking.
    #[arg(long, default_value_t = 10)]
    pub topk: usize,
    /// Output prefix; writes <prefix>.csv, <prefix>.pgm and <prefix>_ranking.csv.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Check this table instead of running the search.
    #[arg(long)]
    pub discords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Segment lengths to sweep; the first is the base value.
    #[arg(long, value_delimiter = ',', default_values_t = vec![DEFAULT_SEGLEN])]
    pub seglen: Vec<usize>,
    /// Series lengths to sweep; the first is the base value.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10_000])]
    pub n: Vec<usize>,
    /// Numbers of lengths in the range to sweep; the first is the base value.
    #[arg(long, value_delimiter = ',', default_values_t = vec![8])]
    pub width: Vec<usize>,
    /// Worker counts to sweep; the first is the base value.
    #[arg(long, value_delimiter = ',', default_values_t = vec![default_workers()])]
    pub workers: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    pub minl: usize,
    #[arg(long, default_value_t = 1)]
    pub topk: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV of timings; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenRwArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Discover(a) => discover(&a),
        Command::Heatmap(a) => heatmap(&a),
        Command::OracleCheck(a) => oracle_check(&a),
        Command::Bench(a) => bench(&a),
        Command::GenRw(a) => gen_rw(&a),
    }
}

pub fn discover(a: &DiscoverArgs) -> Result<()> {
    let (series, cfg) = a.run.load()?;
    let t0 = Instant::now();
    let out = merlin(&series, &cfg)?;
    let secs = t0.elapsed().as_secs_f64();
    save_discords(&a.output, &out.discords)?;

    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for m in cfg.min_l..=cfg.max_l {
        let found = out.discords.get(m).map_or(0, <[_]>::len);
        writeln!(w, "length {m}: {found} discords")?;
    }
    if !out.failed.is_empty() {
        let list: Vec<String> = out.failed.iter().map(usize::to_string).collect();
        writeln!(w, "no discord within retry budget at lengths: {}", list.join(" "))?;
    }
    writeln!(w, "total {} discords, {} engine calls, {secs:.3} s", out.discords.len(), out.calls)?;
    Ok(())
}

pub fn heatmap(a: &HeatmapArgs) -> Result<()> {
    let set = read_discords(&a.input, a.n)?;
    let min_l = a
        .minl
        .or(set.min_length())
        .ok_or_else(|| DiscordError::Config("empty discord table needs --minl and --maxl".into()))?;
    let max_l = a
        .maxl
        .or(set.max_length())
        .ok_or_else(|| DiscordError::Config("empty discord table needs --minl and --maxl".into()))?;
    let h = build_heatmap(&set, a.n, min_l, max_l)?;
    let ranking = rank_discords(&h, a.topk)?;

    let prefix = a.output.display().to_string();
    h.save_csv(&PathBuf::from(format!("{prefix}.csv")))?;
    h.save_pgm(&PathBuf::from(format!("{prefix}.pgm")))?;
    save_ranking(&PathBuf::from(format!("{prefix}_ranking.csv")), &ranking)?;
    println!("{} x {} heatmap, {} ranked", h.height(), h.width(), ranking.len());
    Ok(())
}

pub fn oracle_check(a: &OracleArgs) -> Result<()> {
    let (series, cfg) = a.run.load()?;
    if series.len() > ORACLE_MAX_N {
        return Err(DiscordError::Config(format!(
            "oracle-check is limited to n <= {ORACLE_MAX_N}, got {}",
            series.len()
        )));
    }
    let found = match &a.discords {
        Some(path) => read_discords(path, series.len())?,
        None => merlin(&series, &cfg)?.discords,
    };

    let mut failures = 0;
    for m in cfg.min_l..=cfg.max_l {
        let got = found.get(m).unwrap_or(&[]);
        let k = cfg.top_k.min(series.subseq_count(m));
        let want = brute_force_topk(&series, m, k)?;
        let mut worst = 0.0f64;
        let mut ok = got.len() == want.len();
        for (g, w) in got.iter().zip(&want) {
            let rel = (g.nn_dist() - w.nn_dist()).abs() / w.nn_dist().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            ok &= g.index == w.index && rel <= ORACLE_RTOL;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("length {m}: {verdict} ({} of {} records, max rel diff {worst:e})", got.len(), want.len());
        if !ok {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(DiscordError::Config(format!("{failures} lengths disagree with brute force")));
    }
    Ok(())
}

pub fn bench(a: &BenchArgs) -> Result<()> {
    let base = |v: &[usize], name: &str| {
        v.first()
            .copied()
            .ok_or_else(|| DiscordError::Config(format!("--{name} needs at least one value")))
    };
    let (seglen0, n0, width0, workers0) = (
        base(&a.seglen, "seglen")?,
        base(&a.n, "n")?,
        base(&a.width, "width")?,
        base(&a.workers, "workers")?,
    );

    let mut runs: Vec<(&str, usize, usize, usize, usize)> = Vec::new();
    for &s in &a.seglen {
        runs.push(("seglen", n0, width0, s, workers0));
    }
    for &n in a.n.iter().skip(1) {
        runs.push(("n", n, width0, seglen0, workers0));
    }
    for &w in a.width.iter().skip(1) {
        runs.push(("width", n0, w, seglen0, workers0));
    }
    for &p in a.workers.iter().skip(1) {
        runs.push(("workers", n0, width0, seglen0, p));
    }

    let mut rows = vec!["axis,n,minl,maxl,seglen,workers,seconds,discords,ms_per_discord".to_string()];
    for (axis, n, width, seglen, workers) in runs {
        if width == 0 {
            return Err(DiscordError::Config("--width values must be positive".into()));
        }
        let series = gen_randomwalk(n, a.seed)?;
        let cfg = MerlinConfig::new(a.minl, a.minl + width - 1)
            .top_k(a.topk)
            .seglen(seglen)
            .workers(workers);
        cfg.validate(n)?;
        let t0 = Instant::now();
        let out = merlin(&series, &cfg)?;
        let secs = t0.elapsed().as_secs_f64();
        let count = out.discords.len();
        let per = if count > 0 { 1e3 * secs / count as f64 } else { f64::NAN };
        rows.push(format!(
            "{axis},{n},{},{},{seglen},{workers},{secs:.6},{count},{per:.6}",
            cfg.min_l, cfg.max_l
        ));
        eprintln!("{}", rows.last().unwrap());
    }

    let text = rows.join("\n") + "\n";
    match &a.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn gen_rw(a: &GenRwArgs) -> Result<()> {
    let series = gen_randomwalk(a.n, a.seed)?;
    write_series(&a.output, &series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn bench_lists_parse() {
        let cli = Cli::try_parse_from(["tsdiscord", "bench", "--seglen", "128,256", "--workers", "1,2,4"]).unwrap();
        match cli.command {
            Command::Bench(b) => {
                assert_eq!(b.seglen, vec![128, 256]);
                assert_eq!(b.workers, vec![1, 2, 4]);
            }
            _ => panic!(),
        }
    }
}
