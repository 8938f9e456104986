//! Discovery of time-series discords of every length in a range.
//!
//! The pipeline: rolling statistics ([`stats`]) feed a segment-parallel
//! range-discord engine ([`pardrag`]), driven length by length with an
//! adaptive threshold ([`merlin`]). [`drag`] and [`oracle`] are the serial
//! reference and the brute-force ground truth. [`heatmap`] turns a
//! multi-length result into a score matrix and a ranking.

pub mod cli;
pub mod distance;
pub mod drag;
pub mod error;
pub mod heatmap;
pub mod io;
pub mod layout;
pub mod merlin;
pub mod oracle;
pub mod pardrag;
pub mod series;
pub mod state;
pub mod stats;

pub use error::{DiscordError, Result};
pub use layout::{compute_layout, SegmentLayout};
pub use merlin::{merlin, MerlinConfig, MerlinOutcome};

pub use pardrag::{pardrag, ParDrag};
pub use series::{non_self_match, DiscordRecord, MultiLengthDiscordSet, SubseqIndex, TimeSeries};
pub use stats::{advance_stats, init_stats, RollingStats};
