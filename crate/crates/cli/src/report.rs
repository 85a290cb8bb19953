//! Machine-readable report schemas. `schema` is bumped on any breaking
//! change so downstream scripts can pin what they parse.

use serde::Serialize;

pub const STATS_SCHEMA: u32 = 1;

/// Output of the `stats` command.
#[derive(Serialize)]
pub struct StatsReport {
    pub schema: u32,
    pub n: u32,
    pub weighted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<u64>,
    /// Stream updates applied (inserts plus deletes).
    pub updates: u64,
    /// Net surviving edges after the stream.
    pub m: u64,
    pub sparsifier: SparsifierStats,
    pub touch: TouchReport,
    pub memory_words: u64,
}

#[derive(Serialize)]
pub struct SparsifierStats {
    pub size: usize,
    /// Edges kept per level, index = level.
    pub per_level: Vec<usize>,
    pub duplicates: usize,
    pub warnings: usize,
}

#[derive(Serialize)]
pub struct TouchReport {
    pub cells_total: u64,
    pub mean_per_update: f64,
    /// (cells touched by one update, number of updates) pairs, ascending.
    pub histogram: Vec<(u64, u64)>,
}
