//! DLRM-style workloads: model shapes, lookup distributions, seeded index
//! generation and coalescing-shrink statistics.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{tensor_casting, LookupIndex};

pub const DEFAULT_TABLE_ROWS: u64 = 1_000_000;
pub const DEFAULT_DIM: usize = 64;
pub const DEFAULT_BATCH: usize = 2048;
pub const DEFAULT_ZIPF_EXPONENT: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    pub num_tables: usize,
    pub gathers_per_table: usize,
    #[serde(default = "default_table_rows")]
    pub table_rows: u64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    pub bottom_mlp: Vec<usize>,
    pub top_mlp: Vec<usize>,
}

fn default_table_rows() -> u64 {
    DEFAULT_TABLE_ROWS
}

fn default_dim() -> usize {
    DEFAULT_DIM
}

fn default_batch() -> usize {
    DEFAULT_BATCH
}

impl ModelConfig {
    fn builtin(name: &str, num_tables: usize, gathers: usize, bottom: &[usize], top: &[usize]) -> Self {
        ModelConfig {
            name: name.to_string(),
            num_tables,
            gathers_per_table: gathers,
            table_rows: DEFAULT_TABLE_ROWS,
            dim: DEFAULT_DIM,
            batch: DEFAULT_BATCH,
            bottom_mlp: bottom.to_vec(),
            top_mlp: top.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_tables", self.num_tables as u64),
            ("gathers_per_table", self.gathers_per_table as u64),
            ("table_rows", self.table_rows),
            ("dim", self.dim as u64),
            ("batch", self.batch as u64),
        ];
        for (field, v) in counts {
            if v == 0 {
                return Err(Error::InvalidParameter(format!(
                    "{}: {field} must be at least 1",
                    self.name
                )));
            }
        }
        if self.bottom_mlp.iter().chain(&self.top_mlp).any(|&w| w == 0) {
            return Err(Error::InvalidParameter(format!("{}: zero-width MLP layer", self.name)));
        }
        Ok(())
    }

    /// Lookups per table per iteration.
    pub fn lookups_per_table(&self) -> usize {
        self.batch * self.gathers_per_table
    }

    pub fn with_batch(&self, batch: usize) -> Self {
        ModelConfig { batch, ..self.clone() }
    }

    pub fn with_dim(&self, dim: usize) -> Self {
        ModelConfig { dim, ..self.clone() }
    }
}

pub fn builtin_models() -> Vec<ModelConfig> {
    vec![
        ModelConfig::builtin("RM1", 10, 80, &[256, 128, 64], &[256, 64, 1]),
        ModelConfig::builtin("RM2", 40, 80, &[256, 128, 64], &[512, 128, 1]),
        ModelConfig::builtin("RM3", 10, 20, &[2560, 512, 64], &[512, 128, 1]),
        ModelConfig::builtin("RM4", 10, 20, &[2560, 1024, 64], &[2048, 2048, 1024, 1]),
    ]
}

pub fn builtin_model(name: &str) -> Option<ModelConfig> {
    builtin_models().into_iter().find(|m| m.name.eq_ignore_ascii_case(name))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistributionKind {
    Uniform,
    Zipf { exponent: f64 },
    Histogram,
}

/// Probability of looking up each row.
///
/// Uniform distributions sample directly; the others keep a cumulative
/// table over their support and sample by inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupDistribution {
    kind: DistributionKind,
    rows: u64,
    /// Row id per support entry; `None` means entry `i` is row `i`.
    support: Option<Vec<u64>>,
    cdf: Vec<f64>,
}

impl LookupDistribution {
    pub fn uniform(rows: u64) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Empty("distribution support"));
        }
        Ok(LookupDistribution {
            kind: DistributionKind::Uniform,
            rows,
            support: None,
            cdf: Vec::new(),
        })
    }

    /// `P(row = k) ∝ (k + 1)^-s`, so row 0 is the most popular.
    pub fn zipf(rows: u64, exponent: f64) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Empty("distribution support"));
        }
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(Error::InvalidParameter(format!("zipf exponent {exponent}")));
        }
        let weights = (1..=rows).map(|k| (k as f64).powf(-exponent));
        Ok(LookupDistribution {
            kind: DistributionKind::Zipf { exponent },
            rows,
            support: None,
            cdf: normalized_cdf(weights)?,
        })
    }

    /// Distribution over explicit `(row_id, count)` pairs.
    pub fn from_counts(counts: &[(u64, f64)]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty("histogram"));
        }
        let mut ids = Vec::with_capacity(counts.len());
        for (i, &(row, c)) in counts.iter().enumerate() {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!("entry {i}: count {c} for row {row}")));
            }
            ids.push(row);
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("duplicate row {}", w[0])));
        }
        let rows = sorted[sorted.len() - 1] + 1;
        Ok(LookupDistribution {
            kind: DistributionKind::Histogram,
            rows,
            support: Some(ids),
            cdf: normalized_cdf(counts.iter().map(|&(_, c)| c))?,
        })
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    /// One past the largest row id that can be drawn.
    pub fn rows(&self) -> u64 {
        self.rows
    }

    /// `(row, probability)` for every row with an explicit weight.
    /// Uniform distributions have no table and return an empty list.
    pub fn probabilities(&self) -> Vec<(u64, f64)> {
        let mut prev = 0.0;
        self.cdf
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let p = c - prev;
                prev = c;
                (self.row_at(i), p)
            })
            .collect()
    }

    fn row_at(&self, i: usize) -> u64 {
        match &self.support {
            Some(ids) => ids[i],
            None => i as u64,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.cdf.is_empty() {
            return rng.gen_range(0..self.rows);
        }
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.row_at(i)
    }
}

fn normalized_cdf(weights: impl Iterator<Item = f64>) -> Result<Vec<f64>> {
    let mut cdf: Vec<f64> = weights
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let total = *cdf.last().ok_or(Error::Empty("distribution support"))?;
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("distribution has zero total mass".into()));
    }
    for c in &mut cdf {
        *c /= total;
    }
    Ok(cdf)
}

/// Reads a `row_id,count` CSV. A `row_id,count` header line is optional.
pub fn load_histogram(path: impl AsRef<Path>) -> Result<LookupDistribution> {
    let text = fs::read_to_string(path)?;
    parse_histogram(&text)
}

pub fn parse_histogram(text: &str) -> Result<LookupDistribution> {
    let mut counts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if line.is_empty() || (line_no == 1 && line.replace(' ', "") == "row_id,count") {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        let (row, count) = line
            .split_once(',')
            .ok_or_else(|| err(format!("expected `row_id,count`, got `{line}`")))?;
        let row: u64 = row
            .trim()
            .parse()
            .map_err(|e| err(format!("row id `{}`: {e}", row.trim())))?;
        let count: f64 = count
            .trim()
            .parse()
            .map_err(|e| err(format!("count `{}`: {e}", count.trim())))?;
        if !(count >= 0.0 && count.is_finite()) {
            return Err(err(format!("count must be non-negative, got {count}")));
        }
        counts.push((row, count));
    }
    if counts.is_empty() {
        return Err(Error::Empty("histogram file"));
    }
    LookupDistribution::from_counts(&counts)
}

/// Writes counts with shortest round-trip formatting.
pub fn save_histogram(path: impl AsRef<Path>, counts: &[(u64, f64)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "row_id,count")?;
    for (row, count) in counts {
        writeln!(f, "{row},{count}")?;
    }
    f.flush()?;
    Ok(())
}

/// Per-table RNG: the same seed gives the same stream for a table no matter
/// which other tables are generated.
pub fn table_rng(seed: u64, table: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(table as u64);
    rng
}

/// Lookup index for one table: `batch × gathers` draws, with lookup `i`
/// reduced into batch slot `i / gathers`.
pub fn gen_table_lookups(cfg: &ModelConfig, dist: &LookupDistribution, seed: u64, table: usize) -> Result<LookupIndex> {
    cfg.validate()?;
    if dist.rows() > cfg.table_rows {
        return Err(Error::InvalidParameter(format!(
            "distribution covers {} rows, table has {}",
            dist.rows(),
            cfg.table_rows
        )));
    }
    let mut rng = table_rng(seed, table);
    let l = cfg.lookups_per_table();
    let g = cfg.gathers_per_table as u64;
    let src: Vec<u64> = (0..l).map(|_| dist.sample(&mut rng)).collect();
    let dst: Vec<u64> = (0..l as u64).map(|i| i / g).collect();
    LookupIndex::new(src, dst, cfg.batch)
}

pub fn gen_lookups(cfg: &ModelConfig, dist: &LookupDistribution, seed: u64) -> Result<Vec<LookupIndex>> {
    (0..cfg.num_tables)
        .map(|t| gen_table_lookups(cfg, dist, seed, t))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkPoint {
    pub batch: usize,
    /// Expanded gradient rows per backpropagated gradient row (`L / B`).
    pub expanded_size: f64,
    /// Coalesced gradient rows per backpropagated gradient row (`U / B`).
    pub coalesced_size: f64,
}

impl ShrinkPoint {
    /// `U / L`.
    pub fn ratio(&self) -> f64 {
        self.coalesced_size / self.expanded_size
    }
}

/// Gradient sizes before and after coalescing for each batch size, averaged
/// over the model's tables and normalized to the batch.
pub fn coalesce_shrink(
    cfg: &ModelConfig,
    dist: &LookupDistribution,
    batches: &[usize],
    seed: u64,
) -> Result<Vec<ShrinkPoint>> {
    batches
        .iter()
        .map(|&batch| {
            let c = cfg.with_batch(batch);
            let mut lookups = 0usize;
            let mut unique = 0usize;
            for t in 0..c.num_tables {
                let idx = gen_table_lookups(&c, dist, seed, t)?;
                lookups += idx.len();
                unique += tensor_casting(&idx).num_unique();
            }
            let denom = (batch * c.num_tables) as f64;
            Ok(ShrinkPoint {
                batch,
                expanded_size: lookups as f64 / denom,
                coalesced_size: unique as f64 / denom,
            })
        })
        .collect()
}
