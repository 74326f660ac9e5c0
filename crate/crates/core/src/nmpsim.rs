//! Bandwidth-bound timing model of a rank-interleaved near-memory
//! gather/scatter unit.
//!
//! Rows are interleaved round-robin across ranks. Every rank streams its own
//! share of the accessed rows at `rank_bw` in `access_granularity` bursts and
//! all ranks run in parallel, so an instruction batch finishes when its most
//! loaded rank does. Reductions happen on the fly in the per-rank vector
//! unit and cost nothing. Scatter is charged as a write of each row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::{self, Primitive, TrafficParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interleave {
    /// `(table_offset + row) mod ranks`
    #[default]
    RowRoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmpConfig {
    pub num_ranks: u32,
    /// Bytes per second per rank.
    pub rank_bw: f64,
    /// Minimum access size per rank, in bytes.
    pub access_granularity: u64,
    pub interleave: Interleave,
    /// Fixed host-to-NMP instruction dispatch latency, seconds.
    pub dispatch_latency: f64,
}

impl Default for NmpConfig {
    fn default() -> Self {
        NmpConfig {
            num_ranks: 32,
            rank_bw: 25.6e9,
            access_granularity: 64,
            interleave: Interleave::RowRoundRobin,
            dispatch_latency: 0.0,
        }
    }
}

impl NmpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_ranks == 0 {
            return Err(Error::InvalidParameter("num_ranks must be positive".into()));
        }
        if !(self.rank_bw > 0.0 && self.rank_bw.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rank_bw must be positive, got {}",
                self.rank_bw
            )));
        }
        if self.access_granularity == 0 {
            return Err(Error::InvalidParameter("access_granularity must be positive".into()));
        }
        if !(self.dispatch_latency >= 0.0 && self.dispatch_latency.is_finite()) {
            return Err(Error::InvalidParameter("dispatch_latency must be non-negative".into()));
        }
        Ok(())
    }

    /// Peak bandwidth with every rank busy.
    pub fn aggregate_bw(&self) -> f64 {
        self.num_ranks as f64 * self.rank_bw
    }

    /// Bursts needed to move one vector.
    pub fn accesses_per_vector(&self, vector_bytes: u64) -> u64 {
        vector_bytes.div_ceil(self.access_granularity)
    }
}

pub fn rank_of(table_id: u64, row_id: u64, cfg: &NmpConfig) -> u32 {
    let n = cfg.num_ranks as u64;
    match cfg.interleave {
        Interleave::RowRoundRobin => ((table_id % n + row_id % n) % n) as u32,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NmpOp {
    GatherReduce,
    Scatter,
}

/// One CISC-style request sent to the memory pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NmpInstruction {
    pub op: NmpOp,
    pub table_id: u64,
    pub row_ids: Vec<u64>,
    /// Output slot per row, gather-reduce only.
    pub dst_slots: Option<Vec<u64>>,
    pub vector_bytes: u64,
}

impl NmpInstruction {
    pub fn gather_reduce(table_id: u64, row_ids: Vec<u64>, dst_slots: Vec<u64>, vector_bytes: u64) -> Self {
        NmpInstruction {
            op: NmpOp::GatherReduce,
            table_id,
            row_ids,
            dst_slots: Some(dst_slots),
            vector_bytes,
        }
    }

    pub fn scatter(table_id: u64, row_ids: Vec<u64>, vector_bytes: u64) -> Self {
        NmpInstruction {
            op: NmpOp::Scatter,
            table_id,
            row_ids,
            dst_slots: None,
            vector_bytes,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.row_ids.is_empty() {
            return Err(Error::Empty("instruction row list"));
        }
        if self.vector_bytes == 0 {
            return Err(Error::InvalidParameter("zero vector size".into()));
        }
        match (self.op, &self.dst_slots) {
            (NmpOp::GatherReduce, Some(d)) if d.len() == self.row_ids.len() => Ok(()),
            (NmpOp::GatherReduce, _) => Err(Error::Shape("gather-reduce needs one dst slot per row".into())),
            (NmpOp::Scatter, None) => Ok(()),
            (NmpOp::Scatter, Some(_)) => Err(Error::Shape("scatter takes no dst slots".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmpResult {
    /// Seconds.
    pub elapsed: f64,
    pub per_rank_accesses: Vec<u64>,
    /// Bytes per second.
    pub effective_bw: f64,
    pub bottleneck_rank: u32,
}

impl NmpResult {
    pub fn total_accesses(&self) -> u64 {
        self.per_rank_accesses.iter().sum()
    }

    pub fn total_bytes(&self, cfg: &NmpConfig) -> u64 {
        self.total_accesses() * cfg.access_granularity
    }
}

pub fn execute(instr: &NmpInstruction, cfg: &NmpConfig) -> Result<NmpResult> {
    execute_batch(std::slice::from_ref(instr), cfg)
}

/// Runs a set of instructions that the ranks service concurrently, e.g. one
/// gather-reduce per embedding table.
pub fn execute_batch(instrs: &[NmpInstruction], cfg: &NmpConfig) -> Result<NmpResult> {
    cfg.validate()?;
    if instrs.is_empty() {
        return Err(Error::Empty("instruction batch"));
    }
    let mut per_rank = vec![0u64; cfg.num_ranks as usize];
    for instr in instrs {
        instr.validate()?;
        let bursts = cfg.accesses_per_vector(instr.vector_bytes);
        for &row in &instr.row_ids {
            per_rank[rank_of(instr.table_id, row, cfg) as usize] += bursts;
        }
    }
    Ok(result_from_histogram(per_rank, cfg))
}

/// Timing for a per-rank burst histogram.
pub fn result_from_histogram(per_rank_accesses: Vec<u64>, cfg: &NmpConfig) -> NmpResult {
    let (bottleneck_rank, &max) = per_rank_accesses
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, &c)| c)
        .map(|(r, c)| (r as u32, c))
        .unwrap_or((0, &0));
    let busy = (max * cfg.access_granularity) as f64 / cfg.rank_bw;
    let elapsed = busy + cfg.dispatch_latency;
    let total: u64 = per_rank_accesses.iter().sum::<u64>() * cfg.access_granularity;
    let effective_bw = if elapsed > 0.0 { total as f64 / elapsed } else { 0.0 };
    NmpResult {
        elapsed,
        per_rank_accesses,
        effective_bw,
        bottleneck_rank,
    }
}

/// Where a primitive runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExecutionSite {
    /// Flat memory bandwidth in bytes per second.
    Host {
        bandwidth: f64,
    },
    Nmp(NmpConfig),
}

/// Time for one primitive with the shape `p`.
///
/// On the host the primitive's full traffic (elements and indices) streams
/// at the flat bandwidth. On the NMP pool the implied instruction touches
/// `lookups` rows for the gather-reduce forms and `unique` rows for scatter,
/// laid out perfectly round-robin; expand and coalesce have no NMP form.
pub fn time_primitive(primitive: Primitive, p: &TrafficParams, site: &ExecutionSite) -> Result<f64> {
    p.validate()?;
    match site {
        ExecutionSite::Host { bandwidth } => {
            if !(*bandwidth > 0.0) {
                return Err(Error::InvalidParameter("host bandwidth must be positive".into()));
            }
            Ok(traffic::traffic(primitive, p).total as f64 / bandwidth)
        }
        ExecutionSite::Nmp(cfg) => {
            cfg.validate()?;
            let rows = match primitive {
                Primitive::GatherReduce | Primitive::CastedGatherReduce => p.lookups,
                Primitive::Scatter => p.unique,
                Primitive::Expand | Primitive::Coalesce => {
                    return Err(Error::Unsupported(format!("{primitive} has no near-memory form")))
                }
            };
            Ok(balanced_result(rows, p.vector_bytes(), cfg).elapsed)
        }
    }
}

/// Result for `rows` vectors spread round-robin starting at rank 0.
pub fn balanced_result(rows: u64, vector_bytes: u64, cfg: &NmpConfig) -> NmpResult {
    let n = cfg.num_ranks as u64;
    let bursts = cfg.accesses_per_vector(vector_bytes);
    let hist = (0..n).map(|r| (rows / n + u64::from(r < rows % n)) * bursts).collect();
    result_from_histogram(hist, cfg)
}
