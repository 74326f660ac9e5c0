//! Microarchitecture-independent byte accounting for the embedding
//! primitives.
//!
//! Every logical access to an embedding or gradient row counts as memory
//! traffic; there is no cache model. Sorting inside gradient coalescing is
//! not charged here (it shows up as time in [`crate::pipeline`]). Index
//! bytes are reported separately from element bytes so either convention
//! can be recovered.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Embedding-layer primitive whose traffic can be accounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Primitive {
    GatherReduce,
    Expand,
    Coalesce,
    CastedGatherReduce,
    Scatter,
}

impl Primitive {
    pub const ALL: [Primitive; 5] = [
        Primitive::GatherReduce,
        Primitive::Expand,
        Primitive::Coalesce,
        Primitive::CastedGatherReduce,
        Primitive::Scatter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::GatherReduce => "gather_reduce",
            Primitive::Expand => "expand",
            Primitive::Coalesce => "coalesce",
            Primitive::CastedGatherReduce => "casted_gather_reduce",
            Primitive::Scatter => "scatter",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of one table's lookups for traffic analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficParams {
    /// Lookups (gathers) against the table.
    pub lookups: u64,
    /// Reduced output slots, one per batch element.
    pub outputs: u64,
    /// Distinct table rows touched.
    pub unique: u64,
    pub dim: u64,
    pub elem_bytes: u64,
    pub idx_bytes: u64,
}

impl TrafficParams {
    pub fn new(lookups: u64, outputs: u64, unique: u64, dim: u64) -> Result<Self> {
        let p = TrafficParams {
            lookups,
            outputs,
            unique,
            dim,
            elem_bytes: 4,
            idx_bytes: 8,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lookups == 0 || self.outputs == 0 || self.unique == 0 || self.dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "traffic params must be positive: {self:?}"
            )));
        }
        if self.unique > self.lookups {
            return Err(Error::InvalidParameter(format!(
                "unique rows {} exceed lookups {}",
                self.unique, self.lookups
            )));
        }
        if self.elem_bytes == 0 || self.idx_bytes == 0 {
            return Err(Error::InvalidParameter("zero-width element or index".into()));
        }
        Ok(())
    }

    /// Bytes in one embedding or gradient row.
    pub fn vector_bytes(&self) -> u64 {
        self.dim * self.elem_bytes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficReport {
    pub primitive: Primitive,
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub index_bytes: u64,
    pub total: u64,
}

impl TrafficReport {
    pub fn new(primitive: Primitive, bytes_read: u64, bytes_written: u64, index_bytes: u64) -> Self {
        TrafficReport {
            primitive,
            bytes_read,
            bytes_written,
            index_bytes,
            total: bytes_read + bytes_written + index_bytes,
        }
    }

    /// Reads plus writes, excluding index arrays.
    pub fn element_bytes(&self) -> u64 {
        self.bytes_read + self.bytes_written
    }

    pub const CSV_HEADER: &'static str = "primitive,reads,writes,index,total";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.primitive, self.bytes_read, self.bytes_written, self.index_bytes, self.total
        )
    }

    /// Element-wise sum of two reports, labelled with `self`'s primitive.
    pub fn combined(&self, other: &TrafficReport) -> TrafficReport {
        TrafficReport::new(
            self.primitive,
            self.bytes_read + other.bytes_read,
            self.bytes_written + other.bytes_written,
            self.index_bytes + other.index_bytes,
        )
    }
}

pub fn traffic_gather_reduce(p: &TrafficParams) -> TrafficReport {
    let v = p.vector_bytes();
    TrafficReport::new(
        Primitive::GatherReduce,
        p.lookups * v,
        p.outputs * v,
        2 * p.lookups * p.idx_bytes,
    )
}

pub fn traffic_expand(p: &TrafficParams) -> TrafficReport {
    let v = p.vector_bytes();
    TrafficReport::new(Primitive::Expand, p.outputs * v, p.lookups * v, p.lookups * p.idx_bytes)
}

/// Accumulation step of coalescing only: every expanded row is read, each
/// partial-sum row is read back once and written once; sorted positions and
/// sorted keys are the index stream.
pub fn traffic_coalesce(p: &TrafficParams) -> TrafficReport {
    let v = p.vector_bytes();
    TrafficReport::new(
        Primitive::Coalesce,
        (p.lookups + p.unique) * v,
        p.unique * v,
        2 * p.lookups * p.idx_bytes,
    )
}

/// Single fused pass over the gradient table; the expanded gradients are
/// never materialized.
pub fn traffic_casted_gather_reduce(p: &TrafficParams) -> TrafficReport {
    let v = p.vector_bytes();
    TrafficReport::new(
        Primitive::CastedGatherReduce,
        p.lookups * v,
        p.unique * v,
        2 * p.lookups * p.idx_bytes,
    )
}

/// Read-modify-write of every touched table row.
pub fn traffic_scatter(p: &TrafficParams) -> TrafficReport {
    let v = p.vector_bytes();
    TrafficReport::new(Primitive::Scatter, p.unique * v, p.unique * v, p.unique * p.idx_bytes)
}

pub fn traffic(primitive: Primitive, p: &TrafficParams) -> TrafficReport {
    match primitive {
        Primitive::GatherReduce => traffic_gather_reduce(p),
        Primitive::Expand => traffic_expand(p),
        Primitive::Coalesce => traffic_coalesce(p),
        Primitive::CastedGatherReduce => traffic_casted_gather_reduce(p),
        Primitive::Scatter => traffic_scatter(p),
    }
}

/// Sink for the loads and stores a kernel performs.
///
/// Kernels are generic over the probe; the `()` implementation compiles to
/// nothing.
pub trait TrafficProbe {
    fn read(&mut self, bytes: u64);
    fn write(&mut self, bytes: u64);
    fn index(&mut self, bytes: u64);
}

impl TrafficProbe for () {
    #[inline(always)]
    fn read(&mut self, _: u64) {}
    #[inline(always)]
    fn write(&mut self, _: u64) {}
    #[inline(always)]
    fn index(&mut self, _: u64) {}
}

/// Counting probe.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrafficCounter {
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub index_bytes: u64,
}

impl TrafficCounter {
    pub fn report(&self, primitive: Primitive) -> TrafficReport {
        TrafficReport::new(primitive, self.bytes_read, self.bytes_written, self.index_bytes)
    }
}

impl TrafficProbe for TrafficCounter {
    #[inline]
    fn read(&mut self, bytes: u64) {
        self.bytes_read += bytes;
    }
    #[inline]
    fn write(&mut self, bytes: u64) {
        self.bytes_written += bytes;
    }
    #[inline]
    fn index(&mut self, bytes: u64) {
        self.index_bytes += bytes;
    }
}
