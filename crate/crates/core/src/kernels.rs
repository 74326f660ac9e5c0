//! Embedding-layer training primitives.
//!
//! Forward: [`gather_reduce`]. Backward, baseline: [`expand_gradients`]
//! followed by [`coalesce_gradients`]. Backward, casted: [`tensor_casting`]
//! (index-only, can run ahead of time) followed by [`casted_gather_reduce`].
//! Both backward routes end in [`gradient_scatter`].
//!
//! All reductions accumulate in `f64` in ascending lookup order per output
//! row and round to `f32` once on write-out, so the two backward routes are
//! bit-identical for the same stable sort.
//!
//! Each kernel has a `*_probed` twin that reports its loads and stores into a
//! [`TrafficProbe`]; the element counts match [`crate::traffic`] exactly.

use std::mem::size_of;

use crate::error::{Error, Result};
use crate::tensor::{EmbeddingTable, GradientBatch, Matrix};
use crate::traffic::TrafficProbe;

const ELEM_BYTES: u64 = size_of::<f32>() as u64;
const IDX_BYTES: u64 = size_of::<u64>() as u64;

/// Parallel `(src, dst)` lookup arrays for one table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupIndex {
    src: Vec<u64>,
    dst: Vec<u64>,
    num_outputs: usize,
}

impl LookupIndex {
    pub fn new(src: Vec<u64>, dst: Vec<u64>, num_outputs: usize) -> Result<Self> {
        if src.is_empty() {
            return Err(Error::Empty("lookup index"));
        }
        if src.len() != dst.len() {
            return Err(Error::Shape(format!(
                "src has {} entries, dst has {}",
                src.len(),
                dst.len()
            )));
        }
        if num_outputs == 0 {
            return Err(Error::Empty("output slots"));
        }
        if let Some((position, &value)) = dst.iter().enumerate().find(|(_, &d)| d >= num_outputs as u64) {
            return Err(Error::IndexOutOfBounds {
                what: "dst",
                position,
                value,
                limit: num_outputs as u64,
            });
        }
        Ok(LookupIndex { src, dst, num_outputs })
    }

    /// Index whose output count is `max(dst) + 1`.
    pub fn from_pairs(src: Vec<u64>, dst: Vec<u64>) -> Result<Self> {
        let b = dst.iter().max().map(|&m| m as usize + 1).unwrap_or(0);
        Self::new(src, dst, b)
    }

    pub fn src(&self) -> &[u64] {
        &self.src
    }

    pub fn dst(&self) -> &[u64] {
        &self.dst
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    /// Checks every `src` entry against the table's row count.
    pub fn check_rows(&self, rows: usize) -> Result<()> {
        match self.src.iter().position(|&s| s >= rows as u64) {
            Some(position) => Err(Error::IndexOutOfBounds {
                what: "src",
                position,
                value: self.src[position],
                limit: rows as u64,
            }),
            None => Ok(()),
        }
    }
}

/// Permuted index produced by [`tensor_casting`].
///
/// `casted_src` addresses rows of the gradient batch, `casted_dst` addresses
/// rows of the coalesced output, and `unique_rows[u]` is the table row that
/// coalesced output `u` belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CastedIndex {
    casted_src: Vec<u64>,
    casted_dst: Vec<u64>,
    unique_rows: Vec<u64>,
    num_inputs: usize,
}

impl CastedIndex {
    /// Validates the structural invariants: `casted_dst` starts at zero and
    /// steps by 0 or 1, `unique_rows` is strictly increasing with one entry
    /// per distinct `casted_dst`, and `casted_src < num_inputs`.
    pub fn new(casted_src: Vec<u64>, casted_dst: Vec<u64>, unique_rows: Vec<u64>, num_inputs: usize) -> Result<Self> {
        if casted_src.is_empty() {
            return Err(Error::Empty("casted index"));
        }
        if casted_src.len() != casted_dst.len() {
            return Err(Error::Shape(format!(
                "casted_src has {} entries, casted_dst has {}",
                casted_src.len(),
                casted_dst.len()
            )));
        }
        if casted_dst[0] != 0 {
            return Err(Error::InvalidParameter("casted_dst must start at 0".into()));
        }
        for (i, w) in casted_dst.windows(2).enumerate() {
            if w[1] != w[0] && w[1] != w[0] + 1 {
                return Err(Error::InvalidParameter(format!(
                    "casted_dst steps from {} to {} at position {}",
                    w[0],
                    w[1],
                    i + 1
                )));
            }
        }
        let u = casted_dst[casted_dst.len() - 1] as usize + 1;
        if unique_rows.len() != u {
            return Err(Error::Shape(format!(
                "{} unique rows for {u} coalesced outputs",
                unique_rows.len()
            )));
        }
        if let Some(i) = unique_rows.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "unique_rows not strictly increasing at position {}",
                i + 1
            )));
        }
        if let Some(position) = casted_src.iter().position(|&s| s >= num_inputs as u64) {
            return Err(Error::IndexOutOfBounds {
                what: "casted_src",
                position,
                value: casted_src[position],
                limit: num_inputs as u64,
            });
        }
        Ok(CastedIndex {
            casted_src,
            casted_dst,
            unique_rows,
            num_inputs,
        })
    }

    pub fn casted_src(&self) -> &[u64] {
        &self.casted_src
    }

    pub fn casted_dst(&self) -> &[u64] {
        &self.casted_dst
    }

    pub fn unique_rows(&self) -> &[u64] {
        &self.unique_rows
    }

    /// Number of gradient rows the index gathers from.
    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn len(&self) -> usize {
        self.casted_src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.casted_src.is_empty()
    }

    /// Number of coalesced outputs.
    pub fn num_unique(&self) -> usize {
        self.unique_rows.len()
    }

    pub fn into_parts(self) -> (Vec<u64>, Vec<u64>, Vec<u64>, usize) {
        (self.casted_src, self.casted_dst, self.unique_rows, self.num_inputs)
    }
}

/// One accumulated gradient per distinct table row.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescedGradients {
    rows: Vec<u64>,
    grads: Matrix,
}

impl CoalescedGradients {
    pub fn new(rows: Vec<u64>, grads: Matrix) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("coalesced gradients"));
        }
        if rows.len() != grads.rows() {
            return Err(Error::Shape(format!(
                "{} row ids for {} gradient rows",
                rows.len(),
                grads.rows()
            )));
        }
        if let Some(i) = rows.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "coalesced rows not strictly increasing at position {}",
                i + 1
            )));
        }
        Ok(CoalescedGradients { rows, grads })
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn grads(&self) -> &Matrix {
        &self.grads
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.grads.dim()
    }
}

#[inline]
fn accumulate(acc: &mut [f64], row: &[f32]) {
    for (a, &x) in acc.iter_mut().zip(row) {
        *a += x as f64;
    }
}

#[inline]
fn store(out: &mut [f32], acc: &[f64]) {
    for (o, &a) in out.iter_mut().zip(acc) {
        *o = a as f32;
    }
}

/// Fused gather and sum: `out[b] = Σ table[src[i]]` over all `i` with
/// `dst[i] == b`. Slots without lookups are zero.
pub fn gather_reduce(table: &EmbeddingTable, idx: &LookupIndex) -> Result<Matrix> {
    gather_reduce_probed(table, idx, &mut ())
}

pub fn gather_reduce_probed<P: TrafficProbe>(
    table: &EmbeddingTable,
    idx: &LookupIndex,
    probe: &mut P,
) -> Result<Matrix> {
    idx.check_rows(table.rows())?;
    let dim = table.dim();
    let vb = dim as u64 * ELEM_BYTES;
    let mut acc = vec![0f64; idx.num_outputs() * dim];
    for (&s, &d) in idx.src().iter().zip(idx.dst()) {
        probe.index(2 * IDX_BYTES);
        probe.read(vb);
        let d = d as usize;
        accumulate(&mut acc[d * dim..(d + 1) * dim], table.row(s as usize));
    }
    let mut out = Matrix::zeros(idx.num_outputs(), dim);
    for b in 0..idx.num_outputs() {
        store(out.row_mut(b), &acc[b * dim..(b + 1) * dim]);
        probe.write(vb);
    }
    Ok(out)
}

/// Replicates each batch gradient once per lookup it covered:
/// `exp[i] = grad[dst[i]]`.
pub fn expand_gradients(grad: &GradientBatch, idx: &LookupIndex) -> Result<Matrix> {
    expand_gradients_probed(grad, idx, &mut ())
}

pub fn expand_gradients_probed<P: TrafficProbe>(
    grad: &GradientBatch,
    idx: &LookupIndex,
    probe: &mut P,
) -> Result<Matrix> {
    let b = idx.num_outputs();
    if grad.rows() != b {
        return Err(Error::Shape(format!(
            "gradient batch has {} rows, index has {b} outputs",
            grad.rows()
        )));
    }
    let dim = grad.dim();
    let vb = dim as u64 * ELEM_BYTES;

    // Group lookup positions by slot (counting sort on dst), so each batch
    // gradient is loaded once and stored to every position it covers.
    let mut offsets = vec![0usize; b + 1];
    for &d in idx.dst() {
        probe.index(IDX_BYTES);
        offsets[d as usize + 1] += 1;
    }
    for i in 0..b {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut positions = vec![0usize; idx.len()];
    for (i, &d) in idx.dst().iter().enumerate() {
        let c = &mut cursor[d as usize];
        positions[*c] = i;
        *c += 1;
    }

    let mut out = Matrix::zeros(idx.len(), dim);
    for slot in 0..b {
        let covered = &positions[offsets[slot]..offsets[slot + 1]];
        if covered.is_empty() {
            continue;
        }
        let row = grad.row(slot);
        probe.read(vb);
        for &i in covered {
            out.row_mut(i).copy_from_slice(row);
            probe.write(vb);
        }
    }
    Ok(out)
}

/// Stable arg-sort of `keys`.
pub fn arg_sort(keys: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| keys[i]);
    order
}

/// Stable sort of `(key, value)` pairs by key.
pub fn sort_by_key(keys: &[u64], values: &[u64]) -> (Vec<u64>, Vec<u64>) {
    debug_assert_eq!(keys.len(), values.len());
    let order = arg_sort(keys);
    let sorted_keys = order.iter().map(|&i| keys[i]).collect();
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    (sorted_keys, sorted_values)
}

/// Inclusive prefix sum.
pub fn cumulative_sum(xs: &[u64]) -> Vec<u64> {
    xs.iter()
        .scan(0u64, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Gradient coalescing, baseline route: arg-sort `src`, then accumulate runs
/// of equal sorted keys into consecutive output rows.
pub fn coalesce_gradients(idx: &LookupIndex, exp_grad: &Matrix) -> Result<CoalescedGradients> {
    coalesce_gradients_probed(idx, exp_grad, &mut ())
}

pub fn coalesce_gradients_probed<P: TrafficProbe>(
    idx: &LookupIndex,
    exp_grad: &Matrix,
    probe: &mut P,
) -> Result<CoalescedGradients> {
    if exp_grad.rows() != idx.len() {
        return Err(Error::Shape(format!(
            "expanded gradients have {} rows, index has {} lookups",
            exp_grad.rows(),
            idx.len()
        )));
    }
    let dim = exp_grad.dim();
    if dim == 0 {
        return Err(Error::Shape("zero-width gradients".into()));
    }
    let vb = dim as u64 * ELEM_BYTES;

    // Step A: sort
    let sorted_pos = arg_sort(idx.src());
    let sorted_src: Vec<u64> = sorted_pos.iter().map(|&p| idx.src()[p]).collect();

    // Step B: accumulate. Output rows are read back, updated and stored once
    // per run of equal keys.
    let mut rows: Vec<u64> = Vec::new();
    let mut out: Vec<f32> = Vec::new();
    let mut acc = vec![0f64; dim];
    let mut prev: Option<u64> = None;
    for (&pos, &curr) in sorted_pos.iter().zip(&sorted_src) {
        probe.index(2 * IDX_BYTES);
        if prev != Some(curr) {
            if prev.is_some() {
                flush_run(&mut out, &acc, probe, vb);
            }
            rows.push(curr);
            // fresh partial-sum row, read back before accumulation
            acc.iter_mut().for_each(|a| *a = 0.0);
            probe.read(vb);
            prev = Some(curr);
        }
        accumulate(&mut acc, exp_grad.row(pos));
        probe.read(vb);
    }
    flush_run(&mut out, &acc, probe, vb);

    let grads = Matrix::from_vec(rows.len(), dim, out)?;
    CoalescedGradients::new(rows, grads)
}

fn flush_run<P: TrafficProbe>(out: &mut Vec<f32>, acc: &[f64], probe: &mut P, vb: u64) {
    out.extend(acc.iter().map(|&a| a as f32));
    probe.write(vb);
}

/// Permutes a lookup index so that expand-coalesce becomes a single
/// gather-reduce over the gradient batch.
///
/// Sorts `(src, dst)` by `src` (stable), uses the sorted `dst` as the new
/// gather index, and numbers runs of equal sorted `src` with a prefix sum
/// over run-head flags to get the new reduce index.
pub fn tensor_casting(idx: &LookupIndex) -> CastedIndex {
    let (sorted_src, sorted_dst) = sort_by_key(idx.src(), idx.dst());
    let casted_src = sorted_dst;

    let mut scan = vec![0u64; sorted_src.len()];
    for i in 1..sorted_src.len() {
        scan[i] = (sorted_src[i] != sorted_src[i - 1]) as u64;
    }
    scan[0] = 1;
    let casted_dst: Vec<u64> = cumulative_sum(&scan).into_iter().map(|c| c - 1).collect();

    let unique_rows = sorted_src
        .iter()
        .zip(&scan)
        .filter(|(_, &head)| head == 1)
        .map(|(&s, _)| s)
        .collect();

    CastedIndex {
        casted_src,
        casted_dst,
        unique_rows,
        num_inputs: idx.num_outputs(),
    }
}

/// Gather-reduce over the gradient batch with a casted index:
/// `coal[casted_dst[i]] += grad[casted_src[i]]`, ascending `i`.
pub fn casted_gather_reduce(cast: &CastedIndex, grad: &GradientBatch) -> Result<CoalescedGradients> {
    casted_gather_reduce_probed(cast, grad, &mut ())
}

pub fn casted_gather_reduce_probed<P: TrafficProbe>(
    cast: &CastedIndex,
    grad: &GradientBatch,
    probe: &mut P,
) -> Result<CoalescedGradients> {
    if let Some(position) = cast.casted_src().iter().position(|&s| s >= grad.rows() as u64) {
        return Err(Error::IndexOutOfBounds {
            what: "casted_src",
            position,
            value: cast.casted_src()[position],
            limit: grad.rows() as u64,
        });
    }
    let dim = grad.dim();
    let vb = dim as u64 * ELEM_BYTES;
    let u = cast.num_unique();
    let mut acc = vec![0f64; u * dim];
    for (&s, &d) in cast.casted_src().iter().zip(cast.casted_dst()) {
        probe.index(2 * IDX_BYTES);
        probe.read(vb);
        let d = d as usize;
        accumulate(&mut acc[d * dim..(d + 1) * dim], grad.row(s as usize));
    }
    let mut out = Matrix::zeros(u, dim);
    for r in 0..u {
        store(out.row_mut(r), &acc[r * dim..(r + 1) * dim]);
        probe.write(vb);
    }
    CoalescedGradients::new(cast.unique_rows().to_vec(), out)
}

/// Applies `update(row_id, table_row, grad_row)` to every coalesced row.
/// All row ids are validated before the first mutation.
pub fn gradient_scatter<F>(table: &mut EmbeddingTable, coal: &CoalescedGradients, update: F) -> Result<()>
where
    F: FnMut(u64, &mut [f32], &[f32]),
{
    gradient_scatter_probed(table, coal, update, &mut ())
}

pub fn gradient_scatter_probed<F, P>(
    table: &mut EmbeddingTable,
    coal: &CoalescedGradients,
    mut update: F,
    probe: &mut P,
) -> Result<()>
where
    F: FnMut(u64, &mut [f32], &[f32]),
    P: TrafficProbe,
{
    check_scatter(table, coal)?;
    let vb = table.dim() as u64 * ELEM_BYTES;
    for (u, &r) in coal.rows().iter().enumerate() {
        probe.index(IDX_BYTES);
        probe.read(vb);
        update(r, table.row_mut(r as usize), coal.grads().row(u));
        probe.write(vb);
    }
    Ok(())
}

pub(crate) fn check_scatter(table: &EmbeddingTable, coal: &CoalescedGradients) -> Result<()> {
    if coal.dim() != table.dim() {
        return Err(Error::Shape(format!(
            "gradient width {} != table width {}",
            coal.dim(),
            table.dim()
        )));
    }
    if let Some(position) = coal.rows().iter().position(|&r| r >= table.rows() as u64) {
        return Err(Error::IndexOutOfBounds {
            what: "coalesced row",
            position,
            value: coal.rows()[position],
            limit: table.rows() as u64,
        });
    }
    Ok(())
}

/// Largest relative element difference between two equally shaped matrices.
/// Elements that compare equal contribute zero.
pub fn max_relative_error(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.rows() != b.rows() || a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.dim(),
            b.rows(),
            b.dim()
        )));
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| {
            let (x, y) = (x as f64, y as f64);
            if x == y {
                0.0
            } else {
                (x - y).abs() / x.abs().max(y.abs())
            }
        })
        .fold(0.0, f64::max))
}
