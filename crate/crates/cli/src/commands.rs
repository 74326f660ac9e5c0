//! Subcommand implementations. Each returns a serializable report and writes
//! its tables under the configured output directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use tensorcast::kernels::{
    casted_gather_reduce, coalesce_gradients, expand_gradients, max_relative_error, tensor_casting,
};
use tensorcast::nmpsim::{execute_batch, NmpInstruction, NmpResult};
use tensorcast::optim::OptimizerState;
use tensorcast::pipeline::{derive_durations, nmp_utilization, schedule, speedup, SystemDesign, TableTrace, Timeline};
use tensorcast::traffic::{traffic, Primitive, TrafficParams, TrafficReport};
use tensorcast::workload::{coalesce_shrink, gen_lookups, ModelConfig};
use tensorcast::{CastedIndex, EmbeddingTable, GradientBatch, LookupIndex, Matrix};

use crate::config::ExperimentConfig;

/// Fields every report starts with.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    fn new(command: &'static str, cfg: &ExperimentConfig) -> Self {
        Provenance {
            command,
            seed: cfg.seed,
            config_hash: cfg.hash(),
        }
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// Runs `f` on a rayon pool capped by `TENSORCAST_THREADS` when set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("TENSORCAST_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow!("TENSORCAST_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("TENSORCAST_THREADS must be a positive integer, got `{v}`");
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?.install(f))
}

fn traces(model: &ModelConfig, cfg: &ExperimentConfig) -> Result<Vec<TableTrace>> {
    let dist = cfg.distribution(model.table_rows)?;
    Ok(gen_lookups(model, &dist, cfg.seed)?
        .into_iter()
        .map(TableTrace::new)
        .collect())
}

// ---------------------------------------------------------------- equivalence

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub instance: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub golden_pass: bool,
    pub instances: usize,
    pub tolerance: f64,
    pub max_relative_error: f64,
    pub failures: Vec<Failure>,
    pub pass: bool,
}

/// A duplicate-heavy instance: at most 64 table rows, dim at most 8 and
/// up to 256 lookups, most of which hit a handful of hot rows.
pub struct Instance {
    pub table: EmbeddingTable,
    pub index: LookupIndex,
    pub grad: GradientBatch,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(1..=64usize);
    let dim = rng.gen_range(1..=8usize);
    let batch = rng.gen_range(1..=32usize);
    let lookups = rng.gen_range(1..=256usize);
    let hot = rng.gen_range(1..=rows.min(8)) as u64;
    let src = (0..lookups)
        .map(|_| {
            if rng.gen_bool(0.8) {
                rng.gen_range(0..hot)
            } else {
                rng.gen_range(0..rows as u64)
            }
        })
        .collect();
    let dst = (0..lookups).map(|_| rng.gen_range(0..batch as u64)).collect();
    let index = LookupIndex::new(src, dst, batch).expect("generated index is valid");
    let table = EmbeddingTable::from_fn(rows, dim, |_, _| rng.gen_range(-1.0f32..1.0)).unwrap();
    let grad = GradientBatch::new(
        Matrix::from_vec(
            batch,
            dim,
            (0..batch * dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect(),
        )
        .unwrap(),
    )
    .unwrap();
    Instance { table, index, grad }
}

/// Compares casted gather-reduce against expand + coalesce, then one
/// optimizer step driven by each. Returns the worst relative error.
pub fn check_instance(inst: &Instance, cast: &CastedIndex, cfg: &ExperimentConfig) -> Result<f64> {
    let expanded = expand_gradients(&inst.grad, &inst.index)?;
    let baseline = coalesce_gradients(&inst.index, &expanded)?;
    let casted = casted_gather_reduce(cast, &inst.grad)?;
    if baseline.rows() != casted.rows() {
        bail!("touched rows differ: {:?} vs {:?}", baseline.rows(), casted.rows());
    }
    let mut err = max_relative_error(baseline.grads(), casted.grads())?;

    let mut tables = [inst.table.clone(), inst.table.clone()];
    for (table, coal) in tables.iter_mut().zip([&baseline, &casted]) {
        let mut state = OptimizerState::new(cfg.optimizer, table)?;
        state.step(table, coal)?;
    }
    err = err.max(max_relative_error(tables[0].matrix(), tables[1].matrix())?);
    Ok(err)
}

fn golden_case() -> bool {
    let idx = LookupIndex::new(vec![1, 2, 4, 0, 2], vec![0, 0, 0, 1, 1], 2).unwrap();
    let cast = tensor_casting(&idx);
    cast.casted_src() == [1, 0, 0, 1, 0] && cast.casted_dst() == [0, 1, 2, 2, 3] && cast.unique_rows() == [0, 1, 2, 4]
}

/// Golden case plus `instances` random instances seeded `seed`, `seed + 1`, ...
pub fn cmd_equivalence(cfg: &ExperimentConfig) -> Result<EquivalenceReport> {
    let n = cfg.equivalence.instances;
    let tol = cfg.equivalence.tolerance;
    let results: Vec<(usize, u64, Result<f64>)> = with_thread_cap(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let seed = cfg.seed.wrapping_add(i as u64);
                let inst = random_instance(seed);
                let cast = tensor_casting(&inst.index);
                (i, seed, check_instance(&inst, &cast, cfg))
            })
            .collect()
    })?;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (instance, seed, r) in results {
        match r {
            Ok(e) if e <= tol => worst = worst.max(e),
            Ok(e) => {
                worst = worst.max(e);
                failures.push(Failure {
                    instance,
                    seed,
                    reason: format!("relative error {e:e} exceeds {tol:e}"),
                });
            }
            Err(e) => failures.push(Failure {
                instance,
                seed,
                reason: e.to_string(),
            }),
        }
    }
    let golden_pass = golden_case();
    let report = EquivalenceReport {
        provenance: Provenance::new("equivalence", cfg),
        golden_pass,
        instances: n,
        tolerance: tol,
        max_relative_error: worst,
        pass: golden_pass && failures.is_empty(),
        failures,
    };
    write_json(&cfg.out_dir, "equivalence.json", &report)?;
    Ok(report)
}

/// Checks a stored casted index against the lookups it came from, using
/// random gradients and table values drawn from `cfg.seed`.
pub fn cmd_equivalence_files(cfg: &ExperimentConfig, index: &Path, casted_dir: &Path) -> Result<EquivalenceReport> {
    let idx = read_index(index)?;
    let cast = read_casted(casted_dir, idx.num_outputs())?;
    let dim = cfg.dims[0];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rows = idx.src().iter().max().map_or(1, |&m| m as usize + 1);
    let b = idx.num_outputs();
    let inst = Instance {
        table: EmbeddingTable::from_fn(rows, dim, |_, _| rng.gen_range(-1.0f32..1.0))?,
        grad: GradientBatch::new(Matrix::from_vec(
            b,
            dim,
            (0..b * dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect(),
        )?)?,
        index: idx,
    };
    let tol = cfg.equivalence.tolerance;
    let (worst, failures) = match check_instance(&inst, &cast, cfg) {
        Ok(e) if e <= tol => (e, vec![]),
        Ok(e) => (
            e,
            vec![Failure {
                instance: 0,
                seed: cfg.seed,
                reason: format!("relative error {e:e} exceeds {tol:e}"),
            }],
        ),
        Err(e) => (
            0.0,
            vec![Failure {
                instance: 0,
                seed: cfg.seed,
                reason: e.to_string(),
            }],
        ),
    };
    let report = EquivalenceReport {
        provenance: Provenance::new("equivalence", cfg),
        golden_pass: golden_case(),
        instances: 1,
        tolerance: tol,
        max_relative_error: worst,
        pass: failures.is_empty(),
        failures,
    };
    write_json(&cfg.out_dir, "equivalence.json", &report)?;
    Ok(report)
}

// ----------------------------------------------------------------------- cast

fn read_u64_pairs(path: &Path, header: [&str; 2]) -> Result<Vec<(u64, u64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: line {}", path.display(), n + 1))?;
        if n == 0 && rec.iter().eq(header) {
            continue;
        }
        if rec.len() != 2 {
            bail!(
                "{}: line {}: expected 2 fields, got {}",
                path.display(),
                n + 1,
                rec.len()
            );
        }
        let parse = |s: &str| {
            s.parse::<u64>()
                .with_context(|| format!("{}: line {}: bad integer `{s}`", path.display(), n + 1))
        };
        out.push((parse(&rec[0])?, parse(&rec[1])?));
    }
    if out.is_empty() {
        bail!("{}: no index entries", path.display());
    }
    Ok(out)
}

/// Reads a `src,dst` CSV; the header is optional and B is `max(dst) + 1`.
pub fn read_index(path: &Path) -> Result<LookupIndex> {
    let (src, dst) = read_u64_pairs(path, ["src", "dst"])?.into_iter().unzip();
    Ok(LookupIndex::from_pairs(src, dst)?)
}

pub const CASTED_FILE: &str = "casted.csv";
pub const UNIQUE_FILE: &str = "unique_rows.csv";

pub fn read_casted(dir: &Path, num_inputs: usize) -> Result<CastedIndex> {
    let (casted_src, casted_dst) = read_u64_pairs(&dir.join(CASTED_FILE), ["casted_src", "casted_dst"])?
        .into_iter()
        .unzip();
    let path = dir.join(UNIQUE_FILE);
    let mut rdr = csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
    let unique = rdr
        .deserialize::<u64>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(CastedIndex::new(casted_src, casted_dst, unique, num_inputs)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct CastReport {
    pub input: PathBuf,
    pub lookups: usize,
    pub num_outputs: usize,
    pub unique_rows: usize,
    pub casted: PathBuf,
    pub unique: PathBuf,
}

pub fn cmd_cast(input: &Path, out_dir: &Path) -> Result<CastReport> {
    let idx = read_index(input)?;
    let cast = tensor_casting(&idx);
    let casted = out_dir.join(CASTED_FILE);
    let mut w = csv_writer(&casted)?;
    w.write_record(["casted_src", "casted_dst"])?;
    for (s, d) in cast.casted_src().iter().zip(cast.casted_dst()) {
        w.serialize((s, d))?;
    }
    w.flush()?;
    let unique = out_dir.join(UNIQUE_FILE);
    let mut w = csv_writer(&unique)?;
    w.write_record(["unique_row"])?;
    for r in cast.unique_rows() {
        w.serialize(r)?;
    }
    w.flush()?;
    let report = CastReport {
        input: input.to_path_buf(),
        lookups: idx.len(),
        num_outputs: idx.num_outputs(),
        unique_rows: cast.num_unique(),
        casted,
        unique,
    };
    write_json(out_dir, "cast.json", &report)?;
    Ok(report)
}

// ------------------------------------------------------------------------ run

#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub design: SystemDesign,
    pub batch: usize,
    pub dim: usize,
    pub iteration_time: f64,
    pub speedup_vs_baseline_cpu: Option<f64>,
    pub nmp_utilization: f64,
    pub exposed_cast: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub model: String,
    pub rows: Vec<RunRow>,
}

fn cells(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.batches
        .iter()
        .flat_map(|&b| cfg.dims.iter().map(move |&d| (b, d)))
        .collect()
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let base = cfg.model()?;
    let cells = cells(cfg);
    let timelines: Vec<Vec<Timeline>> = with_thread_cap(|| {
        cells
            .par_iter()
            .map(|&(batch, dim)| -> Result<Vec<Timeline>> {
                let model = base.with_batch(batch).with_dim(dim);
                let traces = traces(&model, cfg)?;
                cfg.designs
                    .iter()
                    .map(|&design| {
                        let d = derive_durations(design, &model, &traces, &cfg.system)?;
                        Ok(schedule(design, &d)?)
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let out = &cfg.out_dir;
    let mut breakdown = csv_writer(&out.join("breakdown.csv"))?;
    breakdown.write_record([
        "design", "batch", "dim", "stage", "resource", "start", "duration", "share",
    ])?;
    let mut rows = Vec::new();
    for (&(batch, dim), cell) in cells.iter().zip(&timelines) {
        let reference = cell.iter().find(|t| t.design == SystemDesign::BaselineCPU);
        for t in cell {
            for (span, (_, _, share)) in t.spans.iter().zip(t.breakdown()) {
                breakdown.serialize((
                    t.design,
                    batch,
                    dim,
                    span.name,
                    span.resource,
                    span.start,
                    span.duration,
                    share,
                ))?;
            }
            let name = format!("{}_b{batch}_d{dim}.csv", t.design);
            let path = out.join("timelines").join(name);
            fs::create_dir_all(path.parent().unwrap())?;
            fs::write(&path, t.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            rows.push(RunRow {
                design: t.design,
                batch,
                dim,
                iteration_time: t.iteration_time,
                speedup_vs_baseline_cpu: reference.map(|r| speedup(r, t)),
                nmp_utilization: nmp_utilization(t),
                exposed_cast: t.exposed_cast(),
            });
        }
    }
    breakdown.flush()?;

    let mut w = csv_writer(&out.join("speedup.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let report = RunReport {
        provenance: Provenance::new("run", cfg),
        model: base.name.clone(),
        rows,
    };
    write_json(out, "run.json", &report)?;
    Ok(report)
}

// -------------------------------------------------------------------- traffic

#[derive(Debug, Clone, Serialize)]
pub struct TrafficCell {
    pub batch: usize,
    pub dim: usize,
    pub lookups: u64,
    pub outputs: u64,
    pub unique: u64,
    pub reports: Vec<TrafficReport>,
    /// Element bytes of expand + coalesce over gather-reduce.
    pub expand_coalesce_over_gather_reduce: f64,
    /// Element bytes of casted gather-reduce over expand + coalesce.
    pub casted_over_expand_coalesce: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrafficSummary {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub cells: Vec<TrafficCell>,
}

fn traffic_cell(batch: usize, dim: usize, params: &[TrafficParams]) -> TrafficCell {
    let reports: Vec<TrafficReport> = Primitive::ALL
        .iter()
        .map(|&prim| {
            params
                .iter()
                .map(|p| traffic(prim, p))
                .reduce(|a, b| a.combined(&b))
                .expect("at least one table")
        })
        .collect();
    let elems = |prim: Primitive| -> f64 {
        reports
            .iter()
            .find(|r| r.primitive == prim)
            .map_or(0.0, |r| r.element_bytes() as f64)
    };
    let ec = elems(Primitive::Expand) + elems(Primitive::Coalesce);
    TrafficCell {
        batch,
        dim,
        lookups: params.iter().map(|p| p.lookups).sum(),
        outputs: params.iter().map(|p| p.outputs).sum(),
        unique: params.iter().map(|p| p.unique).sum(),
        expand_coalesce_over_gather_reduce: ec / elems(Primitive::GatherReduce),
        casted_over_expand_coalesce: elems(Primitive::CastedGatherReduce) / ec,
        reports,
    }
}

/// Per-primitive traffic for each (batch, dim) cell, summed over tables.
/// A fixed `traffic` instance in the config replaces the workload sizes.
pub fn cmd_traffic(cfg: &ExperimentConfig) -> Result<TrafficSummary> {
    let base = cfg.model()?;
    let sys = &cfg.system;
    let mut cells_out = Vec::new();
    for &batch in &cfg.batches {
        let sized: Vec<(u64, u64, u64)> = match cfg.traffic {
            Some(t) => vec![(t.lookups, t.outputs, t.unique)],
            None => traces(&base.with_batch(batch), cfg)?
                .iter()
                .map(|t| {
                    (
                        t.index.len() as u64,
                        t.index.num_outputs() as u64,
                        t.cast.num_unique() as u64,
                    )
                })
                .collect(),
        };
        for &dim in &cfg.dims {
            let params = sized
                .iter()
                .map(|&(l, b, u)| {
                    let p = TrafficParams {
                        lookups: l,
                        outputs: b,
                        unique: u,
                        dim: dim as u64,
                        elem_bytes: sys.elem_bytes,
                        idx_bytes: sys.idx_bytes,
                    };
                    p.validate().map(|_| p)
                })
                .collect::<tensorcast::Result<Vec<_>>>()?;
            cells_out.push(traffic_cell(batch, dim, &params));
        }
    }
    let mut w = csv_writer(&cfg.out_dir.join("traffic.csv"))?;
    w.write_record(["batch", "dim", "primitive", "reads", "writes", "index", "total"])?;
    for c in &cells_out {
        for r in &c.reports {
            w.serialize((
                c.batch,
                c.dim,
                r.primitive.name(),
                r.bytes_read,
                r.bytes_written,
                r.index_bytes,
                r.total,
            ))?;
        }
    }
    w.flush()?;
    let summary = TrafficSummary {
        provenance: Provenance::new("traffic", cfg),
        cells: cells_out,
    };
    write_json(&cfg.out_dir, "traffic.json", &summary)?;
    Ok(summary)
}

// ------------------------------------------------------------------- simulate

#[derive(Debug, Clone, Serialize)]
pub struct SimulateCell {
    pub batch: usize,
    pub dim: usize,
    pub op: &'static str,
    pub result: NmpResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub cells: Vec<SimulateCell>,
}

/// Rank-level timing of the forward gather-reduce, the casted gather-reduce
/// and the scatter of every table in the generated workload.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateReport> {
    let base = cfg.model()?;
    let nmp = &cfg.system.nmp;
    let mut cells_out = Vec::new();
    for &batch in &cfg.batches {
        let traces = traces(&base.with_batch(batch), cfg)?;
        let n = traces.len() as u64;
        for &dim in &cfg.dims {
            let vb = dim as u64 * cfg.system.elem_bytes;
            let gather: Vec<_> = traces
                .iter()
                .enumerate()
                .map(|(t, tr)| {
                    NmpInstruction::gather_reduce(t as u64, tr.index.src().to_vec(), tr.index.dst().to_vec(), vb)
                })
                .collect();
            let casted: Vec<_> = traces
                .iter()
                .enumerate()
                .map(|(t, tr)| {
                    NmpInstruction::gather_reduce(
                        n + t as u64,
                        tr.cast.casted_src().to_vec(),
                        tr.cast.casted_dst().to_vec(),
                        vb,
                    )
                })
                .collect();
            let scatter: Vec<_> = traces
                .iter()
                .enumerate()
                .map(|(t, tr)| NmpInstruction::scatter(t as u64, tr.cast.unique_rows().to_vec(), vb))
                .collect();
            for (op, instrs) in [
                ("gather_reduce", gather),
                ("casted_gather_reduce", casted),
                ("scatter", scatter),
            ] {
                cells_out.push(SimulateCell {
                    batch,
                    dim,
                    op,
                    result: execute_batch(&instrs, nmp)?,
                });
            }
        }
    }
    let mut w = csv_writer(&cfg.out_dir.join("simulate.csv"))?;
    w.write_record([
        "batch",
        "dim",
        "op",
        "elapsed",
        "effective_bw",
        "bottleneck_rank",
        "total_accesses",
    ])?;
    for c in &cells_out {
        w.serialize((
            c.batch,
            c.dim,
            c.op,
            c.result.elapsed,
            c.result.effective_bw,
            c.result.bottleneck_rank,
            c.result.total_accesses(),
        ))?;
    }
    w.flush()?;
    let report = SimulateReport {
        provenance: Provenance::new("simulate", cfg),
        cells: cells_out,
    };
    write_json(&cfg.out_dir, "simulate.json", &report)?;
    Ok(report)
}

// --------------------------------------------------------------- gen-workload

#[derive(Debug, Clone, Serialize)]
pub struct WorkloadReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub index_files: Vec<PathBuf>,
    pub shrink: Vec<tensorcast::workload::ShrinkPoint>,
}

/// Writes `workload/b{batch}/table_{t}.csv` (`src,dst`) per batch and table,
/// plus `shrink.csv` over the batch sweep.
pub fn cmd_gen_workload(cfg: &ExperimentConfig) -> Result<WorkloadReport> {
    let base = cfg.model()?;
    let dist = cfg.distribution(base.table_rows)?;
    let mut index_files = Vec::new();
    for &batch in &cfg.batches {
        let model = base.with_batch(batch);
        for (t, idx) in gen_lookups(&model, &dist, cfg.seed)?.iter().enumerate() {
            let path = cfg
                .out_dir
                .join("workload")
                .join(format!("b{batch}"))
                .join(format!("table_{t}.csv"));
            let mut w = csv_writer(&path)?;
            w.write_record(["src", "dst"])?;
            for pair in idx.src().iter().zip(idx.dst()) {
                w.serialize(pair)?;
            }
            w.flush()?;
            index_files.push(path);
        }
    }
    let shrink = coalesce_shrink(&base, &dist, &cfg.batches, cfg.seed)?;
    let mut w = csv_writer(&cfg.out_dir.join("shrink.csv"))?;
    w.write_record(["batch", "expanded_size", "coalesced_size", "ratio"])?;
    for p in &shrink {
        w.serialize((p.batch, p.expanded_size, p.coalesced_size, p.ratio()))?;
    }
    w.flush()?;
    let report = WorkloadReport {
        provenance: Provenance::new("gen-workload", cfg),
        index_files,
        shrink,
    };
    write_json(&cfg.out_dir, "workload.json", &report)?;
    Ok(report)
}
