//! Per-iteration execution timelines for the four system designs.
//!
//! Baseline designs run gradient expand-coalesce on the CPU after the MLP
//! backward pass. The casting designs copy the lookup index to the GPU and
//! cast it while the forward gather-reduce runs, then replace
//! expand-coalesce with a casted gather-reduce. The `*Nmp` designs move
//! gather-reduce, casted gather-reduce and scatter into the memory pool.
//!
//! Each stage occupies one resource; a stage starts once its dependencies
//! have finished and its resource is free. Spans on one resource never
//! overlap.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{CastedIndex, LookupIndex};
use crate::nmpsim::{execute_batch, NmpConfig, NmpInstruction};
use crate::traffic::{self, TrafficParams};
use crate::workload::ModelConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    FwdEmbGatherReduce,
    FwdMLP,
    BwdMLP,
    Cast,
    ExpandCoalesce,
    CastedGatherReduce,
    Scatter,
    IndexCopy,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::FwdEmbGatherReduce,
        Stage::FwdMLP,
        Stage::BwdMLP,
        Stage::Cast,
        Stage::ExpandCoalesce,
        Stage::CastedGatherReduce,
        Stage::Scatter,
        Stage::IndexCopy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::FwdEmbGatherReduce => "FwdEmbGatherReduce",
            Stage::FwdMLP => "FwdMLP",
            Stage::BwdMLP => "BwdMLP",
            Stage::Cast => "Cast",
            Stage::ExpandCoalesce => "ExpandCoalesce",
            Stage::CastedGatherReduce => "CastedGatherReduce",
            Stage::Scatter => "Scatter",
            Stage::IndexCopy => "IndexCopy",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Resource {
    CPU,
    GPU,
    NMP,
    LINK,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SystemDesign {
    BaselineCPU,
    BaselineNMP,
    OursCPU,
    OursNMP,
}

impl SystemDesign {
    pub const ALL: [SystemDesign; 4] = [
        SystemDesign::BaselineCPU,
        SystemDesign::BaselineNMP,
        SystemDesign::OursCPU,
        SystemDesign::OursNMP,
    ];

    pub fn uses_casting(self) -> bool {
        matches!(self, SystemDesign::OursCPU | SystemDesign::OursNMP)
    }

    pub fn uses_nmp(self) -> bool {
        matches!(self, SystemDesign::BaselineNMP | SystemDesign::OursNMP)
    }

    /// Resource that runs gather-reduce style kernels and scatter.
    fn sparse_resource(self) -> Resource {
        if self.uses_nmp() {
            Resource::NMP
        } else {
            Resource::CPU
        }
    }

    /// `(stage, resource, dependencies)` in issue order.
    fn plan(self) -> Vec<(Stage, Resource, &'static [Stage])> {
        let x = self.sparse_resource();
        if self.uses_casting() {
            vec![
                (Stage::FwdEmbGatherReduce, x, &[]),
                (Stage::IndexCopy, Resource::LINK, &[]),
                (Stage::Cast, Resource::GPU, &[Stage::IndexCopy]),
                (Stage::FwdMLP, Resource::GPU, &[Stage::FwdEmbGatherReduce]),
                (Stage::BwdMLP, Resource::GPU, &[Stage::FwdMLP]),
                (Stage::CastedGatherReduce, x, &[Stage::BwdMLP, Stage::Cast]),
                (Stage::Scatter, x, &[Stage::CastedGatherReduce]),
            ]
        } else {
            vec![
                (Stage::FwdEmbGatherReduce, x, &[]),
                (Stage::FwdMLP, Resource::GPU, &[Stage::FwdEmbGatherReduce]),
                (Stage::BwdMLP, Resource::GPU, &[Stage::FwdMLP]),
                (Stage::ExpandCoalesce, Resource::CPU, &[Stage::BwdMLP]),
                (Stage::Scatter, x, &[Stage::ExpandCoalesce]),
            ]
        }
    }

    pub fn required_stages(self) -> Vec<Stage> {
        self.plan().into_iter().map(|(s, _, _)| s).collect()
    }
}

impl fmt::Display for SystemDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for SystemDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SystemDesign::ALL
            .into_iter()
            .find(|d| d.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown system design `{s}`")))
    }
}

/// Stage durations in seconds.
pub type Durations = BTreeMap<Stage, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSpan {
    pub name: Stage,
    pub resource: Resource,
    pub start: f64,
    pub duration: f64,
}

impl StageSpan {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub design: SystemDesign,
    pub spans: Vec<StageSpan>,
    pub iteration_time: f64,
}

impl Timeline {
    pub fn span(&self, stage: Stage) -> Option<&StageSpan> {
        self.spans.iter().find(|s| s.name == stage)
    }

    /// Time the forward MLP waits on casting beyond the forward
    /// gather-reduce. Zero for baseline designs.
    pub fn exposed_cast(&self) -> f64 {
        match (self.span(Stage::FwdEmbGatherReduce), self.span(Stage::FwdMLP)) {
            (Some(fwd), Some(mlp)) if self.design.uses_casting() => (mlp.start - fwd.end()).max(0.0),
            _ => 0.0,
        }
    }

    pub fn busy_time(&self, resource: Resource) -> f64 {
        self.spans
            .iter()
            .filter(|s| s.resource == resource)
            .fold(0.0, |acc, s| acc + s.duration)
    }

    pub const CSV_HEADER: &'static str = "span,name,resource,start,duration";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (i, s) in self.spans.iter().enumerate() {
            out.push_str(&format!(
                "{i},{},{},{:e},{:e}\n",
                s.name, s.resource, s.start, s.duration
            ));
        }
        out
    }

    /// `(stage, duration, share of iteration time)` per span, in issue order.
    pub fn breakdown(&self) -> Vec<(Stage, f64, f64)> {
        self.spans
            .iter()
            .map(|s| {
                let share = if self.iteration_time > 0.0 {
                    s.duration / self.iteration_time
                } else {
                    0.0
                };
                (s.name, s.duration, share)
            })
            .collect()
    }
}

pub fn schedule(design: SystemDesign, durations: &Durations) -> Result<Timeline> {
    let mut free: BTreeMap<Resource, f64> = BTreeMap::new();
    let mut done: BTreeMap<Stage, f64> = BTreeMap::new();
    let mut spans = Vec::new();
    for (stage, resource, deps) in design.plan() {
        let duration = *durations
            .get(&stage)
            .ok_or_else(|| Error::MissingStage(stage.to_string()))?;
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!("duration of {stage} is {duration}")));
        }
        let ready = deps.iter().map(|d| done[d]).fold(0.0, f64::max);
        let start = ready.max(free.get(&resource).copied().unwrap_or(0.0));
        let end = start + duration;
        free.insert(resource, end);
        done.insert(stage, end);
        spans.push(StageSpan {
            name: stage,
            resource,
            start,
            duration,
        });
    }
    let iteration_time = spans.iter().map(StageSpan::end).fold(0.0, f64::max);
    Ok(Timeline {
        design,
        spans,
        iteration_time,
    })
}

/// `a.iteration_time / b.iteration_time`: how much faster `b` is.
pub fn speedup(a: &Timeline, b: &Timeline) -> f64 {
    a.iteration_time / b.iteration_time
}

/// Fraction of the iteration during which the memory pool is busy.
pub fn nmp_utilization(t: &Timeline) -> f64 {
    if t.iteration_time > 0.0 {
        t.busy_time(Resource::NMP) / t.iteration_time
    } else {
        0.0
    }
}

/// Bandwidths and compute rates that turn traffic into time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    /// Host memory bandwidth for CPU-side embedding kernels, bytes/s.
    pub host_bw: f64,
    /// Host/pool to GPU link, bytes/s.
    pub link_bw: f64,
    /// GPU memory bandwidth used by the casting kernels, bytes/s.
    pub gpu_bw: f64,
    /// Sustained GPU FLOP rate for the MLPs.
    pub gpu_flops: f64,
    /// Radix passes charged to the GPU sort-by-key.
    pub cast_sort_passes: u32,
    /// Coalesce sort time as a multiple of coalesce accumulation time.
    pub coalesce_sort_multiplier: f64,
    pub elem_bytes: u64,
    pub idx_bytes: u64,
    pub nmp: NmpConfig,
    /// Fixed MLP durations in seconds, replacing the FLOP estimate.
    pub mlp_fwd: Option<f64>,
    pub mlp_bwd: Option<f64>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            host_bw: 80e9,
            link_bw: 25e9,
            gpu_bw: 900e9,
            gpu_flops: 14e12,
            cast_sort_passes: 4,
            coalesce_sort_multiplier: 1.0,
            elem_bytes: 4,
            idx_bytes: 8,
            nmp: NmpConfig::default(),
            mlp_fwd: None,
            mlp_bwd: None,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("host_bw", self.host_bw),
            ("link_bw", self.link_bw),
            ("gpu_bw", self.gpu_bw),
            ("gpu_flops", self.gpu_flops),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.coalesce_sort_multiplier >= 0.0) {
            return Err(Error::InvalidParameter(
                "coalesce_sort_multiplier must be non-negative".into(),
            ));
        }
        if self.elem_bytes == 0 || self.idx_bytes == 0 {
            return Err(Error::InvalidParameter("zero element or index width".into()));
        }
        self.nmp.validate()
    }
}

/// One table's lookups together with their casted form.
#[derive(Debug, Clone)]
pub struct TableTrace {
    pub index: LookupIndex,
    pub cast: CastedIndex,
}

impl TableTrace {
    pub fn new(index: LookupIndex) -> Self {
        let cast = crate::kernels::tensor_casting(&index);
        TableTrace { index, cast }
    }

    pub fn params(&self, dim: usize, sys: &SystemConfig) -> TrafficParams {
        TrafficParams {
            lookups: self.index.len() as u64,
            outputs: self.index.num_outputs() as u64,
            unique: self.cast.num_unique() as u64,
            dim: dim as u64,
            elem_bytes: sys.elem_bytes,
            idx_bytes: sys.idx_bytes,
        }
    }
}

/// Forward and backward MLP time from multiply-accumulate counts: two FLOPs
/// per MAC forward, twice that backward.
pub fn mlp_durations(model: &ModelConfig, sys: &SystemConfig) -> (f64, f64) {
    let macs: usize = [&model.bottom_mlp, &model.top_mlp]
        .iter()
        .flat_map(|layers| layers.windows(2).map(|w| w[0] * w[1]))
        .sum();
    let fwd = 2.0 * (model.batch * macs) as f64 / sys.gpu_flops;
    (sys.mlp_fwd.unwrap_or(fwd), sys.mlp_bwd.unwrap_or(2.0 * fwd))
}

/// GPU bytes for casting `lookups` pairs: `passes` radix passes reading and
/// writing keys and values, then the run-head scan and the prefix sum.
pub fn cast_bytes(lookups: u64, sys: &SystemConfig) -> u64 {
    let pair_pass = 2 * 2 * lookups * sys.idx_bytes;
    let scan = 2 * lookups * sys.idx_bytes;
    let prefix = 2 * lookups * sys.idx_bytes;
    sys.cast_sort_passes as u64 * pair_pass + scan + prefix
}

/// Stage durations for `design` on the given per-table traces.
///
/// Host stages stream their traffic totals at `host_bw`. Pool stages are
/// timed by running the actual row ids through the rank model, so lookup
/// skew shows up as rank imbalance. Gradient rows live in one pool buffer
/// per table, interleaved like a table.
pub fn derive_durations(
    design: SystemDesign,
    model: &ModelConfig,
    traces: &[TableTrace],
    sys: &SystemConfig,
) -> Result<Durations> {
    sys.validate()?;
    if traces.is_empty() {
        return Err(Error::Empty("table traces"));
    }
    let dim = model.dim;
    let host = |f: fn(&TrafficParams) -> traffic::TrafficReport| -> f64 {
        traces.iter().map(|t| f(&t.params(dim, sys)).total as f64).sum::<f64>() / sys.host_bw
    };
    let vb = dim as u64 * sys.elem_bytes;
    let n = traces.len() as u64;

    let mut d = Durations::new();
    let (mlp_f, mlp_b) = mlp_durations(model, sys);
    d.insert(Stage::FwdMLP, mlp_f);
    d.insert(Stage::BwdMLP, mlp_b);

    let fwd = if design.uses_nmp() {
        let instrs: Vec<_> = traces
            .iter()
            .enumerate()
            .map(|(t, tr)| {
                NmpInstruction::gather_reduce(t as u64, tr.index.src().to_vec(), tr.index.dst().to_vec(), vb)
            })
            .collect();
        execute_batch(&instrs, &sys.nmp)?.elapsed
    } else {
        host(traffic::traffic_gather_reduce)
    };
    d.insert(Stage::FwdEmbGatherReduce, fwd);

    let scatter = if design.uses_nmp() {
        let instrs: Vec<_> = traces
            .iter()
            .enumerate()
            .map(|(t, tr)| NmpInstruction::scatter(t as u64, tr.cast.unique_rows().to_vec(), vb))
            .collect();
        execute_batch(&instrs, &sys.nmp)?.elapsed
    } else {
        host(traffic::traffic_scatter)
    };
    d.insert(Stage::Scatter, scatter);

    if design.uses_casting() {
        let lookups: u64 = traces.iter().map(|t| t.index.len() as u64).sum();
        d.insert(Stage::IndexCopy, (2 * lookups * sys.idx_bytes) as f64 / sys.link_bw);
        d.insert(Stage::Cast, cast_bytes(lookups, sys) as f64 / sys.gpu_bw);
        let casted = if design.uses_nmp() {
            let instrs: Vec<_> = traces
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
            execute_batch(&instrs, &sys.nmp)?.elapsed
        } else {
            host(traffic::traffic_casted_gather_reduce)
        };
        d.insert(Stage::CastedGatherReduce, casted);
    } else {
        let expand = host(traffic::traffic_expand);
        let accumulate = host(traffic::traffic_coalesce);
        d.insert(
            Stage::ExpandCoalesce,
            expand + accumulate * (1.0 + sys.coalesce_sort_multiplier),
        );
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn durations(design: SystemDesign, vals: &[(Stage, f64)]) -> Durations {
        let mut d: Durations = design.required_stages().into_iter().map(|s| (s, 0.0)).collect();
        d.extend(vals.iter().copied());
        d
    }

    fn assert_exclusive(t: &Timeline) {
        for (i, a) in t.spans.iter().enumerate() {
            for b in &t.spans[i + 1..] {
                if a.resource == b.resource && a.duration > 0.0 && b.duration > 0.0 {
                    assert!(a.end() <= b.start || b.end() <= a.start, "{a:?} overlaps {b:?}");
                }
            }
        }
    }

    #[test]
    fn single_nonzero_stage() {
        for design in SystemDesign::ALL {
            for stage in design.required_stages() {
                let t = schedule(design, &durations(design, &[(stage, 3.5)])).unwrap();
                assert_eq!(t.iteration_time, 3.5, "{design} {stage}");
            }
        }
    }

    #[test]
    fn missing_stage_is_named() {
        let mut d = durations(SystemDesign::OursCPU, &[]);
        d.remove(&Stage::Cast);
        assert_eq!(
            schedule(SystemDesign::OursCPU, &d),
            Err(Error::MissingStage("Cast".into()))
        );
        let d = durations(SystemDesign::BaselineCPU, &[(Stage::Scatter, -1.0)]);
        assert!(schedule(SystemDesign::BaselineCPU, &d).is_err());
    }

    #[test]
    fn hidden_cast() {
        let base = [
            (Stage::FwdEmbGatherReduce, 5.0),
            (Stage::FwdMLP, 0.25),
            (Stage::BwdMLP, 0.5),
            (Stage::ExpandCoalesce, 9.0),
            (Stage::Scatter, 2.0),
        ];
        let ours = [
            (Stage::FwdEmbGatherReduce, 5.0),
            (Stage::FwdMLP, 0.25),
            (Stage::BwdMLP, 0.5),
            (Stage::IndexCopy, 1.0),
            (Stage::Cast, 3.0),
            (Stage::CastedGatherReduce, 4.0),
            (Stage::Scatter, 2.0),
        ];
        let b = schedule(SystemDesign::BaselineCPU, &durations(SystemDesign::BaselineCPU, &base)).unwrap();
        let o = schedule(SystemDesign::OursCPU, &durations(SystemDesign::OursCPU, &ours)).unwrap();
        assert_eq!(o.exposed_cast(), 0.0);
        assert_eq!(o.iteration_time, b.iteration_time - 9.0 + 4.0);
        assert_exclusive(&o);
        assert_eq!(o.span(Stage::Cast).unwrap().start, 1.0);
    }

    #[test]
    fn cast_becomes_the_bottleneck() {
        // fast pool stages, slow cast
        let d = durations(
            SystemDesign::OursNMP,
            &[
                (Stage::FwdEmbGatherReduce, 0.1),
                (Stage::IndexCopy, 0.4),
                (Stage::Cast, 1.0),
                (Stage::CastedGatherReduce, 0.1),
                (Stage::Scatter, 0.05),
            ],
        );
        let t = schedule(SystemDesign::OursNMP, &d).unwrap();
        assert!((t.exposed_cast() - 1.3).abs() < 1e-12);
        let worst = t.spans.iter().max_by(|a, b| a.duration.total_cmp(&b.duration)).unwrap();
        assert_eq!(worst.name, Stage::Cast);
    }

    #[test]
    fn speedup_and_utilization() {
        let d = durations(SystemDesign::BaselineCPU, &[(Stage::ExpandCoalesce, 4.0)]);
        let a = schedule(SystemDesign::BaselineCPU, &d).unwrap();
        assert_eq!(speedup(&a, &a), 1.0);
        let d = durations(SystemDesign::BaselineCPU, &[(Stage::ExpandCoalesce, 2.0)]);
        let b = schedule(SystemDesign::BaselineCPU, &d).unwrap();
        assert_eq!(speedup(&a, &b), 2.0);

        assert_eq!(nmp_utilization(&a), 0.0);
        let d = durations(
            SystemDesign::BaselineNMP,
            &[(Stage::FwdEmbGatherReduce, 1.0), (Stage::Scatter, 2.0)],
        );
        let t = schedule(SystemDesign::BaselineNMP, &d).unwrap();
        assert_eq!(nmp_utilization(&t), 1.0);
    }

    #[test]
    fn csv_and_breakdown() {
        let d = durations(
            SystemDesign::BaselineCPU,
            &[(Stage::FwdEmbGatherReduce, 1.0), (Stage::Scatter, 3.0)],
        );
        let t = schedule(SystemDesign::BaselineCPU, &d).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("span,name,resource,start,duration\n0,FwdEmbGatherReduce,CPU,0e0,1e0\n"));
        assert_eq!(csv.lines().count(), 6);
        let shares: f64 = t.breakdown().iter().map(|(_, _, s)| s).sum();
        assert!((shares - 1.0).abs() < 1e-12);
    }

    #[test]
    fn design_parse() {
        assert_eq!("oursnmp".parse::<SystemDesign>().unwrap(), SystemDesign::OursNMP);
        assert!("gpu".parse::<SystemDesign>().is_err());
    }

    #[test]
    fn mlp_and_cast_costs() {
        let model = crate::workload::builtin_model("RM1").unwrap();
        let sys = SystemConfig::default();
        let (f, b) = mlp_durations(&model, &sys);
        let macs = 256 * 128 + 128 * 64 + 256 * 64 + 64;
        assert!((f - 2.0 * (2048 * macs) as f64 / 14e12).abs() < 1e-18);
        assert_eq!(b, 2.0 * f);
        let fixed = SystemConfig {
            mlp_fwd: Some(1.0),
            mlp_bwd: Some(2.0),
            ..sys
        };
        assert_eq!(mlp_durations(&model, &fixed), (1.0, 2.0));
        assert_eq!(cast_bytes(10, &sys), 4 * 4 * 10 * 8 + 2 * 10 * 8 + 2 * 10 * 8);
    }

    fn stage_vals() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..10.0, 8)
    }

    fn from_vals(design: SystemDesign, v: &[f64]) -> Durations {
        Stage::ALL
            .iter()
            .zip(v)
            .filter(|(s, _)| design.required_stages().contains(s))
            .map(|(&s, &x)| (s, x))
            .collect()
    }

    proptest! {
        #[test]
        fn resources_never_overlap(v in stage_vals()) {
            for design in SystemDesign::ALL {
                assert_exclusive(&schedule(design, &from_vals(design, &v)).unwrap());
            }
        }

        #[test]
        fn longer_stage_never_shortens_iteration(v in stage_vals(), which in 0usize..8, extra in 0.0f64..5.0) {
            for design in SystemDesign::ALL {
                let before = schedule(design, &from_vals(design, &v)).unwrap().iteration_time;
                let mut w = v.clone();
                w[which] += extra;
                let after = schedule(design, &from_vals(design, &w)).unwrap().iteration_time;
                prop_assert!(after >= before);
            }
        }

        #[test]
        fn casting_pays_off_when_profitable(v in stage_vals()) {
            for (base, ours) in [
                (SystemDesign::BaselineCPU, SystemDesign::OursCPU),
                (SystemDesign::BaselineNMP, SystemDesign::OursNMP),
            ] {
                let b = schedule(base, &from_vals(base, &v)).unwrap();
                let o = schedule(ours, &from_vals(ours, &v)).unwrap();
                let casted = o.span(Stage::CastedGatherReduce).unwrap().duration;
                let ec = b.span(Stage::ExpandCoalesce).unwrap().duration;
                if casted + o.exposed_cast() <= ec {
                    prop_assert!(o.iteration_time <= b.iteration_time + 1e-12);
                }
            }
        }

        #[test]
        fn hidden_cast_algebra(v in stage_vals()) {
            let mut v = v;
            // copy + cast fits inside the forward gather-reduce
            v[0] += v[3] + v[7];
            let b = schedule(SystemDesign::BaselineCPU, &from_vals(SystemDesign::BaselineCPU, &v)).unwrap();
            let o = schedule(SystemDesign::OursCPU, &from_vals(SystemDesign::OursCPU, &v)).unwrap();
            let want = b.iteration_time - v[4] + v[5];
            prop_assert!((o.iteration_time - want).abs() <= 1e-12);
        }
    }
}
