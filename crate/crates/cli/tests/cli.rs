use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tensorcast::kernels::tensor_casting;
use tensorcast::CastedIndex;
use tensorcast_cli::commands::{check_instance, random_instance};
use tensorcast_cli::config::ExperimentConfig;

fn tensorcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tensorcast"))
        .args(args)
        .env_remove("TENSORCAST_THREADS")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_golden_index(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("golden.csv");
    fs::write(&p, "src,dst\n1,0\n2,0\n4,0\n0,1\n2,1\n").unwrap();
    p
}

const SMALL_MODEL: &str = r#""model":{"name":"small","num_tables":3,"gathers_per_table":4,"table_rows":5000,
    "batch":64,"bottom_mlp":[16,8],"top_mlp":[8,1]}"#;

#[test]
fn equivalence_default_passes_and_reports_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eq");
    let o = tensorcast(&["equivalence", "--seed", "5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("1000 instances"));
    let r = json(&out.join("equivalence.json"));
    assert_eq!(r["seed"], 5);
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(r["golden_pass"], true);
    assert_eq!(r["pass"], true);
    assert!(r["max_relative_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn corrupted_cast_fails_in_process() {
    let cfg = ExperimentConfig::default();
    let mut hit = false;
    for seed in 0..50 {
        let inst = random_instance(seed);
        let cast = tensor_casting(&inst.index);
        assert!(check_instance(&inst, &cast, &cfg).unwrap() <= 1e-6);
        let (src, mut dst, unique, b) = cast.into_parts();
        // Move the first element of the second run into the first run.
        if let Some(pos) = dst.windows(2).position(|w| w[0] != w[1]) {
            if dst[pos + 1..].iter().filter(|&&d| d == dst[pos + 1]).count() > 1 && src[pos] != src[pos + 1] {
                dst[pos + 1] = dst[pos];
                let bad = CastedIndex::new(src, dst, unique, b).unwrap();
                assert!(check_instance(&inst, &bad, &cfg).unwrap() > 1e-6, "seed {seed}");
                hit = true;
            }
        }
    }
    assert!(hit);
}

#[test]
fn cast_golden_round_trips_through_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_golden_index(dir.path());
    let cast_dir = dir.path().join("cast");
    let o = tensorcast(&["cast", "--input", s(&input), "--out", s(&cast_dir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(cast_dir.join("casted.csv")).unwrap(),
        "casted_src,casted_dst\n1,0\n0,1\n0,2\n1,2\n0,3\n"
    );
    assert_eq!(
        fs::read_to_string(cast_dir.join("unique_rows.csv")).unwrap(),
        "unique_row\n0\n1\n2\n4\n"
    );

    let o = tensorcast(&[
        "equivalence",
        "--index",
        s(&input),
        "--casted",
        s(&cast_dir),
        "--out",
        s(&dir.path().join("eq")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    // casted_dst [0,1,2,2,3] -> [0,1,1,2,3] stays well formed but sums the wrong rows
    fs::write(
        cast_dir.join("casted.csv"),
        "casted_src,casted_dst\n1,0\n0,1\n0,1\n1,2\n0,3\n",
    )
    .unwrap();
    let o = tensorcast(&[
        "equivalence",
        "--index",
        s(&input),
        "--casted",
        s(&cast_dir),
        "--seed",
        "17",
        "--out",
        s(&dir.path().join("eq2")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed 17"), "{}", stderr(&o));
}

#[test]
fn cast_rejects_empty_and_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = tensorcast(&["cast", "--input", s(&empty), "--out", s(dir.path())]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no index entries"));

    let header_only = dir.path().join("h.csv");
    fs::write(&header_only, "src,dst\n").unwrap();
    assert!(
        !tensorcast(&["cast", "--input", s(&header_only), "--out", s(dir.path())])
            .status
            .success()
    );

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "src,dst\n1,0\nx,1\n").unwrap();
    let o = tensorcast(&["cast", "--input", s(&bad), "--out", s(dir.path())]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn run_rm1_default_emits_four_timelines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = tensorcast(&["run", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let timelines: Vec<_> = fs::read_dir(out.join("timelines")).unwrap().collect();
    assert_eq!(timelines.len(), 4);
    let r = json(&out.join("run.json"));
    assert_eq!(r["model"], "RM1");
    let rows = r["rows"].as_array().unwrap();
    let it = |d: &str| {
        rows.iter().find(|x| x["design"] == d).unwrap()["iteration_time"]
            .as_f64()
            .unwrap()
    };
    assert!(
        it("OursNMP") < it("OursCPU") && it("OursCPU") < it("BaselineNMP") && it("BaselineNMP") < it("BaselineCPU")
    );
}

#[test]
fn run_batch_sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(r#"{{{SMALL_MODEL},"batches":[1024,2048,4096],"seed":3}}"#),
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = tensorcast(&["run", "--config", s(&cfg), "--out", s(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let speedup = fs::read_to_string(a.join("speedup.csv")).unwrap();
    assert_eq!(speedup.lines().count(), 1 + 12);
    assert!(speedup.starts_with("design,batch,dim,iteration_time,speedup_vs_baseline_cpu"));
    for f in ["speedup.csv", "breakdown.csv", "run.json"] {
        assert_eq!(
            fs::read_to_string(a.join(f)).unwrap(),
            fs::read_to_string(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let header = fs::read_to_string(a.join("timelines/OursNMP_b2048_d64.csv")).unwrap();
    assert!(header.starts_with("span,name,resource,start,duration\n"));
}

#[test]
fn traffic_low_reuse_ratios_and_dim_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(r#"{{{SMALL_MODEL},"traffic":{{"lookups":10,"outputs":1,"unique":10}},"dims":[64,128]}}"#),
    )
    .unwrap();
    let out = dir.path().join("t");
    let o = tensorcast(&["traffic", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&out.join("traffic.json"));
    let cells = r["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    for c in cells {
        assert!(c["casted_over_expand_coalesce"].as_f64().unwrap() <= 0.55);
    }
    for (a, b) in cells[0]["reports"]
        .as_array()
        .unwrap()
        .iter()
        .zip(cells[1]["reports"].as_array().unwrap())
    {
        let elems = |x: &serde_json::Value| x["bytes_read"].as_u64().unwrap() + x["bytes_written"].as_u64().unwrap();
        assert_eq!(2 * elems(a), elems(b));
        assert_eq!(a["index_bytes"], b["index_bytes"]);
    }
    let csv = fs::read_to_string(out.join("traffic.csv")).unwrap();
    assert!(csv.contains("2048,64,gather_reduce,2560,256,160,2976"));
}

#[test]
fn simulate_and_gen_workload_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(r#"{{{SMALL_MODEL},"batches":[2,64],"distribution":{{"kind":"uniform"}}}}"#),
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = tensorcast(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sim = fs::read_to_string(out.join("simulate.csv")).unwrap();
    assert_eq!(sim.lines().count(), 1 + 2 * 3);

    let o = tensorcast(&["gen-workload", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t0 = fs::read_to_string(out.join("workload/b2/table_0.csv")).unwrap();
    let dst: Vec<&str> = t0.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(dst, ["0", "0", "0", "0", "1", "1", "1", "1"]);
    assert_eq!(fs::read_to_string(out.join("shrink.csv")).unwrap().lines().count(), 3);

    let again = dir.path().join("again");
    tensorcast(&["gen-workload", "--config", s(&cfg), "--out", s(&again)]);
    assert_eq!(t0, fs::read_to_string(again.join("workload/b2/table_0.csv")).unwrap());
}

#[test]
fn histogram_distribution_and_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("h.csv");
    fs::write(&hist, "row_id,count\n0,3\n7,1\n").unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(
            r#"{{{SMALL_MODEL},"batches":[8],"distribution":{{"kind":"histogram","path":{:?}}}}}"#,
            s(&hist)
        ),
    )
    .unwrap();
    let out = dir.path().join("o");
    assert!(tensorcast(&["gen-workload", "--config", s(&cfg), "--out", s(&out)])
        .status
        .success());
    let t = fs::read_to_string(out.join("workload/b8/table_0.csv")).unwrap();
    assert!(t.lines().skip(1).all(|l| l.starts_with("0,") || l.starts_with("7,")));

    fs::write(&hist, "row_id,count\n0,3\n7,-1\n").unwrap();
    let o = tensorcast(&["gen-workload", "--config", s(&cfg), "--out", s(&out)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    fs::write(&cfg, r#"{"designs":[]}"#).unwrap();
    assert!(!tensorcast(&["run", "--config", s(&cfg)]).status.success());

    let o = Command::new(env!("CARGO_BIN_EXE_tensorcast"))
        .args(["equivalence", "--out", s(&out)])
        .env("TENSORCAST_THREADS", "zero")
        .output()
        .unwrap();
    assert!(stderr(&o).contains("TENSORCAST_THREADS"));
}
