use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cfx(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cfx"));
    cmd.args(args).env_remove("CFX_OUTPUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("CFX_OUTPUT_DIR", d);
    }
    cmd.output().expect("spawn cfx")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

const LOGISTIC: &str = r#"{ "type": "logistic", "weights": [2.0, -1.5], "bias": 0.0 }"#;

fn random_config(dir: &Path, extra: &str) -> PathBuf {
    write(dir, "model.json", LOGISTIC);
    write(
        dir,
        "run.toml",
        &format!(
            r#"model = "model.json"
strategy = "random"
budget = 10
seeds = [3, 8]
query = {{ point = [1.5, 0.0] }}
potential = {{ kind = "sep", target = 0.5 }}
{extra}
[constraints]
lower = [-3.0, -3.0]
upper = [3.0, 3.0]
"#
        ),
    )
}

#[test]
fn random_run_writes_one_trace_per_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = random_config(tmp.path(), "");
    let out = tmp.path().join("out");
    let o = cfx(&["run", cfg.to_str().unwrap()], Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for seed in [3, 8] {
        let text = fs::read_to_string(out.join(format!("trace_{seed}.jsonl"))).unwrap();
        let lines: Vec<Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 10);
        assert!(lines.iter().all(|l| l["phase"] == "random"));
        let mut prev = 0.0;
        for l in &lines {
            let inc = l["incumbent"].as_f64().unwrap();
            assert!(inc >= prev);
            prev = inc;
        }
    }
    let s = summary(&out);
    let runs = s["cases"][0]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    let mean = (runs[0]["terminal_incumbent"].as_f64().unwrap()
        + runs[1]["terminal_incumbent"].as_f64().unwrap())
        / 2.0;
    assert!((s["cases"][0]["mean_terminal_incumbent"].as_f64().unwrap() - mean).abs() < 1e-15);
    assert_eq!(
        s["cases"][0]["incumbent_curve"]["mean"]
            .as_array()
            .unwrap()
            .len(),
        10
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("l0_sweep.toml");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(cfx(&["run", cfg.to_str().unwrap()], Some(&a))
        .status
        .success());
    assert!(cfx(&["run", cfg.to_str().unwrap()], Some(&b))
        .status
        .success());
    for name in [
        "summary.json",
        "counterfactuals.csv",
        "trace_0.jsonl",
        "trace_1.jsonl",
        "trace_2.jsonl",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn l0_sweep_rows_respect_bounds_and_reverify() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = configs().join("l0_sweep.toml");
    let o = cfx(&["run", cfg.to_str().unwrap()], Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let q = [1.0, 2.0, 0.5, 1.5];
    let w = [0.9, 0.6, -0.7, 1.1];
    let f = |x: &[f64]| sigmoid(w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - 0.5);
    let mut rdr = csv::Reader::from_path(out.join("counterfactuals.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        [
            "target",
            "l0_bound",
            "seed",
            "x0",
            "x1",
            "x2",
            "x3",
            "result_change"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[1].parse::<usize>().unwrap(), k + 1);
        let change: Vec<f64> = (3..7).map(|j| row[j].parse().unwrap()).collect();
        assert!(change.iter().filter(|c| **c != 0.0).count() <= k + 1);
        let x: Vec<f64> = q.iter().zip(&change).map(|(a, b)| a + b).collect();
        assert_eq!(x[1].fract(), 0.0);
        assert!(change[2] >= 0.0 && change[3] <= 0.0);
        let reported: f64 = row[7].parse().unwrap();
        assert!((f(&x) - f(&q) - reported).abs() <= 1e-9);
    }
}

#[test]
fn line_construction_cfx_beats_naive_median() {
    let tmp = TempDir::new().unwrap();
    let mut terminal = Vec::new();
    for name in ["line_cfx.toml", "line_naive.toml"] {
        let out = tmp.path().join(name);
        assert!(
            cfx(&["run", configs().join(name).to_str().unwrap()], Some(&out))
                .status
                .success()
        );
        let s = summary(&out);
        let mut v: Vec<f64> = s["cases"][0]["runs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["terminal_incumbent"].as_f64().unwrap())
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        terminal.push(v);
    }
    let naive_median = terminal[1][terminal[1].len() / 2];
    assert!(
        terminal[0].iter().all(|&t| t >= naive_median - 1e-12),
        "{terminal:?}"
    );
}

#[test]
fn output_dir_comes_from_config_unless_overridden() {
    let tmp = TempDir::new().unwrap();
    let cfg = random_config(tmp.path(), "output_dir = \"from_config\"\n");
    assert!(cfx(&["run", cfg.to_str().unwrap()], None).status.success());
    assert!(tmp.path().join("from_config/summary.json").exists());
    let env_dir = tmp.path().join("from_env");
    assert!(cfx(&["run", cfg.to_str().unwrap()], Some(&env_dir))
        .status
        .success());
    assert!(env_dir.join("summary.json").exists());
}

#[test]
fn json_config_with_query_selection() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = cfx(
        &[
            "run",
            configs().join("logistic_select.json").to_str().unwrap(),
        ],
        Some(&out),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let fq = s["query_output"].as_f64().unwrap();
    assert!(fq >= 0.9);
    let p = &s["cases"][0]["potential"];
    assert!((p["center"].as_f64().unwrap() - p["width"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn config_errors_exit_with_code_2() {
    let tmp = TempDir::new().unwrap();
    let run = |text: &str| {
        write(tmp.path(), "model.json", LOGISTIC);
        let p = write(tmp.path(), "bad.toml", text);
        cfx(&["run", p.to_str().unwrap()], Some(&tmp.path().join("out")))
            .status
            .code()
    };
    let good = r#"model = "model.json"
strategy = "bayes-cfx"
seeds = [0]
query = { point = [1.5, 0.0] }
potential = { kind = "sep", width = 0.4 }
[constraints]
lower = [-3.0, -3.0]
upper = [3.0, 3.0]
"#;
    assert_eq!(run(&format!("budget = 3\n{good}")), Some(2));
    assert_eq!(run(&format!("budget = 8\nbogus = 1\n{good}")), Some(2));
    assert_eq!(
        run(&format!(
            "budget = 8\n{}",
            good.replace("model.json", "missing.json")
        )),
        Some(2)
    );
    assert_eq!(
        run(&format!(
            "budget = 8\n{}",
            good.replace("seeds = [0]", "seeds = []")
        )),
        Some(2)
    );
    assert_eq!(
        run(&format!(
            "budget = 8\n{}",
            good.replace("width = 0.4", "width = 0.4, target = 0.5")
        )),
        Some(2)
    );
    assert_eq!(
        cfx(&["run", "/nonexistent/config.toml"], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn infeasible_constraints_exit_with_code_3() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "model.json", LOGISTIC);
    let base = r#"model = "model.json"
strategy = "random"
budget = 5
seeds = [0]
potential = { kind = "sep", width = 0.4 }
"#;
    let outside = write(
        tmp.path(),
        "outside.toml",
        &format!("{base}query = {{ point = [4.0, 0.0] }}\n[constraints]\nlower = [-3.0, -3.0]\nupper = [3.0, 3.0]\n"),
    );
    let halfspace = write(
        tmp.path(),
        "halfspace.toml",
        &format!(
            "{base}query = {{ point = [1.5, 0.0] }}\n[constraints]\nlower = [-3.0, -3.0]\nupper = [3.0, 3.0]\nlinear = [{{ a = [1.0, 0.0], b = 1.0 }}]\n"
        ),
    );
    for p in [outside, halfspace] {
        let o = cfx(&["run", p.to_str().unwrap()], Some(&tmp.path().join("out")));
        assert_eq!(
            o.status.code(),
            Some(3),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn dataset_backed_run_keeps_categories_and_integer_levels() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    write(
        d,
        "data.csv",
        "age,size,colour\n30,small,red\n45,large,blue\n28,medium,red\n60,small,green\n",
    );
    write(
        d,
        "schema.json",
        r#"{ "columns": [
            { "name": "age", "kind": "numeric" },
            { "name": "size", "kind": "ordinal", "levels": ["small", "medium", "large"] },
            { "name": "colour", "kind": "categorical" } ] }"#,
    );
    write(
        d,
        "model.json",
        r#"{ "type": "logistic", "weights": [1.0, 0.8, 0.5, -0.5, 0.2], "bias": 0.5 }"#,
    );
    let cfg = write(
        d,
        "run.toml",
        r#"model = "model.json"
strategy = "bayes-cfx"
budget = 8
seeds = [1]
query = { row = 1 }
potential = { kind = "aep_minus", target = 0.5 }
dataset = { path = "data.csv", schema = "schema.json" }
"#,
    );
    let out = d.join("out");
    let o = cfx(&["run", cfg.to_str().unwrap()], Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let features: Vec<&str> = s["features"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(features.len(), 5);
    let query: Vec<f64> = s["query"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for line in fs::read_to_string(out.join("trace_1.jsonl"))
        .unwrap()
        .lines()
    {
        let r: Value = serde_json::from_str(line).unwrap();
        let x: Vec<f64> = r["x"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(x[1].fract(), 0.0);
        assert!((0.0..=2.0).contains(&x[1]));
        assert_eq!(&x[2..], &query[2..]);
    }
}

#[test]
fn quadrature_csv_format() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path().join("q.csv");
    let ps = p.to_str().unwrap();
    assert!(cfx(
        &[
            "quadrature",
            "--family",
            "legendre",
            "--n",
            "2",
            "--out",
            ps
        ],
        None
    )
    .status
    .success());
    let text = fs::read_to_string(&p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# mass=2.0000000000000000");
    assert_eq!(lines[1], "node,weight");
    let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[0] + 1.0 / 3f64.sqrt()).abs() < 1e-15 && (row[1] - 1.0).abs() < 1e-15);
    assert_eq!(
        lines[2]
            .split(',')
            .next()
            .unwrap()
            .trim_start_matches('-')
            .replace('.', "")
            .trim_start_matches('0')
            .len(),
        17
    );

    assert!(cfx(
        &["quadrature", "--family", "hermite", "--n", "1", "--out", ps],
        None
    )
    .status
    .success());
    let text = fs::read_to_string(&p).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row[0], 0.0);
    assert!((row[1] - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
}

#[test]
fn reread_hermite_rule_is_exact() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path().join("h.csv");
    assert!(cfx(
        &[
            "quadrature",
            "--family",
            "hermite",
            "--n",
            "10",
            "--out",
            p.to_str().unwrap()
        ],
        None
    )
    .status
    .success());
    let text = fs::read_to_string(&p).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(2)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 10);
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let mut double_fact = 1.0;
    for k in 0..20 {
        let got: f64 = rows.iter().map(|(x, w)| w * x.powi(k)).sum();
        if k % 2 == 0 {
            if k > 0 {
                double_fact *= (k - 1) as f64;
            }
            let exact = double_fact * root_2pi;
            assert!((got - exact).abs() <= 1e-10 * exact, "k={k}");
        } else {
            assert!(
                got.abs() <= 1e-10 * double_fact * root_2pi * (k as f64),
                "k={k}"
            );
        }
    }
}

#[test]
fn quadrature_rejects_bad_n() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path().join("q.csv");
    for n in ["0", "257"] {
        let o = cfx(
            &[
                "quadrature",
                "--family",
                "hermite",
                "--n",
                n,
                "--out",
                p.to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(o.status.code(), Some(2));
    }
}

#[test]
fn validate_passes_and_prints_a_table() {
    let o = cfx(&["validate"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("max error"));
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 5);
}
