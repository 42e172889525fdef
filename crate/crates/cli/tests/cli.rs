// Copyright 2026 The hijack-impact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hijack-impact"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate_small(dir: &Path, out: &str, jobs: &str) -> Output {
    run(
        dir,
        &[
            "--jobs", jobs, "simulate", "--synthetic", "50", "--scenarios", "10", "--type", "0", "--seed", "11",
            "--random-monitors", "8", "-o", out,
        ],
    )
}

#[test]
fn ten_scenarios_give_ten_records() {
    let dir = TempDir::new().unwrap();
    let o = simulate_small(dir.path(), "d.jsonl", "1");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("d.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let i = v["impact"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&i));
        assert_eq!(v["type"], 0);
    }
}

#[test]
fn simulate_is_deterministic_across_runs_and_jobs() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&simulate_small(dir.path(), "a.jsonl", "1")), 0);
    assert_eq!(code(&simulate_small(dir.path(), "b.jsonl", "1")), 0);
    assert_eq!(code(&simulate_small(dir.path(), "c.jsonl", "4")), 0);
    let a = fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.jsonl")).unwrap());
    assert_eq!(a, fs::read(dir.path().join("c.jsonl")).unwrap());
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["simulate", "--synthetic", "50", "-o", "d.jsonl"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--seed"));
    assert!(!dir.path().join("d.jsonl").exists());
}

#[test]
fn unknown_flag_fails_fast() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["simulate", "--no-such-flag"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("no-such-flag"));
}

#[test]
fn help_documents_every_flag() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["simulate", "--help"]);
    assert_eq!(code(&o), 0);
    let help = String::from_utf8_lossy(&o.stdout);
    for flag in [
        "--topology", "--synthetic", "--scenarios", "--type", "--prefix-mode", "--seed", "--victims", "--hijackers",
        "--monitors", "--random-monitors", "--clustered-monitors", "--ping-n-ip", "--output", "--jobs", "--config",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn unreadable_input_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["eval", "--dataset", "missing.jsonl"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn failure_leaves_no_partial_output() {
    let dir = TempDir::new().unwrap();
    // record 2 is corrupt, so nothing may be written
    fs::write(
        dir.path().join("bad.jsonl"),
        "{\"id\":0,\"victim\":1,\"hijacker\":2,\"type\":0,\"prefix_mode\":\"exact\",\"seed\":1,\"impact\":0.5,\
         \"monitor_sets\":{\"x\":{\"asns\":[1],\"m\":[1]}}}\nnot json\n",
    )
    .unwrap();
    let o = run(dir.path(), &["eval", "--dataset", "bad.jsonl", "-o", "report.csv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"));
    assert!(!dir.path().join("report.csv").exists());
    let left: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(left.len(), 1, "temporary files left behind");
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "jobs = 2\n[simulate]\nsynthetic = 50\nscenarios = 4\nseed = 11\noutput = \"cfg.jsonl\"\n",
    )
    .unwrap();
    let o = run(dir.path(), &["--config", "run.toml", "simulate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("cfg.jsonl")).unwrap().lines().count(), 4);

    let o = run(dir.path(), &["--config", "run.toml", "simulate", "--scenarios", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("cfg.jsonl")).unwrap().lines().count(), 6);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.toml"), "[simulate]\nsed = 3\n").unwrap();
    let o = run(dir.path(), &["--config", "run.toml", "simulate"]);
    assert_eq!(code(&o), 1);
    fs::write(dir.path().join("run.toml"), "[simulat]\nseed = 3\n").unwrap();
    let o = run(dir.path(), &["--config", "run.toml", "simulate"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn fit_then_predict_round_trip() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["simulate", "--synthetic", "80", "--scenarios", "60", "--seed", "5", "--random-monitors", "10", "-o", "d.jsonl"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(dir.path(), &["fit-lre", "--dataset", "d.jsonl", "--alpha", "1", "-o", "model.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("model.json")).unwrap()).unwrap();
    let asns = model["monitor_asns"].as_array().unwrap().clone();
    assert_eq!(asns.len(), 10);

    // every monitor infected, listed in reverse order
    let rev: Vec<_> = asns.iter().rev().cloned().collect();
    let rec = serde_json::json!({"monitors": rev, "m": vec![1; 10], "corrupted": false});
    fs::write(dir.path().join("in.jsonl"), format!("{rec}\n")).unwrap();
    let o = run(dir.path(), &["predict", "--model", "model.json", "--input", "in.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let est: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sum: f64 = model["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
    let v = est["value"].as_f64().unwrap();
    assert!((v - sum.clamp(0.0, 1.0)).abs() < 1e-12);

    let o = run(dir.path(), &["eval", "--dataset", "d.jsonl", "--model", "model.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = String::from_utf8_lossy(&o.stdout);
    assert!(csv.starts_with("estimator,monitor_set,M,bias,rmse,mae,relmae,n\n"));
    assert!(csv.contains("\nnie,") && csv.contains("\nlre,"));
}

#[test]
fn singular_fit_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let line = |id: u32, m: u8| {
        format!(
            "{{\"id\":{id},\"victim\":1,\"hijacker\":2,\"type\":0,\"prefix_mode\":\"exact\",\"seed\":1,\"impact\":0.5,\
             \"monitor_sets\":{{\"s\":{{\"asns\":[3,4],\"m\":[{m},{m}]}}}}}}\n"
        )
    };
    fs::write(dir.path().join("d.jsonl"), line(0, 1) + &line(1, 0)).unwrap();
    let o = run(dir.path(), &["fit-lre", "--dataset", "d.jsonl", "--alpha", "0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("alpha > 0"));
}

#[test]
fn theory_csv_shape() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["theory", "--uniform", "2000", "--seed", "1", "--m", "10,100", "--p", "0,0.1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "M,p,bias,rmse,floor");
    assert_eq!(lines.len(), 5);
    // uniform impacts: E[sqrt(I(1-I))] = pi/8, so RMSE at p = 0 is (pi/8)/sqrt(M)
    let rmse: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((rmse - std::f64::consts::PI / 8.0 / 10f64.sqrt()).abs() < 0.005);
}

#[test]
fn theory_uniform_needs_seed() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["theory", "--uniform", "10"])), 1);
}

#[test]
fn classify_bgp_paths_from_files() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("event.json"),
        r#"{"victim": 10, "hijacker": 20, "prefix": "192.0.2.0/24"}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("paths.jsonl"),
        "{\"monitor\":1,\"path\":[1,5,10]}\n{\"monitor\":2,\"path\":[2,20]}\n{\"monitor\":3,\"path\":[3,7]}\n",
    )
    .unwrap();
    let o = run(dir.path(), &["classify", "--event", "event.json", "--bgp", "paths.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec["monitors"], serde_json::json!([1, 2]));
    assert_eq!(rec["m"], serde_json::json!([0, 1]));
}

#[test]
fn ping_targets_from_files() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("a.pfx2as"), "10.0.0.0/8|100\n11.0.0.0/8|200\n").unwrap();
    fs::write(dir.path().join("hits.txt"), "10.0.0.1 0.95\n10.0.0.2 0.5\n11.1.1.1 0.99\nbogus\n").unwrap();
    let o = run(
        dir.path(),
        &["ping-targets", "--hitlist", "hits.txt", "--pfx2as", "a.pfx2as", "-o", "t.json"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(t["targets"]["100"].as_array().unwrap().len(), 1);
    assert_eq!(t["targets"]["200"][0]["ip"], "11.1.1.1");
    assert!(stderr(&o).contains("1 malformed"));
}

#[test]
fn generate_then_simulate_on_file() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["generate", "--nodes", "60", "--seed", "2", "-o", "g.txt"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(
        dir.path(),
        &["simulate", "--topology", "g.txt", "--scenarios", "5", "--seed", "1", "--prefix-mode", "sub"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 5);
}

#[test]
fn experiment_writes_one_row_per_m() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["experiment", "--synthetic", "200", "--scenarios", "40", "--seed", "4", "--m", "5,20", "--draws", "3"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("nie,random,20,"));
}
