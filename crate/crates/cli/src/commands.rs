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

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use hijack_impact::estimators::{fit_lre, nie, predict_lre, LreModel, ObservationMatrix, DEFAULT_ALPHA};
use hijack_impact::evalkit::{
    evaluate, read_dataset, run_lre_experiment, run_nie_experiment, simulate_dataset, write_dataset,
    write_reports_csv, EvalReport, LreExperiment, MonitorSource, NieExperiment, Observation, ScenarioRecord,
};
use hijack_impact::ingest::{
    build_ping_targets, classify_bgp_paths, classify_traceroutes, merge_pfx2as_snapshots, parse_pfx2as,
    read_path_records, read_traceroute_records, ConsistencyRule, EventSpec, PathMode, PrefixToAsMap,
};
use hijack_impact::monitors::{
    load_monitor_set, observe_control_plane, observe_ping, sample_clustered_monitors, sample_random_monitors,
    ClusterSpec, MeasurementRecord, MeasurementVector, MonitorSet, PingModel,
};
use hijack_impact::sim::{pooled_scenarios, random_scenarios, PrefixMode, RoutingOutcome};
use hijack_impact::theory::{theory_curve, ImpactSamples};
use hijack_impact::topology::{gen_synthetic_topology, load_as_rel, AsGraph, AsId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::*;
use crate::error::{data, io_data, usage, CliError, CliResult};
use crate::output::Output;

fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required")))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_data(path, e))
}

fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| io_data(path, e))
}

/// Prefixes library errors from a file with its name.
fn in_file<T>(path: &Path, r: hijack_impact::Result<T>) -> CliResult<T> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn write_err(e: std::io::Error) -> CliError {
    data(format!("writing output: {e}"))
}

fn load_graph(g: &GraphArgs, seed: u64) -> CliResult<AsGraph> {
    match (&g.topology, g.synthetic) {
        (Some(path), None) => in_file(path, load_as_rel(path)),
        (None, Some(n)) => Ok(gen_synthetic_topology(n, seed)?),
        (Some(_), Some(_)) => Err(usage("--topology and --synthetic are mutually exclusive")),
        (None, None) => Err(usage("one of --topology or --synthetic is required")),
    }
}

fn load_set(path: &Path, label: &str, graph: Option<&AsGraph>) -> CliResult<MonitorSet> {
    let (mut set, stats) = in_file(path, load_monitor_set(open(path)?, label))?;
    if stats.duplicates > 0 {
        eprintln!("{}: {} duplicate ASes ignored", path.display(), stats.duplicates);
    }
    if let Some(graph) = graph {
        let dropped = set.retain_known(graph);
        if dropped > 0 {
            eprintln!("{}: {dropped} ASes not in the topology ignored", path.display());
        }
    }
    if set.is_empty() {
        return Err(data(format!("{}: no usable ASes", path.display())));
    }
    Ok(set)
}

fn prefix_mode(s: Option<&str>) -> CliResult<PrefixMode> {
    Ok(s.unwrap_or("exact").parse::<PrefixMode>()?)
}

/// Independent sub-seeds for the stages of one run.
fn sub_seeds<const N: usize>(seed: u64) -> [u64; N] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| rng.gen())
}

pub fn generate(a: GenerateArgs) -> CliResult<()> {
    let n = required(a.nodes, "nodes")?;
    let seed = required(a.seed, "seed")?;
    let graph = gen_synthetic_topology(n, seed)?;
    let mut out = Output::create(a.output.as_deref())?;
    out.write_all(graph.to_as_rel().as_bytes()).map_err(write_err)?;
    out.commit()
}

pub fn simulate(a: SimulateArgs, jobs: usize) -> CliResult<()> {
    let seed = required(a.seed, "seed")?;
    let [graph_seed, scenario_seed, monitor_seed, ping_seed] = sub_seeds(seed);
    let graph = load_graph(&a.graph, graph_seed)?;
    let count = a.scenarios.unwrap_or(1000);
    let hijack_type = a.hijack_type.unwrap_or(0);
    let mode = prefix_mode(a.prefix_mode.as_deref())?;

    let scenarios = if a.victims.is_none() && a.hijackers.is_none() {
        random_scenarios(&graph, count, hijack_type, mode, scenario_seed)?
    } else {
        let pool = |p: &Option<PathBuf>, label| -> CliResult<Vec<AsId>> {
            match p {
                Some(p) => Ok(load_set(p, label, Some(&graph))?.members().to_vec()),
                None => Ok(graph.asns().to_vec()),
            }
        };
        let victims = pool(&a.victims, "victims")?;
        let hijackers = pool(&a.hijackers, "hijackers")?;
        pooled_scenarios(&victims, &hijackers, count, hijack_type, mode, scenario_seed)?
    };

    let mut sets = Vec::new();
    for spec in &a.monitors {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("--monitors expects LABEL=FILE, got {spec:?}")))?;
        sets.push(load_set(Path::new(path), label, Some(&graph))?);
    }
    if let Some(m) = a.random_monitors {
        sets.push(sample_random_monitors(&graph, m, monitor_seed)?);
    }
    if let Some(m) = a.clustered_monitors {
        sets.push(sample_clustered_monitors(&graph, m, ClusterSpec::default(), monitor_seed ^ 1)?);
    }
    let ping = a.ping_n_ip.map(|n| PingModel::new(n, ping_seed)).transpose()?;

    let outcomes = simulate_dataset(&graph, &scenarios, jobs)?;
    let records = outcomes
        .iter()
        .enumerate()
        .map(|(id, o)| record(id as u64, o, &graph, &sets, ping.as_ref()))
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = Output::create(a.output.as_deref())?;
    write_dataset(&mut out, &records)?;
    out.commit()
}

fn record(
    id: u64,
    outcome: &RoutingOutcome,
    graph: &AsGraph,
    sets: &[MonitorSet],
    ping: Option<&PingModel>,
) -> CliResult<ScenarioRecord> {
    let mut r = ScenarioRecord::from_outcome(id, outcome);
    for set in sets {
        let m = match ping {
            None => observe_control_plane(outcome, graph, set)?,
            Some(model) => {
                let model = model.clone().with_seed(model.seed ^ outcome.scenario().seed);
                observe_ping(outcome, graph, set, &model)?
            }
        };
        r.add_observation(set, &m)?;
    }
    Ok(r)
}

fn read_records(path: &Path) -> CliResult<Vec<ScenarioRecord>> {
    let records = in_file(path, read_dataset(open(path)?))?;
    if records.is_empty() {
        return Err(data(format!("{}: empty dataset", path.display())));
    }
    Ok(records)
}

/// The monitor set to use: the named one, or the only one present.
fn pick_label(records: &[ScenarioRecord], wanted: Option<&str>) -> CliResult<String> {
    if let Some(w) = wanted {
        return Ok(w.to_string());
    }
    let labels: Vec<&String> = records[0].monitor_sets.keys().collect();
    match labels.as_slice() {
        [one] => Ok(one.to_string()),
        [] => Err(data("dataset holds no monitor observations")),
        _ => Err(usage(format!(
            "dataset has several monitor sets ({}); pick one with --monitor-set",
            labels.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Bits of `wanted` ASes, in that order, from a record's observations.
fn bits_for(record: &ScenarioRecord, label: &str, wanted: &[AsId]) -> CliResult<MeasurementVector> {
    let (set, m) = record.observation(label)?;
    let pos: HashMap<AsId, usize> = set.members().iter().enumerate().map(|(k, &a)| (a, k)).collect();
    let values = wanted
        .iter()
        .map(|a| {
            pos.get(a)
                .map(|&k| m.values()[k])
                .ok_or_else(|| data(format!("record {}: monitor {a} not observed in {label:?}", record.id)))
        })
        .collect::<CliResult<Vec<u8>>>()?;
    Ok(MeasurementVector::new(values, false)?)
}

pub fn eval(a: EvalArgs) -> CliResult<()> {
    let path = required(a.dataset, "dataset")?;
    let records = read_records(&path)?;
    let truths: Vec<f64> = records.iter().map(|r| r.impact).collect();
    let labels: Vec<String> = match &a.monitor_set {
        Some(l) => vec![l.clone()],
        None => records[0].monitor_sets.keys().cloned().collect(),
    };

    let mut reports = Vec::new();
    for label in &labels {
        let mut est = Vec::with_capacity(records.len());
        let mut m = 0;
        for r in &records {
            let (_, bits) = r.observation(label)?;
            m = bits.len();
            est.push(nie(&bits)?.value);
        }
        reports.push(evaluate(&est, &truths)?.labeled("nie", label, m));
    }
    // estimates stored in the records themselves
    let mut stored: Vec<&String> = records[0].estimates.keys().collect();
    stored.sort();
    for name in stored {
        let est = records
            .iter()
            .map(|r| {
                r.estimates
                    .get(name)
                    .copied()
                    .ok_or_else(|| data(format!("record {} lacks estimate {name:?}", r.id)))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        reports.push(evaluate(&est, &truths)?.labeled(name, "-", 0));
    }
    if let Some(model_path) = &a.model {
        let model = in_file(model_path, LreModel::from_json(&read_to_string(model_path)?))?;
        let label = pick_label(&records, a.monitor_set.as_deref())?;
        let est = records
            .iter()
            .map(|r| Ok(predict_lre(&model, &bits_for(r, &label, &model.monitor_asns)?)?.value))
            .collect::<CliResult<Vec<f64>>>()?;
        reports.push(evaluate(&est, &truths)?.labeled("lre", &label, model.weights.len()));
    }
    if reports.is_empty() {
        return Err(data("nothing to evaluate: no monitor sets, estimates or model"));
    }
    let mut out = Output::create(a.output.as_deref())?;
    write_reports_csv(&mut out, &reports)?;
    out.commit()
}

pub fn theory(a: TheoryArgs) -> CliResult<()> {
    let samples = match (&a.dataset, a.uniform) {
        (Some(path), None) => {
            let impacts = read_records(path)?.iter().map(|r| r.impact).collect();
            ImpactSamples::new(path.display().to_string(), impacts)?
        }
        (None, Some(n)) => {
            let seed = required(a.seed, "seed")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ImpactSamples::new("uniform", (0..n).map(|_| rng.gen::<f64>()).collect())?
        }
        (Some(_), Some(_)) => return Err(usage("--dataset and --uniform are mutually exclusive")),
        (None, None) => return Err(usage("one of --dataset or --uniform is required")),
    };
    let ms = if a.ms.is_empty() { vec![10, 100, 1000] } else { a.ms };
    let ps = if a.ps.is_empty() { vec![0.0] } else { a.ps };
    let curve = theory_curve(&ms, &ps, &samples)?;
    let mut out = Output::create(a.output.as_deref())?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for point in &curve {
            w.serialize(point).map_err(|e| data(e.to_string()))?;
        }
        w.flush().map_err(write_err)?;
    }
    out.commit()
}

pub fn fit_lre_cmd(a: FitLreArgs) -> CliResult<()> {
    let path = required(a.dataset, "dataset")?;
    let records = read_records(&path)?;
    let label = pick_label(&records, a.monitor_set.as_deref())?;
    let (monitors, _) = records[0].observation(&label)?;
    let mut x = ObservationMatrix::new(monitors.len());
    for r in &records {
        x.push_measurement(&bits_for(r, &label, monitors.members())?)?;
    }
    let y: Vec<f64> = records.iter().map(|r| r.impact).collect();
    let model = fit_lre(&monitors, &x, &y, a.alpha.unwrap_or(DEFAULT_ALPHA))?;
    let mut out = Output::create(a.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &model).map_err(|e| data(e.to_string()))?;
    out.write_all(b"\n").map_err(write_err)?;
    out.commit()
}

pub fn predict(a: PredictArgs) -> CliResult<()> {
    let model_path = required(a.model, "model")?;
    let input = required(a.input, "input")?;
    let model = in_file(&model_path, LreModel::from_json(&read_to_string(&model_path)?))?;
    let mut out = Output::create(a.output.as_deref())?;
    for (k, line) in open(&input)?.lines().enumerate() {
        let line = line.map_err(|e| io_data(&input, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MeasurementRecord = serde_json::from_str(&line)
            .map_err(|e| data(format!("{}: line {}: {e}", input.display(), k + 1)))?;
        if rec.monitors.len() != rec.m.len() {
            return Err(data(format!("{}: line {}: monitors and m differ in length", input.display(), k + 1)));
        }
        let pos: HashMap<AsId, u8> = rec.monitors.iter().copied().zip(rec.m.iter().copied()).collect();
        let values = model
            .monitor_asns
            .iter()
            .map(|a| {
                pos.get(a)
                    .copied()
                    .ok_or_else(|| data(format!("{}: line {}: monitor {a} missing", input.display(), k + 1)))
            })
            .collect::<CliResult<Vec<u8>>>()?;
        let m = MeasurementVector::new(values, rec.corrupted)
            .map_err(|e| data(format!("{}: line {}: {e}", input.display(), k + 1)))?;
        let est = predict_lre(&model, &m)?;
        serde_json::to_writer(&mut out, &est).map_err(|e| data(e.to_string()))?;
        out.write_all(b"\n").map_err(write_err)?;
    }
    out.commit()
}

fn load_pfx2as(paths: &[PathBuf], rule: ConsistencyRule) -> CliResult<PrefixToAsMap> {
    let snapshots = paths
        .iter()
        .map(|p| in_file(p, parse_pfx2as(open(p)?)))
        .collect::<CliResult<Vec<_>>>()?;
    match snapshots.len() {
        0 => Err(usage("--pfx2as is required")),
        1 => Ok(snapshots.into_iter().next().unwrap()),
        _ => Ok(merge_pfx2as_snapshots(&snapshots, rule)?),
    }
}

pub fn ping_targets(a: PingTargetsArgs) -> CliResult<()> {
    let hitlist = required(a.hitlist, "hitlist")?;
    let t = a.min_consistency.unwrap_or(0.5);
    let rule = if a.inclusive {
        ConsistencyRule::AtLeast(t)
    } else {
        ConsistencyRule::MoreThan(t)
    };
    let map = load_pfx2as(&a.pfx2as, rule)?;
    let (targets, stats) = in_file(
        &hitlist,
        build_ping_targets(open(&hitlist)?, &map, a.min_score.unwrap_or(0.9), a.cap.unwrap_or(10)),
    )?;
    eprintln!(
        "{} ASes with targets; skipped {} malformed, {} below score, {} unmapped, {} multi-origin, {} over cap",
        targets.targets.len(),
        stats.malformed,
        stats.below_threshold,
        stats.unmapped,
        stats.multi_origin,
        stats.over_cap
    );
    let mut out = Output::create(a.output.as_deref())?;
    serde_json::to_writer(&mut out, &targets).map_err(|e| data(e.to_string()))?;
    out.write_all(b"\n").map_err(write_err)?;
    out.commit()
}

pub fn classify(a: ClassifyArgs) -> CliResult<()> {
    let event_path = required(a.event, "event")?;
    let event: EventSpec = serde_json::from_str(&read_to_string(&event_path)?)
        .map_err(|e| data(format!("{}: {e}", event_path.display())))?;
    let result = match (&a.bgp, &a.traceroutes) {
        (Some(p), None) => {
            let mode = if a.origin_only {
                PathMode::OriginOnly
            } else {
                PathMode::WholePath
            };
            classify_bgp_paths(&in_file(p, read_path_records(open(p)?))?, &event, mode)?
        }
        (None, Some(p)) => {
            let pfx = required(a.pfx2as, "pfx2as")?;
            let map = in_file(&pfx, parse_pfx2as(open(&pfx)?))?;
            classify_traceroutes(&in_file(p, read_traceroute_records(open(p)?))?, &event, &map)?
        }
        (None, None) => return Err(usage("one of --bgp or --traceroutes is required")),
        (Some(_), Some(_)) => return Err(usage("--bgp and --traceroutes are mutually exclusive")),
    };
    let d = &result.diagnostics;
    eprintln!(
        "{} monitors classified, {} without inference, {} rejected",
        result.monitors.len(),
        d.no_inference,
        d.errors.len()
    );
    for (k, msg) in &d.errors {
        eprintln!("  record {}: {msg}", k + 1);
    }
    let record = result.measurements.to_record(&result.monitors)?;
    let mut out = Output::create(a.output.as_deref())?;
    serde_json::to_writer(&mut out, &record).map_err(|e| data(e.to_string()))?;
    out.write_all(b"\n").map_err(write_err)?;
    out.commit()
}

pub fn experiment(a: ExperimentArgs, jobs: usize) -> CliResult<()> {
    let seed = required(a.seed, "seed")?;
    let [graph_seed, train_seed, test_seed, run_seed, ping_seed] = sub_seeds(seed);
    let graph = load_graph(&a.graph, graph_seed)?;
    let count = a.scenarios.unwrap_or(1000);
    let hijack_type = a.hijack_type.unwrap_or(0);
    let mode = prefix_mode(a.prefix_mode.as_deref())?;

    let source = match a.source.as_deref().unwrap_or("random") {
        "random" => MonitorSource::Random,
        "clustered" => {
            let d = ClusterSpec::default();
            MonitorSource::Clustered(ClusterSpec {
                providers: a.cluster_providers.unwrap_or(d.providers),
                max_cone_fraction: a.cluster_fraction.unwrap_or(d.max_cone_fraction),
            })
        }
        file => {
            let path = Path::new(file);
            let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("fixed");
            MonitorSource::Fixed(load_set(path, label, Some(&graph))?)
        }
    };
    let observation = match (a.ping_n_ip, a.failure_p) {
        (None, None) => Observation::ControlPlane,
        (Some(n), None) => Observation::Ping(PingModel::new(n, ping_seed)?),
        (None, Some(p)) => Observation::Ping(PingModel::constant(p, ping_seed)?),
        (Some(_), Some(_)) => return Err(usage("--ping-n-ip and --failure-p are mutually exclusive")),
    };
    let ms = if a.ms.is_empty() { vec![10, 100, 1000] } else { a.ms };

    let train = simulate_dataset(&graph, &random_scenarios(&graph, count, hijack_type, mode, train_seed)?, jobs)?;
    let reports: Vec<EvalReport> = match a.estimator.as_deref().unwrap_or("nie") {
        "nie" => {
            let cfg = NieExperiment {
                source,
                observation,
                ms,
                draws: a.draws.unwrap_or(1),
                seed: run_seed,
                jobs,
            };
            run_nie_experiment(&graph, &train, &cfg)?.into_iter().map(|p| p.report).collect()
        }
        "lre" => {
            let n_test = a.test_scenarios.unwrap_or(count);
            let test = simulate_dataset(
                &graph,
                &random_scenarios(&graph, n_test, hijack_type, mode, test_seed)?,
                jobs,
            )?;
            let cfg = LreExperiment {
                source,
                observation,
                ms,
                alpha: a.alpha.unwrap_or(DEFAULT_ALPHA),
                leave_pair_out: !a.keep_test_pairs,
                seed: run_seed,
                jobs,
            };
            run_lre_experiment(&graph, &train, &test, &cfg)?
                .into_iter()
                .flat_map(|p| [p.nie, p.lre])
                .collect()
        }
        other => return Err(usage(format!("unknown estimator {other:?}, expected nie or lre"))),
    };
    let mut out = Output::create(a.output.as_deref())?;
    write_reports_csv(&mut out, &reports)?;
    out.commit()
}
