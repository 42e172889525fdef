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

//! Error metrics, scenario datasets and the estimator experiments built
//! on top of them.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit_lre, nie, predict_lre, ObservationMatrix};
use crate::monitors::{
    observe_control_plane_at, observe_ping_at, sample_clustered_monitors, sample_random_monitors, ClusterSpec,
    MeasurementVector, MonitorSet, PingModel,
};
use crate::sim::{batch_map, simulate_hijack, splitmix64, HijackScenario, PrefixMode, RoutingOutcome};
use crate::topology::{AsGraph, AsId};

/// Error summary of one estimator on one monitor set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub estimator: String,
    pub monitor_set: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub bias: f64,
    pub rmse: f64,
    pub mae: f64,
    pub relmae: f64,
    pub n: usize,
    /// Events with zero true impact, left out of `relmae`.
    #[serde(skip)]
    pub relmae_skipped: usize,
}

impl EvalReport {
    pub fn labeled(mut self, estimator: &str, monitor_set: &str, m: usize) -> Self {
        self.estimator = estimator.to_string();
        self.monitor_set = monitor_set.to_string();
        self.m = m;
        self
    }
}

/// Bias, RMSE, MAE and relative MAE of `estimates` against `truths`.
pub fn evaluate(estimates: &[f64], truths: &[f64]) -> Result<EvalReport> {
    if estimates.len() != truths.len() {
        return Err(Error::arg(format!(
            "{} estimates for {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    if estimates.is_empty() {
        return Err(Error::arg("nothing to evaluate"));
    }
    let n = estimates.len() as f64;
    let (mut sum, mut sq, mut abs, mut rel) = (0.0, 0.0, 0.0, 0.0);
    let mut skipped = 0;
    for (&e, &t) in estimates.iter().zip(truths) {
        let d = e - t;
        sum += d;
        sq += d * d;
        abs += d.abs();
        if t > 0.0 {
            rel += d.abs() / t;
        } else {
            skipped += 1;
        }
    }
    let mae = abs / n;
    let counted = estimates.len() - skipped;
    Ok(EvalReport {
        estimator: String::new(),
        monitor_set: String::new(),
        m: 0,
        bias: sum / n,
        // equal-magnitude errors can round the root an ulp below the MAE
        rmse: (sq / n).sqrt().max(mae),
        mae,
        relmae: if counted == 0 { 0.0 } else { rel / counted as f64 },
        n: estimates.len(),
        relmae_skipped: skipped,
    })
}

/// Writes reports as CSV with header
/// `estimator,monitor_set,M,bias,rmse,mae,relmae,n`.
pub fn write_reports_csv<W: Write>(writer: W, reports: &[EvalReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    if reports.is_empty() {
        out.write_record(["estimator", "monitor_set", "M", "bias", "rmse", "mae", "relmae", "n"])
            .map_err(csv_error)?;
    }
    for r in reports {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::arg(format!("csv: {other:?}")),
    }
}

/// Observations of one monitor set inside a [`ScenarioRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorObservation {
    pub asns: Vec<AsId>,
    pub m: Vec<u8>,
}

/// One line of a scenario dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub id: u64,
    pub victim: AsId,
    pub hijacker: AsId,
    #[serde(rename = "type")]
    pub hijack_type: u32,
    pub prefix_mode: PrefixMode,
    pub seed: u64,
    pub impact: f64,
    #[serde(default)]
    pub monitor_sets: BTreeMap<String, MonitorObservation>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub estimates: BTreeMap<String, f64>,
}

impl ScenarioRecord {
    pub fn from_outcome(id: u64, outcome: &RoutingOutcome) -> Self {
        let s = outcome.scenario();
        ScenarioRecord {
            id,
            victim: s.victim,
            hijacker: s.hijacker,
            hijack_type: s.hijack_type,
            prefix_mode: s.prefix_mode,
            seed: s.seed,
            impact: outcome.impact(),
            monitor_sets: BTreeMap::new(),
            estimates: BTreeMap::new(),
        }
    }

    pub fn scenario(&self) -> HijackScenario {
        HijackScenario::new(self.victim, self.hijacker, self.hijack_type, self.seed).with_prefix_mode(self.prefix_mode)
    }

    pub fn add_observation(&mut self, monitors: &MonitorSet, m: &MeasurementVector) -> Result<()> {
        if monitors.len() != m.len() {
            return Err(Error::arg("monitor set and measurements differ in length"));
        }
        self.monitor_sets.insert(
            monitors.label().to_string(),
            MonitorObservation {
                asns: monitors.members().to_vec(),
                m: m.values().to_vec(),
            },
        );
        Ok(())
    }

    /// The stored observations of `label` as a monitor set and vector.
    pub fn observation(&self, label: &str) -> Result<(MonitorSet, MeasurementVector)> {
        let obs = self
            .monitor_sets
            .get(label)
            .ok_or_else(|| Error::arg(format!("record {} has no monitor set {label:?}", self.id)))?;
        Ok((
            MonitorSet::new(label, obs.asns.clone())?,
            MeasurementVector::new(obs.m.clone(), false)?,
        ))
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.impact) {
            return Err(format!("impact {} outside [0, 1]", self.impact));
        }
        if self.victim == self.hijacker {
            return Err("victim and hijacker coincide".into());
        }
        for (label, obs) in &self.monitor_sets {
            if obs.asns.len() != obs.m.len() {
                return Err(format!("monitor set {label:?} has {} ASes but {} values", obs.asns.len(), obs.m.len()));
            }
            if obs.m.iter().any(|&v| v > 1) {
                return Err(format!("monitor set {label:?} holds a value other than 0 or 1"));
            }
        }
        Ok(())
    }
}

/// Writes one JSON object per line.
pub fn write_dataset<W: Write>(mut writer: W, records: &[ScenarioRecord]) -> Result<()> {
    for r in records {
        r.check().map_err(|msg| Error::arg(format!("record {}: {msg}", r.id)))?;
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a JSON Lines dataset; blank lines are ignored.
pub fn read_dataset<R: BufRead>(reader: R) -> Result<Vec<ScenarioRecord>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScenarioRecord = serde_json::from_str(&line).map_err(|e| Error::parse(k + 1, e.to_string()))?;
        record.check().map_err(|msg| Error::parse(k + 1, msg))?;
        out.push(record);
    }
    Ok(out)
}

/// Where an experiment's monitors come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MonitorSource {
    /// A fresh uniform sample for every scenario and draw.
    Random,
    /// One clustered sample per draw, shared by all scenarios.
    Clustered(ClusterSpec),
    /// A random `M`-subset of a given set per draw, shared by all
    /// scenarios; the whole set when `M` equals its size.
    Fixed(MonitorSet),
}

impl MonitorSource {
    pub fn label(&self) -> String {
        match self {
            MonitorSource::Random => "random".into(),
            MonitorSource::Clustered(_) => "clustered".into(),
            MonitorSource::Fixed(set) => set.label().into(),
        }
    }

    fn per_scenario(&self) -> bool {
        matches!(self, MonitorSource::Random)
    }

    /// Draws `m` monitors.
    pub fn draw(&self, graph: &AsGraph, m: usize, seed: u64) -> Result<MonitorSet> {
        match self {
            MonitorSource::Random => sample_random_monitors(graph, m, seed),
            MonitorSource::Clustered(spec) => sample_clustered_monitors(graph, m, *spec, seed),
            MonitorSource::Fixed(set) => {
                if m > set.len() {
                    return Err(Error::arg(format!("{m} monitors requested from a set of {}", set.len())));
                }
                if m == set.len() {
                    return Ok(set.clone());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let members = sample(&mut rng, set.len(), m)
                    .into_iter()
                    .map(|k| set.members()[k])
                    .collect();
                MonitorSet::new(set.label(), members)
            }
        }
    }
}

/// How monitors read the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    ControlPlane,
    /// Ping campaigns; the model's seed is mixed per scenario and draw.
    Ping(PingModel),
}

impl Observation {
    fn observe(&self, outcome: &RoutingOutcome, graph: &AsGraph, indices: &[usize], seed: u64) -> MeasurementVector {
        match self {
            Observation::ControlPlane => observe_control_plane_at(outcome, indices),
            Observation::Ping(model) => {
                let model = model.clone().with_seed(mix(&[model.seed, seed]));
                observe_ping_at(outcome, graph, indices, &model)
            }
        }
    }
}

fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6a09_e667_f3bc_c908, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Simulates `scenarios` in parallel and keeps only the decisions.
pub fn simulate_dataset(graph: &AsGraph, scenarios: &[HijackScenario], jobs: usize) -> Result<Vec<RoutingOutcome>> {
    batch_map(scenarios, jobs, |_, s| Ok(simulate_hijack(graph, s)?.into_decisions_only()))
}

/// Settings of [`run_nie_experiment`].
#[derive(Debug, Clone)]
pub struct NieExperiment {
    pub source: MonitorSource,
    pub observation: Observation,
    pub ms: Vec<usize>,
    /// Independent monitor (and failure) draws per scenario.
    pub draws: usize,
    pub seed: u64,
    pub jobs: usize,
}

/// One point of an NIE error curve.
#[derive(Debug, Clone, PartialEq)]
pub struct NiePoint {
    /// Errors pooled over every scenario and draw.
    pub report: EvalReport,
    /// Mean over scenarios of the per-scenario RMSE across draws, i.e.
    /// the RMSE conditional on the impact, averaged over impacts.
    pub integrated_rmse: f64,
}

/// Estimates every outcome's impact with NIE at each `M` of the grid.
pub fn run_nie_experiment(graph: &AsGraph, outcomes: &[RoutingOutcome], cfg: &NieExperiment) -> Result<Vec<NiePoint>> {
    if cfg.draws == 0 || outcomes.is_empty() {
        return Err(Error::arg("experiment needs at least one scenario and one draw"));
    }
    let scenarios: Vec<HijackScenario> = outcomes.iter().map(|o| *o.scenario()).collect();
    let label = cfg.source.label();
    let mut points = Vec::with_capacity(cfg.ms.len());
    for &m in &cfg.ms {
        // shared monitor sets, one per draw
        let shared: Vec<Vec<usize>> = if cfg.source.per_scenario() {
            Vec::new()
        } else {
            (0..cfg.draws)
                .map(|k| cfg.source.draw(graph, m, mix(&[cfg.seed, m as u64, k as u64]))?.indices(graph))
                .collect::<Result<_>>()?
        };
        let per_scenario = batch_map(&scenarios, cfg.jobs, |j, _| {
            let outcome = &outcomes[j];
            (0..cfg.draws)
                .map(|k| {
                    let seed = mix(&[cfg.seed, m as u64, k as u64, j as u64]);
                    let drawn;
                    let indices = if cfg.source.per_scenario() {
                        drawn = cfg.source.draw(graph, m, seed)?.indices(graph)?;
                        &drawn
                    } else {
                        &shared[k]
                    };
                    let bits = cfg.observation.observe(outcome, graph, indices, seed);
                    Ok(nie(&bits)?.value)
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        let mut estimates = Vec::with_capacity(outcomes.len() * cfg.draws);
        let mut truths = Vec::with_capacity(estimates.capacity());
        let mut conditional = 0.0;
        for (outcome, est) in outcomes.iter().zip(&per_scenario) {
            let truth = outcome.impact();
            let sq: f64 = est.iter().map(|e| (e - truth).powi(2)).sum();
            conditional += (sq / est.len() as f64).sqrt();
            truths.extend(std::iter::repeat(truth).take(est.len()));
            estimates.extend_from_slice(est);
        }
        points.push(NiePoint {
            report: evaluate(&estimates, &truths)?.labeled("nie", &label, m),
            integrated_rmse: conditional / outcomes.len() as f64,
        });
    }
    Ok(points)
}

/// Settings of [`run_lre_experiment`].
#[derive(Debug, Clone)]
pub struct LreExperiment {
    pub source: MonitorSource,
    pub observation: Observation,
    pub ms: Vec<usize>,
    pub alpha: f64,
    /// Drop training events whose unordered pair also occurs in the test
    /// set.
    pub leave_pair_out: bool,
    pub seed: u64,
    pub jobs: usize,
}

/// Test-set errors of NIE and LRE on the same monitors.
#[derive(Debug, Clone, PartialEq)]
pub struct LrePoint {
    pub nie: EvalReport,
    pub lre: EvalReport,
}

fn pair_key(s: &HijackScenario) -> (AsId, AsId) {
    (s.victim.min(s.hijacker), s.victim.max(s.hijacker))
}

fn observation_matrix(
    graph: &AsGraph,
    outcomes: &[RoutingOutcome],
    indices: &[usize],
    observation: &Observation,
    seed: u64,
    jobs: usize,
) -> Result<Vec<MeasurementVector>> {
    let scenarios: Vec<HijackScenario> = outcomes.iter().map(|o| *o.scenario()).collect();
    batch_map(&scenarios, jobs, |j, _| {
        Ok(observation.observe(&outcomes[j], graph, indices, mix(&[seed, j as u64])))
    })
}

/// Fits LRE on `train` and compares it with NIE on `test`, one monitor
/// set per `M`.
pub fn run_lre_experiment(
    graph: &AsGraph,
    train: &[RoutingOutcome],
    test: &[RoutingOutcome],
    cfg: &LreExperiment,
) -> Result<Vec<LrePoint>> {
    if test.is_empty() {
        return Err(Error::arg("empty test set"));
    }
    let train: Vec<&RoutingOutcome> = if cfg.leave_pair_out {
        let held: HashSet<_> = test.iter().map(|o| pair_key(o.scenario())).collect();
        train.iter().filter(|o| !held.contains(&pair_key(o.scenario()))).collect()
    } else {
        train.iter().collect()
    };
    let train: Vec<RoutingOutcome> = train.into_iter().cloned().collect();
    let label = cfg.source.label();
    let mut points = Vec::with_capacity(cfg.ms.len());
    for &m in &cfg.ms {
        let monitors = cfg.source.draw(graph, m, mix(&[cfg.seed, m as u64]))?;
        let indices = monitors.indices(graph)?;
        let rows = observation_matrix(graph, &train, &indices, &cfg.observation, mix(&[cfg.seed, m as u64, 1]), cfg.jobs)?;
        let mut x = ObservationMatrix::new(m);
        for r in &rows {
            x.push_measurement(r)?;
        }
        let y: Vec<f64> = train.iter().map(|o| o.impact()).collect();
        let model = fit_lre(&monitors, &x, &y, cfg.alpha)?;

        let rows = observation_matrix(graph, test, &indices, &cfg.observation, mix(&[cfg.seed, m as u64, 2]), cfg.jobs)?;
        let truths: Vec<f64> = test.iter().map(|o| o.impact()).collect();
        let nie_est = rows.iter().map(|r| nie(r).map(|e| e.value)).collect::<Result<Vec<_>>>()?;
        let lre_est = rows
            .iter()
            .map(|r| predict_lre(&model, r).map(|e| e.value))
            .collect::<Result<Vec<_>>>()?;
        points.push(LrePoint {
            nie: evaluate(&nie_est, &truths)?.labeled("nie", &label, m),
            lre: evaluate(&lre_est, &truths)?.labeled("lre", &label, m),
        });
    }
    Ok(points)
}

/// Out-of-sample LRE predictions within one dataset: event `j` is
/// predicted by a model trained on every event except those with the same
/// unordered {victim, hijacker} pair.
pub fn leave_pair_out_lre(
    monitors: &MonitorSet,
    observations: &ObservationMatrix,
    scenarios: &[HijackScenario],
    impacts: &[f64],
    alpha: f64,
) -> Result<Vec<f64>> {
    if scenarios.len() != observations.rows() || impacts.len() != observations.rows() {
        return Err(Error::arg("scenarios, observations and impacts differ in length"));
    }
    let mut groups: BTreeMap<(AsId, AsId), Vec<usize>> = BTreeMap::new();
    for (j, s) in scenarios.iter().enumerate() {
        groups.entry(pair_key(s)).or_default().push(j);
    }
    let mut out = vec![0.0; scenarios.len()];
    for members in groups.values() {
        let held: HashSet<usize> = members.iter().copied().collect();
        let mut x = ObservationMatrix::new(observations.cols());
        let mut y = Vec::new();
        for j in (0..observations.rows()).filter(|j| !held.contains(j)) {
            x.push(observations.row(j).to_vec())?;
            y.push(impacts[j]);
        }
        let model = fit_lre(monitors, &x, &y, alpha)?;
        for &j in members {
            let m = MeasurementVector::new(observations.row(j).to_vec(), false)?;
            out[j] = predict_lre(&model, &m)?.value;
        }
    }
    Ok(out)
}
