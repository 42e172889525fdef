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


//! Flag definitions. Every subcommand's flags may also come from a TOML
//! config file: a table named after the subcommand whose keys are the
//! long flag names. Flags given on the command line win.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::error::{usage, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hijack-impact", version, about = "Simulate BGP prefix hijacks and estimate their impact")]
pub struct Cli {
    /// TOML file with defaults for subcommand flags ([simulate], [eval], ...)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for scenario-level parallelism; results do not depend on it
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic AS-relationship topology
    Generate(GenerateArgs),
    /// Simulate hijack scenarios and write a JSONL dataset
    Simulate(SimulateArgs),
    /// Score estimators on a dataset and write a CSV report
    Eval(EvalArgs),
    /// Closed-form bias and RMSE curves as CSV
    Theory(TheoryArgs),
    /// Fit a ridge regression estimator on a dataset
    FitLre(FitLreArgs),
    /// Apply a fitted regression model to measurement records
    Predict(PredictArgs),
    /// Build per-AS ping target lists from a hitlist and pfx2as data
    PingTargets(PingTargetsArgs),
    /// Classify BGP paths or traceroutes of an event into measurements
    Classify(ClassifyArgs),
    /// Run an estimator experiment over an M grid and write a CSV report
    Experiment(ExperimentArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Simulate(_) => "simulate",
            Command::Eval(_) => "eval",
            Command::Theory(_) => "theory",
            Command::FitLre(_) => "fit-lre",
            Command::Predict(_) => "predict",
            Command::PingTargets(_) => "ping-targets",
            Command::Classify(_) => "classify",
            Command::Experiment(_) => "experiment",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct GenerateArgs {
    /// Number of ASes
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Generator seed (required)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file, stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct GraphArgs {
    /// AS-relationship file (`a|b|rel`, optionally gzipped)
    #[arg(long, value_name = "FILE")]
    pub topology: Option<PathBuf>,
    /// Use a synthetic topology of this many ASes, generated from --seed
    #[arg(long, value_name = "N", conflicts_with = "topology")]
    pub synthetic: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Number of scenarios [default: 1000]
    #[arg(long)]
    pub scenarios: Option<usize>,
    /// Hijack type: hops between hijacker and claimed origin [default: 0]
    #[arg(long = "type", value_name = "N")]
    #[serde(rename = "type")]
    pub hijack_type: Option<u32>,
    /// exact or sub [default: exact]
    #[arg(long)]
    pub prefix_mode: Option<String>,
    /// Seed for scenario draws and tie-breaking (required)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw victims from this AS list instead of the whole graph
    #[arg(long, value_name = "FILE")]
    pub victims: Option<PathBuf>,
    /// Draw hijackers from this AS list instead of the whole graph
    #[arg(long, value_name = "FILE")]
    pub hijackers: Option<PathBuf>,
    /// Monitor set to observe, as LABEL=FILE; repeatable
    #[arg(long = "monitors", value_name = "LABEL=FILE")]
    pub monitors: Vec<String>,
    /// Also observe a uniform random monitor set of this size
    #[arg(long, value_name = "M")]
    pub random_monitors: Option<usize>,
    /// Also observe a clustered monitor set of this size
    #[arg(long, value_name = "M")]
    pub clustered_monitors: Option<usize>,
    /// Observe with pings to this many addresses per AS instead of BGP
    #[arg(long, value_name = "N")]
    pub ping_n_ip: Option<u32>,
    /// Output file, stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct EvalArgs {
    /// Scenario dataset (JSONL)
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Only score this monitor set
    #[arg(long, value_name = "LABEL")]
    pub monitor_set: Option<String>,
    /// Also score this fitted regression model
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Output CSV, stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct TheoryArgs {
    /// Take the impact distribution from this dataset
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Use this many uniform impact draws instead (needs --seed)
    #[arg(long, value_name = "N", conflicts_with = "dataset")]
    pub uniform: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monitor counts [default: 10,100,1000]
    #[arg(long = "m", value_delimiter = ',', value_name = "M,...")]
    #[serde(rename = "m")]
    pub ms: Vec<u64>,
    /// Failure probabilities [default: 0]
    #[arg(long = "p", value_delimiter = ',', value_name = "P,...")]
    #[serde(rename = "p")]
    pub ps: Vec<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct FitLreArgs {
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Monitor set to train on; optional when the dataset has only one
    #[arg(long, value_name = "LABEL")]
    pub monitor_set: Option<String>,
    /// Ridge strength [default: 50]
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct PredictArgs {
    /// Model written by fit-lre
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Measurement records, one JSON object per line
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct PingTargetsArgs {
    /// Hitlist with `<ip> <score>` lines
    #[arg(long, value_name = "FILE")]
    pub hitlist: Option<PathBuf>,
    /// pfx2as snapshot; repeat to merge several
    #[arg(long, value_name = "FILE")]
    pub pfx2as: Vec<PathBuf>,
    /// Keep mappings seen in more than this share of snapshots [default: 0.5]
    #[arg(long)]
    pub min_consistency: Option<f64>,
    /// Treat --min-consistency as inclusive
    #[arg(long)]
    pub inclusive: bool,
    /// Minimum hitlist score [default: 0.9]
    #[arg(long)]
    pub min_score: Option<f64>,
    /// Targets kept per AS [default: 10]
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ClassifyArgs {
    /// Event description (JSON)
    #[arg(long, value_name = "FILE")]
    pub event: Option<PathBuf>,
    /// BGP path records (JSONL)
    #[arg(long, value_name = "FILE")]
    pub bgp: Option<PathBuf>,
    /// Traceroute records (JSONL); needs --pfx2as
    #[arg(long, value_name = "FILE", conflicts_with = "bgp")]
    pub traceroutes: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub pfx2as: Option<PathBuf>,
    /// Only the origin of a BGP path decides infection
    #[arg(long)]
    pub origin_only: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ExperimentArgs {
    /// nie or lre [default: nie]
    #[arg(long)]
    pub estimator: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Scenarios (training scenarios for lre) [default: 1000]
    #[arg(long)]
    pub scenarios: Option<usize>,
    /// Test scenarios for lre [default: same as --scenarios]
    #[arg(long)]
    pub test_scenarios: Option<usize>,
    #[arg(long = "type", value_name = "N")]
    #[serde(rename = "type")]
    pub hijack_type: Option<u32>,
    #[arg(long)]
    pub prefix_mode: Option<String>,
    /// Seed for every random choice (required)
    #[arg(long)]
    pub seed: Option<u64>,
    /// random, clustered, or a monitor list file [default: random]
    #[arg(long)]
    pub source: Option<String>,
    /// Providers whose cones host clustered monitors [default: 2]
    #[arg(long)]
    pub cluster_providers: Option<usize>,
    /// Largest cone, as a share of the graph, for clustered monitors [default: 0.02]
    #[arg(long)]
    pub cluster_fraction: Option<f64>,
    /// Monitor counts [default: 10,100,1000]
    #[arg(long = "m", value_delimiter = ',', value_name = "M,...")]
    #[serde(rename = "m")]
    pub ms: Vec<usize>,
    /// Monitor draws per scenario for nie [default: 1]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Observe with pings to this many addresses per AS
    #[arg(long, value_name = "N", conflicts_with = "failure_p")]
    pub ping_n_ip: Option<u32>,
    /// Observe with pings failing with this constant probability
    #[arg(long, value_name = "P")]
    pub failure_p: Option<f64>,
    /// Ridge strength for lre [default: 50]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Keep training events whose pair also occurs in the test set
    #[arg(long)]
    pub keep_test_pairs: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Fills flags that were not given on the command line from `table`.
pub fn overlay<T: Serialize + DeserializeOwned>(args: T, table: Option<&toml::Value>) -> CliResult<T> {
    let Some(table) = table else {
        return Ok(args);
    };
    let mut merged = serde_json::to_value(table).map_err(|e| usage(format!("config: {e}")))?;
    let given = serde_json::to_value(&args).map_err(|e| usage(e.to_string()))?;
    let (Value::Object(base), Value::Object(given)) = (&mut merged, given) else {
        return Err(usage("config section must be a table"));
    };
    for (k, v) in given {
        let unset = match &v {
            Value::Null | Value::Bool(false) => true,
            Value::Array(a) => a.is_empty(),
            _ => false,
        };
        if !unset || !base.contains_key(&k) {
            base.insert(k, v);
        }
    }
    serde_json::from_value(merged).map_err(|e| usage(format!("config: {e}")))
}
