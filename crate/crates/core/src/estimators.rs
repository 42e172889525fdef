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

//! Impact estimators: the naive monitor average, its ping-based variant,
//! ridge regression over monitor bits, and a two-feature linear model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, SymMatrix};
use crate::monitors::{observe_ping, sample_random_monitors, MeasurementVector, MonitorSet, PingModel};
use crate::sim::{splitmix64, LearnedFrom, RibSnapshot, RoutingOutcome};
use crate::topology::{AsGraph, AsId};

/// Ridge strength used when none is given.
pub const DEFAULT_ALPHA: f64 = 50.0;

/// An impact estimate in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactEstimate {
    pub value: f64,
    pub estimator: String,
    /// Set when the raw prediction fell outside `[0, 1]`.
    pub clamped: bool,
}

impl ImpactEstimate {
    fn clamped(raw: f64, estimator: &str) -> Self {
        let value = raw.clamp(0.0, 1.0);
        ImpactEstimate {
            value,
            estimator: estimator.to_string(),
            clamped: value != raw,
        }
    }
}

/// Fraction of monitors that observed the hijacker.
pub fn nie(measurements: &MeasurementVector) -> Result<ImpactEstimate> {
    if measurements.is_empty() {
        return Err(Error::arg("no measurements"));
    }
    Ok(ImpactEstimate {
        value: measurements.infected() as f64 / measurements.len() as f64,
        estimator: "nie".into(),
        clamped: false,
    })
}

/// Pings `m` uniformly drawn ASes and averages the no-reply bits.
///
/// `seed` picks the monitors and is mixed into the model's seed for the
/// failure draws, so repeated calls with different seeds are independent.
pub fn ping_ie(
    outcome: &RoutingOutcome,
    graph: &AsGraph,
    m: usize,
    model: &PingModel,
    seed: u64,
) -> Result<ImpactEstimate> {
    let monitors = sample_random_monitors(graph, m, seed)?;
    let model = model.clone().with_seed(splitmix64(model.seed ^ splitmix64(seed)));
    let bits = observe_ping(outcome, graph, &monitors, &model)?;
    let mut est = nie(&bits)?;
    est.estimator = "ping-ie".into();
    Ok(est)
}

/// Binary event-by-monitor matrix; one row per hijack event.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationMatrix {
    cols: usize,
    rows: Vec<Vec<u8>>,
}

impl ObservationMatrix {
    pub fn new(cols: usize) -> Self {
        ObservationMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut out = ObservationMatrix::new(cols);
        for row in rows {
            out.push(row)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, row: Vec<u8>) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::arg(format!(
                "row has {} entries, expected {}",
                row.len(),
                self.cols
            )));
        }
        if row.iter().any(|&v| v > 1) {
            return Err(Error::arg("observation entries must be 0 or 1"));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_measurement(&mut self, m: &MeasurementVector) -> Result<()> {
        self.push(m.values().to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i]
    }
}

/// Ridge regression from monitor bits to impact, without intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LreModel {
    pub monitor_asns: Vec<AsId>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    /// Number of training events.
    pub trained_on: usize,
}

impl LreModel {
    pub fn monitors(&self) -> Result<MonitorSet> {
        MonitorSet::new("lre", self.monitor_asns.clone())
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.monitor_asns.len() {
            return Err(Error::arg("weights and monitors differ in length"));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::arg("alpha must be non-negative"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: LreModel = serde_json::from_str(text)?;
        model.check()?;
        Ok(model)
    }
}

/// Minimizes `||X w - y||² + alpha ||w||²` through the normal equations.
pub fn ridge_weights(x: &ObservationMatrix, y: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if x.rows() != y.len() {
        return Err(Error::arg(format!(
            "{} events but {} impacts",
            x.rows(),
            y.len()
        )));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::arg(format!("alpha must be a finite non-negative number, got {alpha}")));
    }
    let n = x.cols();
    let mut gram = SymMatrix::zeros(n);
    let mut rhs = vec![0.0; n];
    let mut ones = Vec::with_capacity(n);
    for (row, &target) in x.rows.iter().zip(y) {
        ones.clear();
        ones.extend(row.iter().enumerate().filter(|(_, &v)| v == 1).map(|(j, _)| j));
        for (a, &i) in ones.iter().enumerate() {
            rhs[i] += target;
            for &j in &ones[..=a] {
                gram.add(i, j, 1.0);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            let v = gram.at(i, j);
            gram.data[j * n + i] = v;
        }
        gram.add(i, i, alpha);
    }
    cholesky_solve(gram, &rhs).map_err(|e| match e {
        Error::Singular(msg) if alpha == 0.0 => {
            Error::Singular(format!("{msg}; observations are rank-deficient, use alpha > 0"))
        }
        other => other,
    })
}

/// Fits an [`LreModel`] whose weights align with `monitors`.
pub fn fit_lre(
    monitors: &MonitorSet,
    observations: &ObservationMatrix,
    impacts: &[f64],
    alpha: f64,
) -> Result<LreModel> {
    if observations.cols() != monitors.len() {
        return Err(Error::arg(format!(
            "{} observation columns for {} monitors",
            observations.cols(),
            monitors.len()
        )));
    }
    Ok(LreModel {
        monitor_asns: monitors.members().to_vec(),
        weights: ridge_weights(observations, impacts, alpha)?,
        alpha,
        trained_on: observations.rows(),
    })
}

/// Weighted sum of the monitor bits, clamped to `[0, 1]`.
pub fn predict_lre(model: &LreModel, measurements: &MeasurementVector) -> Result<ImpactEstimate> {
    if model.weights.len() != measurements.len() {
        return Err(Error::arg(format!(
            "model has {} weights, got {} measurements",
            model.weights.len(),
            measurements.len()
        )));
    }
    let raw: f64 = model
        .weights
        .iter()
        .zip(measurements.values())
        .map(|(w, &m)| w * m as f64)
        .sum();
    Ok(ImpactEstimate::clamped(raw, "lre"))
}

/// Which monitor-level comparison feeds the two-feature model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Shorter path to the victim than to the hijacker.
    Dist,
    /// Victim route learned from a more preferred neighbor class.
    Pref,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Dist => "dist",
            FeatureKind::Pref => "pref",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dist" => Ok(FeatureKind::Dist),
            "pref" => Ok(FeatureKind::Pref),
            _ => Err(Error::arg(format!("unknown feature kind {s:?}"))),
        }
    }
}

/// A feature value in `[-1, 1]` and the monitors that could not vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureValue {
    pub value: f64,
    /// Monitors without a route in at least one snapshot; they count as 0.
    pub unreachable: usize,
}

fn feature(
    rib_v: &RibSnapshot,
    rib_h: &RibSnapshot,
    graph: &AsGraph,
    monitors: &MonitorSet,
    vote: impl Fn((LearnedFrom, u32), (LearnedFrom, u32)) -> i32,
) -> Result<FeatureValue> {
    if monitors.is_empty() {
        return Err(Error::arg("no monitors"));
    }
    let mut sum = 0i64;
    let mut unreachable = 0;
    for i in monitors.indices(graph)? {
        match (rib_v.summary(i), rib_h.summary(i)) {
            (Some(v), Some(h)) => sum += vote(v, h) as i64,
            _ => unreachable += 1,
        }
    }
    Ok(FeatureValue {
        value: sum as f64 / monitors.len() as f64,
        unreachable,
    })
}

/// `(1/M) Σ [d_V < d_H] - [d_H < d_V]` over the monitors' best-route
/// lengths in the victim-only and hijacker-only snapshots.
pub fn compute_f_dist(
    rib_v: &RibSnapshot,
    rib_h: &RibSnapshot,
    graph: &AsGraph,
    monitors: &MonitorSet,
) -> Result<FeatureValue> {
    feature(rib_v, rib_h, graph, monitors, |(_, dv), (_, dh)| match dv.cmp(&dh) {
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Greater => -1,
        std::cmp::Ordering::Equal => 0,
    })
}

/// Like [`compute_f_dist`] but compares neighbor classes: self, then
/// customer, then peer, then provider.
pub fn compute_f_pref(
    rib_v: &RibSnapshot,
    rib_h: &RibSnapshot,
    graph: &AsGraph,
    monitors: &MonitorSet,
) -> Result<FeatureValue> {
    // LearnedFrom orders best class first
    feature(rib_v, rib_h, graph, monitors, |(cv, _), (ch, _)| match cv.cmp(&ch) {
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Greater => -1,
        std::cmp::Ordering::Equal => 0,
    })
}

/// One training event of the two-feature model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSample {
    pub nie: f64,
    pub f: f64,
    pub impact: f64,
}

/// `I ≈ w0 + w_nie * NIE + w_f * f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureLreModel {
    pub kind: FeatureKind,
    pub w0: f64,
    pub w_nie: f64,
    pub w_f: f64,
}

/// Shown whenever a preset is used.
pub const PRESET_WARNING: &str = "preset weights are unverified starting values and even the sign \
of the feature weight is uncertain; refit on your own data before relying on them";

impl FeatureLreModel {
    /// Starting weights for route-collector monitors on exact-prefix
    /// origin hijacks. Not authoritative, see [`PRESET_WARNING`].
    pub fn draft_preset(kind: FeatureKind) -> (Self, &'static str) {
        let (w0, w_nie, w_f) = match kind {
            FeatureKind::Pref => (0.04, 0.92, 0.11),
            FeatureKind::Dist => (0.12, 0.77, 0.08),
        };
        (FeatureLreModel { kind, w0, w_nie, w_f }, PRESET_WARNING)
    }
}

/// Ordinary least squares with intercept on `(nie, f)`.
///
/// A feature that never varies cannot be separated from the intercept, so
/// its weight is set to 0 and the fit reduces to regressing on NIE alone.
/// NIE itself must vary, and must not be collinear with `f`.
pub fn fit_feature_lre(samples: &[FeatureSample], kind: FeatureKind) -> Result<FeatureLreModel> {
    if samples.len() < 3 {
        return Err(Error::arg(format!("need at least 3 samples, got {}", samples.len())));
    }
    let n = samples.len() as f64;
    let mean = |g: fn(&FeatureSample) -> f64| samples.iter().map(g).sum::<f64>() / n;
    let (mx, mf, my) = (mean(|s| s.nie), mean(|s| s.f), mean(|s| s.impact));
    let (mut sxx, mut sff, mut sxf, mut sxy, mut sfy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in samples {
        let (x, f, y) = (s.nie - mx, s.f - mf, s.impact - my);
        sxx += x * x;
        sff += f * f;
        sxf += x * f;
        sxy += x * y;
        sfy += f * y;
    }
    let tiny = 1e-12 * n;
    if sxx <= tiny {
        return Err(Error::Singular("NIE is constant across samples".into()));
    }
    let (w_nie, w_f) = if sff <= tiny {
        (sxy / sxx, 0.0)
    } else {
        let det = sxx * sff - sxf * sxf;
        if det <= 1e-10 * sxx * sff {
            return Err(Error::Singular("NIE and the feature are collinear".into()));
        }
        ((sff * sxy - sxf * sfy) / det, (sxx * sfy - sxf * sxy) / det)
    };
    Ok(FeatureLreModel {
        kind,
        w0: my - w_nie * mx - w_f * mf,
        w_nie,
        w_f,
    })
}

pub fn predict_feature_lre(model: &FeatureLreModel, nie: f64, f: f64) -> ImpactEstimate {
    let raw = model.w0 + model.w_nie * nie + model.w_f * f;
    ImpactEstimate::clamped(raw, &format!("lre-{}", model.kind))
}
