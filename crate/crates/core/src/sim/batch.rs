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

//! Scenario-parallel execution with scheduling-independent results.

use rayon::prelude::*;
use rayon::ThreadPoolBuilder;

use crate::error::{Error, Result};
use crate::topology::AsGraph;

use super::{simulate_hijack, HijackScenario, RoutingOutcome};

/// Applies `f` to every scenario on up to `jobs` worker threads.
///
/// Output order matches input order. The first failing scenario (by
/// index) is reported as [`Error::Batch`].
pub fn batch_map<T, F>(scenarios: &[HijackScenario], jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &HijackScenario) -> Result<T> + Sync,
{
    let run = || -> Vec<Result<T>> {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| f(i, s))
            .collect()
    };
    let results = if jobs <= 1 {
        scenarios.iter().enumerate().map(|(i, s)| f(i, s)).collect()
    } else {
        ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?
            .install(run)
    };
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Batch {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Simulates every scenario; see [`batch_map`] for ordering and errors.
pub fn batch_simulate(graph: &AsGraph, scenarios: &[HijackScenario], jobs: usize) -> Result<Vec<RoutingOutcome>> {
    batch_map(scenarios, jobs, |_, s| simulate_hijack(graph, s))
}
