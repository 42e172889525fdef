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

//! Exhaustive reference implementation used to cross-check [`propagate`].
//!
//! Every loop-free, export-rule-respecting path from every AS to every
//! origin is enumerated up front. The stable state is then found by
//! synchronous rounds in which each AS picks, among the enumerated paths
//! whose tail is exactly the route its next hop currently holds, the one
//! ranked best. Nothing here shares code with the wave propagation except
//! the ranking inputs ([`local_pref`] and the announcement description).
//!
//! [`propagate`]: super::propagate

use crate::error::{Error, Result};
use crate::topology::{AsGraph, Role};

use super::{
    announcements, local_pref, Announcement, Entry, HijackScenario, LearnedFrom, PrefixMode, RouteSource,
    RoutingOutcome, NO_HOP,
};

/// Largest graph the oracle agrees to enumerate.
pub const ORACLE_MAX_NODES: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    source: RouteSource,
    /// Holder first, origin last.
    path: Vec<usize>,
    class: LearnedFrom,
    length: u32,
}

/// Computes the scenario outcome by path enumeration.
pub fn brute_force_outcome(graph: &AsGraph, scenario: &HijackScenario) -> Result<RoutingOutcome> {
    if graph.len() > ORACLE_MAX_NODES {
        return Err(Error::TooLarge {
            nodes: graph.len(),
            limit: ORACLE_MAX_NODES,
        });
    }
    scenario.validate(graph)?;
    let (v, h) = announcements(graph, scenario);
    match scenario.prefix_mode {
        PrefixMode::ExactPrefix => {
            let rib = stable_state(graph, &[v, h], scenario.seed)?;
            RoutingOutcome::from_ribs(*scenario, graph, rib, None)
        }
        PrefixMode::SubPrefix => {
            let rib = stable_state(graph, &[v], scenario.seed)?;
            let sub = stable_state(graph, &[h], scenario.seed)?;
            RoutingOutcome::from_ribs(*scenario, graph, rib, Some(sub))
        }
    }
}

fn enumerate(graph: &AsGraph, ann: &Announcement, out: &mut [Vec<Candidate>]) {
    fn walk(
        graph: &AsGraph,
        ann: &Announcement,
        outward: &mut Vec<usize>,
        exports_to_all: bool,
        out: &mut [Vec<Candidate>],
    ) {
        let u = *outward.last().unwrap();
        for nb in graph.neighbors(u) {
            let v = nb.index;
            if outward.contains(&v) || ann.listed == Some(v) {
                continue;
            }
            // u may hand its route to v only if u learned it from a
            // customer (or originated it), or v is u's customer
            if !exports_to_all && nb.role != Role::Customer {
                continue;
            }
            let class = match nb.role {
                // v is u's customer, so u is v's provider
                Role::Customer => LearnedFrom::Provider,
                Role::Peer => LearnedFrom::Peer,
                Role::Provider => LearnedFrom::Customer,
            };
            outward.push(v);
            let path: Vec<usize> = outward.iter().rev().copied().collect();
            out[v].push(Candidate {
                source: ann.source,
                class,
                length: ann.initial_length + path.len() as u32 - 1,
                path,
            });
            walk(graph, ann, outward, class == LearnedFrom::Customer, out);
            outward.pop();
        }
    }
    let mut outward = vec![ann.origin];
    walk(graph, ann, &mut outward, true, out);
}

fn stable_state(graph: &AsGraph, anns: &[Announcement], seed: u64) -> Result<Vec<Option<Entry>>> {
    let n = graph.len();
    let mut candidates = vec![Vec::new(); n];
    for a in anns {
        enumerate(graph, a, &mut candidates);
    }

    let mut chosen: Vec<Option<Candidate>> = vec![None; n];
    for a in anns {
        chosen[a.origin] = Some(Candidate {
            source: a.source,
            path: vec![a.origin],
            class: LearnedFrom::Origin,
            length: a.initial_length,
        });
    }
    let is_origin = |x: usize| anns.iter().any(|a| a.origin == x);
    let rank = |c: &Candidate| -> (u8, u32, u64, u32) {
        let class = match c.class {
            LearnedFrom::Origin => 0,
            LearnedFrom::Customer => 1,
            LearnedFrom::Peer => 2,
            LearnedFrom::Provider => 3,
        };
        let next = graph.asn(c.path[1]);
        (class, c.length, local_pref(seed, graph.asn(c.path[0]), next), next.get())
    };

    let max_rounds = 4 * n + 16;
    let mut converged = false;
    for _ in 0..max_rounds {
        let next: Vec<Option<Candidate>> = (0..n)
            .map(|x| {
                if is_origin(x) {
                    return chosen[x].clone();
                }
                candidates[x]
                    .iter()
                    .filter(|c| {
                        chosen[c.path[1]]
                            .as_ref()
                            .is_some_and(|held| held.source == c.source && held.path[..] == c.path[1..])
                    })
                    .min_by_key(|c| rank(c))
                    .cloned()
            })
            .collect();
        if next == chosen {
            converged = true;
            break;
        }
        chosen = next;
    }
    if !converged {
        return Err(Error::arg("route selection did not converge"));
    }

    Ok(chosen
        .into_iter()
        .map(|c| {
            c.map(|c| Entry {
                source: c.source,
                learned_from: c.class,
                next_hop: c.path.get(1).map_or(NO_HOP, |&h| h as u32),
                length: c.length,
            })
        })
        .collect())
}
