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

//! Gao-Rexford route propagation for one or two competing origins.
//!
//! Every AS ranks the routes its neighbors export to it by
//!
//! 1. the class of the neighbor (customer, then peer, then provider),
//! 2. the AS-hop length of the route,
//! 3. a seeded pseudorandom local preference over its neighbors,
//!
//! and exports customer-learned or originated routes to everyone, but
//! peer- and provider-learned routes to its customers only. An AS rejects
//! any route whose path already contains its own AS number.
//!
//! The stable state is computed in three stages: customer routes climb the
//! provider hierarchy in waves of increasing length, peers then take one
//! hop across, and finally provider routes descend in waves. Each AS is
//! settled the first time a wave reaches it, which is exactly its best
//! route under the ranking above.

mod batch;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{AsGraph, AsId, Role};

pub use batch::{batch_map, batch_simulate};
pub use oracle::{brute_force_outcome, ORACLE_MAX_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrefixMode {
    #[serde(rename = "exact")]
    ExactPrefix,
    #[serde(rename = "sub")]
    SubPrefix,
}

impl FromStr for PrefixMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-prefix" => Ok(PrefixMode::ExactPrefix),
            "sub" | "sub-prefix" | "subprefix" => Ok(PrefixMode::SubPrefix),
            other => Err(Error::arg(format!("unknown prefix mode {other:?}"))),
        }
    }
}

impl fmt::Display for PrefixMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrefixMode::ExactPrefix => "exact",
            PrefixMode::SubPrefix => "sub",
        })
    }
}

/// One simulated hijack event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HijackScenario {
    pub victim: AsId,
    pub hijacker: AsId,
    /// Position of the hijacker's AS in its announced path, counted from
    /// the claimed origin: 0 for an origin hijack, N for a fake path.
    #[serde(rename = "type")]
    pub hijack_type: u32,
    pub prefix_mode: PrefixMode,
    pub seed: u64,
}

impl HijackScenario {
    pub fn new(victim: AsId, hijacker: AsId, hijack_type: u32, seed: u64) -> Self {
        HijackScenario {
            victim,
            hijacker,
            hijack_type,
            prefix_mode: PrefixMode::ExactPrefix,
            seed,
        }
    }

    pub fn with_prefix_mode(mut self, mode: PrefixMode) -> Self {
        self.prefix_mode = mode;
        self
    }

    /// The same event with victim and hijacker roles exchanged.
    pub fn swapped(&self) -> Self {
        HijackScenario {
            victim: self.hijacker,
            hijacker: self.victim,
            ..*self
        }
    }

    pub fn validate(&self, graph: &AsGraph) -> Result<()> {
        if self.victim == self.hijacker {
            return Err(Error::arg(format!(
                "victim and hijacker are both AS {}",
                self.victim
            )));
        }
        for (role, asn) in [("victim", self.victim), ("hijacker", self.hijacker)] {
            if !graph.contains(asn) {
                return Err(Error::arg(format!("{role} AS {asn} is not in the graph")));
            }
        }
        Ok(())
    }
}

/// Which announcement a route belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteSource {
    Victim,
    Hijacker,
}

/// How the holder of a route learned it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnedFrom {
    /// Originated by the holder itself.
    #[serde(rename = "self")]
    Origin,
    Customer,
    Peer,
    Provider,
}

impl LearnedFrom {
    /// Class of a route received from a neighbor with the given role.
    pub fn from_role(role: Role) -> Self {
        match role {
            Role::Customer => LearnedFrom::Customer,
            Role::Peer => LearnedFrom::Peer,
            Role::Provider => LearnedFrom::Provider,
        }
    }

    /// Whether the route may be exported to peers and providers.
    pub fn exports_to_all(self) -> bool {
        matches!(self, LearnedFrom::Origin | LearnedFrom::Customer)
    }
}

/// A fully materialized route; `path[0]` is the holder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub source: RouteSource,
    pub path: Vec<AsId>,
    pub learned_from: LearnedFrom,
    pub effective_length: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Victim,
    Hijacker,
    Unreachable,
}

const NO_HOP: u32 = u32::MAX;

/// Compact per-AS routing state: the next hop index stands in for the
/// full path, which is rebuilt on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Entry {
    pub(crate) source: RouteSource,
    pub(crate) learned_from: LearnedFrom,
    pub(crate) next_hop: u32,
    pub(crate) length: u32,
}

impl Entry {
    pub(crate) fn next_hop(&self) -> Option<usize> {
        (self.next_hop != NO_HOP).then_some(self.next_hop as usize)
    }
}

/// Per-(seed, holder) pseudorandom rank of a neighbor; lower wins.
///
/// For a fixed seed and holder the ranks induce a uniformly random
/// permutation of the holder's neighbors.
pub fn local_pref(seed: u64, holder: AsId, neighbor: AsId) -> u64 {
    let key = ((holder.get() as u64) << 32) | neighbor.get() as u64;
    splitmix64(seed ^ splitmix64(key))
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// An announcement injected at `origin`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Announcement {
    pub(crate) origin: usize,
    pub(crate) source: RouteSource,
    pub(crate) initial_length: u32,
    /// A real AS listed in the announcement's synthetic path suffix; it
    /// drops the route on loop detection.
    pub(crate) listed: Option<usize>,
}

/// Builds the announcements for `scenario`. For a sub-prefix event the
/// victim never adopts the hijacker's more specific route.
pub(crate) fn announcements(graph: &AsGraph, scenario: &HijackScenario) -> (Announcement, Announcement) {
    let v = graph.index_of(scenario.victim).expect("validated scenario");
    let h = graph.index_of(scenario.hijacker).expect("validated scenario");
    let victim = Announcement {
        origin: v,
        source: RouteSource::Victim,
        initial_length: 1,
        listed: None,
    };
    let listed = (scenario.hijack_type > 0 || scenario.prefix_mode == PrefixMode::SubPrefix).then_some(v);
    let hijacker = Announcement {
        origin: h,
        source: RouteSource::Hijacker,
        initial_length: scenario.hijack_type + 1,
        listed,
    };
    (victim, hijacker)
}

/// Runs the three-stage propagation of the given announcements.
pub(crate) fn propagate(graph: &AsGraph, anns: &[Announcement], seed: u64) -> Vec<Option<Entry>> {
    let n = graph.len();
    let mut rib: Vec<Option<Entry>> = vec![None; n];
    for a in anns {
        rib[a.origin] = Some(Entry {
            source: a.source,
            learned_from: LearnedFrom::Origin,
            next_hop: NO_HOP,
            length: a.initial_length,
        });
    }
    let listed = |source: RouteSource| anns.iter().find(|a| a.source == source).and_then(|a| a.listed);

    // true when `holder` must reject the route currently held by `from`
    let rejects = |rib: &[Option<Entry>], holder: usize, from: usize| -> bool {
        let Some(entry) = rib[from] else { return true };
        if listed(entry.source) == Some(holder) {
            return true;
        }
        let mut hop = Some(from);
        while let Some(h) = hop {
            if h == holder {
                return true;
            }
            hop = rib[h].and_then(|e| e.next_hop());
        }
        false
    };
    let key = |holder: usize, from: usize| -> (u64, u32) {
        let asn = graph.asn(from);
        (local_pref(seed, graph.asn(holder), asn), asn.get())
    };

    // stage 1: customer routes move up towards providers
    let mut buckets: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for a in anns {
        buckets.entry(a.initial_length).or_default().push(a.origin);
    }
    wave(graph, &mut rib, buckets, LearnedFrom::Customer, &rejects, &key);

    // stage 2: a single hop across peer links
    let mut peer_routes = Vec::new();
    for x in 0..n {
        if rib[x].is_some() {
            continue;
        }
        let best = graph
            .peers(x)
            .filter(|&y| rib[y].is_some_and(|e| e.learned_from.exports_to_all()))
            .filter(|&y| !rejects(&rib, x, y))
            .min_by_key(|&y| (rib[y].unwrap().length, key(x, y)));
        if let Some(y) = best {
            let from = rib[y].unwrap();
            peer_routes.push((x, Entry {
                source: from.source,
                learned_from: LearnedFrom::Peer,
                next_hop: y as u32,
                length: from.length + 1,
            }));
        }
    }
    for (x, e) in peer_routes {
        rib[x] = Some(e);
    }

    // stage 3: everything held so far descends to customers
    let mut buckets: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (x, e) in rib.iter().enumerate() {
        if let Some(e) = e {
            buckets.entry(e.length).or_default().push(x);
        }
    }
    wave(graph, &mut rib, buckets, LearnedFrom::Provider, &rejects, &key);

    rib
}

/// Settles ASes in waves of increasing route length. Routes flow from
/// settled ASes to neighbors whose role matches `class` (providers for
/// customer-class routes, customers for provider-class routes).
fn wave(
    graph: &AsGraph,
    rib: &mut [Option<Entry>],
    mut buckets: BTreeMap<u32, Vec<usize>>,
    class: LearnedFrom,
    rejects: &dyn Fn(&[Option<Entry>], usize, usize) -> bool,
    key: &dyn Fn(usize, usize) -> (u64, u32),
) {
    let towards = match class {
        LearnedFrom::Customer => Role::Provider,
        LearnedFrom::Provider => Role::Customer,
        _ => unreachable!("waves carry customer or provider routes"),
    };
    let mut best: Vec<Option<((u64, u32), usize)>> = vec![None; rib.len()];
    let mut touched = Vec::new();
    while let Some((length, nodes)) = buckets.pop_first() {
        for &u in &nodes {
            for target in graph.with_role(u, towards) {
                if rib[target].is_some() || rejects(rib, target, u) {
                    continue;
                }
                let k = key(target, u);
                match best[target] {
                    None => {
                        best[target] = Some((k, u));
                        touched.push(target);
                    }
                    Some((bk, _)) if k < bk => best[target] = Some((k, u)),
                    Some(_) => {}
                }
            }
        }
        if touched.is_empty() {
            continue;
        }
        let next = buckets.entry(length + 1).or_default();
        for target in touched.drain(..) {
            let (_, from) = best[target].take().unwrap();
            rib[target] = Some(Entry {
                source: rib[from].unwrap().source,
                learned_from: class,
                next_hop: from as u32,
                length: length + 1,
            });
            next.push(target);
        }
    }
}

/// Rebuilds the AS path held at `index`, appending `suffix` after the
/// origin of hijacker routes.
fn materialize(graph: &AsGraph, rib: &[Option<Entry>], index: usize, suffix: &[AsId]) -> Option<Route> {
    let entry = rib[index]?;
    let mut path = vec![graph.asn(index)];
    let mut hop = entry.next_hop();
    while let Some(h) = hop {
        path.push(graph.asn(h));
        hop = rib[h].and_then(|e| e.next_hop());
    }
    if entry.source == RouteSource::Hijacker {
        path.extend_from_slice(suffix);
    }
    Some(Route {
        source: entry.source,
        path,
        learned_from: entry.learned_from,
        effective_length: entry.length,
    })
}

/// Best routes of every AS for a prefix announced by a single origin.
#[derive(Debug, Clone)]
pub struct RibSnapshot {
    origin: AsId,
    rib: Vec<Option<Entry>>,
    suffix: Vec<AsId>,
}

impl RibSnapshot {
    pub fn origin(&self) -> AsId {
        self.origin
    }

    pub fn route(&self, graph: &AsGraph, asn: AsId) -> Option<Route> {
        materialize(graph, &self.rib, graph.index_of(asn)?, &self.suffix)
    }

    /// Route class and length at a dense index, without materializing.
    pub fn summary(&self, index: usize) -> Option<(LearnedFrom, u32)> {
        self.rib[index].map(|e| (e.learned_from, e.length))
    }

    pub fn reachable_count(&self) -> usize {
        self.rib.iter().filter(|e| e.is_some()).count()
    }
}

/// Propagates a prefix originated by `origin` alone.
pub fn propagate_single_origin(graph: &AsGraph, origin: AsId, seed: u64) -> Result<RibSnapshot> {
    let index = graph
        .index_of(origin)
        .ok_or_else(|| Error::arg(format!("origin AS {origin} is not in the graph")))?;
    let ann = Announcement {
        origin: index,
        source: RouteSource::Victim,
        initial_length: 1,
        listed: None,
    };
    Ok(RibSnapshot {
        origin,
        rib: propagate(graph, &[ann], seed),
        suffix: Vec::new(),
    })
}

/// Victim-only and hijacker-only snapshots of a scenario, each announced
/// alone with the scenario's path lengths and loop rules.
pub fn single_origin_snapshots(graph: &AsGraph, scenario: &HijackScenario) -> Result<(RibSnapshot, RibSnapshot)> {
    scenario.validate(graph)?;
    let (v, mut h) = announcements(graph, scenario);
    if scenario.prefix_mode == PrefixMode::ExactPrefix && scenario.hijack_type == 0 {
        h.listed = None;
    }
    let suffix = fake_suffix(graph, scenario)?;
    Ok((
        RibSnapshot {
            origin: scenario.victim,
            rib: propagate(graph, &[v], scenario.seed),
            suffix: Vec::new(),
        },
        RibSnapshot {
            origin: scenario.hijacker,
            rib: propagate(graph, &[h], scenario.seed),
            suffix,
        },
    ))
}

/// Placeholder AS numbers plus the victim, appended after the hijacker in
/// its announced path. Placeholders sit above the largest real AS number.
fn fake_suffix(graph: &AsGraph, scenario: &HijackScenario) -> Result<Vec<AsId>> {
    if scenario.hijack_type == 0 {
        return Ok(Vec::new());
    }
    let base = graph.max_asn().map_or(0, |a| a.get());
    let mut suffix = Vec::with_capacity(scenario.hijack_type as usize);
    for k in 1..scenario.hijack_type {
        let value = base
            .checked_add(k)
            .ok_or_else(|| Error::arg("no AS numbers left above the graph for placeholders"))?;
        suffix.push(AsId::new(value)?);
    }
    suffix.push(scenario.victim);
    Ok(suffix)
}

/// Ground-truth result of a hijack scenario.
#[derive(Debug, Clone)]
pub struct RoutingOutcome {
    scenario: HijackScenario,
    decisions: Vec<Decision>,
    rib: Vec<Option<Entry>>,
    // hijacker's more specific prefix, sub-prefix events only
    sub_rib: Option<Vec<Option<Entry>>>,
    suffix: Vec<AsId>,
    infected: usize,
    reachable: usize,
}

impl RoutingOutcome {
    fn from_ribs(
        scenario: HijackScenario,
        graph: &AsGraph,
        rib: Vec<Option<Entry>>,
        sub_rib: Option<Vec<Option<Entry>>>,
    ) -> Result<Self> {
        let victim = graph.index_of(scenario.victim).expect("validated scenario");
        let decisions: Vec<Decision> = (0..graph.len())
            .map(|x| {
                if x == victim {
                    return Decision::Victim;
                }
                if let Some(sub) = &sub_rib {
                    if sub[x].is_some() {
                        return Decision::Hijacker;
                    }
                }
                match rib[x] {
                    Some(e) => match e.source {
                        RouteSource::Victim => Decision::Victim,
                        RouteSource::Hijacker => Decision::Hijacker,
                    },
                    None => Decision::Unreachable,
                }
            })
            .collect();
        let infected = decisions.iter().filter(|d| **d == Decision::Hijacker).count();
        let reachable = decisions.iter().filter(|d| **d != Decision::Unreachable).count();
        Ok(RoutingOutcome {
            suffix: fake_suffix(graph, &scenario)?,
            scenario,
            decisions,
            rib,
            sub_rib,
            infected,
            reachable,
        })
    }

    /// Wraps externally measured decisions (one per graph node, in index
    /// order) as an outcome without routes.
    pub fn from_decisions(graph: &AsGraph, scenario: HijackScenario, decisions: Vec<Decision>) -> Result<Self> {
        scenario.validate(graph)?;
        if decisions.len() != graph.len() {
            return Err(Error::arg(format!(
                "{} decisions for a graph of {} ASes",
                decisions.len(),
                graph.len()
            )));
        }
        let infected = decisions.iter().filter(|d| **d == Decision::Hijacker).count();
        let reachable = decisions.iter().filter(|d| **d != Decision::Unreachable).count();
        Ok(RoutingOutcome {
            scenario,
            rib: Vec::new(),
            decisions,
            sub_rib: None,
            suffix: Vec::new(),
            infected,
            reachable,
        })
    }

    pub fn scenario(&self) -> &HijackScenario {
        &self.scenario
    }

    /// Drops the routing tables and keeps only the decisions; afterwards
    /// [`RoutingOutcome::route`] returns `None`.
    pub fn into_decisions_only(mut self) -> Self {
        self.rib = Vec::new();
        self.sub_rib = None;
        self.suffix = Vec::new();
        self
    }

    /// Fraction of reachable ASes whose route leads to the hijacker.
    pub fn impact(&self) -> f64 {
        if self.reachable == 0 {
            0.0
        } else {
            self.infected as f64 / self.reachable as f64
        }
    }

    pub fn infected_count(&self) -> usize {
        self.infected
    }

    pub fn reachable_count(&self) -> usize {
        self.reachable
    }

    /// Decisions in dense index order.
    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn decision(&self, graph: &AsGraph, asn: AsId) -> Option<Decision> {
        graph.index_of(asn).map(|i| self.decisions[i])
    }

    /// The route behind the AS's decision, with the full AS path.
    pub fn route(&self, graph: &AsGraph, asn: AsId) -> Option<Route> {
        let index = graph.index_of(asn)?;
        if self.rib.is_empty() {
            return None;
        }
        match (&self.sub_rib, self.decisions[index]) {
            (Some(sub), Decision::Hijacker) => materialize(graph, sub, index, &self.suffix),
            _ => materialize(graph, &self.rib, index, &self.suffix),
        }
    }

    /// True when both outcomes hold identical decisions and routes.
    pub fn same_state(&self, other: &RoutingOutcome) -> bool {
        self.decisions == other.decisions && self.rib == other.rib && self.sub_rib == other.sub_rib
    }

    pub fn to_record(&self, graph: &AsGraph, with_decisions: bool) -> OutcomeRecord {
        OutcomeRecord {
            victim: self.scenario.victim,
            hijacker: self.scenario.hijacker,
            hijack_type: self.scenario.hijack_type,
            prefix_mode: self.scenario.prefix_mode,
            seed: self.scenario.seed,
            impact: self.impact(),
            infected_count: self.infected,
            reachable_count: self.reachable,
            decisions: with_decisions.then(|| {
                self.decisions
                    .iter()
                    .enumerate()
                    .map(|(i, d)| (graph.asn(i), *d))
                    .collect()
            }),
        }
    }
}

/// JSON Lines form of a [`RoutingOutcome`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub victim: AsId,
    pub hijacker: AsId,
    #[serde(rename = "type")]
    pub hijack_type: u32,
    pub prefix_mode: PrefixMode,
    pub seed: u64,
    pub impact: f64,
    pub infected_count: usize,
    pub reachable_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisions: Option<BTreeMap<AsId, Decision>>,
}

/// Simulates a hijack and returns the per-AS ground truth.
pub fn simulate_hijack(graph: &AsGraph, scenario: &HijackScenario) -> Result<RoutingOutcome> {
    scenario.validate(graph)?;
    let (v, h) = announcements(graph, scenario);
    match scenario.prefix_mode {
        PrefixMode::ExactPrefix => {
            let rib = propagate(graph, &[v, h], scenario.seed);
            RoutingOutcome::from_ribs(*scenario, graph, rib, None)
        }
        PrefixMode::SubPrefix => {
            let rib = propagate(graph, &[v], scenario.seed);
            let sub = propagate(graph, &[h], scenario.seed);
            RoutingOutcome::from_ribs(*scenario, graph, rib, Some(sub))
        }
    }
}

/// Uniformly random ordered {victim, hijacker} pairs with per-scenario
/// tie-break seeds derived from `seed`.
pub fn random_scenarios(
    graph: &AsGraph,
    count: usize,
    hijack_type: u32,
    prefix_mode: PrefixMode,
    seed: u64,
) -> Result<Vec<HijackScenario>> {
    if graph.len() < 2 {
        return Err(Error::arg("need at least two ASes to draw scenarios"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let pair = sample(&mut rng, graph.len(), 2);
            HijackScenario {
                victim: graph.asn(pair.index(0)),
                hijacker: graph.asn(pair.index(1)),
                hijack_type,
                prefix_mode,
                seed: rng.gen(),
            }
        })
        .collect())
}

/// Scenarios with the victim drawn from `victims` and the hijacker from
/// `hijackers` (either pool may be the whole graph).
pub fn pooled_scenarios(
    victims: &[AsId],
    hijackers: &[AsId],
    count: usize,
    hijack_type: u32,
    prefix_mode: PrefixMode,
    seed: u64,
) -> Result<Vec<HijackScenario>> {
    if victims.is_empty() || hijackers.is_empty() {
        return Err(Error::arg("victim and hijacker pools must be non-empty"));
    }
    let only = |pool: &[AsId]| pool.iter().all(|&a| a == pool[0]).then_some(pool[0]);
    if matches!((only(victims), only(hijackers)), (Some(v), Some(h)) if v == h) {
        return Err(Error::arg("pools leave no distinct victim/hijacker pair"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let victim = victims[rng.gen_range(0..victims.len())];
        let hijacker = hijackers[rng.gen_range(0..hijackers.len())];
        if victim == hijacker {
            continue;
        }
        out.push(HijackScenario {
            victim,
            hijacker,
            hijack_type,
            prefix_mode,
            seed: rng.gen(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::parse_as_rel;

    fn id(v: u32) -> AsId {
        AsId::new(v).unwrap()
    }

    fn graph(text: &str) -> AsGraph {
        parse_as_rel(text.as_bytes()).unwrap()
    }

    #[test]
    fn customer_route_to_provider() {
        // 2 is provider of 1
        let g = graph("2|1|-1");
        let rib = propagate_single_origin(&g, id(1), 0).unwrap();
        let r = rib.route(&g, id(2)).unwrap();
        assert_eq!(r.path, vec![id(2), id(1)]);
        assert_eq!(r.learned_from, LearnedFrom::Customer);
        assert_eq!(r.effective_length, 2);
    }

    #[test]
    fn origin_holds_self_route() {
        let g = graph("1|2|-1\n2|3|0\n3|4|-1");
        for origin in [1, 2, 3, 4] {
            let rib = propagate_single_origin(&g, id(origin), 9).unwrap();
            let r = rib.route(&g, id(origin)).unwrap();
            assert_eq!(r.learned_from, LearnedFrom::Origin);
            assert_eq!(r.path, vec![id(origin)]);
            assert_eq!(r.effective_length, 1);
        }
    }

    #[test]
    fn direct_customer_route_beats_longer_one() {
        // O=1 has providers A=2 and B=3; A is also provider of B
        let g = graph("2|1|-1\n3|1|-1\n2|3|-1");
        for seed in 0..20 {
            let rib = propagate_single_origin(&g, id(1), seed).unwrap();
            let r = rib.route(&g, id(2)).unwrap();
            assert_eq!(r.path, vec![id(2), id(1)]);
            assert_eq!(r.learned_from, LearnedFrom::Customer);
        }
    }

    #[test]
    fn unknown_origin_is_rejected() {
        let g = graph("1|2|0");
        assert!(matches!(propagate_single_origin(&g, id(7), 0), Err(Error::Argument(_))));
    }

    #[test]
    fn peer_routes_are_not_passed_to_peers_or_providers() {
        // 1 -peer- 2 -peer- 3, 4 provider of 2
        let g = graph("1|2|0\n2|3|0\n4|2|-1");
        let rib = propagate_single_origin(&g, id(1), 0).unwrap();
        assert!(rib.route(&g, id(2)).is_some());
        assert!(rib.route(&g, id(3)).is_none());
        assert!(rib.route(&g, id(4)).is_none());
    }

    #[test]
    fn customer_class_beats_shorter_provider_route() {
        // 1 has a peer route of length 2 to 7 and a customer route of length 5
        let g = graph("1|3|-1\n3|5|-1\n5|6|-1\n6|7|-1\n1|7|0");
        let rib = propagate_single_origin(&g, id(7), 0).unwrap();
        let r1 = rib.route(&g, id(1)).unwrap();
        assert_eq!(r1.learned_from, LearnedFrom::Customer);
        assert_eq!(r1.path, vec![id(1), id(3), id(5), id(6), id(7)]);
    }

    #[test]
    fn two_peers_type0_splits_evenly() {
        let g = graph("1|2|0");
        let s = HijackScenario::new(id(1), id(2), 0, 3);
        let out = simulate_hijack(&g, &s).unwrap();
        assert_eq!(out.impact(), 0.5);
        assert_eq!(out.decision(&g, id(1)), Some(Decision::Victim));
        assert_eq!(out.decision(&g, id(2)), Some(Decision::Hijacker));
    }

    #[test]
    fn swapped_roles_complement_impact() {
        let g = crate::topology::gen_synthetic_topology(300, 4).unwrap();
        let scenarios = random_scenarios(&g, 25, 0, PrefixMode::ExactPrefix, 11).unwrap();
        for s in scenarios {
            let a = simulate_hijack(&g, &s).unwrap();
            let b = simulate_hijack(&g, &s.swapped()).unwrap();
            assert_eq!(a.reachable_count(), b.reachable_count());
            assert_eq!(a.infected_count() + b.infected_count(), a.reachable_count());
            assert!((a.impact() + b.impact() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn middle_provider_tie_goes_both_ways() {
        // 2 provides both 1 (victim) and 3 (hijacker)
        let g = graph("2|1|-1\n2|3|-1");
        let mut seen = [false; 2];
        for seed in 0..100 {
            let s = HijackScenario::new(id(1), id(3), 0, seed);
            let out = brute_force_outcome(&g, &s).unwrap();
            assert!(out.same_state(&simulate_hijack(&g, &s).unwrap()));
            match out.decision(&g, id(2)).unwrap() {
                Decision::Victim => seen[0] = true,
                Decision::Hijacker => seen[1] = true,
                Decision::Unreachable => panic!("AS 2 must be reachable"),
            }
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn fake_path_carries_placeholders_and_victim() {
        let g = graph("1|2|0\n2|3|-1");
        let s = HijackScenario::new(id(1), id(2), 3, 0);
        let out = simulate_hijack(&g, &s).unwrap();
        let r = out.route(&g, id(2)).unwrap();
        assert_eq!(r.path, vec![id(2), id(4), id(5), id(1)]);
        assert_eq!(r.effective_length, 4);
        let r3 = out.route(&g, id(3)).unwrap();
        assert_eq!(r3.source, RouteSource::Hijacker);
        assert_eq!(r3.effective_length as usize, r3.path.len());
    }

    #[test]
    fn victim_is_never_infected_by_fake_paths() {
        let g = crate::topology::gen_synthetic_topology(200, 8).unwrap();
        for s in random_scenarios(&g, 30, 1, PrefixMode::ExactPrefix, 5).unwrap() {
            let out = simulate_hijack(&g, &s).unwrap();
            assert_eq!(out.decision(&g, s.victim), Some(Decision::Victim));
            assert_eq!(out.decision(&g, s.hijacker), Some(Decision::Hijacker));
            for &asn in g.asns() {
                if let Some(r) = out.route(&g, asn) {
                    let mut real: Vec<AsId> = r.path.iter().copied().filter(|a| g.contains(*a)).collect();
                    let len = real.len();
                    real.sort();
                    real.dedup();
                    assert_eq!(real.len(), len, "loop in {:?}", r.path);
                }
            }
        }
    }

    #[test]
    fn sub_prefix_infects_everyone_reachable_but_victim() {
        let g = crate::topology::gen_synthetic_topology(120, 2).unwrap();
        let s = HijackScenario::new(id(40), id(90), 0, 1).with_prefix_mode(PrefixMode::SubPrefix);
        let out = simulate_hijack(&g, &s).unwrap();
        assert_eq!(out.infected_count(), g.len() - 1);
        assert_eq!(out.decision(&g, id(40)), Some(Decision::Victim));
        let route = out.route(&g, id(1)).unwrap();
        assert_eq!(*route.path.last().unwrap(), id(90));
    }

    #[test]
    fn sub_prefix_matches_oracle() {
        let g = graph("1|2|-1\n1|3|-1\n2|4|-1\n3|4|0\n3|5|-1");
        for (v, h, n) in [(4, 5, 0), (5, 2, 1), (2, 3, 2)] {
            let s = HijackScenario::new(id(v), id(h), n, 7).with_prefix_mode(PrefixMode::SubPrefix);
            let a = simulate_hijack(&g, &s).unwrap();
            let b = brute_force_outcome(&g, &s).unwrap();
            assert!(a.same_state(&b));
        }
    }

    #[test]
    fn isolated_nodes_are_unreachable() {
        let mut edges = graph("1|2|0").edges().to_vec();
        edges.truncate(1);
        let g = AsGraph::from_edges(edges, &[id(9)]);
        let out = simulate_hijack(&g, &HijackScenario::new(id(1), id(2), 0, 0)).unwrap();
        assert_eq!(out.decision(&g, id(9)), Some(Decision::Unreachable));
        assert_eq!(out.reachable_count(), 2);
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let g = graph("1|2|0");
        assert!(simulate_hijack(&g, &HijackScenario::new(id(1), id(1), 0, 0)).is_err());
        assert!(simulate_hijack(&g, &HijackScenario::new(id(1), id(3), 0, 0)).is_err());
    }

    #[test]
    fn oracle_refuses_large_graphs() {
        let g = crate::topology::gen_synthetic_topology(ORACLE_MAX_NODES + 1, 0).unwrap();
        let s = HijackScenario::new(id(1), id(2), 0, 0);
        assert!(matches!(brute_force_outcome(&g, &s), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn batch_is_ordered_and_schedule_independent() {
        let g = crate::topology::gen_synthetic_topology(400, 3).unwrap();
        assert!(batch_simulate(&g, &[], 4).unwrap().is_empty());
        let scenarios = random_scenarios(&g, 40, 1, PrefixMode::ExactPrefix, 2).unwrap();
        let one = batch_simulate(&g, &scenarios, 1).unwrap();
        let eight = batch_simulate(&g, &scenarios, 8).unwrap();
        for ((a, b), s) in one.iter().zip(&eight).zip(&scenarios) {
            assert_eq!(a.scenario(), s);
            assert!(a.same_state(b));
        }
    }

    #[test]
    fn batch_errors_carry_index() {
        let g = graph("1|2|0");
        let good = HijackScenario::new(id(1), id(2), 0, 0);
        let bad = HijackScenario::new(id(1), id(5), 0, 0);
        match batch_simulate(&g, &[good, good, bad], 2) {
            Err(Error::Batch { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected batch error, got {other:?}"),
        }
    }

    #[test]
    fn outcome_record_json_shape() {
        let g = graph("1|2|0");
        let out = simulate_hijack(&g, &HijackScenario::new(id(1), id(2), 0, 5)).unwrap();
        let line = serde_json::to_string(&out.to_record(&g, false)).unwrap();
        assert_eq!(
            line,
            r#"{"victim":1,"hijacker":2,"type":0,"prefix_mode":"exact","seed":5,"impact":0.5,"infected_count":1,"reachable_count":2}"#
        );
        let full = serde_json::to_string(&out.to_record(&g, true)).unwrap();
        assert!(full.ends_with(r#""decisions":{"1":"victim","2":"hijacker"}}"#), "{full}");
    }

    #[test]
    fn local_pref_is_seed_dependent() {
        let (a, b) = (id(10), id(20));
        let differs = (0..64).any(|s| local_pref(s, a, b) != local_pref(0, a, b));
        assert!(differs);
        assert_eq!(local_pref(3, a, b), local_pref(3, a, b));
    }
}
