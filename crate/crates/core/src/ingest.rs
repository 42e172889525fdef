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

//! Measurement-side inputs: prefix-to-AS maps, ping target lists and the
//! classification of observed BGP paths and traceroutes for an event.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monitors::{MeasurementVector, MonitorSet};
use crate::topology::AsId;

/// Longest-prefix-match map from IPv4 prefixes to origin AS sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixToAsMap {
    // one table per prefix length, keyed by the masked network address
    by_len: Vec<HashMap<u32, BTreeSet<AsId>>>,
}

impl PrefixToAsMap {
    pub fn new() -> Self {
        PrefixToAsMap {
            by_len: vec![HashMap::new(); 33],
        }
    }

    /// Adds origins to a prefix; host bits are ignored.
    pub fn insert(&mut self, prefix: Ipv4Net, origins: impl IntoIterator<Item = AsId>) {
        let prefix = prefix.trunc();
        self.by_len[prefix.prefix_len() as usize]
            .entry(u32::from(prefix.network()))
            .or_default()
            .extend(origins);
    }

    pub fn len(&self) -> usize {
        self.by_len.iter().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The most specific covering prefix and its origins.
    pub fn lookup(&self, ip: Ipv4Addr) -> Option<(Ipv4Net, &BTreeSet<AsId>)> {
        let bits = u32::from(ip);
        (0..=32u8).rev().find_map(|len| {
            let mask = if len == 0 { 0 } else { u32::MAX << (32 - len) };
            self.by_len[len as usize]
                .get(&(bits & mask))
                .map(|asns| (Ipv4Net::new(Ipv4Addr::from(bits & mask), len).unwrap(), asns))
        })
    }

    /// Origins of the longest match; empty when nothing covers `ip`.
    pub fn origins(&self, ip: Ipv4Addr) -> Vec<AsId> {
        self.lookup(ip).map(|(_, s)| s.iter().copied().collect()).unwrap_or_default()
    }

    /// Every `(prefix, origins)` entry in address then length order.
    pub fn entries(&self) -> Vec<(Ipv4Net, &BTreeSet<AsId>)> {
        let mut out: Vec<_> = self
            .by_len
            .iter()
            .enumerate()
            .flat_map(|(len, table)| {
                table
                    .iter()
                    .map(move |(&net, asns)| (Ipv4Net::new(Ipv4Addr::from(net), len as u8).unwrap(), asns))
            })
            .collect();
        out.sort_by_key(|(net, _)| (net.network(), net.prefix_len()));
        out
    }
}

fn parse_origins(field: &str) -> std::result::Result<Vec<AsId>, String> {
    field
        .split(|c| c == ',' || c == '_')
        .map(|a| a.trim().parse::<AsId>().map_err(|_| format!("bad origin AS {a:?}")))
        .collect()
}

/// Parses a pfx2as file. Accepted line shapes:
///
/// ```text
/// 10.0.0.0/8|65001,65002
/// 10.0.0.0/8 65001
/// 10.0.0.0 8 65001_65002
/// ```
///
/// `#` starts a comment. Multi-origin sets may use `,` or `_`.
pub fn parse_pfx2as<R: BufRead>(reader: R) -> Result<PrefixToAsMap> {
    let mut map = PrefixToAsMap::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = if body.contains('|') {
            body.split('|').map(str::trim).collect()
        } else {
            body.split_whitespace().collect()
        };
        let (prefix, origins) = match fields.as_slice() {
            [p, o] => (p.parse::<Ipv4Net>().map_err(|_| format!("bad prefix {p:?}")), *o),
            [addr, len, o] => (
                format!("{addr}/{len}")
                    .parse::<Ipv4Net>()
                    .map_err(|_| format!("bad prefix {addr:?}/{len:?}")),
                *o,
            ),
            _ => (Err(format!("expected 2 or 3 fields, got {}", fields.len())), ""),
        };
        let prefix = prefix.map_err(|m| Error::parse(k + 1, m))?;
        let origins = parse_origins(origins).map_err(|m| Error::parse(k + 1, m))?;
        map.insert(prefix, origins);
    }
    Ok(map)
}

/// How often a `(prefix, origin)` pair must appear across snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyRule {
    /// In at least this fraction of snapshots.
    AtLeast(f64),
    /// In strictly more than this fraction.
    MoreThan(f64),
}

impl Default for ConsistencyRule {
    fn default() -> Self {
        ConsistencyRule::MoreThan(0.5)
    }
}

impl ConsistencyRule {
    fn admits(self, present: usize, total: usize) -> bool {
        let frac = present as f64 / total as f64;
        match self {
            ConsistencyRule::AtLeast(t) => frac >= t,
            ConsistencyRule::MoreThan(t) => frac > t,
        }
    }

    fn check(self) -> Result<()> {
        let t = match self {
            ConsistencyRule::AtLeast(t) | ConsistencyRule::MoreThan(t) => t,
        };
        match self {
            ConsistencyRule::AtLeast(_) if t > 0.0 && t <= 1.0 => Ok(()),
            ConsistencyRule::MoreThan(_) if (0.0..1.0).contains(&t) => Ok(()),
            _ => Err(Error::arg(format!("consistency threshold {t} out of range"))),
        }
    }
}

/// Keeps the `(prefix, origin)` pairs that are stable across snapshots.
pub fn merge_pfx2as_snapshots(snapshots: &[PrefixToAsMap], rule: ConsistencyRule) -> Result<PrefixToAsMap> {
    if snapshots.is_empty() {
        return Err(Error::arg("no snapshots to merge"));
    }
    rule.check()?;
    let mut counts: BTreeMap<(Ipv4Net, AsId), usize> = BTreeMap::new();
    for snap in snapshots {
        for (net, asns) in snap.entries() {
            for &a in asns {
                *counts.entry((net, a)).or_default() += 1;
            }
        }
    }
    let mut out = PrefixToAsMap::new();
    for ((net, a), c) in counts {
        if rule.admits(c, snapshots.len()) {
            out.insert(net, [a]);
        }
    }
    Ok(out)
}

/// Per-AS ping targets, best score first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PingTargetList {
    pub targets: BTreeMap<AsId, Vec<PingTarget>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PingTarget {
    pub ip: Ipv4Addr,
    pub score: f64,
}

impl PingTargetList {
    pub fn get(&self, asn: AsId) -> &[PingTarget] {
        self.targets.get(&asn).map_or(&[], Vec::as_slice)
    }

    /// Number of ASes with at least `n_ip` targets.
    pub fn covered(&self, n_ip: usize) -> usize {
        self.targets.values().filter(|t| t.len() >= n_ip).count()
    }
}

/// Counters reported by [`build_ping_targets`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TargetStats {
    pub malformed: usize,
    pub below_threshold: usize,
    pub unmapped: usize,
    /// Addresses whose covering prefix has several origins.
    pub multi_origin: usize,
    pub over_cap: usize,
    /// Origin ASes of the map left without any target.
    pub ases_without_targets: usize,
}

/// Selects, per origin AS, the `per_as_cap` best hitlist addresses with
/// score at least `min_score`. Hitlist lines are `<ip> <score>` with the
/// score in `[0, 1]`; malformed lines are skipped and counted.
pub fn build_ping_targets<R: BufRead>(
    hitlist: R,
    pfx2as: &PrefixToAsMap,
    min_score: f64,
    per_as_cap: usize,
) -> Result<(PingTargetList, TargetStats)> {
    if !(0.0..=1.0).contains(&min_score) {
        return Err(Error::arg(format!("min score {min_score} outside [0, 1]")));
    }
    let mut stats = TargetStats::default();
    let mut by_as: BTreeMap<AsId, Vec<PingTarget>> = BTreeMap::new();
    for line in hitlist.lines() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        let parsed = match (it.next(), it.next(), it.next()) {
            (Some(ip), Some(score), None) => ip.parse::<Ipv4Addr>().ok().zip(score.parse::<f64>().ok()),
            _ => None,
        };
        let Some((ip, score)) = parsed.filter(|(_, s)| (0.0..=1.0).contains(s)) else {
            stats.malformed += 1;
            continue;
        };
        if score < min_score {
            stats.below_threshold += 1;
            continue;
        }
        match pfx2as.lookup(ip) {
            None => stats.unmapped += 1,
            Some((_, asns)) if asns.len() > 1 => stats.multi_origin += 1,
            Some((_, asns)) => {
                let a = *asns.iter().next().unwrap();
                by_as.entry(a).or_default().push(PingTarget { ip, score });
            }
        }
    }
    for list in by_as.values_mut() {
        list.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.ip.cmp(&b.ip)));
        list.dedup_by_key(|t| t.ip);
        if list.len() > per_as_cap {
            stats.over_cap += list.len() - per_as_cap;
            list.truncate(per_as_cap);
        }
    }
    by_as.retain(|_, l| !l.is_empty());
    let origins: BTreeSet<AsId> = pfx2as.entries().into_iter().flat_map(|(_, s)| s.iter().copied()).collect();
    stats.ases_without_targets = origins.iter().filter(|a| !by_as.contains_key(a)).count();
    Ok((PingTargetList { targets: by_as }, stats))
}

/// The hijack event being measured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub victim: AsId,
    pub hijacker: AsId,
    pub prefix: Ipv4Net,
    #[serde(default)]
    pub victim_upstreams: BTreeSet<AsId>,
    #[serde(default)]
    pub hijacker_upstreams: BTreeSet<AsId>,
}

/// A BGP path seen at a monitor; `path[0]` is the monitor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    pub monitor: AsId,
    pub path: Vec<AsId>,
}

/// A traceroute from a monitor toward the event prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracerouteRecord {
    pub monitor: AsId,
    /// Hop addresses in order; anything that is not an IPv4 address
    /// (such as `*`) is an unresponsive hop.
    pub hops: Vec<String>,
}

fn read_jsonl<T: serde::de::DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(k + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn read_path_records<R: BufRead>(reader: R) -> Result<Vec<PathRecord>> {
    read_jsonl(reader)
}

pub fn read_traceroute_records<R: BufRead>(reader: R) -> Result<Vec<TracerouteRecord>> {
    read_jsonl(reader)
}

/// Which part of a BGP path decides infection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathMode {
    /// Infected when the hijacker appears anywhere on the path.
    #[default]
    WholePath,
    /// Infected only when the hijacker originates the path.
    OriginOnly,
}

/// Per-record problems of a classification run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// Records that were well formed but allowed no inference.
    pub no_inference: usize,
    /// `(record index, message)` for rejected records.
    pub errors: Vec<(usize, String)>,
}

/// Monitors that allowed an inference, with their bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub monitors: MonitorSet,
    pub measurements: MeasurementVector,
    pub diagnostics: Diagnostics,
}

fn collect(label: &str, votes: Vec<(AsId, u8)>, mut diagnostics: Diagnostics, indices: Vec<usize>) -> Result<Classification> {
    let mut seen = BTreeSet::new();
    let mut members = Vec::new();
    let mut bits = Vec::new();
    for ((monitor, bit), index) in votes.into_iter().zip(indices) {
        if seen.insert(monitor) {
            members.push(monitor);
            bits.push(bit);
        } else {
            diagnostics.errors.push((index, format!("monitor {monitor} seen twice, kept the first record")));
        }
    }
    Ok(Classification {
        monitors: MonitorSet::new(label, members)?,
        measurements: MeasurementVector::new(bits, false)?,
        diagnostics,
    })
}

/// Infers each monitor's state from the AS path it uses toward the event
/// prefix.
pub fn classify_bgp_paths(records: &[PathRecord], event: &EventSpec, mode: PathMode) -> Result<Classification> {
    let mut diagnostics = Diagnostics::default();
    let mut votes = Vec::new();
    let mut indices = Vec::new();
    for (k, r) in records.iter().enumerate() {
        let Some((&first, &origin)) = r.path.first().zip(r.path.last()) else {
            diagnostics.errors.push((k, "empty AS path".into()));
            continue;
        };
        if first != r.monitor {
            diagnostics
                .errors
                .push((k, format!("path starts at {first}, not at monitor {}", r.monitor)));
            continue;
        }
        let infected = match mode {
            PathMode::WholePath => r.path.contains(&event.hijacker),
            PathMode::OriginOnly => origin == event.hijacker,
        };
        let bit = if infected {
            1
        } else if origin == event.victim {
            0
        } else {
            diagnostics.no_inference += 1;
            continue;
        };
        votes.push((r.monitor, bit));
        indices.push(k);
    }
    collect("bgp", votes, diagnostics, indices)
}

/// Infers each monitor's state from the upstream through which its
/// traceroute enters the event prefix. Upstreams shared by victim and
/// hijacker allow no inference.
pub fn classify_traceroutes(
    records: &[TracerouteRecord],
    event: &EventSpec,
    pfx2as: &PrefixToAsMap,
) -> Result<Classification> {
    let shared: BTreeSet<AsId> = event
        .victim_upstreams
        .intersection(&event.hijacker_upstreams)
        .copied()
        .collect();
    let mut diagnostics = Diagnostics::default();
    let mut votes = Vec::new();
    let mut indices = Vec::new();
    for (k, r) in records.iter().enumerate() {
        let hops: Vec<Option<Ipv4Addr>> = r.hops.iter().map(|h| h.parse().ok()).collect();
        let end = hops
            .iter()
            .position(|h| matches!(h, Some(ip) if event.prefix.contains(ip)))
            .unwrap_or(hops.len());
        let upstream = hops[..end].iter().rev().flatten().find_map(|&ip| match pfx2as.origins(ip).as_slice() {
            [one] => Some(*one),
            _ => None,
        });
        let Some(upstream) = upstream else {
            diagnostics.errors.push((k, "no hop before the destination maps to a single AS".into()));
            diagnostics.no_inference += 1;
            continue;
        };
        let bit = if shared.contains(&upstream) {
            None
        } else if event.hijacker_upstreams.contains(&upstream) {
            Some(1)
        } else if event.victim_upstreams.contains(&upstream) {
            Some(0)
        } else {
            None
        };
        match bit {
            Some(b) => {
                votes.push((r.monitor, b));
                indices.push(k);
            }
            None => diagnostics.no_inference += 1,
        }
    }
    collect("traceroute", votes, diagnostics, indices)
}
