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

//! AS-level topology: the CAIDA serial-1 relationship format, a seeded
//! synthetic generator for test-scale graphs, and invariant validation.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use flate2::read::GzDecoder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An autonomous system number. Always non-zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct AsId(u32);

impl AsId {
    pub fn new(value: u32) -> Result<Self> {
        if value == 0 {
            return Err(Error::arg("AS number must be positive"));
        }
        Ok(AsId(value))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for AsId {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        AsId::new(value)
    }
}

impl From<AsId> for u32 {
    fn from(asn: AsId) -> u32 {
        asn.0
    }
}

impl fmt::Display for AsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for AsId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("AS").unwrap_or(s);
        let value: u32 = s
            .parse()
            .map_err(|_| Error::arg(format!("not an AS number: {s:?}")))?;
        AsId::new(value)
    }
}

/// Business relationship carried by an edge `(a, b, rel)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relationship {
    /// `a` is a provider of `b`.
    ProviderToCustomer,
    PeerToPeer,
}

impl Relationship {
    /// The serial-1 code: `-1` for provider-to-customer, `0` for peers.
    pub fn code(self) -> i8 {
        match self {
            Relationship::ProviderToCustomer => -1,
            Relationship::PeerToPeer => 0,
        }
    }
}

/// Role of a neighbor relative to the AS that holds the adjacency entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Customer,
    Peer,
    Provider,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: AsId,
    pub b: AsId,
    pub rel: Relationship,
}

/// Adjacency entry: dense node index plus the neighbor's role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub index: usize,
    pub role: Role,
}

/// Immutable AS-relationship graph.
///
/// Nodes are addressed either by [`AsId`] or by a dense index in
/// `0..len()`; indices follow ascending AS number.
#[derive(Debug, Clone)]
pub struct AsGraph {
    asns: Vec<AsId>,
    index: HashMap<AsId, usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl AsGraph {
    /// Builds a graph from raw edges plus optional isolated nodes.
    ///
    /// No invariant is enforced here so that [`validate`] can report on
    /// hand-built graphs; use [`parse_as_rel`] for checked input.
    pub fn from_edges(edges: Vec<Edge>, isolated: &[AsId]) -> Self {
        let mut asns: Vec<AsId> = edges
            .iter()
            .flat_map(|e| [e.a, e.b])
            .chain(isolated.iter().copied())
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        asns.sort_unstable();
        let index: HashMap<AsId, usize> = asns.iter().enumerate().map(|(i, &a)| (a, i)).collect();

        let mut adjacency = vec![Vec::new(); asns.len()];
        for e in &edges {
            let (ia, ib) = (index[&e.a], index[&e.b]);
            let (role_of_b, role_of_a) = match e.rel {
                Relationship::ProviderToCustomer => (Role::Customer, Role::Provider),
                Relationship::PeerToPeer => (Role::Peer, Role::Peer),
            };
            adjacency[ia].push(Neighbor {
                index: ib,
                role: role_of_b,
            });
            adjacency[ib].push(Neighbor {
                index: ia,
                role: role_of_a,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|n| (n.index, n.role));
        }

        AsGraph {
            asns,
            index,
            edges,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.asns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.asns.is_empty()
    }

    pub fn asns(&self) -> &[AsId] {
        &self.asns
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, asn: AsId) -> bool {
        self.index.contains_key(&asn)
    }

    pub fn index_of(&self, asn: AsId) -> Option<usize> {
        self.index.get(&asn).copied()
    }

    pub fn asn(&self, index: usize) -> AsId {
        self.asns[index]
    }

    pub fn neighbors(&self, index: usize) -> &[Neighbor] {
        &self.adjacency[index]
    }

    pub fn with_role(&self, index: usize, role: Role) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[index]
            .iter()
            .filter(move |n| n.role == role)
            .map(|n| n.index)
    }

    pub fn customers(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.with_role(index, Role::Customer)
    }

    pub fn peers(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.with_role(index, Role::Peer)
    }

    pub fn providers(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.with_role(index, Role::Provider)
    }

    /// Role of `neighbor` as seen from `holder`, if they are adjacent.
    pub fn role(&self, holder: usize, neighbor: usize) -> Option<Role> {
        self.adjacency[holder]
            .iter()
            .find(|n| n.index == neighbor)
            .map(|n| n.role)
    }

    pub fn max_asn(&self) -> Option<AsId> {
        self.asns.last().copied()
    }

    /// Indices of the customer cone of `index`, the AS itself included.
    pub fn customer_cone(&self, index: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([index]);
        seen[index] = true;
        let mut cone = Vec::new();
        while let Some(u) = queue.pop_front() {
            cone.push(u);
            for c in self.customers(u) {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        cone
    }

    /// Serializes to the serial-1 text format, one record per edge.
    pub fn to_as_rel(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&format!("{}|{}|{}\n", e.a, e.b, e.rel.code()));
        }
        out
    }
}

/// Parses CAIDA serial-1 relationship records (`<a>|<b>|<code>`).
///
/// Identical duplicate records are kept once; a pair listed with two
/// different relationships is a [`Error::Conflict`].
pub fn parse_as_rel<R: BufRead>(reader: R) -> Result<AsGraph> {
    let mut edges = Vec::new();
    let mut seen: HashMap<(AsId, AsId), PairRel> = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('|').collect();
        // serial-1 carries only three fields; serial-2 appends a source column
        if fields.len() != 3 && fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!("expected <a>|<b>|<code>, got {} fields", fields.len()),
            ));
        }
        let a = parse_asn(fields[0], lineno)?;
        let b = parse_asn(fields[1], lineno)?;
        let rel = match fields[2].trim() {
            "-1" => Relationship::ProviderToCustomer,
            "0" => Relationship::PeerToPeer,
            other => {
                return Err(Error::parse(
                    lineno,
                    format!("unknown relationship code {other:?}"),
                ))
            }
        };
        if a == b {
            return Err(Error::parse(lineno, format!("self-loop at {a}")));
        }
        let (key, oriented) = normalise(a, b, rel);
        match seen.get(&key) {
            Some(&prev) if prev == oriented => continue,
            Some(_) => return Err(Error::Conflict(a, b)),
            None => {
                seen.insert(key, oriented);
                edges.push(Edge { a, b, rel });
            }
        }
    }
    Ok(AsGraph::from_edges(edges, &[]))
}

/// Opens `path` and parses it, gunzipping when the name ends in `.gz`.
pub fn load_as_rel(path: impl AsRef<Path>) -> Result<AsGraph> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_as_rel(BufReader::new(reader))
}

fn parse_asn(field: &str, line: usize) -> Result<AsId> {
    let value: u32 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid AS number {field:?}")))?;
    AsId::new(value).map_err(|_| Error::parse(line, "AS number 0 is reserved"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairRel {
    LowProvidesHigh,
    HighProvidesLow,
    Peers,
}

/// Orientation-independent key for an AS pair.
fn normalise(a: AsId, b: AsId, rel: Relationship) -> ((AsId, AsId), PairRel) {
    let key = (a.min(b), a.max(b));
    let pair = match rel {
        Relationship::PeerToPeer => PairRel::Peers,
        Relationship::ProviderToCustomer if a < b => PairRel::LowProvidesHigh,
        Relationship::ProviderToCustomer => PairRel::HighProvidesLow,
    };
    (key, pair)
}

/// Seeded synthetic topology with a loose provider hierarchy.
///
/// A small clique of peered tier-1 nodes comes first. Every later node
/// buys transit from one to three earlier nodes, picked with probability
/// proportional to their current customer count plus one, which yields a
/// heavy-tailed customer-cone distribution. Random peer links between
/// non-tier-1 nodes are added on top. AS numbers are `1..=n_ases` in
/// creation order, so provider-customer edges never form a cycle.
pub fn gen_synthetic_topology(n_ases: usize, seed: u64) -> Result<AsGraph> {
    if n_ases < 2 {
        return Err(Error::arg("a synthetic topology needs at least 2 ASes"));
    }
    if n_ases > u32::MAX as usize {
        return Err(Error::arg("too many ASes for 32-bit AS numbers"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tier1 = tier1_count(n_ases);
    let asn = |i: usize| AsId(i as u32 + 1);

    let mut edges = Vec::new();
    let mut linked: HashSet<(usize, usize)> = HashSet::new();
    let mut link = |edges: &mut Vec<Edge>, a: usize, b: usize, rel: Relationship| -> bool {
        if a == b || !linked.insert((a.min(b), a.max(b))) {
            return false;
        }
        edges.push(Edge {
            a: asn(a),
            b: asn(b),
            rel,
        });
        true
    };

    for i in 0..tier1 {
        for j in i + 1..tier1 {
            link(&mut edges, i, j, Relationship::PeerToPeer);
        }
    }

    // one ticket per node plus one per customer it has acquired
    let mut tickets: Vec<usize> = (0..tier1).collect();
    for i in tier1..n_ases {
        let wanted = match rng.gen_range(0..100) {
            0..=49 => 1,
            50..=84 => 2,
            _ => 3,
        }
        .min(i);
        let mut chosen = Vec::with_capacity(wanted);
        let mut attempts = 0;
        while chosen.len() < wanted && attempts < 32 {
            attempts += 1;
            let p = tickets[rng.gen_range(0..tickets.len())];
            if !chosen.contains(&p) {
                chosen.push(p);
            }
        }
        for &p in &chosen {
            link(&mut edges, p, i, Relationship::ProviderToCustomer);
            tickets.push(p);
        }
        tickets.push(i);
    }

    if n_ases > tier1 + 1 {
        let peerings = n_ases / 4;
        let mut attempts = 0;
        let mut added = 0;
        while added < peerings && attempts < peerings * 20 {
            attempts += 1;
            let a = tickets[rng.gen_range(0..tickets.len())];
            let b = tickets[rng.gen_range(0..tickets.len())];
            if a < tier1 || b < tier1 {
                continue;
            }
            if link(&mut edges, a, b, Relationship::PeerToPeer) {
                added += 1;
            }
        }
    }

    Ok(AsGraph::from_edges(edges, &[]))
}

/// Size of the tier-1 clique for a synthetic graph of `n` nodes.
pub fn tier1_count(n: usize) -> usize {
    if n < 4 {
        1
    } else {
        ((n as f64).cbrt().round() as usize).clamp(2, 12)
    }
}

/// Findings of [`validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
    pub isolated_nodes: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the graph invariants and reports connectivity statistics.
pub fn validate(graph: &AsGraph) -> ValidationReport {
    let mut violations = Vec::new();

    let mut pairs: BTreeMap<(AsId, AsId), usize> = BTreeMap::new();
    for e in &graph.edges {
        if e.a == e.b {
            violations.push(format!("self-loop at {}", e.a));
            continue;
        }
        *pairs.entry((e.a.min(e.b), e.a.max(e.b))).or_default() += 1;
    }
    for ((a, b), count) in pairs {
        if count > 1 {
            violations.push(format!("duplicate edge ({a}, {b}) listed {count} times"));
        }
    }

    for e in &graph.edges {
        if e.a == e.b {
            continue;
        }
        let (Some(ia), Some(ib)) = (graph.index_of(e.a), graph.index_of(e.b)) else {
            violations.push(format!("edge ({}, {}) references an unknown AS", e.a, e.b));
            continue;
        };
        let (want_b, want_a) = match e.rel {
            Relationship::ProviderToCustomer => (Role::Customer, Role::Provider),
            Relationship::PeerToPeer => (Role::Peer, Role::Peer),
        };
        let fwd = graph.adjacency[ia].iter().any(|n| n.index == ib && n.role == want_b);
        let back = graph.adjacency[ib].iter().any(|n| n.index == ia && n.role == want_a);
        if !fwd || !back {
            violations.push(format!("inconsistent adjacency for ({}, {})", e.a, e.b));
        }
    }

    let n = graph.len();
    let mut component = vec![usize::MAX; n];
    let mut components = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        component[start] = components;
        while let Some(u) = queue.pop_front() {
            for nb in &graph.adjacency[u] {
                if component[nb.index] == usize::MAX {
                    component[nb.index] = components;
                    queue.push_back(nb.index);
                }
            }
        }
        components += 1;
    }

    ValidationReport {
        violations,
        nodes: n,
        edges: graph.edges.len(),
        components,
        isolated_nodes: graph.adjacency.iter().filter(|a| a.is_empty()).count(),
    }
}
