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

//! Helpers shared by the integration tests.

#![allow(dead_code)]

use hijack_impact::topology::{AsGraph, AsId, Edge, Relationship};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random graph on `2..=max_nodes` nodes. Provider links always point
/// from a lower to a higher AS number, so the hierarchy is acyclic; every
/// node after the first is attached to some earlier node, so the graph is
/// connected.
pub fn random_small_graph(max_nodes: usize, seed: u64) -> AsGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_nodes);
    let id = |i: usize| AsId::new(i as u32 + 1).unwrap();
    let mut edges = Vec::new();
    let mut linked = std::collections::HashSet::new();
    for j in 1..n {
        let i = rng.gen_range(0..j);
        let rel = if rng.gen_bool(0.7) {
            Relationship::ProviderToCustomer
        } else {
            Relationship::PeerToPeer
        };
        linked.insert((i, j));
        edges.push(Edge { a: id(i), b: id(j), rel });
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let (i, j) = (i.min(j), i.max(j));
        if !linked.insert((i, j)) {
            continue;
        }
        let rel = if rng.gen_bool(0.6) {
            Relationship::ProviderToCustomer
        } else {
            Relationship::PeerToPeer
        };
        edges.push(Edge { a: id(i), b: id(j), rel });
    }
    AsGraph::from_edges(edges, &[])
}
