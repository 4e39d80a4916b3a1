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

//! Weighted directed retweet graph.
//!
//! An edge `A -> B` with weight `w` means B retweeted A `w` times, so the
//! weighted out-degree of a node is the attention it received. Nodes are
//! re-indexed densely in lexicographic order of their user ids, which makes
//! the index assignment independent of event order.

mod components;
mod degree;
mod snapshot;
mod symmetric;

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::ingest::TweetEvent;

pub use components::{giant_component, weak_components, ComponentReport};
pub use degree::{degree_distribution, DegreeDistribution, ThresholdShare};
pub use snapshot::{read_snapshot, write_snapshot};
pub use symmetric::{symmetrize, SymmetricGraph};

/// Bijection between user ids and `0..n`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeRegistry {
    ids: Vec<String>,
    index: HashMap<String, u32>,
}

impl NodeRegistry {
    /// Ids must be distinct; their order defines the node indices.
    pub fn from_ids(ids: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i as u32).is_some() {
                return Err(Error::Config(format!("duplicate node id {id:?}")));
            }
        }
        Ok(NodeRegistry { ids, index })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, node: u32) -> &str {
        &self.ids[node as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Registry restricted to `nodes` (old indices, ascending).
    pub fn restrict(&self, nodes: &[u32]) -> Self {
        let ids: Vec<String> = nodes.iter().map(|&n| self.ids[n as usize].clone()).collect();
        Self::from_ids(ids).expect("subset of distinct ids")
    }
}

/// Directed graph in compressed sparse row form. Out-neighbors of each
/// node are sorted by index; weights are positive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetweetGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<u32>,
}

impl RetweetGraph {
    pub fn empty(n: usize) -> Self {
        RetweetGraph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Build from `(src, dst)` pairs, one per retweet. Self-loops are dropped.
    pub fn from_pairs(n: usize, mut pairs: Vec<(u32, u32)>) -> Result<Self> {
        pairs.retain(|(s, d)| s != d);
        pairs.sort_unstable();
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::new();
        let mut weights: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (s, d) = pairs[i];
            if s as usize >= n || d as usize >= n {
                return Err(Error::Config(format!("edge ({s}, {d}) out of range for n = {n}")));
            }
            let mut j = i;
            while j < pairs.len() && pairs[j] == (s, d) {
                j += 1;
            }
            let w = u32::try_from(j - i).map_err(|_| Error::WeightOverflow { src: s, dst: d })?;
            targets.push(d);
            weights.push(w);
            offsets[s as usize + 1] += 1;
            i = j;
        }
        for k in 0..n {
            offsets[k + 1] += offsets[k];
        }
        Ok(RetweetGraph {
            offsets,
            targets,
            weights,
        })
    }

    /// Build from weighted edges; parallel edges are summed.
    pub fn from_weighted_edges(n: usize, mut edges: Vec<(u32, u32, u32)>) -> Result<Self> {
        edges.sort_unstable();
        let mut merged: Vec<(u32, u32, u32)> = Vec::with_capacity(edges.len());
        for (s, d, w) in edges {
            if s == d {
                return Err(Error::Config(format!("self-loop on node {s}")));
            }
            if s as usize >= n || d as usize >= n {
                return Err(Error::Config(format!("edge ({s}, {d}) out of range for n = {n}")));
            }
            if w == 0 {
                return Err(Error::Config(format!("zero weight on edge ({s}, {d})")));
            }
            match merged.last_mut() {
                Some(last) if last.0 == s && last.1 == d => {
                    last.2 = last.2.checked_add(w).ok_or(Error::WeightOverflow { src: s, dst: d })?;
                }
                _ => merged.push((s, d, w)),
            }
        }
        Ok(Self::from_sorted_unique(n, merged))
    }

    fn from_sorted_unique(n: usize, edges: Vec<(u32, u32, u32)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(s, _, _) in &edges {
            offsets[s as usize + 1] += 1;
        }
        for k in 0..n {
            offsets[k + 1] += offsets[k];
        }
        RetweetGraph {
            offsets,
            targets: edges.iter().map(|e| e.1).collect(),
            weights: edges.iter().map(|e| e.2).collect(),
        }
    }

    pub(crate) fn from_raw_parts(offsets: Vec<usize>, targets: Vec<u32>, weights: Vec<u32>) -> Self {
        RetweetGraph {
            offsets,
            targets,
            weights,
        }
    }

    pub(crate) fn raw_parts(&self) -> (&[usize], &[u32], &[u32]) {
        (&self.offsets, &self.targets, &self.weights)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Number of distinct directed edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().map(|&w| w as u64).sum()
    }

    pub fn out_edges(&self, node: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        let r = self.offsets[node as usize]..self.offsets[node as usize + 1];
        self.targets[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.node_count() as u32).flat_map(move |s| self.out_edges(s).map(move |(d, w)| (s, d, w)))
    }

    /// Weight of `src -> dst`, zero when absent.
    pub fn weight(&self, src: u32, dst: u32) -> u32 {
        let r = self.offsets[src as usize]..self.offsets[src as usize + 1];
        match self.targets[r.clone()].binary_search(&dst) {
            Ok(i) => self.weights[r.start + i],
            Err(_) => 0,
        }
    }

    /// Retweets received by `node`.
    pub fn weighted_out_degree(&self, node: u32) -> u64 {
        let r = self.offsets[node as usize]..self.offsets[node as usize + 1];
        self.weights[r].iter().map(|&w| w as u64).sum()
    }

    pub fn weighted_out_degrees(&self) -> Vec<u64> {
        (0..self.node_count() as u32).map(|n| self.weighted_out_degree(n)).collect()
    }

    /// Subgraph induced by `nodes` (ascending old indices), reindexed to `0..nodes.len()`.
    pub fn induced(&self, nodes: &[u32]) -> RetweetGraph {
        let mut new_index = vec![u32::MAX; self.node_count()];
        for (i, &n) in nodes.iter().enumerate() {
            new_index[n as usize] = i as u32;
        }
        let mut edges = Vec::new();
        for (i, &n) in nodes.iter().enumerate() {
            for (d, w) in self.out_edges(n) {
                let nd = new_index[d as usize];
                if nd != u32::MAX {
                    edges.push((i as u32, nd, w));
                }
            }
        }
        // Monotone reindexing keeps rows and neighbor lists sorted.
        Self::from_sorted_unique(nodes.len(), edges)
    }
}

/// Build the retweet graph from parsed events.
///
/// Every user appearing on either side of a retweet event becomes a node,
/// including users whose only retweets are self-retweets; those end up
/// isolated since self-retweets add no edge.
pub fn build_graph(events: &[TweetEvent]) -> Result<(NodeRegistry, RetweetGraph)> {
    let mut ids: Vec<&str> = Vec::new();
    for ev in events.iter().filter(|e| e.is_retweet()) {
        ids.push(&ev.author_id);
        if let Some(a) = ev.retweeted_author_id.as_deref() {
            ids.push(a);
        }
    }
    ids.sort_unstable();
    ids.dedup();
    let registry = NodeRegistry::from_ids(ids.into_iter().map(str::to_string).collect())?;

    let mut pairs = Vec::new();
    for ev in events.iter().filter(|e| e.is_retweet() && !e.is_self_retweet()) {
        let Some(src) = ev.retweeted_author_id.as_deref() else {
            continue;
        };
        let s = registry.index_of(src).expect("registered");
        let d = registry.index_of(&ev.author_id).expect("registered");
        pairs.push((s, d));
    }
    let graph = RetweetGraph::from_pairs(registry.len(), pairs)?;
    Ok((registry, graph))
}

/// `src<TAB>dst<TAB>weight`, one line per directed edge.
pub fn write_edge_list<W: Write>(registry: &NodeRegistry, g: &RetweetGraph, mut w: W) -> Result<()> {
    for (s, d, weight) in g.edges() {
        writeln!(w, "{}\t{}\t{}", registry.id(s), registry.id(d), weight)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(id: &str, retweeter: &str, author: &str) -> TweetEvent {
        TweetEvent::retweet(id, retweeter, 0, author, None)
    }

    #[test]
    fn repeated_retweets_accumulate() {
        let events = vec![rt("1", "B", "A"), rt("2", "B", "A"), rt("3", "B", "A")];
        let (reg, g) = build_graph(&events).unwrap();
        assert_eq!(reg.len(), 2);
        let a = reg.index_of("A").unwrap();
        let b = reg.index_of("B").unwrap();
        assert_eq!(g.weight(a, b), 3);
        assert_eq!(g.weight(b, a), 0);
        assert_eq!(g.weighted_out_degree(a), 3);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn empty_events() {
        let (reg, g) = build_graph(&[]).unwrap();
        assert!(reg.is_empty());
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.total_weight(), 0);
    }

    #[test]
    fn originals_and_self_retweets_add_no_edges() {
        let events = vec![
            TweetEvent::original("0", "Z", 0),
            rt("1", "A", "A"),
            rt("2", "B", "A"),
        ];
        let (reg, g) = build_graph(&events).unwrap();
        assert_eq!(reg.len(), 2);
        assert!(reg.index_of("Z").is_none());
        assert_eq!(g.total_weight(), 1);
    }

    #[test]
    fn index_assignment_ignores_event_order() {
        let mut events = vec![rt("1", "c", "a"), rt("2", "b", "c"), rt("3", "a", "b")];
        let first = build_graph(&events).unwrap();
        events.reverse();
        assert_eq!(build_graph(&events).unwrap(), first);
        assert_eq!(first.0.ids(), ["a", "b", "c"]);
    }

    #[test]
    fn weighted_edges_merge_and_validate() {
        let g = RetweetGraph::from_weighted_edges(3, vec![(0, 1, 2), (0, 1, 3), (2, 0, 1)]).unwrap();
        assert_eq!(g.weight(0, 1), 5);
        assert_eq!(g.edge_count(), 2);
        assert!(RetweetGraph::from_weighted_edges(2, vec![(1, 1, 1)]).is_err());
        assert!(RetweetGraph::from_weighted_edges(2, vec![(0, 1, u32::MAX), (0, 1, 1)]).is_err());
    }

    #[test]
    fn edge_list_export() {
        let (reg, g) = build_graph(&[rt("1", "B", "A"), rt("2", "B", "A")]).unwrap();
        let mut out = Vec::new();
        write_edge_list(&reg, &g, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "A\tB\t2\n");
    }
}
