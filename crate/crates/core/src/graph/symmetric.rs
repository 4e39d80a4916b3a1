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

use crate::error::{Error, Result};

use super::RetweetGraph;

/// Undirected weighted graph without self-loops. Each edge is stored in
/// both endpoint rows; neighbor lists are sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymmetricGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<u64>,
    total_weight: u64,
}

impl SymmetricGraph {
    /// Parallel edges (in either orientation) are summed.
    pub fn from_edges(n: usize, edges: &[(u32, u32, u64)]) -> Result<Self> {
        let mut canon = Vec::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u == v {
                return Err(Error::Config(format!("self-loop on node {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::Config(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if w > 0 {
                canon.push((u.min(v), u.max(v), w));
            }
        }
        Ok(Self::from_canonical(n, canon))
    }

    fn from_canonical(n: usize, mut canon: Vec<(u32, u32, u64)>) -> Self {
        canon.sort_unstable_by_key(|&(u, v, _)| (u, v));
        let mut merged: Vec<(u32, u32, u64)> = Vec::with_capacity(canon.len());
        for (u, v, w) in canon {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += w,
                _ => merged.push((u, v, w)),
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for &(u, v, _) in &merged {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for k in 0..n {
            offsets[k + 1] += offsets[k];
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; merged.len() * 2];
        let mut weights = vec![0u64; merged.len() * 2];
        let mut total_weight = 0;
        // Rows fill in ascending neighbor order: for row u, lower neighbors
        // arrive from (v, u) pairs before the (u, v) pairs, both sorted.
        let mut place = |row: u32, nb: u32, w: u64| {
            let c = &mut cursor[row as usize];
            neighbors[*c] = nb;
            weights[*c] = w;
            *c += 1;
        };
        let mut by_hi = merged.clone();
        by_hi.sort_unstable_by_key(|&(u, v, _)| (v, u));
        for &(u, v, w) in &by_hi {
            place(v, u, w);
        }
        for &(u, v, w) in &merged {
            place(u, v, w);
            total_weight += w;
        }
        SymmetricGraph {
            offsets,
            neighbors,
            weights,
            total_weight,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Sum of undirected edge weights (`m`).
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn neighbors(&self, node: u32) -> impl Iterator<Item = (u32, u64)> + '_ {
        let r = self.offsets[node as usize]..self.offsets[node as usize + 1];
        self.neighbors[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn weight(&self, u: u32, v: u32) -> u64 {
        let r = self.offsets[u as usize]..self.offsets[u as usize + 1];
        match self.neighbors[r.clone()].binary_search(&v) {
            Ok(i) => self.weights[r.start + i],
            Err(_) => 0,
        }
    }

    pub fn degree(&self, node: u32) -> u64 {
        self.neighbors(node).map(|(_, w)| w).sum()
    }

    pub fn degrees(&self) -> Vec<u64> {
        (0..self.node_count() as u32).map(|v| self.degree(v)).collect()
    }

    /// Undirected edges with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        (0..self.node_count() as u32)
            .flat_map(move |u| self.neighbors(u).filter(move |&(v, _)| u < v).map(move |(v, w)| (u, v, w)))
    }

    pub(crate) fn csr(&self) -> (&[usize], &[u32], &[u64]) {
        (&self.offsets, &self.neighbors, &self.weights)
    }
}

/// `weight(u, v) = w(u -> v) + w(v -> u)`.
pub fn symmetrize(g: &RetweetGraph) -> SymmetricGraph {
    let canon = g
        .edges()
        .map(|(s, d, w)| (s.min(d), s.max(d), w as u64))
        .collect();
    SymmetricGraph::from_canonical(g.node_count(), canon)
}
