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

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{NodeRegistry, RetweetGraph};

/// What was thrown away when keeping only the giant component.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub components: usize,
    pub giant_nodes: usize,
    pub giant_edges: usize,
    pub discarded_components: usize,
    pub discarded_min: Option<usize>,
    pub discarded_median: Option<f64>,
    pub discarded_max: Option<usize>,
    pub discarded_node_fraction: f64,
    pub discarded_edge_fraction: f64,
    /// component size -> number of discarded components of that size
    pub discarded_sizes: BTreeMap<usize, usize>,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Weakly connected component id per node. Ids are numbered by the smallest
/// node index in each component, in ascending order.
pub fn weak_components(g: &RetweetGraph) -> Vec<u32> {
    let n = g.node_count();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for (s, d, _) in g.edges() {
        let a = find(&mut parent, s);
        let b = find(&mut parent, d);
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi as usize] = lo;
        }
    }
    let mut label = vec![u32::MAX; n];
    let mut comp = vec![0u32; n];
    let mut next = 0;
    for v in 0..n as u32 {
        let r = find(&mut parent, v) as usize;
        if label[r] == u32::MAX {
            label[r] = next;
            next += 1;
        }
        comp[v as usize] = label[r];
    }
    comp
}

/// Keep the weakly connected component with the most nodes (ties go to
/// the component holding the smallest node index).
pub fn giant_component(
    registry: &NodeRegistry,
    g: &RetweetGraph,
) -> (NodeRegistry, RetweetGraph, ComponentReport) {
    let n = g.node_count();
    if n == 0 {
        return (NodeRegistry::default(), RetweetGraph::empty(0), ComponentReport::default());
    }
    let comp = weak_components(g);
    let k = comp.iter().max().map_or(0, |&m| m as usize + 1);
    let mut sizes = vec![0usize; k];
    let mut edges = vec![0usize; k];
    for &c in &comp {
        sizes[c as usize] += 1;
    }
    for (s, _, _) in g.edges() {
        edges[comp[s as usize] as usize] += 1;
    }
    let giant = (0..k).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap();

    let mut discarded: Vec<usize> = (0..k).filter(|&c| c != giant).map(|c| sizes[c]).collect();
    discarded.sort_unstable();
    let median = match discarded.len() {
        0 => None,
        m if m % 2 == 1 => Some(discarded[m / 2] as f64),
        m => Some((discarded[m / 2 - 1] + discarded[m / 2]) as f64 / 2.0),
    };
    let mut hist = BTreeMap::new();
    for &s in &discarded {
        *hist.entry(s).or_insert(0) += 1;
    }
    let total_edges = g.edge_count();
    let report = ComponentReport {
        components: k,
        giant_nodes: sizes[giant],
        giant_edges: edges[giant],
        discarded_components: discarded.len(),
        discarded_min: discarded.first().copied(),
        discarded_median: median,
        discarded_max: discarded.last().copied(),
        discarded_node_fraction: (n - sizes[giant]) as f64 / n as f64,
        discarded_edge_fraction: if total_edges == 0 {
            0.0
        } else {
            (total_edges - edges[giant]) as f64 / total_edges as f64
        },
        discarded_sizes: hist,
    };

    let nodes: Vec<u32> = (0..n as u32).filter(|&v| comp[v as usize] as usize == giant).collect();
    (registry.restrict(&nodes), g.induced(&nodes), report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> (NodeRegistry, RetweetGraph) {
        let reg = NodeRegistry::from_ids((0..n).map(|i| format!("n{i:02}")).collect()).unwrap();
        let g = RetweetGraph::from_pairs(n, edges.to_vec()).unwrap();
        (reg, g)
    }

    #[test]
    fn triangle_beats_duplets() {
        // A->B, C->D, triangle E,F,G
        let (reg, g) = graph(7, &[(0, 1), (2, 3), (4, 5), (5, 6), (6, 4)]);
        let (r2, g2, rep) = giant_component(&reg, &g);
        assert_eq!(r2.ids(), ["n04", "n05", "n06"]);
        assert_eq!(g2.edge_count(), 3);
        assert_eq!(rep.components, 3);
        assert_eq!(rep.discarded_components, 2);
        assert_eq!(rep.discarded_median, Some(2.0));
        assert!((rep.discarded_node_fraction - 4.0 / 7.0).abs() < 1e-15);
        assert!((rep.discarded_edge_fraction - 2.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn connected_graph_is_unchanged() {
        let (reg, g) = graph(4, &[(0, 1), (1, 2), (3, 2), (0, 3)]);
        let (r2, g2, rep) = giant_component(&reg, &g);
        assert_eq!(r2, reg);
        assert_eq!(g2, g);
        assert_eq!(rep.discarded_components, 0);
        assert_eq!(rep.discarded_median, None);
        assert_eq!(rep.discarded_node_fraction, 0.0);
    }

    #[test]
    fn idempotent() {
        let (reg, g) = graph(6, &[(0, 1), (1, 2), (3, 4)]);
        let (r1, g1, _) = giant_component(&reg, &g);
        let (r2, g2, rep) = giant_component(&r1, &g1);
        assert_eq!((r1, g1), (r2, g2));
        assert_eq!(rep.discarded_components, 0);
    }

    #[test]
    fn direction_is_ignored() {
        let (_, g) = graph(3, &[(0, 1), (2, 1)]);
        assert_eq!(weak_components(&g), vec![0, 0, 0]);
    }

    #[test]
    fn empty() {
        let (r, g, rep) = giant_component(&NodeRegistry::default(), &RetweetGraph::empty(0));
        assert!(r.is_empty());
        assert_eq!(g.node_count(), 0);
        assert_eq!(rep, ComponentReport::default());
    }
}
