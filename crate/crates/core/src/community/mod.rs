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

//! Modularity-based community detection on the symmetrized retweet graph.

mod consensus;
mod louvain;
mod nmi;
mod rank;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SymmetricGraph;

pub use consensus::{align_labels, consensus, ConsensusPartition, RunSummary};
pub use louvain::{louvain, louvain_with_trace, LevelTrace, LouvainConfig};
pub use nmi::nmi;
pub use rank::{community_name, rank_communities, RankedCommunities, RankedCommunity};

/// Node -> community assignment with contiguous community ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<u32>,
    pub sizes: Vec<usize>,
    pub modularity: f64,
}

impl Partition {
    /// Renumber arbitrary labels to `0..k` in order of first appearance.
    pub fn relabel(labels: &[u32]) -> (Vec<u32>, Vec<usize>) {
        let mut map = std::collections::HashMap::new();
        let mut sizes = Vec::new();
        let assignment = labels
            .iter()
            .map(|&l| {
                let next = map.len() as u32;
                let c = *map.entry(l).or_insert(next);
                if c as usize == sizes.len() {
                    sizes.push(0);
                }
                sizes[c as usize] += 1;
                c
            })
            .collect();
        (assignment, sizes)
    }

    pub fn from_labels(g: &SymmetricGraph, labels: &[u32], resolution: f64) -> Result<Self> {
        let (assignment, sizes) = Self::relabel(labels);
        let q = modularity(g, &assignment, resolution)?;
        Ok(Partition {
            assignment,
            sizes,
            modularity: q,
        })
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }
}

/// `Q = (1/2m) sum_ij [A_ij - resolution * k_i k_j / 2m] delta(c_i, c_j)`.
pub fn modularity(g: &SymmetricGraph, assignment: &[u32], resolution: f64) -> Result<f64> {
    let n = g.node_count();
    if assignment.len() != n {
        return Err(Error::PartitionSize {
            expected: n,
            got: assignment.len(),
        });
    }
    let m = g.total_weight() as f64;
    if m == 0.0 {
        return Err(Error::UndefinedModularity);
    }
    let k = assignment.iter().max().map_or(0, |&c| c as usize + 1);
    let mut internal = vec![0.0f64; k];
    let mut total = vec![0.0f64; k];
    for v in 0..n as u32 {
        let cv = assignment[v as usize];
        for (u, w) in g.neighbors(v) {
            total[cv as usize] += w as f64;
            if assignment[u as usize] == cv {
                internal[cv as usize] += w as f64;
            }
        }
    }
    let two_m = 2.0 * m;
    Ok(internal
        .iter()
        .zip(&total)
        .map(|(&i, &t)| i / two_m - resolution * (t / two_m) * (t / two_m))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> SymmetricGraph {
        SymmetricGraph::from_edges(6, &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 4, 1), (4, 5, 1), (5, 3, 1)])
            .unwrap()
    }

    /// Direct double sum over all ordered node pairs.
    fn brute_q(g: &SymmetricGraph, c: &[u32], gamma: f64) -> f64 {
        let n = g.node_count() as u32;
        let two_m = 2.0 * g.total_weight() as f64;
        let k = g.degrees();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                if c[i as usize] == c[j as usize] {
                    q += g.weight(i, j) as f64 - gamma * (k[i as usize] * k[j as usize]) as f64 / two_m;
                }
            }
        }
        q / two_m
    }

    #[test]
    fn two_triangles_half() {
        let g = two_triangles();
        let c = [0, 0, 0, 1, 1, 1];
        assert!((brute_q(&g, &c, 1.0) - 0.5).abs() < 1e-12);
        assert!((modularity(&g, &c, 1.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_community_is_zero() {
        let g = two_triangles();
        assert!(modularity(&g, &[0; 6], 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn singletons_negative() {
        let g = SymmetricGraph::from_edges(4, &[(0, 1, 2), (1, 2, 1), (2, 3, 5), (0, 3, 1)]).unwrap();
        let c = [0, 1, 2, 3];
        let two_m = 2.0 * g.total_weight() as f64;
        let expected: f64 = -g.degrees().iter().map(|&k| (k as f64 / two_m).powi(2)).sum::<f64>();
        let q = modularity(&g, &c, 1.0).unwrap();
        assert!((q - expected).abs() < 1e-12);
        assert!((q - brute_q(&g, &c, 1.0)).abs() < 1e-12);
        assert!(q < 0.0);
    }

    #[test]
    fn resolution_scales_null_term() {
        let g = two_triangles();
        let c = [0, 0, 1, 1, 1, 0];
        for gamma in [0.5, 1.0, 2.0] {
            assert!((modularity(&g, &c, gamma).unwrap() - brute_q(&g, &c, gamma)).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let empty = SymmetricGraph::from_edges(3, &[]).unwrap();
        assert!(matches!(modularity(&empty, &[0, 0, 0], 1.0), Err(Error::UndefinedModularity)));
        assert!(matches!(
            modularity(&two_triangles(), &[0, 0], 1.0),
            Err(Error::PartitionSize { .. })
        ));
    }

    #[test]
    fn relabel_first_appearance() {
        let (a, s) = Partition::relabel(&[7, 7, 3, 9, 3]);
        assert_eq!(a, vec![0, 0, 1, 2, 1]);
        assert_eq!(s, vec![2, 2, 1]);
    }
}
