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

use serde::{Deserialize, Serialize};

use super::ConsensusPartition;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedCommunity {
    pub label: String,
    /// Community id in the consensus partition.
    pub community: u32,
    pub size: usize,
}

/// Communities of at least `min_size` nodes, largest first, lettered A, B, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCommunities {
    pub communities: Vec<RankedCommunity>,
    /// Per node: index into `communities`, or `None` for the residual pool.
    pub node_rank: Vec<Option<usize>>,
    pub residual_size: usize,
    pub coverage: f64,
    pub warnings: Vec<String>,
}

impl RankedCommunities {
    pub fn label_of(&self, node: usize) -> Option<&str> {
        self.node_rank[node].map(|r| self.communities[r].label.as_str())
    }

    pub fn labels(&self) -> Vec<String> {
        self.communities.iter().map(|c| c.label.clone()).collect()
    }

    /// Member nodes per ranked community.
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.communities.len()];
        for (v, r) in self.node_rank.iter().enumerate() {
            if let Some(r) = r {
                out[*r].push(v as u32);
            }
        }
        out
    }
}

/// Spreadsheet-style letters: 0 -> A, 25 -> Z, 26 -> AA.
pub fn community_name(mut rank: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (rank % 26) as u8);
        if rank < 26 {
            break;
        }
        rank = rank / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

/// Sort by size descending (ties: lower community id) and letter the ones
/// with at least `min_size` members.
pub fn rank_communities(p: &ConsensusPartition, min_size: usize) -> RankedCommunities {
    let mut order: Vec<u32> = (0..p.sizes.len() as u32).collect();
    order.sort_by(|&a, &b| p.sizes[b as usize].cmp(&p.sizes[a as usize]).then(a.cmp(&b)));
    let communities: Vec<RankedCommunity> = order
        .iter()
        .take_while(|&&c| p.sizes[c as usize] >= min_size)
        .enumerate()
        .map(|(r, &c)| RankedCommunity {
            label: community_name(r),
            community: c,
            size: p.sizes[c as usize],
        })
        .collect();
    let mut rank_of = vec![None; p.sizes.len()];
    for (r, c) in communities.iter().enumerate() {
        rank_of[c.community as usize] = Some(r);
    }
    let node_rank: Vec<Option<usize>> = p.assignment.iter().map(|&c| rank_of[c as usize]).collect();
    let n = p.assignment.len();
    let covered: usize = communities.iter().map(|c| c.size).sum();
    let mut warnings = Vec::new();
    if communities.is_empty() && n > 0 {
        warnings.push(format!(
            "no community reaches min_size {min_size}; all {n} nodes are residual"
        ));
    }
    RankedCommunities {
        communities,
        node_rank,
        residual_size: n - covered,
        coverage: if n == 0 { 0.0 } else { covered as f64 / n as f64 },
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partition(sizes: &[usize]) -> ConsensusPartition {
        let assignment: Vec<u32> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| std::iter::repeat_n(c as u32, s))
            .collect();
        let n = assignment.len();
        ConsensusPartition {
            assignment,
            sizes: sizes.to_vec(),
            agreement: vec![1.0; n],
            runs: 1,
            resolution: 1.0,
            reference_seed: 0,
            modularity: 0.0,
            run_summaries: Vec::new(),
        }
    }

    #[test]
    fn sizes_and_coverage() {
        let r = rank_communities(&partition(&[300, 10, 500]), 100);
        assert_eq!(r.labels(), vec!["A", "B"]);
        assert_eq!(r.communities[0].size, 500);
        assert_eq!(r.communities[0].community, 2);
        assert_eq!(r.residual_size, 10);
        assert!((r.coverage - 800.0 / 810.0).abs() < 1e-15);
        assert_eq!(format!("{:.3}", r.coverage), "0.988");
        assert_eq!(r.label_of(0), Some("B"));
        assert_eq!(r.label_of(300), None);
    }

    #[test]
    fn ties_by_lower_id() {
        let r = rank_communities(&partition(&[5, 5, 5]), 1);
        let ids: Vec<u32> = r.communities.iter().map(|c| c.community).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn all_residual_warns() {
        let r = rank_communities(&partition(&[3, 4]), 10);
        assert!(r.communities.is_empty());
        assert_eq!(r.residual_size, 7);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn letters() {
        assert_eq!(community_name(0), "A");
        assert_eq!(community_name(14), "O");
        assert_eq!(community_name(25), "Z");
        assert_eq!(community_name(26), "AA");
        assert_eq!(community_name(27), "AB");
        assert_eq!(community_name(26 + 26 * 26), "AAA");
    }
}
