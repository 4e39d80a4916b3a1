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

//! Majority vote over repeated Louvain runs.
//!
//! Runs use seeds `seed, seed + 1, ..`. The run with the highest modularity
//! (lowest seed on ties) is the reference. Every run's labels are mapped onto
//! the reference by greedy maximum-overlap matching; run communities left
//! unmatched get fresh labels unique across all runs. Each node then takes
//! its most frequent aligned label, ties going to the label with more votes
//! overall and then to the lower label.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SymmetricGraph;

use super::{louvain, modularity, nmi, LouvainConfig, Partition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub modularity: f64,
    pub communities: usize,
    /// Stability measure: NMI of this run against the reference run.
    pub nmi_to_reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusPartition {
    pub assignment: Vec<u32>,
    pub sizes: Vec<usize>,
    /// Fraction of runs that put the node in its consensus community.
    pub agreement: Vec<f64>,
    pub runs: usize,
    pub resolution: f64,
    pub reference_seed: u64,
    pub modularity: f64,
    pub run_summaries: Vec<RunSummary>,
}

impl ConsensusPartition {
    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }
}

/// Greedy one-to-one matching of `other`'s labels onto `reference`'s by
/// shared node count (ties: lower reference label, then lower other label).
/// Returns `map[other_label] = aligned_label`; unmatched labels are numbered
/// from `fresh_start` upwards in ascending order of the other label.
fn align_into(reference: &[u32], other: &[u32], fresh_start: u32) -> Vec<u32> {
    let k_other = other.iter().max().map_or(0, |&m| m as usize + 1);
    let k_ref = reference.iter().max().map_or(0, |&m| m as usize + 1);
    let mut overlap: HashMap<(u32, u32), usize> = HashMap::new();
    for (&r, &o) in reference.iter().zip(other) {
        *overlap.entry((o, r)).or_insert(0) += 1;
    }
    let mut pairs: Vec<((u32, u32), usize)> = overlap.into_iter().collect();
    pairs.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0 .1.cmp(&b.0 .1)).then(a.0 .0.cmp(&b.0 .0)));
    let mut map = vec![u32::MAX; k_other];
    let mut ref_used = vec![false; k_ref];
    for ((o, r), _) in pairs {
        if map[o as usize] == u32::MAX && !ref_used[r as usize] {
            map[o as usize] = r;
            ref_used[r as usize] = true;
        }
    }
    for (m, fresh) in map.iter_mut().filter(|m| **m == u32::MAX).zip(fresh_start..) {
        *m = fresh;
    }
    map
}

/// Map each label of `other` to a label of `reference`. Labels with no
/// partner get fresh ids past the largest reference label.
pub fn align_labels(reference: &[u32], other: &[u32]) -> Vec<u32> {
    let k_ref = reference.iter().max().map_or(0, |&m| m + 1);
    align_into(reference, other, k_ref)
}

pub fn consensus(g: &SymmetricGraph, cfg: &LouvainConfig, runs: usize) -> Result<ConsensusPartition> {
    if runs == 0 {
        return Err(Error::Config("consensus needs at least one run".into()));
    }
    cfg.validate()?;
    let partitions: Vec<(u64, Partition)> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.seed.wrapping_add(r);
            louvain(g, &LouvainConfig { seed, ..cfg.clone() }).map(|p| (seed, p))
        })
        .collect::<Result<_>>()?;

    let reference = partitions
        .iter()
        .enumerate()
        .max_by(|(_, (sa, a)), (_, (sb, b))| {
            a.modularity.total_cmp(&b.modularity).then(sb.cmp(sa))
        })
        .map(|(i, _)| i)
        .unwrap();
    let ref_labels = &partitions[reference].1.assignment;
    let mut next_fresh = partitions[reference].1.community_count() as u32;

    let mut aligned: Vec<Vec<u32>> = Vec::with_capacity(runs);
    let mut summaries = Vec::with_capacity(runs);
    for (seed, p) in &partitions {
        let map = align_into(ref_labels, &p.assignment, next_fresh);
        next_fresh = next_fresh.max(map.iter().max().map_or(0, |&m| m + 1));
        aligned.push(p.assignment.iter().map(|&c| map[c as usize]).collect());
        summaries.push(RunSummary {
            seed: *seed,
            modularity: p.modularity,
            communities: p.community_count(),
            nmi_to_reference: nmi(ref_labels, &p.assignment),
        });
    }

    let mut label_votes = vec![0usize; next_fresh as usize];
    for run in &aligned {
        for &l in run {
            label_votes[l as usize] += 1;
        }
    }
    let n = g.node_count();
    let mut labels = Vec::with_capacity(n);
    let mut agreement = Vec::with_capacity(n);
    let mut votes: Vec<u32> = Vec::with_capacity(runs);
    for v in 0..n {
        votes.clear();
        votes.extend(aligned.iter().map(|run| run[v]));
        votes.sort_unstable();
        let mut best = (0usize, 0usize, u32::MAX);
        let mut i = 0;
        while i < votes.len() {
            let l = votes[i];
            let mut j = i;
            while j < votes.len() && votes[j] == l {
                j += 1;
            }
            let cand = (j - i, label_votes[l as usize], l);
            if (cand.0, cand.1) > (best.0, best.1) {
                best = cand;
            }
            i = j;
        }
        labels.push(best.2);
        agreement.push(best.0 as f64 / runs as f64);
    }

    let (assignment, sizes) = Partition::relabel(&labels);
    let q = modularity(g, &assignment, cfg.resolution)?;
    Ok(ConsensusPartition {
        assignment,
        sizes,
        agreement,
        runs,
        resolution: cfg.resolution,
        reference_seed: partitions[reference].0,
        modularity: q,
        run_summaries: summaries,
    })
}
