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

//! Louvain modularity optimization.
//!
//! Each level runs local moves in a seeded random node order until a full
//! sweep moves nothing, then collapses communities into super-nodes
//! (intra-community weight becomes a self-loop). Levels repeat until one
//! gains less than `tolerance` modularity or `max_passes` is reached.
//!
//! Modularity is tracked incrementally from the move gains; the trace
//! records it next to a from-scratch recomputation after every level.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SymmetricGraph;
use crate::rng;

use super::{modularity, Partition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainConfig {
    pub resolution: f64,
    pub seed: u64,
    pub max_passes: usize,
    pub tolerance: f64,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            resolution: 1.0,
            seed: 0,
            max_passes: 100,
            tolerance: 1e-7,
        }
    }
}

impl LouvainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::Config(format!("resolution must be positive, got {}", self.resolution)));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(self.tolerance >= 0.0) {
            return Err(Error::Config(format!("tolerance must be >= 0, got {}", self.tolerance)));
        }
        if self.max_passes == 0 {
            return Err(Error::Config("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Modularity bookkeeping for one aggregation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub nodes: usize,
    pub moves: usize,
    pub sweeps: usize,
    pub incremental_q: f64,
    pub recomputed_q: f64,
}

struct Level {
    offsets: Vec<usize>,
    nbrs: Vec<u32>,
    weights: Vec<f64>,
    /// Ordered-pair weight inside the super-node (twice the internal edge weight).
    self_loops: Vec<f64>,
    degrees: Vec<f64>,
}

impl Level {
    fn from_graph(g: &SymmetricGraph) -> Self {
        let (offsets, nbrs, weights) = g.csr();
        let weights: Vec<f64> = weights.iter().map(|&w| w as f64).collect();
        let n = g.node_count();
        let degrees = (0..n).map(|v| weights[offsets[v]..offsets[v + 1]].iter().sum()).collect();
        Level {
            offsets: offsets.to_vec(),
            nbrs: nbrs.to_vec(),
            weights,
            self_loops: vec![0.0; n],
            degrees,
        }
    }

    fn len(&self) -> usize {
        self.degrees.len()
    }

    /// Modularity of the singleton partition of this level.
    fn singleton_q(&self, two_m: f64, gamma: f64) -> f64 {
        self.self_loops
            .iter()
            .zip(&self.degrees)
            .map(|(&s, &k)| s / two_m - gamma * (k / two_m) * (k / two_m))
            .sum()
    }

    /// Collapse `comm` (contiguous ids `0..k`) into a new level.
    fn aggregate(&self, comm: &[u32], k: usize) -> Level {
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); k];
        for (v, &c) in comm.iter().enumerate() {
            members[c as usize].push(v as u32);
        }
        let mut offsets = Vec::with_capacity(k + 1);
        offsets.push(0);
        let mut nbrs = Vec::new();
        let mut weights = Vec::new();
        let mut self_loops = vec![0.0; k];
        let mut degrees = vec![0.0; k];
        let mut scratch = vec![0.0f64; k];
        let mut touched: Vec<u32> = Vec::new();
        for c in 0..k {
            for &v in &members[c] {
                self_loops[c] += self.self_loops[v as usize];
                degrees[c] += self.degrees[v as usize];
                for e in self.offsets[v as usize]..self.offsets[v as usize + 1] {
                    let d = comm[self.nbrs[e] as usize];
                    if d as usize == c {
                        self_loops[c] += self.weights[e];
                    } else {
                        if scratch[d as usize] == 0.0 {
                            touched.push(d);
                        }
                        scratch[d as usize] += self.weights[e];
                    }
                }
            }
            touched.sort_unstable();
            for &d in &touched {
                nbrs.push(d);
                weights.push(scratch[d as usize]);
                scratch[d as usize] = 0.0;
            }
            touched.clear();
            offsets.push(nbrs.len());
        }
        Level {
            offsets,
            nbrs,
            weights,
            self_loops,
            degrees,
        }
    }
}

struct MoveOutcome {
    comm: Vec<u32>,
    moves: usize,
    sweeps: usize,
    gain: f64,
}

fn local_moves(level: &Level, two_m: f64, gamma: f64, rng: &mut rng::Rng) -> MoveOutcome {
    let n = level.len();
    let mut comm: Vec<u32> = (0..n as u32).collect();
    let mut tot = level.degrees.clone();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);

    let mut link = vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut moves = 0;
    let mut sweeps = 0;
    let mut gain = 0.0;
    loop {
        sweeps += 1;
        let mut moved = 0;
        for &v in &order {
            let v = v as usize;
            let k_v = level.degrees[v];
            let own = comm[v];
            for e in level.offsets[v]..level.offsets[v + 1] {
                let c = comm[level.nbrs[e] as usize];
                if link[c as usize] == 0.0 {
                    touched.push(c);
                }
                link[c as usize] += level.weights[e];
            }
            tot[own as usize] -= k_v;
            let scale = gamma * k_v / two_m;
            let stay = link[own as usize] - scale * tot[own as usize];
            let mut best = own;
            let mut best_gain = f64::NEG_INFINITY;
            for &c in &touched {
                if c == own {
                    continue;
                }
                let g = link[c as usize] - scale * tot[c as usize];
                if g > best_gain || (g == best_gain && c < best) {
                    best = c;
                    best_gain = g;
                }
            }
            let diff = best_gain - stay;
            if best != own && diff > 1e-12 * k_v.max(1.0) {
                comm[v] = best;
                tot[best as usize] += k_v;
                gain += 2.0 * diff / two_m;
                moved += 1;
            } else {
                tot[own as usize] += k_v;
            }
            for &c in &touched {
                link[c as usize] = 0.0;
            }
            touched.clear();
        }
        moves += moved;
        if moved == 0 {
            break;
        }
    }
    MoveOutcome {
        comm,
        moves,
        sweeps,
        gain,
    }
}

/// Run Louvain and return the partition together with per-level modularity
/// bookkeeping.
pub fn louvain_with_trace(g: &SymmetricGraph, cfg: &LouvainConfig) -> Result<(Partition, Vec<LevelTrace>)> {
    cfg.validate()?;
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let two_m = 2.0 * g.total_weight() as f64;
    if two_m == 0.0 {
        return Err(Error::UndefinedModularity);
    }
    let gamma = cfg.resolution;
    let mut rng = rng::seeded(cfg.seed);
    let mut level = Level::from_graph(g);
    let mut membership: Vec<u32> = (0..g.node_count() as u32).collect();
    let mut q = level.singleton_q(two_m, gamma);
    let mut trace = Vec::new();

    for _ in 0..cfg.max_passes {
        let out = local_moves(&level, two_m, gamma, &mut rng);
        if out.moves == 0 {
            break;
        }
        let (comm, sizes) = Partition::relabel(&out.comm);
        for m in membership.iter_mut() {
            *m = comm[*m as usize];
        }
        q += out.gain;
        trace.push(LevelTrace {
            nodes: level.len(),
            moves: out.moves,
            sweeps: out.sweeps,
            incremental_q: q,
            recomputed_q: modularity(g, &membership, gamma)?,
        });
        let k = sizes.len();
        if out.gain < cfg.tolerance || k == level.len() {
            break;
        }
        level = level.aggregate(&comm, k);
    }
    let partition = Partition::from_labels(g, &membership, gamma)?;
    Ok((partition, trace))
}

pub fn louvain(g: &SymmetricGraph, cfg: &LouvainConfig) -> Result<Partition> {
    louvain_with_trace(g, cfg).map(|(p, _)| p)
}
