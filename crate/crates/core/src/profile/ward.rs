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

use crate::error::{Error, Result};

/// One agglomeration step. Leaves are `0..n`; the cluster formed by merge
/// `s` has id `n + s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Flat clustering with exactly `k` clusters, numbered by first leaf.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.leaves;
        if k == 0 || k > n {
            return Err(Error::Config(format!("cannot cut {n} leaves into {k} clusters")));
        }
        let mut parent: Vec<usize> = (0..n + self.merges.len()).collect();
        for (s, m) in self.merges.iter().take(n - k).enumerate() {
            parent[m.a] = n + s;
            parent[m.b] = n + s;
        }
        let root = |mut x: usize| {
            while parent[x] != x {
                x = parent[x];
            }
            x
        };
        let mut ids: Vec<usize> = Vec::new();
        Ok((0..n)
            .map(|leaf| {
                let r = root(leaf);
                match ids.iter().position(|&x| x == r) {
                    Some(p) => p,
                    None => {
                        ids.push(r);
                        ids.len() - 1
                    }
                }
            })
            .collect())
    }

    /// `heights[k - 1]`: height of the merge that leaves `k` clusters.
    pub fn heights_by_cluster_count(&self) -> Vec<f64> {
        self.merges.iter().rev().map(|m| m.height).collect()
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Ward minimum-variance agglomeration with Lance–Williams updates.
/// Equal distances merge the pair with the smallest cluster ids.
pub fn ward_cluster(rows: &[Vec<f64>]) -> Result<Dendrogram> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::TooFew { what: "rows to cluster", needed: 2, got: n });
    }
    let total = 2 * n - 1;
    let mut dist = vec![vec![f64::INFINITY; total]; total];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&rows[i], &rows[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut size = vec![1usize; total];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for s in 0..n - 1 {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                if dist[i][j] < best.0 {
                    best = (dist[i][j], i, j);
                }
            }
        }
        let (h, i, j) = best;
        let new = n + s;
        size[new] = size[i] + size[j];
        active.retain(|&c| c != i && c != j);
        for &k in &active {
            let (ni, nj, nk) = (size[i] as f64, size[j] as f64, size[k] as f64);
            let sq = ((ni + nk) * dist[k][i].powi(2) + (nj + nk) * dist[k][j].powi(2) - nk * h * h) / (ni + nj + nk);
            let d = sq.max(0.0).sqrt();
            dist[k][new] = d;
            dist[new][k] = d;
        }
        active.push(new);
        merges.push(Merge { a: i, b: j, height: h, size: size[new] });
    }
    Ok(Dendrogram { leaves: n, merges })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knee {
    pub k: usize,
    /// `(k, g(k-1) - 2 g(k) + g(k+1))` where `g(k)` is the height of the
    /// merge that leaves `k` clusters.
    pub second_differences: Vec<(usize, f64)>,
    /// False when no second difference stands out from zero.
    pub clear: bool,
}

/// Cluster count at the maximum discrete second difference of merge height
/// over cluster count. Ties go to the smaller `k`.
pub fn knee_point(d: &Dendrogram) -> Result<Knee> {
    if d.merges.len() < 3 {
        return Err(Error::TooFew { what: "dendrogram merges for a knee", needed: 3, got: d.merges.len() });
    }
    let g = d.heights_by_cluster_count();
    let scale = g.iter().fold(0.0f64, |m, &h| m.max(h.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    let second_differences: Vec<(usize, f64)> =
        (2..g.len()).map(|k| (k, g[k - 2] - 2.0 * g[k - 1] + g[k])).collect();
    let mut best = second_differences[0];
    for &(k, v) in &second_differences[1..] {
        if v > best.1 + tol {
            best = (k, v);
        }
    }
    Ok(Knee { k: best.0, second_differences, clear: best.1 > tol })
}
