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
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::RetweetGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdShare {
    pub users: usize,
    pub user_fraction: f64,
    pub retweets: u64,
    pub retweet_fraction: f64,
}

/// Weighted out-degree (retweets received) per node plus its histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pub degrees: Vec<u64>,
    pub histogram: BTreeMap<u64, usize>,
    pub total: u64,
}

pub fn degree_distribution(g: &RetweetGraph) -> DegreeDistribution {
    let degrees = g.weighted_out_degrees();
    let mut histogram = BTreeMap::new();
    for &d in &degrees {
        *histogram.entry(d).or_insert(0) += 1;
    }
    let total = degrees.iter().sum();
    DegreeDistribution {
        degrees,
        histogram,
        total,
    }
}

impl DegreeDistribution {
    fn share(&self, users: usize, retweets: u64) -> ThresholdShare {
        let n = self.degrees.len();
        ThresholdShare {
            users,
            user_fraction: if n == 0 { 0.0 } else { users as f64 / n as f64 },
            retweets,
            retweet_fraction: if self.total == 0 {
                0.0
            } else {
                retweets as f64 / self.total as f64
            },
        }
    }

    /// Users with out-degree strictly above `threshold`.
    pub fn share_above(&self, threshold: u64) -> ThresholdShare {
        let (users, retweets) = self
            .histogram
            .range(threshold + 1..)
            .fold((0, 0), |(u, r), (&d, &c)| (u + c, r + d * c as u64));
        self.share(users, retweets)
    }

    /// The `ceil(fraction * n)` most retweeted users.
    pub fn top_fraction(&self, fraction: f64) -> ThresholdShare {
        let n = self.degrees.len();
        let want = ((fraction.clamp(0.0, 1.0) * n as f64).ceil() as usize).min(n);
        let mut left = want;
        let mut retweets = 0;
        for (&d, &c) in self.histogram.iter().rev() {
            if left == 0 {
                break;
            }
            let take = c.min(left);
            retweets += d * take as u64;
            left -= take;
        }
        self.share(want, retweets)
    }

    /// CSV `out_degree,count`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["out_degree", "count"])?;
        for (d, c) in &self.histogram {
            wtr.write_record([d.to_string(), c.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star() {
        let pairs = (1..10).map(|i| (0u32, i as u32)).collect();
        let g = RetweetGraph::from_pairs(10, pairs).unwrap();
        let d = degree_distribution(&g);
        assert_eq!(d.degrees[0], 9);
        assert!(d.degrees[1..].iter().all(|&x| x == 0));
        assert_eq!(d.histogram[&0], 9);
        let top = d.share_above(1);
        assert_eq!(top.users, 1);
        assert_eq!(top.retweet_fraction, 1.0);
        assert!((top.user_fraction - 0.1).abs() < 1e-15);
    }
}
