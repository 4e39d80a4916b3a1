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

//! Seeded workloads shared by the benchmarks.

use std::collections::BTreeMap;

use attnet_core::ingest::{write_events, TweetEvent};
use attnet_core::synth::{generate, BlockSpec, Segment, SynthConfig};

/// Planted stream with `blocks` blocks of `size` users and `retweets` events.
pub fn planted_events(blocks: usize, size: usize, retweets: usize, seed: u64) -> Vec<TweetEvent> {
    let cfg = SynthConfig {
        seed,
        start: 1_578_873_600,
        days: 28,
        retweets,
        originals_per_user: 3,
        popularity_exponent: 1.0,
        location_rate: 0.5,
        blocks: (0..blocks)
            .map(|b| BlockSpec { name: format!("b{b}"), size, categories: BTreeMap::new(), countries: BTreeMap::new() })
            .collect(),
        segments: vec![Segment {
            start_day: 0.0,
            rates: (0..blocks).map(|i| (0..blocks).map(|j| if i == j { 1.0 } else { 0.01 }).collect()).collect(),
        }],
    };
    generate(&cfg).expect("bench config is valid").events
}

/// The same stream as JSONL bytes.
pub fn planted_jsonl(blocks: usize, size: usize, retweets: usize, seed: u64) -> Vec<u8> {
    let mut out = Vec::new();
    write_events(&planted_events(blocks, size, retweets, seed), &mut out).expect("in-memory write");
    out
}
