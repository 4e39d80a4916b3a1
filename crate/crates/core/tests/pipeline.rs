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

//! Synthetic stream through ingest, graph and consensus communities.

use std::collections::BTreeMap;

use attnet_core::community::{consensus, nmi, rank_communities, LouvainConfig};
use attnet_core::graph::{build_graph, giant_component, symmetrize};
use attnet_core::ingest::{parse_events, write_events};
use attnet_core::synth::{generate, BlockSpec, Segment, SynthConfig};
use attnet_core::TimeWindow;

fn planted(seed: u64) -> SynthConfig {
    let k = 5;
    SynthConfig {
        seed,
        start: 1_578_873_600,
        days: 28,
        retweets: 60_000,
        originals_per_user: 3,
        popularity_exponent: 1.0,
        location_rate: 0.5,
        blocks: (0..k)
            .map(|b| BlockSpec { name: format!("block{b}"), size: 500, categories: BTreeMap::new(), countries: BTreeMap::new() })
            .collect(),
        segments: vec![Segment { start_day: 0.0, rates: (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.01 }).collect()).collect() }],
    }
}

#[test]
fn planted_blocks_are_recovered() {
    for seed in [1, 2] {
        let cfg = planted(seed);
        let out = generate(&cfg).unwrap();
        let retweets = out.events.iter().filter(|e| e.is_retweet()).count();
        assert_eq!(retweets, cfg.retweets);

        let mut jsonl = Vec::new();
        write_events(&out.events, &mut jsonl).unwrap();
        let (events, report) = parse_events(&jsonl, TimeWindow { start: cfg.start, end: cfg.end() });
        assert_eq!(events.len(), out.events.len());
        assert_eq!(report.malformed + report.duplicates + report.out_of_window, 0);

        let (registry, graph) = build_graph(&events).unwrap();
        let (registry, graph, _) = giant_component(&registry, &graph);
        let p = consensus(&symmetrize(&graph), &LouvainConfig { seed, ..LouvainConfig::default() }, 6).unwrap();

        let blocks = out.truth.block_of();
        let truth: Vec<u32> = registry.ids().iter().map(|id| blocks[id.as_str()]).collect();
        let score = nmi(&p.assignment, &truth);
        assert!(score >= 0.95, "seed {seed}: NMI {score}");
        assert!(registry.len() as f64 >= 0.99 * cfg.user_count() as f64);

        let ranked = rank_communities(&p, 100);
        assert_eq!(ranked.communities.len(), 5);
        assert!(ranked.coverage > 0.99);
    }
}

#[test]
fn synthetic_streams_are_reproducible() {
    let cfg = planted(3);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_events(&generate(&cfg).unwrap().events, &mut a).unwrap();
    write_events(&generate(&cfg).unwrap().events, &mut b).unwrap();
    assert_eq!(a, b);
    let mut other = Vec::new();
    write_events(&generate(&planted(4)).unwrap().events, &mut other).unwrap();
    assert_ne!(a, other);
}
