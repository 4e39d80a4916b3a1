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

//! Cross-module invariants, checked on generated inputs.

use std::collections::{BTreeMap, BTreeSet};

use attnet_core::attention::{bootstrap_mean_rank, competition_ranks, h_index, rolling_attention, select_top_users, attention_records, BootstrapConfig, RetweetLog};
use attnet_core::community::{louvain, modularity, LouvainConfig};
use attnet_core::dynamics::{mixing_matrix, window_series, GroupMap, DAY};
use attnet_core::graph::{build_graph, giant_component, symmetrize, SymmetricGraph};
use attnet_core::ingest::{assign_user_countries, parse_events, resolve_country, write_events, Gazetteer, TweetEvent};
use attnet_core::profile::{assign_super_communities, shannon_entropy, ward_cluster, FeatureMatrix, Rulebook};
use attnet_core::{SuperCommunity, TimeWindow};
use proptest::prelude::*;

const T0: i64 = 1_580_515_200; // 2020-02-01

fn all_time() -> TimeWindow {
    TimeWindow { start: i64::MIN / 2, end: i64::MAX / 2 }
}

/// Retweets among `users` users; author and retweeted author may coincide.
fn retweets(users: u32, max: usize) -> impl Strategy<Value = Vec<TweetEvent>> {
    prop::collection::vec((0..users, 0..users, 0..30 * DAY, 0u32..5), 0..max).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (a, b, t, tweet))| TweetEvent::retweet(format!("r{i}"), format!("u{a}"), T0 + t, format!("u{b}"), Some(format!("t{b}_{tweet}"))))
            .collect()
    })
}

/// Raw JSONL lines: valid events, repeats, garbage, out-of-window stamps.
fn raw_lines() -> impl Strategy<Value = Vec<String>> {
    let line = prop_oneof![
        (0u32..40, 0u32..6, -5i64..40).prop_map(|(id, a, d)| format!(r#"{{"id":"{id}","author_id":"a{a}","ts":{},"kind":"tweet","loc":"Paris"}}"#, T0 + d * DAY)),
        (0u32..40, 0u32..6, 0u32..6, 0i64..30).prop_map(|(id, a, b, d)| format!(
            r#"{{"id":"{id}","author_id":"a{a}","ts":{},"kind":"retweet","rt_author_id":"a{b}"}}"#,
            T0 + d * DAY
        )),
        Just(r#"{"id":"x","author_id":"a1","ts":"nope","kind":"tweet"}"#.to_string()),
        Just("{not json".to_string()),
        Just(String::new()),
    ];
    prop::collection::vec(line, 0..80)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ingest_accounts_for_lines_and_round_trips(lines in raw_lines()) {
        let window = TimeWindow { start: T0, end: T0 + 29 * DAY };
        let text = lines.join("\n");
        let (events, report) = parse_events(text.as_bytes(), window);
        let nonblank = lines.iter().filter(|l| !l.trim().is_empty()).count();
        prop_assert_eq!(report.lines, nonblank);
        prop_assert_eq!(events.len() + report.malformed + report.out_of_window + report.duplicates, nonblank);
        prop_assert!(events.iter().all(|e| window.contains(e.timestamp)));

        let mut buf = Vec::new();
        write_events(&events, &mut buf).unwrap();
        let (again, _) = parse_events(&buf, window);
        prop_assert_eq!(again, events);
    }

    #[test]
    fn country_resolution_ignores_case(pick in 0usize..10_000, mask in any::<u64>()) {
        let gaz = Gazetteer::builtin();
        let entry = &gaz.entries()[pick % gaz.len()];
        let text = entry.pattern.join(" ");
        let mixed: String = text.chars().enumerate().map(|(i, c)| if mask >> (i % 64) & 1 == 1 { c.to_ascii_uppercase() } else { c }).collect();
        prop_assert_eq!(resolve_country(&mixed, &gaz), resolve_country(&text.to_lowercase(), &gaz));
        prop_assert!(resolve_country(&text, &gaz).is_some());
    }

    #[test]
    fn strict_majorities_ignore_event_order(rows in prop::collection::vec((0u32..5, 0usize..4), 1..40), seed in any::<u64>()) {
        let places = ["Paris", "Berlin", "Tokyo", "Toronto"];
        let events: Vec<TweetEvent> = rows
            .iter()
            .enumerate()
            .map(|(i, &(u, p))| TweetEvent::original(format!("t{i}"), format!("u{u}"), T0 + i as i64).with_location(places[p]))
            .collect();
        let mut shuffled = events.clone();
        let mut rng = attnet_core::rng::seeded(seed);
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        let gaz = Gazetteer::builtin();
        let a = assign_user_countries(&events, &gaz);
        let b = assign_user_countries(&shuffled, &gaz);
        let mut tally: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
        for &(u, p) in &rows {
            *tally.entry(format!("u{u}")).or_default().entry(p).or_default() += 1;
        }
        for (user, counts) in tally {
            let mut c: Vec<usize> = counts.values().copied().collect();
            c.sort_unstable_by(|x, y| y.cmp(x));
            if c.len() == 1 || c[0] > c[1] {
                prop_assert_eq!(a[&user], b[&user], "user {}", user);
            }
        }
    }

    #[test]
    fn graph_conserves_weight_and_nodes(events in retweets(30, 300)) {
        let (reg, g) = build_graph(&events).unwrap();
        let non_self = events.iter().filter(|e| !e.is_self_retweet()).count() as u64;
        prop_assert_eq!(g.total_weight(), non_self);
        let ids: BTreeSet<&str> = events.iter().flat_map(|e| [e.author_id.as_str(), e.retweeted_author_id.as_deref().unwrap()]).collect();
        prop_assert_eq!(reg.len(), ids.len());
        prop_assert!(g.edges().all(|(s, d, w)| s != d && w >= 1));

        let s = symmetrize(&g);
        prop_assert_eq!(s.total_weight(), g.total_weight());
        prop_assert_eq!(s.node_count(), g.node_count());
        for (u, v, w) in s.edges() {
            prop_assert_eq!(w, u64::from(g.weight(u, v)) + u64::from(g.weight(v, u)));
            prop_assert_eq!(s.weight(v, u), w);
        }

        let (r1, g1, _) = giant_component(&reg, &g);
        let (r2, g2, _) = giant_component(&r1, &g1);
        prop_assert_eq!(r1.ids(), r2.ids());
        prop_assert_eq!(g1.edges().collect::<Vec<_>>(), g2.edges().collect::<Vec<_>>());
    }

    #[test]
    fn louvain_beats_trivial_partitions(edges in prop::collection::vec((0u32..40, 0u32..40, 1u64..4), 1..200), seed in 0u64..1000) {
        let edges: Vec<(u32, u32, u64)> = edges.into_iter().filter(|e| e.0 != e.1).collect();
        prop_assume!(!edges.is_empty());
        let g = SymmetricGraph::from_edges(40, &edges).unwrap();
        let p = louvain(&g, &LouvainConfig { seed, ..LouvainConfig::default() }).unwrap();
        let singletons: Vec<u32> = (0..40).collect();
        let q_single = modularity(&g, &singletons, 1.0).unwrap();
        let q_one = modularity(&g, &[0; 40], 1.0).unwrap();
        prop_assert!(p.modularity >= q_single - 1e-12);
        prop_assert!(p.modularity >= q_one - 1e-12);
        prop_assert!(p.modularity <= 1.0);
    }

    #[test]
    fn z_scores_ignore_affine_column_changes(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 7), 3..12),
        shift in -5.0f64..5.0,
        scale in 0.1f64..10.0,
        col in 0usize..7,
    ) {
        let labels: Vec<String> = (0..rows.len()).map(|i| format!("c{i}")).collect();
        let as_opt = |r: &Vec<Vec<f64>>| r.iter().map(|row| row.iter().map(|&x| Some(x)).collect()).collect::<Vec<Vec<Option<f64>>>>();
        let base = FeatureMatrix::from_raw(labels.clone(), as_opt(&rows)).unwrap();
        let mut moved = rows.clone();
        for r in &mut moved {
            r[col] = r[col] * scale + shift;
        }
        let other = FeatureMatrix::from_raw(labels, as_opt(&moved)).unwrap();
        for (a, b) in base.z.iter().zip(&other.z) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn naming_ignores_row_order(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 7), 4..12),
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        let labels: Vec<String> = (0..rows.len()).map(|i| format!("c{i}")).collect();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut attnet_core::rng::seeded(seed));
        let name = |idx: &[usize]| {
            let fm = FeatureMatrix::from_raw(
                idx.iter().map(|&i| labels[i].clone()).collect(),
                idx.iter().map(|&i| rows[i].iter().map(|&x| Some(x)).collect()).collect(),
            ).unwrap();
            let d = ward_cluster(&fm.z).unwrap();
            assign_super_communities(&fm, &d, k, &Rulebook::default())
                .map(|a| a.map.into_iter().collect::<BTreeMap<_, _>>())
                .map_err(|e| e.to_string())
        };
        let identity: Vec<usize> = (0..rows.len()).collect();
        match (name(&identity), name(&order)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn entropy_ignores_country_labels(counts in prop::collection::vec(1u32..50, 1..30), seed in any::<u64>()) {
        let a: Vec<f64> = counts.iter().map(|&c| f64::from(c)).collect();
        let mut b = a.clone();
        use rand::seq::SliceRandom;
        b.shuffle(&mut attnet_core::rng::seeded(seed));
        let (ha, hb) = (shannon_entropy(&a).unwrap(), shannon_entropy(&b).unwrap());
        prop_assert!((ha - hb).abs() < 1e-12);
        prop_assert!(ha >= 0.0 && ha <= (counts.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn h_index_bounds_and_monotone(counts in prop::collection::vec(0u64..60, 0..60), bump in 0usize..60) {
        let h = h_index(&counts);
        let max = counts.iter().copied().max().unwrap_or(0);
        let nonzero = counts.iter().filter(|&&c| c > 0).count() as u64;
        prop_assert!(h <= max && h <= nonzero);
        if !counts.is_empty() {
            let mut more = counts.clone();
            more[bump % counts.len()] += 1;
            prop_assert!(h_index(&more) >= h);
        }
    }

    #[test]
    fn competition_rank_arithmetic(values in prop::collection::vec(0u64..20, 1..50)) {
        let ranks = competition_ranks(&values);
        prop_assert!(ranks.contains(&1));
        for (i, &r) in ranks.iter().enumerate() {
            let better = values.iter().filter(|&&v| v > values[i]).count() as u32;
            prop_assert_eq!(r, better + 1);
        }
    }

    #[test]
    fn bootstrap_is_seeded_and_brackets_mean(ranks in prop::collection::vec(1u32..100, 2..60), seed in any::<u64>()) {
        let ranks: Vec<f64> = ranks.into_iter().map(f64::from).collect();
        let cfg = BootstrapConfig { resamples: 200, level: 0.9, seed };
        let a = bootstrap_mean_rank(&ranks, &cfg).unwrap();
        prop_assert_eq!(&a, &bootstrap_mean_rank(&ranks, &cfg).unwrap());
        let mean = ranks.iter().sum::<f64>() / ranks.len() as f64;
        prop_assert!((a.mean - mean).abs() < 1e-9);
        prop_assert!(a.lo <= mean + 1e-9 && mean <= a.hi + 1e-9, "{} not in [{}, {}]", mean, a.lo, a.hi);
    }

    #[test]
    fn window_h_never_exceeds_full_period(events in retweets(12, 400)) {
        let map = GroupMap::new((0..12).map(|u| (format!("u{u}"), SuperCommunity::ALL[u % 4])));
        let log = RetweetLog::new(&events, &map);
        let cohort = select_top_users(&attention_records(&log), 3);
        prop_assume!(!cohort.members.is_empty());
        let windows = window_series(TimeWindow { start: T0, end: T0 + 30 * DAY }, 7 * DAY, 7 * DAY).unwrap();
        let t = rolling_attention(&log, &cohort, &windows, &BootstrapConfig { resamples: 20, ..BootstrapConfig::default() }).unwrap();
        for w in &t.windows {
            for (i, rec) in cohort.records.iter().enumerate() {
                prop_assert!(w.h_index[i] <= rec.h_index);
                prop_assert!(w.retweets[i] <= rec.retweets_received);
            }
            prop_assert!(w.r_rt.ranks.contains(&1));
        }
    }

    #[test]
    fn weekly_series_partitions_retweets(events in retweets(20, 300), mapped in 5u32..20) {
        let map = GroupMap::new((0..mapped).map(|u| (format!("u{u}"), SuperCommunity::ALL[(u % 4) as usize])));
        let period = TimeWindow { start: T0, end: T0 + 28 * DAY };
        let weeks = window_series(period, 7 * DAY, 7 * DAY).unwrap();
        let total: u64 = weeks.windows.iter().map(|&w| mixing_matrix(&events, w, &map).total).sum();
        prop_assert_eq!(total, mixing_matrix(&events, period, &map).total);
        let in_period = events.iter().filter(|e| period.contains(e.timestamp) && !e.is_self_retweet()).count() as u64;
        prop_assert_eq!(total, in_period);
        let everything = events.iter().filter(|e| !e.is_self_retweet()).count() as u64;
        prop_assert_eq!(mixing_matrix(&events, all_time(), &map).total, everything);
    }
}
