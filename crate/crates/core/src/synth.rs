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

//! Seeded synthetic data with known structure.
//!
//! [`generate`] produces a retweet event stream over planted user blocks:
//! each retweet picks a (content block, retweeter block) cell from the rate
//! matrix of the time segment it falls into, a retweeted author by
//! within-block Zipf popularity and a retweeter uniformly. Users get a
//! category and (optionally) a location string drawn from per-block mixes.
//!
//! [`planted_partition`] draws a plain stochastic block model graph.

use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::graph::SymmetricGraph;
use crate::ingest::{parse_timestamp, Gazetteer, TweetEvent};
use crate::rng;
use crate::types::{Category, CountryCode};

const DAY: i64 = 86_400;

fn de_timestamp<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Ts {
        Int(i64),
        Str(String),
    }
    match Ts::deserialize(d)? {
        Ts::Int(n) => Ok(n),
        Ts::Str(s) => parse_timestamp(&s).map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub name: String,
    pub size: usize,
    /// Relative weights; users default to `Other` when empty.
    #[serde(default)]
    pub categories: BTreeMap<Category, f64>,
    /// Relative weights over ISO codes; users get no location when empty.
    #[serde(default)]
    pub countries: BTreeMap<CountryCode, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Offset from the period start, in days.
    pub start_day: f64,
    /// `rates[i][j]`: relative rate at which block `j` retweets block `i`.
    pub rates: Vec<Vec<f64>>,
}

fn default_originals() -> usize {
    3
}
fn default_exponent() -> f64 {
    1.0
}
fn default_location_rate() -> f64 {
    0.75
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    #[serde(deserialize_with = "de_timestamp")]
    pub start: i64,
    pub days: u32,
    pub retweets: usize,
    #[serde(default = "default_originals")]
    pub originals_per_user: usize,
    #[serde(default = "default_exponent")]
    pub popularity_exponent: f64,
    #[serde(default = "default_location_rate")]
    pub location_rate: f64,
    pub blocks: Vec<BlockSpec>,
    pub segments: Vec<Segment>,
}

impl SynthConfig {
    pub fn end(&self) -> i64 {
        self.start + self.days as i64 * DAY
    }

    pub fn user_count(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleSynth(m));
        let s = self.blocks.len();
        if s == 0 {
            return bad("no blocks".into());
        }
        if self.days == 0 {
            return bad("period has zero days".into());
        }
        if self.originals_per_user == 0 {
            return bad("originals_per_user must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.location_rate) {
            return bad(format!("location_rate {} outside [0, 1]", self.location_rate));
        }
        if !self.popularity_exponent.is_finite() || self.popularity_exponent < 0.0 {
            return bad(format!("popularity_exponent {} must be >= 0", self.popularity_exponent));
        }
        for b in &self.blocks {
            if b.size == 0 {
                return bad(format!("block {:?} is empty", b.name));
            }
            let weights = b.categories.values().chain(b.countries.values());
            if weights.clone().any(|&w| !(w >= 0.0 && w.is_finite())) {
                return bad(format!("block {:?} has a negative or non-finite mix weight", b.name));
            }
            if !b.categories.is_empty() && b.categories.values().sum::<f64>() <= 0.0 {
                return bad(format!("block {:?} category mix sums to zero", b.name));
            }
            if !b.countries.is_empty() && b.countries.values().sum::<f64>() <= 0.0 {
                return bad(format!("block {:?} country mix sums to zero", b.name));
            }
        }
        if self.segments.is_empty() {
            return bad("no rate segments".into());
        }
        if self.segments[0].start_day != 0.0 {
            return bad("first segment must start at day 0".into());
        }
        for (k, seg) in self.segments.iter().enumerate() {
            if k > 0 && seg.start_day <= self.segments[k - 1].start_day {
                return bad("segment start days must increase".into());
            }
            if seg.start_day >= self.days as f64 {
                return bad(format!("segment {k} starts after the period"));
            }
            if seg.rates.len() != s || seg.rates.iter().any(|r| r.len() != s) {
                return bad(format!("segment {k} rate matrix must be {s}x{s}"));
            }
            if seg.rates.iter().flatten().any(|&r| !(r >= 0.0 && r.is_finite())) {
                return bad(format!("segment {k} has a negative or non-finite rate"));
            }
            if seg.rates.iter().flatten().sum::<f64>() <= 0.0 {
                return bad(format!("segment {k} has all-zero rates"));
            }
            for i in 0..s {
                if seg.rates[i][i] > 0.0 && self.blocks[i].size < 2 {
                    return bad(format!("block {:?} needs two users for self-retweeting rate", self.blocks[i].name));
                }
            }
        }
        Ok(())
    }

    fn segment_bounds(&self) -> Vec<(i64, i64)> {
        let end = self.end();
        let starts: Vec<i64> = self
            .segments
            .iter()
            .map(|s| self.start + (s.start_day * DAY as f64).round() as i64)
            .collect();
        starts
            .iter()
            .enumerate()
            .map(|(k, &s)| (s, starts.get(k + 1).copied().unwrap_or(end)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentTruth {
    pub start: i64,
    pub end: i64,
    /// Expected retweet counts per (content block, retweeter block) cell.
    pub expected: Vec<Vec<f64>>,
    /// Realized counts per cell.
    pub realized: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub block_names: Vec<String>,
    /// Block index per user, aligned with `user_ids`.
    pub user_block: Vec<u32>,
    pub user_ids: Vec<String>,
    pub segments: Vec<SegmentTruth>,
    /// Blocks joined by a positive rate in some segment, as connected groups.
    pub block_groups: Vec<Vec<u32>>,
}

impl GroundTruth {
    pub fn block_of(&self) -> HashMap<&str, u32> {
        self.user_ids
            .iter()
            .map(String::as_str)
            .zip(self.user_block.iter().copied())
            .collect()
    }

    /// CSV `user_id,block`.
    pub fn write_blocks_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["user_id", "block"])?;
        for (u, &b) in self.user_ids.iter().zip(&self.user_block) {
            wtr.write_record([u.as_str(), self.block_names[b as usize].as_str()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub events: Vec<TweetEvent>,
    pub categories: BTreeMap<String, Category>,
    pub truth: GroundTruth,
}

/// Cumulative weights; `sample` inverts with a binary search.
struct Cumulative(Vec<f64>);

impl Cumulative {
    fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        Cumulative(
            weights
                .into_iter()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect(),
        )
    }

    fn sample(&self, rng: &mut rng::Rng) -> usize {
        let total = *self.0.last().unwrap();
        let u = rng.random::<f64>() * total;
        self.0.partition_point(|&c| c <= u).min(self.0.len() - 1)
    }
}

fn zipf(n: usize, exponent: f64) -> Cumulative {
    Cumulative::new((1..=n).map(|r| (r as f64).powf(-exponent)))
}

/// Place names per country that the builtin gazetteer resolves back to it.
fn place_names(gazetteer: &Gazetteer) -> BTreeMap<CountryCode, Vec<String>> {
    let mut out: BTreeMap<CountryCode, Vec<String>> = BTreeMap::new();
    for e in gazetteer.entries() {
        let name = e.pattern.join(" ");
        if gazetteer.resolve(&name) == Some(e.country) {
            out.entry(e.country).or_default().push(name);
        }
    }
    out
}

fn block_groups(cfg: &SynthConfig) -> Vec<Vec<u32>> {
    let s = cfg.blocks.len();
    let mut parent: Vec<usize> = (0..s).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for seg in &cfg.segments {
        for i in 0..s {
            for j in 0..s {
                if i != j && seg.rates[i][j] > 0.0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for i in 0..s {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i as u32);
    }
    groups.into_values().collect()
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let gazetteer = Gazetteer::builtin();
    let places = place_names(&gazetteer);
    for b in &cfg.blocks {
        if let Some(c) = b.countries.keys().find(|c| !places.contains_key(c)) {
            return Err(Error::InfeasibleSynth(format!(
                "block {:?}: no builtin place name for country {c}",
                b.name
            )));
        }
    }

    let mut rng = rng::seeded(cfg.seed);
    let n_users = cfg.user_count();
    let width = n_users.to_string().len().max(6);
    let user_ids: Vec<String> = (0..n_users).map(|i| format!("u{i:0width$}")).collect();
    let mut block_start = Vec::with_capacity(cfg.blocks.len());
    let mut user_block = Vec::with_capacity(n_users);
    for (b, spec) in cfg.blocks.iter().enumerate() {
        block_start.push(user_block.len());
        user_block.extend(std::iter::repeat_n(b as u32, spec.size));
    }

    let mut categories = BTreeMap::new();
    let mut locations: Vec<Option<String>> = Vec::with_capacity(n_users);
    for (b, spec) in cfg.blocks.iter().enumerate() {
        let cat_keys: Vec<Category> = spec.categories.keys().copied().collect();
        let cat_cdf = Cumulative::new(spec.categories.values().copied());
        let country_keys: Vec<CountryCode> = spec.countries.keys().copied().collect();
        let country_cdf = Cumulative::new(spec.countries.values().copied());
        for id in &user_ids[block_start[b]..block_start[b] + spec.size] {
            let cat = if cat_keys.is_empty() {
                Category::Other
            } else {
                cat_keys[cat_cdf.sample(&mut rng)]
            };
            categories.insert(id.clone(), cat);
            let located = !country_keys.is_empty() && rng.random::<f64>() < cfg.location_rate;
            locations.push(if located {
                let names = &places[&country_keys[country_cdf.sample(&mut rng)]];
                Some(names[rng.random_range(0..names.len())].clone())
            } else {
                None
            });
        }
    }

    let (t0, t1) = (cfg.start, cfg.end());
    let mut events = Vec::with_capacity(cfg.retweets + n_users * cfg.originals_per_user);
    for (u, id) in user_ids.iter().enumerate() {
        for k in 0..cfg.originals_per_user {
            let mut ev = TweetEvent::original(format!("t{id}_{k}"), id.clone(), rng.random_range(t0..t1));
            ev.raw_location = locations[u].clone();
            events.push(ev);
        }
    }

    let s = cfg.blocks.len();
    let popularity: Vec<Cumulative> = cfg.blocks.iter().map(|b| zipf(b.size, cfg.popularity_exponent)).collect();
    let tweet_popularity = zipf(cfg.originals_per_user, cfg.popularity_exponent);
    let bounds = cfg.segment_bounds();
    let cells: Vec<Cumulative> = cfg
        .segments
        .iter()
        .map(|seg| Cumulative::new(seg.rates.iter().flatten().copied()))
        .collect();
    let mut realized = vec![vec![vec![0u64; s]; s]; cfg.segments.len()];
    for r in 0..cfg.retweets {
        let ts = rng.random_range(t0..t1);
        let seg = bounds.partition_point(|&(start, _)| start <= ts) - 1;
        let cell = cells[seg].sample(&mut rng);
        let (i, j) = (cell / s, cell % s);
        let author = block_start[i] + popularity[i].sample(&mut rng);
        let retweeter = loop {
            let v = block_start[j] + rng.random_range(0..cfg.blocks[j].size);
            if v != author {
                break v;
            }
        };
        realized[seg][i][j] += 1;
        let k = tweet_popularity.sample(&mut rng);
        let mut ev = TweetEvent::retweet(
            format!("r{r:09}"),
            user_ids[retweeter].clone(),
            ts,
            user_ids[author].clone(),
            Some(format!("t{}_{k}", user_ids[author])),
        );
        ev.raw_location = locations[retweeter].clone();
        events.push(ev);
    }
    events.sort_unstable_by(|a, b| (a.timestamp, &a.tweet_id).cmp(&(b.timestamp, &b.tweet_id)));

    let span = (t1 - t0) as f64;
    let segments = cfg
        .segments
        .iter()
        .zip(&bounds)
        .zip(realized)
        .map(|((seg, &(start, end)), realized)| {
            let total: f64 = seg.rates.iter().flatten().sum();
            let n_seg = cfg.retweets as f64 * (end - start) as f64 / span;
            SegmentTruth {
                start,
                end,
                expected: seg
                    .rates
                    .iter()
                    .map(|row| row.iter().map(|&r| n_seg * r / total).collect())
                    .collect(),
                realized,
            }
        })
        .collect();

    Ok(SynthOutput {
        events,
        categories,
        truth: GroundTruth {
            block_names: cfg.blocks.iter().map(|b| b.name.clone()).collect(),
            user_block,
            user_ids,
            segments,
            block_groups: block_groups(cfg),
        },
    })
}

/// Stochastic block model: each pair in the same block is linked with
/// probability `p_in`, other pairs with `p_out`. Returns the graph and the
/// block of every node.
pub fn planted_partition(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<(SymmetricGraph, Vec<u32>)> {
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::InfeasibleSynth("edge probabilities must lie in [0, 1]".into()));
    }
    let n: usize = sizes.iter().sum();
    let mut truth = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(sizes.len());
    for (b, &s) in sizes.iter().enumerate() {
        starts.push(truth.len());
        truth.extend(std::iter::repeat_n(b as u32, s));
    }
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if truth[i] == truth[j] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((i as u32, j as u32, 1));
            }
        }
    }
    Ok((SymmetricGraph::from_edges(n, &edges)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_block_config(cross: f64) -> SynthConfig {
        SynthConfig {
            seed: 7,
            start: 1_578_873_600,
            days: 14,
            retweets: 2_000,
            originals_per_user: 2,
            popularity_exponent: 1.0,
            location_rate: 0.5,
            blocks: vec![
                BlockSpec {
                    name: "a".into(),
                    size: 40,
                    categories: [(Category::Science, 1.0), (Category::Other, 1.0)].into_iter().collect(),
                    countries: [("GB".parse().unwrap(), 1.0)].into_iter().collect(),
                },
                BlockSpec {
                    name: "b".into(),
                    size: 60,
                    categories: BTreeMap::new(),
                    countries: BTreeMap::new(),
                },
            ],
            segments: vec![Segment {
                start_day: 0.0,
                rates: vec![vec![1.0, cross], vec![cross, 1.0]],
            }],
        }
    }

    #[test]
    fn deterministic() {
        let cfg = two_block_config(0.1);
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.categories, b.categories);
        assert_eq!(a.truth, b.truth);
    }

    #[test]
    fn counts_match_config() {
        let cfg = two_block_config(0.1);
        let out = generate(&cfg).unwrap();
        let retweets = out.events.iter().filter(|e| e.is_retweet()).count();
        assert_eq!(retweets, 2_000);
        assert_eq!(out.events.len(), 2_000 + 100 * 2);
        assert!(out.events.iter().all(|e| !e.is_self_retweet()));
        assert!(out.events.iter().all(|e| e.timestamp >= cfg.start && e.timestamp < cfg.end()));
        let realized: u64 = out.truth.segments[0].realized.iter().flatten().sum();
        assert_eq!(realized, 2_000);
    }

    #[test]
    fn locations_resolve_to_block_country() {
        let out = generate(&two_block_config(0.0)).unwrap();
        let g = Gazetteer::builtin();
        let gb: CountryCode = "GB".parse().unwrap();
        for ev in &out.events {
            if let Some(loc) = &ev.raw_location {
                assert_eq!(g.resolve(loc), Some(gb), "{loc}");
            }
        }
        assert!(out.events.iter().any(|e| e.raw_location.is_some()));
    }

    #[test]
    fn zero_cross_rate_gives_separate_groups() {
        let out = generate(&two_block_config(0.0)).unwrap();
        assert_eq!(out.truth.block_groups, vec![vec![0], vec![1]]);
        let out = generate(&two_block_config(0.2)).unwrap();
        assert_eq!(out.truth.block_groups, vec![vec![0, 1]]);
    }

    #[test]
    fn infeasible_configs() {
        let mut cfg = two_block_config(0.0);
        cfg.segments[0].rates = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(matches!(generate(&cfg), Err(Error::InfeasibleSynth(_))));
        let mut cfg = two_block_config(0.0);
        cfg.blocks[0].countries = [("ZZ".parse().unwrap(), 1.0)].into_iter().collect();
        assert!(generate(&cfg).is_err());
        let mut cfg = two_block_config(0.0);
        cfg.segments[0].rates.pop();
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn config_parses_from_toml() {
        let text = r#"
seed = 1
start = "2020-01-13"
days = 7
retweets = 10

[[blocks]]
name = "x"
size = 3
categories = { "Science" = 1.0, "Political Supporter" = 2.0 }
countries = { "US" = 1.0 }

[[segments]]
start_day = 0.0
rates = [[1.0]]
"#;
        let cfg: SynthConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.start, 1_578_873_600);
        assert_eq!(cfg.originals_per_user, 3);
        assert_eq!(cfg.blocks[0].categories[&Category::PoliticalSupporter], 2.0);
        generate(&cfg).unwrap();
    }

    #[test]
    fn planted_partition_shape() {
        let (g, truth) = planted_partition(&[50, 50], 0.5, 0.0, 3).unwrap();
        assert_eq!(g.node_count(), 100);
        assert!(g.edges().all(|(u, v, _)| truth[u as usize] == truth[v as usize]));
        // 2 * C(50, 2) * 0.5 = 1225 expected edges
        let m = g.edge_count() as f64;
        assert!((m - 1225.0).abs() < 4.0 * (2450.0f64 * 0.25).sqrt(), "{m}");
    }
}
