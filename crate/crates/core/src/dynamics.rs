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

//! Windowed super-community mixing matrices and attention metrics.
//!
//! `w[i][j]` counts retweets of group `i`'s content by group `j`. `N_i` is
//! the number of distinct group-`i` users on either side of an in-window
//! retweet. Self-retweets are ignored throughout.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::RankedCommunities;
use crate::error::{Error, Result};
use crate::graph::NodeRegistry;
use crate::ingest::{EventKind, TweetEvent};
use crate::profile::SuperCommunityAssignment;
use crate::types::{SuperCommunity, TimeWindow};

pub const DAY: i64 = 86_400;
pub const WEEK: i64 = 7 * DAY;
/// Rolling "month": exactly four weeks.
pub const MONTH: i64 = 28 * DAY;

const S: usize = SuperCommunity::COUNT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSeries {
    pub windows: Vec<TimeWindow>,
    pub warnings: Vec<String>,
}

/// Windows `[t0 + k*step, t0 + k*step + width)` clipped to `period`, for
/// every start inside the period.
pub fn window_series(period: TimeWindow, width: i64, step: i64) -> Result<WindowSeries> {
    if width <= 0 || step <= 0 {
        return Err(Error::Config(format!("window width {width} and step {step} must be positive")));
    }
    if step > width {
        return Err(Error::Config(format!("window step {step} exceeds width {width}")));
    }
    let mut warnings = Vec::new();
    if width > period.len() {
        warnings.push(format!(
            "window width {width}s exceeds the {}s period; using one clipped window",
            period.len()
        ));
        return Ok(WindowSeries { windows: vec![period], warnings });
    }
    let mut windows = Vec::new();
    let mut start = period.start;
    while start < period.end {
        windows.push(TimeWindow { start, end: (start + width).min(period.end) });
        start += step;
    }
    Ok(WindowSeries { windows, warnings })
}

/// User id -> super-community. Unknown users fall back to `Other`.
#[derive(Debug, Clone, Default)]
pub struct GroupMap {
    groups: HashMap<String, SuperCommunity>,
}

impl GroupMap {
    pub fn new(groups: impl IntoIterator<Item = (String, SuperCommunity)>) -> Self {
        GroupMap { groups: groups.into_iter().collect() }
    }

    /// Every node of a ranked community gets its community's super-community.
    pub fn from_assignment(
        registry: &NodeRegistry,
        ranked: &RankedCommunities,
        assignment: &SuperCommunityAssignment,
    ) -> Result<Self> {
        let mut per_rank = Vec::with_capacity(ranked.communities.len());
        for c in &ranked.communities {
            per_rank.push(assignment.get(&c.label).ok_or_else(|| {
                Error::Config(format!("community {} has no super-community", c.label))
            })?);
        }
        Ok(GroupMap::new(ranked.node_rank.iter().enumerate().filter_map(|(v, r)| {
            r.map(|r| (registry.id(v as u32).to_string(), per_rank[r]))
        })))
    }

    pub fn get(&self, user: &str) -> Option<SuperCommunity> {
        self.groups.get(user).copied()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Retweet {
    ts: i64,
    author: u32,
    retweeter: u32,
}

/// Events resolved to interned users and groups, sorted by time.
#[derive(Debug, Clone)]
pub struct GroupedStream {
    user_group: Vec<u8>,
    retweets: Vec<Retweet>,
    /// `(ts, group)` of original tweets.
    originals: Vec<(i64, u8)>,
    /// `(ts, group)` of every post, originals and retweets.
    posts: Vec<(i64, u8)>,
    pub unmapped_users: usize,
    pub unmapped_retweets: u64,
}

impl GroupedStream {
    pub fn new(events: &[TweetEvent], map: &GroupMap) -> Self {
        let mut index: HashMap<&str, u32> = HashMap::new();
        let mut user_group: Vec<u8> = Vec::new();
        let mut mapped: Vec<bool> = Vec::new();
        fn intern<'a>(
            id: &'a str,
            map: &GroupMap,
            index: &mut HashMap<&'a str, u32>,
            user_group: &mut Vec<u8>,
            mapped: &mut Vec<bool>,
        ) -> u32 {
            let next = user_group.len() as u32;
            *index.entry(id).or_insert_with(|| {
                let g = map.get(id);
                mapped.push(g.is_some());
                user_group.push(g.unwrap_or(SuperCommunity::Other).index() as u8);
                next
            })
        }
        let mut retweets = Vec::new();
        let mut originals = Vec::new();
        let mut posts = Vec::with_capacity(events.len());
        let mut unmapped_retweets = 0;
        for ev in events {
            let author = intern(&ev.author_id, map, &mut index, &mut user_group, &mut mapped);
            posts.push((ev.timestamp, user_group[author as usize]));
            match ev.kind {
                EventKind::Original => originals.push((ev.timestamp, user_group[author as usize])),
                EventKind::Retweet => {
                    if ev.is_self_retweet() {
                        continue;
                    }
                    let Some(src) = ev.retweeted_author_id.as_deref() else { continue };
                    let src = intern(src, map, &mut index, &mut user_group, &mut mapped);
                    if !mapped[src as usize] || !mapped[author as usize] {
                        unmapped_retweets += 1;
                    }
                    retweets.push(Retweet { ts: ev.timestamp, author: src, retweeter: author });
                }
            }
        }
        retweets.sort_by_key(|r| r.ts);
        originals.sort_by_key(|o| o.0);
        posts.sort_by_key(|p| p.0);
        GroupedStream {
            unmapped_users: mapped.iter().filter(|&&m| !m).count(),
            user_group,
            retweets,
            originals,
            posts,
            unmapped_retweets,
        }
    }

    fn slice<T>(items: &[T], ts: impl Fn(&T) -> i64, w: TimeWindow) -> &[T] {
        let lo = items.partition_point(|x| ts(x) < w.start);
        let hi = items.partition_point(|x| ts(x) < w.end);
        &items[lo..hi]
    }

    pub fn mixing(&self, window: TimeWindow) -> MixingMatrix {
        let rts = Self::slice(&self.retweets, |r| r.ts, window);
        let mut w = vec![vec![0u64; S]; S];
        let mut users: Vec<u32> = Vec::with_capacity(2 * rts.len());
        for r in rts {
            let (i, j) = (self.user_group[r.author as usize], self.user_group[r.retweeter as usize]);
            w[i as usize][j as usize] += 1;
            users.push(r.author);
            users.push(r.retweeter);
        }
        users.sort_unstable();
        users.dedup();
        let mut n = vec![0u64; S];
        for u in users {
            n[self.user_group[u as usize] as usize] += 1;
        }
        MixingMatrix { window, total: rts.len() as u64, w, n }
    }

    fn group_counts(items: &[(i64, u8)], window: TimeWindow) -> Vec<u64> {
        let mut out = vec![0u64; S];
        for &(_, g) in Self::slice(items, |x| x.0, window) {
            out[g as usize] += 1;
        }
        out
    }

    pub fn originals(&self, window: TimeWindow) -> Vec<u64> {
        Self::group_counts(&self.originals, window)
    }

    pub fn posts(&self, window: TimeWindow) -> Vec<u64> {
        Self::group_counts(&self.posts, window)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingMatrix {
    pub window: TimeWindow,
    /// `w[i][j]`: retweets of group `i` by group `j`, indexed by
    /// [`SuperCommunity::index`].
    pub w: Vec<Vec<u64>>,
    pub n: Vec<u64>,
    pub total: u64,
}

impl MixingMatrix {
    pub fn row_sum(&self, i: usize) -> u64 {
        self.w[i].iter().sum()
    }

    /// Elementwise sum; the window becomes the covering span.
    pub fn add_counts(&self, other: &MixingMatrix) -> Vec<Vec<u64>> {
        self.w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect()
    }
}

/// Mixing matrix of the retweets in `window`.
pub fn mixing_matrix(events: &[TweetEvent], window: TimeWindow, map: &GroupMap) -> MixingMatrix {
    GroupedStream::new(events, map).mixing(window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionRow {
    pub window_start: i64,
    pub super_community: SuperCommunity,
    pub n: u64,
    /// Retweets received (row sum of `w`); `a_u` is exactly `received / n`.
    pub received: u64,
    /// Retweets received per active user.
    pub a_u: Option<f64>,
    /// Share of the group's received retweets coming from other groups.
    pub a_ext: Option<f64>,
    pub a_int: Option<f64>,
    /// Same numerators over the window total `W`.
    pub a_ext_global: Option<f64>,
    pub a_int_global: Option<f64>,
    /// Original tweets per active user.
    pub activity: Option<f64>,
    /// All posts (originals and retweets) per active user.
    pub activity_all_posts: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn attention_metrics(m: &MixingMatrix, originals: &[u64], posts: &[u64]) -> Vec<AttentionRow> {
    SuperCommunity::ALL
        .iter()
        .map(|&g| {
            let i = g.index();
            let row = m.row_sum(i);
            let internal = m.w[i][i];
            let external = row - internal;
            AttentionRow {
                window_start: m.window.start,
                super_community: g,
                n: m.n[i],
                received: row,
                a_u: ratio(row, m.n[i]),
                a_ext: ratio(external, row),
                a_int: ratio(internal, row),
                a_ext_global: ratio(external, m.total),
                a_int_global: ratio(internal, m.total),
                activity: ratio(originals[i], m.n[i]),
                activity_all_posts: ratio(posts[i], m.n[i]),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub mixing: MixingMatrix,
    pub rows: Vec<AttentionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub windows: Vec<WindowResult>,
    pub unmapped_users: usize,
    pub unmapped_retweets: u64,
    pub warnings: Vec<String>,
}

/// Metrics for every window, computed in parallel.
pub fn run_dynamics(stream: &GroupedStream, windows: &WindowSeries) -> DynamicsReport {
    let results = windows
        .windows
        .par_iter()
        .map(|&w| {
            let mixing = stream.mixing(w);
            let rows = attention_metrics(&mixing, &stream.originals(w), &stream.posts(w));
            WindowResult { mixing, rows }
        })
        .collect();
    let mut warnings = windows.warnings.clone();
    if stream.unmapped_users > 0 {
        warnings.push(format!(
            "{} users outside the community map routed to Other ({} retweets touch them)",
            stream.unmapped_users, stream.unmapped_retweets
        ));
    }
    DynamicsReport {
        windows: results,
        unmapped_users: stream.unmapped_users,
        unmapped_retweets: stream.unmapped_retweets,
        warnings,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Long CSV `window_start,super_community,N,A_u,a_ext,a_int,activity`;
/// undefined values are empty.
pub fn write_attention_csv<W: Write>(report: &DynamicsReport, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["window_start", "super_community", "N", "A_u", "a_ext", "a_int", "activity"])?;
    for r in report.windows.iter().flat_map(|w| &w.rows) {
        wtr.write_record([
            r.window_start.to_string(),
            r.super_community.name().to_string(),
            r.n.to_string(),
            opt(r.a_u),
            opt(r.a_ext),
            opt(r.a_int),
            opt(r.activity),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
