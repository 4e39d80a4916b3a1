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

//! Sustained attention: retweet h-index, top-user cohorts, competition
//! ranks and bootstrap intervals over rolling windows.
//!
//! Retweets are attributed to the retweeted tweet id. Retweets without one
//! land in a per-author "unknown" pseudo-tweet and are counted in
//! [`RetweetLog::unknown_tweet_retweets`]. Rolling windows select retweets by
//! the retweet's own timestamp.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GroupMap, WindowSeries};
use crate::error::{Error, Result};
use crate::ingest::TweetEvent;
use crate::rng;
use crate::types::{SuperCommunity, TimeWindow};

/// Largest `h` such that at least `h` counts are `>= h`.
pub fn h_index(counts: &[u64]) -> u64 {
    let n = counts.len();
    let mut buckets = vec![0usize; n + 1];
    for &c in counts {
        buckets[(c as usize).min(n)] += 1;
    }
    let mut at_least = 0;
    for h in (1..=n).rev() {
        at_least += buckets[h];
        if at_least >= h {
            return h as u64;
        }
    }
    0
}

/// Competition ranks, highest value first: `[10, 10, 5] -> [1, 1, 3]`.
pub fn competition_ranks(values: &[u64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].cmp(&values[a]));
    let mut ranks = vec![0u32; values.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = if pos > 0 && values[order[pos - 1]] == values[i] {
            ranks[order[pos - 1]]
        } else {
            pos as u32 + 1
        };
    }
    ranks
}

/// Retweet events keyed by retweeted tweet, sorted by time.
#[derive(Debug, Clone)]
pub struct RetweetLog {
    /// Retweeted authors.
    pub users: Vec<String>,
    pub groups: Vec<SuperCommunity>,
    tweet_owner: Vec<u32>,
    events: Vec<(i64, u32)>,
    pub unknown_tweet_retweets: u64,
    pub total_retweets: u64,
}

impl RetweetLog {
    pub fn new(events: &[TweetEvent], map: &GroupMap) -> Self {
        let mut user_index: HashMap<&str, u32> = HashMap::new();
        let mut tweet_index: HashMap<(u32, &str), u32> = HashMap::new();
        let mut users = Vec::new();
        let mut tweet_owner = Vec::new();
        let mut out = Vec::new();
        let mut unknown = 0;
        for ev in events.iter().filter(|e| e.is_retweet() && !e.is_self_retweet()) {
            let Some(author) = ev.retweeted_author_id.as_deref() else { continue };
            let next = users.len() as u32;
            let u = *user_index.entry(author).or_insert_with(|| {
                users.push(author.to_string());
                next
            });
            // Parsed ids are never empty, so "" is free to mark the unknown bucket.
            let key = ev.retweeted_tweet_id.as_deref().unwrap_or("");
            if key.is_empty() {
                unknown += 1;
            }
            let next = tweet_owner.len() as u32;
            let t = *tweet_index.entry((u, key)).or_insert_with(|| {
                tweet_owner.push(u);
                next
            });
            out.push((ev.timestamp, t));
        }
        out.sort_by_key(|e| e.0);
        let groups = users.iter().map(|u| map.get(u).unwrap_or(SuperCommunity::Other)).collect();
        RetweetLog {
            users,
            groups,
            tweet_owner,
            total_retweets: out.len() as u64,
            events: out,
            unknown_tweet_retweets: unknown,
        }
    }

    fn tweets_by_user(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.users.len()];
        for (t, &u) in self.tweet_owner.iter().enumerate() {
            out[u as usize].push(t as u32);
        }
        out
    }

    /// Per-tweet retweet counts, restricted to `window` and to tweets owned
    /// by users with `keep[owner]`.
    fn tweet_counts(&self, window: Option<TimeWindow>, keep: Option<&[bool]>) -> Vec<u64> {
        let slice = match window {
            Some(w) => {
                let lo = self.events.partition_point(|e| e.0 < w.start);
                let hi = self.events.partition_point(|e| e.0 < w.end);
                &self.events[lo..hi]
            }
            None => &self.events[..],
        };
        let mut counts = vec![0u64; self.tweet_owner.len()];
        for &(_, t) in slice {
            if keep.is_none_or(|k| k[self.tweet_owner[t as usize] as usize]) {
                counts[t as usize] += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAttentionRecord {
    pub user_id: String,
    pub super_community: SuperCommunity,
    pub retweets_received: u64,
    pub h_index: u64,
    pub tweets_retweeted: u64,
    pub max_tweet_retweets: u64,
}

fn summarize(tweets: &[u32], counts: &[u64], buf: &mut Vec<u64>) -> (u64, u64, u64, u64) {
    buf.clear();
    buf.extend(tweets.iter().map(|&t| counts[t as usize]));
    let total = buf.iter().sum();
    let nonzero = buf.iter().filter(|&&c| c > 0).count() as u64;
    let max = buf.iter().copied().max().unwrap_or(0);
    (total, h_index(buf), nonzero, max)
}

/// Full-period record for every retweeted author, in log order.
pub fn attention_records(log: &RetweetLog) -> Vec<UserAttentionRecord> {
    let counts = log.tweet_counts(None, None);
    let mut buf = Vec::new();
    log.tweets_by_user()
        .iter()
        .enumerate()
        .map(|(u, tweets)| {
            let (retweets, h, nonzero, max) = summarize(tweets, &counts, &mut buf);
            UserAttentionRecord {
                user_id: log.users[u].clone(),
                super_community: log.groups[u],
                retweets_received: retweets,
                h_index: h,
                tweets_retweeted: nonzero,
                max_tweet_retweets: max,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    /// Indices into the records / log users, grouped by super-community.
    pub members: Vec<u32>,
    pub records: Vec<UserAttentionRecord>,
    pub retweet_share: f64,
    pub warnings: Vec<String>,
}

/// Top `k` users per super-community by retweets received, then h-index,
/// then user id.
pub fn select_top_users(records: &[UserAttentionRecord], k: usize) -> Cohort {
    let mut by_group: Vec<Vec<u32>> = vec![Vec::new(); SuperCommunity::COUNT];
    for (i, r) in records.iter().enumerate() {
        by_group[r.super_community.index()].push(i as u32);
    }
    let mut members = Vec::new();
    let mut warnings = Vec::new();
    for (g, idx) in by_group.iter_mut().enumerate() {
        idx.sort_by(|&a, &b| {
            let (ra, rb) = (&records[a as usize], &records[b as usize]);
            rb.retweets_received
                .cmp(&ra.retweets_received)
                .then(rb.h_index.cmp(&ra.h_index))
                .then(ra.user_id.cmp(&rb.user_id))
        });
        if idx.len() < k {
            warnings.push(format!(
                "{} has {} retweeted users, fewer than {k}; taking all",
                SuperCommunity::ALL[g],
                idx.len()
            ));
        }
        members.extend(idx.iter().take(k));
    }
    let total: u64 = records.iter().map(|r| r.retweets_received).sum();
    let held: u64 = members.iter().map(|&i| records[i as usize].retweets_received).sum();
    Cohort {
        records: members.iter().map(|&i| records[i as usize].clone()).collect(),
        members,
        retweet_share: if total == 0 { 0.0 } else { held as f64 / total as f64 },
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Retweets,
    HIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub ranks: Vec<u32>,
    /// Indexed by [`SuperCommunity::index`]; `None` for groups absent from the cohort.
    pub mean_rank: Vec<Option<f64>>,
}

fn rank_table(values: &[u64], groups: &[SuperCommunity]) -> RankTable {
    let ranks = competition_ranks(values);
    let mut sum = [0u64; SuperCommunity::COUNT];
    let mut n = [0u64; SuperCommunity::COUNT];
    for (r, g) in ranks.iter().zip(groups) {
        sum[g.index()] += *r as u64;
        n[g.index()] += 1;
    }
    RankTable {
        ranks,
        mean_rank: (0..SuperCommunity::COUNT).map(|g| (n[g] > 0).then(|| sum[g] as f64 / n[g] as f64)).collect(),
    }
}

pub fn rank_cohort(cohort: &Cohort, metric: Metric) -> RankTable {
    let values: Vec<u64> = cohort
        .records
        .iter()
        .map(|r| match metric {
            Metric::Retweets => r.retweets_received,
            Metric::HIndex => r.h_index,
        })
        .collect();
    let groups: Vec<SuperCommunity> = cohort.records.iter().map(|r| r.super_community).collect();
    rank_table(&values, &groups)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { resamples: 1000, level: 0.95, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub warning: Option<String>,
}

/// Linear interpolation between order statistics of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap interval for the mean. Resample `b` draws from
/// `rng::substream(seed, b)`.
pub fn bootstrap_mean_rank(ranks: &[f64], cfg: &BootstrapConfig) -> Result<BootstrapCi> {
    if ranks.is_empty() {
        return Err(Error::TooFew { what: "ranks to bootstrap", needed: 1, got: 0 });
    }
    if cfg.resamples == 0 {
        return Err(Error::Config("bootstrap needs at least one resample".into()));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::Config(format!("confidence level {} outside (0, 1)", cfg.level)));
    }
    let n = ranks.len();
    let mean = ranks.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok(BootstrapCi {
            mean,
            lo: mean,
            hi: mean,
            warning: Some("singleton group; interval collapses to the point".into()),
        });
    }
    let mut means: Vec<f64> = (0..cfg.resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::substream(cfg.seed, b);
            (0..n).map(|_| ranks[rng.random_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - cfg.level) / 2.0;
    Ok(BootstrapCi { mean, lo: quantile(&means, tail), hi: quantile(&means, 1.0 - tail), warning: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub window_start: i64,
    pub super_community: SuperCommunity,
    pub r_rt: BootstrapCi,
    pub r_h: BootstrapCi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRanking {
    pub window: TimeWindow,
    /// Aligned with the cohort members.
    pub retweets: Vec<u64>,
    pub h_index: Vec<u64>,
    pub r_rt: RankTable,
    pub r_h: RankTable,
    pub rows: Vec<TrajectoryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub windows: Vec<WindowRanking>,
    /// Windows without any retweet of a cohort member.
    pub skipped: Vec<TimeWindow>,
    pub warnings: Vec<String>,
}

/// Per-window cohort metrics, ranks and bootstrap intervals. Cohort members
/// without in-window retweets score zero and share the last rank.
pub fn rolling_attention(
    log: &RetweetLog,
    cohort: &Cohort,
    windows: &WindowSeries,
    bootstrap: &BootstrapConfig,
) -> Result<Trajectory> {
    let mut keep = vec![false; log.users.len()];
    for &m in &cohort.members {
        keep[m as usize] = true;
    }
    let all_tweets = log.tweets_by_user();
    let tweets: Vec<&Vec<u32>> = cohort.members.iter().map(|&m| &all_tweets[m as usize]).collect();
    let groups: Vec<SuperCommunity> = cohort.records.iter().map(|r| r.super_community).collect();

    let per_window: Vec<Result<Option<WindowRanking>>> = windows
        .windows
        .par_iter()
        .enumerate()
        .map(|(wi, &w)| {
            let counts = log.tweet_counts(Some(w), Some(&keep));
            let mut buf = Vec::new();
            let (retweets, h_index): (Vec<u64>, Vec<u64>) = tweets
                .iter()
                .map(|t| {
                    let (total, h, _, _) = summarize(t, &counts, &mut buf);
                    (total, h)
                })
                .unzip();
            if retweets.iter().all(|&r| r == 0) {
                return Ok(None);
            }
            let r_rt = rank_table(&retweets, &groups);
            let r_h = rank_table(&h_index, &groups);
            let mut rows = Vec::new();
            for g in SuperCommunity::ALL {
                let pick = |t: &RankTable| -> Vec<f64> {
                    t.ranks.iter().zip(&groups).filter(|(_, &gg)| gg == g).map(|(&r, _)| r as f64).collect()
                };
                let (a, b) = (pick(&r_rt), pick(&r_h));
                if a.is_empty() {
                    continue;
                }
                let tag = (wi as u64) << 8 | (g.index() as u64) << 1;
                let ci = |ranks: &[f64], t: u64| {
                    bootstrap_mean_rank(ranks, &BootstrapConfig { seed: rng::derive(bootstrap.seed, t), ..bootstrap.clone() })
                };
                rows.push(TrajectoryRow { window_start: w.start, super_community: g, r_rt: ci(&a, tag)?, r_h: ci(&b, tag | 1)? });
            }
            Ok(Some(WindowRanking { window: w, retweets, h_index, r_rt, r_h, rows }))
        })
        .collect();

    let mut out = Trajectory { windows: Vec::new(), skipped: Vec::new(), warnings: Vec::new() };
    for (w, r) in windows.windows.iter().zip(per_window) {
        match r? {
            Some(ranking) => out.windows.push(ranking),
            None => out.skipped.push(*w),
        }
    }
    if !out.skipped.is_empty() {
        out.warnings.push(format!("{} windows without cohort retweets skipped", out.skipped.len()));
    }
    Ok(out)
}

/// CSV `user_id,super_community,retweets,h_index,r_rt,r_h`.
pub fn write_cohort_csv<W: Write>(cohort: &Cohort, w: W) -> Result<()> {
    let r_rt = rank_cohort(cohort, Metric::Retweets);
    let r_h = rank_cohort(cohort, Metric::HIndex);
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "super_community", "retweets", "h_index", "r_rt", "r_h"])?;
    for (i, r) in cohort.records.iter().enumerate() {
        wtr.write_record([
            r.user_id.clone(),
            r.super_community.name().to_string(),
            r.retweets_received.to_string(),
            r.h_index.to_string(),
            r_rt.ranks[i].to_string(),
            r_h.ranks[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// CSV `window_start,super_community,mean_r_rt,ci_lo,ci_hi,mean_r_h,ci_lo,ci_hi`.
pub fn write_trajectory_csv<W: Write>(t: &Trajectory, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["window_start", "super_community", "mean_r_rt", "ci_lo", "ci_hi", "mean_r_h", "ci_lo", "ci_hi"])?;
    for row in t.windows.iter().flat_map(|w| &w.rows) {
        wtr.write_record([
            row.window_start.to_string(),
            row.super_community.name().to_string(),
            row.r_rt.mean.to_string(),
            row.r_rt.lo.to_string(),
            row.r_rt.hi.to_string(),
            row.r_h.mean.to_string(),
            row.r_h.lo.to_string(),
            row.r_h.hi.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SuperCommunity::*;

    fn h_oracle(counts: &[u64]) -> u64 {
        (0..=counts.len() as u64)
            .filter(|&h| counts.iter().filter(|&&c| c >= h).count() as u64 >= h)
            .max()
            .unwrap()
    }

    #[test]
    fn h_index_examples() {
        assert_eq!(h_index(&[]), 0);
        assert_eq!(h_index(&[1]), 1);
        assert_eq!(h_index(&[0]), 0);
        assert_eq!(h_index(&[9, 7, 6, 2, 1]), 3);
        assert_eq!(h_index(&[9, 7, 6, 2, 1]), h_oracle(&[9, 7, 6, 2, 1]));
    }

    #[test]
    fn ranks() {
        assert_eq!(competition_ranks(&[10, 10, 5]), vec![1, 1, 3]);
        assert_eq!(competition_ranks(&[3, 9, 5]), vec![3, 1, 2]);
        assert_eq!(competition_ranks(&[]), Vec::<u32>::new());
    }

    fn rt(id: &str, who: &str, ts: i64, author: &str, tweet: Option<&str>) -> TweetEvent {
        TweetEvent::retweet(id, who, ts, author, tweet.map(String::from))
    }

    fn map() -> GroupMap {
        GroupMap::new([
            ("a".to_string(), Political),
            ("b".to_string(), Political),
            ("c".to_string(), Political),
            ("x".to_string(), NationalElite),
            ("y".to_string(), NationalElite),
            ("z".to_string(), NationalElite),
        ])
    }

    #[test]
    fn records_and_unknown_bucket() {
        let events = vec![
            rt("1", "b", 1, "a", Some("t1")),
            rt("2", "c", 2, "a", Some("t1")),
            rt("3", "x", 3, "a", Some("t2")),
            rt("4", "y", 4, "a", None),
            rt("5", "a", 5, "a", Some("t2")),
        ];
        let log = RetweetLog::new(&events, &map());
        assert_eq!(log.unknown_tweet_retweets, 1);
        assert_eq!(log.total_retweets, 4);
        let r = attention_records(&log);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].retweets_received, 4);
        assert_eq!(r[0].h_index, 1);
        assert_eq!(r[0].tweets_retweeted, 3);
        assert_eq!(r[0].max_tweet_retweets, 2);
    }

    fn record(id: &str, g: SuperCommunity, retweets: u64, h: u64) -> UserAttentionRecord {
        UserAttentionRecord {
            user_id: id.into(),
            super_community: g,
            retweets_received: retweets,
            h_index: h,
            tweets_retweeted: h,
            max_tweet_retweets: retweets,
        }
    }

    #[test]
    fn top_users_per_group() {
        let records = vec![
            record("a", Political, 10, 1),
            record("b", Political, 5, 1),
            record("c", Political, 5, 2),
            record("x", NationalElite, 7, 1),
            record("y", NationalElite, 1, 1),
            record("z", NationalElite, 3, 1),
        ];
        let c = select_top_users(&records, 2);
        let ids: Vec<&str> = c.records.iter().map(|r| r.user_id.as_str()).collect();
        assert_eq!(ids, vec!["x", "z", "a", "c"]);
        assert!((c.retweet_share - 25.0 / 31.0).abs() < 1e-15);
        // ISH and Other have no users
        assert_eq!(c.warnings.len(), 2);
    }

    #[test]
    fn mean_rank_by_group() {
        let records = vec![
            record("a", Political, 10, 3),
            record("b", Political, 10, 1),
            record("x", NationalElite, 7, 2),
        ];
        let c = select_top_users(&records, 5);
        let t = rank_cohort(&c, Metric::Retweets);
        assert_eq!(t.ranks, vec![3, 1, 1]);
        assert_eq!(t.mean_rank[Political.index()], Some(1.0));
        assert_eq!(t.mean_rank[NationalElite.index()], Some(3.0));
        assert_eq!(t.mean_rank[Other.index()], None);
        let t = rank_cohort(&c, Metric::HIndex);
        assert_eq!(t.ranks, vec![2, 1, 3]);
    }

    #[test]
    fn bootstrap_degenerate_cases() {
        let cfg = BootstrapConfig { resamples: 50, level: 0.95, seed: 1 };
        let ci = bootstrap_mean_rank(&[5.0, 5.0, 5.0], &cfg).unwrap();
        assert_eq!((ci.mean, ci.lo, ci.hi), (5.0, 5.0, 5.0));
        let single = bootstrap_mean_rank(&[2.0], &cfg).unwrap();
        assert_eq!((single.lo, single.hi), (2.0, 2.0));
        assert!(single.warning.is_some());

        let data = [1.0, 2.0, 3.0, 10.0];
        let one = bootstrap_mean_rank(&data, &BootstrapConfig { resamples: 1, ..cfg.clone() }).unwrap();
        let mut rng = rng::substream(cfg.seed, 0);
        let resample: f64 = (0..4).map(|_| data[rng.random_range(0..4)]).sum::<f64>() / 4.0;
        assert_eq!((one.lo, one.hi), (resample, resample));

        assert!(bootstrap_mean_rank(&[], &cfg).is_err());
        assert!(bootstrap_mean_rank(&data, &BootstrapConfig { level: 1.0, ..cfg.clone() }).is_err());
        assert_eq!(bootstrap_mean_rank(&data, &cfg).unwrap(), bootstrap_mean_rank(&data, &cfg).unwrap());
    }

    #[test]
    fn bootstrap_matches_normal_approximation() {
        let mut rng = rng::seeded(99);
        let ranks: Vec<f64> = (0..100).map(|_| rng.random_range(1..=400) as f64).collect();
        let ci = bootstrap_mean_rank(&ranks, &BootstrapConfig { resamples: 10_000, level: 0.95, seed: 5 }).unwrap();
        let n = ranks.len() as f64;
        let mean = ranks.iter().sum::<f64>() / n;
        // Plug-in SE, as the bootstrap resamples the empirical distribution.
        let sd = (ranks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
        let (lo, hi) = (mean - 1.96 * sd / n.sqrt(), mean + 1.96 * sd / n.sqrt());
        assert!((ci.lo - lo).abs() / lo < 0.05, "{} vs {lo}", ci.lo);
        assert!((ci.hi - hi).abs() / hi < 0.05, "{} vs {hi}", ci.hi);
        assert!(ci.lo <= mean && mean <= ci.hi);
    }

    #[test]
    fn rolling_zero_activity_ranks_last() {
        let day = 86_400;
        let events = vec![
            rt("1", "x", 1, "a", Some("t1")),
            rt("2", "y", 2, "a", Some("t1")),
            rt("3", "x", 3, "b", Some("t2")),
            rt("4", "y", day + 1, "c", Some("t3")),
        ];
        let log = RetweetLog::new(&events, &map());
        let cohort = select_top_users(&attention_records(&log), 10);
        let windows = WindowSeries {
            windows: vec![
                TimeWindow::new(0, day).unwrap(),
                TimeWindow::new(day, 2 * day).unwrap(),
                TimeWindow::new(2 * day, 3 * day).unwrap(),
            ],
            warnings: Vec::new(),
        };
        let t = rolling_attention(&log, &cohort, &windows, &BootstrapConfig::default()).unwrap();
        assert_eq!(t.skipped, vec![windows.windows[2]]);
        let ids: Vec<&str> = cohort.records.iter().map(|r| r.user_id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
        assert_eq!(t.windows[0].retweets, vec![2, 1, 0]);
        assert_eq!(t.windows[0].r_rt.ranks, vec![1, 2, 3]);
        assert_eq!(t.windows[1].retweets, vec![0, 0, 1]);
        assert_eq!(t.windows[1].r_rt.ranks, vec![2, 2, 1]);
    }

    fn stream(seed: u64) -> Vec<TweetEvent> {
        let mut rng = rng::seeded(seed);
        let users = ["a", "b", "c", "x", "y", "z"];
        (0..400)
            .map(|k| {
                let a = users[rng.random_range(0..6)];
                let t = format!("{a}{}", rng.random_range(0..5));
                rt(&k.to_string(), users[rng.random_range(0..6)], rng.random_range(0..100), a, Some(&t))
            })
            .collect()
    }

    proptest! {
        #[test]
        fn h_index_oracle(counts in prop::collection::vec(0u64..50, 0..60)) {
            prop_assert_eq!(h_index(&counts), h_oracle(&counts));
        }

        #[test]
        fn h_index_bounds_and_monotone(counts in prop::collection::vec(0u64..1000, 1..60), bump in any::<prop::sample::Index>()) {
            let h = h_index(&counts);
            prop_assert!(h <= counts.len() as u64);
            prop_assert!(h <= *counts.iter().max().unwrap());
            prop_assert!(h <= counts.iter().filter(|&&c| c > 0).count() as u64);
            let mut more = counts.clone();
            more[bump.index(counts.len())] += 1;
            prop_assert!(h_index(&more) >= h);
        }

        #[test]
        fn ranks_follow_competition_arithmetic(values in prop::collection::vec(0u64..20, 1..50)) {
            let r = competition_ranks(&values);
            prop_assert!(r.contains(&1));
            for (i, &ri) in r.iter().enumerate() {
                let above = values.iter().filter(|&&v| v > values[i]).count() as u32;
                prop_assert_eq!(ri, above + 1);
            }
        }

        #[test]
        fn window_h_never_exceeds_full(seed in any::<u64>(), start in 0i64..90, len in 1i64..50) {
            let log = RetweetLog::new(&stream(seed), &map());
            let records = attention_records(&log);
            let cohort = select_top_users(&records, 3);
            let windows = WindowSeries { windows: vec![TimeWindow::new(start, start + len).unwrap()], warnings: vec![] };
            let t = rolling_attention(&log, &cohort, &windows, &BootstrapConfig { resamples: 20, ..Default::default() }).unwrap();
            for w in &t.windows {
                for (i, r) in cohort.records.iter().enumerate() {
                    prop_assert!(w.h_index[i] <= r.h_index);
                    prop_assert!(w.retweets[i] <= r.retweets_received);
                }
            }
        }
    }
}
