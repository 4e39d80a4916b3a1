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

//! JSONL event stream parsing.
//!
//! One object per line:
//!
//! ```text
//! {"id":"1","author_id":"a","ts":"2020-01-13T10:00:00Z","kind":"retweet","rt_author_id":"b","rt_id":"9","loc":"London"}
//! ```
//!
//! `ts` is either epoch seconds (number or digit string) or ISO-8601.
//! Whitespace-only lines are ignored and do not count as input lines.

use std::collections::HashSet;
use std::io::Write;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::TimeWindow;

pub type Timestamp = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    #[serde(rename = "tweet")]
    Original,
    Retweet,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TweetEvent {
    pub tweet_id: String,
    pub author_id: String,
    pub timestamp: Timestamp,
    pub kind: EventKind,
    pub retweeted_author_id: Option<String>,
    pub retweeted_tweet_id: Option<String>,
    pub raw_location: Option<String>,
}

impl TweetEvent {
    pub fn original(id: impl Into<String>, author: impl Into<String>, ts: Timestamp) -> Self {
        TweetEvent {
            tweet_id: id.into(),
            author_id: author.into(),
            timestamp: ts,
            kind: EventKind::Original,
            retweeted_author_id: None,
            retweeted_tweet_id: None,
            raw_location: None,
        }
    }

    pub fn retweet(
        id: impl Into<String>,
        author: impl Into<String>,
        ts: Timestamp,
        retweeted_author: impl Into<String>,
        retweeted_tweet: Option<String>,
    ) -> Self {
        TweetEvent {
            tweet_id: id.into(),
            author_id: author.into(),
            timestamp: ts,
            kind: EventKind::Retweet,
            retweeted_author_id: Some(retweeted_author.into()),
            retweeted_tweet_id: retweeted_tweet,
            raw_location: None,
        }
    }

    pub fn with_location(mut self, loc: impl Into<String>) -> Self {
        self.raw_location = Some(loc.into());
        self
    }

    pub fn is_retweet(&self) -> bool {
        self.kind == EventKind::Retweet
    }

    /// Retweet whose retweeted author is the retweeter.
    pub fn is_self_retweet(&self) -> bool {
        self.is_retweet() && self.retweeted_author_id.as_deref() == Some(self.author_id.as_str())
    }
}

/// Accounting for one parse. `events + malformed + out_of_window + duplicates == lines`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines: usize,
    pub events: usize,
    pub retweets: usize,
    pub originals: usize,
    pub self_retweets: usize,
    pub malformed: usize,
    pub out_of_window: usize,
    pub duplicates: usize,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn is_balanced(&self) -> bool {
        self.events + self.malformed + self.out_of_window + self.duplicates == self.lines
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawId {
    Str(String),
    Int(u64),
}

impl RawId {
    fn into_string(self) -> String {
        match self {
            RawId::Str(s) => s,
            RawId::Int(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTs {
    Int(i64),
    Float(f64),
    Str(String),
}

#[derive(Deserialize)]
struct RawEvent {
    id: RawId,
    author_id: RawId,
    ts: RawTs,
    kind: String,
    #[serde(default)]
    rt_author_id: Option<RawId>,
    #[serde(default)]
    rt_id: Option<RawId>,
    #[serde(default)]
    loc: Option<String>,
}

#[derive(Serialize)]
struct OutEvent<'a> {
    id: &'a str,
    author_id: &'a str,
    ts: Timestamp,
    kind: EventKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    rt_author_id: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rt_id: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loc: Option<&'a str>,
}

/// Epoch seconds, or an ISO-8601 date / date-time (UTC when no offset is given).
pub fn parse_timestamp(s: &str) -> Result<Timestamp> {
    let s = s.trim();
    if let Ok(n) = s.parse::<i64>() {
        return Ok(n);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp());
    }
    Err(Error::InvalidTimestamp(s.to_string()))
}

fn non_empty(id: RawId, field: &str) -> std::result::Result<String, String> {
    let s = id.into_string();
    if s.is_empty() {
        Err(format!("empty {field}"))
    } else {
        Ok(s)
    }
}

fn parse_line(line: &[u8]) -> std::result::Result<TweetEvent, String> {
    let raw: RawEvent = serde_json::from_slice(line).map_err(|e| e.to_string())?;
    let timestamp = match raw.ts {
        RawTs::Int(n) => n,
        RawTs::Float(f) if f.is_finite() && f.fract() == 0.0 => f as i64,
        RawTs::Float(f) => return Err(format!("non-integral timestamp {f}")),
        RawTs::Str(s) => parse_timestamp(&s).map_err(|e| e.to_string())?,
    };
    let kind = match raw.kind.as_str() {
        "tweet" => EventKind::Original,
        "retweet" => EventKind::Retweet,
        other => return Err(format!("unknown kind {other:?}")),
    };
    let retweeted_author_id = raw.rt_author_id.map(|id| non_empty(id, "rt_author_id")).transpose()?;
    match (kind, &retweeted_author_id) {
        (EventKind::Retweet, None) => return Err("retweet without rt_author_id".into()),
        (EventKind::Original, Some(_)) => return Err("original tweet carries rt_author_id".into()),
        _ => {}
    }
    Ok(TweetEvent {
        tweet_id: non_empty(raw.id, "id")?,
        author_id: non_empty(raw.author_id, "author_id")?,
        timestamp,
        kind,
        retweeted_author_id,
        retweeted_tweet_id: raw.rt_id.map(RawId::into_string).filter(|s| !s.is_empty()),
        raw_location: raw.loc.filter(|s| !s.trim().is_empty()),
    })
}

fn split_lines(stream: &[u8]) -> impl Iterator<Item = &[u8]> {
    stream
        .split(|&b| b == b'\n')
        .map(|l| l.strip_suffix(b"\r").unwrap_or(l))
        .filter(|l| !l.iter().all(u8::is_ascii_whitespace))
}

/// Parse one JSONL stream. See [`parse_streams`].
pub fn parse_events(stream: &[u8], window: TimeWindow) -> (Vec<TweetEvent>, IngestReport) {
    parse_streams(&[stream], window)
}

/// Parse several JSONL streams as one logical input.
///
/// Lines are parsed in parallel; the merge is sequential in input order, so
/// the first occurrence of a tweet id wins regardless of thread count. The
/// output is sorted by `(timestamp, tweet_id)`.
pub fn parse_streams(streams: &[&[u8]], window: TimeWindow) -> (Vec<TweetEvent>, IngestReport) {
    let lines: Vec<&[u8]> = streams.iter().flat_map(|s| split_lines(s)).collect();
    let parsed: Vec<std::result::Result<TweetEvent, String>> =
        lines.par_iter().map(|l| parse_line(l)).collect();

    let mut report = IngestReport {
        lines: lines.len(),
        ..Default::default()
    };
    let mut seen: HashSet<String> = HashSet::with_capacity(parsed.len());
    let mut events = Vec::with_capacity(parsed.len());
    let mut first_error: Option<(usize, String)> = None;
    for (i, p) in parsed.into_iter().enumerate() {
        match p {
            Err(e) => {
                report.malformed += 1;
                if first_error.is_none() {
                    first_error = Some((i + 1, e));
                }
            }
            Ok(ev) if !window.contains(ev.timestamp) => report.out_of_window += 1,
            Ok(ev) => {
                if seen.contains(&ev.tweet_id) {
                    report.duplicates += 1;
                } else {
                    seen.insert(ev.tweet_id.clone());
                    events.push(ev);
                }
            }
        }
    }
    events.par_sort_unstable_by(|a, b| {
        (a.timestamp, a.tweet_id.as_str()).cmp(&(b.timestamp, b.tweet_id.as_str()))
    });

    report.events = events.len();
    for ev in &events {
        match ev.kind {
            EventKind::Retweet => report.retweets += 1,
            EventKind::Original => report.originals += 1,
        }
        if ev.is_self_retweet() {
            report.self_retweets += 1;
        }
    }
    if let Some((line, msg)) = first_error {
        report
            .warnings
            .push(format!("{} malformed lines; first at line {line}: {msg}", report.malformed));
    }
    if events.is_empty() && report.lines > 0 {
        report
            .warnings
            .push(format!("no events survived parsing out of {} input lines", report.lines));
    }
    (events, report)
}

/// Serialize events in the input schema with `ts` as epoch seconds.
pub fn write_events<W: Write>(events: &[TweetEvent], mut w: W) -> Result<()> {
    for ev in events {
        let out = OutEvent {
            id: &ev.tweet_id,
            author_id: &ev.author_id,
            ts: ev.timestamp,
            kind: ev.kind,
            rt_author_id: ev.retweeted_author_id.as_deref(),
            rt_id: ev.retweeted_tweet_id.as_deref(),
            loc: ev.raw_location.as_deref(),
        };
        serde_json::to_writer(&mut w, &out)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
