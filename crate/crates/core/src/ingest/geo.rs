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

//! Country resolution from free-text profile locations.
//!
//! A [`Gazetteer`] is a list of token patterns. A location string is
//! lowercased and split on non-alphanumeric characters; every pattern that
//! occurs as a contiguous token run is a candidate, and the candidate with
//! the highest priority wins (then the longer pattern, then the earlier
//! entry).

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::events::TweetEvent;
use crate::types::CountryCode;

const BUILTIN_TSV: &str = include_str!("../../data/gazetteer.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub pattern: Vec<String>,
    pub country: CountryCode,
    pub priority: i32,
}

#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    by_first_token: HashMap<String, Vec<usize>>,
}

pub fn tokenize(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl Gazetteer {
    /// Fails on duplicate patterns, empty patterns, or a pattern whose
    /// priority does not exceed that of one of its proper prefixes.
    pub fn new(entries: Vec<GazetteerEntry>) -> Result<Self> {
        let mut index: HashMap<&[String], usize> = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.pattern.is_empty() {
                return Err(Error::Gazetteer(format!("entry {} has an empty pattern", i + 1)));
            }
            if index.insert(e.pattern.as_slice(), i).is_some() {
                return Err(Error::Gazetteer(format!(
                    "duplicate pattern {:?}",
                    e.pattern.join(" ")
                )));
            }
        }
        for e in &entries {
            for len in 1..e.pattern.len() {
                if let Some(&j) = index.get(&e.pattern[..len]) {
                    if entries[j].priority >= e.priority {
                        return Err(Error::Gazetteer(format!(
                            "pattern {:?} (priority {}) must outrank its prefix {:?} (priority {})",
                            e.pattern.join(" "),
                            e.priority,
                            entries[j].pattern.join(" "),
                            entries[j].priority
                        )));
                    }
                }
            }
        }
        let mut by_first_token: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_first_token.entry(e.pattern[0].clone()).or_default().push(i);
        }
        Ok(Gazetteer {
            entries,
            by_first_token,
        })
    }

    /// `pattern<TAB>country<TAB>priority` lines; `#` starts a comment line.
    pub fn from_tsv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        Self::parse_tsv(&text)
    }

    fn parse_tsv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                context: "gazetteer".into(),
                line: i + 1,
                message,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(err(format!("expected 3 tab-separated columns, got {}", cols.len())));
            }
            let pattern = tokenize(cols[0]);
            let country = cols[1].parse().map_err(|e: Error| err(e.to_string()))?;
            let priority = cols[2]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad priority {:?}", cols[2])))?;
            entries.push(GazetteerEntry {
                pattern,
                country,
                priority,
            });
        }
        Self::new(entries)
    }

    /// Country names, demonyms, a few unambiguous abbreviations and major cities.
    pub fn builtin() -> Self {
        Self::parse_tsv(BUILTIN_TSV).expect("builtin gazetteer is valid")
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn resolve(&self, raw_location: &str) -> Option<CountryCode> {
        let tokens = tokenize(raw_location);
        let mut best: Option<usize> = None;
        for start in 0..tokens.len() {
            let Some(candidates) = self.by_first_token.get(&tokens[start]) else {
                continue;
            };
            for &i in candidates {
                let e = &self.entries[i];
                let end = start + e.pattern.len();
                if end > tokens.len() || tokens[start..end] != e.pattern[..] {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        let cur = &self.entries[b];
                        (e.priority, e.pattern.len(), std::cmp::Reverse(i))
                            > (cur.priority, cur.pattern.len(), std::cmp::Reverse(b))
                    }
                };
                if better {
                    best = Some(i);
                }
            }
        }
        best.map(|i| self.entries[i].country)
    }
}

pub fn resolve_country(raw_location: &str, gazetteer: &Gazetteer) -> Option<CountryCode> {
    gazetteer.resolve(raw_location)
}

/// Resolved-location tallies for one user, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserGeo {
    pub tallies: Vec<(CountryCode, u32)>,
}

impl UserGeo {
    fn add(&mut self, c: CountryCode) {
        match self.tallies.iter_mut().find(|(k, _)| *k == c) {
            Some((_, n)) => *n += 1,
            None => self.tallies.push((c, 1)),
        }
    }

    /// Mode of the tallies; ties go to the country seen first.
    pub fn majority(&self) -> Option<CountryCode> {
        let mut best: Option<(CountryCode, u32)> = None;
        for &(c, n) in &self.tallies {
            if best.is_none_or(|(_, m)| n > m) {
                best = Some((c, n));
            }
        }
        best.map(|(c, _)| c)
    }

    pub fn resolved_tweets(&self) -> u32 {
        self.tallies.iter().map(|(_, n)| n).sum()
    }
}

/// Per-user geo tallies for every event author.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GeoTable {
    pub users: BTreeMap<String, UserGeo>,
}

impl GeoTable {
    pub fn countries(&self) -> BTreeMap<String, Option<CountryCode>> {
        self.users
            .iter()
            .map(|(u, g)| (u.clone(), g.majority()))
            .collect()
    }

    pub fn country(&self, user: &str) -> Option<CountryCode> {
        self.users.get(user).and_then(UserGeo::majority)
    }
}

/// Tally resolved locations per author in event order (events are expected
/// time-sorted, so "first seen" is "earliest").
pub fn geo_table(events: &[TweetEvent], gazetteer: &Gazetteer) -> GeoTable {
    let mut table = GeoTable::default();
    for ev in events {
        let entry = table.users.entry(ev.author_id.clone()).or_default();
        if let Some(c) = ev.raw_location.as_deref().and_then(|l| gazetteer.resolve(l)) {
            entry.add(c);
        }
    }
    table
}

/// Majority country per author; `None` when none of their locations resolve.
pub fn assign_user_countries(
    events: &[TweetEvent],
    gazetteer: &Gazetteer,
) -> BTreeMap<String, Option<CountryCode>> {
    geo_table(events, gazetteer).countries()
}
