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

//! Domain vocabulary shared by every stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Occupational / account-type label attached to a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    AdultContent,
    ArtsEntertainment,
    Business,
    Healthcare,
    Media,
    Ngo,
    PoliticalSupporter,
    GovernmentPolitics,
    PublicServices,
    Religion,
    Science,
    Sports,
    Other,
}

impl Category {
    pub const COUNT: usize = 13;

    pub const ALL: [Category; Self::COUNT] = [
        Category::AdultContent,
        Category::ArtsEntertainment,
        Category::Business,
        Category::Healthcare,
        Category::Media,
        Category::Ngo,
        Category::PoliticalSupporter,
        Category::GovernmentPolitics,
        Category::PublicServices,
        Category::Religion,
        Category::Science,
        Category::Sports,
        Category::Other,
    ];

    /// The six categories that feed super-community clustering.
    pub const OF_INTEREST: [Category; 6] = [
        Category::Science,
        Category::Healthcare,
        Category::Media,
        Category::GovernmentPolitics,
        Category::PublicServices,
        Category::PoliticalSupporter,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::AdultContent => "Adult content",
            Category::ArtsEntertainment => "Arts & Entertainment",
            Category::Business => "Business",
            Category::Healthcare => "Healthcare",
            Category::Media => "Media",
            Category::Ngo => "NGO",
            Category::PoliticalSupporter => "Political Supporter",
            Category::GovernmentPolitics => "Government & Politics",
            Category::PublicServices => "Public Services",
            Category::Religion => "Religion",
            Category::Science => "Science",
            Category::Sports => "Sports",
            Category::Other => "Other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// ISO 3166-1 alpha-2 code, stored uppercase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    pub fn as_str(&self) -> &str {
        // Constructed only from ASCII letters.
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.trim().as_bytes();
        if b.len() != 2 || !b.iter().all(u8::is_ascii_alphabetic) {
            return Err(Error::InvalidCountry(s.to_string()));
        }
        Ok(CountryCode([b[0].to_ascii_uppercase(), b[1].to_ascii_uppercase()]))
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Half-open UTC interval `[start, end)` in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> crate::Result<Self> {
        if start >= end {
            return Err(Error::Config(format!("empty time window [{start}, {end})")));
        }
        Ok(TimeWindow { start, end })
    }

    pub fn contains(&self, ts: i64) -> bool {
        self.start <= ts && ts < self.end
    }

    pub fn len(&self) -> i64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Named group of communities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SuperCommunity {
    InternationalSciHealth,
    NationalElite,
    Political,
    Other,
}

impl SuperCommunity {
    pub const COUNT: usize = 4;

    pub const ALL: [SuperCommunity; Self::COUNT] = [
        SuperCommunity::InternationalSciHealth,
        SuperCommunity::NationalElite,
        SuperCommunity::Political,
        SuperCommunity::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SuperCommunity::InternationalSciHealth => "InternationalSciHealth",
            SuperCommunity::NationalElite => "NationalElite",
            SuperCommunity::Political => "Political",
            SuperCommunity::Other => "Other",
        }
    }
}

impl fmt::Display for SuperCommunity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuperCommunity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SuperCommunity::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown super-community {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_labels_round_trip() {
        for c in Category::ALL {
            assert_eq!(c.label().parse::<Category>().unwrap(), c);
        }
        assert!("science".parse::<Category>().is_err());
        assert!("Politics & Government".parse::<Category>().is_err());
    }

    #[test]
    fn country_code_normalizes_case() {
        let c: CountryCode = "gb".parse().unwrap();
        assert_eq!(c.as_str(), "GB");
        assert!("GBR".parse::<CountryCode>().is_err());
        assert!("G1".parse::<CountryCode>().is_err());
    }
}
