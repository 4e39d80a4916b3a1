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

//! Community composition, standardized features and super-communities.

mod naming;
mod ward;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::community::RankedCommunities;
use crate::error::{Error, Result};
use crate::graph::{NodeRegistry, RetweetGraph};
use crate::ingest::{GeoTable, UserTable};
use crate::types::{Category, CountryCode};

pub use naming::{
    assign_super_communities, read_super_community_map, write_super_community_map, ClusterNaming, Condition,
    Op, Rule, Rulebook, SplitRule, SuperCommunityAssignment,
};
pub use ward::{knee_point, ward_cluster, Dendrogram, Knee, Merge};

/// What a community's country distribution counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMode {
    /// One vote per member with a known (majority) country.
    #[default]
    Users,
    /// One vote per located tweet authored by a member.
    Tweets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityProfile {
    pub label: String,
    pub size: usize,
    /// Indexed by [`Category::index`]; sums to 1.
    pub category_share: Vec<f64>,
    pub retweet_share: f64,
    /// Natural-log Shannon entropy of the country distribution; `None` when
    /// no member is located.
    pub internationality: Option<f64>,
    pub located: u64,
    pub countries: usize,
}

impl CommunityProfile {
    pub fn share(&self, c: Category) -> f64 {
        self.category_share[c.index()]
    }
}

/// `-sum p ln p` over positive counts; `None` for an empty distribution.
pub fn shannon_entropy(counts: &[f64]) -> Option<f64> {
    let total: f64 = counts.iter().filter(|&&c| c > 0.0).sum();
    if total <= 0.0 {
        return None;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.ln()
        })
        .sum();
    Some(h.max(0.0))
}

/// Profile every ranked community. Tweet-mode entropy needs `geo`.
pub fn profile_communities(
    ranked: &RankedCommunities,
    registry: &NodeRegistry,
    graph: &RetweetGraph,
    users: &UserTable,
    geo: Option<&GeoTable>,
    mode: EntropyMode,
) -> Result<Vec<CommunityProfile>> {
    if mode == EntropyMode::Tweets && geo.is_none() {
        return Err(Error::Config("tweet-level entropy needs per-tweet geo tallies".into()));
    }
    let total = graph.total_weight() as f64;
    let members = ranked.members();
    Ok(ranked
        .communities
        .iter()
        .zip(&members)
        .map(|(c, nodes)| {
            let mut cats = [0usize; Category::COUNT];
            let mut countries: BTreeMap<CountryCode, u64> = BTreeMap::new();
            let mut received = 0u64;
            for &v in nodes {
                let id = registry.id(v);
                cats[users.category(id).index()] += 1;
                received += graph.weighted_out_degree(v);
                match (mode, geo) {
                    (EntropyMode::Tweets, Some(g)) => {
                        for &(cc, n) in g.users.get(id).map(|u| u.tallies.as_slice()).unwrap_or(&[]) {
                            *countries.entry(cc).or_insert(0) += n as u64;
                        }
                    }
                    _ => {
                        if let Some(cc) = users.country(id) {
                            *countries.entry(cc).or_insert(0) += 1;
                        }
                    }
                }
            }
            let n = nodes.len().max(1) as f64;
            let counts: Vec<f64> = countries.values().map(|&k| k as f64).collect();
            CommunityProfile {
                label: c.label.clone(),
                size: nodes.len(),
                category_share: cats.iter().map(|&k| k as f64 / n).collect(),
                retweet_share: if total > 0.0 { received as f64 / total } else { 0.0 },
                internationality: shannon_entropy(&counts),
                located: countries.values().sum(),
                countries: countries.len(),
            }
        })
        .collect())
}

/// CSV: label, size, 13 category shares, retweet share, entropy (blank if missing).
pub fn write_profiles<W: Write>(profiles: &[CommunityProfile], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["label".to_string(), "size".to_string()];
    header.extend(Category::ALL.iter().map(|c| c.label().to_string()));
    header.extend(["retweet_share".to_string(), "internationality".to_string()]);
    wtr.write_record(&header)?;
    for p in profiles {
        let mut row = vec![p.label.clone(), p.size.to_string()];
        row.extend(p.category_share.iter().map(|s| s.to_string()));
        row.push(p.retweet_share.to_string());
        row.push(p.internationality.map(|h| h.to_string()).unwrap_or_default());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// A clustering feature: one of the categories of interest or internationality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Category(Category),
    Internationality,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::Category(Category::OF_INTEREST[0]),
        Feature::Category(Category::OF_INTEREST[1]),
        Feature::Category(Category::OF_INTEREST[2]),
        Feature::Category(Category::OF_INTEREST[3]),
        Feature::Category(Category::OF_INTEREST[4]),
        Feature::Category(Category::OF_INTEREST[5]),
        Feature::Internationality,
    ];

    /// Column in a [`FeatureMatrix`].
    pub fn column(self) -> usize {
        Self::ALL.iter().position(|&f| f == self).expect("feature is a column")
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Category(c) => c.label(),
            Feature::Internationality => "Internationality",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature {s:?}")))
    }
}

impl Serialize for Feature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Feature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Rows are communities, columns are [`Feature::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub labels: Vec<String>,
    pub raw: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    /// Rows whose internationality was missing and imputed with the column mean.
    pub imputed: Vec<bool>,
    pub warnings: Vec<String>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn z_of(&self, row: usize, f: Feature) -> f64 {
        self.z[row][f.column()]
    }

    /// Standardize arbitrary raw rows; `None` cells are imputed with the
    /// column mean of the present values.
    pub fn from_raw(labels: Vec<String>, raw: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = raw.len();
        if labels.len() != n {
            return Err(Error::PartitionSize { expected: n, got: labels.len() });
        }
        if n < 2 {
            return Err(Error::TooFew { what: "communities to standardize", needed: 2, got: n });
        }
        let d = raw[0].len();
        if raw.iter().any(|r| r.len() != d) {
            return Err(Error::Config("feature rows differ in length".into()));
        }
        let mut warnings = Vec::new();
        let mut imputed = vec![false; n];
        let mut filled = vec![vec![0.0; d]; n];
        let mut z = vec![vec![0.0; d]; n];
        for j in 0..d {
            let present: Vec<f64> = raw.iter().filter_map(|r| r[j]).collect();
            if present.is_empty() {
                warnings.push(format!("column {j} has no values; set to zero"));
            }
            let mean_present = if present.is_empty() { 0.0 } else { sorted_sum(present.iter().copied()) / present.len() as f64 };
            for i in 0..n {
                filled[i][j] = raw[i][j].unwrap_or_else(|| {
                    imputed[i] = true;
                    mean_present
                });
            }
            let mean = sorted_sum(filled.iter().map(|r| r[j])) / n as f64;
            let var = sorted_sum(filled.iter().map(|r| (r[j] - mean).powi(2))) / n as f64;
            let std = var.sqrt();
            let constant = filled.iter().all(|r| r[j] == filled[0][j]);
            if constant || std == 0.0 {
                if !present.is_empty() {
                    warnings.push(format!("column {j} is constant; Z-scores set to zero"));
                }
                continue;
            }
            for i in 0..n {
                z[i][j] = (filled[i][j] - mean) / std;
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if imputed[i] {
                warnings.push(format!("community {l}: missing value imputed with column mean"));
            }
        }
        Ok(FeatureMatrix { labels, raw: filled, z, imputed, warnings })
    }
}

/// Sum in ascending order, so the result does not depend on row order.
/// Naming compares means against zero, where rounding noise decides the sign.
pub(crate) fn sorted_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_unstable_by(f64::total_cmp);
    v.iter().sum()
}

/// Feature rows from profiles, then per-column Z-scores (population std).
pub fn standardize(profiles: &[CommunityProfile]) -> Result<FeatureMatrix> {
    let labels = profiles.iter().map(|p| p.label.clone()).collect();
    let raw = profiles
        .iter()
        .map(|p| {
            Feature::ALL
                .iter()
                .map(|&f| match f {
                    Feature::Category(c) => Some(p.share(c)),
                    Feature::Internationality => p.internationality,
                })
                .collect()
        })
        .collect();
    let mut fm = FeatureMatrix::from_raw(labels, raw)?;
    for w in fm.warnings.iter_mut() {
        if let Some(rest) = w.strip_prefix("column ") {
            if let Some((j, tail)) = rest.split_once(' ') {
                if let Ok(j) = j.parse::<usize>() {
                    *w = format!("feature {}{}", Feature::ALL[j].name(), format_args!(" {tail}"));
                }
            }
        }
    }
    Ok(fm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::{rank_communities, ConsensusPartition};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn profile_fixture(cats: &[Category], countries: &[Option<&str>]) -> Vec<CommunityProfile> {
        let n = cats.len();
        let ids: Vec<String> = (0..n).map(|i| format!("u{i:03}")).collect();
        let registry = NodeRegistry::from_ids(ids.clone()).unwrap();
        let graph = RetweetGraph::from_pairs(n, (1..n as u32).map(|v| (0, v)).collect()).unwrap();
        let users = UserTable::new(
            ids.iter().cloned().zip(cats.iter().copied()).collect(),
            ids.iter().cloned().zip(countries.iter().map(|c| c.map(|s| s.parse().unwrap()))),
        );
        let p = ConsensusPartition {
            assignment: vec![0; n],
            sizes: vec![n],
            agreement: vec![1.0; n],
            runs: 1,
            resolution: 1.0,
            reference_seed: 0,
            modularity: 0.0,
            run_summaries: Vec::new(),
        };
        let ranked = rank_communities(&p, 1);
        profile_communities(&ranked, &registry, &graph, &users, None, EntropyMode::Users).unwrap()
    }

    #[test]
    fn two_countries_uniform() {
        let p = profile_fixture(&[Category::Science; 4], &[Some("US"), Some("US"), Some("GB"), Some("GB")]);
        assert!((p[0].internationality.unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(p[0].share(Category::Science), 1.0);
        assert_eq!(p[0].retweet_share, 1.0);
    }

    #[test]
    fn single_country_and_unlocated() {
        let p = profile_fixture(&[Category::Media, Category::Other, Category::Other], &[Some("NG"), None, Some("NG")]);
        assert_eq!(p[0].internationality, Some(0.0));
        assert_eq!(p[0].located, 2);
        let p = profile_fixture(&[Category::Media, Category::Other], &[None, None]);
        assert_eq!(p[0].internationality, None);
    }

    #[test]
    fn shares_match_recount() {
        use rand::Rng as _;
        let mut rng = crate::rng::seeded(11);
        let cats: Vec<Category> = (0..1000).map(|_| Category::ALL[rng.random_range(0..13)]).collect();
        let p = profile_fixture(&cats, &vec![None; 1000]);
        let mut tally: HashMap<Category, usize> = HashMap::new();
        for c in &cats {
            *tally.entry(*c).or_default() += 1;
        }
        for c in Category::ALL {
            let expected = tally.get(&c).copied().unwrap_or(0) as f64 / 1000.0;
            assert_eq!(p[0].share(c), expected);
        }
        assert!((p[0].category_share.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_point_standardization() {
        let fm = FeatureMatrix::from_raw(
            vec!["A".into(), "B".into()],
            vec![vec![Some(0.1), Some(5.0)], vec![Some(0.3), Some(5.0)]],
        )
        .unwrap();
        assert!((fm.z[0][0] + 1.0).abs() < 1e-12);
        assert!((fm.z[1][0] - 1.0).abs() < 1e-12);
        assert_eq!(fm.z[0][1], 0.0);
        assert_eq!(fm.z[1][1], 0.0);
        assert_eq!(fm.warnings.len(), 1);
    }

    #[test]
    fn missing_entropy_is_imputed() {
        let fm = FeatureMatrix::from_raw(
            vec!["A".into(), "B".into(), "C".into()],
            vec![vec![Some(1.0)], vec![Some(3.0)], vec![None]],
        )
        .unwrap();
        assert_eq!(fm.raw[2][0], 2.0);
        assert_eq!(fm.z[2][0], 0.0);
        assert!(fm.imputed[2]);
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            FeatureMatrix::from_raw(vec!["A".into()], vec![vec![Some(1.0)]]),
            Err(Error::TooFew { .. })
        ));
    }

    #[test]
    fn feature_names_roundtrip() {
        for f in Feature::ALL {
            assert_eq!(f.name().parse::<Feature>().unwrap(), f);
        }
        assert_eq!(Feature::Internationality.column(), 6);
        assert_eq!(Feature::Category(Category::Science).column(), 0);
    }

    fn matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..16).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 7), n))
    }

    proptest! {
        #[test]
        fn z_columns_are_standard(rows in matrix()) {
            let n = rows.len();
            let fm = FeatureMatrix::from_raw(
                (0..n).map(|i| i.to_string()).collect(),
                rows.iter().map(|r| r.iter().map(|&x| Some(x)).collect()).collect(),
            ).unwrap();
            for j in 0..7 {
                let mean = fm.z.iter().map(|r| r[j]).sum::<f64>() / n as f64;
                let var = fm.z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
                prop_assert!(mean.abs() < 1e-9);
                if fm.z.iter().any(|r| r[j] != 0.0) {
                    prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn z_invariant_under_shift_and_scale(rows in matrix(), shift in -100.0f64..100.0, scale in 0.01f64..100.0) {
            let n = rows.len();
            let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let a = FeatureMatrix::from_raw(labels.clone(), rows.iter().map(|r| r.iter().map(|&x| Some(x)).collect()).collect()).unwrap();
            let b = FeatureMatrix::from_raw(labels, rows.iter().map(|r| r.iter().map(|&x| Some(x * scale + shift)).collect()).collect()).unwrap();
            for (ra, rb) in a.z.iter().zip(&b.z) {
                for (x, y) in ra.iter().zip(rb) {
                    prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
                }
            }
        }

        #[test]
        fn entropy_bounds(counts in prop::collection::vec(0u32..1000, 1..30), perm_seed in any::<u64>()) {
            let c: Vec<f64> = counts.iter().map(|&x| x as f64).collect();
            let k = counts.iter().filter(|&&x| x > 0).count();
            match shannon_entropy(&c) {
                None => prop_assert_eq!(k, 0),
                Some(h) => {
                    prop_assert!(h >= 0.0);
                    prop_assert!(h <= (k as f64).ln() + 1e-12);
                    use rand::seq::SliceRandom;
                    let mut shuffled = c.clone();
                    shuffled.shuffle(&mut crate::rng::seeded(perm_seed));
                    prop_assert!((shannon_entropy(&shuffled).unwrap() - h).abs() < 1e-12);
                }
            }
        }
    }
}
