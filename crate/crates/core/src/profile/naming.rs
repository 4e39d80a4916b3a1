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

//! Declarative super-community naming.
//!
//! A rule is a disjunction of conjunctions of Z-score conditions, evaluated
//! on a cluster's mean Z-scores. Before naming, the split rule moves every
//! community that is above threshold on any of its `any_above` features and
//! on all of its `all_above` features into the `into` super-community.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Category, SuperCommunity};

use super::{Dendrogram, Feature, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Above,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: Feature,
    pub op: Op,
    #[serde(default)]
    pub value: f64,
}

impl Condition {
    pub fn above(feature: Feature) -> Self {
        Condition { feature, op: Op::Above, value: 0.0 }
    }

    pub fn at_most(feature: Feature) -> Self {
        Condition { feature, op: Op::AtMost, value: 0.0 }
    }

    fn holds(&self, z: &[f64]) -> bool {
        let x = z[self.feature.column()];
        match self.op {
            Op::Above => x > self.value,
            Op::AtMost => x <= self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub name: SuperCommunity,
    /// Disjunction of conjunctions.
    pub when: Vec<Vec<Condition>>,
}

impl Rule {
    pub fn matches(&self, z: &[f64]) -> bool {
        self.when.iter().any(|conj| conj.iter().all(|c| c.holds(z)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub into: SuperCommunity,
    pub any_above: Vec<Feature>,
    #[serde(default)]
    pub all_above: Vec<Feature>,
    #[serde(default)]
    pub threshold: f64,
}

impl SplitRule {
    fn selects(&self, z: &[f64]) -> bool {
        self.any_above.iter().any(|f| z[f.column()] > self.threshold)
            && self.all_above.iter().all(|f| z[f.column()] > self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rulebook {
    /// Earlier names win when several rules match. Empty: multiple matches
    /// are an error.
    #[serde(default)]
    pub precedence: Vec<SuperCommunity>,
    #[serde(default)]
    pub split: Option<SplitRule>,
    pub rules: Vec<Rule>,
    /// Community label -> forced name, applied last.
    #[serde(default)]
    pub overrides: BTreeMap<String, SuperCommunity>,
}

impl Default for Rulebook {
    fn default() -> Self {
        use Category::*;
        use Condition as C;
        let f = Feature::Category;
        let int = Feature::Internationality;
        let only_political = [Science, Healthcare, Media, PublicServices].map(|c| C::at_most(f(c)));
        Rulebook {
            precedence: SuperCommunity::ALL.to_vec(),
            split: Some(SplitRule {
                into: SuperCommunity::InternationalSciHealth,
                any_above: vec![f(Science)],
                all_above: vec![int],
                threshold: 0.0,
            }),
            rules: vec![
                Rule {
                    name: SuperCommunity::InternationalSciHealth,
                    when: [Science, Healthcare].map(|c| vec![C::above(f(c)), C::above(int)]).to_vec(),
                },
                Rule {
                    name: SuperCommunity::NationalElite,
                    when: [Healthcare, Media, PublicServices].map(|c| vec![C::above(f(c)), C::at_most(int)]).to_vec(),
                },
                Rule {
                    name: SuperCommunity::Political,
                    when: [PoliticalSupporter, GovernmentPolitics]
                        .map(|c| {
                            let mut conj = vec![C::above(f(c))];
                            conj.extend(only_political.iter().cloned());
                            conj
                        })
                        .to_vec(),
                },
                Rule {
                    name: SuperCommunity::Other,
                    when: vec![Category::OF_INTEREST.iter().map(|&c| C::at_most(f(c))).collect()],
                },
            ],
            overrides: BTreeMap::new(),
        }
    }
}

impl Rulebook {
    pub fn from_toml(text: &str) -> Result<Self> {
        let rb: Rulebook = toml::from_str(text).map_err(|e| Error::Config(format!("rulebook: {e}")))?;
        if rb.rules.is_empty() {
            return Err(Error::Config("rulebook has no rules".into()));
        }
        Ok(rb)
    }

    pub fn matching(&self, z: &[f64]) -> Vec<SuperCommunity> {
        let mut out: Vec<SuperCommunity> = Vec::new();
        for r in &self.rules {
            if r.matches(z) && !out.contains(&r.name) {
                out.push(r.name);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNaming {
    pub members: Vec<String>,
    pub mean_z: Vec<f64>,
    pub matched: Vec<SuperCommunity>,
    pub name: SuperCommunity,
    /// Produced by the split rule rather than the dendrogram cut.
    pub split_off: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperCommunityAssignment {
    pub k: usize,
    /// Community label -> super-community, in feature-matrix row order.
    pub map: Vec<(String, SuperCommunity)>,
    pub clusters: Vec<ClusterNaming>,
    pub warnings: Vec<String>,
}

impl SuperCommunityAssignment {
    pub fn get(&self, label: &str) -> Option<SuperCommunity> {
        self.map.iter().find(|(l, _)| l == label).map(|(_, s)| *s)
    }
}

fn mean_rows(fm: &FeatureMatrix, rows: &[usize]) -> Vec<f64> {
    let d = fm.z[0].len();
    (0..d)
        .map(|j| super::sorted_sum(rows.iter().map(|&i| fm.z[i][j])) / rows.len() as f64)
        .collect()
}

/// Cut at `k`, apply the split rule, then name each cluster by its mean
/// Z-scores under `rules`.
pub fn assign_super_communities(
    fm: &FeatureMatrix,
    dendrogram: &Dendrogram,
    k: usize,
    rules: &Rulebook,
) -> Result<SuperCommunityAssignment> {
    if dendrogram.leaves != fm.rows() {
        return Err(Error::PartitionSize { expected: fm.rows(), got: dendrogram.leaves });
    }
    let cut = dendrogram.cut(k)?;
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (row, &c) in cut.iter().enumerate() {
        clusters[c].push(row);
    }

    let mut warnings = Vec::new();
    let mut names: Vec<Option<SuperCommunity>> = vec![None; fm.rows()];
    let mut namings = Vec::new();
    let labels_of = |rows: &[usize]| rows.iter().map(|&i| fm.labels[i].clone()).collect::<Vec<_>>();
    for rows in clusters {
        let (split, rest): (Vec<usize>, Vec<usize>) = match &rules.split {
            Some(s) => rows.iter().partition(|&&i| s.selects(&fm.z[i])),
            None => (Vec::new(), rows),
        };
        if let (Some(s), false) = (&rules.split, split.is_empty()) {
            for &i in &split {
                names[i] = Some(s.into);
            }
            namings.push(ClusterNaming {
                members: labels_of(&split),
                mean_z: mean_rows(fm, &split),
                matched: vec![s.into],
                name: s.into,
                split_off: true,
            });
        }
        if rest.is_empty() {
            continue;
        }
        let mean_z = mean_rows(fm, &rest);
        let matched = rules.matching(&mean_z);
        let overridden = rest.iter().all(|&i| rules.overrides.contains_key(&fm.labels[i]));
        let name = match matched.len() {
            0 if overridden => SuperCommunity::Other,
            0 => return Err(Error::UnnamedCluster(labels_of(&rest))),
            1 => matched[0],
            _ => match rules.precedence.iter().find(|p| matched.contains(p)) {
                Some(&p) => {
                    warnings.push(format!(
                        "cluster {:?} matches {:?}; precedence picks {p}",
                        labels_of(&rest),
                        matched.iter().map(|m| m.name()).collect::<Vec<_>>()
                    ));
                    p
                }
                None if overridden => SuperCommunity::Other,
                None => {
                    return Err(Error::AmbiguousNaming {
                        cluster: labels_of(&rest),
                        matches: matched.iter().map(|m| m.name().to_string()).collect(),
                    })
                }
            },
        };
        for &i in &rest {
            names[i] = Some(name);
        }
        namings.push(ClusterNaming { members: labels_of(&rest), mean_z, matched, name, split_off: false });
    }

    for (label, &forced) in &rules.overrides {
        match fm.labels.iter().position(|l| l == label) {
            Some(i) => names[i] = Some(forced),
            None => warnings.push(format!("override for unknown community {label}")),
        }
    }
    let map = fm
        .labels
        .iter()
        .zip(names)
        .map(|(l, n)| (l.clone(), n.expect("every row belongs to a cluster")))
        .collect();
    Ok(SuperCommunityAssignment { k, map, clusters: namings, warnings })
}

/// CSV `label,super_community`.
pub fn write_super_community_map<W: Write>(a: &SuperCommunityAssignment, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["label", "super_community"])?;
    for (l, s) in &a.map {
        wtr.write_record([l.as_str(), s.name()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_super_community_map<R: Read>(r: R) -> Result<Vec<(String, SuperCommunity)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (Some(l), Some(s)) = (rec.get(0), rec.get(1)) else {
            return Err(Error::Parse {
                context: "super-community map".into(),
                line: rec.position().map_or(0, |p| p.line() as usize),
                message: "expected two columns".into(),
            });
        };
        out.push((l.to_string(), s.parse()?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ward_cluster;

    fn z(pairs: &[(Feature, f64)]) -> Vec<f64> {
        let mut v = vec![-0.5; 7];
        for &(f, x) in pairs {
            v[f.column()] = x;
        }
        v
    }

    const SCI: Feature = Feature::Category(Category::Science);
    const PS: Feature = Feature::Category(Category::PoliticalSupporter);
    const GP: Feature = Feature::Category(Category::GovernmentPolitics);
    const MEDIA: Feature = Feature::Category(Category::Media);
    const INT: Feature = Feature::Internationality;

    #[test]
    fn direct_rules() {
        let rb = Rulebook::default();
        assert_eq!(rb.matching(&z(&[(PS, 1.0)])), vec![SuperCommunity::Political]);
        assert_eq!(rb.matching(&z(&[(SCI, 1.0), (INT, 1.0)])), vec![SuperCommunity::InternationalSciHealth]);
        assert_eq!(rb.matching(&z(&[(MEDIA, 1.0), (GP, 0.3)])), vec![SuperCommunity::NationalElite]);
        assert_eq!(rb.matching(&z(&[(INT, 2.0)])), vec![SuperCommunity::Other]);
        assert!(rb.matching(&z(&[(SCI, 1.0)])).is_empty());
    }

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let n = rows.len();
        FeatureMatrix {
            labels: (0..n).map(crate::community::community_name).collect::<Vec<String>>(),
            raw: rows.clone(),
            z: rows,
            imputed: vec![false; n],
            warnings: Vec::new(),
        }
    }

    #[test]
    fn split_and_name() {
        let fm = matrix(vec![
            z(&[(SCI, 2.0), (INT, 1.0)]),
            z(&[(INT, 1.0)]),
            z(&[(INT, 1.2)]),
            z(&[(PS, 3.0)]),
            z(&[(PS, 3.1)]),
        ]);
        let d = ward_cluster(&fm.z).unwrap();
        let a = assign_super_communities(&fm, &d, 2, &Rulebook::default()).unwrap();
        assert_eq!(a.get("A"), Some(SuperCommunity::InternationalSciHealth));
        assert_eq!(a.get("B"), Some(SuperCommunity::Other));
        assert_eq!(a.get("D"), Some(SuperCommunity::Political));
        assert!(a.clusters.iter().any(|c| c.split_off));
    }

    #[test]
    fn ambiguity_without_precedence() {
        let fm = matrix(vec![z(&[(PS, 1.0), (INT, 1.0)]), z(&[(INT, -1.0)])]);
        let d = ward_cluster(&fm.z).unwrap();
        let rb = Rulebook {
            precedence: Vec::new(),
            split: None,
            rules: vec![
                Rule { name: SuperCommunity::Political, when: vec![vec![Condition::above(PS)]] },
                Rule { name: SuperCommunity::Other, when: vec![vec![Condition::above(INT)]] },
            ],
            overrides: BTreeMap::new(),
        };
        match assign_super_communities(&fm, &d, 2, &rb) {
            Err(Error::AmbiguousNaming { cluster, matches }) => {
                assert_eq!(cluster, vec!["A"]);
                assert_eq!(matches, vec!["Political", "Other"]);
            }
            other => panic!("{other:?}"),
        }
        let mut fixed = rb.clone();
        fixed.overrides.insert("A".into(), SuperCommunity::Political);
        fixed.rules.push(Rule { name: SuperCommunity::Other, when: vec![vec![]] });
        let a = assign_super_communities(&fm, &d, 2, &fixed).unwrap();
        assert_eq!(a.get("A"), Some(SuperCommunity::Political));
    }

    #[test]
    fn rulebook_toml_roundtrip() {
        let rb = Rulebook::default();
        let text = toml::to_string(&rb).unwrap();
        assert_eq!(Rulebook::from_toml(&text).unwrap(), rb);
        let custom = r#"
precedence = ["Political", "Other"]
[[rules]]
name = "Political"
when = [[{ feature = "Political Supporter", op = "above" }]]
"#;
        let rb = Rulebook::from_toml(custom).unwrap();
        assert!(rb.rules[0].matches(&z(&[(PS, 0.1)])));
        assert!(Rulebook::from_toml("rules = []").is_err());
    }

    #[test]
    fn map_csv_roundtrip() {
        let a = SuperCommunityAssignment {
            k: 2,
            map: vec![("A".into(), SuperCommunity::Political), ("B".into(), SuperCommunity::Other)],
            clusters: Vec::new(),
            warnings: Vec::new(),
        };
        let mut buf = Vec::new();
        write_super_community_map(&a, &mut buf).unwrap();
        assert_eq!(read_super_community_map(buf.as_slice()).unwrap(), a.map);
    }
}
