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

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Category, CountryCode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAttributes {
    pub user_id: String,
    pub category: Category,
    pub country: Option<CountryCode>,
}

/// Category and country lookup for every known user.
#[derive(Debug, Clone, Default)]
pub struct UserTable {
    pub categories: HashMap<String, Category>,
    pub countries: HashMap<String, CountryCode>,
}

impl UserTable {
    pub fn new(
        categories: HashMap<String, Category>,
        countries: impl IntoIterator<Item = (String, Option<CountryCode>)>,
    ) -> Self {
        UserTable {
            categories,
            countries: countries
                .into_iter()
                .filter_map(|(u, c)| c.map(|c| (u, c)))
                .collect(),
        }
    }

    /// Users missing from the category table count as [`Category::Other`].
    pub fn category(&self, user: &str) -> Category {
        self.categories.get(user).copied().unwrap_or(Category::Other)
    }

    pub fn country(&self, user: &str) -> Option<CountryCode> {
        self.countries.get(user).copied()
    }

    pub fn attributes(&self, user: &str) -> UserAttributes {
        UserAttributes {
            user_id: user.to_string(),
            category: self.category(user),
            country: self.country(user),
        }
    }
}

#[derive(Deserialize)]
struct CategoryRow {
    user_id: String,
    category: String,
}

/// CSV `user_id,category` with header. Labels must match exactly.
pub fn read_categories<R: Read>(r: R) -> Result<HashMap<String, Category>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["user_id", "category"] {
        return Err(Error::Parse {
            context: "categories".into(),
            line: 1,
            message: format!("expected header user_id,category, got {headers:?}"),
        });
    }
    let mut out = HashMap::new();
    for (i, row) in rdr.deserialize::<CategoryRow>().enumerate() {
        let row = row?;
        let category: Category = row.category.parse().map_err(|e: Error| Error::Parse {
            context: "categories".into(),
            line: i + 2,
            message: e.to_string(),
        })?;
        out.insert(row.user_id, category);
    }
    Ok(out)
}

pub fn write_categories<W: Write>(categories: &HashMap<String, Category>, w: W) -> Result<()> {
    let sorted: BTreeMap<_, _> = categories.iter().collect();
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "category"])?;
    for (u, c) in sorted {
        wtr.write_record([u.as_str(), c.label()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_countries<W: Write>(countries: &BTreeMap<String, Option<CountryCode>>, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "country"])?;
    for (u, c) in countries {
        wtr.write_record([u.as_str(), c.as_ref().map_or("", |c| c.as_str())])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_countries<R: Read>(r: R) -> Result<BTreeMap<String, Option<CountryCode>>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let user = rec.get(0).unwrap_or_default().to_string();
        let country = match rec.get(1).unwrap_or_default() {
            "" => None,
            c => Some(c.parse()?),
        };
        out.insert(user, country);
    }
    Ok(out)
}
