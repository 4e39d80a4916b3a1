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

//! Event streams, user categories and country resolution.
//!
//! Only originals and retweets are modelled. Quotes and replies must be
//! mapped to one of the two (or dropped) before ingestion.

pub mod events;
pub mod geo;
pub mod users;

pub use events::{
    parse_events, parse_streams, parse_timestamp, write_events, EventKind, IngestReport,
    Timestamp, TweetEvent,
};
pub use geo::{
    assign_user_countries, geo_table, resolve_country, tokenize, Gazetteer, GazetteerEntry,
    GeoTable, UserGeo,
};
pub use users::{
    read_categories, read_countries, write_categories, write_countries, UserAttributes, UserTable,
};
