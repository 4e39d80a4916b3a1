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

//! Temporal retweet-network analytics.
//!
//! The pipeline runs in stages, each a module of this crate:
//!
//! | Module | Does |
//! |--------|------|
//! | [`ingest`] | JSONL event parsing, dedup, gazetteer geo-resolution, category tables |
//! | [`graph`] | weighted directed retweet graph (CSR), giant component, symmetrization |
//! | [`community`] | modularity, Louvain, multi-run consensus, size-ranked labels |
//! | [`profile`] | community composition, Z-scores, Ward dendrogram, super-community naming |
//! | [`dynamics`] | time windows, mixing matrices, internal/external attention |
//! | [`attention`] | retweet h-index, top-user cohorts, rank tables, bootstrap CIs |
//! | [`stats`] | discrete power law with exponential cutoff MLE |
//! | [`synth`] | seeded planted-partition event streams used as ground truth |
//!
//! All randomness goes through [`rng::seeded`] (ChaCha8), so identical seeds
//! give identical output on every platform.

pub mod attention;
pub mod community;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod profile;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::{Category, CountryCode, SuperCommunity, TimeWindow};
