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

use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("unknown user category {0:?}")]
    UnknownCategory(String),

    #[error("invalid country code {0:?}")]
    InvalidCountry(String),

    #[error("invalid timestamp {0:?}")]
    InvalidTimestamp(String),

    #[error("invalid gazetteer: {0}")]
    Gazetteer(String),

    #[error("edge weight overflow between nodes {src} and {dst}")]
    WeightOverflow { src: u32, dst: u32 },

    #[error("invalid graph snapshot: {0}")]
    Snapshot(String),

    #[error("undefined modularity: graph has no edges")]
    UndefinedModularity,

    #[error("empty graph")]
    EmptyGraph,

    #[error("partition covers {got} nodes, graph has {expected}")]
    PartitionSize { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("need at least {needed} {what}, got {got}")]
    TooFew {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("ambiguous super-community naming for cluster {cluster:?}: rules {matches:?} all match")]
    AmbiguousNaming {
        cluster: Vec<String>,
        matches: Vec<String>,
    },

    #[error("no naming rule matches cluster {0:?}")]
    UnnamedCluster(Vec<String>),

    #[error("degenerate tail: {0}")]
    DegenerateTail(String),

    #[error("optimizer did not converge after {iterations} iterations (best log-likelihood {best_ll}, alpha {alpha}, lambda {lambda})")]
    NoConvergence {
        iterations: usize,
        best_ll: f64,
        alpha: f64,
        lambda: f64,
    },

    #[error("infeasible synthetic config: {0}")]
    InfeasibleSynth(String),
}
