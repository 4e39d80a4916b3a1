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

//! Run configuration, read from a single TOML file. Relative paths resolve
//! against the config file's directory. Every seed is explicit.

use std::path::{Path, PathBuf};

use attnet_core::dynamics::DAY;
use attnet_core::ingest::parse_timestamp;
use attnet_core::profile::EntropyMode;
use attnet_core::synth::SynthConfig;
use attnet_core::TimeWindow;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    #[serde(default)]
    pub window: Option<WindowConfig>,
    #[serde(default)]
    pub louvain: LouvainSection,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub attention: AttentionSection,
    #[serde(default)]
    pub stats: StatsSection,
    /// Generate the input stream instead of reading `paths.events`.
    #[serde(default)]
    pub synth: Option<SynthConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Event JSONL files; omitted when `[synth]` provides the stream.
    #[serde(default)]
    pub events: Vec<PathBuf>,
    /// `user_id,category` CSV; omitted with `[synth]`. Users without a
    /// category count as Other.
    #[serde(default)]
    pub categories: Option<PathBuf>,
    /// TSV gazetteer; the built-in one when omitted.
    #[serde(default)]
    pub gazetteer: Option<PathBuf>,
    pub out: PathBuf,
    /// TOML rulebook; the default rulebook when omitted.
    #[serde(default)]
    pub rulebook: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    /// ISO-8601 or epoch seconds, inclusive.
    pub from: String,
    /// ISO-8601 or epoch seconds, exclusive.
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LouvainSection {
    pub resolution: f64,
    pub runs: usize,
    pub seed: u64,
    pub min_community_size: usize,
}

impl Default for LouvainSection {
    fn default() -> Self {
        LouvainSection { resolution: 1.0, runs: 50, seed: 1, min_community_size: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    pub entropy: EntropyMode,
    /// Forced cluster count; the knee point when omitted.
    pub k: Option<usize>,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection { entropy: EntropyMode::Users, k: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub width_days: f64,
    pub step_days: f64,
}

impl WindowSpec {
    pub fn seconds(&self) -> (i64, i64) {
        ((self.width_days * DAY as f64).round() as i64, (self.step_days * DAY as f64).round() as i64)
    }

    pub fn tag(&self) -> String {
        format!("w{}_s{}", self.width_days, self.step_days)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub windows: Vec<WindowSpec>,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            windows: vec![WindowSpec { width_days: 1.0, step_days: 1.0 }, WindowSpec { width_days: 28.0, step_days: 7.0 }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttentionSection {
    pub cohort: usize,
    pub window: WindowSpec,
    pub bootstrap_resamples: usize,
    pub bootstrap_level: f64,
    pub bootstrap_seed: u64,
}

impl Default for AttentionSection {
    fn default() -> Self {
        AttentionSection {
            cohort: 4000,
            window: WindowSpec { width_days: 28.0, step_days: 7.0 },
            bootstrap_resamples: 1000,
            bootstrap_level: 0.95,
            bootstrap_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct StatsSection {
    /// Fixed lower cutoff; KS selection when omitted.
    pub x_min: Option<u64>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Defaults for everything but the out dir.
    pub fn with_out(out: PathBuf) -> Self {
        RunConfig {
            paths: Paths { events: Vec::new(), categories: None, gazetteer: None, out, rulebook: None },
            window: None,
            louvain: LouvainSection::default(),
            profile: ProfileSection::default(),
            dynamics: DynamicsSection::default(),
            attention: AttentionSection::default(),
            stats: StatsSection::default(),
            synth: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        p.events = p.events.iter().map(|e| resolve(base, e)).collect();
        for x in [&mut p.categories, &mut p.gazetteer, &mut p.rulebook].into_iter().flatten() {
            *x = resolve(base, x);
        }
        p.out = resolve(base, &p.out);
        Ok(cfg)
    }

    /// Replace every seed with `seed`.
    pub fn override_seed(&mut self, seed: u64) {
        self.louvain.seed = seed;
        self.attention.bootstrap_seed = seed;
        if let Some(s) = &mut self.synth {
            s.seed = seed;
        }
    }

    /// `needs_source`: the run reads raw events (the `ingest` and `all` stages).
    pub fn validate(&self, needs_source: bool) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if let Some(s) = &self.synth {
            s.validate().map_err(|e| CliError::Config(format!("synth: {e}")))?;
            if !self.paths.events.is_empty() || self.paths.categories.is_some() {
                return bad("paths.events and paths.categories must be omitted when [synth] is set".into());
            }
        } else if needs_source {
            if self.paths.events.is_empty() {
                return bad("no event files given and no [synth] section".into());
            }
            if self.window.is_none() {
                return bad("an observation window is required without [synth]".into());
            }
        }
        let files = self.paths.events.iter().chain(&self.paths.categories).chain(&self.paths.gazetteer).chain(&self.paths.rulebook);
        for f in files {
            if !f.is_file() {
                return bad(format!("input file {} does not exist", f.display()));
            }
        }
        if self.window.is_some() || self.synth.is_some() {
            self.observation_window()?;
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(self.louvain.resolution > 0.0) {
            return bad(format!("louvain.resolution must be positive, got {}", self.louvain.resolution));
        }
        if self.louvain.runs == 0 {
            return bad("louvain.runs must be at least 1".into());
        }
        if self.profile.k == Some(0) {
            return bad("profile.k must be at least 1".into());
        }
        for w in self.dynamics.windows.iter().chain([&self.attention.window]) {
            let (width, step) = w.seconds();
            if width <= 0 || step <= 0 {
                return bad(format!("window width and step must be positive, got {w:?}"));
            }
        }
        if self.attention.cohort == 0 {
            return bad("attention.cohort must be at least 1".into());
        }
        if self.attention.bootstrap_resamples == 0 || !(self.attention.bootstrap_level > 0.0 && self.attention.bootstrap_level < 1.0) {
            return bad("attention bootstrap needs resamples >= 1 and level in (0, 1)".into());
        }
        if self.stats.x_min == Some(0) {
            return bad("stats.x_min must be positive".into());
        }
        Ok(())
    }

    /// Configured window, or the synthetic period.
    pub fn observation_window(&self) -> Result<TimeWindow, CliError> {
        let parse = |s: &str| parse_timestamp(s).map_err(|e| CliError::Config(format!("window: {e}")));
        match (&self.window, &self.synth) {
            (Some(w), _) => TimeWindow::new(parse(&w.from)?, parse(&w.to)?).map_err(|e| CliError::Config(e.to_string())),
            (None, Some(s)) => TimeWindow::new(s.start, s.end()).map_err(|e| CliError::Config(e.to_string())),
            (None, None) => Err(CliError::Config("no observation window".into())),
        }
    }
}
