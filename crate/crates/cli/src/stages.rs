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

//! Pipeline stages over a shared out dir. Each stage writes its files under
//! `<out>/<stage>/` plus a `report.json`, and records content hashes in the
//! manifest so unchanged reruns are skipped.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use attnet_core::attention::{attention_records, rolling_attention, select_top_users, write_cohort_csv, write_trajectory_csv, BootstrapConfig, RetweetLog};
use attnet_core::community::{consensus, rank_communities, LouvainConfig, RankedCommunities};
use attnet_core::dynamics::{run_dynamics, window_series, write_attention_csv, GroupMap, GroupedStream};
use attnet_core::graph::{build_graph, degree_distribution, giant_component, read_snapshot, symmetrize, write_snapshot, NodeRegistry, RetweetGraph};
use attnet_core::ingest::{geo_table, parse_events, parse_streams, read_categories, read_countries, write_categories, write_countries, write_events, Gazetteer, GeoTable, TweetEvent, UserTable};
use attnet_core::profile::{assign_super_communities, knee_point, profile_communities, standardize, ward_cluster, write_profiles, write_super_community_map, EntropyMode, Rulebook};
use attnet_core::stats::fit_powerlaw_cutoff;
use attnet_core::synth::generate;
use attnet_core::{Category, SuperCommunity, TimeWindow};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::manifest::{hash_file, hash_json, read_json, write_atomic, write_json, Manifest, StageEntry};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Synth,
    Ingest,
    Graph,
    Communities,
    Profile,
    Dynamics,
    Attention,
    Stats,
}

impl Stage {
    pub const PIPELINE: [Stage; 8] = [
        Stage::Synth,
        Stage::Ingest,
        Stage::Graph,
        Stage::Communities,
        Stage::Profile,
        Stage::Dynamics,
        Stage::Attention,
        Stage::Stats,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Graph => "graph",
            Stage::Communities => "communities",
            Stage::Profile => "profile",
            Stage::Dynamics => "dynamics",
            Stage::Attention => "attention",
            Stage::Stats => "stats",
        }
    }

    fn deps(self, cfg: &RunConfig) -> Vec<Stage> {
        use Stage::*;
        match self {
            Synth => vec![],
            Ingest if cfg.synth.is_some() => vec![Synth],
            Ingest => vec![],
            Graph => vec![Ingest],
            Communities => vec![Graph],
            Profile => vec![Ingest, Graph, Communities],
            Dynamics | Attention => vec![Ingest, Profile],
            Stats => vec![Graph],
        }
    }
}

/// Output file of a stage, relative to the out dir.
fn rel(stage: Stage, file: &str) -> String {
    format!("{}/{}", stage.name(), file)
}

fn core(e: attnet_core::Error) -> CliError {
    match e {
        attnet_core::Error::Config(m) => CliError::Config(m),
        other => CliError::Runtime(other.to_string()),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    Ok(BufReader::with_capacity(1 << 20, File::open(path).map_err(|e| io_err(path, e))?))
}

const EVERYTHING: TimeWindow = TimeWindow { start: i64::MIN, end: i64::MAX };

pub struct Runner {
    cfg: RunConfig,
    out: PathBuf,
    manifest: Manifest,
    config_hash: String,
}

struct Produced {
    outputs: Vec<String>,
    summary: Value,
}

impl Runner {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let out = cfg.paths.out.clone();
        std::fs::create_dir_all(&out)
            .map_err(|e| CliError::Config(format!("out dir {} is not writable: {e}", out.display())))?;
        let manifest = Manifest::load(&out)?;
        let config_hash = hash_json(&cfg);
        Ok(Runner { cfg, out, manifest, config_hash })
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    /// Stages `all` runs, in dependency order.
    pub fn pipeline(&self) -> Vec<Stage> {
        Stage::PIPELINE.into_iter().filter(|&s| s != Stage::Synth || self.cfg.synth.is_some()).collect()
    }

    /// Earliest stage in the transitive prerequisites of `stage` without
    /// intact outputs.
    fn missing_prerequisite(&self, stage: Stage) -> Result<Option<Stage>, CliError> {
        let mut need = stage.deps(&self.cfg);
        let mut i = 0;
        while i < need.len() {
            for d in need[i].deps(&self.cfg) {
                if !need.contains(&d) {
                    need.push(d);
                }
            }
            i += 1;
        }
        need.sort();
        for s in need {
            if self.manifest.intact(&self.out, s.name())?.is_none() {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    /// Input files, keyed by out-relative path or absolute path.
    fn inputs(&self, stage: Stage) -> Vec<(String, PathBuf)> {
        let internal = |s: Stage, f: &str| (rel(s, f), self.path(&rel(s, f)));
        let external = |p: &PathBuf| (p.display().to_string(), p.clone());
        let mut v = Vec::new();
        match stage {
            Stage::Synth => {}
            Stage::Ingest => {
                if self.cfg.synth.is_some() {
                    v.push(internal(Stage::Synth, "events.jsonl"));
                    v.push(internal(Stage::Synth, "categories.csv"));
                } else {
                    v.extend(self.cfg.paths.events.iter().map(external));
                    v.extend(self.cfg.paths.categories.iter().map(external));
                }
                v.extend(self.cfg.paths.gazetteer.iter().map(external));
            }
            Stage::Graph => v.push(internal(Stage::Ingest, "events.jsonl")),
            Stage::Communities => v.push(internal(Stage::Graph, "giant.bin")),
            Stage::Profile => {
                v.push(internal(Stage::Graph, "giant.bin"));
                v.push(internal(Stage::Communities, "ranked.json"));
                v.push(internal(Stage::Ingest, "categories.csv"));
                v.push(internal(Stage::Ingest, "countries.csv"));
                if self.cfg.profile.entropy == EntropyMode::Tweets {
                    v.push(internal(Stage::Ingest, "geo.json"));
                }
                v.extend(self.cfg.paths.rulebook.iter().map(external));
            }
            Stage::Dynamics | Stage::Attention => {
                v.push(internal(Stage::Ingest, "events.jsonl"));
                v.push(internal(Stage::Profile, "users.csv"));
            }
            Stage::Stats => v.push(internal(Stage::Graph, "graph.bin")),
        }
        v
    }

    /// Hash of the config that affects `stage`'s outputs.
    fn stage_config_hash(&self, stage: Stage) -> Result<String, CliError> {
        let c = &self.cfg;
        Ok(match stage {
            Stage::Synth => hash_json(&c.synth),
            Stage::Ingest => hash_json(&self.cfg.observation_window().ok()),
            Stage::Graph => hash_json(&()),
            Stage::Communities => hash_json(&c.louvain),
            Stage::Profile => hash_json(&c.profile),
            Stage::Dynamics => hash_json(&(&c.dynamics, self.cfg.observation_window()?)),
            Stage::Attention => hash_json(&(&c.attention, self.cfg.observation_window()?)),
            Stage::Stats => hash_json(&c.stats),
        })
    }

    /// Run one stage, or skip it when its manifest entry still matches.
    pub fn run(&mut self, stage: Stage) -> Result<Value, CliError> {
        if let Some(missing) = self.missing_prerequisite(stage)? {
            return Err(CliError::Missing { stage: stage.name(), run: missing.name() });
        }
        let started = Instant::now();
        let config_hash = self.stage_config_hash(stage)?;
        let mut inputs = BTreeMap::new();
        for (key, path) in self.inputs(stage) {
            inputs.insert(key, hash_file(&path)?);
        }
        let report_path = self.path(&rel(stage, "report.json"));
        if let Some(prev) = self.manifest.intact(&self.out, stage.name())? {
            if prev.config_hash == config_hash && prev.inputs == inputs && report_path.is_file() {
                let mut report: Value = read_json(&report_path)?;
                report["cache_hit"] = json!(true);
                write_json(&report_path, &report)?;
                log::info!("{}: unchanged inputs, skipped", stage.name());
                return Ok(report);
            }
        }
        // Invalidate before writing so a failed run never looks complete.
        if self.manifest.stages.remove(stage.name()).is_some() {
            self.manifest.save(&self.out)?;
        }
        let produced = match stage {
            Stage::Synth => self.synth()?,
            Stage::Ingest => self.ingest()?,
            Stage::Graph => self.graph()?,
            Stage::Communities => self.communities()?,
            Stage::Profile => self.profile()?,
            Stage::Dynamics => self.dynamics()?,
            Stage::Attention => self.attention()?,
            Stage::Stats => self.stats()?,
        };
        let mut outputs = BTreeMap::new();
        for o in &produced.outputs {
            outputs.insert(o.clone(), hash_file(&self.path(o))?);
        }
        let report = json!({
            "stage": stage.name(),
            "cache_hit": false,
            "config_hash": self.config_hash,
            "stage_config_hash": config_hash,
            "inputs": inputs,
            "outputs": outputs,
            "summary": produced.summary,
        });
        write_json(&report_path, &report)?;
        self.manifest.stages.insert(stage.name().to_string(), StageEntry { config_hash, inputs, outputs });
        self.manifest.save(&self.out)?;
        log::info!("{}: done in {:.2?}", stage.name(), started.elapsed());
        Ok(report)
    }

    fn load_events(&self) -> Result<Vec<TweetEvent>, CliError> {
        let path = self.path(&rel(Stage::Ingest, "events.jsonl"));
        let bytes = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
        let (events, report) = parse_events(&bytes, EVERYTHING);
        if report.malformed > 0 {
            return Err(CliError::Runtime(format!("{} has {} malformed lines; rerun ingest", path.display(), report.malformed)));
        }
        Ok(events)
    }

    fn load_snapshot(&self, file: &str) -> Result<(NodeRegistry, RetweetGraph), CliError> {
        read_snapshot(open(&self.path(&rel(Stage::Graph, file)))?).map_err(core)
    }

    fn load_group_map(&self) -> Result<GroupMap, CliError> {
        let path = self.path(&rel(Stage::Profile, "users.csv"));
        let mut rdr = csv::Reader::from_reader(open(&path)?);
        let mut groups = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            let sc: SuperCommunity = rec[2].parse().map_err(core)?;
            groups.push((rec[0].to_string(), sc));
        }
        Ok(GroupMap::new(groups))
    }

    fn write<F>(&self, stage: Stage, file: &str, outputs: &mut Vec<String>, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn std::io::Write) -> attnet_core::Result<()>,
    {
        let r = rel(stage, file);
        write_atomic(&self.path(&r), body)?;
        outputs.push(r);
        Ok(())
    }

    fn write_json<T: Serialize>(&self, stage: Stage, file: &str, outputs: &mut Vec<String>, value: &T) -> Result<(), CliError> {
        let r = rel(stage, file);
        write_json(&self.path(&r), value)?;
        outputs.push(r);
        Ok(())
    }

    fn synth(&self) -> Result<Produced, CliError> {
        let s = self.cfg.synth.as_ref().ok_or_else(|| CliError::Config("the synth stage needs a [synth] section".into()))?;
        let out = generate(s).map_err(core)?;
        let mut outputs = Vec::new();
        let st = Stage::Synth;
        self.write(st, "events.jsonl", &mut outputs, |w| write_events(&out.events, w))?;
        let cats: HashMap<String, Category> = out.categories.iter().map(|(u, c)| (u.clone(), *c)).collect();
        self.write(st, "categories.csv", &mut outputs, |w| write_categories(&cats, w))?;
        self.write(st, "blocks.csv", &mut outputs, |w| out.truth.write_blocks_csv(w))?;
        self.write_json(st, "truth.json", &mut outputs, &out.truth)?;
        let retweets = out.events.iter().filter(|e| e.is_retweet()).count();
        Ok(Produced {
            outputs,
            summary: json!({
                "events": out.events.len(),
                "retweets": retweets,
                "users": out.truth.user_ids.len(),
                "blocks": out.truth.block_names,
            }),
        })
    }

    fn ingest(&self) -> Result<Produced, CliError> {
        let window = self.cfg.observation_window()?;
        let (event_files, category_file) = if self.cfg.synth.is_some() {
            (vec![self.path(&rel(Stage::Synth, "events.jsonl"))], Some(self.path(&rel(Stage::Synth, "categories.csv"))))
        } else {
            (self.cfg.paths.events.clone(), self.cfg.paths.categories.clone())
        };
        let mut buffers = Vec::with_capacity(event_files.len());
        for f in &event_files {
            buffers.push(std::fs::read(f).map_err(|e| io_err(f, e))?);
        }
        let slices: Vec<&[u8]> = buffers.iter().map(Vec::as_slice).collect();
        let (events, report) = parse_streams(&slices, window);
        drop(buffers);
        let gazetteer = match &self.cfg.paths.gazetteer {
            Some(p) => Gazetteer::from_tsv(open(p)?).map_err(core)?,
            None => Gazetteer::builtin(),
        };
        let mut warnings = report.warnings.clone();
        let categories = match &category_file {
            Some(p) => read_categories(open(p)?).map_err(core)?,
            None => {
                warnings.push("no category file; every user counts as Other".into());
                HashMap::new()
            }
        };
        let geo = geo_table(&events, &gazetteer);
        let countries = geo.countries();
        let located = countries.values().filter(|c| c.is_some()).count();
        let mut outputs = Vec::new();
        let st = Stage::Ingest;
        self.write(st, "events.jsonl", &mut outputs, |w| write_events(&events, w))?;
        self.write(st, "categories.csv", &mut outputs, |w| write_categories(&categories, w))?;
        self.write(st, "countries.csv", &mut outputs, |w| write_countries(&countries, w))?;
        self.write_json(st, "geo.json", &mut outputs, &geo)?;
        Ok(Produced {
            outputs,
            summary: json!({
                "window": window,
                "accounting": report,
                "authors": countries.len(),
                "located_authors": located,
                "categorized_users": categories.len(),
                "gazetteer_patterns": gazetteer.len(),
                "warnings": warnings,
            }),
        })
    }

    fn graph(&self) -> Result<Produced, CliError> {
        let events = self.load_events()?;
        let (registry, graph) = build_graph(&events).map_err(core)?;
        drop(events);
        let (greg, giant, components) = giant_component(&registry, &graph);
        let degrees = degree_distribution(&graph);
        let mut outputs = Vec::new();
        let st = Stage::Graph;
        self.write(st, "graph.bin", &mut outputs, |w| write_snapshot(&registry, &graph, w))?;
        self.write(st, "giant.bin", &mut outputs, |w| write_snapshot(&greg, &giant, w))?;
        self.write(st, "degree.csv", &mut outputs, |w| degrees.write_csv(w))?;
        Ok(Produced {
            outputs,
            summary: json!({
                "nodes": graph.node_count(),
                "edges": graph.edge_count(),
                "retweets": graph.total_weight(),
                "giant_component": components,
                "top_0.1pct_users": degrees.top_fraction(0.001),
            }),
        })
    }

    fn communities(&self) -> Result<Produced, CliError> {
        let (registry, graph) = self.load_snapshot("giant.bin")?;
        let sym = symmetrize(&graph);
        drop(graph);
        let l = &self.cfg.louvain;
        let lc = LouvainConfig { resolution: l.resolution, seed: l.seed, ..LouvainConfig::default() };
        let partition = consensus(&sym, &lc, l.runs).map_err(core)?;
        let ranked = rank_communities(&partition, l.min_community_size);
        let mut outputs = Vec::new();
        let st = Stage::Communities;
        self.write_json(st, "ranked.json", &mut outputs, &ranked)?;
        self.write(st, "communities.csv", &mut outputs, |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["user_id", "community_label", "agreement"])?;
            // Communities below the size floor keep their consensus id.
            for (v, id) in registry.ids().iter().enumerate() {
                let label = match ranked.label_of(v) {
                    Some(l) => l.to_string(),
                    None => format!("residual:{}", partition.assignment[v]),
                };
                wtr.write_record([id.as_str(), &label, &partition.agreement[v].to_string()])?;
            }
            wtr.flush()?;
            Ok(())
        })?;
        let sizes: BTreeMap<&str, usize> = ranked.communities.iter().map(|c| (c.label.as_str(), c.size)).collect();
        Ok(Produced {
            outputs,
            summary: json!({
                "nodes": registry.len(),
                "communities": partition.community_count(),
                "modularity": partition.modularity,
                "runs": partition.run_summaries,
                "ranked": sizes,
                "residual": ranked.residual_size,
                "coverage": ranked.coverage,
                "warnings": ranked.warnings,
            }),
        })
    }

    fn profile(&self) -> Result<Produced, CliError> {
        let (registry, graph) = self.load_snapshot("giant.bin")?;
        let ranked: RankedCommunities = read_json(&self.path(&rel(Stage::Communities, "ranked.json")))?;
        let categories = read_categories(open(&self.path(&rel(Stage::Ingest, "categories.csv")))?).map_err(core)?;
        let countries = read_countries(open(&self.path(&rel(Stage::Ingest, "countries.csv")))?).map_err(core)?;
        let users = UserTable::new(categories, countries);
        let mode = self.cfg.profile.entropy;
        let geo: Option<GeoTable> = match mode {
            EntropyMode::Tweets => Some(read_json(&self.path(&rel(Stage::Ingest, "geo.json")))?),
            EntropyMode::Users => None,
        };
        let profiles = profile_communities(&ranked, &registry, &graph, &users, geo.as_ref(), mode).map_err(core)?;
        let features = standardize(&profiles).map_err(core)?;
        let dendrogram = ward_cluster(&features.z).map_err(core)?;
        let knee = knee_point(&dendrogram);
        let k = match (self.cfg.profile.k, &knee) {
            (Some(k), _) => k,
            (None, Ok(knee)) => knee.k,
            (None, Err(e)) => {
                return Err(CliError::Runtime(format!("cannot pick the cluster count ({e}); set profile.k")));
            }
        };
        let rulebook = match &self.cfg.paths.rulebook {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
                Rulebook::from_toml(&text).map_err(core)?
            }
            None => Rulebook::default(),
        };
        let naming = assign_super_communities(&features, &dendrogram, k, &rulebook).map_err(core)?;
        let mut outputs = Vec::new();
        let st = Stage::Profile;
        self.write(st, "profiles.csv", &mut outputs, |w| write_profiles(&profiles, w))?;
        self.write_json(st, "features.json", &mut outputs, &features)?;
        self.write_json(st, "dendrogram.json", &mut outputs, &dendrogram)?;
        self.write_json(st, "naming.json", &mut outputs, &naming)?;
        self.write(st, "super_communities.csv", &mut outputs, |w| write_super_community_map(&naming, w))?;
        let per_rank: Vec<SuperCommunity> = ranked
            .communities
            .iter()
            .map(|c| naming.get(&c.label).ok_or_else(|| CliError::Runtime(format!("community {} was not named", c.label))))
            .collect::<Result<_, _>>()?;
        self.write(st, "users.csv", &mut outputs, |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["user_id", "community", "super_community"])?;
            for (v, r) in ranked.node_rank.iter().enumerate() {
                if let Some(r) = *r {
                    wtr.write_record([registry.id(v as u32), ranked.communities[r].label.as_str(), per_rank[r].name()])?;
                }
            }
            wtr.flush()?;
            Ok(())
        })?;
        let mut warnings = features.warnings.clone();
        warnings.extend(naming.warnings.iter().cloned());
        Ok(Produced {
            outputs,
            summary: json!({
                "communities": profiles.len(),
                "knee": knee.ok(),
                "k": k,
                "super_communities": naming.map.iter().map(|(l, s)| (l.clone(), s.name())).collect::<BTreeMap<_, _>>(),
                "warnings": warnings,
            }),
        })
    }

    fn dynamics(&self) -> Result<Produced, CliError> {
        let period = self.cfg.observation_window()?;
        let events = self.load_events()?;
        let map = self.load_group_map()?;
        let stream = GroupedStream::new(&events, &map);
        drop(events);
        let mut outputs = Vec::new();
        let mut per_spec = Vec::new();
        for spec in &self.cfg.dynamics.windows {
            let (width, step) = spec.seconds();
            let series = window_series(period, width, step).map_err(core)?;
            let report = run_dynamics(&stream, &series);
            let tag = spec.tag();
            self.write(Stage::Dynamics, &format!("attention_{tag}.csv"), &mut outputs, |w| write_attention_csv(&report, w))?;
            self.write_json(Stage::Dynamics, &format!("mixing_{tag}.json"), &mut outputs, &report)?;
            let mut warnings = series.warnings.clone();
            warnings.extend(report.warnings.iter().cloned());
            per_spec.push(json!({
                "width_days": spec.width_days,
                "step_days": spec.step_days,
                "windows": report.windows.len(),
                "warnings": warnings,
            }));
        }
        Ok(Produced {
            outputs,
            summary: json!({
                "unmapped_users": stream.unmapped_users,
                "unmapped_retweets": stream.unmapped_retweets,
                "series": per_spec,
            }),
        })
    }

    fn attention(&self) -> Result<Produced, CliError> {
        let period = self.cfg.observation_window()?;
        let a = &self.cfg.attention;
        let events = self.load_events()?;
        let map = self.load_group_map()?;
        let log = RetweetLog::new(&events, &map);
        drop(events);
        let records = attention_records(&log);
        let cohort = select_top_users(&records, a.cohort);
        let (width, step) = a.window.seconds();
        let series = window_series(period, width, step).map_err(core)?;
        let bootstrap = BootstrapConfig { resamples: a.bootstrap_resamples, level: a.bootstrap_level, seed: a.bootstrap_seed };
        let trajectory = rolling_attention(&log, &cohort, &series, &bootstrap).map_err(core)?;
        let mut outputs = Vec::new();
        let st = Stage::Attention;
        self.write(st, "cohort.csv", &mut outputs, |w| write_cohort_csv(&cohort, w))?;
        self.write(st, "trajectory.csv", &mut outputs, |w| write_trajectory_csv(&trajectory, w))?;
        let mean_ranks: Vec<Value> = trajectory
            .windows
            .iter()
            .map(|w| json!({ "window": w.window, "retweets": w.r_rt.mean_rank, "h_index": w.r_h.mean_rank }))
            .collect();
        let mut warnings = series.warnings.clone();
        warnings.extend(cohort.warnings.iter().cloned());
        warnings.extend(trajectory.warnings.iter().cloned());
        Ok(Produced {
            outputs,
            summary: json!({
                "retweets": log.total_retweets,
                "retweets_of_unknown_tweets": log.unknown_tweet_retweets,
                "cohort_size": cohort.members.len(),
                "cohort_retweet_share": cohort.retweet_share,
                "mean_ranks": mean_ranks,
                "skipped_windows": trajectory.skipped,
                "warnings": warnings,
            }),
        })
    }

    fn stats(&self) -> Result<Produced, CliError> {
        let (_, graph) = self.load_snapshot("graph.bin")?;
        let degrees: Vec<u64> = graph.weighted_out_degrees().into_iter().filter(|&d| d > 0).collect();
        let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
        for &d in &degrees {
            *histogram.entry(d).or_insert(0) += 1;
        }
        // A tail too small or degenerate to fit is a result, not a failure.
        let fit = fit_powerlaw_cutoff(&degrees, self.cfg.stats.x_min);
        let fit_json = match &fit {
            Ok(r) => json!({ "fit": r }),
            Err(e) => json!({ "fit": null, "error": e.to_string() }),
        };
        let mut outputs = Vec::new();
        let st = Stage::Stats;
        self.write_json(st, "fit.json", &mut outputs, &fit_json)?;
        self.write(st, "degree_hist.csv", &mut outputs, |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["retweets_received", "users"])?;
            for (d, c) in &histogram {
                wtr.write_record([d.to_string(), c.to_string()])?;
            }
            wtr.flush()?;
            Ok(())
        })?;
        let summary = match fit {
            Ok(r) => json!({
                "users_with_retweets": degrees.len(),
                "model": r.selected.model,
                "x_min": r.selected.x_min,
                "alpha": r.selected.alpha,
                "lambda": r.selected.lambda,
                "n_tail": r.selected.n_tail,
                "p_value": r.p_value,
            }),
            Err(e) => json!({ "users_with_retweets": degrees.len(), "error": e.to_string() }),
        };
        Ok(Produced { outputs, summary })
    }
}
