//! Pipeline configuration and orchestration: parse, select, score, fronts, metrics, hubs and
//! main path, with every intermediate artifact written to the output directory.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::artifacts::{self, write_json};
use crate::axis::{homophily_assortativity, score_network, Thresholds, TranslationalProfile};
use crate::corpus::{co_citation_projection, parse_corpus, CitationNetwork, Lexicon, ParseOptions, Parsed};
use crate::error::{Error, Result};
use crate::fronts::{hierarchical_fronts, FrontTree, HierarchyConfig};
use crate::graph::Graph;
use crate::hubs::{detect_translational_hubs, hub_regions, HubCandidate, HubConfig};
use crate::mainpath::{main_path, MainPath};
use crate::metrics::{ck_scaling, node_metrics, NodeMetrics, ScalingOptions};
use crate::report::{FrontTable, KTReport, MainPathRecord};
use crate::selection::{bootstrap_p_value, fit_power_law, select_top_cited, PowerLawFit, RankBy};

/// Graph the fronts are clustered on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMode {
    /// Undirected projection of the citation network.
    #[default]
    Citation,
    /// Weighted co-citation graph.
    Cocitation,
}

impl FromStr for ClusterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "citation" => Ok(ClusterMode::Citation),
            "cocitation" => Ok(ClusterMode::Cocitation),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}` (expected citation or cocitation)"))),
        }
    }
}

/// Fully resolved run configuration; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub lexicon_basic: Option<PathBuf>,
    pub lexicon_clinical: Option<PathBuf>,
    pub lenient: bool,
    pub fraction: f64,
    pub rank_by: RankBy,
    pub thresholds: Thresholds,
    pub hubs: HubConfig,
    pub fronts: HierarchyConfig,
    pub mode: ClusterMode,
    pub scaling: ScalingOptions,
    /// Bootstrap replicates for the power-law p-value; 0 disables it.
    pub bootstrap: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            nodes: PathBuf::new(),
            edges: PathBuf::new(),
            lexicon_basic: None,
            lexicon_clinical: None,
            lenient: false,
            fraction: 0.2,
            rank_by: RankBy::InDegree,
            thresholds: Thresholds::default(),
            hubs: HubConfig::default(),
            fronts: HierarchyConfig::default(),
            mode: ClusterMode::Citation,
            scaling: ScalingOptions::default(),
            bootstrap: 0,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    /// Parses a TOML config; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.nodes);
        resolve(&mut cfg.edges);
        resolve(&mut cfg.out_dir);
        if let Some(p) = cfg.lexicon_basic.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.lexicon_clinical.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("nodes", &self.nodes), ("edges", &self.edges)] {
            if p.as_os_str().is_empty() {
                return Err(Error::Config(format!("`{name}` file not set")));
            }
            if !p.is_file() {
                return Err(Error::Config(format!("{name} file {} does not exist", p.display())));
            }
        }
        match (&self.lexicon_basic, &self.lexicon_clinical) {
            (None, None) => {}
            (Some(b), Some(c)) => {
                for p in [b, c] {
                    if !p.is_file() {
                        return Err(Error::Config(format!("lexicon file {} does not exist", p.display())));
                    }
                }
            }
            _ => return Err(Error::Config("lexicon_basic and lexicon_clinical must be given together".into())),
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!("fraction must lie in (0, 1], got {}", self.fraction)));
        }
        if self.fronts.max_depth < 2 {
            return Err(Error::InvalidParameter(format!("max_depth must be >= 2, got {}", self.fronts.max_depth)));
        }
        self.thresholds.validate()?;
        self.hubs.validate()
    }
}

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Parse,
    Select,
    Fit,
    Score,
    Fronts,
    Metrics,
    Hubs,
    MainPath,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Parse => "parse",
            Stage::Select => "select",
            Stage::Fit => "fit",
            Stage::Score => "score",
            Stage::Fronts => "fronts",
            Stage::Metrics => "metrics",
            Stage::Hubs => "hubs",
            Stage::MainPath => "main_path",
            Stage::Report => "report",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

/// Contents of the marker left in the output directory by a failed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompleteMarker {
    pub complete: bool,
    pub failed_stage: Stage,
    pub error: String,
    pub completed_stages: Vec<Stage>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn read_corpus(nodes: &Path, edges: &Path, lenient: bool) -> Result<Parsed> {
    parse_corpus(open(nodes)?, open(edges)?, ParseOptions { lenient })
}

pub fn read_lexicon(basic: &Path, clinical: &Path) -> Result<Lexicon> {
    Lexicon::from_readers(open(basic)?, open(clinical)?)
}

/// Citation counts the power law is fitted to.
pub fn citation_counts(net: &CitationNetwork, rank_by: RankBy) -> Result<Vec<u64>> {
    (0..net.len())
        .map(|v| match rank_by {
            RankBy::InDegree => Ok(net.in_degree(v) as u64),
            RankBy::ExternalCitations => {
                net.document(v).ext_citations.ok_or_else(|| Error::MissingExternalCitations(net.id(v).to_string()))
            }
        })
        .collect()
}

/// Power-law fit of the citation counts, with an optional bootstrap p-value.
pub fn fit_degrees(net: &CitationNetwork, rank_by: RankBy, bootstrap: usize, seed: u64) -> Result<PowerLawFit> {
    let counts = citation_counts(net, rank_by)?;
    let mut fit = fit_power_law(&counts)?;
    if bootstrap > 0 {
        fit.p_value = Some(bootstrap_p_value(&counts, &fit, bootstrap, seed)?);
    }
    Ok(fit)
}

/// The graph fronts are clustered on, laid out over every node of `net`.
pub fn clustering_graph(net: &CitationNetwork, mode: ClusterMode) -> Graph {
    match mode {
        ClusterMode::Citation => net.projection().clone(),
        ClusterMode::Cocitation => co_citation_projection(net).to_network_graph(net.len()),
    }
}

pub fn cluster_fronts(net: &CitationNetwork, mode: ClusterMode, config: HierarchyConfig) -> Result<FrontTree> {
    hierarchical_fronts(&clustering_graph(net, mode), config)
}

pub fn front_table(tree: &FrontTree, mode: ClusterMode) -> FrontTable {
    FrontTable::new(tree, mode)
}

pub fn main_path_record(net: &CitationNetwork, path: &MainPath) -> MainPathRecord {
    MainPathRecord {
        ids: path.nodes.iter().map(|&v| net.id(v).to_string()).collect(),
        spc: path.spc.iter().map(|c| c.to_string()).collect(),
        warnings: path.warnings.clone(),
    }
}

/// Everything computed by a successful run.
pub struct PipelineOutput {
    pub network: CitationNetwork,
    pub core: CitationNetwork,
    pub profiles: Vec<TranslationalProfile>,
    pub tree: FrontTree,
    pub metrics: Vec<NodeMetrics>,
    pub hubs: Vec<HubCandidate>,
    pub report: KTReport,
}

struct Runner<'a> {
    out: &'a Path,
    done: Vec<Stage>,
}

impl Runner<'_> {
    fn stage<T>(&mut self, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T, StageError> {
        log::info!("stage {stage}");
        match f() {
            Ok(v) => {
                self.done.push(stage);
                Ok(v)
            }
            Err(source) => {
                let marker = IncompleteMarker {
                    complete: false,
                    failed_stage: stage,
                    error: source.to_string(),
                    completed_stages: self.done.clone(),
                };
                if let Err(e) = write_json(&self.out.join(artifacts::INCOMPLETE), &marker) {
                    log::error!("could not write the incomplete marker: {e}");
                }
                let _ = std::fs::remove_file(self.out.join(artifacts::REPORT));
                Err(StageError { stage, source })
            }
        }
    }
}

/// Runs every stage and writes the artifacts and the report into `config.out_dir`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<KTReport, StageError> {
    run_pipeline_full(config).map(|o| o.report)
}

pub fn run_pipeline_full(config: &PipelineConfig) -> Result<PipelineOutput, StageError> {
    let out = config.out_dir.as_path();
    std::fs::create_dir_all(out).map_err(|e| StageError { stage: Stage::Config, source: e.into() })?;
    let _ = std::fs::remove_file(out.join(artifacts::INCOMPLETE));
    let mut run = Runner { out, done: Vec::new() };

    run.stage(Stage::Config, || config.validate())?;

    let parsed = run.stage(Stage::Parse, || {
        let parsed = read_corpus(&config.nodes, &config.edges, config.lenient)?;
        artifacts::save_network(out, artifacts::NETWORK, &parsed.network)?;
        write_json(
            &out.join(artifacts::PARSE),
            &serde_json::json!({
                "documents": parsed.network.len(),
                "citations": parsed.network.edge_count(),
                "warnings": parsed.warnings,
            }),
        )?;
        Ok(parsed)
    })?;
    let network = parsed.network;

    let core = run.stage(Stage::Select, || {
        let core = select_top_cited(&network, config.fraction, config.rank_by)?;
        artifacts::save_network(out, artifacts::CORE, &core)?;
        write_json(
            &out.join(artifacts::SELECTION),
            &serde_json::json!({
                "fraction": config.fraction,
                "rank_by": config.rank_by,
                "selected": core.len(),
                "of": network.len(),
            }),
        )?;
        Ok(core)
    })?;

    // diagnostics that may legitimately be undefined on a given corpus
    let fit = run.stage(Stage::Fit, || {
        let fit = fit_degrees(&network, config.rank_by, config.bootstrap, config.seed);
        match &fit {
            Ok(f) => write_json(&out.join(artifacts::FIT), f)?,
            Err(e) => log::warn!("power-law fit unavailable: {e}"),
        }
        Ok(fit)
    })?;

    let profiles = run.stage(Stage::Score, || {
        let lexicon = match (&config.lexicon_basic, &config.lexicon_clinical) {
            (Some(b), Some(c)) => Some(read_lexicon(b, c)?),
            _ => None,
        };
        let profiles = score_network(&core, lexicon.as_ref(), config.thresholds)?;
        artifacts::write_scores(&out.join(artifacts::SCORES), &core, &profiles)?;
        Ok(profiles)
    })?;
    let scores: Vec<Option<f64>> = profiles.iter().map(|p| p.score).collect();

    let tree = run.stage(Stage::Fronts, || {
        let tree = cluster_fronts(&core, config.mode, config.fronts)?;
        artifacts::write_front_table(&out.join(artifacts::FRONTS_TABLE), &core, &tree)?;
        write_json(&out.join(artifacts::FRONTS), &front_table(&tree, config.mode))?;
        Ok(tree)
    })?;
    let top = tree.labels_at(2);

    let (metrics, scaling) = run.stage(Stage::Metrics, || {
        let metrics = node_metrics(core.projection(), &top)?;
        artifacts::write_metrics(&out.join(artifacts::METRICS), &core, &metrics)?;
        let scaling = ck_scaling(core.projection(), config.scaling);
        match &scaling {
            Ok(s) => write_json(&out.join(artifacts::SCALING), s)?,
            Err(e) => log::warn!("C(k) scaling unavailable: {e}"),
        }
        Ok((metrics, scaling))
    })?;

    let (hubs, regions) = run.stage(Stage::Hubs, || {
        let hubs = detect_translational_hubs(&core, &top, &scores, &config.hubs)?;
        let regions = hub_regions(&core, &hubs);
        write_json(&out.join(artifacts::HUBS), &hubs)?;
        write_json(&out.join(artifacts::HUB_REGIONS), &regions)?;
        Ok((hubs, regions))
    })?;

    let path = run.stage(Stage::MainPath, || {
        let path = main_path(&core)?;
        write_json(&out.join(artifacts::MAIN_PATH), &main_path_record(&core, &path))?;
        Ok(path)
    })?;

    let assortativity: Result<Option<f64>> = homophily_assortativity(&core, &scores);
    let report = run.stage(Stage::Report, || {
        let report = KTReport::assemble(crate::report::ReportInputs {
            config,
            network: &network,
            warnings: &parsed.warnings,
            core: &core,
            fit: &fit,
            scaling: &scaling,
            assortativity: &assortativity,
            profiles: &profiles,
            tree: &tree,
            mode: config.mode,
            hubs: &hubs,
            regions: &regions,
            main_path: main_path_record(&core, &path),
        })?;
        write_json(&out.join(artifacts::REPORT), &report)?;
        std::fs::write(out.join(artifacts::REPORT_TEXT), crate::report::render_text(&report))?;
        Ok(report)
    })?;

    Ok(PipelineOutput { network, core, profiles, tree, metrics, hubs, report })
}
