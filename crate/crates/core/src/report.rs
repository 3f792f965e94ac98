//! The KT map report: a self-contained JSON document summarizing a run, and a plain-text
//! rendering of it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::axis::{classify, ClassHistogram, TranslationalClass, TranslationalProfile};
use crate::corpus::CitationNetwork;
use crate::error::Result;
use crate::fronts::{Front, FrontTree};
use crate::hubs::HubCandidate;
use crate::metrics::ScalingFit;
use crate::pipeline::{ClusterMode, PipelineConfig};
use crate::selection::PowerLawFit;

pub const TOOL: &str = "ktmap";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRecord {
    pub path: String,
    pub level: usize,
    pub size: usize,
    /// Modularity of this front's split into children, if it was split.
    pub split_q: Option<f64>,
}

/// Front hierarchy without score information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTable {
    pub mode: ClusterMode,
    /// Modularity of the level-2 partition.
    pub top_q: f64,
    pub depth: usize,
    pub fronts: Vec<FrontRecord>,
}

impl FrontTable {
    pub fn new(tree: &FrontTree, mode: ClusterMode) -> Self {
        FrontTable {
            mode,
            top_q: tree.top().q(),
            depth: tree.depth(),
            fronts: tree
                .fronts()
                .iter()
                .map(|f| FrontRecord { path: f.path_string(), level: f.level(), size: f.members.len(), split_q: f.split_q })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSummary {
    pub path: String,
    pub level: usize,
    pub size: usize,
    pub split_q: Option<f64>,
    pub mean_t: Option<f64>,
    pub share_unscored: f64,
    /// Class of the mean score; `unscored` when no member is scored.
    pub class: TranslationalClass,
    pub histogram: ClassHistogram,
}

/// Level-2 fronts grouped by the class of their mean score.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct L1Groups {
    pub basic: Vec<String>,
    pub translational: Vec<String>,
    pub clinical: Vec<String>,
    pub unscored: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontsSection {
    pub mode: ClusterMode,
    pub top_q: f64,
    pub depth: usize,
    pub level2_count: usize,
    /// Largest minus smallest mean score over the level-2 fronts.
    pub mean_t_spread: Option<f64>,
    pub l1: L1Groups,
    pub fronts: Vec<FrontSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub citations: usize,
    pub core_documents: usize,
    pub core_citations: usize,
    pub scored: usize,
    pub unscored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainPathRecord {
    pub ids: Vec<String>,
    /// Search path counts of the steps, as decimal strings.
    pub spc: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTReport {
    pub tool: String,
    pub version: String,
    pub generated_at: String,
    pub complete: bool,
    pub seed: u64,
    pub config: PipelineConfig,
    pub corpus: CorpusStats,
    pub warnings: Vec<String>,
    pub power_law: Option<PowerLawFit>,
    pub scaling: Option<ScalingFit>,
    pub assortativity: Option<f64>,
    /// Why optional results are absent.
    pub notes: Vec<String>,
    pub fronts: FrontsSection,
    pub hubs: Vec<HubCandidate>,
    pub hub_regions: Vec<Vec<String>>,
    pub main_path: MainPathRecord,
}

pub struct ReportInputs<'a> {
    pub config: &'a PipelineConfig,
    pub network: &'a CitationNetwork,
    pub warnings: &'a [String],
    pub core: &'a CitationNetwork,
    pub fit: &'a Result<PowerLawFit>,
    pub scaling: &'a Result<ScalingFit>,
    pub assortativity: &'a Result<Option<f64>>,
    pub profiles: &'a [TranslationalProfile],
    pub tree: &'a FrontTree,
    pub mode: ClusterMode,
    pub hubs: &'a [HubCandidate],
    pub regions: &'a [Vec<String>],
    pub main_path: MainPathRecord,
}

fn summarize(front: &Front, profiles: &[TranslationalProfile], config: &PipelineConfig) -> Result<FrontSummary> {
    let mut histogram = ClassHistogram::default();
    let (mut sum, mut scored) = (0.0, 0usize);
    for &v in &front.members {
        let p = profiles[v];
        match p.class {
            TranslationalClass::Basic => histogram.basic += 1,
            TranslationalClass::Translational => histogram.translational += 1,
            TranslationalClass::Clinical => histogram.clinical += 1,
            TranslationalClass::Unscored => histogram.unscored += 1,
        }
        if let Some(t) = p.score {
            sum += t;
            scored += 1;
        }
    }
    let size = front.members.len();
    let mean_t = (scored > 0).then(|| sum / scored as f64);
    Ok(FrontSummary {
        path: front.path_string(),
        level: front.level(),
        size,
        split_q: front.split_q,
        mean_t,
        share_unscored: (size - scored) as f64 / size as f64,
        class: match mean_t {
            Some(t) => classify(t, config.thresholds)?,
            None => TranslationalClass::Unscored,
        },
        histogram,
    })
}

impl KTReport {
    pub fn assemble(inp: ReportInputs<'_>) -> Result<Self> {
        let mut notes = Vec::new();
        let power_law = match inp.fit {
            Ok(f) => Some(f.clone()),
            Err(e) => {
                notes.push(format!("power-law fit unavailable: {e}"));
                None
            }
        };
        let scaling = match inp.scaling {
            Ok(s) => Some(*s),
            Err(e) => {
                notes.push(format!("C(k) scaling unavailable: {e}"));
                None
            }
        };
        let assortativity = match inp.assortativity {
            Ok(Some(r)) => Some(*r),
            Ok(None) => {
                notes.push("assortativity undefined: scores on one side of every edge have zero variance".into());
                None
            }
            Err(e) => {
                notes.push(format!("assortativity unavailable: {e}"));
                None
            }
        };

        let fronts: Vec<FrontSummary> =
            inp.tree.fronts().iter().map(|f| summarize(f, inp.profiles, inp.config)).collect::<Result<_>>()?;
        let mut l1 = L1Groups::default();
        let level2: Vec<&FrontSummary> = fronts.iter().filter(|f| f.level == 2).collect();
        for f in &level2 {
            let group = match f.class {
                TranslationalClass::Basic => &mut l1.basic,
                TranslationalClass::Translational => &mut l1.translational,
                TranslationalClass::Clinical => &mut l1.clinical,
                TranslationalClass::Unscored => &mut l1.unscored,
            };
            group.push(f.path.clone());
        }
        let means: Vec<f64> = level2.iter().filter_map(|f| f.mean_t).collect();
        let mean_t_spread = (!means.is_empty()).then(|| {
            means.iter().copied().fold(f64::NEG_INFINITY, f64::max) - means.iter().copied().fold(f64::INFINITY, f64::min)
        });
        let scored = inp.profiles.iter().filter(|p| p.score.is_some()).count();

        Ok(KTReport {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            complete: true,
            seed: inp.config.seed,
            config: inp.config.clone(),
            corpus: CorpusStats {
                documents: inp.network.len(),
                citations: inp.network.edge_count(),
                core_documents: inp.core.len(),
                core_citations: inp.core.edge_count(),
                scored,
                unscored: inp.profiles.len() - scored,
            },
            warnings: inp.warnings.to_vec(),
            power_law,
            scaling,
            assortativity,
            notes,
            fronts: FrontsSection {
                mode: inp.mode,
                top_q: inp.tree.top().q(),
                depth: inp.tree.depth(),
                level2_count: level2.len(),
                mean_t_spread,
                l1,
                fronts,
            },
            hubs: inp.hubs.to_vec(),
            hub_regions: inp.regions.to_vec(),
            main_path: inp.main_path,
        })
    }

    /// The report with its timestamp cleared; equal across reruns of the same inputs.
    pub fn without_timestamp(&self) -> KTReport {
        KTReport { generated_at: String::new(), ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.digits$}"))
}

/// Human-readable summary of a report.
pub fn render_text(r: &KTReport) -> String {
    let mut s = String::new();
    let c = &r.corpus;
    let _ = writeln!(s, "{} {} report ({})", r.tool, r.version, r.generated_at);
    if !r.complete {
        let _ = writeln!(s, "INCOMPLETE RUN");
    }
    let _ = writeln!(s, "corpus: {} documents, {} citations", c.documents, c.citations);
    let _ = writeln!(
        s,
        "core: {} documents, {} citations (fraction {}), {} scored, {} unscored",
        c.core_documents, c.core_citations, r.config.fraction, c.scored, c.unscored
    );
    match &r.power_law {
        Some(f) => {
            let _ = write!(s, "power law: alpha {:.3}, xmin {}, KS {:.4}, tail {}", f.alpha, f.xmin, f.ks_distance, f.n_tail);
            if let Some(p) = f.p_value {
                let _ = write!(s, ", p {p:.3}");
            }
            s.push('\n');
        }
        None => s.push_str("power law: n/a\n"),
    }
    match &r.scaling {
        Some(f) => {
            let _ = writeln!(s, "C(k) scaling: slope {:.3}, r2 {:.3}, {} bins", f.slope, f.r2, f.n_bins);
        }
        None => s.push_str("C(k) scaling: n/a\n"),
    }
    let _ = writeln!(s, "score assortativity: {}", opt(r.assortativity, 3));

    let f = &r.fronts;
    let _ = writeln!(
        s,
        "\nfronts ({} mode): {} at level 2, depth {}, Q {:.4}, mean-T spread {}",
        match f.mode {
            ClusterMode::Citation => "citation",
            ClusterMode::Cocitation => "co-citation",
        },
        f.level2_count,
        f.depth,
        f.top_q,
        opt(f.mean_t_spread, 3)
    );
    for fr in &f.fronts {
        let indent = "  ".repeat(fr.level - 1);
        let _ = writeln!(
            s,
            "{indent}{:<8} size {:>5}  mean T {:>5}  {}",
            fr.path,
            fr.size,
            opt(fr.mean_t, 3),
            fr.class.as_str()
        );
    }
    let l1 = &f.l1;
    let _ = writeln!(
        s,
        "L1: basic [{}], translational [{}], clinical [{}]",
        l1.basic.join(", "),
        l1.translational.join(", "),
        l1.clinical.join(", ")
    );

    let _ = writeln!(s, "\ntranslational hubs: {}", r.hubs.len());
    for h in &r.hubs {
        let fronts: Vec<String> = h.bridged_fronts.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(
            s,
            "  #{} {}  k {}  P {:.3}  T-spread {:.3}  score {:.3}  fronts [{}]",
            h.rank,
            h.id,
            h.degree,
            h.participation,
            h.t_spread,
            h.hub_score,
            fronts.join(", ")
        );
    }
    let _ = writeln!(s, "\nmain path ({} documents): {}", r.main_path.ids.len(), r.main_path.ids.join(" -> "));
    for w in r.warnings.iter().chain(&r.main_path.warnings) {
        let _ = writeln!(s, "warning: {w}");
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}
