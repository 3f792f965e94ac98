use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ktmap::artifacts::{self, read_json, write_json};
use ktmap::axis::{score_network, Thresholds};
use ktmap::export::{annotate, export_graph, ExportFormat};
use ktmap::fronts::HierarchyConfig;
use ktmap::hubs::{detect_translational_hubs, hub_regions, HubCandidate, HubConfig};
use ktmap::mainpath::main_path;
use ktmap::metrics::{ck_scaling, node_metrics, ScalingOptions};
use ktmap::pipeline::{self, ClusterMode, PipelineConfig};
use ktmap::selection::{select_top_cited, RankBy};
use ktmap::synth::{self, BlockLevel, PlantedConfig};
use ktmap::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Knowledge-translation maps of citation networks.
///
/// Each stage reads and writes files in the `--out` directory, so stages can be run one at a
/// time (parse, select, score, fronts, ...) or all at once with `report`.
#[derive(Parser, Debug)]
#[command(name = "ktmap", version)]
struct Cli {
    /// Run directory holding the artifacts of every stage [default: out, or the config's out_dir].
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read and validate a corpus.
    Parse {
        #[arg(long)]
        nodes: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        /// Drop malformed lines and dangling edges with a warning.
        #[arg(long)]
        lenient: bool,
    },
    /// Keep the most cited fraction of the parsed corpus.
    Select {
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long, value_enum, default_value_t = Rank::InDegree)]
        rank_by: Rank,
    },
    /// Fit a discrete power law to the citation counts.
    FitDegrees {
        /// Bootstrap replicates for a goodness-of-fit p-value.
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Rank::InDegree)]
        rank_by: Rank,
    },
    /// Translational scores of the selected documents.
    Score {
        #[arg(long, requires = "lexicon_clinical")]
        lexicon_basic: Option<PathBuf>,
        #[arg(long, requires = "lexicon_basic")]
        lexicon_clinical: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        low: f64,
        #[arg(long, default_value_t = 2.0 / 3.0)]
        high: f64,
    },
    /// Hierarchical research fronts.
    Fronts(FrontArgs),
    /// Clustering, participation, within-front z and C(k) scaling.
    Metrics {
        /// Fit C(k) over one bin per distinct degree instead of log bins.
        #[arg(long)]
        no_binning: bool,
        /// Ordinary instead of bin-population-weighted least squares.
        #[arg(long)]
        unweighted: bool,
    },
    /// Translational hub candidates.
    Hubs(HubArgs),
    /// Main path by search path counts.
    Mainpath,
    /// Generate a synthetic corpus.
    Simulate(SimArgs),
    /// Run every stage and write report.json and report.txt.
    Report(ReportArgs),
    /// Write the selected network with front, score and hub attributes.
    Export {
        /// graphml or dot.
        #[arg(long, default_value = "graphml")]
        format: String,
        /// Output file (default: core.<format> in the run directory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct FrontArgs {
    #[arg(long, default_value = "citation")]
    mode: String,
    #[arg(long, default_value_t = HierarchyConfig::default().max_depth)]
    max_depth: usize,
    #[arg(long, default_value_t = HierarchyConfig::default().min_front_size)]
    min_front_size: usize,
    #[arg(long, default_value_t = HierarchyConfig::default().min_q_gain)]
    min_q_gain: f64,
}

#[derive(Args, Debug)]
struct HubArgs {
    #[arg(long, default_value_t = HubConfig::default().degree_pct)]
    degree_pct: f64,
    /// Clustering ceiling (default: median clustering).
    #[arg(long)]
    c_max: Option<f64>,
    #[arg(long, default_value_t = HubConfig::default().p_min)]
    p_min: f64,
    #[arg(long, default_value_t = HubConfig::default().t_spread_min)]
    t_spread_min: f64,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// planted: number of blocks.
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    /// planted: nodes per block.
    #[arg(long, default_value_t = 50)]
    block_size: usize,
    /// planted: link probability inside a block.
    #[arg(long, default_value_t = 0.2)]
    p_in: f64,
    /// planted: link probability between blocks.
    #[arg(long, default_value_t = 0.005)]
    p_out: f64,
    /// planted: number of bridging hubs.
    #[arg(long, default_value_t = 5)]
    hubs: usize,
    /// planted: homophily h; link probabilities are scaled by 1 - h * |T_u - T_v|.
    #[arg(long, default_value_t = 0.0)]
    homophily: f64,
    /// hierarchical: construction iterations.
    #[arg(long, default_value_t = 3)]
    iterations: u32,
    /// random: node count.
    #[arg(long, default_value_t = 500)]
    nodes: usize,
    /// random: link probability.
    #[arg(long, default_value_t = 0.01)]
    p: f64,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// TOML run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    lexicon_basic: Option<PathBuf>,
    #[arg(long)]
    lexicon_clinical: Option<PathBuf>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print report.txt to stdout.
    #[arg(long)]
    print: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rank {
    InDegree,
    ExternalCitations,
}

impl From<Rank> for RankBy {
    fn from(r: Rank) -> Self {
        match r {
            Rank::InDegree => RankBy::InDegree,
            Rank::ExternalCitations => RankBy::ExternalCitations,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Planted,
    Hierarchical,
    Random,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("KTMAP_LOG", "warn")).init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    }
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { EXIT_DATA } else { EXIT_USAGE })
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}

fn create_out(out: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", out.display()))))
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Command::Report(a) = &cli.command {
        return report(a, cli.out.as_deref());
    }
    let out = cli.out.as_deref().unwrap_or(Path::new("out"));
    create_out(out)?;
    match &cli.command {
        Command::Parse { nodes, edges, lenient } => {
            let parsed = pipeline::read_corpus(nodes, edges, *lenient)?;
            for w in &parsed.warnings {
                log::warn!("{w}");
            }
            artifacts::save_network(out, artifacts::NETWORK, &parsed.network)?;
            write_json(
                &out.join(artifacts::PARSE),
                &serde_json::json!({
                    "documents": parsed.network.len(),
                    "citations": parsed.network.edge_count(),
                    "warnings": parsed.warnings,
                }),
            )?;
            println!("{} documents, {} citations", parsed.network.len(), parsed.network.edge_count());
        }
        Command::Select { fraction, rank_by } => {
            let net = artifacts::load_network(out, artifacts::NETWORK)?;
            let core = select_top_cited(&net, *fraction, (*rank_by).into())?;
            artifacts::save_network(out, artifacts::CORE, &core)?;
            write_json(
                &out.join(artifacts::SELECTION),
                &serde_json::json!({
                    "fraction": fraction,
                    "rank_by": RankBy::from(*rank_by),
                    "selected": core.len(),
                    "of": net.len(),
                }),
            )?;
            println!("selected {} of {} documents", core.len(), net.len());
        }
        Command::FitDegrees { bootstrap, seed, rank_by } => {
            let net = artifacts::load_network(out, artifacts::NETWORK)?;
            let fit = pipeline::fit_degrees(&net, (*rank_by).into(), *bootstrap, *seed)?;
            write_json(&out.join(artifacts::FIT), &fit)?;
            print!("alpha {:.4}, xmin {}, KS {:.4}, tail {}", fit.alpha, fit.xmin, fit.ks_distance, fit.n_tail);
            match fit.p_value {
                Some(p) => println!(", p {p:.3}"),
                None => println!(),
            }
        }
        Command::Score { lexicon_basic, lexicon_clinical, low, high } => {
            let core = artifacts::load_network(out, artifacts::CORE)?;
            let thresholds = Thresholds::new(*low, *high)?;
            let lexicon = match (lexicon_basic, lexicon_clinical) {
                (Some(b), Some(c)) => Some(pipeline::read_lexicon(b, c)?),
                _ => None,
            };
            let profiles = score_network(&core, lexicon.as_ref(), thresholds)?;
            artifacts::write_scores(&out.join(artifacts::SCORES), &core, &profiles)?;
            let scored = profiles.iter().filter(|p| p.score.is_some()).count();
            println!("{scored} of {} documents scored", profiles.len());
        }
        Command::Fronts(a) => {
            let core = artifacts::load_network(out, artifacts::CORE)?;
            let mode: ClusterMode = a.mode.parse()?;
            let config = HierarchyConfig { max_depth: a.max_depth, min_front_size: a.min_front_size, min_q_gain: a.min_q_gain };
            let tree = pipeline::cluster_fronts(&core, mode, config)?;
            artifacts::write_front_table(&out.join(artifacts::FRONTS_TABLE), &core, &tree)?;
            write_json(&out.join(artifacts::FRONTS), &pipeline::front_table(&tree, mode))?;
            println!("{} fronts at level 2, depth {}", tree.fronts_at(2).count(), tree.depth());
        }
        Command::Metrics { no_binning, unweighted } => {
            let core = artifacts::load_network(out, artifacts::CORE)?;
            let paths = artifacts::read_front_paths(&out.join(artifacts::FRONTS_TABLE), &core)?;
            let metrics = node_metrics(core.projection(), &artifacts::top_labels(&paths))?;
            artifacts::write_metrics(&out.join(artifacts::METRICS), &core, &metrics)?;
            let mut opts = ScalingOptions { weighted: !unweighted, ..Default::default() };
            if *no_binning {
                opts.binning = ktmap::metrics::Binning::None;
            }
            match ck_scaling(core.projection(), opts) {
                Ok(fit) => {
                    write_json(&out.join(artifacts::SCALING), &fit)?;
                    println!("C(k) slope {:.3}, r2 {:.3}, {} bins", fit.slope, fit.r2, fit.n_bins);
                }
                Err(e) => {
                    let _ = std::fs::remove_file(out.join(artifacts::SCALING));
                    println!("C(k) scaling unavailable: {e}");
                }
            }
        }
        Command::Hubs(a) => {
            let core = artifacts::load_network(out, artifacts::CORE)?;
            let paths = artifacts::read_front_paths(&out.join(artifacts::FRONTS_TABLE), &core)?;
            let profiles = artifacts::read_scores(&out.join(artifacts::SCORES), &core)?;
            let scores: Vec<Option<f64>> = profiles.iter().map(|p| p.score).collect();
            let config = HubConfig { degree_pct: a.degree_pct, c_max: a.c_max, p_min: a.p_min, t_spread_min: a.t_spread_min };
            config.validate()?;
            let hubs = detect_translational_hubs(&core, &artifacts::top_labels(&paths), &scores, &config)?;
            write_json(&out.join(artifacts::HUBS), &hubs)?;
            write_json(&out.join(artifacts::HUB_REGIONS), &hub_regions(&core, &hubs))?;
            println!("{} hub candidates", hubs.len());
            for h in &hubs {
                println!("  #{} {}  k {}  P {:.3}  T-spread {:.3}", h.rank, h.id, h.degree, h.participation, h.t_spread);
            }
        }
        Command::Mainpath => {
            let core = artifacts::load_network(out, artifacts::CORE)?;
            let path = main_path(&core)?;
            let record = pipeline::main_path_record(&core, &path);
            write_json(&out.join(artifacts::MAIN_PATH), &record)?;
            for w in &record.warnings {
                log::warn!("{w}");
            }
            println!("{}", record.ids.join(" -> "));
        }
        Command::Simulate(a) => simulate(a, out)?,
        Command::Report(_) => unreachable!("handled above"),
        Command::Export { format, output } => {
            let format: ExportFormat = format.parse()?;
            let core = artifacts::load_network(out, artifacts::CORE)?;
            let paths = artifacts::read_front_paths(&out.join(artifacts::FRONTS_TABLE), &core)?;
            let profiles = artifacts::read_scores(&out.join(artifacts::SCORES), &core)?;
            let hubs_file = out.join(artifacts::HUBS);
            let hub_ids: Vec<String> = if hubs_file.exists() {
                read_json::<Vec<HubCandidate>>(&hubs_file)?.into_iter().map(|h| h.id).collect()
            } else {
                log::warn!("no {} in {}; exporting without hubs", artifacts::HUBS, out.display());
                Vec::new()
            };
            let nodes = annotate(&core, &paths, &profiles, &hub_ids)?;
            let target = output.clone().unwrap_or_else(|| out.join(format!("{}.{}", artifacts::CORE, format.extension())));
            let mut w = BufWriter::new(File::create(&target)?);
            export_graph(&core, &nodes, format, &mut w)?;
            w.flush()?;
            println!("wrote {}", target.display());
        }
    }
    Ok(())
}

fn simulate(a: &SimArgs, out: &Path) -> Result<(), Error> {
    let net = match a.preset {
        Preset::Planted => {
            let cfg = PlantedConfig {
                levels: vec![BlockLevel { branching: a.blocks, p_within: a.p_in }],
                leaf_size: a.block_size,
                p_between: a.p_out,
                homophily: a.homophily,
                n_hubs: a.hubs,
                ..Default::default()
            };
            let (net, truth) = synth::gen_planted_kt_network(&cfg, a.seed)?;
            write_json(&out.join(artifacts::GROUND_TRUTH), &truth)?;
            net
        }
        Preset::Hierarchical => synth::gen_deterministic_hierarchical(a.iterations)?,
        Preset::Random => synth::gen_random_graph(a.nodes, a.p, a.seed)?,
    };
    let mut w = BufWriter::new(File::create(out.join("nodes.jsonl"))?);
    net.write_nodes(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(out.join("edges.csv"))?);
    net.write_edges(&mut w)?;
    w.flush()?;
    println!("{} documents, {} citations written to {}", net.len(), net.edge_count(), out.display());
    Ok(())
}

fn report(a: &ReportArgs, out: Option<&Path>) -> Result<(), Error> {
    let cfg = report_config(a, out)?;
    let report = pipeline::run_pipeline(&cfg).map_err(|e| {
        eprintln!("{} stage failed; see {}", e.stage, cfg.out_dir.join(artifacts::INCOMPLETE).display());
        e.source
    })?;
    if a.print {
        print!("{}", ktmap::report::render_text(&report));
    } else {
        println!("report written to {}", cfg.out_dir.join(artifacts::REPORT).display());
    }
    Ok(())
}

fn report_config(a: &ReportArgs, out: Option<&Path>) -> Result<PipelineConfig, Error> {
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::from_file(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = out {
        cfg.out_dir = out.to_path_buf();
    }
    if let Some(p) = &a.nodes {
        cfg.nodes = p.clone();
    }
    if let Some(p) = &a.edges {
        cfg.edges = p.clone();
    }
    if a.lexicon_basic.is_some() || a.lexicon_clinical.is_some() {
        cfg.lexicon_basic = a.lexicon_basic.clone();
        cfg.lexicon_clinical = a.lexicon_clinical.clone();
    }
    if let Some(f) = a.fraction {
        cfg.fraction = f;
    }
    if let Some(m) = &a.mode {
        cfg.mode = m.parse()?;
    }
    if let Some(b) = a.bootstrap {
        cfg.bootstrap = b;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}
