//! Layout of a run directory and readers/writers for its files.
//!
//! Every stage reads the files of the stages before it, so each one can run on its own.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::axis::{TranslationalClass, TranslationalProfile};
use crate::corpus::{parse_corpus, CitationNetwork, ParseOptions};
use crate::error::{Error, Result};
use crate::fronts::FrontTree;
use crate::metrics::NodeMetrics;

pub const NETWORK: &str = "network";
pub const CORE: &str = "core";
pub const PARSE: &str = "parse.json";
pub const SELECTION: &str = "selection.json";
pub const FIT: &str = "fit.json";
pub const SCORES: &str = "scores.csv";
pub const FRONTS_TABLE: &str = "fronts.csv";
pub const FRONTS: &str = "fronts.json";
pub const METRICS: &str = "metrics.csv";
pub const SCALING: &str = "scaling.json";
pub const HUBS: &str = "hubs.json";
pub const HUB_REGIONS: &str = "hub_regions.json";
pub const MAIN_PATH: &str = "mainpath.json";
pub const REPORT: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";
pub const INCOMPLETE: &str = "incomplete.json";
pub const GROUND_TRUTH: &str = "ground_truth.json";

pub fn nodes_file(prefix: &str) -> String {
    format!("{prefix}.nodes.jsonl")
}

pub fn edges_file(prefix: &str) -> String {
    format!("{prefix}.edges.csv")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes `<prefix>.nodes.jsonl` and `<prefix>.edges.csv` into `dir`.
pub fn save_network(dir: &Path, prefix: &str, net: &CitationNetwork) -> Result<()> {
    let mut w = create(&dir.join(nodes_file(prefix)))?;
    net.write_nodes(&mut w)?;
    w.flush()?;
    let mut w = create(&dir.join(edges_file(prefix)))?;
    net.write_edges(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_network(dir: &Path, prefix: &str) -> Result<CitationNetwork> {
    let nodes = open(&dir.join(nodes_file(prefix)))?;
    let edges = open(&dir.join(edges_file(prefix)))?;
    Ok(parse_corpus(nodes, edges, ParseOptions::default())?.network)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Malformed { line, message: format!("{}: {e}", path.display()) }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// `id,T,class`; unscored documents have an empty `T`.
pub fn write_scores(path: &Path, net: &CitationNetwork, profiles: &[TranslationalProfile]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["id", "T", "class"]).map_err(|e| csv_error(path, e))?;
    for (v, p) in profiles.iter().enumerate() {
        w.write_record([net.id(v), &fmt_opt(p.score), p.class.as_str()]).map_err(|e| csv_error(path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows keyed by document id and returns them in network order; every document must
/// appear exactly once.
fn read_keyed_rows(path: &Path, net: &CitationNetwork, columns: usize) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut rows: Vec<Option<csv::StringRecord>> = vec![None; net.len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let malformed = |message: String| Error::Malformed { line, message: format!("{}: {message}", path.display()) };
        if rec.len() != columns {
            return Err(malformed(format!("expected {columns} columns, got {}", rec.len())));
        }
        let v = net.index_of(&rec[0]).ok_or_else(|| malformed(format!("unknown document `{}`", &rec[0])))?;
        if rows[v].replace(rec.clone()).is_some() {
            return Err(malformed(format!("document `{}` listed twice", &rec[0])));
        }
    }
    rows.into_iter()
        .enumerate()
        .map(|(v, r)| {
            r.ok_or_else(|| Error::Malformed {
                line: 0,
                message: format!("{}: document `{}` missing", path.display(), net.id(v)),
            })
        })
        .collect()
}

pub fn read_scores(path: &Path, net: &CitationNetwork) -> Result<Vec<TranslationalProfile>> {
    read_keyed_rows(path, net, 3)?
        .into_iter()
        .map(|rec| {
            let bad = |m: String| Error::Malformed { line: 0, message: format!("{}: {m}", path.display()) };
            let score = match &rec[1] {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| bad(format!("score `{s}`: {e}")))?),
            };
            let class: TranslationalClass = rec[2].parse().map_err(|_| bad(format!("class `{}`", &rec[2])))?;
            Ok(TranslationalProfile { score, class })
        })
        .collect()
}

/// `id,path`: the deepest front of every document, as a dotted path.
pub fn write_front_table(path: &Path, net: &CitationNetwork, tree: &FrontTree) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["id", "path"]).map_err(|e| csv_error(path, e))?;
    for v in 0..net.len() {
        w.write_record([net.id(v), &tree.leaf_of(v).path_string()]).map_err(|e| csv_error(path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Front paths per document, in network order.
pub fn read_front_paths(path: &Path, net: &CitationNetwork) -> Result<Vec<Vec<usize>>> {
    read_keyed_rows(path, net, 2)?
        .into_iter()
        .map(|rec| {
            rec[1]
                .split('.')
                .map(|p| match p.parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n),
                    _ => Err(Error::Malformed {
                        line: 0,
                        message: format!("{}: bad front path `{}`", path.display(), &rec[1]),
                    }),
                })
                .collect()
        })
        .collect()
}

/// Zero-based level-2 labels from front paths.
pub fn top_labels(paths: &[Vec<usize>]) -> Vec<usize> {
    paths.iter().map(|p| p[0] - 1).collect()
}

/// `id,k,c,P,z`; undefined values are empty.
pub fn write_metrics(path: &Path, net: &CitationNetwork, metrics: &[NodeMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["id", "k", "c", "P", "z"]).map_err(|e| csv_error(path, e))?;
    for (v, m) in metrics.iter().enumerate() {
        w.write_record([
            net.id(v),
            &m.degree.to_string(),
            &fmt_opt(m.clustering),
            &fmt_opt(m.participation),
            &fmt_opt(m.within_module_z),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::{score_network, Thresholds};
    use crate::corpus::Document;
    use crate::fronts::{hierarchical_fronts, HierarchyConfig};

    fn net() -> CitationNetwork {
        let docs = vec![
            Document::new("a").with_counts(3, 1),
            Document::new("b").with_counts(0, 0),
            Document::new("c").with_counts(0, 4),
            Document::new("d").with_counts(1, 1),
        ];
        CitationNetwork::new(docs, [(1, 0), (2, 0), (2, 1), (3, 2)]).unwrap()
    }

    #[test]
    fn network_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let n = net();
        save_network(dir.path(), CORE, &n).unwrap();
        let back = load_network(dir.path(), CORE).unwrap();
        assert_eq!(back.documents(), n.documents());
        assert_eq!(back.edges(), n.edges());
    }

    #[test]
    fn scores_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let n = net();
        let profiles = score_network(&n, None, Thresholds::default()).unwrap();
        let p = dir.path().join(SCORES);
        write_scores(&p, &n, &profiles).unwrap();
        assert_eq!(read_scores(&p, &n).unwrap(), profiles);
    }

    #[test]
    fn front_paths_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let n = net();
        let tree = hierarchical_fronts(n.projection(), HierarchyConfig::default()).unwrap();
        let p = dir.path().join(FRONTS_TABLE);
        write_front_table(&p, &n, &tree).unwrap();
        let paths = read_front_paths(&p, &n).unwrap();
        for v in 0..n.len() {
            assert_eq!(paths[v], tree.path_of(v));
        }
    }

    #[test]
    fn missing_and_unknown_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let n = net();
        let p = dir.path().join(SCORES);
        std::fs::write(&p, "id,T,class\na,0.25,basic\n").unwrap();
        assert!(matches!(read_scores(&p, &n), Err(Error::Malformed { .. })));
        std::fs::write(&p, "id,T,class\nzz,0.25,basic\n").unwrap();
        assert!(matches!(read_scores(&p, &n), Err(Error::Malformed { .. })));
    }
}
