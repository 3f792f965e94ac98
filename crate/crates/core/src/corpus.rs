//! Corpus data model: documents, citation network, lexicons and the input file formats.
//!
//! Nodes are JSON lines, edges are `citing,cited` pairs, lexicons are one term per line.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    #[default]
    Paper,
    Patent,
}

/// One paper or patent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default)]
    pub kind: DocKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basic_terms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clinical_terms: Option<u64>,
    #[serde(default, rename = "terms", skip_serializing_if = "Option::is_none")]
    pub raw_terms: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext_citations: Option<u64>,
}

impl Document {
    pub fn new(id: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            year: None,
            kind: DocKind::Paper,
            basic_terms: None,
            clinical_terms: None,
            raw_terms: None,
            ext_citations: None,
        }
    }

    pub fn with_counts(mut self, basic: u64, clinical: u64) -> Self {
        self.basic_terms = Some(basic);
        self.clinical_terms = Some(clinical);
        self
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    /// `(basic, clinical)` term counts. Stored counts win; raw terms are counted against
    /// the lexicon only when counts are absent. `None` when neither source is available.
    pub fn term_counts(&self, lexicon: Option<&Lexicon>) -> Option<(u64, u64)> {
        match (self.basic_terms, self.clinical_terms) {
            (Some(b), Some(c)) => Some((b, c)),
            _ => match (&self.raw_terms, lexicon) {
                (Some(terms), Some(lex)) => Some(count_terms(terms, lex)),
                _ => None,
            },
        }
    }
}

/// Basic and clinical vocabularies, stored lowercased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    basic: HashSet<String>,
    clinical: HashSet<String>,
}

impl Lexicon {
    pub fn new<B, C, S>(basic: B, clinical: C) -> Result<Self>
    where
        B: IntoIterator<Item = S>,
        C: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let basic: HashSet<String> = basic.into_iter().map(|s| s.as_ref().trim().to_lowercase()).collect();
        let clinical: HashSet<String> = clinical.into_iter().map(|s| s.as_ref().trim().to_lowercase()).collect();
        let mut overlap: Vec<&String> = basic.intersection(&clinical).collect();
        overlap.sort();
        if let Some(term) = overlap.first() {
            return Err(Error::LexiconOverlap((*term).clone()));
        }
        Ok(Lexicon { basic, clinical })
    }

    /// Reads two one-term-per-line lists. Blank lines are skipped.
    pub fn from_readers(basic: impl BufRead, clinical: impl BufRead) -> Result<Self> {
        fn terms(r: impl BufRead) -> Result<Vec<String>> {
            let mut out = Vec::new();
            for line in r.lines() {
                let line = line?;
                let t = line.trim();
                if !t.is_empty() {
                    out.push(t.to_string());
                }
            }
            Ok(out)
        }
        Lexicon::new(terms(basic)?, terms(clinical)?)
    }

    pub fn is_basic(&self, term: &str) -> bool {
        self.basic.contains(term)
    }

    pub fn is_clinical(&self, term: &str) -> bool {
        self.clinical.contains(term)
    }
}

/// Counts whole-token matches (with multiplicity) against each side of the lexicon.
pub fn count_terms<S: AsRef<str>>(terms: &[S], lexicon: &Lexicon) -> (u64, u64) {
    let mut basic = 0;
    let mut clinical = 0;
    for term in terms {
        let t = term.as_ref().to_lowercase();
        if lexicon.is_basic(&t) {
            basic += 1;
        } else if lexicon.is_clinical(&t) {
            clinical += 1;
        }
    }
    (basic, clinical)
}

/// Directed citation graph over a set of documents.
///
/// Edges point from the citing document to the cited one. The undirected simple projection
/// is computed once at construction.
#[derive(Debug, Clone)]
pub struct CitationNetwork {
    docs: Vec<Document>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    cites: Vec<Vec<usize>>,
    cited_by: Vec<Vec<usize>>,
    projection: Graph,
}

impl CitationNetwork {
    /// Builds a network from documents and index-based `(citing, cited)` edges.
    /// Duplicate edges are collapsed; ids must be unique and edges loop-free.
    pub fn new(docs: Vec<Document>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if d.id.is_empty() {
                return Err(Error::InvalidParameter("empty document id".into()));
            }
            if index.insert(d.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(d.id.clone()));
            }
        }
        let n = docs.len();
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!("edge ({u}, {v}) out of range for {n} documents")));
            }
            if u == v {
                return Err(Error::SelfLoop(docs[u].id.clone()));
            }
            set.insert((u, v));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut cites = vec![Vec::new(); n];
        let mut cited_by = vec![Vec::new(); n];
        for &(u, v) in &edges {
            cites[u].push(v);
            cited_by[v].push(u);
        }
        for list in &mut cited_by {
            list.sort_unstable();
        }
        let projection = Graph::from_edges(n, edges.iter().copied());
        Ok(CitationNetwork { docs, index, edges, cites, cited_by, projection })
    }

    /// Builds a network from id-based edges; unknown ids are an error.
    pub fn from_id_edges<S: AsRef<str>>(docs: Vec<Document>, edges: &[(S, S)]) -> Result<Self> {
        let index: HashMap<&str, usize> = docs.iter().enumerate().map(|(i, d)| (d.id.as_str(), i)).collect();
        let mut idx = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let lookup = |id: &str| {
                index.get(id).copied().ok_or_else(|| Error::UnknownEndpoint {
                    citing: a.to_string(),
                    cited: b.to_string(),
                    missing: id.to_string(),
                })
            };
            idx.push((lookup(a)?, lookup(b)?));
        }
        CitationNetwork::new(docs, idx)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn document(&self, node: usize) -> &Document {
        &self.docs[node]
    }

    pub fn id(&self, node: usize) -> &str {
        &self.docs[node].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Directed `(citing, cited)` edges in lexicographic index order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Documents cited by `node`.
    pub fn cites(&self, node: usize) -> &[usize] {
        &self.cites[node]
    }

    /// Documents citing `node`.
    pub fn cited_by(&self, node: usize) -> &[usize] {
        &self.cited_by[node]
    }

    /// Citations received within the corpus.
    pub fn in_degree(&self, node: usize) -> usize {
        self.cited_by[node].len()
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.cites[node].len()
    }

    /// Undirected simple projection (direction dropped, no parallel edges).
    pub fn projection(&self) -> &Graph {
        &self.projection
    }

    /// Sub-network induced by `nodes` (kept in the given order).
    pub fn induced(&self, nodes: &[usize]) -> CitationNetwork {
        let mut local = vec![usize::MAX; self.len()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let docs = nodes.iter().map(|&v| self.docs[v].clone()).collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| (local[u], local[v]))
            .collect();
        CitationNetwork::new(docs, edges).expect("induced sub-network of a valid network is valid")
    }

    /// Writes the nodes file (one JSON record per line).
    pub fn write_nodes(&self, mut w: impl Write) -> Result<()> {
        for d in &self.docs {
            serde_json::to_writer(&mut w, d)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Writes the edges file with a `citing,cited` header.
    pub fn write_edges(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "citing,cited")?;
        for &(u, v) in &self.edges {
            writeln!(w, "{},{}", self.docs[u].id, self.docs[v].id)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Skip edges with unknown endpoints instead of failing.
    pub lenient: bool,
}

/// A parsed network together with the non-fatal issues found while reading it.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub network: CitationNetwork,
    pub warnings: Vec<String>,
}

/// Raw record shape of the nodes file; validated into a [`Document`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: String,
    #[serde(default)]
    year: Option<i32>,
    #[serde(default)]
    kind: Option<DocKind>,
    #[serde(default)]
    basic_terms: Option<u64>,
    #[serde(default)]
    clinical_terms: Option<u64>,
    #[serde(default)]
    terms: Option<Vec<String>>,
    #[serde(default)]
    ext_citations: Option<u64>,
}

fn parse_nodes(reader: impl BufRead) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let rec: NodeRecord = serde_json::from_str(text)
            .map_err(|e| Error::Malformed { line: line_no, message: e.to_string() })?;
        let malformed = |message: &str| Error::Malformed { line: line_no, message: message.to_string() };
        if rec.id.trim().is_empty() {
            return Err(malformed("empty id"));
        }
        if rec.id != rec.id.trim() || rec.id.contains(',') || rec.id.chars().any(char::is_control) {
            return Err(malformed("id must not contain commas, control characters or surrounding whitespace"));
        }
        if rec.basic_terms.is_some() != rec.clinical_terms.is_some() {
            return Err(malformed("basic_terms and clinical_terms must be given together"));
        }
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId(rec.id));
        }
        docs.push(Document {
            id: rec.id,
            year: rec.year,
            kind: rec.kind.unwrap_or_default(),
            basic_terms: rec.basic_terms,
            clinical_terms: rec.clinical_terms,
            raw_terms: rec.terms.map(|ts| ts.into_iter().map(|t| t.to_lowercase()).collect()),
            ext_citations: rec.ext_citations,
        });
    }
    Ok(docs)
}

fn parse_edges(reader: impl BufRead) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    let mut first = true;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Malformed { line: line_no, message: format!("expected `citing,cited`, got `{text}`") });
        }
        if first && fields[0].eq_ignore_ascii_case("citing") && fields[1].eq_ignore_ascii_case("cited") {
            first = false;
            continue;
        }
        first = false;
        out.push((line_no, fields[0].to_string(), fields[1].to_string()));
    }
    Ok(out)
}

/// Parses the nodes and edges streams into a validated network.
pub fn parse_corpus(nodes: impl BufRead, edges: impl BufRead, opts: ParseOptions) -> Result<Parsed> {
    let docs = parse_nodes(nodes)?;
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let index: HashMap<&str, usize> = docs.iter().enumerate().map(|(i, d)| (d.id.as_str(), i)).collect();
    let mut warnings = Vec::new();
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (line_no, citing, cited) in parse_edges(edges)? {
        if citing == cited {
            return Err(Error::SelfLoop(citing));
        }
        let missing = [&citing, &cited].into_iter().find(|id| !index.contains_key(id.as_str()));
        if let Some(missing) = missing {
            if opts.lenient {
                warnings.push(format!("line {line_no}: skipped edge ({citing}, {cited}): unknown document `{missing}`"));
                continue;
            }
            return Err(Error::UnknownEndpoint { missing: missing.clone(), citing, cited });
        }
        let key = (index[citing.as_str()], index[cited.as_str()]);
        if let Some(first) = seen.insert(key, line_no) {
            seen.insert(key, first);
            warnings.push(format!("line {line_no}: duplicate edge ({citing}, {cited}) collapsed"));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let network = CitationNetwork::new(docs, seen.into_keys())?;
    Ok(Parsed { network, warnings })
}

/// Weighted co-citation graph: two documents are linked with weight equal to the number of
/// documents citing both.
#[derive(Debug, Clone)]
pub struct CoCitationGraph {
    /// Network indices of the cited documents; node `i` of `graph` is `nodes[i]`.
    pub nodes: Vec<usize>,
    pub graph: Graph,
}

impl CoCitationGraph {
    /// The same weights laid out over every node of the source network (uncited nodes isolated).
    pub fn to_network_graph(&self, network_len: usize) -> Graph {
        let edges: Vec<_> = self.graph.edges().map(|(u, v, w)| (self.nodes[u], self.nodes[v], w)).collect();
        Graph::from_weighted_edges(network_len, edges)
    }
}

pub fn co_citation_projection(net: &CitationNetwork) -> CoCitationGraph {
    let nodes: Vec<usize> = (0..net.len()).filter(|&v| net.in_degree(v) > 0).collect();
    let mut local = vec![usize::MAX; net.len()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = i;
    }
    let mut weights: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for citing in 0..net.len() {
        let refs = net.cites(citing);
        for (a, &x) in refs.iter().enumerate() {
            for &y in &refs[a + 1..] {
                let (p, q) = (local[x].min(local[y]), local[x].max(local[y]));
                *weights.entry((p, q)).or_insert(0) += 1;
            }
        }
    }
    let graph = Graph::from_weighted_edges(nodes.len(), weights.into_iter().map(|((u, v), w)| (u, v, w)));
    CoCitationGraph { nodes, graph }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(nodes: &str, edges: &str) -> Result<Parsed> {
        parse_corpus(nodes.as_bytes(), edges.as_bytes(), ParseOptions::default())
    }

    #[test]
    fn single_node_no_edges() {
        let p = parse(r#"{"id":"a"}"#, "").unwrap();
        assert_eq!(p.network.len(), 1);
        assert_eq!(p.network.edge_count(), 0);
    }

    #[test]
    fn self_loop_rejected() {
        let err = parse("{\"id\":\"a\"}\n", "a,a\n").unwrap_err();
        assert!(matches!(err, Error::SelfLoop(ref id) if id == "a"), "{err}");
    }

    #[test]
    fn in_degree_and_projection() {
        let nodes = "{\"id\":\"a\"}\n{\"id\":\"b\"}\n{\"id\":\"c\"}\n";
        let p = parse(nodes, "citing,cited\na,b\nc,b\n").unwrap();
        let net = p.network;
        let b = net.index_of("b").unwrap();
        assert_eq!(net.in_degree(b), 2);
        assert_eq!(net.projection().edge_count(), 2);
    }

    #[test]
    fn duplicate_id_named() {
        let err = parse("{\"id\":\"a\"}\n{\"id\":\"a\"}\n", "").unwrap_err();
        assert!(matches!(err, Error::DuplicateId(ref id) if id == "a"));
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = parse("{\"id\":\"a\"}\n\n{\"id\": 3\n", "").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 3, .. }), "{err}");
        let err = parse("{\"id\":\"a\"}\n{\"id\":\"b\"}\n", "# c\na,b,c\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_endpoint_strict_and_lenient() {
        let nodes = "{\"id\":\"a\"}\n{\"id\":\"b\"}\n";
        let err = parse(nodes, "a,z\n").unwrap_err();
        assert!(matches!(err, Error::UnknownEndpoint { ref missing, .. } if missing == "z"));
        let p = parse_corpus(nodes.as_bytes(), "a,z\na,b\n".as_bytes(), ParseOptions { lenient: true }).unwrap();
        assert_eq!(p.network.edge_count(), 1);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn duplicate_edges_collapse_with_warning() {
        let p = parse("{\"id\":\"a\"}\n{\"id\":\"b\"}\n", "a,b\na,b\nb,a\n").unwrap();
        assert_eq!(p.network.edge_count(), 2);
        assert_eq!(p.network.projection().edge_count(), 1);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn empty_nodes_file_is_error() {
        assert!(matches!(parse("\n", ""), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn counts_must_be_paired() {
        let err = parse(r#"{"id":"a","basic_terms":1}"#, "").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
        let err = parse(r#"{"id":"a","basic_terms":-1,"clinical_terms":0}"#, "").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
    }

    #[test]
    fn record_fields_round_trip() {
        let nodes = r#"{"id":"p1","year":2004,"kind":"patent","terms":["Apoptosis","trial"]}"#;
        let p = parse(nodes, "").unwrap();
        let d = p.network.document(0);
        assert_eq!(d.kind, DocKind::Patent);
        assert_eq!(d.year, Some(2004));
        assert_eq!(d.raw_terms.as_deref(), Some(&["apoptosis".to_string(), "trial".to_string()][..]));
        let lex = Lexicon::new(["apoptosis"], ["trial"]).unwrap();
        assert_eq!(d.term_counts(Some(&lex)), Some((1, 1)));
        assert_eq!(d.term_counts(None), None);
    }

    #[test]
    fn count_terms_examples() {
        let lex = Lexicon::new(["apoptosis"], ["survival"]).unwrap();
        let empty: [&str; 0] = [];
        assert_eq!(count_terms(&empty, &lex), (0, 0));
        assert_eq!(count_terms(&["apoptosis", "apoptosis", "survival"], &lex), (2, 1));
        assert_eq!(count_terms(&["unknownword"], &lex), (0, 0));
        assert_eq!(count_terms(&["Apoptosis"], &lex), (1, 0));
    }

    #[test]
    fn lexicon_overlap_rejected() {
        let err = Lexicon::from_readers("Gene\ncell\n".as_bytes(), "trial\ngene\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::LexiconOverlap(ref t) if t == "gene"));
    }

    fn net(n: usize, edges: &[(usize, usize)]) -> CitationNetwork {
        let docs = (0..n).map(|i| Document::new(format!("d{i}"))).collect();
        CitationNetwork::new(docs, edges.iter().copied()).unwrap()
    }

    fn cocite_weight(cc: &CoCitationGraph, u: usize, v: usize) -> Option<u64> {
        let pu = cc.nodes.iter().position(|&x| x == u)?;
        let pv = cc.nodes.iter().position(|&x| x == v)?;
        cc.graph.weight(pu, pv)
    }

    #[test]
    fn co_citation_examples() {
        // a→b, a→c
        let cc = co_citation_projection(&net(3, &[(0, 1), (0, 2)]));
        assert_eq!(cocite_weight(&cc, 1, 2), Some(1));
        // a→b, c→b
        let cc = co_citation_projection(&net(3, &[(0, 1), (2, 1)]));
        assert_eq!(cc.graph.edge_count(), 0);
        assert_eq!(cc.nodes, vec![1]);
        // a→{x,y}, b→{x,y}
        let cc = co_citation_projection(&net(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]));
        assert_eq!(cocite_weight(&cc, 2, 3), Some(2));
    }

    #[test]
    fn export_and_reparse_is_identical() {
        let mut docs: Vec<_> = (0..4).map(|i| Document::new(format!("d{i}")).with_year(2000 + i)).collect();
        docs[1] = docs[1].clone().with_counts(3, 1);
        let original = CitationNetwork::new(docs, [(1, 0), (2, 0), (3, 1)]).unwrap();
        let (mut nb, mut eb) = (Vec::new(), Vec::new());
        original.write_nodes(&mut nb).unwrap();
        original.write_edges(&mut eb).unwrap();
        let back = parse_corpus(&nb[..], &eb[..], ParseOptions::default()).unwrap().network;
        assert_eq!(back.documents(), original.documents());
        assert_eq!(back.edges(), original.edges());
    }
}
