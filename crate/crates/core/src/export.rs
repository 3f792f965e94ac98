//! Annotated graph export (GraphML and Graphviz DOT) and a GraphML reader for round trips.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use quick_xml::events::{BytesDecl, BytesText, Event};
use quick_xml::{Reader, Writer};

use crate::axis::{TranslationalClass, TranslationalProfile};
use crate::corpus::CitationNetwork;
use crate::error::{Error, Result};
use crate::fronts::path_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::GraphMl => "graphml",
            ExportFormat::Dot => "dot",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Per-node attributes carried by the export.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAnnotation {
    pub front: String,
    pub t: Option<f64>,
    pub class: TranslationalClass,
    pub hub: bool,
}

pub fn annotate(
    net: &CitationNetwork,
    front_paths: &[Vec<usize>],
    profiles: &[TranslationalProfile],
    hub_ids: &[String],
) -> Result<Vec<NodeAnnotation>> {
    if front_paths.len() != net.len() || profiles.len() != net.len() {
        return Err(Error::Mismatch { partition: front_paths.len(), scores: profiles.len() });
    }
    for h in hub_ids {
        if net.index_of(h).is_none() {
            return Err(Error::UnknownNode(h.clone()));
        }
    }
    Ok((0..net.len())
        .map(|v| NodeAnnotation {
            front: path_string(&front_paths[v]),
            t: profiles[v].score,
            class: profiles[v].class,
            hub: hub_ids.iter().any(|h| h == net.id(v)),
        })
        .collect())
}

pub fn export_graph(net: &CitationNetwork, nodes: &[NodeAnnotation], format: ExportFormat, w: impl Write) -> Result<()> {
    if nodes.len() != net.len() {
        return Err(Error::Mismatch { partition: nodes.len(), scores: net.len() });
    }
    match format {
        ExportFormat::GraphMl => write_graphml(net, nodes, w),
        ExportFormat::Dot => write_dot(net, nodes, w),
    }
}

const KEYS: [(&str, &str, &str); 5] = [
    ("front", "front", "string"),
    ("t", "T", "double"),
    ("class", "class", "string"),
    ("hub", "hub", "boolean"),
    ("year", "year", "int"),
];

fn write_graphml(net: &CitationNetwork, nodes: &[NodeAnnotation], w: impl Write) -> Result<()> {
    let mut xml = Writer::new_with_indent(w, b' ', 2);
    xml.write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))?;
    xml.create_element("graphml")
        .with_attribute(("xmlns", "http://graphml.graphdrawing.org/xmlns"))
        .write_inner_content(|xml| {
            for (id, name, ty) in KEYS {
                xml.create_element("key")
                    .with_attributes([("id", id), ("for", "node"), ("attr.name", name), ("attr.type", ty)])
                    .write_empty()?;
            }
            xml.create_element("graph")
                .with_attributes([("id", "G"), ("edgedefault", "directed")])
                .write_inner_content(|xml| {
                    for (v, a) in nodes.iter().enumerate() {
                        let mut data = vec![("front", a.front.clone())];
                        if let Some(t) = a.t {
                            data.push(("t", t.to_string()));
                        }
                        data.push(("class", a.class.as_str().to_string()));
                        data.push(("hub", a.hub.to_string()));
                        if let Some(y) = net.document(v).year {
                            data.push(("year", y.to_string()));
                        }
                        xml.create_element("node").with_attribute(("id", net.id(v))).write_inner_content(|xml| {
                            for (key, value) in &data {
                                xml.create_element("data")
                                    .with_attribute(("key", *key))
                                    .write_text_content(BytesText::new(value))?;
                            }
                            Ok(())
                        })?;
                    }
                    for &(u, v) in net.edges() {
                        xml.create_element("edge")
                            .with_attributes([("source", net.id(u)), ("target", net.id(v))])
                            .write_empty()?;
                    }
                    Ok(())
                })?;
            Ok(())
        })?;
    xml.into_inner().write_all(b"\n")?;
    Ok(())
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn class_color(class: TranslationalClass) -> &'static str {
    match class {
        TranslationalClass::Basic => "#4575b4",
        TranslationalClass::Translational => "#fee090",
        TranslationalClass::Clinical => "#d73027",
        TranslationalClass::Unscored => "#d9d9d9",
    }
}

fn write_dot(net: &CitationNetwork, nodes: &[NodeAnnotation], mut w: impl Write) -> Result<()> {
    writeln!(w, "digraph ktmap {{")?;
    writeln!(w, "  node [style=filled, shape=circle];")?;
    for (v, a) in nodes.iter().enumerate() {
        let t = a.t.map_or_else(String::new, |t| format!(", T={t}"));
        writeln!(
            w,
            "  {} [front={}{}, class={}, hub={}, fillcolor={}{}];",
            dot_quote(net.id(v)),
            dot_quote(&a.front),
            t,
            dot_quote(a.class.as_str()),
            a.hub,
            dot_quote(class_color(a.class)),
            if a.hub { ", shape=doublecircle" } else { "" }
        )?;
    }
    for &(u, v) in net.edges() {
        writeln!(w, "  {} -> {};", dot_quote(net.id(u)), dot_quote(net.id(v)))?;
    }
    writeln!(w, "}}")?;
    Ok(())
}

/// Nodes, directed edges and node data read back from a GraphML document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphMlGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    /// Node data keyed by attribute name.
    pub data: Vec<BTreeMap<String, String>>,
}

fn xml_err(e: impl std::fmt::Display) -> Error {
    Error::Malformed { line: 0, message: format!("graphml: {e}") }
}

fn attr(e: &quick_xml::events::BytesStart<'_>, name: &str) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(xml_err)?;
        if a.key.as_ref() == name {
            return Ok(Some(a.normalized_value(quick_xml::XmlVersion::Implicit1_0).map_err(xml_err)?.into_owned()));
        }
    }
    Ok(None)
}

pub fn read_graphml(r: impl BufRead) -> Result<GraphMlGraph> {
    let mut reader = Reader::from_reader(r);
    let mut buf = Vec::new();
    let mut out = GraphMlGraph::default();
    let mut key_names: BTreeMap<String, String> = BTreeMap::new();
    let mut current_key: Option<String> = None;
    let mut text = String::new();
    loop {
        match reader.read_event_into(&mut buf).map_err(xml_err)? {
            Event::Eof => break,
            Event::Start(e) | Event::Empty(e) => match e.name().as_ref() {
                "key" => {
                    if let (Some(id), Some(name)) = (attr(&e, "id")?, attr(&e, "attr.name")?) {
                        key_names.insert(id, name);
                    }
                }
                "node" => {
                    let id = attr(&e, "id")?.ok_or_else(|| xml_err("node without id"))?;
                    out.nodes.push(id);
                    out.data.push(BTreeMap::new());
                }
                "edge" => {
                    let s = attr(&e, "source")?.ok_or_else(|| xml_err("edge without source"))?;
                    let t = attr(&e, "target")?.ok_or_else(|| xml_err("edge without target"))?;
                    out.edges.push((s, t));
                }
                "data" => {
                    current_key = attr(&e, "key")?;
                    text.clear();
                }
                _ => {}
            },
            Event::Text(t) if current_key.is_some() => text.push_str(&t.xml10_content()),
            Event::GeneralRef(r) if current_key.is_some() => {
                let name: &str = r.as_ref();
                let entity = format!("&{name};");
                text.push_str(&quick_xml::escape::unescape(&entity).map_err(xml_err)?);
            }
            Event::End(e) if e.name().as_ref() == "data" => {
                if let (Some(key), Some(node)) = (current_key.take(), out.data.last_mut()) {
                    let name = key_names.get(&key).cloned().unwrap_or(key);
                    node.insert(name, std::mem::take(&mut text));
                }
            }
            _ => {}
        }
        buf.clear();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::{score_network, Thresholds};
    use crate::corpus::Document;

    fn sample() -> (CitationNetwork, Vec<NodeAnnotation>) {
        let docs = vec![
            Document::new("a&b").with_counts(3, 1).with_year(2001),
            Document::new("c\"d").with_counts(0, 0),
            Document::new("e").with_counts(0, 4),
        ];
        let net = CitationNetwork::new(docs, [(1, 0), (2, 0), (2, 1)]).unwrap();
        let profiles = score_network(&net, None, Thresholds::default()).unwrap();
        let paths = vec![vec![1, 1], vec![1, 2], vec![2]];
        let ann = annotate(&net, &paths, &profiles, &["e".to_string()]).unwrap();
        (net, ann)
    }

    #[test]
    fn graphml_round_trip() {
        let (net, ann) = sample();
        let mut buf = Vec::new();
        export_graph(&net, &ann, ExportFormat::GraphMl, &mut buf).unwrap();
        let g = read_graphml(buf.as_slice()).unwrap();
        let ids: Vec<&str> = (0..net.len()).map(|v| net.id(v)).collect();
        assert_eq!(g.nodes, ids);
        let edges: Vec<(String, String)> =
            net.edges().iter().map(|&(u, v)| (net.id(u).to_string(), net.id(v).to_string())).collect();
        assert_eq!(g.edges, edges);
        assert_eq!(g.data[0]["front"], "1.1");
        assert_eq!(g.data[0]["T"], "0.25");
        assert_eq!(g.data[0]["year"], "2001");
        assert!(!g.data[1].contains_key("T"));
        assert_eq!(g.data[1]["class"], "unscored");
        let hubs: Vec<&str> = g.nodes.iter().zip(&g.data).filter(|(_, d)| d["hub"] == "true").map(|(n, _)| n.as_str()).collect();
        assert_eq!(hubs, ["e"]);
    }

    #[test]
    fn dot_output_escapes_ids() {
        let (net, ann) = sample();
        let mut buf = Vec::new();
        export_graph(&net, &ann, ExportFormat::Dot, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("digraph ktmap {"));
        assert!(s.contains("\"c\\\"d\" -> \"a&b\";"));
        assert!(s.contains("\"e\" [front=\"2\", T=1, class=\"clinical\", hub=true"));
        assert_eq!(s.matches(" -> ").count(), 3);
    }

    #[test]
    fn unknown_format_lists_supported() {
        let e = "svg".parse::<ExportFormat>().unwrap_err();
        assert!(matches!(e, Error::UnknownFormat(_)));
        assert!(e.to_string().contains("graphml, dot"));
    }

    #[test]
    fn unknown_hub_rejected() {
        let (net, _) = sample();
        let profiles = score_network(&net, None, Thresholds::default()).unwrap();
        let paths = vec![vec![1]; 3];
        assert!(annotate(&net, &paths, &profiles, &["zz".to_string()]).is_err());
    }
}
