//! Graph file formats.
//!
//! JSON: `{"n": 5, "edges": [[0,1], ...], "labels": ["a", ...]}` with
//! `labels` optional. Plain text: one `i j` pair per line, `#` comments,
//! vertex count inferred as one more than the largest index.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// Parses either the JSON format or a plain-text edge list.
pub fn parse_graph(text: &str) -> Result<Graph> {
    if text.trim_start().starts_with('{') {
        parse_graph_json(text)
    } else {
        parse_edge_list(text)
    }
}

pub fn parse_graph_json(text: &str) -> Result<Graph> {
    let f: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    graph_from_file(f)
}

pub fn graph_from_value(v: &serde_json::Value) -> Result<Graph> {
    let f: GraphFile = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    graph_from_file(f)
}

fn graph_from_file(f: GraphFile) -> Result<Graph> {
    if f.n == 0 {
        return Err(Error::Parse("graph needs at least one vertex".into()));
    }
    let g = Graph::from_edges(f.n, f.edges.iter().map(|e| (e[0], e[1])))
        .map_err(|e| Error::Parse(e.to_string()))?;
    match f.labels {
        Some(l) => g.with_labels(l).map_err(|e| Error::Parse(e.to_string())),
        None => Ok(g),
    }
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split_whitespace().collect();
        if nums.len() != 2 {
            return Err(Error::Parse(format!("line {}: expected two vertex indices", lineno + 1)));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: bad vertex index {s:?}", lineno + 1)))
        };
        edges.push((parse(nums[0])?, parse(nums[1])?));
    }
    let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().ok_or_else(|| Error::Parse("empty edge list".into()))?;
    Graph::from_edges(n, edges).map_err(|e| Error::Parse(e.to_string()))
}

pub fn graph_to_value(g: &Graph) -> serde_json::Value {
    let f = GraphFile {
        n: g.n(),
        edges: g.edges().map(|(u, v)| [u, v]).collect(),
        labels: g.labels().map(|l| l.to_vec()),
    };
    serde_json::to_value(f).expect("graph serializes")
}

pub fn graph_to_json(g: &Graph) -> String {
    serde_json::to_string(&graph_to_value(g)).expect("graph serializes")
}

/// DOT rendering. `edge_color` may return a colour name per edge.
pub fn to_dot(g: &Graph, edge_color: Option<&dyn Fn(usize, usize) -> Option<String>>) -> String {
    let mut s = String::from("graph G {\n");
    for v in 0..g.n() {
        match g.labels() {
            Some(l) => writeln!(s, "  {v} [label={:?}];", l[v]).unwrap(),
            None => writeln!(s, "  {v};").unwrap(),
        }
    }
    for (u, v) in g.edges() {
        match edge_color.and_then(|f| f(u, v)) {
            Some(c) => writeln!(s, "  {u} -- {v} [color={c:?}];").unwrap(),
            None => writeln!(s, "  {u} -- {v};").unwrap(),
        }
    }
    s.push_str("}\n");
    s
}
