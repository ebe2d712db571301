use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{Edge, Graph, NodeLabels};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub directed: bool,
    /// When false a third column, if present, is ignored and every edge gets
    /// weight 1.
    pub weighted: bool,
    pub comment_prefix: String,
    /// Require node tokens to be non-negative integers. Off by default: any
    /// whitespace-free token is a valid node id.
    pub numeric_ids: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            directed: false,
            weighted: true,
            comment_prefix: "#".to_owned(),
            numeric_ids: false,
        }
    }
}

/// Parses `src dst [weight]` lines. A line holding a single token declares
/// a node without edges. Dense ids follow first-seen order; duplicate lines
/// become parallel edges.
pub fn load_edge_list<R: BufRead>(reader: R, options: &LoadOptions) -> Result<Graph> {
    let mut labels = NodeLabels::default();
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty()
            || (!options.comment_prefix.is_empty() && line.starts_with(&options.comment_prefix))
        {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() > 3 {
            return Err(Error::parse(
                line_no,
                format!("expected `src dst [weight]`, found {} fields", tokens.len()),
            ));
        }
        if options.numeric_ids {
            for t in tokens.iter().take(2) {
                if t.parse::<u64>().is_err() {
                    return Err(Error::parse(line_no, format!("node id `{t}` is not an integer")));
                }
            }
        }
        let weight = match tokens.get(2) {
            Some(t) if options.weighted => {
                let w: f64 = t
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("weight `{t}` is not a number")))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::parse(line_no, format!("weight {w} must be positive")));
                }
                w
            }
            _ => 1.0,
        };
        let u = labels.intern(tokens[0]);
        if tokens.len() == 1 {
            continue;
        }
        let v = labels.intern(tokens[1]);
        edges.push(Edge::new(u, v, weight));
    }
    Graph::with_labels(labels, options.directed, edges)
}

pub fn read_edge_list_file(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Graph> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file), options)
}

/// Writes every edge as `src dst weight` using original labels, then each
/// node without edges on a line of its own.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    let mut touched = vec![false; g.node_count()];
    for e in g.edges() {
        writeln!(out, "{} {} {}", g.label(e.source), g.label(e.target), e.weight)?;
        touched[e.source.index()] = true;
        touched[e.target.index()] = true;
    }
    for u in g.nodes().filter(|u| !touched[u.index()]) {
        writeln!(out, "{}", g.label(u))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeId;
    use proptest::prelude::*;

    fn load(text: &str) -> Result<Graph> {
        load_edge_list(text.as_bytes(), &LoadOptions::default())
    }

    #[test]
    fn minimal_path() {
        let g = load("0 1\n1 2").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.total_weight(), 2.0);
    }

    #[test]
    fn first_seen_order_and_comments() {
        let g = load("# header\nb a 2.5\n\na c\n").unwrap();
        assert_eq!(g.label(NodeId(0)), "b");
        assert_eq!(g.label(NodeId(1)), "a");
        assert_eq!(g.label(NodeId(2)), "c");
        assert_eq!(g.total_weight(), 3.5);
    }

    #[test]
    fn self_loops_and_duplicates_survive() {
        let g = load("x x\nx y\nx y\n").unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.weighted_degree(NodeId(0)), 4.0);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let numeric = LoadOptions {
            numeric_ids: true,
            ..LoadOptions::default()
        };
        let err = load_edge_list("0 x".as_bytes(), &numeric).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");

        assert!(matches!(load("0 1 2 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load("0 1 heavy"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load("0 1\n1 2 0"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(load("0 1 -3"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn single_token_declares_isolated_node() {
        let g = load("0 1\n7\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
        assert!(g.neighbors(NodeId(2)).is_empty());

        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 1 1\n7\n");
    }

    #[test]
    fn unweighted_ignores_third_column() {
        let opts = LoadOptions {
            weighted: false,
            ..LoadOptions::default()
        };
        let g = load_edge_list("0 1 7\n".as_bytes(), &opts).unwrap();
        assert_eq!(g.total_weight(), 1.0);
    }

    fn adjacency_multiset(g: &Graph) -> Vec<(String, String, u64)> {
        let mut out: Vec<_> = g
            .nodes()
            .flat_map(|u| {
                g.adjacency(u)
                    .map(move |(v, w)| (g.label(u).to_owned(), g.label(v).to_owned(), w.to_bits()))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.sort();
        out
    }

    proptest! {
        #[test]
        fn write_then_reload_preserves_adjacency(
            edges in prop::collection::vec((0u32..12, 0u32..12, 0.01f64..100.0), 1..40),
            directed in any::<bool>(),
        ) {
            let text: String = edges
                .iter()
                .map(|(u, v, w)| format!("n{u} n{v} {w}\n"))
                .collect();
            let opts = LoadOptions { directed, ..LoadOptions::default() };
            let g = load_edge_list(text.as_bytes(), &opts).unwrap();
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf).unwrap();
            let h = load_edge_list(buf.as_slice(), &opts).unwrap();
            prop_assert_eq!(adjacency_multiset(&g), adjacency_multiset(&h));
            prop_assert_eq!(g.edge_count(), h.edge_count());
        }
    }
}
