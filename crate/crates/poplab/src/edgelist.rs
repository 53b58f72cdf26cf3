//! Plain-text edge lists.
//!
//! The first line is `n m`, followed by one `u v` line per unordered edge.
//! Vertices are 0-indexed and fields are whitespace separated. Blank lines
//! are ignored.

use std::fmt::Write as _;
use std::path::Path;

use poplab_core::{Graph, GraphError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("missing header line `n m`")]
    MissingHeader,
    #[error("line {line}: expected two non-negative integers")]
    BadLine { line: usize },
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCount { declared: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn parse_pair(text: &str, line: usize) -> Result<(usize, usize), EdgeListError> {
    let mut fields = text.split_whitespace().map(str::parse::<usize>);
    match (fields.next(), fields.next(), fields.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(EdgeListError::BadLine { line }),
    }
}

pub fn parse_edge_list(text: &str) -> Result<Graph, EdgeListError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or(EdgeListError::MissingHeader)?;
    let (n, m) = parse_pair(header, line)?;
    let edges = lines
        .map(|(line, l)| parse_pair(l, line))
        .collect::<Result<Vec<_>, _>>()?;
    if edges.len() != m {
        return Err(EdgeListError::EdgeCount {
            declared: m,
            found: edges.len(),
        });
    }
    Ok(Graph::from_edges(n, &edges)?)
}

pub fn write_edge_list(graph: &Graph) -> String {
    let mut out = format!("{} {}\n", graph.node_count(), graph.edge_count());
    for &(u, v) in graph.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn read_edge_list(path: &Path) -> Result<Graph, EdgeListError> {
    let text = std::fs::read_to_string(path).map_err(|source| EdgeListError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use poplab_core::GraphKind;

    #[test]
    fn round_trip() {
        let g = Graph::generate(GraphKind::RandomConnected, 7, Some(10), 3).unwrap();
        let text = write_edge_list(&g);
        assert!(text.starts_with("7 10\n"));
        assert_eq!(parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            parse_edge_list(""),
            Err(EdgeListError::MissingHeader)
        ));
        assert!(matches!(
            parse_edge_list("3 2\n0 1\n"),
            Err(EdgeListError::EdgeCount {
                declared: 2,
                found: 1
            })
        ));
        assert!(matches!(
            parse_edge_list("3 2\n0 1\n1 x\n"),
            Err(EdgeListError::BadLine { line: 3 })
        ));
        assert!(matches!(
            parse_edge_list("3 1\n0 1\n"),
            Err(EdgeListError::Graph(GraphError::NotConnected { .. }))
        ));
        assert!(parse_edge_list("2 1\n\n0 1\n").is_ok());
    }
}
