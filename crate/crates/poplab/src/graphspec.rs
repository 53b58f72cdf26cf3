//! One-token graph descriptions.
//!
//! - `kind:n[,m][@seed]` generates a graph, where `kind` is one of
//!   `complete`, `cycle`, `path`, `star` or `random`. `m` is required for
//!   `random` and must match the kind otherwise. Without `@seed` a random
//!   graph takes the run's master seed.
//! - `file:path` reads an edge list.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use poplab_core::{Graph, GraphError, GraphKind};
use thiserror::Error;

use crate::edgelist::{read_edge_list, EdgeListError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Generated {
        kind: GraphKind,
        n: usize,
        m: Option<usize>,
        seed: Option<u64>,
    },
    File(PathBuf),
}

#[derive(Debug, Error)]
pub enum GraphSpecError {
    #[error("graph spec `{0}` is not of the form kind:n[,m][@seed] or file:path")]
    Syntax(String),
    #[error("unknown graph kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    EdgeList(#[from] EdgeListError),
}

impl FromStr for GraphSpec {
    type Err = GraphSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || GraphSpecError::Syntax(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(syntax)?;
        if kind == "file" {
            if rest.is_empty() {
                return Err(syntax());
            }
            return Ok(GraphSpec::File(PathBuf::from(rest)));
        }
        let kind = GraphKind::from_name(kind)
            .ok_or_else(|| GraphSpecError::UnknownKind(kind.to_string()))?;
        let (sizes, seed) = match rest.split_once('@') {
            Some((sizes, seed)) => (sizes, Some(seed.parse().map_err(|_| syntax())?)),
            None => (rest, None),
        };
        let (n, m) = match sizes.split_once(',') {
            Some((n, m)) => (n, Some(m.parse().map_err(|_| syntax())?)),
            None => (sizes, None),
        };
        let n = n.parse().map_err(|_| syntax())?;
        Ok(GraphSpec::Generated { kind, n, m, seed })
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::File(path) => write!(f, "file:{}", path.display()),
            GraphSpec::Generated { kind, n, m, seed } => {
                write!(f, "{kind}:{n}")?;
                if let Some(m) = m {
                    write!(f, ",{m}")?;
                }
                if let Some(seed) = seed {
                    write!(f, "@{seed}")?;
                }
                Ok(())
            }
        }
    }
}

impl GraphSpec {
    pub fn build(&self, default_seed: u64) -> Result<Graph, GraphSpecError> {
        match self {
            GraphSpec::File(path) => Ok(read_edge_list(path)?),
            GraphSpec::Generated { kind, n, m, seed } => Ok(Graph::generate(
                *kind,
                *n,
                *m,
                seed.unwrap_or(default_seed),
            )?),
        }
    }
}

/// Edge count halfway between a spanning tree and the complete graph.
pub fn midpoint_edges(n: usize) -> usize {
    (n - 1 + n * (n - 1) / 2).div_ceil(2)
}
