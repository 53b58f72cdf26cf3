//! Token random-walk measurements against their analytic bounds.

use poplab_core::oracles::montecarlo::{empirical_cover_time, empirical_move_count_steps};
use poplab_core::oracles::{exact_hitting_time, exact_meeting_time, OracleError};
use poplab_core::Graph;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WalkMode {
    /// Exact hitting times `H(u, v)` (and return times for `u = v`).
    Hit,
    /// Exact meeting times of two tokens.
    Meet,
    /// Monte Carlo cover time per starting agent.
    Cover,
    /// Monte Carlo steps until a token has moved `k` times.
    Drift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRow {
    /// `hit`, `return`, `meet`, `cover` or `drift`.
    pub quantity: String,
    pub from: usize,
    pub to: Option<usize>,
    pub k: Option<u64>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkOptions {
    pub trials: u64,
    pub seed: u64,
    /// Moves per drift measurement; `None` means `n`.
    pub k: Option<u64>,
}

const EXACT_TOLERANCE: f64 = 1e-9;

/// One row per ordered pair (hit), unordered pair (meet) or starting agent
/// (cover, drift). Empirical rows pass when `mean + 3·stderr ≤ bound`.
pub fn walk_rows(
    graph: &Graph,
    mode: WalkMode,
    options: WalkOptions,
) -> Result<Vec<WalkRow>, OracleError> {
    let n = graph.node_count();
    let (nf, mf, df) = (n as f64, graph.edge_count() as f64, graph.diameter() as f64);
    let exact = |quantity: &str, from, to, value: f64, bound: f64, pass| WalkRow {
        quantity: quantity.into(),
        from,
        to: Some(to),
        k: None,
        value,
        stderr: None,
        bound,
        pass,
    };
    let mut rows = Vec::new();
    match mode {
        WalkMode::Hit => {
            for u in 0..n {
                for v in 0..n {
                    let h = exact_hitting_time(graph, u, v)?;
                    rows.push(if u == v {
                        exact("return", u, v, h, nf, (h - nf).abs() <= EXACT_TOLERANCE)
                    } else {
                        let bound = mf * nf * graph.distance(u, v) as f64;
                        exact("hit", u, v, h, bound, h <= bound + EXACT_TOLERANCE)
                    });
                }
            }
        }
        WalkMode::Meet => {
            let bound = 2.0 * mf * nf * nf * df;
            for u in 0..n {
                for v in u + 1..n {
                    let t = exact_meeting_time(graph, u, v)?;
                    rows.push(exact("meet", u, v, t, bound, t < bound));
                }
            }
        }
        WalkMode::Cover | WalkMode::Drift => {
            let k = options.k.unwrap_or(n as u64);
            for w in 0..n {
                let (quantity, estimate, bound, k) = if mode == WalkMode::Cover {
                    let e = empirical_cover_time(graph, w, options.trials, options.seed);
                    ("cover", e, 2.0 * mf * nf * nf, None)
                } else {
                    let e = empirical_move_count_steps(graph, w, k, options.trials, options.seed);
                    // reach the agent with the smallest expected k-move time,
                    // then move k times from there
                    ("drift", e, mf * nf * df + nf * k as f64 / 2.0, Some(k))
                };
                rows.push(WalkRow {
                    quantity: quantity.into(),
                    from: w,
                    to: None,
                    k,
                    value: estimate.mean,
                    stderr: Some(estimate.stderr),
                    bound,
                    pass: estimate.upper(3.0) <= bound,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use poplab_core::GraphKind;

    fn options() -> WalkOptions {
        WalkOptions {
            trials: 200,
            seed: 1,
            k: None,
        }
    }

    #[test]
    fn triangle_hitting_rows() {
        let k3 = Graph::generate(GraphKind::Complete, 3, None, 0).unwrap();
        let rows = walk_rows(&k3, WalkMode::Hit, options()).unwrap();
        assert_eq!(rows.len(), 9);
        for r in &rows {
            assert!((r.value - 3.0).abs() < 1e-9 && r.pass, "{r:?}");
            let bound = if r.quantity == "hit" { 9.0 } else { 3.0 };
            assert_eq!(r.bound, bound);
        }
    }

    #[test]
    fn two_agent_rows() {
        let p2 = Graph::generate(GraphKind::Path, 2, None, 0).unwrap();
        let meet = walk_rows(&p2, WalkMode::Meet, options()).unwrap();
        assert_eq!(meet.len(), 1);
        assert!((meet[0].value - 1.0).abs() < 1e-9);
        assert_eq!((meet[0].bound, meet[0].pass), (8.0, true));
        for r in walk_rows(&p2, WalkMode::Cover, options()).unwrap() {
            assert_eq!(
                (r.value, r.stderr, r.bound, r.pass),
                (1.0, Some(0.0), 8.0, true)
            );
        }
        let drift = walk_rows(&p2, WalkMode::Drift, options()).unwrap();
        assert!(drift
            .iter()
            .all(|r| r.value == 2.0 && r.k == Some(2) && r.pass));
    }
}
