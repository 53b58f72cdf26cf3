//! Exact expected times for token walks under the uniformly random
//! scheduler.
//!
//! A token sitting on `x` moves to a neighbor `y` exactly when the unordered
//! pair `{x, y}` is scheduled, which happens with probability `1/m`, and
//! stays put with probability `1 - deg(x)/m`. Both solvers multiply their
//! equations through by `m` so the coefficient matrices are integral.

use alloc::vec;
use alloc::vec::Vec;

use super::OracleError;
use crate::graph::Graph;

/// Solves `a·x = b` for a dense row-major `dim × dim` matrix by Gaussian
/// elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>, OracleError> {
    let dim = b.len();
    assert_eq!(a.len(), dim * dim);
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&r, &s| libm::fabs(a[r * dim + col]).total_cmp(&libm::fabs(a[s * dim + col])))
            .ok_or(OracleError::Singular)?;
        if libm::fabs(a[pivot * dim + col]) < 1e-12 {
            return Err(OracleError::Singular);
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(pivot * dim + k, col * dim + k);
            }
            b.swap(pivot, col);
        }
        let diag = a[col * dim + col];
        for row in col + 1..dim {
            let factor = a[row * dim + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..dim {
                a[row * dim + k] -= factor * a[col * dim + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; dim];
    for row in (0..dim).rev() {
        let tail: f64 = (row + 1..dim).map(|k| a[row * dim + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * dim + row];
    }
    Ok(x)
}

/// Expected steps for a token to reach `target` from every agent. The entry
/// for `target` itself is the expected return time (first time `t ≥ 1` the
/// token is on `target` again, a lazy step counting as a return).
pub fn hitting_times_to(graph: &Graph, target: usize) -> Result<Vec<f64>, OracleError> {
    let n = graph.node_count();
    if target >= n {
        return Err(OracleError::BadAgent(target));
    }
    let m = graph.edge_count() as f64;
    // Unknown index for each non-target agent.
    let slot = |x: usize| if x < target { x } else { x - 1 };
    let dim = n - 1;
    let mut a = vec![0.0; dim * dim];
    let b = vec![m; dim];
    for x in (0..n).filter(|&x| x != target) {
        let row = slot(x);
        a[row * dim + row] = graph.degree(x) as f64;
        for &y in graph.neighbors(x) {
            if y != target {
                a[row * dim + slot(y)] -= 1.0;
            }
        }
    }
    let h = solve_dense(a, b)?;
    let mut times = vec![0.0; n];
    for x in (0..n).filter(|&x| x != target) {
        times[x] = h[slot(x)];
    }
    times[target] = 1.0
        + graph
            .neighbors(target)
            .iter()
            .map(|&y| times[y])
            .sum::<f64>()
            / m;
    Ok(times)
}

/// Expected steps for the token starting on `from` to first be on `to`;
/// the return time when `from == to`.
pub fn exact_hitting_time(graph: &Graph, from: usize, to: usize) -> Result<f64, OracleError> {
    if from >= graph.node_count() {
        return Err(OracleError::BadAgent(from));
    }
    Ok(hitting_times_to(graph, to)?[from])
}

/// Expected steps until the tokens starting on `u` and `v` take part in the
/// same interaction.
///
/// The state is the ordered pair of token positions `(a, b)`, `a ≠ b`.
/// Scheduling `{a, b}` absorbs; an edge at `a` (resp. `b`) only moves that
/// token; any other edge leaves the state unchanged.
pub fn exact_meeting_time(graph: &Graph, u: usize, v: usize) -> Result<f64, OracleError> {
    let n = graph.node_count();
    for x in [u, v] {
        if x >= n {
            return Err(OracleError::BadAgent(x));
        }
    }
    if u == v {
        return Err(OracleError::SameAgent);
    }
    let slot = |a: usize, b: usize| a * (n - 1) + if b < a { b } else { b - 1 };
    let dim = n * (n - 1);
    let m = graph.edge_count() as f64;
    let mut a = vec![0.0; dim * dim];
    let b = vec![m; dim];
    for p in 0..n {
        for q in (0..n).filter(|&q| q != p) {
            let row = slot(p, q);
            let adjacent = graph.has_edge(p, q);
            a[row * dim + row] =
                (graph.degree(p) + graph.degree(q)) as f64 - f64::from(u8::from(adjacent));
            for &y in graph.neighbors(p).iter().filter(|&&y| y != q) {
                a[row * dim + slot(y, q)] -= 1.0;
            }
            for &y in graph.neighbors(q).iter().filter(|&&y| y != p) {
                a[row * dim + slot(p, y)] -= 1.0;
            }
        }
    }
    Ok(solve_dense(a, b)?[slot(u, v)])
}
