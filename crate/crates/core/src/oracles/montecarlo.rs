//! Monte Carlo estimates for single-token walks. Trial `i` runs the
//! scheduler with seed `trial_seed(seed, i)`.

use alloc::vec;

use serde::{Deserialize, Serialize};

use crate::engine::{draw_pair, scheduler_rng, trial_seed};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean (sample standard deviation / √trials).
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I) -> Self {
        // Welford
        let (mut count, mut mean, mut m2) = (0u64, 0.0f64, 0.0f64);
        for x in samples {
            count += 1;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
        let stderr = if count > 1 {
            libm::sqrt(m2 / (count - 1) as f64 / count as f64)
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr,
            trials: count,
        }
    }

    /// `mean + k·stderr`.
    pub fn upper(&self, k: f64) -> f64 {
        self.mean + k * self.stderr
    }
}

/// Steps until the token starting on `w` has been hosted by every agent.
pub fn empirical_cover_time(graph: &Graph, w: usize, trials: u64, seed: u64) -> Estimate {
    let n = graph.node_count();
    Estimate::from_samples((0..trials).map(|i| {
        let mut rng = scheduler_rng(trial_seed(seed, i));
        let mut visited = vec![false; n];
        visited[w] = true;
        let (mut at, mut remaining, mut steps) = (w, n - 1, 0u64);
        while remaining > 0 {
            let (u, v) = draw_pair(graph, &mut rng);
            steps += 1;
            if u == at || v == at {
                at = if u == at { v } else { u };
                if !core::mem::replace(&mut visited[at], true) {
                    remaining -= 1;
                }
            }
        }
        steps as f64
    }))
}

/// Steps until the token starting on `w` has changed host `k` times.
pub fn empirical_move_count_steps(
    graph: &Graph,
    w: usize,
    k: u64,
    trials: u64,
    seed: u64,
) -> Estimate {
    Estimate::from_samples((0..trials).map(|i| {
        let mut rng = scheduler_rng(trial_seed(seed, i));
        let (mut at, mut moves, mut steps) = (w, 0u64, 0u64);
        while moves < k {
            let (u, v) = draw_pair(graph, &mut rng);
            steps += 1;
            if u == at || v == at {
                at = if u == at { v } else { u };
                moves += 1;
            }
        }
        steps as f64
    }))
}

/// Expected steps a token waits on `w` before moving: `m / deg(w)`.
pub fn location_weight(graph: &Graph, w: usize) -> f64 {
    graph.edge_count() as f64 / graph.degree(w) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    #[test]
    fn two_agents_are_deterministic() {
        let p2 = Graph::generate(GraphKind::Path, 2, None, 0).unwrap();
        let c = empirical_cover_time(&p2, 0, 50, 1);
        assert_eq!((c.mean, c.stderr), (1.0, 0.0));
        let d = empirical_move_count_steps(&p2, 1, 1, 50, 1);
        assert_eq!(d.mean, 1.0);
    }

    #[test]
    fn star_waits_match_weights() {
        let star = Graph::generate(GraphKind::Star, 4, None, 0).unwrap();
        assert_eq!(location_weight(&star, 0), 1.0);
        assert_eq!(location_weight(&star, 1), 3.0);
        let center = empirical_move_count_steps(&star, 0, 1, 200, 3);
        assert_eq!(center.mean, 1.0);
        let leaf = empirical_move_count_steps(&star, 2, 1, 4000, 3);
        assert!((leaf.mean - 3.0).abs() <= 3.0 * leaf.stderr, "{leaf:?}");
    }

    #[test]
    fn estimate_statistics() {
        let e = Estimate::from_samples([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3 over 4 samples
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert_eq!(Estimate::from_samples([7.0]).stderr, 0.0);
    }
}
