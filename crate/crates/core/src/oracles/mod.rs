//! Ground truth the simulator is checked against: problem predicates, the
//! nested safe sets of the ranking protocol, the structural safe set of the
//! neighbor protocol, exact Markov chain solvers for token walks, Monte
//! Carlo estimators, and the label game.

pub mod game;
pub mod markov;
pub mod montecarlo;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::ProtocolParams;
use crate::graph::Graph;
use crate::labelset::LabelSet;
use crate::pneighbor::NeighborState;
use crate::prank::{AgentColor, RankState, Role, TokenColor};

pub use game::{game_brute_force, game_stable_set, GameCounts, GameError};
pub use markov::{exact_hitting_time, exact_meeting_time, hitting_times_to};
pub use montecarlo::{empirical_cover_time, empirical_move_count_steps, Estimate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("linear system is singular")]
    Singular,
    #[error("agent {0} is not in the graph")]
    BadAgent(usize),
    #[error("meeting time needs two distinct agents")]
    SameAgent,
}

/// How far a ranking configuration has progressed. Each level implies the
/// ones below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafeLevel {
    None,
    /// All token labels distinct.
    SToken,
    /// Additionally every occupied label `x` has an agent that is white or
    /// shares the color of token `x`.
    SSync,
    /// Additionally all agent labels distinct.
    SRank,
}

pub fn classify_rank_config(states: &[RankState], n: usize) -> SafeLevel {
    if states.len() != n {
        return SafeLevel::None;
    }
    let mut token_color = vec![None::<TokenColor>; n];
    for s in states {
        match token_color.get_mut(s.token_label) {
            Some(slot @ None) => *slot = Some(s.token_color),
            _ => return SafeLevel::None,
        }
    }
    let mut occupied = vec![false; n];
    let mut witnessed = vec![false; n];
    let mut distinct = true;
    for s in states {
        let Some(token) = token_color.get(s.label).copied().flatten() else {
            return SafeLevel::SToken;
        };
        distinct &= !occupied[s.label];
        occupied[s.label] = true;
        if s.color == AgentColor::White || s.color == AgentColor::from(token) {
            witnessed[s.label] = true;
        }
    }
    if occupied.iter().zip(&witnessed).any(|(&o, &w)| o && !w) {
        SafeLevel::SToken
    } else if !distinct {
        SafeLevel::SSync
    } else {
        SafeLevel::SRank
    }
}

/// Problems whose specifications are predicates on agent outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Elect,
    Ranking,
    Degree,
    Neighbor,
}

/// Outputs of every agent, tagged with the problem they answer.
#[derive(Debug, Clone, Copy)]
pub enum SpecOutputs<'a> {
    Elect(&'a [Role]),
    Ranking(&'a [usize]),
    Degree(&'a [usize]),
    Neighbor(&'a [(usize, LabelSet)]),
}

impl SpecOutputs<'_> {
    pub fn problem(&self) -> Problem {
        match self {
            SpecOutputs::Elect(_) => Problem::Elect,
            SpecOutputs::Ranking(_) => Problem::Ranking,
            SpecOutputs::Degree(_) => Problem::Degree,
            SpecOutputs::Neighbor(_) => Problem::Neighbor,
        }
    }
}

/// Evaluates the problem's specification on `graph`.
pub fn check_spec(outputs: SpecOutputs<'_>, graph: &Graph) -> bool {
    let n = graph.node_count();
    match outputs {
        SpecOutputs::Elect(roles) => {
            roles.len() == n && roles.iter().filter(|&&r| r == Role::Leader).count() == 1
        }
        SpecOutputs::Ranking(ranks) => {
            let mut seen = vec![false; n];
            ranks.len() == n
                && ranks
                    .iter()
                    .all(|&r| r < n && !core::mem::replace(&mut seen[r], true))
        }
        SpecOutputs::Degree(degrees) => {
            degrees.len() == n && (0..n).all(|v| degrees[v] == graph.degree(v))
        }
        SpecOutputs::Neighbor(pairs) => {
            pairs.len() == n
                && (0..n).all(|v| {
                    let expected: LabelSet = graph
                        .neighbors(v)
                        .iter()
                        .map(|&u| pairs[u].0)
                        .filter(|&c| c < LabelSet::CAPACITY)
                        .collect();
                    let in_range = graph
                        .neighbors(v)
                        .iter()
                        .all(|&u| pairs[u].0 < LabelSet::CAPACITY);
                    in_range && pairs[v].1 == expected && pairs[v].1.len() == graph.degree(v)
                })
        }
    }
}

/// The structural safe set for the neighbor protocol: ranking converged,
/// every neighbor set exact, no error signal anywhere, every token's
/// degree payload at most its agent's true degree, and every partial sum
/// bounded by the true degrees it has counted (and by `2m`).
pub fn neighbor_safe(states: &[NeighborState], graph: &Graph, params: &ProtocolParams) -> bool {
    let n = graph.node_count();
    if params.n != n || states.len() != n {
        return false;
    }
    let ranks: Vec<RankState> = states.iter().map(|s| s.rank).collect();
    if classify_rank_config(&ranks, n) != SafeLevel::SRank {
        return false;
    }
    // label -> true degree of the agent holding it
    let mut label_degree = vec![0usize; n];
    for (v, s) in states.iter().enumerate() {
        label_degree[s.rank.label] = graph.degree(v);
    }
    let two_m = 2 * params.m_known.unwrap_or(graph.edge_count());
    states.iter().enumerate().all(|(v, s)| {
        let true_labels: LabelSet = graph
            .neighbors(v)
            .iter()
            .map(|&u| states[u].rank.label)
            .collect();
        let counted_bound: usize = s
            .counted
            .iter()
            .filter(|&x| x < n)
            .map(|x| label_degree[x])
            .sum();
        s.neighbors == true_labels
            && s.reset_signal == 0
            && s.token_degree <= label_degree[s.rank.token_label]
            && s.degree_sum <= two_m.min(counted_bound)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;
    use crate::prank::TokenColor;

    fn st(label: usize, token: usize, color: AgentColor, tc: TokenColor) -> RankState {
        RankState::new(label, token, color, tc, 0)
    }

    #[test]
    fn rank_levels() {
        use AgentColor::*;
        let dup_tokens = [
            st(0, 0, Red, TokenColor::Red),
            st(1, 0, Red, TokenColor::Red),
        ];
        assert_eq!(classify_rank_config(&dup_tokens, 2), SafeLevel::None);
        // Token 0 (hosted by agent 0) is blue, both agents labeled 0 are red.
        let unsynced = [
            st(0, 0, Red, TokenColor::Blue),
            st(0, 1, Red, TokenColor::Red),
        ];
        assert_eq!(classify_rank_config(&unsynced, 2), SafeLevel::SToken);
        let synced_dup = [
            st(0, 0, Red, TokenColor::Red),
            st(0, 1, Blue, TokenColor::Red),
        ];
        assert_eq!(classify_rank_config(&synced_dup, 2), SafeLevel::SSync);
        let ranked = [
            st(0, 1, Blue, TokenColor::Red),
            st(1, 0, Red, TokenColor::Blue),
        ];
        assert_eq!(classify_rank_config(&ranked, 2), SafeLevel::SRank);
        let white = [
            st(0, 1, White, TokenColor::Red),
            st(1, 0, White, TokenColor::Blue),
        ];
        assert_eq!(classify_rank_config(&white, 2), SafeLevel::SRank);
    }

    #[test]
    fn spec_predicates() {
        let p3 = Graph::generate(GraphKind::Path, 3, None, 0).unwrap();
        assert!(check_spec(SpecOutputs::Ranking(&[0, 1, 2]), &p3));
        assert!(check_spec(SpecOutputs::Ranking(&[2, 0, 1]), &p3));
        assert!(!check_spec(SpecOutputs::Ranking(&[0, 0, 2]), &p3));
        assert!(!check_spec(SpecOutputs::Ranking(&[0, 1, 3]), &p3));
        assert!(check_spec(SpecOutputs::Degree(&[1, 2, 1]), &p3));
        assert!(!check_spec(SpecOutputs::Degree(&[2, 2, 2]), &p3));
        use Role::*;
        assert!(check_spec(
            SpecOutputs::Elect(&[Follower, Leader, Follower]),
            &p3
        ));
        assert!(!check_spec(
            SpecOutputs::Elect(&[Leader, Leader, Follower]),
            &p3
        ));

        let s = |l: &[usize]| l.iter().copied().collect::<LabelSet>();
        let good = [(0, s(&[1])), (1, s(&[0, 2])), (2, s(&[1]))];
        assert!(check_spec(SpecOutputs::Neighbor(&good), &p3));
        // Endpoints share label 0, so agent 1 sees {0}: right set, wrong size.
        let not_two_hop = [(0, s(&[1])), (1, s(&[0])), (0, s(&[1]))];
        assert!(!check_spec(SpecOutputs::Neighbor(&not_two_hop), &p3));
        let wrong = [(0, s(&[1, 2])), (1, s(&[0, 2])), (2, s(&[1]))];
        assert!(!check_spec(SpecOutputs::Neighbor(&wrong), &p3));
    }
}
