//! The label game: `n` players hold states in `0..n`; whenever two chosen
//! players share a state, one of them moves to the next state mod `n`.
//!
//! For any start there is a state `z` that no player ever enters from
//! `z - 1`. The closed form depends only on the counts `k_i` of players in
//! each state: `z` qualifies iff `Σ_{j=1..i} k_{z-j} ≤ i` for every
//! `i = 1..n-1`. [`game_brute_force`] explores every reachable
//! configuration instead and must agree.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("counts must have length n >= 1 and sum to n")]
    BadCounts,
    #[error("player state {0} is out of range")]
    BadState(usize),
    #[error("exhaustive search is limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
}

/// `k[i]` = number of players in state `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GameCounts(Vec<usize>);

impl GameCounts {
    pub fn new(counts: Vec<usize>) -> Result<Self, GameError> {
        if counts.is_empty() || counts.iter().sum::<usize>() != counts.len() {
            return Err(GameError::BadCounts);
        }
        Ok(GameCounts(counts))
    }

    pub fn from_states(states: &[usize]) -> Result<Self, GameError> {
        let n = states.len();
        let mut counts = vec![0; n];
        for &s in states {
            *counts.get_mut(s).ok_or(GameError::BadState(s))? += 1;
        }
        Self::new(counts)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// States never entered from their predecessor, by the counting criterion.
pub fn game_stable_set(counts: &GameCounts) -> Vec<usize> {
    let k = counts.as_slice();
    let n = k.len();
    (0..n)
        .filter(|&z| {
            let mut prefix = 0;
            (1..n).all(|i| {
                prefix += k[(z + n - i) % n];
                prefix <= i
            })
        })
        .collect()
}

pub const BRUTE_FORCE_MAX_N: usize = 6;

/// States never entered from their predecessor, by exhaustive exploration
/// of every configuration reachable from `states` under every choice of
/// colliding pair and of which player advances.
pub fn game_brute_force(states: &[usize]) -> Result<Vec<usize>, GameError> {
    let n = states.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(GameError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    if n == 0 {
        return Err(GameError::BadCounts);
    }
    if let Some(&bad) = states.iter().find(|&&s| s >= n) {
        return Err(GameError::BadState(bad));
    }
    let total = n.pow(n as u32);
    let encode = |s: &[usize]| s.iter().rev().fold(0, |key, &x| key * n + x);
    let decode = |mut key: usize| {
        let mut s = vec![0; n];
        for slot in s.iter_mut() {
            *slot = key % n;
            key /= n;
        }
        s
    };

    let mut seen = vec![false; total];
    let mut entered = vec![false; n];
    let mut queue = VecDeque::new();
    let start = encode(states);
    seen[start] = true;
    queue.push_back(start);
    while let Some(key) = queue.pop_front() {
        let config = decode(key);
        for i in 0..n {
            // player i may advance if some other player shares its state
            if (0..n).any(|j| j != i && config[j] == config[i]) {
                let mut next = config.clone();
                next[i] = (next[i] + 1) % n;
                entered[next[i]] = true;
                let next_key = encode(&next);
                if !core::mem::replace(&mut seen[next_key], true) {
                    queue.push_back(next_key);
                }
            }
        }
    }
    Ok((0..n).filter(|&z| !entered[z]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(k: &[usize]) -> GameCounts {
        GameCounts::new(k.to_vec()).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(game_stable_set(&counts(&[3, 0, 0])), [0]);
        assert_eq!(game_stable_set(&counts(&[1, 1, 1])), [0, 1, 2]);
        assert_eq!(game_stable_set(&counts(&[2, 0])), [0]);
        assert_eq!(
            GameCounts::new(std::vec![2, 0, 0]),
            Err(GameError::BadCounts)
        );
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(game_brute_force(&[0, 0, 0]).unwrap(), [0]);
        assert_eq!(game_brute_force(&[0, 1]).unwrap(), [0, 1]);
        assert_eq!(game_brute_force(&[1, 1]).unwrap(), [1]);
        assert_eq!(game_brute_force(&[0, 3, 0]), Err(GameError::BadState(3)));
        assert!(matches!(
            game_brute_force(&[0; 7]),
            Err(GameError::TooLarge { .. })
        ));
    }

    #[test]
    fn agree_exhaustively_at_n3() {
        for key in 0..27usize {
            let states = [key % 3, key / 3 % 3, key / 9];
            let closed = game_stable_set(&GameCounts::from_states(&states).unwrap());
            assert_eq!(closed, game_brute_force(&states).unwrap(), "{states:?}");
            assert!(!closed.is_empty());
        }
    }
}
