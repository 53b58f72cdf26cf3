//! Deliberately broken degree-recognition protocols used as verifier
//! targets.

use rand::Rng;

use crate::engine::{FiniteProtocol, Protocol};
use crate::labelset::LabelSet;
use crate::pneighbor::PNeighbor;

/// Protocols whose output can be read as a degree.
pub trait DegreeProtocol: Protocol {
    fn degree(&self, output: &Self::Output) -> usize;
}

impl DegreeProtocol for PNeighbor {
    fn degree(&self, output: &Self::Output) -> usize {
        output.1.len()
    }
}

/// Fixed labels, monotone accumulation of partner labels, output the
/// number of distinct labels seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyDegree {
    n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct GreedyState {
    pub label: usize,
    pub seen: LabelSet,
}

impl GreedyDegree {
    pub fn new(n: usize) -> Self {
        assert!((2..=LabelSet::CAPACITY).contains(&n));
        GreedyDegree { n }
    }
}

impl Protocol for GreedyDegree {
    type State = GreedyState;
    type Output = usize;

    fn name(&self) -> &'static str {
        "greedydegree"
    }

    fn interact(&self, a0: &mut GreedyState, a1: &mut GreedyState) {
        a0.seen.insert(a1.label);
        a1.seen.insert(a0.label);
    }

    fn output(&self, s: &GreedyState) -> usize {
        s.seen.len()
    }

    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> GreedyState {
        GreedyState {
            label: rng.gen_range(0..self.n),
            seen: LabelSet::from_bits(rng.gen::<u64>() & LabelSet::full(self.n).bits()),
        }
    }
}

impl FiniteProtocol for GreedyDegree {
    fn state_count(&self) -> u128 {
        (self.n as u128) << self.n
    }

    fn encode(&self, s: &GreedyState) -> u64 {
        (s.seen.bits() * self.n as u64) + s.label as u64
    }

    fn decode(&self, key: u64) -> GreedyState {
        let n = self.n as u64;
        GreedyState {
            label: (key % n) as usize,
            seen: LabelSet::from_bits(key / n),
        }
    }
}

impl DegreeProtocol for GreedyDegree {
    fn degree(&self, output: &usize) -> usize {
        *output
    }
}

/// Outputs a stored value in `0..n` and never changes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrozenDegree {
    n: usize,
}

impl FrozenDegree {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        FrozenDegree { n }
    }
}

impl Protocol for FrozenDegree {
    type State = usize;
    type Output = usize;

    fn name(&self) -> &'static str {
        "frozendegree"
    }

    fn interact(&self, _: &mut usize, _: &mut usize) {}

    fn output(&self, s: &usize) -> usize {
        *s
    }

    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.gen_range(0..self.n)
    }
}

impl FiniteProtocol for FrozenDegree {
    fn state_count(&self) -> u128 {
        self.n as u128
    }

    fn encode(&self, s: &usize) -> u64 {
        *s as u64
    }

    fn decode(&self, key: u64) -> usize {
        key as usize
    }
}

impl DegreeProtocol for FrozenDegree {
    fn degree(&self, output: &usize) -> usize {
        *output
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_accumulates() {
        let p = GreedyDegree::new(3);
        let mut a = GreedyState {
            label: 0,
            seen: LabelSet::empty(),
        };
        let mut b = GreedyState {
            label: 2,
            seen: LabelSet::empty(),
        };
        p.interact(&mut a, &mut b);
        assert_eq!((p.output(&a), p.output(&b)), (1, 1));
        assert!(a.seen.contains(2) && b.seen.contains(0));
        assert_eq!(p.state_count(), 24);
        for key in 0..24 {
            assert_eq!(p.encode(&p.decode(key)), key);
        }
    }
}
