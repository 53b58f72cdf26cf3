//! Self-stabilizing neighbor recognition with exact knowledge of `n` and `m`.
//!
//! Runs [`PRank`] underneath for labels and token walks. Each token `x`
//! additionally carries `degreeT`, the last neighbor count it read from the
//! agent labeled `x`. Agents add the partner's label to `neighbors` on every
//! interaction and accumulate the `degreeT` of each distinct token they meet
//! into `dsum`; a sum of `2m + 1` proves some neighbor set holds a label that
//! is not a real neighbor, and the agent raises an error signal (`resetE`)
//! that spreads by max-minus-one propagation and wipes `neighbors` wherever
//! it is positive. `timerP` periodically restarts the count.
//!
//! Neighbor and counted sets are [`LabelSet`]s, so `n` is limited to 64.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, FiniteProtocol, Protocol, ProtocolParams};
use crate::labelset::LabelSet;
use crate::prank::{PRank, RankState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NeighborState {
    #[serde(flatten)]
    pub rank: RankState,
    #[serde(rename = "degreeT")]
    pub token_degree: usize,
    #[serde(rename = "dsum")]
    pub degree_sum: usize,
    #[serde(rename = "resetE")]
    pub reset_signal: u32,
    #[serde(rename = "timerP")]
    pub count_timer: u32,
    pub neighbors: LabelSet,
    pub counted: LabelSet,
}

impl NeighborState {
    pub fn check_domain(&self, params: &ProtocolParams) -> Result<(), EngineError> {
        let n = params.n;
        let m = params.m_known.ok_or(EngineError::MissingKnowledge)?;
        self.rank.check_domain(n, params.tmax)?;
        let violation = |field, value: usize| EngineError::DomainViolation {
            field,
            value: value as u64,
        };
        if self.token_degree > n {
            return Err(violation("degreeT", self.token_degree));
        }
        if self.degree_sum > 2 * m + 1 {
            return Err(violation("dsum", self.degree_sum));
        }
        if self.reset_signal > params.emax {
            return Err(violation("resetE", self.reset_signal as usize));
        }
        if self.count_timer > params.pmax {
            return Err(violation("timerP", self.count_timer as usize));
        }
        if self.neighbors.span() > n {
            return Err(violation("neighbors", self.neighbors.span() - 1));
        }
        if self.counted.span() > n {
            return Err(violation("counted", self.counted.span() - 1));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PNeighbor {
    rank: PRank,
    params: ProtocolParams,
    m: usize,
}

impl PNeighbor {
    /// Requires `params.m_known`; the embedded ranking protocol uses
    /// `params.tmax`.
    pub fn new(params: ProtocolParams) -> Result<Self, EngineError> {
        let m = params.m_known.ok_or(EngineError::MissingKnowledge)?;
        params.validate()?;
        if params.n > LabelSet::CAPACITY {
            return Err(EngineError::InvalidParams("n must not exceed 64"));
        }
        Ok(PNeighbor {
            rank: PRank::new(params)?,
            params,
            m,
        })
    }

    pub fn rank_protocol(&self) -> &PRank {
        &self.rank
    }

    /// `2m + 1`, the saturating value of `dsum`.
    pub fn overflow_sum(&self) -> usize {
        2 * self.m + 1
    }

    pub fn step(&self, a0: &mut NeighborState, a1: &mut NeighborState) {
        self.rank.step(&mut a0.rank, &mut a1.rank);
        core::mem::swap(&mut a0.token_degree, &mut a1.token_degree);

        let signal = a0
            .reset_signal
            .saturating_sub(1)
            .max(a1.reset_signal.saturating_sub(1));
        a0.reset_signal = signal;
        a1.reset_signal = signal;
        if signal > 0 {
            a0.neighbors.clear();
            a1.neighbors.clear();
        }

        let (label0, label1) = (a0.rank.label, a1.rank.label);
        self.settle(a0, label1);
        self.settle(a1, label0);
    }

    fn settle(&self, a: &mut NeighborState, partner_label: usize) {
        a.count_timer = a.count_timer.saturating_sub(1);
        if a.count_timer == 0 {
            a.degree_sum = 0;
            a.counted.clear();
            a.count_timer = self.params.pmax;
        }
        a.neighbors.insert(partner_label);
        if a.rank.label == a.rank.token_label {
            a.token_degree = a.neighbors.len();
        }
        if !a.counted.contains(a.rank.token_label) {
            a.degree_sum = (a.degree_sum + a.token_degree).min(self.overflow_sum());
            a.counted.insert(a.rank.token_label);
        }
        if a.degree_sum == self.overflow_sum() {
            a.reset_signal = self.params.emax;
        }
    }

    pub fn checked_step(
        &self,
        s0: NeighborState,
        s1: NeighborState,
    ) -> Result<(NeighborState, NeighborState), EngineError> {
        s0.check_domain(&self.params)?;
        s1.check_domain(&self.params)?;
        let (mut a0, mut a1) = (s0, s1);
        self.step(&mut a0, &mut a1);
        Ok((a0, a1))
    }
}

/// One interaction of the neighbor-recognition protocol with domain checks.
pub fn pneighbor_step(
    s0: NeighborState,
    s1: NeighborState,
    params: &ProtocolParams,
) -> Result<(NeighborState, NeighborState), EngineError> {
    PNeighbor::new(*params)?.checked_step(s0, s1)
}

/// `(label, neighbor labels)`; the degree output is the set's size.
pub fn pneighbor_output(s: &NeighborState) -> (usize, LabelSet) {
    (s.rank.label, s.neighbors)
}

impl Protocol for PNeighbor {
    type State = NeighborState;
    type Output = (usize, LabelSet);

    fn name(&self) -> &'static str {
        "pneighbor"
    }

    fn interact(&self, initiator: &mut NeighborState, responder: &mut NeighborState) {
        self.step(initiator, responder);
    }

    fn output(&self, state: &NeighborState) -> (usize, LabelSet) {
        pneighbor_output(state)
    }

    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> NeighborState {
        let n = self.params.n;
        let mask = LabelSet::full(n).bits();
        NeighborState {
            rank: self.rank.sample_state(rng),
            token_degree: rng.gen_range(0..=n),
            degree_sum: rng.gen_range(0..=self.overflow_sum()),
            reset_signal: rng.gen_range(0..=self.params.emax),
            count_timer: rng.gen_range(0..=self.params.pmax),
            neighbors: LabelSet::from_bits(rng.gen::<u64>() & mask),
            counted: LabelSet::from_bits(rng.gen::<u64>() & mask),
        }
    }

    fn params(&self) -> Option<&ProtocolParams> {
        Some(&self.params)
    }
}

/// Mixed radix, least significant first: the ranking state, `degreeT`,
/// `dsum`, `resetE`, `timerP`, `neighbors`, `counted`.
///
/// `encode`/`decode` are only meaningful when [`FiniteProtocol::state_count`]
/// fits in `u64`.
impl FiniteProtocol for PNeighbor {
    fn state_count(&self) -> u128 {
        let p = &self.params;
        let sets = 1u128 << (2 * p.n).min(127);
        self.rank
            .state_count()
            .saturating_mul((p.n as u128 + 1) * (self.overflow_sum() as u128 + 1))
            .saturating_mul((p.emax as u128 + 1) * (p.pmax as u128 + 1))
            .saturating_mul(sets)
    }

    fn encode(&self, s: &NeighborState) -> u64 {
        let p = &self.params;
        let n = p.n as u64;
        let mut key = s.counted.bits();
        key = (key << n) | s.neighbors.bits();
        key = key * (p.pmax as u64 + 1) + s.count_timer as u64;
        key = key * (p.emax as u64 + 1) + s.reset_signal as u64;
        key = key * (self.overflow_sum() as u64 + 1) + s.degree_sum as u64;
        key = key * (n + 1) + s.token_degree as u64;
        key * self.rank.state_count() as u64 + self.rank.encode(&s.rank)
    }

    fn decode(&self, mut key: u64) -> NeighborState {
        let p = &self.params;
        let n = p.n as u64;
        let mut take = |radix: u64| {
            let digit = key % radix;
            key /= radix;
            digit
        };
        let rank = self.rank.decode(take(self.rank.state_count() as u64));
        let token_degree = take(n + 1) as usize;
        let degree_sum = take(self.overflow_sum() as u64 + 1) as usize;
        let reset_signal = take(p.emax as u64 + 1) as u32;
        let count_timer = take(p.pmax as u64 + 1) as u32;
        let neighbors = LabelSet::from_bits(take(1 << n));
        let counted = LabelSet::from_bits(take(1 << n));
        NeighborState {
            rank,
            token_degree,
            degree_sum,
            reset_signal,
            count_timer,
            neighbors,
            counted,
        }
    }
}
