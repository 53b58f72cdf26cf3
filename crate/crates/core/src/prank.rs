//! Self-stabilizing ranking with exact knowledge of `n`.
//!
//! Every agent carries a label (`idA`) and a color, and hosts exactly one
//! token that has its own label (`idT`), color and countdown timer. Tokens
//! are swapped on every interaction, so each performs a random walk; two
//! tokens with equal labels that meet separate by incrementing the
//! responder's label. An agent visited by the token carrying its own label
//! compares colors: a white agent adopts the token's color, a mismatch means
//! a duplicate label exists somewhere and the agent moves on to the next
//! label, and a match with an expired timer recolors agent and token
//! together.
//!
//! The recoloring is a single flip (red to blue, blue to red) decided on
//! the color before the update.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, FiniteProtocol, Protocol, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentColor {
    White,
    Red,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenColor {
    Red,
    Blue,
}

impl TokenColor {
    pub fn flipped(self) -> Self {
        match self {
            TokenColor::Red => TokenColor::Blue,
            TokenColor::Blue => TokenColor::Red,
        }
    }
}

impl From<TokenColor> for AgentColor {
    fn from(c: TokenColor) -> Self {
        match c {
            TokenColor::Red => AgentColor::Red,
            TokenColor::Blue => AgentColor::Blue,
        }
    }
}

impl AgentColor {
    const ALL: [AgentColor; 3] = [AgentColor::White, AgentColor::Red, AgentColor::Blue];

    fn index(self) -> u64 {
        self as u64
    }
}

impl TokenColor {
    const ALL: [TokenColor; 2] = [TokenColor::Red, TokenColor::Blue];

    fn index(self) -> u64 {
        self as u64
    }
}

/// Per-agent state. The first two fields belong to the agent, the last
/// three to the token it currently hosts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankState {
    #[serde(rename = "idA")]
    pub label: usize,
    #[serde(rename = "idT")]
    pub token_label: usize,
    #[serde(rename = "colorA")]
    pub color: AgentColor,
    #[serde(rename = "colorT")]
    pub token_color: TokenColor,
    #[serde(rename = "timerT")]
    pub token_timer: u32,
}

impl RankState {
    pub fn new(
        label: usize,
        token_label: usize,
        color: AgentColor,
        token_color: TokenColor,
        token_timer: u32,
    ) -> Self {
        RankState {
            label,
            token_label,
            color,
            token_color,
            token_timer,
        }
    }

    pub fn check_domain(&self, n: usize, tmax: u32) -> Result<(), EngineError> {
        let violation = |field, value: usize| EngineError::DomainViolation {
            field,
            value: value as u64,
        };
        if self.label >= n {
            return Err(violation("idA", self.label));
        }
        if self.token_label >= n {
            return Err(violation("idT", self.token_label));
        }
        if self.token_timer > tmax {
            return Err(violation("timerT", self.token_timer as usize));
        }
        Ok(())
    }

    fn swap_tokens(&mut self, other: &mut RankState) {
        core::mem::swap(&mut self.token_label, &mut other.token_label);
        core::mem::swap(&mut self.token_color, &mut other.token_color);
        core::mem::swap(&mut self.token_timer, &mut other.token_timer);
    }
}

/// The ranking protocol for a fixed `n` and `tmax`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PRank {
    params: ProtocolParams,
}

impl PRank {
    pub fn new(params: ProtocolParams) -> Result<Self, EngineError> {
        params.validate()?;
        Ok(PRank { params })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn tmax(&self) -> u32 {
        self.params.tmax
    }

    /// The transition on two in-domain states.
    pub fn step(&self, a0: &mut RankState, a1: &mut RankState) {
        let n = self.params.n;
        a0.swap_tokens(a1);
        if a0.token_label == a1.token_label {
            a1.token_label = (a1.token_label + 1) % n;
        }
        a0.token_timer = a0.token_timer.saturating_sub(1);
        a1.token_timer = a1.token_timer.saturating_sub(1);
        self.visit(a0);
        self.visit(a1);
    }

    /// Checked form of [`PRank::step`].
    pub fn checked_step(
        &self,
        s0: RankState,
        s1: RankState,
    ) -> Result<(RankState, RankState), EngineError> {
        s0.check_domain(self.params.n, self.params.tmax)?;
        s1.check_domain(self.params.n, self.params.tmax)?;
        let (mut a0, mut a1) = (s0, s1);
        self.step(&mut a0, &mut a1);
        Ok((a0, a1))
    }

    fn visit(&self, a: &mut RankState) {
        if a.label != a.token_label {
            return;
        }
        if a.color == AgentColor::White {
            a.color = a.token_color.into();
        }
        if a.color != AgentColor::from(a.token_color) {
            a.label = (a.label + 1) % self.params.n;
            a.color = AgentColor::White;
        } else if a.token_timer == 0 {
            a.token_timer = self.params.tmax;
            a.token_color = a.token_color.flipped();
            a.color = a.token_color.into();
        }
    }
}

/// One interaction of the ranking protocol with domain checks.
pub fn prank_step(
    s0: RankState,
    s1: RankState,
    params: &ProtocolParams,
) -> Result<(RankState, RankState), EngineError> {
    PRank::new(*params)?.checked_step(s0, s1)
}

/// The rank an agent outputs.
pub fn prank_output(s: &RankState) -> usize {
    s.label
}

/// Leader election by reduction: the agent ranked 0 leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "L")]
    Leader,
    #[serde(rename = "F")]
    Follower,
}

impl Role {
    pub fn from_rank(rank: usize) -> Self {
        if rank == 0 {
            Role::Leader
        } else {
            Role::Follower
        }
    }
}

impl Protocol for PRank {
    type State = RankState;
    type Output = usize;

    fn name(&self) -> &'static str {
        "prank"
    }

    fn interact(&self, initiator: &mut RankState, responder: &mut RankState) {
        self.step(initiator, responder);
    }

    fn output(&self, state: &RankState) -> usize {
        prank_output(state)
    }

    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> RankState {
        let n = self.params.n;
        RankState {
            label: rng.gen_range(0..n),
            token_label: rng.gen_range(0..n),
            color: AgentColor::ALL[rng.gen_range(0..3)],
            token_color: TokenColor::ALL[rng.gen_range(0..2)],
            token_timer: rng.gen_range(0..=self.params.tmax),
        }
    }

    fn params(&self) -> Option<&ProtocolParams> {
        Some(&self.params)
    }
}

/// Mixed radix, least significant first: `idA`, `idT`, `colorA`, `colorT`,
/// `timerT`.
impl FiniteProtocol for PRank {
    fn state_count(&self) -> u128 {
        let n = self.params.n as u128;
        n * n * 3 * 2 * (self.params.tmax as u128 + 1)
    }

    fn encode(&self, s: &RankState) -> u64 {
        let n = self.params.n as u64;
        let mut key = s.token_timer as u64;
        key = key * 2 + s.token_color.index();
        key = key * 3 + s.color.index();
        key = key * n + s.token_label as u64;
        key * n + s.label as u64
    }

    fn decode(&self, mut key: u64) -> RankState {
        let n = self.params.n as u64;
        let label = (key % n) as usize;
        key /= n;
        let token_label = (key % n) as usize;
        key /= n;
        let color = AgentColor::ALL[(key % 3) as usize];
        key /= 3;
        let token_color = TokenColor::ALL[(key % 2) as usize];
        key /= 2;
        RankState {
            label,
            token_label,
            color,
            token_color,
            token_timer: key as u32,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use AgentColor::{Blue as B, Red as R, White as W};

    fn tc(c: AgentColor) -> TokenColor {
        match c {
            R => TokenColor::Red,
            B => TokenColor::Blue,
            W => unreachable!(),
        }
    }

    fn st(
        label: usize,
        token: usize,
        color: AgentColor,
        tcolor: AgentColor,
        timer: u32,
    ) -> RankState {
        RankState::new(label, token, color, tc(tcolor), timer)
    }

    fn params(n: usize, tmax: u32) -> ProtocolParams {
        ProtocolParams {
            n,
            m_known: None,
            tmax,
            pmax: 0,
            emax: 0,
        }
    }

    #[test]
    fn white_agent_adopts_token_color() {
        let (a0, a1) = prank_step(st(0, 1, R, B, 3), st(1, 0, W, R, 2), &params(2, 3)).unwrap();
        assert_eq!(a0, st(0, 0, R, R, 1));
        assert_eq!(a1, st(1, 1, B, B, 2));
    }

    #[test]
    fn color_mismatch_pushes_label() {
        let (a0, a1) = prank_step(st(1, 0, R, R, 2), st(0, 1, B, B, 3), &params(2, 3)).unwrap();
        assert_eq!(a0, st(0, 1, W, B, 2));
        assert_eq!(a1, st(1, 0, W, R, 1));
    }

    #[test]
    fn expired_timer_flips_colors() {
        let (a0, a1) = prank_step(st(0, 1, R, B, 2), st(1, 0, B, R, 1), &params(2, 3)).unwrap();
        assert_eq!(a0, st(0, 0, B, B, 3));
        assert_eq!(a1, st(1, 1, B, B, 1));
    }

    #[test]
    fn blue_flips_to_red() {
        let (a0, _) = prank_step(st(0, 1, B, R, 0), st(1, 0, R, B, 1), &params(2, 3)).unwrap();
        assert_eq!(a0, st(0, 0, R, R, 3));
    }

    #[test]
    fn token_collision_renames_responder() {
        let (a0, a1) = prank_step(st(0, 2, W, R, 5), st(1, 2, W, B, 5), &params(3, 5)).unwrap();
        assert_eq!((a0.token_label, a0.token_color), (2, TokenColor::Blue));
        assert_eq!((a1.token_label, a1.token_color), (0, TokenColor::Red));
        let (_, a1) = prank_step(st(0, 2, W, R, 5), st(2, 2, W, B, 5), &params(3, 5)).unwrap();
        assert_eq!(a1.token_label, 0);
    }

    #[test]
    fn domain_checks() {
        let p = params(2, 3);
        assert!(matches!(
            prank_step(st(2, 0, R, R, 0), st(0, 0, R, R, 0), &p),
            Err(EngineError::DomainViolation { field: "idA", .. })
        ));
        assert!(matches!(
            prank_step(st(0, 0, R, R, 4), st(0, 0, R, R, 0), &p),
            Err(EngineError::DomainViolation {
                field: "timerT",
                ..
            })
        ));
    }

    #[test]
    fn output_and_roles() {
        assert_eq!(prank_output(&st(3, 0, W, R, 0)), 3);
        assert_eq!(Role::from_rank(0), Role::Leader);
        assert_eq!(Role::from_rank(2), Role::Follower);
    }

    #[test]
    fn encoding_is_a_bijection() {
        let p = PRank::new(params(3, 2)).unwrap();
        let count = p.state_count() as u64;
        assert_eq!(count, 3 * 3 * 3 * 2 * 3);
        for key in 0..count {
            let s = p.decode(key);
            assert!(s.check_domain(3, 2).is_ok());
            assert_eq!(p.encode(&s), key);
        }
        assert_eq!(PRank::new(params(2, 1)).unwrap().state_count(), 48);
    }
}
