//! Execution under the uniformly random scheduler.
//!
//! One step draws an ordered pair `(initiator, responder)` uniformly among the
//! `2m` arcs of the population graph and applies the protocol's transition to
//! exactly those two agents. Every run is a pure function of its inputs and a
//! 64-bit seed; the scheduler stream is ChaCha8 seeded with that value.

use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Index, IndexMut};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("({u}, {v}) is not an interactable pair")]
    NotAnEdge { u: usize, v: usize },
    #[error("configuration has {got} agents, graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("field {field} = {value} is outside its domain")]
    DomainViolation { field: &'static str, value: u64 },
    #[error("protocol requires exact knowledge of the number of interactable pairs")]
    MissingKnowledge,
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
}

/// Knowledge handed to the agents plus the timer ceilings derived from it.
///
/// `n` is the exact population size. `m_known` is the exact number of
/// unordered interactable pairs when that knowledge is available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: usize,
    pub m_known: Option<usize>,
    pub tmax: u32,
    pub pmax: u32,
    pub emax: u32,
}

/// `⌈log₂ n⌉`, with a floor of 1.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 2 {
        1
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

impl ProtocolParams {
    /// Default timer ceilings.
    ///
    /// `tmax = 4mn` when `m` is known, otherwise `2n³`;
    /// `pmax = 8·m·n·d·⌈log₂ n⌉` (zero without `m`); `emax = 4n²`.
    pub fn with_defaults(n: usize, m_known: Option<usize>, diameter: usize) -> Self {
        let sat = |x: usize| u32::try_from(x).unwrap_or(u32::MAX);
        let tmax = match m_known {
            Some(m) => 4 * m * n,
            None => 2 * n * n * n,
        };
        let pmax = m_known.map_or(0, |m| 8 * m * n * diameter.max(1) * ceil_log2(n) as usize);
        ProtocolParams {
            n,
            m_known,
            tmax: sat(tmax),
            pmax: sat(pmax),
            emax: sat(4 * n * n),
        }
    }

    /// Defaults for a concrete graph; `know_m` selects whether the agents
    /// are told the exact edge count.
    pub fn for_graph(graph: &Graph, know_m: bool) -> Self {
        Self::with_defaults(
            graph.node_count(),
            know_m.then(|| graph.edge_count()),
            graph.diameter(),
        )
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.n < 2 {
            return Err(EngineError::InvalidParams("n must be at least 2"));
        }
        if self.tmax == 0 {
            return Err(EngineError::InvalidParams("tmax must be at least 1"));
        }
        if self.m_known.is_some() && (self.pmax == 0 || self.emax == 0) {
            return Err(EngineError::InvalidParams(
                "pmax and emax must be at least 1 when m is known",
            ));
        }
        Ok(())
    }
}

/// A population protocol: a per-agent state type, a transition applied to
/// an (initiator, responder) pair, and an output function.
pub trait Protocol {
    type State: Clone + PartialEq + Debug;
    type Output: Clone + PartialEq + Debug;

    fn name(&self) -> &'static str;

    /// Applies the transition in place. Implementations must only touch
    /// the two states they are given.
    fn interact(&self, initiator: &mut Self::State, responder: &mut Self::State);

    fn output(&self, state: &Self::State) -> Self::Output;

    /// Draws a state uniformly over the full per-agent domain.
    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn params(&self) -> Option<&ProtocolParams> {
        None
    }
}

/// A protocol whose per-agent state space can be enumerated.
///
/// `encode` maps every in-domain state to a distinct index below
/// `state_count`, and `decode` inverts it.
pub trait FiniteProtocol: Protocol {
    fn state_count(&self) -> u128;
    fn encode(&self, state: &Self::State) -> u64;
    fn decode(&self, index: u64) -> Self::State;
}

/// One state per agent, indexed by agent id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration<S> {
    states: Vec<S>,
}

impl<S> Configuration<S> {
    pub fn new(states: Vec<S>) -> Self {
        Configuration { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn into_states(self) -> Vec<S> {
        self.states
    }

    pub fn iter(&self) -> core::slice::Iter<'_, S> {
        self.states.iter()
    }

    /// Mutable references to two distinct agents.
    pub fn pair_mut(&mut self, u: usize, v: usize) -> (&mut S, &mut S) {
        assert_ne!(u, v, "an agent cannot interact with itself");
        if u < v {
            let (lo, hi) = self.states.split_at_mut(v);
            (&mut lo[u], &mut hi[0])
        } else {
            let (lo, hi) = self.states.split_at_mut(u);
            (&mut hi[0], &mut lo[v])
        }
    }

    pub fn outputs<P>(&self, protocol: &P) -> Vec<P::Output>
    where
        P: Protocol<State = S>,
    {
        self.states.iter().map(|s| protocol.output(s)).collect()
    }
}

impl<S> Index<usize> for Configuration<S> {
    type Output = S;

    fn index(&self, agent: usize) -> &S {
        &self.states[agent]
    }
}

impl<S> IndexMut<usize> for Configuration<S> {
    fn index_mut(&mut self, agent: usize) -> &mut S {
        &mut self.states[agent]
    }
}

/// Stream-splitting for trial sweeps: the seed of trial `index` under
/// `master` is the SplitMix64 finalizer applied to
/// `master + (index + 1) · 0x9E3779B97F4A7C15` (wrapping).
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The scheduler generator for a run seed.
pub fn scheduler_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws one ordered pair; each of the `2m` arcs has probability `1/(2m)`.
pub fn draw_pair<R: Rng + ?Sized>(graph: &Graph, rng: &mut R) -> (usize, usize) {
    let arcs = graph.arcs();
    arcs[rng.gen_range(0..arcs.len())]
}

/// Applies one interaction with `u` as initiator and `v` as responder.
pub fn apply_interaction<P: Protocol>(
    protocol: &P,
    graph: &Graph,
    config: &mut Configuration<P::State>,
    (u, v): (usize, usize),
) -> Result<(), EngineError> {
    if config.len() != graph.node_count() {
        return Err(EngineError::SizeMismatch {
            expected: graph.node_count(),
            got: config.len(),
        });
    }
    if !graph.has_edge(u, v) {
        return Err(EngineError::NotAnEdge { u, v });
    }
    let (a0, a1) = config.pair_mut(u, v);
    protocol.interact(a0, a1);
    Ok(())
}

/// Every agent's state drawn independently and uniformly over its domain.
pub fn sample_uniform_config<P: Protocol>(
    protocol: &P,
    n: usize,
    seed: u64,
) -> Configuration<P::State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Configuration::new((0..n).map(|_| protocol.sample_state(&mut rng)).collect())
}

/// The interaction sequence produced by the scheduler for a seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionTrace {
    pub seed: u64,
    pub pairs: Vec<(usize, usize)>,
}

impl InteractionTrace {
    /// The first `len` pairs a run with this seed would draw.
    pub fn generate(graph: &Graph, seed: u64, len: usize) -> Self {
        let mut rng = scheduler_rng(seed);
        InteractionTrace {
            seed,
            pairs: (0..len).map(|_| draw_pair(graph, &mut rng)).collect(),
        }
    }

    pub fn is_valid_for(&self, graph: &Graph) -> bool {
        self.pairs.iter().all(|&(u, v)| graph.has_edge(u, v))
    }
}

/// Positions of the `n` virtual tokens. Token `w` starts on agent `w` and
/// the two participants of every interaction swap the tokens they hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenTracker {
    position: Vec<usize>,
    held: Vec<usize>,
}

impl TokenTracker {
    pub fn new(n: usize) -> Self {
        TokenTracker {
            position: (0..n).collect(),
            held: (0..n).collect(),
        }
    }

    pub fn replay(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut tracker = Self::new(n);
        for &pair in pairs {
            tracker.apply(pair);
        }
        tracker
    }

    pub fn apply(&mut self, (u, v): (usize, usize)) {
        let (a, b) = (self.held[u], self.held[v]);
        self.position[a] = v;
        self.position[b] = u;
        self.held.swap(u, v);
    }

    /// Current host of token `w`.
    pub fn position(&self, w: usize) -> usize {
        self.position[w]
    }

    /// Token currently held by agent `v`.
    pub fn token_at(&self, v: usize) -> usize {
        self.held[v]
    }

    pub fn positions(&self) -> &[usize] {
        &self.position
    }
}

/// Host of token `w` after replaying `prefix`.
pub fn token_position(n: usize, prefix: &[(usize, usize)], w: usize) -> usize {
    TokenTracker::replay(n, prefix).position(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLimits {
    pub max_steps: u64,
    /// Steps simulated after the safe predicate first holds.
    pub closure_window: u64,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_steps: 100_000_000,
            closure_window: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    /// `None` when `max_steps` ran out first.
    pub steps_to_safe: Option<u64>,
    /// Whether the closure window saw no output change; `None` when the
    /// safe predicate was never reached.
    pub closure_ok: Option<bool>,
    pub closure_steps: u64,
    /// Interactions in the closure window that changed some output.
    pub output_changes: u64,
    pub params: Option<ProtocolParams>,
}

/// Runs the scheduler from `config` until `safe` holds or `max_steps`
/// interactions have been applied, then continues for the closure window,
/// counting interactions that change either participant's output.
///
/// Returns the result together with the final configuration.
pub fn run_until<P, F>(
    protocol: &P,
    graph: &Graph,
    mut config: Configuration<P::State>,
    seed: u64,
    limits: RunLimits,
    mut safe: F,
) -> (RunResult, Configuration<P::State>)
where
    P: Protocol,
    F: FnMut(&Configuration<P::State>) -> bool,
{
    assert_eq!(config.len(), graph.node_count());
    let mut rng = scheduler_rng(seed);
    let mut steps = 0u64;
    let mut reached = safe(&config);
    while !reached && steps < limits.max_steps {
        let (u, v) = draw_pair(graph, &mut rng);
        let (a0, a1) = config.pair_mut(u, v);
        protocol.interact(a0, a1);
        steps += 1;
        reached = safe(&config);
    }

    let mut result = RunResult {
        seed,
        steps_to_safe: None,
        closure_ok: None,
        closure_steps: 0,
        output_changes: 0,
        params: protocol.params().copied(),
    };
    if !reached {
        return (result, config);
    }
    result.steps_to_safe = Some(steps);

    let baseline = config.outputs(protocol);
    for _ in 0..limits.closure_window {
        let (u, v) = draw_pair(graph, &mut rng);
        let (a0, a1) = config.pair_mut(u, v);
        protocol.interact(a0, a1);
        if protocol.output(&config[u]) != baseline[u] || protocol.output(&config[v]) != baseline[v]
        {
            result.output_changes += 1;
        }
    }
    result.closure_steps = limits.closure_window;
    result.closure_ok = Some(result.output_changes == 0);
    (result, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;
    use std::vec;

    struct Identity;

    impl Protocol for Identity {
        type State = u8;
        type Output = u8;

        fn name(&self) -> &'static str {
            "identity"
        }

        fn interact(&self, _: &mut u8, _: &mut u8) {}

        fn output(&self, s: &u8) -> u8 {
            *s
        }

        fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
            rng.gen()
        }
    }

    /// Initiator copies the responder's value plus one.
    struct Copier;

    impl Protocol for Copier {
        type State = u8;
        type Output = u8;

        fn name(&self) -> &'static str {
            "copier"
        }

        fn interact(&self, a0: &mut u8, a1: &mut u8) {
            *a0 = a1.wrapping_add(1);
        }

        fn output(&self, s: &u8) -> u8 {
            *s
        }

        fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
            rng.gen()
        }
    }

    #[test]
    fn default_params() {
        let p = ProtocolParams::with_defaults(4, Some(3), 3);
        assert_eq!(p.tmax, 48);
        assert_eq!(p.pmax, 8 * 3 * 4 * 3 * 2);
        assert_eq!(p.emax, 64);
        let q = ProtocolParams::with_defaults(3, None, 1);
        assert_eq!((q.tmax, q.pmax, q.emax), (54, 0, 36));
        assert!(p.validate().is_ok() && q.validate().is_ok());
        assert_eq!([2, 3, 4, 5, 8, 9].map(ceil_log2), [1, 2, 2, 3, 3, 4]);
        let bad = ProtocolParams { tmax: 0, ..q };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn interaction_roles_and_locality() {
        let g = Graph::generate(GraphKind::Path, 3, None, 0).unwrap();
        let mut c = Configuration::new(vec![10u8, 20, 30]);
        apply_interaction(&Copier, &g, &mut c, (2, 1)).unwrap();
        assert_eq!(c.states(), &[10, 20, 21]);
        apply_interaction(&Copier, &g, &mut c, (0, 1)).unwrap();
        assert_eq!(c.states(), &[21, 20, 21]);
        assert_eq!(
            apply_interaction(&Copier, &g, &mut c, (0, 2)),
            Err(EngineError::NotAnEdge { u: 0, v: 2 })
        );
        let before = c.clone();
        apply_interaction(&Identity, &g, &mut c, (1, 0)).unwrap();
        assert_eq!(before, c);
    }

    #[test]
    fn draws_hit_only_arcs() {
        let g = Graph::generate(GraphKind::Path, 2, None, 0).unwrap();
        let mut rng = scheduler_rng(5);
        let mut counts = [0u32; 2];
        for _ in 0..1000 {
            match draw_pair(&g, &mut rng) {
                (0, 1) => counts[0] += 1,
                (1, 0) => counts[1] += 1,
                other => panic!("{other:?}"),
            }
        }
        assert!(counts.iter().all(|&c| c > 400));
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sample_uniform_config(&Identity, 8, 1);
        assert_eq!(a, sample_uniform_config(&Identity, 8, 1));
        assert_ne!(a, sample_uniform_config(&Identity, 8, 2));
    }

    #[test]
    fn token_swaps() {
        assert_eq!(TokenTracker::new(3).positions(), &[0, 1, 2]);
        let t = TokenTracker::replay(2, &[(0, 1)]);
        assert_eq!((t.position(0), t.position(1)), (1, 0));
        assert_eq!(token_position(3, &[(0, 1), (1, 2)], 0), 2);
        assert_eq!(token_position(3, &[(0, 1), (1, 2)], 1), 0);
        assert_eq!(token_position(3, &[(0, 1), (1, 2)], 2), 1);
    }

    #[test]
    fn run_limits() {
        let g = Graph::generate(GraphKind::Complete, 3, None, 0).unwrap();
        let c = Configuration::new(vec![1u8, 2, 3]);
        let limits = RunLimits {
            max_steps: 1,
            closure_window: 10,
        };
        let (r, _) = run_until(&Identity, &g, c.clone(), 3, limits, |_| false);
        assert_eq!((r.steps_to_safe, r.closure_ok), (None, None));
        let (r, end) = run_until(&Identity, &g, c.clone(), 3, limits, |_| true);
        assert_eq!((r.steps_to_safe, r.closure_ok), (Some(0), Some(true)));
        assert_eq!(end, c);
        let (r, _) = run_until(&Copier, &g, c, 3, limits, |_| true);
        assert_eq!(r.closure_ok, Some(false));
        assert!(r.output_changes > 0);
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| trial_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(trial_seed(7, 0), trial_seed(8, 0));
    }
}
