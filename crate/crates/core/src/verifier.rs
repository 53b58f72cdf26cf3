//! Exhaustive verification on tiny populations.
//!
//! A finite protocol on a fixed graph induces a deterministic successor
//! function per arc over the whole configuration space. Its bottom strongly
//! connected components are the final sets: closed, and mutually reachable
//! inside. Any execution under the random scheduler ends up in one of them
//! with probability 1, so a protocol is self-stabilizing on the graph iff
//! every final configuration is safe, i.e. satisfies the problem's predicate
//! and no interaction inside its final set changes an output.
//!
//! Configurations are packed into a single integer: agent `i`'s state index
//! (from [`FiniteProtocol::encode`]) is digit `i` in base `state_count`,
//! agent 0 least significant.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Configuration, FiniteProtocol, Protocol};
use crate::graph::Graph;
use crate::oracles::{check_spec, SpecOutputs};
use crate::strawman::DegreeProtocol;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{configurations} configurations exceed the budget of {budget}")]
    TooLarge { configurations: u128, budget: u64 },
    #[error("the smaller graph must be a proper subgraph on the same agents")]
    NotProperSubgraph,
    #[error("no final set of the larger graph is safe for degree recognition")]
    NoSafeConfigOnSuper,
}

/// Total configurations: `state_count ^ n`, saturating.
pub fn configuration_count<P: FiniteProtocol>(protocol: &P, n: usize) -> u128 {
    let per_agent = protocol.state_count();
    (0..n).fold(1u128, |acc, _| acc.saturating_mul(per_agent))
}

/// Packs and unpacks whole configurations.
pub struct ConfigCodec<'p, P: FiniteProtocol> {
    protocol: &'p P,
    radix: u64,
    powers: Vec<u64>,
    table: Vec<P::State>,
    total: u64,
}

impl<'p, P: FiniteProtocol> ConfigCodec<'p, P> {
    /// Fails when the configuration space is larger than `budget` (or than
    /// `u32::MAX`, the width of stored successor keys).
    pub fn new(protocol: &'p P, n: usize, budget: u64) -> Result<Self, VerifyError> {
        let configurations = configuration_count(protocol, n);
        if configurations > u128::from(budget.min(u64::from(u32::MAX))) {
            return Err(VerifyError::TooLarge {
                configurations,
                budget,
            });
        }
        let radix = protocol.state_count() as u64;
        let powers = (0..n).map(|i| radix.pow(i as u32)).collect();
        let table = (0..radix).map(|k| protocol.decode(k)).collect();
        Ok(ConfigCodec {
            protocol,
            radix,
            powers,
            table,
            total: configurations as u64,
        })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn agents(&self) -> usize {
        self.powers.len()
    }

    pub fn digits(&self, mut key: u64) -> Vec<u64> {
        self.powers
            .iter()
            .map(|_| {
                let d = key % self.radix;
                key /= self.radix;
                d
            })
            .collect()
    }

    pub fn decode(&self, key: u64) -> Configuration<P::State> {
        Configuration::new(
            self.digits(key)
                .into_iter()
                .map(|d| self.table[d as usize].clone())
                .collect(),
        )
    }

    pub fn encode(&self, config: &Configuration<P::State>) -> u64 {
        config
            .iter()
            .zip(&self.powers)
            .map(|(s, p)| self.protocol.encode(s) * p)
            .sum()
    }

    /// The configuration after `(u, v)` interacts, given the digits of
    /// `key`.
    pub fn successor(&self, key: u64, digits: &[u64], (u, v): (usize, usize)) -> u64 {
        let (du, dv) = (digits[u], digits[v]);
        let mut a0 = self.table[du as usize].clone();
        let mut a1 = self.table[dv as usize].clone();
        self.protocol.interact(&mut a0, &mut a1);
        let (eu, ev) = (self.protocol.encode(&a0), self.protocol.encode(&a1));
        key - du * self.powers[u] - dv * self.powers[v] + eu * self.powers[u] + ev * self.powers[v]
    }
}

/// The complete successor relation: for every configuration, one successor
/// per arc of the population graph, in [`Graph::arcs`] order.
#[derive(Debug, Clone)]
pub struct TransitionGraph {
    arcs: Vec<(usize, usize)>,
    successors: Vec<u32>,
    total: u64,
}

impl TransitionGraph {
    pub fn config_count(&self) -> u64 {
        self.total
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn successors(&self, key: u32) -> &[u32] {
        let k = self.arcs.len();
        &self.successors[key as usize * k..(key as usize + 1) * k]
    }
}

pub fn build_transition_graph<P: FiniteProtocol>(
    protocol: &P,
    graph: &Graph,
    budget: u64,
) -> Result<TransitionGraph, VerifyError> {
    let codec = ConfigCodec::new(protocol, graph.node_count(), budget)?;
    Ok(build_with_codec(&codec, graph))
}

fn build_with_codec<P: FiniteProtocol>(
    codec: &ConfigCodec<'_, P>,
    graph: &Graph,
) -> TransitionGraph {
    let arcs = graph.arcs().to_vec();
    let mut successors = Vec::with_capacity(codec.total() as usize * arcs.len());
    let mut digits = vec![0u64; codec.agents()];
    for key in 0..codec.total() {
        for &arc in &arcs {
            successors.push(codec.successor(key, &digits, arc) as u32);
        }
        // odometer increment
        for d in digits.iter_mut() {
            *d += 1;
            if *d < codec.radix {
                break;
            }
            *d = 0;
        }
    }
    TransitionGraph {
        arcs,
        successors,
        total: codec.total(),
    }
}

/// Strongly connected component id of every configuration (iterative
/// Tarjan), with components numbered in completion order.
fn scc_ids(tg: &TransitionGraph) -> (Vec<u32>, u32) {
    const UNVISITED: u32 = u32::MAX;
    let total = tg.config_count() as usize;
    let mut index = vec![UNVISITED; total];
    let mut low = vec![0u32; total];
    let mut comp = vec![UNVISITED; total];
    let mut on_stack = vec![false; total];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let (mut counter, mut components) = (0u32, 0u32);

    for root in 0..total as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        call.push((root, 0));

        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            let succ = tg.successors(v);
            if frame.1 < succ.len() {
                let w = succ[frame.1];
                frame.1 += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = counter;
                    low[w as usize] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    comp[w as usize] = components;
                    if w == v {
                        break;
                    }
                }
                components += 1;
            }
        }
    }
    (comp, components)
}

/// Bottom strongly connected components, each sorted, ordered by their
/// smallest member.
pub fn final_sets(tg: &TransitionGraph) -> Vec<Vec<u32>> {
    let (comp, count) = scc_ids(tg);
    let mut bottom = vec![true; count as usize];
    for key in 0..tg.config_count() as u32 {
        let c = comp[key as usize];
        if tg.successors(key).iter().any(|&w| comp[w as usize] != c) {
            bottom[c as usize] = false;
        }
    }
    let mut slot = vec![usize::MAX; count as usize];
    let mut sets: Vec<Vec<u32>> = Vec::new();
    for key in 0..tg.config_count() as u32 {
        let c = comp[key as usize] as usize;
        if !bottom[c] {
            continue;
        }
        if slot[c] == usize::MAX {
            slot[c] = sets.len();
            sets.push(Vec::new());
        }
        sets[slot[c]].push(key);
    }
    sets
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Replaying `pairs` from `start` changes `agent`'s output although
    /// `start` is safe (or final) for the graph the pairs come from.
    OutputChange,
    /// `start` is a final configuration that violates the safe predicate.
    UnsafeFinal,
    /// No sequence over the smaller graph changes any output from `start`,
    /// yet `agent`'s output is wrong for the smaller graph.
    StuckWrong,
}

/// A replayable counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness<S, O> {
    pub kind: WitnessKind,
    pub start: Configuration<S>,
    pub pairs: Vec<(usize, usize)>,
    pub agent: usize,
    pub before: O,
    pub after: O,
}

impl<S: Clone, O: PartialEq> Witness<S, O> {
    /// Re-simulates the pairs on `graph` and checks the recorded outputs.
    pub fn replays<P>(&self, protocol: &P, graph: &Graph) -> bool
    where
        P: Protocol<State = S, Output = O>,
    {
        if self.start.len() != graph.node_count() || self.agent >= self.start.len() {
            return false;
        }
        if protocol.output(&self.start[self.agent]) != self.before {
            return false;
        }
        let mut config = self.start.clone();
        for &(u, v) in &self.pairs {
            if !graph.has_edge(u, v) {
                return false;
            }
            let (a0, a1) = config.pair_mut(u, v);
            protocol.interact(a0, a1);
        }
        protocol.output(&config[self.agent]) == self.after
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub budget: u64,
    /// Also count safe configurations outside every final set.
    pub count_transient_safe: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: DEFAULT_BUDGET,
            count_transient_safe: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport<S, O> {
    pub configurations: u64,
    pub final_sets: usize,
    pub final_configurations: u64,
    pub transient_safe: Option<u64>,
    /// `None` when every final configuration is safe.
    pub witness: Option<Witness<S, O>>,
}

impl<S, O> VerificationReport<S, O> {
    pub fn is_verified(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks that every configuration of every final set satisfies `safe` and
/// that outputs are constant within each final set.
pub fn verify_self_stabilizing<P, F>(
    protocol: &P,
    graph: &Graph,
    options: VerifyOptions,
    mut safe: F,
) -> Result<VerificationReport<P::State, P::Output>, VerifyError>
where
    P: FiniteProtocol,
    F: FnMut(&Configuration<P::State>) -> bool,
{
    let codec = ConfigCodec::new(protocol, graph.node_count(), options.budget)?;
    let tg = build_with_codec(&codec, graph);
    let sets = final_sets(&tg);
    let mut report = VerificationReport {
        configurations: tg.config_count(),
        final_sets: sets.len(),
        final_configurations: sets.iter().map(|s| s.len() as u64).sum(),
        transient_safe: None,
        witness: None,
    };

    'sets: for set in &sets {
        let reference = codec.decode(u64::from(set[0])).outputs(protocol);
        for &key in set {
            let config = codec.decode(u64::from(key));
            if !safe(&config) {
                report.witness = Some(Witness {
                    kind: WitnessKind::UnsafeFinal,
                    agent: 0,
                    before: protocol.output(&config[0]),
                    after: protocol.output(&config[0]),
                    start: config,
                    pairs: Vec::new(),
                });
                break 'sets;
            }
            let outputs = config.outputs(protocol);
            if outputs == reference {
                continue;
            }
            // Outputs differ inside a strongly connected set, so some arc
            // inside it changes an output.
            if let Some(w) = output_changing_arc(&codec, &tg, set, protocol) {
                report.witness = Some(w);
                break 'sets;
            }
        }
    }

    if options.count_transient_safe {
        let mut in_final = vec![false; tg.config_count() as usize];
        for &key in sets.iter().flatten() {
            in_final[key as usize] = true;
        }
        let count = (0..tg.config_count())
            .filter(|&k| !in_final[k as usize] && safe(&codec.decode(k)))
            .count();
        report.transient_safe = Some(count as u64);
    }
    Ok(report)
}

fn output_changing_arc<P: FiniteProtocol>(
    codec: &ConfigCodec<'_, P>,
    tg: &TransitionGraph,
    set: &[u32],
    protocol: &P,
) -> Option<Witness<P::State, P::Output>> {
    for &key in set {
        let config = codec.decode(u64::from(key));
        for (&(u, v), &next) in tg.arcs().iter().zip(tg.successors(key)) {
            let after = codec.decode(u64::from(next));
            for agent in [u, v] {
                let (before_out, after_out) = (
                    protocol.output(&config[agent]),
                    protocol.output(&after[agent]),
                );
                if before_out != after_out {
                    return Some(Witness {
                        kind: WitnessKind::OutputChange,
                        start: config,
                        pairs: vec![(u, v)],
                        agent,
                        before: before_out,
                        after: after_out,
                    });
                }
            }
        }
    }
    None
}

/// Searches for the degree-recognition impossibility construction.
///
/// Picks the first final set of `g_super` whose configurations all output
/// the correct degrees and whose outputs never change, takes its smallest
/// configuration `S`, and explores every configuration reachable from `S`
/// using only interactions of `g_sub`. Those interactions are also
/// interactions of `g_super`, so any output change found is a safety
/// violation on `g_super` ([`WitnessKind::OutputChange`]). If none exists,
/// outputs are frozen from `S` on `g_sub`, where some agent's degree differs,
/// so `g_sub` never reaches a correct configuration from `S`
/// ([`WitnessKind::StuckWrong`]). Either way the protocol is not
/// self-stabilizing for degree recognition on both graphs.
pub fn impossibility_witness<P>(
    protocol: &P,
    g_sub: &Graph,
    g_super: &Graph,
    budget: u64,
) -> Result<Witness<P::State, P::Output>, VerifyError>
where
    P: FiniteProtocol + DegreeProtocol,
{
    if !g_sub.is_proper_subgraph_of(g_super) {
        return Err(VerifyError::NotProperSubgraph);
    }
    let codec = ConfigCodec::new(protocol, g_super.node_count(), budget)?;
    let tg = build_with_codec(&codec, g_super);
    let degrees_of = |config: &Configuration<P::State>| -> Vec<usize> {
        config
            .iter()
            .map(|s| protocol.degree(&protocol.output(s)))
            .collect()
    };

    let safe_set = final_sets(&tg).into_iter().find(|set| {
        let reference = codec.decode(u64::from(set[0])).outputs(protocol);
        set.iter().all(|&key| {
            let config = codec.decode(u64::from(key));
            check_spec(SpecOutputs::Degree(&degrees_of(&config)), g_super)
                && config.outputs(protocol) == reference
        })
    });
    let start_key = u64::from(safe_set.ok_or(VerifyError::NoSafeConfigOnSuper)?[0]);
    let start = codec.decode(start_key);
    let start_outputs = start.outputs(protocol);

    // Breadth-first over g_sub, remembering (parent, arc) for path recovery.
    type Step = (u64, (usize, usize));
    let mut parent: BTreeMap<u64, Option<Step>> = BTreeMap::new();
    parent.insert(start_key, None);
    let mut queue = VecDeque::from([start_key]);
    while let Some(key) = queue.pop_front() {
        let digits = codec.digits(key);
        for &arc in g_sub.arcs() {
            let next = codec.successor(key, &digits, arc);
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next, Some((key, arc)));
            let config = codec.decode(next);
            let changed =
                (0..config.len()).find(|&a| protocol.output(&config[a]) != start_outputs[a]);
            if let Some(agent) = changed {
                let mut pairs = Vec::new();
                let mut cursor = next;
                while let Some(Some((prev, arc))) = parent.get(&cursor) {
                    pairs.push(*arc);
                    cursor = *prev;
                }
                pairs.reverse();
                return Ok(Witness {
                    kind: WitnessKind::OutputChange,
                    before: start_outputs[agent].clone(),
                    after: protocol.output(&config[agent]),
                    start,
                    pairs,
                    agent,
                });
            }
            queue.push_back(next);
        }
    }

    let agent = (0..g_sub.node_count())
        .find(|&v| g_sub.degree(v) != g_super.degree(v))
        .expect("proper subgraph changes some degree");
    Ok(Witness {
        kind: WitnessKind::StuckWrong,
        before: start_outputs[agent].clone(),
        after: start_outputs[agent].clone(),
        start,
        pairs: Vec::new(),
        agent,
    })
}
