//! Randomized self-stabilization trials.
//!
//! Trial `i` of an experiment with master seed `s` uses the run seed
//! `r = trial_seed(s, i)`. The initial configuration is drawn uniformly with
//! seed `trial_seed(r, 0)` and the scheduler is seeded with `r`, so a record's
//! `seed` is enough to replay it with [`run_trial`].

use poplab_core::engine::EngineError;
use poplab_core::oracles::{
    check_spec, classify_rank_config, neighbor_safe, SafeLevel, SpecOutputs,
};
use poplab_core::{
    run_until, sample_uniform_config, trial_seed, Graph, PNeighbor, PRank, ProtocolParams,
    RunLimits,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::record::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RunProtocol {
    Prank,
    Pneighbor,
}

impl RunProtocol {
    pub fn name(self) -> &'static str {
        match self {
            RunProtocol::Prank => "prank",
            RunProtocol::Pneighbor => "pneighbor",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParamOverrides {
    pub tmax: Option<u32>,
    pub pmax: Option<u32>,
    pub emax: Option<u32>,
    /// Give the ranking protocol the exact edge count too.
    pub know_m: bool,
}

impl ParamOverrides {
    pub fn apply(&self, mut params: ProtocolParams) -> ProtocolParams {
        params.tmax = self.tmax.unwrap_or(params.tmax);
        params.pmax = self.pmax.unwrap_or(params.pmax);
        params.emax = self.emax.unwrap_or(params.emax);
        params
    }
}

/// Default parameters for `graph`, with `overrides` applied and validated.
pub fn resolve_params(
    protocol: RunProtocol,
    graph: &Graph,
    overrides: &ParamOverrides,
) -> Result<ProtocolParams, EngineError> {
    let know_m = protocol == RunProtocol::Pneighbor || overrides.know_m;
    let params = overrides.apply(ProtocolParams::for_graph(graph, know_m));
    params.validate()?;
    Ok(params)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub record: RunRecord,
    /// Interactions in the closure window that changed an output.
    pub output_changes: u64,
    /// Whether the outputs at the end of the run solve the problem on the
    /// graph (ranking, or labeled adjacency).
    pub outputs_correct: bool,
    /// Serialized size of the largest agent state at the end of the run.
    pub max_state_bytes: usize,
}

fn largest_state<S: Serialize>(states: &[S]) -> usize {
    states
        .iter()
        .map(|s| serde_json::to_vec(s).map_or(0, |v| v.len()))
        .max()
        .unwrap_or(0)
}

pub fn run_trial(
    protocol: RunProtocol,
    graph: &Graph,
    params: &ProtocolParams,
    seed: u64,
    limits: RunLimits,
) -> Result<TrialOutcome, EngineError> {
    let n = graph.node_count();
    let init_seed = trial_seed(seed, 0);
    let (result, outputs_correct, max_state_bytes) = match protocol {
        RunProtocol::Prank => {
            let p = PRank::new(*params)?;
            let start = sample_uniform_config(&p, n, init_seed);
            let (result, end) = run_until(&p, graph, start, seed, limits, |c| {
                classify_rank_config(c.states(), n) == SafeLevel::SRank
            });
            let correct = check_spec(SpecOutputs::Ranking(&end.outputs(&p)), graph);
            (result, correct, largest_state(end.states()))
        }
        RunProtocol::Pneighbor => {
            let p = PNeighbor::new(*params)?;
            let start = sample_uniform_config(&p, n, init_seed);
            let (result, end) = run_until(&p, graph, start, seed, limits, |c| {
                neighbor_safe(c.states(), graph, params)
            });
            let correct = check_spec(SpecOutputs::Neighbor(&end.outputs(&p)), graph);
            (result, correct, largest_state(end.states()))
        }
    };
    Ok(TrialOutcome {
        record: RunRecord {
            protocol: protocol.name().into(),
            n,
            m: graph.edge_count(),
            d: graph.diameter(),
            seed,
            tmax: params.tmax,
            pmax: params.pmax,
            emax: params.emax,
            steps_to_safe: result.steps_to_safe,
            closure_ok: result.closure_ok,
        },
        output_changes: result.output_changes,
        outputs_correct,
        max_state_bytes,
    })
}

/// Runs `trials` independent trials in parallel; results are in trial order.
pub fn run_trials(
    protocol: RunProtocol,
    graph: &Graph,
    params: &ProtocolParams,
    master_seed: u64,
    trials: u64,
    limits: RunLimits,
) -> Result<Vec<TrialOutcome>, EngineError> {
    (0..trials)
        .into_par_iter()
        .map(|i| run_trial(protocol, graph, params, trial_seed(master_seed, i), limits))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use poplab_core::GraphKind;

    #[test]
    fn overrides_apply_and_validate() {
        let g = Graph::generate(GraphKind::Path, 4, None, 0).unwrap();
        let p = resolve_params(RunProtocol::Prank, &g, &ParamOverrides::default()).unwrap();
        assert_eq!((p.m_known, p.tmax), (None, 128));
        let p = resolve_params(
            RunProtocol::Prank,
            &g,
            &ParamOverrides {
                know_m: true,
                tmax: Some(5),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((p.m_known, p.tmax), (Some(3), 5));
        let zero = ParamOverrides {
            pmax: Some(0),
            ..Default::default()
        };
        assert!(resolve_params(RunProtocol::Pneighbor, &g, &zero).is_err());
    }

    #[test]
    fn trials_replay_from_their_seed() {
        let g = Graph::generate(GraphKind::Cycle, 5, None, 0).unwrap();
        let limits = RunLimits {
            max_steps: 10_000_000,
            closure_window: 1000,
        };
        for protocol in [RunProtocol::Prank, RunProtocol::Pneighbor] {
            let params = resolve_params(protocol, &g, &ParamOverrides::default()).unwrap();
            let batch = run_trials(protocol, &g, &params, 11, 4, limits).unwrap();
            for (i, outcome) in batch.iter().enumerate() {
                assert_eq!(outcome.record.seed, trial_seed(11, i as u64));
                assert!(outcome.record.passed() && outcome.outputs_correct);
                let again = run_trial(protocol, &g, &params, outcome.record.seed, limits).unwrap();
                assert_eq!(&again, outcome);
            }
        }
    }
}
