//! Exhaustive verification front end: picks the protocol, its parameters
//! and its safe predicate, and renders reports as JSON.

use poplab_core::engine::EngineError;
use poplab_core::oracles::{
    check_spec, classify_rank_config, neighbor_safe, SafeLevel, SpecOutputs,
};
use poplab_core::strawman::{DegreeProtocol, FrozenDegree, GreedyDegree};
use poplab_core::verifier::{
    impossibility_witness, verify_self_stabilizing, VerificationReport, VerifyError, VerifyOptions,
};
use poplab_core::{FiniteProtocol, Graph, PNeighbor, PRank, ProtocolParams};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::experiment::ParamOverrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VerifyProtocol {
    Prank,
    Pneighbor,
    Greedydegree,
    Frozendegree,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Params(#[from] EngineError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{0} has no degree output")]
    NotDegreeProtocol(&'static str),
    #[error("protocol supports at most {max} agents, got {n}")]
    TooManyAgents { n: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    /// `true` when no witness was found.
    pub verified: bool,
    pub report: Value,
}

/// Ranking parameters for model checking: `tmax = 1` unless overridden.
pub fn prank_verify_params(
    n: usize,
    overrides: &ParamOverrides,
) -> Result<ProtocolParams, EngineError> {
    let params = ProtocolParams {
        n,
        m_known: None,
        tmax: overrides.tmax.unwrap_or(1),
        pmax: 0,
        emax: 0,
    };
    params.validate()?;
    Ok(params)
}

fn pneighbor_params(
    graph: &Graph,
    overrides: &ParamOverrides,
) -> Result<ProtocolParams, EngineError> {
    let params = overrides.apply(ProtocolParams::for_graph(graph, true));
    params.validate()?;
    Ok(params)
}

fn check_size(n: usize) -> Result<(), CheckError> {
    let max = poplab_core::LabelSet::CAPACITY;
    if n > max {
        return Err(CheckError::TooManyAgents { n, max });
    }
    Ok(())
}

fn render<S: Serialize, O: Serialize>(
    protocol: &str,
    report: &VerificationReport<S, O>,
) -> CheckOutcome {
    CheckOutcome {
        verified: report.is_verified(),
        report: json!({
            "protocol": protocol,
            "configurations": report.configurations,
            "final_sets": report.final_sets,
            "final_configurations": report.final_configurations,
            "transient_safe": report.transient_safe,
            "verified": report.is_verified(),
            "witness": report.witness,
        }),
    }
}

pub fn verify(
    protocol: VerifyProtocol,
    graph: &Graph,
    overrides: &ParamOverrides,
    options: VerifyOptions,
) -> Result<CheckOutcome, CheckError> {
    let n = graph.node_count();
    check_size(n)?;
    Ok(match protocol {
        VerifyProtocol::Prank => {
            let p = PRank::new(prank_verify_params(n, overrides)?)?;
            let report = verify_self_stabilizing(&p, graph, options, |c| {
                classify_rank_config(c.states(), n) == SafeLevel::SRank
                    && check_spec(SpecOutputs::Ranking(&c.outputs(&p)), graph)
            })?;
            render("prank", &report)
        }
        VerifyProtocol::Pneighbor => {
            let params = pneighbor_params(graph, overrides)?;
            let p = PNeighbor::new(params)?;
            let report = verify_self_stabilizing(&p, graph, options, |c| {
                neighbor_safe(c.states(), graph, &params)
            })?;
            render("pneighbor", &report)
        }
        VerifyProtocol::Greedydegree => {
            let p = GreedyDegree::new(n);
            let report = verify_self_stabilizing(&p, graph, options, |c| {
                check_spec(SpecOutputs::Degree(&c.outputs(&p)), graph)
            })?;
            render("greedydegree", &report)
        }
        VerifyProtocol::Frozendegree => {
            let p = FrozenDegree::new(n);
            let report = verify_self_stabilizing(&p, graph, options, |c| {
                check_spec(SpecOutputs::Degree(&c.outputs(&p)), graph)
            })?;
            render("frozendegree", &report)
        }
    })
}

fn impossibility_report<P>(
    protocol: &P,
    g_sub: &Graph,
    g_super: &Graph,
    budget: u64,
) -> Result<CheckOutcome, CheckError>
where
    P: FiniteProtocol + DegreeProtocol,
    P::State: Serialize,
    P::Output: Serialize,
{
    let name = protocol.name();
    match impossibility_witness(protocol, g_sub, g_super, budget) {
        Ok(witness) => {
            let replay_graph = match witness.kind {
                poplab_core::verifier::WitnessKind::OutputChange => g_super,
                _ => g_sub,
            };
            Ok(CheckOutcome {
                verified: false,
                report: json!({
                    "protocol": name,
                    "verdict": "witness",
                    "replays": witness.replays(protocol, replay_graph),
                    "witness": witness,
                }),
            })
        }
        Err(VerifyError::NoSafeConfigOnSuper) => Ok(CheckOutcome {
            verified: false,
            report: json!({ "protocol": name, "verdict": "no_safe_config_on_super", "witness": null }),
        }),
        Err(e) => Err(e.into()),
    }
}

/// Searches for a degree-recognition counterexample on `g_sub ⊂ g_super`.
/// A found witness (or a protocol that is wrong on `g_super` outright) is
/// reported with `verified = false`.
pub fn impossibility(
    protocol: VerifyProtocol,
    g_sub: &Graph,
    g_super: &Graph,
    overrides: &ParamOverrides,
    budget: u64,
) -> Result<CheckOutcome, CheckError> {
    let n = g_super.node_count();
    check_size(n)?;
    match protocol {
        VerifyProtocol::Prank => Err(CheckError::NotDegreeProtocol("prank")),
        VerifyProtocol::Pneighbor => {
            let p = PNeighbor::new(pneighbor_params(g_super, overrides)?)?;
            impossibility_report(&p, g_sub, g_super, budget)
        }
        VerifyProtocol::Greedydegree => {
            impossibility_report(&GreedyDegree::new(n), g_sub, g_super, budget)
        }
        VerifyProtocol::Frozendegree => {
            impossibility_report(&FrozenDegree::new(n), g_sub, g_super, budget)
        }
    }
}
