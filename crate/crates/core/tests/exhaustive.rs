use poplab_core::oracles::{check_spec, classify_rank_config, SafeLevel, SpecOutputs};
use poplab_core::verifier::{
    build_transition_graph, final_sets, verify_self_stabilizing, VerifyOptions, DEFAULT_BUDGET,
};
use poplab_core::{Graph, GraphKind, PRank, ProtocolParams};

fn prank(n: usize, tmax: u32) -> PRank {
    PRank::new(ProtocolParams {
        n,
        m_known: None,
        tmax,
        pmax: 0,
        emax: 0,
    })
    .unwrap()
}

fn small_graphs() -> Vec<Graph> {
    vec![
        Graph::generate(GraphKind::Complete, 2, None, 0).unwrap(),
        Graph::generate(GraphKind::Path, 3, None, 0).unwrap(),
        Graph::generate(GraphKind::Complete, 3, None, 0).unwrap(),
        // P3 centered on agent 0
        Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap(),
    ]
}

#[test]
fn prank_is_self_stabilizing_for_n_up_to_3_and_tmax_up_to_2() {
    for g in small_graphs() {
        let n = g.node_count();
        for tmax in 1..=2 {
            let p = prank(n, tmax);
            let report = verify_self_stabilizing(&p, &g, VerifyOptions::default(), |c| {
                classify_rank_config(c.states(), n) == SafeLevel::SRank
                    && check_spec(SpecOutputs::Ranking(&c.outputs(&p)), &g)
            })
            .unwrap();
            assert!(
                report.is_verified(),
                "n={n} m={} tmax={tmax}: {:?}",
                g.edge_count(),
                report.witness
            );
            assert!(report.final_sets > 0);
        }
    }
}

#[test]
fn final_sets_are_closed_and_disjoint() {
    let g = Graph::generate(GraphKind::Path, 3, None, 0).unwrap();
    let p = prank(3, 1);
    let tg = build_transition_graph(&p, &g, DEFAULT_BUDGET).unwrap();
    let sets = final_sets(&tg);
    let mut owner = vec![usize::MAX; tg.config_count() as usize];
    for (i, set) in sets.iter().enumerate() {
        for &key in set {
            assert_eq!(owner[key as usize], usize::MAX, "final sets overlap");
            owner[key as usize] = i;
        }
    }
    for (i, set) in sets.iter().enumerate() {
        for &key in set {
            for &next in tg.successors(key) {
                assert_eq!(owner[next as usize], i, "final set {i} is not closed");
            }
        }
    }
}
