//! Instance generators: the linear-cost anarchy family, a certified
//! multiple-equilibrium witness, seeded random games, and a layered
//! expansion-chain family built around a single high-congestion edge.

use crate::analysis::{enumerate_nash, optimal_social_cost};
use crate::game::{player_cost, CostModel, GameInstance, Routing};
use crate::graph::{enumerate_simple_paths, Graph, NodeId, Path};
use crate::ExactCost;
use num_bigint::BigUint;
use rand::Rng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("instance too large: {edges} edges exceed cap {cap}")]
    TooLarge { edges: u64, cap: u64 },
    #[error("construction failed its certificate: {0}")]
    CertificateFailed(String),
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
}

/// Hard ceiling on generated instance size.
pub const EDGE_CAP: u64 = 100_000;

/// Parameter block for [`generate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    Fig2 { k: u32 },
    MultiNashWitness,
    Random { nodes: u32, edges: u32, players: u32, max_len: u32, seed: u64 },
    ExpansionChain { c_hat: u32, l_star: u32 },
}

impl std::fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeneratorSpec::Fig2 { k } => write!(f, "fig2 k={k}"),
            GeneratorSpec::MultiNashWitness => write!(f, "multi-nash"),
            GeneratorSpec::Random { nodes, edges, players, max_len, seed } => write!(
                f,
                "random nodes={nodes} edges={edges} players={players} max_len={max_len} seed={seed}"
            ),
            GeneratorSpec::ExpansionChain { c_hat, l_star } => {
                write!(f, "expansion-chain c_hat={c_hat} l_star={l_star}")
            }
        }
    }
}

/// A generated instance plus, when the construction pins one down, the
/// routing it is built around.
#[derive(Debug, Clone)]
pub struct Generated {
    pub name: String,
    pub spec: GeneratorSpec,
    pub instance: GameInstance,
    pub intended: Option<Routing>,
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated, GeneratorError> {
    match *spec {
        GeneratorSpec::Fig2 { k } => gen_fig2(k),
        GeneratorSpec::MultiNashWitness => gen_multi_nash_witness(),
        GeneratorSpec::Random { nodes, edges, players, max_len, seed } => {
            gen_random(nodes, edges, players, max_len, seed)
        }
        GeneratorSpec::ExpansionChain { c_hat, l_star } => {
            gen_expansion_chain(c_hat, l_star).map(|(generated, _)| generated)
        }
    }
}

/// `k` identical players between two hubs joined by a direct edge and
/// `k - 1` disjoint detours of length `k` each. Under the linear-sum
/// model everyone crowding the direct edge is an equilibrium with social
/// cost `k`, while spreading out achieves 1.
pub fn gen_fig2(k: u32) -> Result<Generated, GeneratorError> {
    if k < 2 {
        return Err(GeneratorError::InvalidParams(format!("fig2 needs k >= 2, got {k}")));
    }
    let k = k as usize;
    let hub_u: NodeId = 0;
    let hub_v: NodeId = 1;
    let mut edges: Vec<(NodeId, NodeId)> = vec![(hub_u, hub_v)];
    let mut strategies: Vec<Path> = vec![Path::new(vec![0], hub_u, hub_v)];
    let mut next_node: NodeId = 2;
    for _detour in 0..(k - 1) {
        let mut prev = hub_u;
        let mut detour_edges = Vec::with_capacity(k);
        for step in 0..k {
            let next = if step + 1 == k { hub_v } else { next_node };
            if step + 1 != k {
                next_node += 1;
            }
            detour_edges.push(edges.len());
            edges.push((prev, next));
            prev = next;
        }
        strategies.push(Path::new(detour_edges, hub_u, hub_v));
    }
    let graph = Graph::undirected(next_node, edges)?;
    let players = (0..k).map(|_| (hub_u, hub_v, strategies.clone())).collect();
    let instance = GameInstance::new(graph, players)?;
    Ok(Generated {
        name: format!("fig2-k{k}"),
        spec: GeneratorSpec::Fig2 { k: k as u32 },
        instance,
        intended: Some(Routing::all_zero(k)),
    })
}

/// Three players on a ten-node graph admitting (at least) two exponential
/// Nash-routings: one with social cost 2 and player costs (4, 8, 6), one
/// with social cost 1 and player costs (2, 6, 6). The construction is
/// re-certified on every call and rejected if the certificate fails.
pub fn gen_multi_nash_witness() -> Result<Generated, GeneratorError> {
    // nodes: 0..=9; players 0: 0->1, 1: 0->3, 2: 1->4
    let edges: Vec<(NodeId, NodeId)> = vec![
        (0, 1), // 0: the contended hub edge
        (1, 2), // 1
        (0, 7), // 2: four-edge corridor 0-7-8-9-3
        (7, 8), // 3
        (8, 9), // 4
        (9, 3), // 5
        (0, 4), // 6: three-edge corridor 0-4-5-3
        (4, 5), // 7
        (5, 3), // 8
        (2, 6), // 9: side corridor 2-6-4
        (6, 4), // 10
    ];
    let graph = Graph::undirected(10, edges)?;
    let endpoints = [(0, 1), (0, 3), (1, 4)];
    let mut players = Vec::new();
    for &(u, v) in &endpoints {
        let paths = enumerate_simple_paths(&graph, u, v, graph.node_count() - 1)?;
        players.push((u, v, paths));
    }
    let instance = GameInstance::new(graph, players)?;

    let intended = certify_multi_nash(&instance)?;
    Ok(Generated {
        name: "multi-nash".to_string(),
        spec: GeneratorSpec::MultiNashWitness,
        instance,
        intended: Some(intended),
    })
}

/// The witness certificate: both advertised equilibria present with the
/// exact cost vectors, anarchy ratio 2, stability ratio 1.
fn certify_multi_nash(instance: &GameInstance) -> Result<Routing, GeneratorError> {
    let cap = 10_000;
    let nash = enumerate_nash::<ExactCost>(instance, CostModel::Exponential, cap)?;
    let cost_vector = |routing: &Routing| -> Result<Vec<BigUint>, GeneratorError> {
        (0..instance.player_count())
            .map(|i| {
                player_cost::<ExactCost>(instance, routing, i, CostModel::Exponential)
                    .map_err(Into::into)
            })
            .collect()
    };
    let want_high: Vec<BigUint> = [4u32, 8, 6].iter().map(|&c| BigUint::from(c)).collect();
    let want_low: Vec<BigUint> = [2u32, 6, 6].iter().map(|&c| BigUint::from(c)).collect();

    let mut high: Option<Routing> = None;
    let mut low = false;
    for (routing, sc) in &nash {
        if *sc == 2 && high.is_none() && cost_vector(routing)? == want_high {
            high = Some(routing.clone());
        }
        if *sc == 1 && !low && cost_vector(routing)? == want_low {
            low = true;
        }
    }
    let Some(high) = high else {
        return Err(GeneratorError::CertificateFailed(
            "no equilibrium with social cost 2 and costs (4, 8, 6)".into(),
        ));
    };
    if !low {
        return Err(GeneratorError::CertificateFailed(
            "no equilibrium with social cost 1 and costs (2, 6, 6)".into(),
        ));
    }
    let worst = nash.iter().map(|&(_, sc)| sc).max().unwrap();
    let best = nash.iter().map(|&(_, sc)| sc).min().unwrap();
    let (optimum, _) = optimal_social_cost(instance, cap)?;
    if (worst, best, optimum) != (2, 1, 1) {
        return Err(GeneratorError::CertificateFailed(format!(
            "expected anarchy 2 and stability 1, got worst={worst} best={best} optimum={optimum}"
        )));
    }
    Ok(high)
}

/// Seeded random connected instance: a uniform random spanning tree
/// backbone plus extra edges, random distinct endpoint pairs, strategy
/// sets materialized as every simple path up to `max_len`. Pairs without
/// a path within the bound are redrawn a bounded number of times.
pub fn gen_random(
    nodes: u32,
    edges: u32,
    players: u32,
    max_len: u32,
    seed: u64,
) -> Result<Generated, GeneratorError> {
    let n = nodes as usize;
    let m = edges as usize;
    if n < 2 {
        return Err(GeneratorError::InvalidParams(format!("need >= 2 nodes, got {n}")));
    }
    let max_edges = n * (n - 1) / 2;
    if m < n - 1 || m > max_edges {
        return Err(GeneratorError::InvalidParams(format!(
            "edge count {m} outside [{}, {max_edges}] for {n} nodes",
            n - 1
        )));
    }
    if players == 0 {
        return Err(GeneratorError::InvalidParams("need >= 1 player".into()));
    }
    if max_len == 0 {
        return Err(GeneratorError::InvalidParams("need max_len >= 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // random attachment tree keeps the graph connected
    let mut edge_set: std::collections::BTreeSet<(NodeId, NodeId)> = std::collections::BTreeSet::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        edge_set.insert((parent.min(i), parent.max(i)));
    }
    let mut spare: Vec<(NodeId, NodeId)> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if !edge_set.contains(&(a, b)) {
                spare.push((a, b));
            }
        }
    }
    spare.shuffle(&mut rng);
    for &pair in spare.iter().take(m - edge_set.len()) {
        edge_set.insert(pair);
    }
    let edge_list: Vec<(NodeId, NodeId)> = edge_set.into_iter().collect();
    let graph = Graph::undirected(n, edge_list)?;

    let mut players_spec = Vec::new();
    for player in 0..players {
        let mut found = false;
        for _attempt in 0..100 {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let paths = enumerate_simple_paths(&graph, u, v, max_len as usize)?;
            if !paths.is_empty() {
                players_spec.push((u, v, paths));
                found = true;
                break;
            }
        }
        if !found {
            return Err(GeneratorError::GenerationFailed(format!(
                "player {player}: no endpoint pair with a path of length <= {max_len} after 100 draws"
            )));
        }
    }
    let instance = GameInstance::new(graph, players_spec)?;
    Ok(Generated {
        name: format!("random-n{nodes}-e{edges}-p{players}-l{max_len}-s{seed}"),
        spec: GeneratorSpec::Random { nodes, edges, players, max_len, seed },
        instance,
        intended: None,
    })
}

/// Per-stage bookkeeping of a generated expansion chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStats {
    /// Number of expansion stages below the root.
    pub depth: u32,
    /// Congestion on every edge of stage k under the intended routing.
    pub stage_congestion: Vec<u32>,
    /// Expansion edges introduced at stage k (stage 0 is the root edge).
    pub stage_edges: Vec<u64>,
    /// Supported players riding stage-k edges.
    pub stage_players: Vec<u64>,
    /// Length of the congestion-free alternatives of the deepest players.
    pub leaf_path_len: u64,
    /// Edges in the instance, including the leaf alternatives.
    pub total_edges: u64,
}

/// Layered worst-case family: a root edge intended to carry `c_hat`
/// players, where every supported player's only alternative is a private
/// detour through the next stage priced to an exact cost tie. Stage
/// congestions fall by `log2(l_star) + 1` per level and the chain stops
/// once they reach 2 (or would drop below). The deepest players get
/// private congestion-free detours, again exactly tied, so the intended
/// routing has no strictly improving deviation under the exponential
/// model.
pub fn gen_expansion_chain(
    c_hat: u32,
    l_star: u32,
) -> Result<(Generated, ChainStats), GeneratorError> {
    if l_star < 2 || !l_star.is_power_of_two() {
        return Err(GeneratorError::InvalidParams(format!(
            "l_star must be a power of two >= 2, got {l_star}"
        )));
    }
    let log_l = l_star.trailing_zeros(); // exact log2 for powers of two
    let drop = log_l + 1;
    if c_hat < 2 + drop {
        return Err(GeneratorError::InvalidParams(format!(
            "c_hat {c_hat} admits no expansion stage (need >= {})",
            2 + drop
        )));
    }

    let depth = (c_hat - 2) / drop;
    let stage_congestion: Vec<u32> = (0..=depth).map(|k| c_hat - k * drop).collect();
    let leaf_congestion = stage_congestion[depth as usize];
    let leaf_path_len: u64 = 1u64 << (leaf_congestion - 1);

    let mut stage_edges: Vec<u64> = vec![1];
    let mut stage_players: Vec<u64> = vec![(c_hat - 1) as u64];
    for k in 1..=depth as usize {
        let e_k = stage_players[k - 1]
            .checked_mul(l_star as u64)
            .ok_or(GeneratorError::TooLarge { edges: u64::MAX, cap: EDGE_CAP })?;
        let p_k = e_k
            .checked_mul(stage_congestion[k] as u64)
            .ok_or(GeneratorError::TooLarge { edges: u64::MAX, cap: EDGE_CAP })?;
        stage_edges.push(e_k);
        stage_players.push(p_k);
    }
    let core_edges: u64 = stage_edges.iter().sum();
    let leaf_edges = stage_players[depth as usize]
        .checked_mul(leaf_path_len)
        .ok_or(GeneratorError::TooLarge { edges: u64::MAX, cap: EDGE_CAP })?;
    let total_edges = core_edges
        .checked_add(leaf_edges)
        .ok_or(GeneratorError::TooLarge { edges: u64::MAX, cap: EDGE_CAP })?;
    if total_edges > EDGE_CAP {
        return Err(GeneratorError::TooLarge { edges: total_edges, cap: EDGE_CAP });
    }

    // assemble the graph stage by stage
    let mut edges: Vec<(NodeId, NodeId)> = vec![(0, 1)];
    let mut next_node: NodeId = 2;
    let mut players_spec: Vec<(NodeId, NodeId, Vec<Path>)> = Vec::new();
    // host edges of the current stage: (edge id, endpoints)
    let mut frontier: Vec<(usize, NodeId, NodeId)> = vec![(0, 0, 1)];

    let build_detour = |edges: &mut Vec<(NodeId, NodeId)>,
                            next_node: &mut NodeId,
                            a: NodeId,
                            b: NodeId,
                            len: u64|
     -> Vec<usize> {
        let mut prev = a;
        let mut ids = Vec::with_capacity(len as usize);
        for step in 0..len {
            let next = if step + 1 == len {
                b
            } else {
                let fresh = *next_node;
                *next_node += 1;
                fresh
            };
            ids.push(edges.len());
            edges.push((prev, next));
            prev = next;
        }
        ids
    };

    for k in 0..=depth {
        let supported_per_edge = if k == 0 {
            (c_hat - 1) as usize
        } else {
            stage_congestion[k as usize] as usize
        };
        let next_is_leaf = k == depth;
        let detour_len = if next_is_leaf { leaf_path_len } else { l_star as u64 };
        let mut next_frontier: Vec<(usize, NodeId, NodeId)> = Vec::new();

        for &(edge_id, a, b) in &frontier {
            for _slot in 0..supported_per_edge {
                let detour = build_detour(&mut edges, &mut next_node, a, b, detour_len);
                if !next_is_leaf {
                    for &id in &detour {
                        let (da, db) = edges[id];
                        next_frontier.push((id, da, db));
                    }
                }
                players_spec.push((
                    a,
                    b,
                    vec![Path::new(vec![edge_id], a, b), Path::new(detour, a, b)],
                ));
            }
            if k == 0 {
                // one root player's best alternative coincides with the
                // root edge itself; it is pinned there
                players_spec.push((a, b, vec![Path::new(vec![edge_id], a, b)]));
            }
        }
        frontier = next_frontier;
    }

    debug_assert_eq!(edges.len() as u64, total_edges);
    let graph = Graph::undirected(next_node, edges)?;
    let player_count = players_spec.len();
    let instance = GameInstance::new(graph, players_spec)?;
    let stats = ChainStats {
        depth,
        stage_congestion,
        stage_edges,
        stage_players,
        leaf_path_len,
        total_edges,
    };
    Ok((
        Generated {
            name: format!("expansion-chain-c{c_hat}-l{l_star}"),
            spec: GeneratorSpec::ExpansionChain { c_hat, l_star },
            instance,
            intended: Some(Routing::all_zero(player_count)),
        },
        stats,
    ))
}
