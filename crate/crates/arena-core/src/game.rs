//! Players, strategy sets, routings, congestion profiles and cost models.
//!
//! A [`GameInstance`] is the immutable problem statement: a graph plus one
//! explicit, indexed strategy set per player. A [`Routing`] picks one
//! strategy index per player; every cost quantity is derived from the
//! per-edge path counts of that choice.

use crate::graph::{validate_path, EdgeId, Graph, GraphError, NodeId, Path};
use crate::scalar::CostScalar;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("game needs at least one player")]
    NoPlayers,
    #[error("game needs at least one edge")]
    NoEdges,
    #[error("player {player}: source equals destination ({node})")]
    SourceEqualsDestination { player: usize, node: NodeId },
    #[error("player {player}: empty strategy set")]
    EmptyStrategySet { player: usize },
    #[error("player {player}: strategy {strategy} is not a valid path in the graph")]
    InvalidStrategyPath { player: usize, strategy: usize },
    #[error("player {player}: strategy {strategy} does not run {from} -> {to}")]
    StrategyEndpointMismatch { player: usize, strategy: usize, from: NodeId, to: NodeId },
    #[error("player {player}: strategy {strategy} duplicates strategy {first}")]
    DuplicateStrategy { player: usize, strategy: usize, first: usize },
    #[error("polynomial cost degree {degree} out of range 1..=8")]
    BadDegree { degree: u32 },
    #[error("routing has {got} choices for {expected} players")]
    WrongChoiceCount { got: usize, expected: usize },
    #[error("player {player}: choice {choice} out of range ({strategies} strategies)")]
    ChoiceOutOfRange { player: usize, choice: usize, strategies: usize },
    #[error("player index {player} out of range ({players} players)")]
    PlayerOutOfRange { player: usize, players: usize },
    #[error("cost overflowed the requested scalar type")]
    Overflow,
}

/// Cost semantics for a player given the congestion on its chosen path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostModel {
    /// `sum over path edges of 2^congestion`
    Exponential,
    /// `max over path edges of congestion`
    BottleneckMax,
    /// `sum over path edges of congestion`
    LinearSum,
    /// `sum over path edges of congestion^degree`, degree in 1..=8
    PolynomialSum { degree: u32 },
}

impl CostModel {
    pub fn validate(&self) -> Result<(), GameError> {
        if let CostModel::PolynomialSum { degree } = *self {
            if degree == 0 || degree > 8 {
                return Err(GameError::BadDegree { degree });
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for CostModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CostModel::Exponential => write!(f, "exp"),
            CostModel::BottleneckMax => write!(f, "max"),
            CostModel::LinearSum => write!(f, "linear"),
            CostModel::PolynomialSum { degree } => write!(f, "poly:{degree}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Player {
    pub id: usize,
    pub source: NodeId,
    pub target: NodeId,
    pub strategies: Vec<Path>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameInstance {
    graph: Graph,
    players: Vec<Player>,
    /// Longest path length over all strategy sets, recomputed at build.
    max_path_len: usize,
}

/// One chosen strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Routing {
    pub choices: Vec<usize>,
}

impl Routing {
    pub fn new(choices: Vec<usize>) -> Self {
        Routing { choices }
    }

    /// Lexicographically-first routing: everyone on strategy 0.
    pub fn all_zero(players: usize) -> Self {
        Routing { choices: vec![0; players] }
    }
}

/// Per-edge path counts of a routing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongestionProfile {
    pub counts: Vec<u32>,
}

impl CongestionProfile {
    pub fn max_congestion(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

impl GameInstance {
    /// Validates and seals a game: at least one player and one edge, each
    /// strategy a valid path between the player's endpoints, no duplicate
    /// strategies, and the longest path length recomputed from scratch.
    pub fn new(
        graph: Graph,
        players: Vec<(NodeId, NodeId, Vec<Path>)>,
    ) -> Result<Self, GameError> {
        if players.is_empty() {
            return Err(GameError::NoPlayers);
        }
        if graph.edge_count() == 0 {
            return Err(GameError::NoEdges);
        }
        let mut sealed = Vec::with_capacity(players.len());
        let mut max_path_len = 0usize;
        for (id, (source, target, strategies)) in players.into_iter().enumerate() {
            if source == target {
                return Err(GameError::SourceEqualsDestination { player: id, node: source });
            }
            if strategies.is_empty() {
                return Err(GameError::EmptyStrategySet { player: id });
            }
            let mut seen: std::collections::HashMap<&[EdgeId], usize> =
                std::collections::HashMap::new();
            for (s, path) in strategies.iter().enumerate() {
                if path.source != source || path.target != target {
                    return Err(GameError::StrategyEndpointMismatch {
                        player: id,
                        strategy: s,
                        from: source,
                        to: target,
                    });
                }
                if !validate_path(&graph, path) {
                    return Err(GameError::InvalidStrategyPath { player: id, strategy: s });
                }
                if let Some(&first) = seen.get(path.edges.as_slice()) {
                    return Err(GameError::DuplicateStrategy { player: id, strategy: s, first });
                }
                seen.insert(path.edges.as_slice(), s);
                max_path_len = max_path_len.max(path.len());
            }
            drop(seen);
            sealed.push(Player { id, source, target, strategies });
        }
        Ok(GameInstance { graph, players: sealed, max_path_len })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// L: the longest path length over all strategy sets.
    pub fn max_path_len(&self) -> usize {
        self.max_path_len
    }

    pub fn validate_routing(&self, routing: &Routing) -> Result<(), GameError> {
        if routing.choices.len() != self.players.len() {
            return Err(GameError::WrongChoiceCount {
                got: routing.choices.len(),
                expected: self.players.len(),
            });
        }
        for (player, (&choice, p)) in routing.choices.iter().zip(&self.players).enumerate() {
            if choice >= p.strategies.len() {
                return Err(GameError::ChoiceOutOfRange {
                    player,
                    choice,
                    strategies: p.strategies.len(),
                });
            }
        }
        Ok(())
    }

    /// The path player `i` uses under `routing` (callers must have
    /// validated the routing).
    pub fn chosen_path(&self, routing: &Routing, player: usize) -> &Path {
        &self.players[player].strategies[routing.choices[player]]
    }

    /// D: the longest path actually chosen by `routing`.
    pub fn max_chosen_len(&self, routing: &Routing) -> Result<usize, GameError> {
        self.validate_routing(routing)?;
        Ok((0..self.players.len())
            .map(|i| self.chosen_path(routing, i).len())
            .max()
            .unwrap_or(0))
    }
}

/// Per-edge path counts: `counts[e]` = number of players whose chosen
/// path crosses `e`.
pub fn congestion(game: &GameInstance, routing: &Routing) -> Result<CongestionProfile, GameError> {
    game.validate_routing(routing)?;
    let mut counts = vec![0u32; game.edge_count()];
    for i in 0..game.player_count() {
        for &e in &game.chosen_path(routing, i).edges {
            counts[e] += 1;
        }
    }
    Ok(CongestionProfile { counts })
}

/// Cost of traversing `edges` when the per-edge counts are `counts`,
/// under `model`.
pub(crate) fn path_cost_from_counts<S: CostScalar>(
    edges: &[EdgeId],
    counts: &[u32],
    model: CostModel,
) -> Result<S, GameError> {
    model.validate()?;
    match model {
        CostModel::Exponential => {
            let mut sum = S::zero();
            for &e in edges {
                let term = S::two_pow(counts[e]).ok_or(GameError::Overflow)?;
                sum = sum.checked_add(&term).ok_or(GameError::Overflow)?;
            }
            Ok(sum)
        }
        CostModel::BottleneckMax => {
            let max = edges.iter().map(|&e| counts[e]).max().unwrap_or(0);
            S::from_u32(max).ok_or(GameError::Overflow)
        }
        CostModel::LinearSum => {
            let mut sum = S::zero();
            for &e in edges {
                let term = S::from_u32(counts[e]).ok_or(GameError::Overflow)?;
                sum = sum.checked_add(&term).ok_or(GameError::Overflow)?;
            }
            Ok(sum)
        }
        CostModel::PolynomialSum { degree } => {
            let mut sum = S::zero();
            for &e in edges {
                let base = S::from_u32(counts[e]).ok_or(GameError::Overflow)?;
                let term = S::pow_checked(base, degree).ok_or(GameError::Overflow)?;
                sum = sum.checked_add(&term).ok_or(GameError::Overflow)?;
            }
            Ok(sum)
        }
    }
}

/// Player `i`'s cost under `routing`, own path included in the counts.
pub fn player_cost<S: CostScalar>(
    game: &GameInstance,
    routing: &Routing,
    player: usize,
    model: CostModel,
) -> Result<S, GameError> {
    if player >= game.player_count() {
        return Err(GameError::PlayerOutOfRange { player, players: game.player_count() });
    }
    let profile = congestion(game, routing)?;
    path_cost_from_counts(&game.chosen_path(routing, player).edges, &profile.counts, model)
}

/// Social cost: the maximum edge congestion of the routing.
pub fn social_cost(game: &GameInstance, routing: &Routing) -> Result<u32, GameError> {
    Ok(congestion(game, routing)?.max_congestion())
}

/// The exact potential of the exponential game:
/// `sum over all edges of 2^congestion` (unused edges contribute 1 each).
pub fn potential<S: CostScalar>(game: &GameInstance, routing: &Routing) -> Result<S, GameError> {
    let profile = congestion(game, routing)?;
    potential_from_counts(&profile.counts)
}

pub(crate) fn potential_from_counts<S: CostScalar>(counts: &[u32]) -> Result<S, GameError> {
    let mut sum = S::zero();
    for &c in counts {
        let term = S::two_pow(c).ok_or(GameError::Overflow)?;
        sum = sum.checked_add(&term).ok_or(GameError::Overflow)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_simple_paths;
    use crate::ExactCost;
    use num_bigint::BigUint;

    /// Two players over a 4-edge graph: a path graph 0-1-2-3 plus a
    /// chord (1,3).
    fn small_game() -> GameInstance {
        let g = Graph::undirected(4, vec![(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let p0 = enumerate_simple_paths(&g, 0, 2, 3).unwrap();
        let p1 = enumerate_simple_paths(&g, 1, 2, 3).unwrap();
        GameInstance::new(g, vec![(0, 2, p0), (1, 2, p1)]).unwrap()
    }

    #[test]
    fn congestion_counts_paths_per_edge() {
        // p0 = [e0, e1] (0-1-2), p1 = [e1] (1-2)
        let game = small_game();
        let r = Routing::new(vec![0, 0]);
        assert_eq!(game.chosen_path(&r, 0).edges, vec![0, 1]);
        assert_eq!(game.chosen_path(&r, 1).edges, vec![1]);
        let profile = congestion(&game, &r).unwrap();
        assert_eq!(profile.counts, vec![1, 2, 0, 0]);
        // purity
        assert_eq!(congestion(&game, &r).unwrap(), profile);
    }

    #[test]
    fn exponential_player_cost_sums_powers() {
        // player 0 on edges with congestion (1, 2) -> 2 + 4 = 6
        let game = small_game();
        let r = Routing::new(vec![0, 0]);
        let pc: ExactCost = player_cost(&game, &r, 0, CostModel::Exponential).unwrap();
        assert_eq!(pc, BigUint::from(6u32));
        // player 1 alone on a single edge at congestion 1 -> 2
        let r_alone = Routing::new(vec![1, 0]);
        assert_eq!(game.chosen_path(&r_alone, 1).edges, vec![1]);
        let pc1: ExactCost = player_cost(&game, &r_alone, 1, CostModel::Exponential).unwrap();
        assert_eq!(pc1, BigUint::from(2u32));
    }

    #[test]
    fn cost_models_disagree_on_shared_edges() {
        let game = small_game();
        let r = Routing::new(vec![0, 0]);
        let exp: u128 = player_cost(&game, &r, 0, CostModel::Exponential).unwrap();
        let max: u128 = player_cost(&game, &r, 0, CostModel::BottleneckMax).unwrap();
        let lin: u128 = player_cost(&game, &r, 0, CostModel::LinearSum).unwrap();
        let poly: u128 =
            player_cost(&game, &r, 0, CostModel::PolynomialSum { degree: 2 }).unwrap();
        assert_eq!(exp, 6);
        assert_eq!(max, 2);
        assert_eq!(lin, 3);
        assert_eq!(poly, 5);
    }

    #[test]
    fn social_cost_is_max_congestion() {
        let game = small_game();
        assert_eq!(social_cost(&game, &Routing::new(vec![0, 0])).unwrap(), 2);
        assert_eq!(social_cost(&game, &Routing::new(vec![1, 0])).unwrap(), 1);
    }

    #[test]
    fn potential_counts_unused_edges_once() {
        // two players on disjoint single edges of a 4-edge graph:
        // 2*2 + 2*1 = 6
        let g = Graph::undirected(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let game = GameInstance::new(
            g,
            vec![
                (0, 1, vec![Path::new(vec![0], 0, 1)]),
                (2, 3, vec![Path::new(vec![2], 2, 3)]),
            ],
        )
        .unwrap();
        let f: ExactCost = potential(&game, &Routing::all_zero(2)).unwrap();
        assert_eq!(f, BigUint::from(6u32));
    }

    #[test]
    fn potential_is_a_function_of_the_profile_only() {
        let game = small_game();
        for choices in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let r = Routing::new(choices.to_vec());
            let f: ExactCost = potential(&game, &r).unwrap();
            let profile = congestion(&game, &r).unwrap();
            let manual: ExactCost = profile
                .counts
                .iter()
                .map(|&c| BigUint::from(1u32) << c)
                .sum();
            assert_eq!(f, manual);
        }
    }

    #[test]
    fn validation_rejects_bad_instances() {
        let g = Graph::undirected(3, vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(GameInstance::new(g.clone(), vec![]), Err(GameError::NoPlayers));
        assert_eq!(
            GameInstance::new(g.clone(), vec![(0, 0, vec![Path::new(vec![0], 0, 0)])]),
            Err(GameError::SourceEqualsDestination { player: 0, node: 0 })
        );
        assert_eq!(
            GameInstance::new(g.clone(), vec![(0, 1, vec![])]),
            Err(GameError::EmptyStrategySet { player: 0 })
        );
        assert_eq!(
            GameInstance::new(g.clone(), vec![(0, 1, vec![Path::new(vec![1], 0, 1)])]),
            Err(GameError::InvalidStrategyPath { player: 0, strategy: 0 })
        );
        assert_eq!(
            GameInstance::new(g.clone(), vec![(0, 1, vec![Path::new(vec![0], 0, 2)])]),
            Err(GameError::StrategyEndpointMismatch { player: 0, strategy: 0, from: 0, to: 1 })
        );
        let dup = vec![Path::new(vec![0], 0, 1), Path::new(vec![0], 0, 1)];
        assert_eq!(
            GameInstance::new(g.clone(), vec![(0, 1, dup)]),
            Err(GameError::DuplicateStrategy { player: 0, strategy: 1, first: 0 })
        );
    }

    #[test]
    fn invalid_routings_are_rejected() {
        let game = small_game();
        assert!(matches!(
            congestion(&game, &Routing::new(vec![0])),
            Err(GameError::WrongChoiceCount { .. })
        ));
        assert!(matches!(
            congestion(&game, &Routing::new(vec![9, 0])),
            Err(GameError::ChoiceOutOfRange { player: 0, choice: 9, .. })
        ));
        assert!(matches!(
            player_cost::<u128>(&game, &Routing::all_zero(2), 7, CostModel::LinearSum),
            Err(GameError::PlayerOutOfRange { player: 7, .. })
        ));
    }

    #[test]
    fn polynomial_degree_is_validated() {
        let game = small_game();
        let r = Routing::all_zero(2);
        assert_eq!(
            player_cost::<u128>(&game, &r, 0, CostModel::PolynomialSum { degree: 0 }),
            Err(GameError::BadDegree { degree: 0 })
        );
        assert_eq!(
            player_cost::<u128>(&game, &r, 0, CostModel::PolynomialSum { degree: 9 }),
            Err(GameError::BadDegree { degree: 9 })
        );
    }

    #[test]
    fn narrow_scalars_report_overflow() {
        // 70 players across one edge forces 2^70: too big for u64
        let g = Graph::undirected(2, vec![(0, 1)]).unwrap();
        let players: Vec<_> =
            (0..70).map(|_| (0, 1, vec![Path::new(vec![0], 0, 1)])).collect();
        let game = GameInstance::new(g, players).unwrap();
        let r = Routing::all_zero(70);
        assert_eq!(
            player_cost::<u64>(&game, &r, 0, CostModel::Exponential),
            Err(GameError::Overflow)
        );
        assert!(player_cost::<u128>(&game, &r, 0, CostModel::Exponential).is_ok());
        let exact: ExactCost = player_cost(&game, &r, 0, CostModel::Exponential).unwrap();
        assert_eq!(exact, BigUint::from(1u8) << 70);
    }

    #[test]
    fn max_path_len_is_recomputed() {
        let game = small_game();
        assert_eq!(game.max_path_len(), 3);
        assert_eq!(game.max_chosen_len(&Routing::all_zero(2)).unwrap(), 2);
    }
}
