//! Greedy moves and best-response dynamics.
//!
//! A greedy move is a unilateral path change that strictly lowers the
//! moving player's cost; best-response dynamics apply the cost-minimizing
//! greedy move of one player at a time until no player can improve. Under
//! the exponential cost model the routing potential (sum over edges of
//! `2^congestion`) strictly decreases on every move, with an exact
//! decrement identity that [`verify_potential_identity`] checks.

use crate::game::{
    congestion, path_cost_from_counts, potential_from_counts, social_cost, CostModel, GameError,
    GameInstance, Routing,
};
use crate::graph::EdgeId;
use crate::scalar::CostScalar;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynamicsError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("dynamics did not converge within {max_steps} steps")]
    NonConvergence { max_steps: u64 },
    #[error("routings differ in players {differing:?}, expected only player {player}")]
    MalformedPair { player: usize, differing: Vec<usize> },
}

/// Player scan order used when picking the next mover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Scan players in index order; the first one with a greedy move moves.
    RoundRobin,
    /// Every improvable player is evaluated; the one whose best move
    /// drops the potential the most moves first (ties to the lowest
    /// index), so the smallest potential gains are deferred to the end.
    LowestGainLast,
    /// Per-step seeded shuffle of the scan order.
    Random { seed: u64 },
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Schedule::RoundRobin => write!(f, "rr"),
            Schedule::LowestGainLast => write!(f, "gain"),
            Schedule::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

/// One recorded greedy move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord<S> {
    pub player: usize,
    pub from_choice: usize,
    pub to_choice: usize,
    pub pc_before: S,
    pub pc_after: S,
    /// Potential of the exponential game before/after the move. Strictly
    /// decreasing when the move was made under `CostModel::Exponential`;
    /// recorded for other models as a diagnostic only.
    pub potential_before: S,
    pub potential_after: S,
}

/// A full best-response run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsTrace<S> {
    pub initial: Routing,
    pub moves: Vec<MoveRecord<S>>,
    pub final_routing: Routing,
    pub converged: bool,
}

/// The strategy index that minimizes player `i`'s cost strictly below its
/// current cost, or `None` if the player is locally optimal. Candidates
/// are evaluated with the player's current path removed first; ties among
/// strict improvers go to the lowest strategy index.
pub fn best_response<S: CostScalar>(
    game: &GameInstance,
    routing: &Routing,
    player: usize,
    model: CostModel,
) -> Result<Option<usize>, GameError> {
    if player >= game.player_count() {
        return Err(GameError::PlayerOutOfRange { player, players: game.player_count() });
    }
    let profile = congestion(game, routing)?;
    best_response_from_counts::<S>(game, routing, player, model, &profile.counts)
}

/// `best_response` against a precomputed congestion profile of `routing`.
pub(crate) fn best_response_from_counts<S: CostScalar>(
    game: &GameInstance,
    routing: &Routing,
    player: usize,
    model: CostModel,
    counts: &[u32],
) -> Result<Option<usize>, GameError> {
    let current_choice = routing.choices[player];
    let current_path = &game.players()[player].strategies[current_choice];
    let current_cost: S = path_cost_from_counts(&current_path.edges, counts, model)?;

    // counts with player's own path removed
    let mut without = counts.to_vec();
    for &e in &current_path.edges {
        without[e] -= 1;
    }

    let mut best: Option<(S, usize)> = None;
    for (j, candidate) in game.players()[player].strategies.iter().enumerate() {
        if j == current_choice {
            continue;
        }
        let cost = candidate_cost::<S>(&candidate.edges, &without, model)?;
        if cost < current_cost {
            match &best {
                Some((b, _)) if *b <= cost => {}
                _ => best = Some((cost, j)),
            }
        }
    }
    Ok(best.map(|(_, j)| j))
}

/// Cost of `edges` when the mover is added back on top of `without`.
fn candidate_cost<S: CostScalar>(
    edges: &[EdgeId],
    without: &[u32],
    model: CostModel,
) -> Result<S, GameError> {
    // evaluate as counts+1 on the candidate's own edges without building
    // a full second profile
    let bumped: Vec<u32> = edges.iter().map(|&e| without[e] + 1).collect();
    let positions: Vec<usize> = (0..edges.len()).collect();
    path_cost_from_counts(&positions, &bumped, model)
}

/// True iff no player has a greedy move.
pub fn is_nash<S: CostScalar>(
    game: &GameInstance,
    routing: &Routing,
    model: CostModel,
) -> Result<bool, GameError> {
    let profile = congestion(game, routing)?;
    for player in 0..game.player_count() {
        if best_response_from_counts::<S>(game, routing, player, model, &profile.counts)?
            .is_some()
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Applies one greedy move chosen by `schedule`, or `None` when the
/// routing is already a Nash-routing. `step_index` feeds the per-step
/// randomness of `Schedule::Random`.
pub fn greedy_step<S: CostScalar>(
    game: &GameInstance,
    routing: &Routing,
    model: CostModel,
    schedule: Schedule,
    step_index: u64,
) -> Result<Option<(Routing, MoveRecord<S>)>, GameError> {
    let profile = congestion(game, routing)?;
    let n = game.player_count();

    let mover: Option<(usize, usize)> = match schedule {
        Schedule::RoundRobin => {
            let mut found = None;
            for player in 0..n {
                if let Some(j) =
                    best_response_from_counts::<S>(game, routing, player, model, &profile.counts)?
                {
                    found = Some((player, j));
                    break;
                }
            }
            found
        }
        Schedule::Random { seed } => {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ step_index.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            order.shuffle(&mut rng);
            let mut found = None;
            for player in order {
                if let Some(j) =
                    best_response_from_counts::<S>(game, routing, player, model, &profile.counts)?
                {
                    found = Some((player, j));
                    break;
                }
            }
            found
        }
        Schedule::LowestGainLast => {
            // the potential before the move is common to all candidates,
            // so the largest gain is the smallest resulting potential
            let mut best: Option<(S, usize, usize)> = None;
            for player in 0..n {
                if let Some(j) =
                    best_response_from_counts::<S>(game, routing, player, model, &profile.counts)?
                {
                    let mut next = routing.clone();
                    next.choices[player] = j;
                    let after: S = crate::game::potential(game, &next)?;
                    match &best {
                        Some((a, _, _)) if *a <= after => {}
                        _ => best = Some((after, player, j)),
                    }
                }
            }
            best.map(|(_, player, j)| (player, j))
        }
    };

    let Some((player, to_choice)) = mover else {
        return Ok(None);
    };

    let from_choice = routing.choices[player];
    let pc_before: S =
        path_cost_from_counts(&game.chosen_path(routing, player).edges, &profile.counts, model)?;
    let potential_before: S = potential_from_counts(&profile.counts)?;

    let mut next = routing.clone();
    next.choices[player] = to_choice;
    let next_profile = congestion(game, &next)?;
    let pc_after: S =
        path_cost_from_counts(&game.chosen_path(&next, player).edges, &next_profile.counts, model)?;
    let potential_after: S = potential_from_counts(&next_profile.counts)?;

    let record = MoveRecord {
        player,
        from_choice,
        to_choice,
        pc_before,
        pc_after,
        potential_before,
        potential_after,
    };
    Ok(Some((next, record)))
}

/// Default step budget: `potential(initial) - |E|` under the exponential
/// model (tight, since each move shaves at least 1 off the potential and
/// the potential can never drop below `|E|`), `10 * N * L` otherwise.
pub fn default_max_steps(
    game: &GameInstance,
    initial: &Routing,
    model: CostModel,
) -> Result<u64, GameError> {
    match model {
        CostModel::Exponential => {
            use num_traits::ToPrimitive;
            let f: crate::ExactCost = crate::game::potential(game, initial)?;
            let slack = f - num_bigint::BigUint::from(game.edge_count());
            Ok(slack.to_u64().unwrap_or(u64::MAX).max(1))
        }
        _ => Ok(10 * game.player_count() as u64 * game.max_path_len().max(1) as u64),
    }
}

/// Iterates greedy steps until no move exists or `max_steps` is reached.
/// `max_steps = None` uses [`default_max_steps`]. For non-exponential
/// models an exhausted budget is an error (such games may cycle); under
/// the exponential model the potential argument guarantees convergence
/// within the default budget.
pub fn run_best_response<S: CostScalar>(
    game: &GameInstance,
    initial: &Routing,
    model: CostModel,
    schedule: Schedule,
    max_steps: Option<u64>,
) -> Result<DynamicsTrace<S>, DynamicsError> {
    game.validate_routing(initial)?;
    let max_steps = match max_steps {
        Some(m) => m,
        None => default_max_steps(game, initial, model)?,
    };
    let mut current = initial.clone();
    let mut moves = Vec::new();
    let mut converged = false;
    for step in 0..max_steps {
        match greedy_step::<S>(game, &current, model, schedule, step)? {
            Some((next, record)) => {
                moves.push(record);
                current = next;
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    if !converged && is_nash::<S>(game, &current, model)? {
        // budget ran out exactly at the equilibrium
        converged = true;
    }
    if !converged && model != CostModel::Exponential {
        return Err(DynamicsError::NonConvergence { max_steps });
    }
    Ok(DynamicsTrace { initial: initial.clone(), moves, final_routing: current, converged })
}

/// Checks the exact potential-decrement identity for a unilateral switch
/// by `player` between `before` and `after`:
///
/// `potential(before) - potential(after) = X_A(after) - X_B(after) / 2`
///
/// where `A` is the set of edges the player left, `B` the set it joined,
/// and `X_S` sums `2^congestion` over `S`. The check is carried out
/// multiplied through by two, so it is pure integer arithmetic; `X_B` is
/// always even because every edge of `B` carries the player itself after
/// the switch.
pub fn verify_potential_identity<S: CostScalar>(
    game: &GameInstance,
    before: &Routing,
    after: &Routing,
    player: usize,
) -> Result<bool, DynamicsError> {
    game.validate_routing(before)?;
    game.validate_routing(after)?;
    if player >= game.player_count() {
        return Err(GameError::PlayerOutOfRange { player, players: game.player_count() }.into());
    }
    let differing: Vec<usize> = (0..game.player_count())
        .filter(|&i| before.choices[i] != after.choices[i])
        .collect();
    if !differing.is_empty() && differing != [player] {
        return Err(DynamicsError::MalformedPair { player, differing });
    }

    let old_edges: std::collections::BTreeSet<EdgeId> =
        game.chosen_path(before, player).edges.iter().copied().collect();
    let new_edges: std::collections::BTreeSet<EdgeId> =
        game.chosen_path(after, player).edges.iter().copied().collect();

    let counts_before = congestion(game, before)?.counts;
    let counts_after = congestion(game, after)?.counts;
    let pot_before: S = potential_from_counts(&counts_before)?;
    let pot_after: S = potential_from_counts(&counts_after)?;

    let mut left_sum = S::zero(); // X_A evaluated on `after`
    for &e in old_edges.difference(&new_edges) {
        let term = S::two_pow(counts_after[e]).ok_or(GameError::Overflow)?;
        left_sum = left_sum.checked_add(&term).ok_or(GameError::Overflow)?;
    }
    let mut joined_sum = S::zero(); // X_B evaluated on `after`
    for &e in new_edges.difference(&old_edges) {
        debug_assert!(counts_after[e] >= 1, "joined edge must carry the mover");
        let term = S::two_pow(counts_after[e]).ok_or(GameError::Overflow)?;
        joined_sum = joined_sum.checked_add(&term).ok_or(GameError::Overflow)?;
    }

    // 2*pot_before + X_B(after) == 2*pot_after + 2*X_A(after)
    let lhs = pot_before
        .doubled()
        .and_then(|x| x.checked_add(&joined_sum))
        .ok_or(GameError::Overflow)?;
    let rhs = left_sum
        .doubled()
        .and_then(|x| pot_after.doubled().and_then(|p| p.checked_add(&x)))
        .ok_or(GameError::Overflow)?;
    Ok(lhs == rhs)
}

/// Summary statistics of a finished trace.
pub fn trace_summary<S: CostScalar>(
    game: &GameInstance,
    trace: &DynamicsTrace<S>,
) -> Result<(u32, S, usize), GameError> {
    let sc = social_cost(game, &trace.final_routing)?;
    let f: S = crate::game::potential(game, &trace.final_routing)?;
    let d = game.max_chosen_len(&trace.final_routing)?;
    Ok((sc, f, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{player_cost, potential};
    use crate::generators::gen_fig2;
    use crate::graph::Graph;
    use crate::ExactCost;
    use num_bigint::BigUint;

    fn fig2_k5() -> GameInstance {
        gen_fig2(5).unwrap().instance
    }

    #[test]
    fn best_response_leaves_the_bottleneck() {
        // all players on the shared edge: pc = 2^5 = 32; a free length-5
        // detour costs 5 * 2 = 10
        let game = fig2_k5();
        let all_on_e = Routing::all_zero(5);
        let pc: ExactCost = player_cost(&game, &all_on_e, 0, CostModel::Exponential).unwrap();
        assert_eq!(pc, BigUint::from(32u32));
        let j = best_response::<ExactCost>(&game, &all_on_e, 0, CostModel::Exponential)
            .unwrap()
            .expect("player 0 should improve");
        assert_eq!(j, 1); // lowest-index detour among the four ties
        let mut moved = all_on_e.clone();
        moved.choices[0] = j;
        let pc_after: ExactCost =
            player_cost(&game, &moved, 0, CostModel::Exponential).unwrap();
        assert_eq!(pc_after, BigUint::from(10u32));
    }

    #[test]
    fn linear_model_sees_no_improvement() {
        let game = fig2_k5();
        let all_on_e = Routing::all_zero(5);
        for player in 0..5 {
            assert_eq!(
                best_response::<ExactCost>(&game, &all_on_e, player, CostModel::LinearSum)
                    .unwrap(),
                None
            );
        }
        assert!(is_nash::<ExactCost>(&game, &all_on_e, CostModel::LinearSum).unwrap());
        assert!(!is_nash::<ExactCost>(&game, &all_on_e, CostModel::Exponential).unwrap());
    }

    #[test]
    fn singleton_strategy_set_is_always_stable() {
        let g = Graph::undirected(2, vec![(0, 1)]).unwrap();
        let game = GameInstance::new(
            g,
            vec![(0, 1, vec![crate::graph::Path::new(vec![0], 0, 1)])],
        )
        .unwrap();
        let r = Routing::all_zero(1);
        assert_eq!(
            best_response::<ExactCost>(&game, &r, 0, CostModel::Exponential).unwrap(),
            None
        );
    }

    #[test]
    fn greedy_step_drops_the_potential_exactly() {
        let game = fig2_k5();
        let all_on_e = Routing::all_zero(5);
        let before: ExactCost = potential(&game, &all_on_e).unwrap();
        assert_eq!(before, BigUint::from(52u32)); // 2^5 + 20
        let (next, record) = greedy_step::<ExactCost>(
            &game,
            &all_on_e,
            CostModel::Exponential,
            Schedule::RoundRobin,
            0,
        )
        .unwrap()
        .expect("a move exists");
        assert_eq!(record.player, 0);
        let after: ExactCost = potential(&game, &next).unwrap();
        assert_eq!(after, BigUint::from(41u32)); // 2^4 + 5*2 + 15
        assert_eq!(record.potential_before, before);
        assert_eq!(record.potential_after, after);
        assert!(verify_potential_identity::<ExactCost>(&game, &all_on_e, &next, 0).unwrap());
    }

    #[test]
    fn greedy_step_returns_none_at_nash() {
        let game = fig2_k5();
        let all_on_e = Routing::all_zero(5);
        assert!(greedy_step::<ExactCost>(
            &game,
            &all_on_e,
            CostModel::LinearSum,
            Schedule::RoundRobin,
            0
        )
        .unwrap()
        .is_none());
    }

    #[test]
    fn run_converges_from_the_bottleneck() {
        let game = fig2_k5();
        let trace = run_best_response::<ExactCost>(
            &game,
            &Routing::all_zero(5),
            CostModel::Exponential,
            Schedule::RoundRobin,
            None,
        )
        .unwrap();
        assert!(trace.converged);
        assert!(is_nash::<ExactCost>(&game, &trace.final_routing, CostModel::Exponential).unwrap());
        // players peel off the shared edge until 2^c <= 2k: for k = 5
        // that stops at congestion 3 (2^3 = 8 <= 10 < 16 = 2^4)
        let sc = social_cost(&game, &trace.final_routing).unwrap();
        assert_eq!(sc, 3);
        // replay the moves
        let mut replay = trace.initial.clone();
        for record in &trace.moves {
            assert_eq!(replay.choices[record.player], record.from_choice);
            replay.choices[record.player] = record.to_choice;
        }
        assert_eq!(replay, trace.final_routing);
    }

    #[test]
    fn run_at_nash_makes_zero_moves() {
        let game = fig2_k5();
        let trace = run_best_response::<ExactCost>(
            &game,
            &Routing::all_zero(5),
            CostModel::LinearSum,
            Schedule::RoundRobin,
            None,
        )
        .unwrap();
        assert!(trace.converged);
        assert!(trace.moves.is_empty());
        assert_eq!(trace.final_routing, Routing::all_zero(5));
    }

    #[test]
    fn all_schedules_converge_under_exponential() {
        let game = fig2_k5();
        for schedule in [
            Schedule::RoundRobin,
            Schedule::LowestGainLast,
            Schedule::Random { seed: 7 },
        ] {
            let trace = run_best_response::<ExactCost>(
                &game,
                &Routing::all_zero(5),
                CostModel::Exponential,
                schedule,
                None,
            )
            .unwrap();
            assert!(trace.converged, "schedule {schedule} did not converge");
            assert!(
                is_nash::<ExactCost>(&game, &trace.final_routing, CostModel::Exponential).unwrap()
            );
        }
    }

    #[test]
    fn random_schedule_is_reproducible() {
        let game = fig2_k5();
        let run = |seed| {
            run_best_response::<ExactCost>(
                &game,
                &Routing::all_zero(5),
                CostModel::Exponential,
                Schedule::Random { seed },
                None,
            )
            .unwrap()
        };
        assert_eq!(run(3), run(3));
    }

    #[test]
    fn identity_holds_trivially_for_a_no_op_switch() {
        let game = fig2_k5();
        let r = Routing::all_zero(5);
        assert!(verify_potential_identity::<ExactCost>(&game, &r, &r, 2).unwrap());
    }

    #[test]
    fn identity_rejects_multi_player_diffs() {
        let game = fig2_k5();
        let a = Routing::all_zero(5);
        let mut b = a.clone();
        b.choices[1] = 1;
        b.choices[2] = 1;
        assert_eq!(
            verify_potential_identity::<ExactCost>(&game, &a, &b, 1),
            Err(DynamicsError::MalformedPair { player: 1, differing: vec![1, 2] })
        );
    }

    #[test]
    fn non_exponential_budget_exhaustion_is_an_error() {
        // two players on e, three spread over detours: under LinearSum
        // the detour players drift to e one at a time, so one step is
        // not enough to reach an equilibrium
        let game = fig2_k5();
        let start = Routing::new(vec![0, 0, 1, 2, 3]);
        let out = run_best_response::<ExactCost>(
            &game,
            &start,
            CostModel::LinearSum,
            Schedule::RoundRobin,
            Some(1),
        );
        assert_eq!(out.unwrap_err(), DynamicsError::NonConvergence { max_steps: 1 });
    }
}
