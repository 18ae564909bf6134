//! Exhaustive profile-space analysis: optimal social cost, full Nash
//! enumeration, and exact price of anarchy / stability.
//!
//! Profile spaces are scanned in lexicographic order of the choice
//! vectors. Everything is exact: social costs are integers, PoA and PoS
//! are reduced big rationals.

use crate::dynamics::best_response_from_counts;
use crate::game::{congestion, CostModel, GameError, GameInstance, Routing};
use crate::scalar::CostScalar;
use crate::Rational;
use num_bigint::BigInt;
use thiserror::Error;

/// Default ceiling on the number of strategy profiles a scan may visit.
pub const DEFAULT_PROFILE_CAP: u128 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("instance too large: {profiles} strategy profiles exceed cap {cap}")]
    TooLarge { profiles: u128, cap: u128 },
    #[error("no pure Nash equilibrium exists under this cost model")]
    NoEquilibrium,
}

/// Product of strategy-set sizes, or `None` on overflow (definitely
/// larger than any reasonable cap).
pub fn profile_count(game: &GameInstance) -> Option<u128> {
    let mut product: u128 = 1;
    for player in game.players() {
        product = product.checked_mul(player.strategies.len() as u128)?;
    }
    Some(product)
}

fn ensure_within_cap(game: &GameInstance, cap: u128) -> Result<u128, AnalysisError> {
    match profile_count(game) {
        Some(count) if count <= cap => Ok(count),
        Some(count) => Err(AnalysisError::TooLarge { profiles: count, cap }),
        None => Err(AnalysisError::TooLarge { profiles: u128::MAX, cap }),
    }
}

/// Iterates all routings in lexicographic order of the choice vector.
pub struct ProfileIter<'a> {
    game: &'a GameInstance,
    next: Option<Vec<usize>>,
}

impl<'a> ProfileIter<'a> {
    pub fn new(game: &'a GameInstance) -> Self {
        ProfileIter { game, next: Some(vec![0; game.player_count()]) }
    }
}

impl Iterator for ProfileIter<'_> {
    type Item = Routing;

    fn next(&mut self) -> Option<Routing> {
        let current = self.next.take()?;
        let routing = Routing::new(current.clone());
        // odometer increment, rightmost position fastest
        let mut bumped = current;
        for i in (0..bumped.len()).rev() {
            bumped[i] += 1;
            if bumped[i] < self.game.players()[i].strategies.len() {
                self.next = Some(bumped);
                return Some(routing);
            }
            bumped[i] = 0;
        }
        Some(routing)
    }
}

/// Minimum social cost over all profiles plus the lexicographically
/// smallest witness, via depth-first branch and bound over players.
pub fn optimal_social_cost(
    game: &GameInstance,
    cap: u128,
) -> Result<(u32, Routing), AnalysisError> {
    ensure_within_cap(game, cap)?;
    let n = game.player_count();
    let mut counts = vec![0u32; game.edge_count()];
    let mut choices = vec![0usize; n];
    let mut best_sc = u32::MAX;
    let mut best: Option<Routing> = None;

    // recursion via explicit helper; partial max congestion only grows,
    // so any partial >= best cannot improve and the first completed
    // minimizer found is the lexicographically smallest one
    fn descend(
        game: &GameInstance,
        player: usize,
        counts: &mut Vec<u32>,
        choices: &mut Vec<usize>,
        partial_max: u32,
        best_sc: &mut u32,
        best: &mut Option<Routing>,
    ) {
        if partial_max >= *best_sc {
            return;
        }
        if player == game.player_count() {
            *best_sc = partial_max;
            *best = Some(Routing::new(choices.clone()));
            return;
        }
        for (j, path) in game.players()[player].strategies.iter().enumerate() {
            let mut local_max = partial_max;
            for &e in &path.edges {
                counts[e] += 1;
                local_max = local_max.max(counts[e]);
            }
            choices[player] = j;
            descend(game, player + 1, counts, choices, local_max, best_sc, best);
            for &e in &path.edges {
                counts[e] -= 1;
            }
        }
        choices[player] = 0;
    }

    descend(game, 0, &mut counts, &mut choices, 0, &mut best_sc, &mut best);
    let routing = best.expect("a validated game has at least one profile");
    Ok((best_sc, routing))
}

/// Plain exhaustive scan over every profile; reference route for
/// [`optimal_social_cost`].
pub fn optimal_social_cost_exhaustive(
    game: &GameInstance,
    cap: u128,
) -> Result<(u32, Routing), AnalysisError> {
    ensure_within_cap(game, cap)?;
    let mut best: Option<(u32, Routing)> = None;
    for routing in ProfileIter::new(game) {
        let sc = congestion(game, &routing)?.max_congestion();
        match &best {
            Some((b, _)) if *b <= sc => {}
            _ => best = Some((sc, routing)),
        }
    }
    Ok(best.expect("a validated game has at least one profile"))
}

/// All Nash-routings under `model`, with their social costs, in
/// lexicographic profile order. Congestion counts are maintained
/// incrementally across the odometer scan.
pub fn enumerate_nash<S: CostScalar>(
    game: &GameInstance,
    model: CostModel,
    cap: u128,
) -> Result<Vec<(Routing, u32)>, AnalysisError> {
    ensure_within_cap(game, cap)?;
    let n = game.player_count();
    let mut out = Vec::new();

    let mut choices = vec![0usize; n];
    let mut counts = vec![0u32; game.edge_count()];
    for i in 0..n {
        for &e in &game.players()[i].strategies[0].edges {
            counts[e] += 1;
        }
    }

    loop {
        let routing = Routing::new(choices.clone());
        let mut stable = true;
        for player in 0..n {
            if best_response_from_counts::<S>(game, &routing, player, model, &counts)?.is_some() {
                stable = false;
                break;
            }
        }
        if stable {
            let sc = counts.iter().copied().max().unwrap_or(0);
            out.push((routing, sc));
        }

        // advance the odometer, patching counts for the players whose
        // choice changed
        let mut pos = n;
        let mut advanced = false;
        while pos > 0 {
            pos -= 1;
            let old = choices[pos];
            for &e in &game.players()[pos].strategies[old].edges {
                counts[e] -= 1;
            }
            let next = old + 1;
            if next < game.players()[pos].strategies.len() {
                choices[pos] = next;
                for &e in &game.players()[pos].strategies[next].edges {
                    counts[e] += 1;
                }
                advanced = true;
                break;
            }
            choices[pos] = 0;
            for &e in &game.players()[pos].strategies[0].edges {
                counts[e] += 1;
            }
        }
        if !advanced {
            break;
        }
    }
    Ok(out)
}

/// Exact Price of Anarchy: worst Nash social cost over the optimum.
pub fn price_of_anarchy<S: CostScalar>(
    game: &GameInstance,
    model: CostModel,
    cap: u128,
) -> Result<Rational, AnalysisError> {
    let nash = enumerate_nash::<S>(game, model, cap)?;
    let worst = nash.iter().map(|&(_, sc)| sc).max().ok_or(AnalysisError::NoEquilibrium)?;
    let (optimum, _) = optimal_social_cost(game, cap)?;
    Ok(Rational::new(BigInt::from(worst), BigInt::from(optimum)))
}

/// Exact Price of Stability: best Nash social cost over the optimum.
pub fn price_of_stability<S: CostScalar>(
    game: &GameInstance,
    model: CostModel,
    cap: u128,
) -> Result<Rational, AnalysisError> {
    let nash = enumerate_nash::<S>(game, model, cap)?;
    let best = nash.iter().map(|&(_, sc)| sc).min().ok_or(AnalysisError::NoEquilibrium)?;
    let (optimum, _) = optimal_social_cost(game, cap)?;
    Ok(Rational::new(BigInt::from(best), BigInt::from(optimum)))
}

/// Result of checking a PoA value against the guarded log-product form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub alpha: Rational,
    /// `alpha * (1 + floor(log2 L)) * (1 + floor(log2 |E|))`
    pub threshold: Rational,
    pub holds: bool,
    /// `threshold - poa`; negative when violated.
    pub margin: Rational,
}

fn floor_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    63 - x.leading_zeros().min(63)
}

/// Evaluates `poa <= alpha * (1 + log2 L) * (1 + log2 |E|)` with integer
/// floor logs, so the check is exact rational arithmetic. The `1 +`
/// guards keep the threshold positive even for L = 1 or |E| = 1.
pub fn poa_bound_check(game: &GameInstance, poa: &Rational, alpha: Rational) -> BoundCheck {
    let log_l = floor_log2(game.max_path_len().max(1) as u64);
    let log_e = floor_log2(game.edge_count().max(1) as u64);
    let factor = BigInt::from((1 + log_l) as u64 * (1 + log_e) as u64);
    let threshold = alpha.clone() * Rational::from(factor);
    let margin = threshold.clone() - poa.clone();
    BoundCheck { alpha, threshold: threshold.clone(), holds: *poa <= threshold, margin }
}

/// Everything `analyze` produces for one instance under one model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub model: CostModel,
    pub profile_count: u128,
    pub optimal_sc: u32,
    pub optimal_routing: Routing,
    pub nash_routings: Vec<(Routing, u32)>,
    pub poa: Rational,
    pub pos: Rational,
    pub bound: Option<BoundCheck>,
}

/// Runs the full analysis pipeline. The bound check is attached only
/// under the exponential model, where the log-product form applies.
pub fn analyze<S: CostScalar>(
    game: &GameInstance,
    model: CostModel,
    cap: u128,
    alpha: Rational,
) -> Result<AnalysisReport, AnalysisError> {
    let profiles = ensure_within_cap(game, cap)?;
    let nash_routings = enumerate_nash::<S>(game, model, cap)?;
    if nash_routings.is_empty() {
        return Err(AnalysisError::NoEquilibrium);
    }
    let (optimal_sc, optimal_routing) = optimal_social_cost(game, cap)?;
    let worst = nash_routings.iter().map(|&(_, sc)| sc).max().unwrap();
    let best = nash_routings.iter().map(|&(_, sc)| sc).min().unwrap();
    let poa = Rational::new(BigInt::from(worst), BigInt::from(optimal_sc));
    let pos = Rational::new(BigInt::from(best), BigInt::from(optimal_sc));
    let bound = match model {
        CostModel::Exponential => Some(poa_bound_check(game, &poa, alpha)),
        _ => None,
    };
    Ok(AnalysisReport {
        model,
        profile_count: profiles,
        optimal_sc,
        optimal_routing,
        nash_routings,
        poa,
        pos,
        bound,
    })
}
