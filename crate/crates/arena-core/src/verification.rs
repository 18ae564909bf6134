//! Self-contained verification battery.
//!
//! Six checks over generated instances: the exact potential-decrement
//! identity, guaranteed convergence of exponential dynamics, the
//! linear-cost anarchy family, the multiple-equilibrium witness,
//! agreement between the incremental Nash enumeration and an independent
//! from-scratch double loop, and the log-product anarchy bound. Each
//! check reports one stable pass/fail line; the manifest carries no
//! timings or machine state, so two runs on the same build are
//! byte-identical.

use crate::analysis::{analyze, enumerate_nash, poa_bound_check, profile_count, ProfileIter};
use crate::dynamics::{is_nash, run_best_response, verify_potential_identity, Schedule};
use crate::game::{player_cost, social_cost, CostModel, GameInstance, Routing};
use crate::generators::{
    gen_expansion_chain, gen_fig2, gen_multi_nash_witness, gen_random, Generated,
};
use crate::{ExactCost, NativeCost, Rational};
use num_bigint::{BigInt, BigUint};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const IDENTITY_SUITE_SEED: u64 = 0x4c45_4d4d_4131;
const CONV_SUITE_SEED: u64 = 0x434f_4e56_3232;
const SUITE_PROFILE_LIMIT: u128 = 100_000;
const BOUND_ALPHA: u64 = 10;

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Deterministic counters and, on failure, what went wrong.
    pub detail: String,
    /// Wall-clock cost of the check; never serialized into the manifest.
    pub elapsed: std::time::Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatteryReport {
    pub results: Vec<CriterionResult>,
}

impl BatteryReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failed_names(&self) -> Vec<String> {
        self.results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("criterion {} ({})", r.id, r.name))
            .collect()
    }
}

/// One stable line per criterion plus a trailing summary line.
pub fn write_manifest(report: &BatteryReport) -> String {
    use std::fmt::Write;
    let mut out = String::from("arena-verify v1\n");
    for r in &report.results {
        let _ = writeln!(
            out,
            "criterion {} {} {} {}",
            r.id,
            r.name,
            if r.passed { "pass" } else { "FAIL" },
            r.detail
        );
    }
    let _ = writeln!(out, "result {}", if report.all_passed() { "pass" } else { "FAIL" });
    out
}

/// Deterministic random suite within the small-instance bounds (at most
/// 6 nodes, 12 edges, 5 players, path length 4). Draws whose profile
/// space would bog down the exhaustive cross-checks are redrawn, so
/// every suite instance stays enumerable.
fn random_suite(seed_base: u64, count: u64) -> Vec<Generated> {
    let mut suite = Vec::with_capacity(count as usize);
    for index in 0..count {
        let mut params =
            ChaCha8Rng::seed_from_u64(seed_base ^ index.wrapping_mul(0x517c_c1b7_2722_0a95));
        for attempt in 0..1000u64 {
            let nodes: u32 = params.gen_range(4..=6);
            let max_edges = (nodes * (nodes - 1) / 2).min(12);
            let edges: u32 = params.gen_range(nodes - 1..=max_edges);
            let players: u32 = params.gen_range(2..=5);
            let max_len: u32 = params.gen_range(2..=4);
            let seed = seed_base.wrapping_add(index.wrapping_mul(1000)).wrapping_add(attempt);
            let Ok(generated) = gen_random(nodes, edges, players, max_len, seed) else {
                continue;
            };
            match profile_count(&generated.instance) {
                Some(profiles) if profiles <= 20_000 => {
                    suite.push(generated);
                    break;
                }
                _ => continue,
            }
        }
    }
    suite
}

fn random_routing(game: &GameInstance, rng: &mut ChaCha8Rng) -> Routing {
    Routing::new(
        game.players().iter().map(|p| rng.gen_range(0..p.strategies.len())).collect(),
    )
}

fn ratio(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Criterion 1: every greedy move under the exponential model satisfies
/// the exact decrement identity and strictly lowers both the mover's
/// cost and the potential, over at least 1000 moves from 50 seeded
/// instances.
fn criterion_potential_identity(suite: &[Generated]) -> (CriterionResult, Vec<(usize, Routing)>) {
    let mut moves_checked: u64 = 0;
    let mut failures: Vec<String> = Vec::new();
    let mut endpoints = Vec::new();
    for (index, generated) in suite.iter().enumerate() {
        let game = &generated.instance;
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE ^ index as u64);
        for _run in 0..25 {
            let initial = random_routing(game, &mut rng);
            let trace = match run_best_response::<ExactCost>(
                game,
                &initial,
                CostModel::Exponential,
                Schedule::RoundRobin,
                None,
            ) {
                Ok(t) => t,
                Err(e) => {
                    failures.push(format!("{}: {e}", generated.name));
                    continue;
                }
            };
            if trace.converged {
                endpoints.push((index, trace.final_routing.clone()));
            }
            let mut before = initial.clone();
            for record in &trace.moves {
                let mut after = before.clone();
                after.choices[record.player] = record.to_choice;
                let identity =
                    verify_potential_identity::<ExactCost>(game, &before, &after, record.player)
                        .unwrap_or(false);
                let decreasing = record.potential_after < record.potential_before;
                let improving = record.pc_after < record.pc_before;
                if !(identity && decreasing && improving) {
                    failures.push(format!(
                        "{}: player {} identity={identity} decreasing={decreasing} improving={improving}",
                        generated.name, record.player
                    ));
                }
                moves_checked += 1;
                before = after;
            }
        }
    }
    let passed = failures.is_empty() && moves_checked >= 1000;
    let detail = if let Some(first) = failures.first() {
        format!("moves={moves_checked} first-failure=[{first}]")
    } else {
        format!("moves={moves_checked} instances={} min-required=1000", suite.len())
    };
    let result = CriterionResult {
        id: 1,
        name: "potential-identity",
        passed,
        detail,
        elapsed: std::time::Duration::ZERO,
    };
    (result, endpoints)
}

/// Criterion 2: from 100 random starts over 20 instances, exponential
/// best-response converges, within `potential(initial) - |E|` steps, to
/// a routing that independently verifies as a Nash-routing.
fn criterion_convergence(suite: &[Generated]) -> (CriterionResult, Vec<(usize, Routing)>) {
    let mut runs: u64 = 0;
    let mut failures: Vec<String> = Vec::new();
    let mut endpoints = Vec::new();
    for (index, generated) in suite.iter().enumerate() {
        let game = &generated.instance;
        let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF ^ index as u64);
        for _run in 0..5 {
            let initial = random_routing(game, &mut rng);
            runs += 1;
            let budget: BigUint = {
                let f: ExactCost = crate::game::potential(game, &initial).unwrap();
                f - BigUint::from(game.edge_count())
            };
            match run_best_response::<ExactCost>(
                game,
                &initial,
                CostModel::Exponential,
                Schedule::RoundRobin,
                None,
            ) {
                Ok(trace) => {
                    let steps = BigUint::from(trace.moves.len());
                    let nash =
                        is_nash::<ExactCost>(game, &trace.final_routing, CostModel::Exponential)
                            .unwrap_or(false);
                    if !(trace.converged && steps <= budget && nash) {
                        failures.push(format!(
                            "{}: converged={} steps={} budget={budget} nash={nash}",
                            generated.name,
                            trace.converged,
                            trace.moves.len()
                        ));
                    } else {
                        endpoints.push((index, trace.final_routing));
                    }
                }
                Err(e) => failures.push(format!("{}: {e}", generated.name)),
            }
        }
    }
    let passed = failures.is_empty() && runs >= 100;
    let detail = if let Some(first) = failures.first() {
        format!("runs={runs} first-failure=[{first}]")
    } else {
        format!("runs={runs} instances={}", suite.len())
    };
    let result = CriterionResult {
        id: 2,
        name: "convergence",
        passed,
        detail,
        elapsed: std::time::Duration::ZERO,
    };
    (result, endpoints)
}

/// Criterion 3: the anarchy family. For k in 3..=5, everyone on the
/// shared edge is a linear-sum equilibrium with social cost k against an
/// optimum of 1 (anarchy ratio at least k), and under the exponential
/// model the same profile is refuted by the exact 2^k versus 2k
/// comparison.
fn criterion_fig2() -> CriterionResult {
    let mut failures: Vec<String> = Vec::new();
    for k in [3u32, 4, 5] {
        let check = || -> Result<(), String> {
            let generated = gen_fig2(k).map_err(|e| e.to_string())?;
            let game = &generated.instance;
            let all_on_e = Routing::all_zero(k as usize);

            let linear_nash = is_nash::<ExactCost>(game, &all_on_e, CostModel::LinearSum)
                .map_err(|e| e.to_string())?;
            if !linear_nash {
                return Err("crowded profile not a linear-sum equilibrium".into());
            }
            let sc = social_cost(game, &all_on_e).map_err(|e| e.to_string())?;
            if sc != k {
                return Err(format!("crowded social cost {sc}, expected {k}"));
            }
            let (optimum, witness) =
                crate::analysis::optimal_social_cost(game, SUITE_PROFILE_LIMIT)
                    .map_err(|e| e.to_string())?;
            if optimum != 1 || social_cost(game, &witness).map_err(|e| e.to_string())? != 1 {
                return Err(format!("optimum {optimum}, expected 1"));
            }
            let poa = crate::analysis::price_of_anarchy::<NativeCost>(
                game,
                CostModel::LinearSum,
                SUITE_PROFILE_LIMIT,
            )
            .map_err(|e| e.to_string())?;
            if poa < ratio(k as u64, 1) {
                return Err(format!("linear-sum anarchy ratio {poa} below {k}"));
            }

            // exponential refutation, exact integers
            let exp_nash = is_nash::<ExactCost>(game, &all_on_e, CostModel::Exponential)
                .map_err(|e| e.to_string())?;
            if exp_nash {
                return Err("crowded profile wrongly stable under exponential".into());
            }
            let current: ExactCost =
                player_cost(game, &all_on_e, 0, CostModel::Exponential).map_err(|e| e.to_string())?;
            if current != BigUint::from(1u8) << k {
                return Err(format!("crowded cost {current}, expected 2^{k}"));
            }
            let mut deviated = all_on_e.clone();
            deviated.choices[0] = 1;
            let after: ExactCost =
                player_cost(game, &deviated, 0, CostModel::Exponential).map_err(|e| e.to_string())?;
            if after != BigUint::from(2 * k) {
                return Err(format!("detour cost {after}, expected {}", 2 * k));
            }
            Ok(())
        };
        if let Err(message) = check() {
            failures.push(format!("k={k}: {message}"));
        }
    }
    CriterionResult {
        id: 3,
        name: "fig2-family",
        passed: failures.is_empty(),
        detail: if let Some(first) = failures.first() {
            format!("first-failure=[{first}]")
        } else {
            "ks=3,4,5 checks=linear-nash,sc,optimum,poa,exp-refutation".into()
        },
        elapsed: std::time::Duration::ZERO,
    }
}

/// Criterion 4: the multiple-equilibrium witness enumerates to a Nash
/// set containing social cost 2 with player costs (4, 8, 6) and social
/// cost 1 with (2, 6, 6), giving anarchy 2 and stability 1 exactly.
fn criterion_witness() -> CriterionResult {
    let run = || -> Result<(), String> {
        let generated = gen_multi_nash_witness().map_err(|e| e.to_string())?;
        let game = &generated.instance;
        let nash = enumerate_nash::<ExactCost>(game, CostModel::Exponential, SUITE_PROFILE_LIMIT)
            .map_err(|e| e.to_string())?;
        let costs = |routing: &Routing| -> Result<Vec<BigUint>, String> {
            (0..3)
                .map(|i| {
                    player_cost::<ExactCost>(game, routing, i, CostModel::Exponential)
                        .map_err(|e| e.to_string())
                })
                .collect()
        };
        let want_high: Vec<BigUint> = [4u32, 8, 6].iter().map(|&c| BigUint::from(c)).collect();
        let want_low: Vec<BigUint> = [2u32, 6, 6].iter().map(|&c| BigUint::from(c)).collect();
        let mut high = false;
        let mut low = false;
        for (routing, sc) in &nash {
            if *sc == 2 && costs(routing)? == want_high {
                high = true;
            }
            if *sc == 1 && costs(routing)? == want_low {
                low = true;
            }
        }
        if !high {
            return Err("no equilibrium with social cost 2 and costs (4,8,6)".into());
        }
        if !low {
            return Err("no equilibrium with social cost 1 and costs (2,6,6)".into());
        }
        let poa = crate::analysis::price_of_anarchy::<ExactCost>(
            game,
            CostModel::Exponential,
            SUITE_PROFILE_LIMIT,
        )
        .map_err(|e| e.to_string())?;
        let pos = crate::analysis::price_of_stability::<ExactCost>(
            game,
            CostModel::Exponential,
            SUITE_PROFILE_LIMIT,
        )
        .map_err(|e| e.to_string())?;
        if poa != ratio(2, 1) || pos != ratio(1, 1) {
            return Err(format!("anarchy {poa} stability {pos}, expected 2 and 1"));
        }
        Ok(())
    };
    match run() {
        Ok(()) => CriterionResult {
            id: 4,
            name: "multi-nash-witness",
            passed: true,
            detail: "costs=(4,8,6)@sc2,(2,6,6)@sc1 poa=2/1 pos=1/1".into(),
            elapsed: std::time::Duration::ZERO,
        },
        Err(message) => CriterionResult {
            id: 4,
            name: "multi-nash-witness",
            passed: false,
            detail: format!("first-failure=[{message}]"),
            elapsed: std::time::Duration::ZERO,
        },
    }
}

/// Fully independent Nash oracle: plain double loop, from-scratch
/// congestion recounts, inline u128 arithmetic, no shared code with the
/// incremental enumeration.
fn oracle_cost(game: &GameInstance, routing: &Routing, player: usize, model: CostModel) -> u128 {
    let mut counts = vec![0u32; game.edge_count()];
    for i in 0..game.player_count() {
        for &e in &game.chosen_path(routing, i).edges {
            counts[e] += 1;
        }
    }
    let edges = &game.chosen_path(routing, player).edges;
    match model {
        CostModel::Exponential => edges.iter().map(|&e| 1u128 << counts[e]).sum(),
        CostModel::BottleneckMax => {
            edges.iter().map(|&e| counts[e]).max().unwrap_or(0) as u128
        }
        CostModel::LinearSum => edges.iter().map(|&e| counts[e] as u128).sum(),
        CostModel::PolynomialSum { degree } => {
            edges.iter().map(|&e| (counts[e] as u128).pow(degree)).sum()
        }
    }
}

fn oracle_nash_set(game: &GameInstance, model: CostModel) -> Vec<(Routing, u32)> {
    let mut out = Vec::new();
    for routing in ProfileIter::new(game) {
        let mut stable = true;
        'players: for player in 0..game.player_count() {
            let current = oracle_cost(game, &routing, player, model);
            for alt in 0..game.players()[player].strategies.len() {
                if alt == routing.choices[player] {
                    continue;
                }
                let mut deviated = routing.clone();
                deviated.choices[player] = alt;
                if oracle_cost(game, &deviated, player, model) < current {
                    stable = false;
                    break 'players;
                }
            }
        }
        if stable {
            let mut counts = vec![0u32; game.edge_count()];
            for i in 0..game.player_count() {
                for &e in &game.chosen_path(&routing, i).edges {
                    counts[e] += 1;
                }
            }
            let sc = counts.iter().copied().max().unwrap_or(0);
            out.push((routing, sc));
        }
    }
    out
}

/// Criterion 5: on every enumerable instance used by criteria 1-4, the
/// incremental enumeration equals the independent double loop, the
/// exponential Nash set is non-empty, and every converged dynamics
/// endpoint is a member.
fn criterion_oracle_agreement(
    groups: &[(&[Generated], &[(usize, Routing)], &[CostModel])],
) -> CriterionResult {
    let mut instances_checked: u64 = 0;
    let mut endpoints_checked: u64 = 0;
    let mut failures: Vec<String> = Vec::new();
    for (suite, endpoints, models) in groups {
        for (index, generated) in suite.iter().enumerate() {
            let game = &generated.instance;
            match profile_count(game) {
                Some(profiles) if profiles <= SUITE_PROFILE_LIMIT => {}
                _ => continue,
            }
            instances_checked += 1;
            for &model in *models {
                let incremental =
                    match enumerate_nash::<NativeCost>(game, model, SUITE_PROFILE_LIMIT) {
                        Ok(set) => set,
                        Err(e) => {
                            failures.push(format!("{}: {e}", generated.name));
                            continue;
                        }
                    };
                let oracle = oracle_nash_set(game, model);
                if incremental != oracle {
                    failures.push(format!(
                        "{}: {model} enumeration ({} routings) disagrees with oracle ({})",
                        generated.name,
                        incremental.len(),
                        oracle.len()
                    ));
                    continue;
                }
                if model == CostModel::Exponential {
                    if incremental.is_empty() {
                        failures.push(format!(
                            "{}: exponential Nash set is empty",
                            generated.name
                        ));
                    }
                    for (endpoint_index, endpoint) in *endpoints {
                        if endpoint_index == &index {
                            endpoints_checked += 1;
                            if !incremental.iter().any(|(r, _)| r == endpoint) {
                                failures.push(format!(
                                    "{}: converged endpoint missing from Nash set",
                                    generated.name
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    CriterionResult {
        id: 5,
        name: "oracle-agreement",
        passed: failures.is_empty(),
        detail: if let Some(first) = failures.first() {
            format!("first-failure=[{first}]")
        } else {
            format!("instances={instances_checked} endpoints={endpoints_checked}")
        },
        elapsed: std::time::Duration::ZERO,
    }
}

/// Criterion 6: exact anarchy ratios stay below
/// `10 * (1 + log2 L) * (1 + log2 |E|)` across the whole random suite,
/// and on each expansion chain the intended routing is an equilibrium
/// whose certified ratio obeys the same bound.
fn criterion_bound(suites: &[&[Generated]]) -> CriterionResult {
    let alpha = ratio(BOUND_ALPHA, 1);
    let mut instances: u64 = 0;
    let mut failures: Vec<String> = Vec::new();

    for suite in suites {
        for generated in *suite {
            let game = &generated.instance;
            instances += 1;
            match analyze::<NativeCost>(
                game,
                CostModel::Exponential,
                SUITE_PROFILE_LIMIT,
                alpha.clone(),
            ) {
                Ok(report) => {
                    let bound = report.bound.expect("exponential analysis carries the bound");
                    if !bound.holds {
                        failures.push(format!(
                            "{}: ratio {} exceeds threshold {}",
                            generated.name, report.poa, bound.threshold
                        ));
                    }
                }
                Err(e) => failures.push(format!("{}: {e}", generated.name)),
            }
        }
    }

    let mut chains: u64 = 0;
    for (c_hat, l_star) in [(6u32, 2u32), (7, 2), (8, 2), (8, 4)] {
        let check = || -> Result<(), String> {
            let (generated, stats) =
                gen_expansion_chain(c_hat, l_star).map_err(|e| e.to_string())?;
            let game = &generated.instance;
            if stats.total_edges > 10_000 {
                return Err(format!("chain has {} edges, over the 10^4 budget", stats.total_edges));
            }
            let intended = generated.intended.clone().expect("chains emit a routing");
            if !is_nash::<NativeCost>(game, &intended, CostModel::Exponential)
                .map_err(|e| e.to_string())?
            {
                return Err("intended routing is not an equilibrium".into());
            }
            let crowded = social_cost(game, &intended).map_err(|e| e.to_string())?;
            if crowded != c_hat {
                return Err(format!("intended social cost {crowded}, expected {c_hat}"));
            }
            // all-detours routing certifies the optimum is exactly 1
            let spread = Routing::new(
                game.players().iter().map(|p| p.strategies.len() - 1).collect(),
            );
            let spread_sc = social_cost(game, &spread).map_err(|e| e.to_string())?;
            if spread_sc != 1 {
                return Err(format!("spread social cost {spread_sc}, expected 1"));
            }
            let certified_ratio = ratio(c_hat as u64, 1);
            let check = poa_bound_check(game, &certified_ratio, alpha.clone());
            if !check.holds {
                return Err(format!(
                    "certified ratio {certified_ratio} exceeds threshold {}",
                    check.threshold
                ));
            }
            Ok(())
        };
        chains += 1;
        if let Err(message) = check() {
            failures.push(format!("chain c_hat={c_hat} l_star={l_star}: {message}"));
        }
    }

    CriterionResult {
        id: 6,
        name: "poa-bound",
        passed: failures.is_empty(),
        detail: if let Some(first) = failures.first() {
            format!("first-failure=[{first}]")
        } else {
            format!("instances={instances} chains={chains} alpha={BOUND_ALPHA}")
        },
        elapsed: std::time::Duration::ZERO,
    }
}

/// Runs the six in-process criteria. Byte-determinism of the manifest
/// across runs is the seventh criterion, checked from outside by running
/// this battery twice.
pub fn run_battery() -> BatteryReport {
    use std::time::Instant;

    let clock = Instant::now();
    let identity_suite = random_suite(IDENTITY_SUITE_SEED, 50);
    let (mut c1, identity_endpoints) = criterion_potential_identity(&identity_suite);
    c1.elapsed = clock.elapsed();

    let clock = Instant::now();
    let conv_suite = random_suite(CONV_SUITE_SEED, 20);
    let (mut c2, conv_endpoints) = criterion_convergence(&conv_suite);
    c2.elapsed = clock.elapsed();

    let clock = Instant::now();
    let mut c3 = criterion_fig2();
    c3.elapsed = clock.elapsed();

    let clock = Instant::now();
    let mut c4 = criterion_witness();
    c4.elapsed = clock.elapsed();

    let fig2_suite: Vec<Generated> =
        [3u32, 4, 5].iter().map(|&k| gen_fig2(k).expect("fig2 parameters are valid")).collect();
    let witness_suite: Vec<Generated> = match gen_multi_nash_witness() {
        Ok(generated) => vec![generated],
        Err(_) => Vec::new(), // criterion 4 already reports the failure
    };
    let exp_only = [CostModel::Exponential];
    let fig2_models = [CostModel::Exponential, CostModel::LinearSum];
    let no_endpoints: Vec<(usize, Routing)> = Vec::new();
    let groups: Vec<(&[Generated], &[(usize, Routing)], &[CostModel])> = vec![
        (&identity_suite, &identity_endpoints, &exp_only),
        (&conv_suite, &conv_endpoints, &exp_only),
        (&fig2_suite, &no_endpoints, &fig2_models),
        (&witness_suite, &no_endpoints, &exp_only),
    ];
    let clock = Instant::now();
    let mut c5 = criterion_oracle_agreement(&groups);
    c5.elapsed = clock.elapsed();

    let clock = Instant::now();
    let mut c6 = criterion_bound(&[&identity_suite, &conv_suite]);
    c6.elapsed = clock.elapsed();

    BatteryReport { results: vec![c1, c2, c3, c4, c5, c6] }
}
