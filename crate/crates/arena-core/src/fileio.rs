//! Text formats for instances, routings, traces and analysis reports.
//!
//! Everything is line-oriented, diff-friendly and byte-stable: a writer
//! followed by the matching reader round-trips exactly, and numbers are
//! printed in full decimal so exact equality survives serialization.
//!
//! Instance format (`#` starts a comment, blank lines are skipped):
//!
//! ```text
//! arena-instance v1
//! name fig2-k3
//! generator fig2 k=3
//! graph 6 undirected
//! edge 0 1
//! edge 0 2
//! ...
//! player 0 1
//! path 0
//! path 1 2 3
//! player 0 1
//! auto 3
//! ```
//!
//! `edge a b` lines assign dense edge ids in order of appearance. Each
//! `player src dst` opens a player block whose strategies are either
//! explicit `path e0 e1 ...` lines or a single `auto max_len` directive
//! that materializes every simple path up to that length.

use crate::analysis::{AnalysisReport, BoundCheck};
use crate::dynamics::{DynamicsTrace, MoveRecord};
use crate::game::{CostModel, GameInstance, Routing};
use crate::graph::{enumerate_simple_paths, Graph, Path};
use crate::{ExactCost, Rational};
use num_bigint::BigInt;
use std::fmt::Write as _;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
}

fn parse_error(line: usize, message: impl Into<String>) -> FileError {
    FileError::Parse { line, message: message.into() }
}

/// Metadata carried alongside a parsed instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceMeta {
    pub name: Option<String>,
    pub generator: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct LoadedInstance {
    pub instance: GameInstance,
    pub meta: InstanceMeta,
}

fn parse_number<T: FromStr>(token: &str, line: usize, what: &str) -> Result<T, FileError> {
    token
        .parse::<T>()
        .map_err(|_| parse_error(line, format!("invalid {what}: '{token}'")))
}

/// Parses the instance format from a string. Errors carry 1-based line
/// numbers.
pub fn parse_instance(text: &str) -> Result<LoadedInstance, FileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) =
        lines.next().ok_or_else(|| parse_error(0, "empty file, expected 'arena-instance v1'"))?;
    if header != "arena-instance v1" {
        return Err(parse_error(line, format!("expected 'arena-instance v1', got '{header}'")));
    }

    let mut meta = InstanceMeta::default();
    let mut graph: Option<Graph> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut graph_header: Option<(usize, usize, bool)> = None; // (line, nodes, directed)
    enum PlayerStrategies {
        Explicit(Vec<Vec<usize>>),
        Auto(usize),
    }
    let mut players: Vec<(usize, usize, PlayerStrategies, usize)> = Vec::new();

    for (line, raw) in lines {
        let mut tokens = raw.split_whitespace();
        let keyword = tokens.next().expect("non-empty after trim");
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "name" => {
                meta.name = Some(rest.join(" "));
            }
            "generator" => {
                meta.generator = Some(rest.join(" "));
            }
            "seed" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "seed takes one value"));
                };
                meta.seed = Some(parse_number(token, line, "seed")?);
            }
            "graph" => {
                if graph_header.is_some() {
                    return Err(parse_error(line, "duplicate graph section"));
                }
                let [nodes, direction] = rest.as_slice() else {
                    return Err(parse_error(line, "expected 'graph <nodes> <directed|undirected>'"));
                };
                let nodes: usize = parse_number(nodes, line, "node count")?;
                let directed = match *direction {
                    "directed" => true,
                    "undirected" => false,
                    other => {
                        return Err(parse_error(
                            line,
                            format!("expected 'directed' or 'undirected', got '{other}'"),
                        ))
                    }
                };
                graph_header = Some((line, nodes, directed));
            }
            "edge" => {
                if graph_header.is_none() {
                    return Err(parse_error(line, "edge before graph header"));
                }
                if !players.is_empty() {
                    return Err(parse_error(line, "edge after player sections"));
                }
                let [a, b] = rest.as_slice() else {
                    return Err(parse_error(line, "expected 'edge <a> <b>'"));
                };
                edges.push((
                    parse_number(a, line, "node id")?,
                    parse_number(b, line, "node id")?,
                ));
            }
            "player" => {
                if graph.is_none() {
                    let Some((gline, nodes, directed)) = graph_header else {
                        return Err(parse_error(line, "player before graph section"));
                    };
                    graph = Some(Graph::new(nodes, std::mem::take(&mut edges), directed).map_err(
                        |e| parse_error(gline, format!("invalid graph: {e}")),
                    )?);
                }
                let [src, dst] = rest.as_slice() else {
                    return Err(parse_error(line, "expected 'player <source> <target>'"));
                };
                players.push((
                    parse_number(src, line, "node id")?,
                    parse_number(dst, line, "node id")?,
                    PlayerStrategies::Explicit(Vec::new()),
                    line,
                ));
            }
            "path" => {
                let Some(player) = players.last_mut() else {
                    return Err(parse_error(line, "path outside a player section"));
                };
                let mut ids = Vec::with_capacity(rest.len());
                for token in &rest {
                    ids.push(parse_number(token, line, "edge id")?);
                }
                if ids.is_empty() {
                    return Err(parse_error(line, "path needs at least one edge id"));
                }
                match &mut player.2 {
                    PlayerStrategies::Explicit(paths) => paths.push(ids),
                    PlayerStrategies::Auto(_) => {
                        return Err(parse_error(line, "path after auto directive"))
                    }
                }
            }
            "auto" => {
                let Some(player) = players.last_mut() else {
                    return Err(parse_error(line, "auto outside a player section"));
                };
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "expected 'auto <max_len>'"));
                };
                match &player.2 {
                    PlayerStrategies::Explicit(paths) if !paths.is_empty() => {
                        return Err(parse_error(line, "auto after explicit paths"))
                    }
                    PlayerStrategies::Auto(_) => {
                        return Err(parse_error(line, "duplicate auto directive"))
                    }
                    _ => {}
                }
                player.2 = PlayerStrategies::Auto(parse_number(token, line, "max_len")?);
            }
            other => {
                return Err(parse_error(line, format!("unknown keyword '{other}'")));
            }
        }
    }

    if graph.is_none() {
        let Some((gline, nodes, directed)) = graph_header else {
            return Err(parse_error(0, "missing graph section"));
        };
        graph =
            Some(Graph::new(nodes, std::mem::take(&mut edges), directed).map_err(|e| {
                parse_error(gline, format!("invalid graph: {e}"))
            })?);
    }
    let graph = graph.expect("set above");

    let mut players_spec = Vec::new();
    let mut player_lines = Vec::new();
    for (src, dst, strategies, pline) in players {
        let paths = match strategies {
            PlayerStrategies::Explicit(lists) => {
                if lists.is_empty() {
                    return Err(parse_error(pline, "player has no strategies"));
                }
                lists.into_iter().map(|edges| Path::new(edges, src, dst)).collect()
            }
            PlayerStrategies::Auto(max_len) => enumerate_simple_paths(&graph, src, dst, max_len)
                .map_err(|e| parse_error(pline, format!("auto enumeration failed: {e}")))?,
        };
        players_spec.push((src, dst, paths));
        player_lines.push(pline);
    }

    let instance = GameInstance::new(graph, players_spec).map_err(|e| {
        // anchor validation failures to the offending player line
        use crate::game::GameError::*;
        let player = match &e {
            SourceEqualsDestination { player, .. }
            | EmptyStrategySet { player }
            | InvalidStrategyPath { player, .. }
            | StrategyEndpointMismatch { player, .. }
            | DuplicateStrategy { player, .. } => Some(*player),
            _ => None,
        };
        match player.and_then(|p| player_lines.get(p)) {
            Some(&line) => parse_error(line, e.to_string()),
            None => FileError::Game(e),
        }
    })?;
    Ok(LoadedInstance { instance, meta })
}

/// Canonical writer for the instance format; output is byte-stable for a
/// given instance and metadata.
pub fn write_instance(instance: &GameInstance, meta: &InstanceMeta) -> String {
    let mut out = String::new();
    out.push_str("arena-instance v1\n");
    if let Some(name) = &meta.name {
        let _ = writeln!(out, "name {name}");
    }
    if let Some(generator) = &meta.generator {
        let _ = writeln!(out, "generator {generator}");
    }
    if let Some(seed) = meta.seed {
        let _ = writeln!(out, "seed {seed}");
    }
    let graph = instance.graph();
    let _ = writeln!(
        out,
        "graph {} {}",
        graph.node_count(),
        if graph.is_directed() { "directed" } else { "undirected" }
    );
    for &(a, b) in graph.edges() {
        let _ = writeln!(out, "edge {a} {b}");
    }
    for player in instance.players() {
        let _ = writeln!(out, "player {} {}", player.source, player.target);
        for path in &player.strategies {
            out.push_str("path");
            for e in &path.edges {
                let _ = write!(out, " {e}");
            }
            out.push('\n');
        }
    }
    out
}

/// Routing sidecar: `arena-routing v1` then one `choices` line.
pub fn write_routing(routing: &Routing) -> String {
    let mut out = String::from("arena-routing v1\nchoices");
    for c in &routing.choices {
        let _ = write!(out, " {c}");
    }
    out.push('\n');
    out
}

pub fn parse_routing(text: &str) -> Result<Routing, FileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) =
        lines.next().ok_or_else(|| parse_error(0, "empty file, expected 'arena-routing v1'"))?;
    if header != "arena-routing v1" {
        return Err(parse_error(line, format!("expected 'arena-routing v1', got '{header}'")));
    }
    let (line, choices_line) =
        lines.next().ok_or_else(|| parse_error(line, "missing choices line"))?;
    let mut tokens = choices_line.split_whitespace();
    if tokens.next() != Some("choices") {
        return Err(parse_error(line, "expected 'choices <c0> <c1> ...'"));
    }
    let mut choices = Vec::new();
    for token in tokens {
        choices.push(parse_number(token, line, "choice")?);
    }
    if let Some((line, extra)) = lines.next() {
        return Err(parse_error(line, format!("unexpected trailing content '{extra}'")));
    }
    Ok(Routing::new(choices))
}

/// Trace file: comma-separated with a header row, full-decimal numbers.
pub fn write_trace(trace: &DynamicsTrace<ExactCost>) -> String {
    let mut out = String::from(
        "step,player,from,to,pc_before,pc_after,potential_before,potential_after\n",
    );
    for (step, record) in trace.moves.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            step,
            record.player,
            record.from_choice,
            record.to_choice,
            record.pc_before,
            record.pc_after,
            record.potential_before,
            record.potential_after
        );
    }
    out
}

/// Reads back a trace written by [`write_trace`].
pub fn parse_trace(text: &str) -> Result<Vec<MoveRecord<ExactCost>>, FileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (line, header) = lines.next().ok_or_else(|| parse_error(0, "empty trace"))?;
    if header != "step,player,from,to,pc_before,pc_after,potential_before,potential_after" {
        return Err(parse_error(line, "bad trace header"));
    }
    let mut moves = Vec::new();
    for (line, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        let [step, player, from, to, pc_before, pc_after, pot_before, pot_after] =
            fields.as_slice()
        else {
            return Err(parse_error(line, format!("expected 8 fields, got {}", fields.len())));
        };
        let step: usize = parse_number(step, line, "step")?;
        if step != moves.len() {
            return Err(parse_error(line, format!("expected step {}, got {step}", moves.len())));
        }
        let big = |token: &str| -> Result<ExactCost, FileError> {
            token
                .parse::<ExactCost>()
                .map_err(|_| parse_error(line, format!("invalid number '{token}'")))
        };
        moves.push(MoveRecord {
            player: parse_number(player, line, "player")?,
            from_choice: parse_number(from, line, "from")?,
            to_choice: parse_number(to, line, "to")?,
            pc_before: big(pc_before)?,
            pc_after: big(pc_after)?,
            potential_before: big(pot_before)?,
            potential_after: big(pot_after)?,
        });
    }
    Ok(moves)
}

fn write_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

fn parse_rational(token: &str, line: usize) -> Result<Rational, FileError> {
    let (n, d) = token
        .split_once('/')
        .ok_or_else(|| parse_error(line, format!("invalid rational '{token}'")))?;
    let n = BigInt::from_str(n).map_err(|_| parse_error(line, format!("invalid rational '{token}'")))?;
    let d = BigInt::from_str(d).map_err(|_| parse_error(line, format!("invalid rational '{token}'")))?;
    if d <= BigInt::from(0) {
        return Err(parse_error(line, format!("rational '{token}' needs a positive denominator")));
    }
    Ok(Rational::new(n, d))
}

/// Analysis report document.
pub fn write_report(name: &str, report: &AnalysisReport) -> String {
    let mut out = String::new();
    out.push_str("arena-report v1\n");
    let _ = writeln!(out, "instance {name}");
    let _ = writeln!(out, "model {}", report.model);
    let _ = writeln!(out, "profiles {}", report.profile_count);
    let _ = writeln!(out, "optimal-sc {}", report.optimal_sc);
    out.push_str("optimal-choices");
    for c in &report.optimal_routing.choices {
        let _ = write!(out, " {c}");
    }
    out.push('\n');
    let _ = writeln!(out, "nash-count {}", report.nash_routings.len());
    for (routing, sc) in &report.nash_routings {
        let _ = write!(out, "nash {sc}");
        for c in &routing.choices {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "poa {}", write_rational(&report.poa));
    let _ = writeln!(out, "pos {}", write_rational(&report.pos));
    if let Some(bound) = &report.bound {
        let _ = writeln!(out, "bound-alpha {}", write_rational(&bound.alpha));
        let _ = writeln!(out, "bound-threshold {}", write_rational(&bound.threshold));
        let _ = writeln!(out, "bound-holds {}", bound.holds);
        let _ = writeln!(out, "bound-margin {}", write_rational(&bound.margin));
    }
    out
}

/// The parts of a report needed to re-verify it against an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedReport {
    pub instance_name: String,
    pub model: CostModel,
    pub profile_count: u128,
    pub optimal_sc: u32,
    pub optimal_routing: Routing,
    pub nash_routings: Vec<(Routing, u32)>,
    pub poa: Rational,
    pub pos: Rational,
    pub bound: Option<BoundCheck>,
}

pub fn parse_report(text: &str) -> Result<ParsedReport, FileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) =
        lines.next().ok_or_else(|| parse_error(0, "empty file, expected 'arena-report v1'"))?;
    if header != "arena-report v1" {
        return Err(parse_error(line, format!("expected 'arena-report v1', got '{header}'")));
    }

    let mut instance_name = None;
    let mut model = None;
    let mut profile_count = None;
    let mut optimal_sc = None;
    let mut optimal_routing = None;
    let mut nash_routings: Vec<(Routing, u32)> = Vec::new();
    let mut poa = None;
    let mut pos = None;
    let mut bound_alpha = None;
    let mut bound_threshold = None;
    let mut bound_holds = None;
    let mut bound_margin = None;

    for (line, raw) in lines {
        let mut tokens = raw.split_whitespace();
        let keyword = tokens.next().expect("non-empty");
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "instance" => instance_name = Some(rest.join(" ")),
            "model" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "model takes one value"));
                };
                model = Some(parse_cost_model(token).ok_or_else(|| {
                    parse_error(line, format!("unknown cost model '{token}'"))
                })?);
            }
            "profiles" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "profiles takes one value"));
                };
                profile_count = Some(parse_number(token, line, "profile count")?);
            }
            "optimal-sc" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "optimal-sc takes one value"));
                };
                optimal_sc = Some(parse_number(token, line, "social cost")?);
            }
            "optimal-choices" => {
                let mut choices = Vec::new();
                for token in &rest {
                    choices.push(parse_number(token, line, "choice")?);
                }
                optimal_routing = Some(Routing::new(choices));
            }
            "nash-count" => {}
            "nash" => {
                let Some((sc, choice_tokens)) = rest.split_first() else {
                    return Err(parse_error(line, "expected 'nash <sc> <choices...>'"));
                };
                let sc: u32 = parse_number(sc, line, "social cost")?;
                let mut choices = Vec::new();
                for token in choice_tokens {
                    choices.push(parse_number(token, line, "choice")?);
                }
                nash_routings.push((Routing::new(choices), sc));
            }
            "poa" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "poa takes one value"));
                };
                poa = Some(parse_rational(token, line)?);
            }
            "pos" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "pos takes one value"));
                };
                pos = Some(parse_rational(token, line)?);
            }
            "bound-alpha" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "bound-alpha takes one value"));
                };
                bound_alpha = Some(parse_rational(token, line)?);
            }
            "bound-threshold" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "bound-threshold takes one value"));
                };
                bound_threshold = Some(parse_rational(token, line)?);
            }
            "bound-holds" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "bound-holds takes one value"));
                };
                bound_holds = Some(match *token {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(parse_error(line, format!("invalid boolean '{other}'")))
                    }
                });
            }
            "bound-margin" => {
                let [token] = rest.as_slice() else {
                    return Err(parse_error(line, "bound-margin takes one value"));
                };
                bound_margin = Some(parse_rational(token, line)?);
            }
            other => return Err(parse_error(line, format!("unknown keyword '{other}'"))),
        }
    }

    let bound = match (bound_alpha, bound_threshold, bound_holds, bound_margin) {
        (Some(alpha), Some(threshold), Some(holds), Some(margin)) => {
            Some(BoundCheck { alpha, threshold, holds, margin })
        }
        (None, None, None, None) => None,
        _ => return Err(parse_error(0, "incomplete bound block")),
    };
    Ok(ParsedReport {
        instance_name: instance_name.ok_or_else(|| parse_error(0, "missing instance line"))?,
        model: model.ok_or_else(|| parse_error(0, "missing model line"))?,
        profile_count: profile_count.ok_or_else(|| parse_error(0, "missing profiles line"))?,
        optimal_sc: optimal_sc.ok_or_else(|| parse_error(0, "missing optimal-sc line"))?,
        optimal_routing: optimal_routing
            .ok_or_else(|| parse_error(0, "missing optimal-choices line"))?,
        nash_routings,
        poa: poa.ok_or_else(|| parse_error(0, "missing poa line"))?,
        pos: pos.ok_or_else(|| parse_error(0, "missing pos line"))?,
        bound,
    })
}

/// Parses the CLI's cost-model token: `exp`, `max`, `linear` or `poly:d`.
pub fn parse_cost_model(token: &str) -> Option<CostModel> {
    match token {
        "exp" => Some(CostModel::Exponential),
        "max" => Some(CostModel::BottleneckMax),
        "linear" => Some(CostModel::LinearSum),
        _ => {
            let degree = token.strip_prefix("poly:")?.parse().ok()?;
            Some(CostModel::PolynomialSum { degree })
        }
    }
}

/// Reads a file into a string with path context on error.
pub fn read_to_string(path: &FsPath) -> Result<String, FileError> {
    std::fs::read_to_string(path)
        .map_err(|source| FileError::Io { path: path.to_path_buf(), source })
}

/// Writes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &FsPath, contents: &str) -> Result<(), FileError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)
        .map_err(|source| FileError::Io { path: tmp.clone(), source })?;
    std::fs::rename(&tmp, path)
        .map_err(|source| FileError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, DEFAULT_PROFILE_CAP};
    use crate::dynamics::{run_best_response, Schedule};
    use crate::generators::{gen_fig2, gen_multi_nash_witness, gen_random};
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn instance_round_trip_is_exact() {
        for generated in [
            gen_fig2(3).unwrap(),
            gen_multi_nash_witness().unwrap(),
            gen_random(6, 8, 3, 3, 11).unwrap(),
        ] {
            let meta = InstanceMeta {
                name: Some(generated.name.clone()),
                generator: Some(generated.spec.to_string()),
                seed: None,
            };
            let text = write_instance(&generated.instance, &meta);
            let loaded = parse_instance(&text).unwrap();
            assert_eq!(loaded.instance, generated.instance);
            assert_eq!(loaded.meta, meta);
            // writer is stable
            assert_eq!(write_instance(&loaded.instance, &loaded.meta), text);
        }
    }

    #[test]
    fn auto_directive_materializes_paths() {
        let text = "arena-instance v1\n\
                    graph 3 undirected\n\
                    edge 0 1\n\
                    edge 1 2\n\
                    edge 0 2\n\
                    player 0 2\n\
                    auto 2\n";
        let loaded = parse_instance(text).unwrap();
        let strategies = &loaded.instance.players()[0].strategies;
        assert_eq!(strategies.len(), 2);
        assert_eq!(strategies[0].edges, vec![2]);
        assert_eq!(strategies[1].edges, vec![0, 1]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_keyword = "arena-instance v1\ngraph 2 undirected\nedge 0 1\nwat 1\n";
        match parse_instance(bad_keyword) {
            Err(FileError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_edge = "arena-instance v1\ngraph 2 undirected\nedge 0 5\nplayer 0 1\npath 0\n";
        match parse_instance(bad_edge) {
            Err(FileError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let no_paths = "arena-instance v1\ngraph 2 undirected\nedge 0 1\nplayer 0 1\n";
        match parse_instance(no_paths) {
            Err(FileError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        // instance-level validation failures point at the player line
        let bad_walk =
            "arena-instance v1\ngraph 3 undirected\nedge 0 1\nedge 1 2\nplayer 0 2\npath 1\n";
        match parse_instance(bad_walk) {
            Err(FileError::Parse { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("not a valid path"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let degenerate =
            "arena-instance v1\ngraph 2 undirected\nedge 0 1\nplayer 1 1\npath 0\n";
        match parse_instance(degenerate) {
            Err(FileError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn directed_instances_round_trip() {
        let text = "arena-instance v1\n\
                    graph 3 directed\n\
                    edge 0 1\n\
                    edge 1 2\n\
                    edge 2 0\n\
                    player 0 2\n\
                    auto 2\n";
        let loaded = parse_instance(text).unwrap();
        assert!(loaded.instance.graph().is_directed());
        assert_eq!(loaded.instance.players()[0].strategies.len(), 1);
        let written = write_instance(&loaded.instance, &loaded.meta);
        assert_eq!(parse_instance(&written).unwrap().instance, loaded.instance);
    }

    #[test]
    fn routing_round_trip() {
        let routing = Routing::new(vec![0, 3, 1]);
        let text = write_routing(&routing);
        assert_eq!(parse_routing(&text).unwrap(), routing);
        assert!(parse_routing("arena-routing v1\nchoices 0 x\n").is_err());
    }

    #[test]
    fn trace_round_trip_and_replay() {
        let generated = gen_fig2(4).unwrap();
        let game = &generated.instance;
        let trace = run_best_response::<ExactCost>(
            game,
            &Routing::all_zero(4),
            crate::game::CostModel::Exponential,
            Schedule::RoundRobin,
            None,
        )
        .unwrap();
        assert!(!trace.moves.is_empty());
        let text = write_trace(&trace);
        let moves = parse_trace(&text).unwrap();
        assert_eq!(moves, trace.moves);
        // replay: apply each recorded move and re-derive the potentials
        let mut replay = trace.initial.clone();
        for record in &moves {
            let before: ExactCost = crate::game::potential(game, &replay).unwrap();
            assert_eq!(before, record.potential_before);
            assert_eq!(replay.choices[record.player], record.from_choice);
            replay.choices[record.player] = record.to_choice;
            let after: ExactCost = crate::game::potential(game, &replay).unwrap();
            assert_eq!(after, record.potential_after);
        }
        assert_eq!(replay, trace.final_routing);
    }

    #[test]
    fn report_round_trip() {
        let generated = gen_fig2(3).unwrap();
        let report = analyze::<ExactCost>(
            &generated.instance,
            crate::game::CostModel::Exponential,
            DEFAULT_PROFILE_CAP,
            ratio(10, 1),
        )
        .unwrap();
        let text = write_report(&generated.name, &report);
        let parsed = parse_report(&text).unwrap();
        assert_eq!(parsed.instance_name, generated.name);
        assert_eq!(parsed.model, report.model);
        assert_eq!(parsed.profile_count, report.profile_count);
        assert_eq!(parsed.optimal_sc, report.optimal_sc);
        assert_eq!(parsed.optimal_routing, report.optimal_routing);
        assert_eq!(parsed.nash_routings, report.nash_routings);
        assert_eq!(parsed.poa, report.poa);
        assert_eq!(parsed.pos, report.pos);
        assert_eq!(parsed.bound, report.bound);
    }

    #[test]
    fn cost_model_tokens() {
        assert_eq!(parse_cost_model("exp"), Some(CostModel::Exponential));
        assert_eq!(parse_cost_model("max"), Some(CostModel::BottleneckMax));
        assert_eq!(parse_cost_model("linear"), Some(CostModel::LinearSum));
        assert_eq!(
            parse_cost_model("poly:3"),
            Some(CostModel::PolynomialSum { degree: 3 })
        );
        assert_eq!(parse_cost_model("poly:x"), None);
        assert_eq!(parse_cost_model("nope"), None);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, "first\n").unwrap();
        write_atomic(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert!(!path.with_extension("tmp").exists());
    }
}
