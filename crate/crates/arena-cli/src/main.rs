//! `arena`: generate routing-game instances, run best-response dynamics,
//! compute exact equilibrium analyses, and run the verification battery.
//!
//! Exit codes are part of the contract:
//! 0 success (for `dynamics`: converged), 1 load/parse failure,
//! 2 invalid generator spec, 3 write failure, 4 non-convergence,
//! 5 instance too large, 6 no equilibrium, 7 failed verification.

use arena_core::analysis::{analyze, AnalysisError, DEFAULT_PROFILE_CAP};
use arena_core::dynamics::{run_best_response, trace_summary, DynamicsError, Schedule};
use arena_core::fileio::{
    parse_cost_model, parse_instance, parse_routing, read_to_string, write_atomic,
    write_instance, write_report, write_routing, write_trace, InstanceMeta,
};
use arena_core::game::{CostModel, GameInstance, Routing};
use arena_core::generators::{generate, GeneratorError, GeneratorSpec};
use arena_core::verification::{run_battery, write_manifest};
use arena_core::{ExactCost, Rational};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

const EXIT_LOAD: u8 = 1;
const EXIT_BAD_SPEC: u8 = 2;
const EXIT_WRITE: u8 = 3;
const EXIT_NON_CONVERGENCE: u8 = 4;
const EXIT_TOO_LARGE: u8 = 5;
const EXIT_NO_EQUILIBRIUM: u8 = 6;
const EXIT_VERIFY_FAILED: u8 = 7;

#[derive(Parser)]
#[command(name = "arena", version, about = "Atomic routing game analyzer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance (and its intended routing, if any).
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Run best-response dynamics on an instance file.
    Dynamics {
        instance: PathBuf,
        /// Cost model: exp | max | linear | poly:<d>
        #[arg(long, default_value = "exp")]
        model: String,
        /// Move schedule: rr | random:<seed>
        #[arg(long, default_value = "rr")]
        schedule: String,
        /// Step budget; defaults to the model-specific bound.
        #[arg(long)]
        max_steps: Option<u64>,
        /// Routing file for the initial profile; defaults to everyone on
        /// strategy 0.
        #[arg(long)]
        start: Option<PathBuf>,
        /// Trace output path (CSV, one row per move).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive equilibrium analysis of an instance file.
    Analyze {
        instance: PathBuf,
        /// Cost model: exp | max | linear | poly:<d>
        #[arg(long, default_value = "exp")]
        model: String,
        /// Profile-count cap (ARENA_CAP overrides the default).
        #[arg(long)]
        cap: Option<u128>,
        /// Bound-check multiplier as an integer or P/Q ratio.
        #[arg(long, default_value = "10")]
        alpha: String,
        /// Report output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification battery and write its manifest.
    VerifyPaper {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Direct edge plus k-1 disjoint detours of length k, k players.
    Fig2 {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Certified three-player instance with two exponential equilibria.
    MultiNash {
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded random connected instance.
    Random {
        #[arg(long)]
        nodes: u32,
        #[arg(long)]
        edges: u32,
        #[arg(long)]
        players: u32,
        #[arg(long)]
        max_len: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Layered high-congestion chain with exact-tie alternatives.
    ExpansionChain {
        #[arg(long)]
        c_hat: u32,
        #[arg(long)]
        l_star: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl std::fmt::Display) -> Failure {
    Failure { code, message: message.to_string() }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Generate { kind } => cmd_generate(kind),
        Command::Dynamics { instance, model, schedule, max_steps, start, out } => {
            cmd_dynamics(&instance, &model, &schedule, max_steps, start.as_deref(), out.as_deref())
        }
        Command::Analyze { instance, model, cap, alpha, out } => {
            cmd_analyze(&instance, &model, cap, &alpha, out.as_deref())
        }
        Command::VerifyPaper { out_dir } => cmd_verify_paper(&out_dir),
    }
}

fn cmd_generate(kind: GenerateKind) -> Result<ExitCode, Failure> {
    let (spec, out) = match kind {
        GenerateKind::Fig2 { k, out } => (GeneratorSpec::Fig2 { k }, out),
        GenerateKind::MultiNash { out } => (GeneratorSpec::MultiNashWitness, out),
        GenerateKind::Random { nodes, edges, players, max_len, seed, out } => {
            (GeneratorSpec::Random { nodes, edges, players, max_len, seed }, out)
        }
        GenerateKind::ExpansionChain { c_hat, l_star, out } => {
            (GeneratorSpec::ExpansionChain { c_hat, l_star }, out)
        }
    };
    let generated = generate(&spec).map_err(|e| match e {
        GeneratorError::Game(_) | GeneratorError::Graph(_) | GeneratorError::Analysis(_) => {
            fail(EXIT_BAD_SPEC, format!("internal construction error: {e}"))
        }
        other => fail(EXIT_BAD_SPEC, other),
    })?;
    let seed = match spec {
        GeneratorSpec::Random { seed, .. } => Some(seed),
        _ => None,
    };
    let meta = InstanceMeta {
        name: Some(generated.name.clone()),
        generator: Some(spec.to_string()),
        seed,
    };
    let text = write_instance(&generated.instance, &meta);
    write_atomic(&out, &text).map_err(|e| fail(EXIT_WRITE, e))?;
    println!("wrote {}", out.display());
    if let Some(routing) = &generated.intended {
        let sidecar = sidecar_path(&out);
        write_atomic(&sidecar, &write_routing(routing)).map_err(|e| fail(EXIT_WRITE, e))?;
        println!("wrote {}", sidecar.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn sidecar_path(out: &std::path::Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".routing");
    out.with_file_name(name)
}

fn load_instance(path: &std::path::Path) -> Result<(GameInstance, InstanceMeta), Failure> {
    let text = read_to_string(path).map_err(|e| fail(EXIT_LOAD, e))?;
    let loaded = parse_instance(&text).map_err(|e| fail(EXIT_LOAD, format!("{}: {e}", path.display())))?;
    Ok((loaded.instance, loaded.meta))
}

fn parse_model_arg(token: &str) -> Result<CostModel, Failure> {
    let model = parse_cost_model(token)
        .ok_or_else(|| fail(EXIT_LOAD, format!("unknown cost model '{token}'")))?;
    model.validate().map_err(|e| fail(EXIT_LOAD, e))?;
    Ok(model)
}

fn parse_schedule_arg(token: &str) -> Result<Schedule, Failure> {
    if token == "rr" {
        return Ok(Schedule::RoundRobin);
    }
    if let Some(seed) = token.strip_prefix("random:") {
        let seed = seed
            .parse::<u64>()
            .map_err(|_| fail(EXIT_LOAD, format!("invalid schedule seed '{seed}'")))?;
        return Ok(Schedule::Random { seed });
    }
    Err(fail(EXIT_LOAD, format!("unknown schedule '{token}' (expected rr or random:<seed>)")))
}

fn parse_alpha_arg(token: &str) -> Result<Rational, Failure> {
    let (n, d) = match token.split_once('/') {
        Some((n, d)) => (n, d),
        None => (token, "1"),
    };
    let n = num_bigint::BigInt::from_str(n)
        .map_err(|_| fail(EXIT_LOAD, format!("invalid alpha '{token}'")))?;
    let d = num_bigint::BigInt::from_str(d)
        .map_err(|_| fail(EXIT_LOAD, format!("invalid alpha '{token}'")))?;
    if d <= num_bigint::BigInt::from(0) || n < num_bigint::BigInt::from(0) {
        return Err(fail(EXIT_LOAD, format!("alpha '{token}' must be nonnegative with positive denominator")));
    }
    Ok(Rational::new(n, d))
}

fn effective_cap(flag: Option<u128>) -> Result<u128, Failure> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var("ARENA_CAP") {
        Ok(value) => value
            .parse::<u128>()
            .map_err(|_| fail(EXIT_LOAD, format!("invalid ARENA_CAP '{value}'"))),
        Err(_) => Ok(DEFAULT_PROFILE_CAP),
    }
}

fn cmd_dynamics(
    instance_path: &std::path::Path,
    model: &str,
    schedule: &str,
    max_steps: Option<u64>,
    start: Option<&std::path::Path>,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, Failure> {
    let (game, _) = load_instance(instance_path)?;
    let model = parse_model_arg(model)?;
    let schedule = parse_schedule_arg(schedule)?;
    let initial = match start {
        Some(path) => {
            let text = read_to_string(path).map_err(|e| fail(EXIT_LOAD, e))?;
            parse_routing(&text).map_err(|e| fail(EXIT_LOAD, format!("{}: {e}", path.display())))?
        }
        None => Routing::all_zero(game.player_count()),
    };
    game.validate_routing(&initial).map_err(|e| fail(EXIT_LOAD, e))?;

    let trace = match run_best_response::<ExactCost>(&game, &initial, model, schedule, max_steps) {
        Ok(trace) => trace,
        Err(DynamicsError::NonConvergence { max_steps }) => {
            return Err(fail(
                EXIT_NON_CONVERGENCE,
                format!("did not converge within {max_steps} steps"),
            ));
        }
        Err(e) => return Err(fail(EXIT_LOAD, e)),
    };
    if let Some(path) = out {
        write_atomic(path, &write_trace(&trace)).map_err(|e| fail(EXIT_WRITE, e))?;
    }
    let (sc, potential, d) = trace_summary(&game, &trace).map_err(|e| fail(EXIT_LOAD, e))?;
    println!("converged {}", trace.converged);
    println!("steps {}", trace.moves.len());
    println!("final-sc {sc}");
    println!("final-potential {potential}");
    println!("final-d {d}");
    print!("final-choices");
    for c in &trace.final_routing.choices {
        print!(" {c}");
    }
    println!();
    if trace.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_NON_CONVERGENCE))
    }
}

fn cmd_analyze(
    instance_path: &std::path::Path,
    model: &str,
    cap: Option<u128>,
    alpha: &str,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, Failure> {
    let (game, meta) = load_instance(instance_path)?;
    let model = parse_model_arg(model)?;
    let cap = effective_cap(cap)?;
    let alpha = parse_alpha_arg(alpha)?;
    let report = match analyze::<ExactCost>(&game, model, cap, alpha) {
        Ok(report) => report,
        Err(AnalysisError::TooLarge { profiles, cap }) => {
            return Err(fail(
                EXIT_TOO_LARGE,
                format!("{profiles} strategy profiles exceed cap {cap}"),
            ));
        }
        Err(AnalysisError::NoEquilibrium) => {
            return Err(fail(EXIT_NO_EQUILIBRIUM, "no pure Nash equilibrium under this model"));
        }
        Err(e) => return Err(fail(EXIT_LOAD, e)),
    };
    let name = meta.name.unwrap_or_else(|| instance_path.display().to_string());
    let text = write_report(&name, &report);
    match out {
        Some(path) => write_atomic(path, &text).map_err(|e| fail(EXIT_WRITE, e))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_paper(out_dir: &std::path::Path) -> Result<ExitCode, Failure> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| fail(EXIT_WRITE, format!("{}: {e}", out_dir.display())))?;
    let report = run_battery();
    let manifest = write_manifest(&report);
    let path = out_dir.join("manifest.txt");
    write_atomic(&path, &manifest).map_err(|e| fail(EXIT_WRITE, e))?;
    print!("{manifest}");
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for name in report.failed_names() {
            eprintln!("failed: {name}");
        }
        Ok(ExitCode::from(EXIT_VERIFY_FAILED))
    }
}
