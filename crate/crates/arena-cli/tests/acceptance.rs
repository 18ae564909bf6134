//! Command-line acceptance: exit-code contract, file determinism, and
//! the byte-identical verify-paper manifest across two process runs.

use std::path::Path;
use std::process::{Command, Output};

fn arena() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arena"))
}

fn run(args: &[&str]) -> Output {
    arena().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn criterion_7_verify_paper_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first_dir = dir.path().join("first");
    let second_dir = dir.path().join("second");

    let first = run(&["verify-paper", "--out-dir", first_dir.to_str().unwrap()]);
    assert!(first.status.success(), "verify-paper failed: {}", stdout(&first));
    let second = run(&["verify-paper", "--out-dir", second_dir.to_str().unwrap()]);
    assert!(second.status.success());

    let a = read(&first_dir.join("manifest.txt"));
    let b = read(&second_dir.join("manifest.txt"));
    assert_eq!(a, b, "manifests differ between runs");
    assert!(a.contains("result pass"), "manifest:\n{a}");
    println!("criterion 7 (determinism): PASS [manifest bytes identical across runs]");
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("r1.arena");
    let out2 = dir.path().join("r2.arena");
    for out in [&out1, &out2] {
        let output = run(&[
            "generate", "random", "--nodes", "6", "--edges", "8", "--players", "3",
            "--max-len", "3", "--seed", "42", "--out", out.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    assert_eq!(read(&out1), read(&out2));
}

#[test]
fn generate_fig2_writes_the_advertised_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.arena");
    let output =
        run(&["generate", "fig2", "--k", "5", "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    let text = read(&out);
    assert!(text.starts_with("arena-instance v1\n"));
    assert!(text.contains("graph 18 undirected"));
    assert_eq!(text.matches("\nedge ").count(), 21);
    assert_eq!(text.matches("\nplayer ").count(), 5);
    // the intended routing rides along
    let sidecar = dir.path().join("fig2.arena.routing");
    assert_eq!(read(&sidecar), "arena-routing v1\nchoices 0 0 0 0 0\n");
}

#[test]
fn generate_rejects_bad_parameters_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.arena");
    let output = run(&["generate", "fig2", "--k", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let output = run(&[
        "generate", "expansion-chain", "--c-hat", "13", "--l-star", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn dynamics_crowded_start_converges_with_social_cost_three() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("fig2.arena");
    assert!(run(&["generate", "fig2", "--k", "5", "--out", instance.to_str().unwrap()])
        .status
        .success());
    let trace_path = dir.path().join("trace.csv");
    let output = run(&[
        "dynamics",
        instance.to_str().unwrap(),
        "--model", "exp",
        "--out", trace_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stdout(&output));
    let summary = stdout(&output);
    assert!(summary.contains("converged true"), "{summary}");
    assert!(summary.contains("final-sc 3"), "{summary}");
    let trace = read(&trace_path);
    assert!(trace.starts_with("step,player,from,to,"));
    assert_eq!(trace.lines().count(), 1 + 2); // header + two moves to reach congestion 3
}

#[test]
fn dynamics_linear_crowded_start_is_already_stable() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("fig2.arena");
    assert!(run(&["generate", "fig2", "--k", "5", "--out", instance.to_str().unwrap()])
        .status
        .success());
    let output = run(&["dynamics", instance.to_str().unwrap(), "--model", "linear"]);
    assert!(output.status.success());
    let summary = stdout(&output);
    assert!(summary.contains("converged true"), "{summary}");
    assert!(summary.contains("steps 0"), "{summary}");
    assert!(summary.contains("final-sc 5"), "{summary}");
}

#[test]
fn dynamics_accepts_a_start_routing_file() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("fig2.arena");
    assert!(run(&["generate", "fig2", "--k", "3", "--out", instance.to_str().unwrap()])
        .status
        .success());
    let start = dir.path().join("start.routing");
    // two on the shared edge, one detoured: an exponential equilibrium
    // (2^2 = 4 beats the detour at 6, the detour at 6 beats 2^3 = 8)
    std::fs::write(&start, "arena-routing v1\nchoices 0 0 1\n").unwrap();
    let output = run(&[
        "dynamics",
        instance.to_str().unwrap(),
        "--start", start.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("steps 0"));
}

#[test]
fn analyze_witness_reports_exact_ratios_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("witness.arena");
    assert!(run(&["generate", "multi-nash", "--out", instance.to_str().unwrap()])
        .status
        .success());
    let report_path = dir.path().join("report.txt");
    let output = run(&[
        "analyze",
        instance.to_str().unwrap(),
        "--model", "exp",
        "--out", report_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stdout(&output));
    let text = read(&report_path);
    assert!(text.contains("optimal-sc 1"), "{text}");
    assert!(text.contains("poa 2/1"), "{text}");
    assert!(text.contains("pos 1/1"), "{text}");

    // the report round-trips and its routings re-verify as equilibria
    let loaded = arena_core::fileio::parse_instance(&read(&instance)).unwrap();
    let report = arena_core::fileio::parse_report(&text).unwrap();
    assert!(!report.nash_routings.is_empty());
    for (routing, sc) in &report.nash_routings {
        assert!(arena_core::dynamics::is_nash::<arena_core::ExactCost>(
            &loaded.instance,
            routing,
            report.model
        )
        .unwrap());
        assert_eq!(
            arena_core::game::social_cost(&loaded.instance, routing).unwrap(),
            *sc
        );
    }
}

#[test]
fn analyze_cap_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("fig2.arena");
    assert!(run(&["generate", "fig2", "--k", "5", "--out", instance.to_str().unwrap()])
        .status
        .success());
    // 5^5 = 3125 profiles; a cap of 10 must refuse with exit 5
    let output = run(&["analyze", instance.to_str().unwrap(), "--cap", "10"]);
    assert_eq!(output.status.code(), Some(5));
    // same refusal through the environment override
    let output = arena()
        .args(["analyze", instance.to_str().unwrap()])
        .env("ARENA_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(5));
    // the flag wins over the environment
    let output = arena()
        .args(["analyze", instance.to_str().unwrap(), "--cap", "100000"])
        .env("ARENA_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn missing_instance_file_is_a_load_error() {
    let output = run(&["dynamics", "/nonexistent/instance.arena"]);
    assert_eq!(output.status.code(), Some(1));
    let output = run(&["analyze", "/nonexistent/instance.arena"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn expansion_chain_generation_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chain.arena");
    let output = run(&[
        "generate", "expansion-chain", "--c-hat", "6", "--l-star", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let loaded = arena_core::fileio::parse_instance(&read(&out)).unwrap();
    assert_eq!(loaded.instance.edge_count(), 411);
    let routing = arena_core::fileio::parse_routing(&read(&dir.path().join("chain.arena.routing")))
        .unwrap();
    assert_eq!(
        arena_core::game::social_cost(&loaded.instance, &routing).unwrap(),
        6
    );
}
