use std::path::PathBuf;
use std::process::{Command, Output};

use pbsgates_cli::cmd_check;
use rand::{Rng, SeedableRng};
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pbsgates"));
    cmd.env_remove("PBSGATES_TOLERANCE");
    cmd
}

fn circuits() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../circuits")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

const TWO_QUBIT: [&str; 8] = ["0.5", "0.1", "-0.3", "0.4", "0.2", "-0.5", "0.1", "0.4307"];

fn two_qubit_args() -> Vec<String> {
    // normalize the fixed amplitudes exactly so no warning is printed
    let xs: Vec<f64> = TWO_QUBIT.iter().map(|s| s.parse().unwrap()).collect();
    let n = xs.iter().map(|x| x * x).sum::<f64>().sqrt();
    xs.iter().map(|x| format!("{}", x / n)).collect()
}

#[test]
fn circuit_file_matches_builtin_byte_for_byte() {
    let amps = two_qubit_args();
    let path = circuits().join("gc_cnot.circ");
    let mut a = vec!["run", "--circuit", path.to_str().unwrap(), "--two-qubit"];
    a.extend(amps.iter().map(String::as_str));
    let mut b = vec!["run", "--gate", "gc_cnot", "--two-qubit"];
    b.extend(amps.iter().map(String::as_str));
    let (ra, rb) = (run(&a), run(&b));
    assert!(ra.status.success() && rb.status.success());
    assert_eq!(ra.stdout, rb.stdout);
}

#[test]
fn every_shipped_circuit_matches_its_builtin() {
    for gate in [
        "parity_check",
        "destructive_cnot",
        "encoder",
        "cnot",
        "gc_cnot",
        "chi_via_cnot",
    ] {
        let path = circuits().join(format!("{gate}.circ"));
        for passive in [false, true] {
            let mut a = vec!["run", "--circuit", path.to_str().unwrap()];
            let mut b = vec!["run", "--gate", gate];
            if passive {
                a.push("--passive");
                b.push("--passive");
            }
            assert_eq!(run(&a).stdout, run(&b).stdout, "{gate}");
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let amps = two_qubit_args();
    let mut args = vec!["run", "--gate", "cnot", "--two-qubit"];
    args.extend(amps.iter().map(String::as_str));
    let first = run(&args).stdout;
    for _ in 0..3 {
        assert_eq!(run(&args).stdout, first);
    }
}

#[test]
fn cnot_basis_input_report() {
    let v = json(&run(&[
        "run",
        "--gate",
        "cnot",
        "--two-qubit",
        "1",
        "0",
        "0",
        "0",
        "0",
        "0",
        "0",
        "0",
    ]));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["gate"], "cnot");
    assert!((v["success_probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let outcomes = v["outcomes"].as_array().unwrap();
    let accepted: Vec<_> = outcomes.iter().filter(|o| o["accepted"] == true).collect();
    assert_eq!(accepted.len(), 4);
    for o in &accepted {
        assert!((o["probability"].as_f64().unwrap() - 0.0625).abs() < 1e-12);
        assert!((o["fidelity_to_target"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        // HH -> HH on the output modes
        let terms = o["output_state"].as_array().unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0][0], serde_json::json!(["2:H:1", "3:H:1"]));
    }
    let total: f64 = outcomes
        .iter()
        .map(|o| o["probability"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn parity_check_basis_input() {
    let v = json(&run(&[
        "run",
        "--gate",
        "parity_check",
        "--qubit",
        "1",
        "0",
        "0",
        "0",
    ]));
    assert!((v["success_probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let passive = json(&run(&[
        "run",
        "--gate",
        "parity_check",
        "--qubit",
        "1",
        "0",
        "0",
        "0",
        "--passive",
    ]));
    assert_eq!(passive["passive"], true);
    assert!((passive["success_probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn probabilities_sum_to_one_in_every_report() {
    for gate in [
        "parity_check",
        "destructive_cnot",
        "encoder",
        "cnot",
        "gc_cnot",
        "chi_via_cnot",
    ] {
        let v = json(&run(&["run", "--gate", gate]));
        let total: f64 = v["outcomes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| o["probability"].as_f64().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12, "{gate}: {total}");
        let split =
            v["success_probability"].as_f64().unwrap() + v["failure_probability"].as_f64().unwrap();
        assert!((split - 1.0).abs() < 1e-12);
    }
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "run",
        "--gate",
        "encoder",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["gate"], "encoder");
}

#[test]
fn near_normalized_input_warns_and_runs() {
    let out = run(&[
        "run",
        "--gate",
        "parity_check",
        "--qubit",
        "1.0000001",
        "0",
        "0",
        "0",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["run", "--gate", "toffoli"]), 2);
    assert_eq!(
        code(&[
            "run",
            "--gate",
            "parity_check",
            "--qubit",
            "1",
            "0",
            "1",
            "0"
        ]),
        2
    );
    assert_eq!(
        code(&["run", "--gate", "cnot", "--qubit", "1", "0", "0", "0"]),
        2
    );
    assert_eq!(code(&["run", "--circuit", "/definitely/not/here.circ"]), 1);
    assert_eq!(code(&["check", "/definitely/not/here.circ"]), 1);
    let all: Vec<String> = std::fs::read_dir(circuits())
        .unwrap()
        .map(|e| e.unwrap().path().display().to_string())
        .collect();
    let mut args = vec!["check"];
    args.extend(all.iter().map(String::as_str));
    assert_eq!(code(&args), 0);
}

#[test]
fn bad_tolerance_env_is_a_validation_error() {
    let out = bin()
        .args(["run", "--gate", "cnot"])
        .env("PBSGATES_TOLERANCE", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undeclared_mode_reports_position_and_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.circ");
    std::fs::write(
        &path,
        "mode x y\ninput qubit x 1 0 0 0\npbs hv x zz u w\noutput u\n",
    )
    .unwrap();
    for sub in ["check", "run"] {
        let out = if sub == "check" {
            run(&["check", path.to_str().unwrap()])
        } else {
            run(&["run", "--circuit", path.to_str().unwrap()])
        };
        assert_eq!(out.status.code(), Some(3));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("zz"), "{err}");
        assert!(err.contains(":3:"), "{err}");
    }
}

#[test]
fn mutated_circuits_never_crash() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(99);
    let dir = tempfile::tempdir().unwrap();
    let sources: Vec<String> = std::fs::read_dir(circuits())
        .unwrap()
        .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    for i in 0..600 {
        let mut chars: Vec<char> = sources[i % sources.len()].chars().collect();
        for _ in 0..rng.random_range(1..5) {
            let at = rng.random_range(0..chars.len());
            let c = char::from(rng.random_range(b' '..=b'~'));
            match rng.random_range(0..4) {
                0 => {
                    chars.remove(at);
                }
                1 => chars.insert(at, c),
                2 => chars[at] = c,
                _ => chars.insert(at, '\n'),
            }
        }
        let path = dir.path().join(format!("m{i}.circ"));
        std::fs::write(&path, chars.iter().collect::<String>()).unwrap();
        // in-process: must return, either Ok or a diagnostic
        if let Err(e) = cmd_check(&path) {
            assert_eq!(e.exit_code(), 3);
        }
        // a sample through the binary: never a panic exit
        if i % 30 == 0 {
            let code = run(&["run", "--circuit", path.to_str().unwrap()])
                .status
                .code();
            assert!(matches!(code, Some(0) | Some(2) | Some(3)), "{code:?}");
        }
    }
}

#[test]
fn list_and_show() {
    let out = run(&["list"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 6);
    let shown = run(&["show", "--gate", "gc_cnot"]);
    let file = std::fs::read_to_string(circuits().join("gc_cnot.circ")).unwrap();
    let body: String = file.lines().skip(1).map(|l| format!("{l}\n")).collect();
    assert_eq!(String::from_utf8_lossy(&shown.stdout), body);
}
