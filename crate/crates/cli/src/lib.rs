//! Command-line front end: argument model, report document and commands.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use pbsgates::circuit::{ExecError, ExecOptions, Preparation};
use pbsgates::fock::DEFAULT_TOLERANCE;
use pbsgates::gates::{run_circuit, Gate, GateInputs, GateReport, QubitState, TwoQubitState};
use pbsgates::{parse_circuit, Acceptance, CircuitSpec};
use serde::Serialize;
use thiserror::Error;

/// Environment variable overriding the amplitude-pruning tolerance.
pub const TOLERANCE_ENV: &str = "PBSGATES_TOLERANCE";

/// Report format emitted by `run`.
pub const SCHEMA_VERSION: u32 = 1;

/// Input norm deviations up to this are accepted silently.
pub const SILENT_NORM_DEVIATION: f64 = 1e-9;
/// Deviations up to this are normalized with a warning; larger ones fail.
pub const MAX_NORM_DEVIATION: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(
    name = "pbsgates",
    version,
    about = "Simulate post-selected polarizing-beam-splitter gates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a built-in gate or a circuit file and print a JSON report.
    Run(RunConfig),
    /// Parse and validate circuit files without running them.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print a built-in gate as circuit text.
    Show {
        #[arg(long)]
        gate: String,
    },
    /// List the built-in gates.
    List,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Built-in gate name (see `list`).
    #[arg(long, conflicts_with = "circuit", required_unless_present = "circuit")]
    pub gate: Option<String>,
    /// Circuit file.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Single-qubit input as `re(H) im(H) re(V) im(V)`; repeat for more qubits.
    #[arg(long, num_args = 4, allow_negative_numbers = true, value_name = "X")]
    pub qubit: Vec<f64>,
    /// Two-qubit input as re/im pairs for HH, HV, VH, VV.
    #[arg(long, num_args = 8, allow_negative_numbers = true, value_name = "X")]
    pub two_qubit: Option<Vec<f64>>,
    /// Accept only outcomes that need no correction.
    #[arg(long)]
    pub passive: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report format version.
    #[arg(long, default_value_t = SCHEMA_VERSION)]
    pub schema: u32,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}:{source}")]
    Parse {
        path: String,
        source: pbsgates::circuit::ParseError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::Parse { .. } => 3,
        }
    }
}

impl From<ExecError> for CliError {
    fn from(e: ExecError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub schema: u32,
    pub engine_version: &'static str,
    pub gate: String,
    pub passive: bool,
    pub input: Vec<InputRecord>,
    pub outcomes: Vec<OutcomeRecord>,
    pub success_probability: f64,
    pub failure_probability: f64,
}

#[derive(Serialize, Debug)]
pub struct InputRecord {
    pub kind: &'static str,
    pub modes: Vec<String>,
    /// (re, im) pairs; empty for fixed resource states.
    pub amplitudes: Vec<(f64, f64)>,
}

/// One output term: sorted `mode:pol:count` strings, then re and im.
pub type Term = (Vec<String>, f64, f64);

#[derive(Serialize, Debug)]
pub struct OutcomeRecord {
    pub pattern: String,
    pub accepted: bool,
    pub probability: f64,
    pub output_state: Vec<Term>,
    pub fidelity_to_target: Option<f64>,
}

fn pairs(amps: &[Complex64]) -> Vec<(f64, f64)> {
    amps.iter().map(|a| (a.re, a.im)).collect()
}

fn input_record(prep: &Preparation) -> InputRecord {
    let modes = prep
        .modes()
        .iter()
        .map(|m| m.as_str().to_string())
        .collect();
    let (kind, amplitudes) = match prep {
        Preparation::Qubit { h, v, .. } => ("qubit", pairs(&[*h, *v])),
        Preparation::TwoQubit { amps, .. } => ("two_qubit", pairs(amps)),
        Preparation::Bell { .. } => ("bell", vec![]),
        Preparation::Chi { .. } => ("chi", vec![]),
        Preparation::Terms(terms) => ("terms", terms.iter().map(|(a, _)| (a.re, a.im)).collect()),
    };
    InputRecord {
        kind,
        modes,
        amplitudes,
    }
}

pub fn build_report(spec: &CircuitSpec, report: &GateReport) -> Report {
    let outcomes = report
        .result
        .outcomes
        .iter()
        .map(|(pattern, branch)| OutcomeRecord {
            pattern: pattern.to_string(),
            accepted: branch.accepted,
            probability: branch.probability,
            output_state: branch
                .state
                .terms()
                .map(|(basis, amp)| (basis.occupation_strings(), amp.re, amp.im))
                .collect(),
            fidelity_to_target: report.fidelities.get(pattern).copied(),
        })
        .collect();
    Report {
        schema: SCHEMA_VERSION,
        engine_version: pbsgates::VERSION,
        gate: report.gate.clone(),
        passive: spec.acceptance == Acceptance::Passive,
        input: spec.inputs.iter().map(input_record).collect(),
        outcomes,
        success_probability: report.success_probability,
        failure_probability: report.result.failure_probability,
    }
}

/// Checks and, within limits, repairs the norm of `amps`.
pub fn normalize_input(
    what: &str,
    amps: Vec<Complex64>,
    warn: &mut dyn Write,
) -> Result<Vec<Complex64>, CliError> {
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let deviation = (norm - 1.0).abs();
    if !norm.is_finite() || deviation > MAX_NORM_DEVIATION {
        return Err(CliError::Validation(format!(
            "{what} amplitudes have norm {norm}, expected 1 within {MAX_NORM_DEVIATION:e}"
        )));
    }
    if deviation > SILENT_NORM_DEVIATION {
        let _ = writeln!(
            warn,
            "warning: {what} amplitudes have norm {norm}; normalizing"
        );
        return Ok(amps.into_iter().map(|a| a / norm).collect());
    }
    Ok(amps)
}

fn complexes(xs: &[f64]) -> Vec<Complex64> {
    xs.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

fn qubit_inputs(config: &RunConfig, warn: &mut dyn Write) -> Result<Vec<QubitState>, CliError> {
    config
        .qubit
        .chunks(4)
        .enumerate()
        .map(|(i, xs)| {
            let a = normalize_input(&format!("qubit {}", i + 1), complexes(xs), warn)?;
            QubitState::new(a[0], a[1]).map_err(|e| CliError::Validation(e.to_string()))
        })
        .collect()
}

fn two_qubit_input(
    config: &RunConfig,
    warn: &mut dyn Write,
) -> Result<Option<TwoQubitState>, CliError> {
    config
        .two_qubit
        .as_deref()
        .map(|xs| {
            let a = normalize_input("two-qubit", complexes(xs), warn)?;
            TwoQubitState::new([a[0], a[1], a[2], a[3]])
                .map_err(|e| CliError::Validation(e.to_string()))
        })
        .transpose()
}

/// Tolerance from [`TOLERANCE_ENV`], if set.
pub fn tolerance_from_env() -> Result<f64, CliError> {
    match std::env::var(TOLERANCE_ENV) {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
            _ => Err(CliError::Validation(format!(
                "{TOLERANCE_ENV}={s} is not a tolerance"
            ))),
        },
        Err(_) => Ok(DEFAULT_TOLERANCE),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_circuit(path: &Path) -> Result<CircuitSpec, CliError> {
    let text = read(path)?;
    parse_circuit(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn gate_by_name(name: &str) -> Result<Gate, CliError> {
    Gate::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = Gate::ALL.iter().map(|g| g.name()).collect();
        CliError::Validation(format!(
            "unknown gate `{name}` (known: {})",
            known.join(", ")
        ))
    })
}

/// Replaces the file's qubit and two-qubit inputs, in order, with the ones
/// given on the command line.
fn override_inputs(
    spec: &mut CircuitSpec,
    qubits: &[QubitState],
    two: Option<TwoQubitState>,
) -> Result<(), CliError> {
    let mut qubits = qubits.iter();
    let mut two = two.into_iter();
    for prep in &mut spec.inputs {
        match prep {
            Preparation::Qubit { h, v, .. } => {
                if let Some(q) = qubits.next() {
                    (*h, *v) = (q.alpha, q.beta);
                }
            }
            Preparation::TwoQubit { amps, .. } => {
                if let Some(t) = two.next() {
                    *amps = t.amps;
                }
            }
            _ => {}
        }
    }
    if qubits.next().is_some() || two.next().is_some() {
        return Err(CliError::Validation(
            "more amplitude flags than matching inputs in the circuit".into(),
        ));
    }
    Ok(())
}

/// Builds the circuit described by `config`.
pub fn resolve(config: &RunConfig, warn: &mut dyn Write) -> Result<CircuitSpec, CliError> {
    if config.schema != SCHEMA_VERSION {
        return Err(CliError::Validation(format!(
            "unsupported report schema {} (supported: {SCHEMA_VERSION})",
            config.schema
        )));
    }
    let qubits = qubit_inputs(config, warn)?;
    let two = two_qubit_input(config, warn)?;
    let acceptance = if config.passive {
        Acceptance::Passive
    } else {
        Acceptance::AllSingles
    };
    match (&config.gate, &config.circuit) {
        (Some(name), None) => gate_by_name(name)?
            .circuit(
                &GateInputs {
                    qubits,
                    two_qubit: two,
                },
                acceptance,
            )
            .map_err(|e| CliError::Validation(e.to_string())),
        (None, Some(path)) => {
            let mut spec = load_circuit(path)?;
            override_inputs(&mut spec, &qubits, two)?;
            if config.passive {
                spec.acceptance = Acceptance::Passive;
            }
            Ok(spec)
        }
        _ => Err(CliError::Validation(
            "exactly one of --gate and --circuit is required".into(),
        )),
    }
}

/// Runs `config` and returns the serialized report (with trailing newline).
pub fn cmd_run(config: &RunConfig, warn: &mut dyn Write) -> Result<String, CliError> {
    let spec = resolve(config, warn)?;
    let opts = ExecOptions {
        tolerance: tolerance_from_env()?,
        // one invocation stays on one thread
        execution: pbsgates::Execution::Sequential,
    };
    let report = run_circuit(&spec, &opts)?;
    let doc = build_report(&spec, &report);
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    Ok(text)
}

pub fn cmd_check(path: &Path) -> Result<String, CliError> {
    let spec = load_circuit(path)?;
    Ok(format!(
        "{}: ok (modes {}, steps {}, rules {})",
        path.display(),
        spec.modes.len(),
        spec.steps.len(),
        spec.rules.len()
    ))
}

pub fn cmd_show(name: &str) -> Result<String, CliError> {
    let spec = gate_by_name(name)?
        .circuit(&GateInputs::default(), Acceptance::AllSingles)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(spec.to_text())
}

pub fn cmd_list() -> String {
    Gate::ALL
        .iter()
        .map(|g| format!("{:<18}{}\n", g.name(), g.description()))
        .collect()
}

/// Runs a parsed command line, writing to `out` and `err`; returns the
/// process exit code.
pub fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Run(config) => cmd_run(&config, err).and_then(|text| match &config.output {
            Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            }),
            None => out
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                }),
        }),
        Command::Check { paths } => {
            let mut worst = Ok(());
            for path in paths {
                match cmd_check(&path) {
                    Ok(line) => {
                        let _ = writeln!(out, "{line}");
                    }
                    Err(e) => {
                        let _ = writeln!(err, "error: {e}");
                        if worst.is_ok() {
                            worst = Err(e);
                        }
                    }
                }
            }
            return worst.map_or_else(|e| e.exit_code(), |_| 0);
        }
        Command::Show { gate } => cmd_show(&gate).map(|text| {
            let _ = out.write_all(text.as_bytes());
        }),
        Command::List => {
            let _ = out.write_all(cmd_list().as_bytes());
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> RunConfig {
        let mut full = vec!["pbsgates", "run"];
        full.extend_from_slice(args);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Run(c) => c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn slightly_off_norm_is_repaired_with_warning() {
        let mut warn = Vec::new();
        let a = normalize_input("q", vec![Complex64::new(1.0 + 1e-7, 0.0)], &mut warn).unwrap();
        assert!((a[0].re - 1.0).abs() < 1e-15);
        assert!(String::from_utf8(warn).unwrap().contains("warning"));
    }

    #[test]
    fn tiny_deviation_is_silent() {
        let mut warn = Vec::new();
        normalize_input("q", vec![Complex64::new(1.0 + 1e-12, 0.0)], &mut warn).unwrap();
        assert!(warn.is_empty());
    }

    #[test]
    fn large_deviation_is_rejected() {
        let mut warn = Vec::new();
        let e = normalize_input("q", vec![Complex64::new(0.9, 0.0)], &mut warn).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn cnot_report_values() {
        let text = cmd_run(
            &config(&[
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
            ]),
            &mut Vec::new(),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], 1);
        assert!((v["success_probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        let accepted: Vec<_> = v["outcomes"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|o| o["accepted"] == true)
            .collect();
        assert_eq!(accepted.len(), 4);
        for o in accepted {
            assert!((o["probability"].as_f64().unwrap() - 0.0625).abs() < 1e-12);
        }
    }

    #[test]
    fn gate_and_circuit_are_exclusive() {
        let r = Cli::try_parse_from(["pbsgates", "run", "--gate", "cnot", "--circuit", "x.circ"]);
        assert!(r.is_err());
        let r = Cli::try_parse_from(["pbsgates", "run"]);
        assert!(r.is_err());
    }

    #[test]
    fn unsupported_schema_is_rejected() {
        let e = resolve(
            &config(&["--gate", "cnot", "--schema", "2"]),
            &mut Vec::new(),
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn show_round_trips_through_parser() {
        for g in Gate::ALL {
            let text = cmd_show(g.name()).unwrap();
            assert!(parse_circuit(&text).is_ok(), "{}", g.name());
        }
    }
}
