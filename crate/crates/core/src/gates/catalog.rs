//! Built-in circuits and their ideal transformations.
//!
//! Mode maps (catalog names are stable and used in reports):
//!
//! | gate               | inputs                 | ancilla            | detectors        | outputs    |
//! |--------------------|------------------------|--------------------|------------------|------------|
//! | `parity_check`     | `2'`                   | `a` (H+V)/sqrt2    | `c` (FS)         | `2`        |
//! | `destructive_cnot` | target `3'`, control `b` | -                | `d` (HV)         | `3`        |
//! | `encoder`          | `2'`                   | Bell `a`,`b`       | `c` (FS)         | `2`, `b`   |
//! | `cnot`             | `2'` `3'`              | Bell `a`,`b`       | `c` (FS), `d` (HV) | `2`, `3` |
//! | `gc_cnot`          | `A` `B`                | chi on `1`..`4`    | `p` `q` `n` `m` (FS) | `2`, `3` |
//! | `chi_via_cnot`     | -                      | Bell `1`,`2'`; Bell `4`,`3'`; Bell `a`,`b` | `c`, `d` | `1`..`4` |
//!
//! Splitter ports follow the routing contract of [`crate::optics::Pbs`]:
//! `pbs hv 2' a 2 c` sends H from `2'` and V from `a` to `2`, and
//! `pbs hv A 1 q p` sends H from `A` and V from `1` to `q`, so equal input
//! polarizations always leave one photon per detector.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::circuit::{
    execute_with, Acceptance, CircuitSpec, DetectorSpec, ElementSpec, ExecError, ExecOptions,
    FeedForwardRule, GateResult, OutcomePattern, PolLabel, Preparation, Step, Trigger,
};
use crate::fock::{Mode, PhotonState, Pol, PolBasis};
use crate::optics::Pbs;

use super::{chi_state, fidelity, ideal_cnot, GateError, QubitState, TwoQubitState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate {
    ParityCheck,
    DestructiveCnot,
    Encoder,
    Cnot,
    GcCnot,
    ChiViaCnot,
}

impl Gate {
    pub const ALL: [Gate; 6] = [
        Gate::ParityCheck,
        Gate::DestructiveCnot,
        Gate::Encoder,
        Gate::Cnot,
        Gate::GcCnot,
        Gate::ChiViaCnot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gate::ParityCheck => "parity_check",
            Gate::DestructiveCnot => "destructive_cnot",
            Gate::Encoder => "encoder",
            Gate::Cnot => "cnot",
            Gate::GcCnot => "gc_cnot",
            Gate::ChiViaCnot => "chi_via_cnot",
        }
    }

    pub fn from_name(name: &str) -> Option<Gate> {
        Gate::ALL.into_iter().find(|g| g.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Gate::ParityCheck => "parity check of one qubit against a diagonal ancilla",
            Gate::DestructiveCnot => "polarization flip controlled by a detected photon",
            Gate::Encoder => "a H + b V -> a HH + b VV using a Bell pair",
            Gate::Cnot => "encoder followed by destructive CNOT, two-photon ancilla",
            Gate::GcCnot => "teleportation-style CNOT with a four-photon ancilla",
            Gate::ChiViaCnot => "four-photon ancilla from two Bell pairs through the CNOT",
        }
    }

    /// (role, mode) pairs for reports.
    pub fn mode_map(self) -> Vec<(&'static str, Mode)> {
        let pairs: &[(&str, &str)] = match self {
            Gate::ParityCheck => &[
                ("input", "2'"),
                ("ancilla", "a"),
                ("detector", "c"),
                ("output", "2"),
            ],
            Gate::DestructiveCnot => &[
                ("target", "3'"),
                ("control", "b"),
                ("detector", "d"),
                ("output", "3"),
            ],
            Gate::Encoder => &[
                ("input", "2'"),
                ("ancilla", "a"),
                ("ancilla", "b"),
                ("detector", "c"),
                ("output", "2"),
                ("output", "b"),
            ],
            Gate::Cnot => &[
                ("control", "2'"),
                ("target", "3'"),
                ("ancilla", "a"),
                ("ancilla", "b"),
                ("detector", "c"),
                ("detector", "d"),
                ("output", "2"),
                ("output", "3"),
            ],
            Gate::GcCnot => &[
                ("control", "A"),
                ("target", "B"),
                ("ancilla", "1"),
                ("ancilla", "2"),
                ("ancilla", "3"),
                ("ancilla", "4"),
                ("detector", "p"),
                ("detector", "q"),
                ("detector", "n"),
                ("detector", "m"),
                ("output", "2"),
                ("output", "3"),
            ],
            Gate::ChiViaCnot => &[
                ("ancilla", "1"),
                ("ancilla", "2'"),
                ("ancilla", "4"),
                ("ancilla", "3'"),
                ("ancilla", "a"),
                ("ancilla", "b"),
                ("detector", "c"),
                ("detector", "d"),
                ("output", "1"),
                ("output", "2"),
                ("output", "3"),
                ("output", "4"),
            ],
        };
        pairs.iter().map(|&(r, m)| (r, Mode::new(m))).collect()
    }

    /// Builds the catalog circuit. Missing inputs default to H (qubits) or
    /// HH (two-qubit input).
    pub fn circuit(
        self,
        inputs: &GateInputs,
        acceptance: Acceptance,
    ) -> Result<CircuitSpec, GateError> {
        let bad = |expected| GateError::BadInputs {
            gate: self.name(),
            expected,
        };
        let qubit = |i: usize| inputs.qubits.get(i).copied().unwrap_or_else(QubitState::h);
        let mut spec = match self {
            Gate::ParityCheck | Gate::Encoder => {
                if inputs.qubits.len() > 1 || inputs.two_qubit.is_some() {
                    return Err(bad("at most one single-qubit input"));
                }
                if self == Gate::ParityCheck {
                    parity_check_circuit(qubit(0))
                } else {
                    encoder_circuit(qubit(0))
                }
            }
            Gate::DestructiveCnot => {
                if inputs.qubits.len() > 2 || inputs.two_qubit.is_some() {
                    return Err(bad("at most two single-qubit inputs (target, control)"));
                }
                destructive_cnot_circuit(qubit(0), qubit(1))
            }
            Gate::Cnot | Gate::GcCnot => {
                if !inputs.qubits.is_empty() {
                    return Err(bad("a two-qubit input"));
                }
                let two = inputs.two_qubit.unwrap_or_else(|| TwoQubitState::basis(0));
                if self == Gate::Cnot {
                    cnot_circuit(two)
                } else {
                    gc_cnot_circuit(two)
                }
            }
            Gate::ChiViaCnot => {
                if !inputs.qubits.is_empty() || inputs.two_qubit.is_some() {
                    return Err(bad("no inputs"));
                }
                chi_via_cnot_circuit()
            }
        };
        spec.acceptance = acceptance;
        spec.ideal = Some(self.name().to_string());
        Ok(spec)
    }

    /// Ideal output for the inputs and outputs declared in `spec`, or `None`
    /// when the circuit does not have this gate's shape (or the ideal output
    /// vanishes).
    pub fn target(self, spec: &CircuitSpec) -> Option<PhotonState> {
        let outs = &spec.outputs;
        let qubit = |i: usize| match spec.inputs.get(i) {
            Some(Preparation::Qubit { h, v, .. }) => Some(QubitState::unchecked(*h, *v)),
            _ => None,
        };
        let two = |i: usize| match spec.inputs.get(i) {
            Some(Preparation::TwoQubit { amps, .. }) => Some(TwoQubitState::unchecked(*amps)),
            _ => None,
        };
        let state = match self {
            Gate::ParityCheck if outs.len() == 1 => qubit(0)?.on(&outs[0]),
            Gate::DestructiveCnot if outs.len() == 1 => {
                let target = qubit(0)?;
                let control = qubit(1)?;
                PhotonState::superpose(
                    &target.on(&outs[0]),
                    control.alpha,
                    &target.flipped().on(&outs[0]),
                    control.beta,
                )
            }
            Gate::Encoder if outs.len() == 2 => {
                let q = qubit(0)?;
                let zero = Complex64::default();
                TwoQubitState::unchecked([q.alpha, zero, zero, q.beta]).on(&outs[0], &outs[1])
            }
            Gate::Cnot | Gate::GcCnot if outs.len() == 2 => {
                ideal_cnot(&two(0)?).on(&outs[0], &outs[1])
            }
            Gate::ChiViaCnot if outs.len() == 4 => {
                chi_state(&outs[0], &outs[1], &outs[2], &outs[3])
            }
            _ => return None,
        };
        state.normalized()
    }
}

/// Inputs for [`Gate::circuit`]. For `destructive_cnot` the qubits are
/// (target, control).
#[derive(Clone, Debug, Default)]
pub struct GateInputs {
    pub qubits: Vec<QubitState>,
    pub two_qubit: Option<TwoQubitState>,
}

#[derive(Clone, Debug)]
pub struct GateReport {
    pub gate: String,
    pub mode_map: Vec<(&'static str, Mode)>,
    pub result: GateResult,
    /// Fidelity of each accepted, corrected output to the ideal output.
    pub fidelities: BTreeMap<OutcomePattern, f64>,
    pub success_probability: f64,
}

impl GateReport {
    /// Smallest fidelity over accepted outcomes (1 when there are none).
    pub fn min_fidelity(&self) -> f64 {
        self.fidelities.values().copied().fold(1.0, f64::min)
    }
}

/// Executes `spec` and scores accepted outputs against its ideal gate.
pub fn run_circuit(spec: &CircuitSpec, opts: &ExecOptions) -> Result<GateReport, ExecError> {
    let result = execute_with(spec, opts)?;
    let gate = spec.ideal.as_deref().and_then(Gate::from_name);
    let target = gate.and_then(|g| g.target(spec));
    let fidelities = match &target {
        Some(t) => result
            .accepted()
            .filter_map(|(p, b)| fidelity(&b.state, t).ok().map(|f| (p.clone(), f)))
            .collect(),
        None => BTreeMap::new(),
    };
    Ok(GateReport {
        gate: spec.ideal.clone().unwrap_or_else(|| "circuit".to_string()),
        mode_map: gate.map(Gate::mode_map).unwrap_or_default(),
        success_probability: result.success_probability,
        result,
        fidelities,
    })
}

fn run_builtin(gate: Gate, inputs: GateInputs, acceptance: Acceptance) -> GateReport {
    let spec = gate
        .circuit(&inputs, acceptance)
        .expect("catalog inputs are well-formed");
    run_circuit(&spec, &ExecOptions::default()).expect("catalog circuits execute")
}

pub fn parity_check(input: QubitState, acceptance: Acceptance) -> GateReport {
    run_builtin(
        Gate::ParityCheck,
        GateInputs {
            qubits: vec![input],
            two_qubit: None,
        },
        acceptance,
    )
}

pub fn destructive_cnot(
    target: QubitState,
    control: QubitState,
    acceptance: Acceptance,
) -> GateReport {
    run_builtin(
        Gate::DestructiveCnot,
        GateInputs {
            qubits: vec![target, control],
            two_qubit: None,
        },
        acceptance,
    )
}

pub fn encoder(input: QubitState, acceptance: Acceptance) -> GateReport {
    run_builtin(
        Gate::Encoder,
        GateInputs {
            qubits: vec![input],
            two_qubit: None,
        },
        acceptance,
    )
}

pub fn cnot(input: TwoQubitState, acceptance: Acceptance) -> GateReport {
    run_builtin(
        Gate::Cnot,
        GateInputs {
            qubits: vec![],
            two_qubit: Some(input),
        },
        acceptance,
    )
}

pub fn gc_cnot(input: TwoQubitState, acceptance: Acceptance) -> GateReport {
    run_builtin(
        Gate::GcCnot,
        GateInputs {
            qubits: vec![],
            two_qubit: Some(input),
        },
        acceptance,
    )
}

pub fn chi_via_cnot(acceptance: Acceptance) -> GateReport {
    run_builtin(Gate::ChiViaCnot, GateInputs::default(), acceptance)
}

// ---- circuit builders ----

fn modes(names: &[&str]) -> Vec<Mode> {
    names.iter().map(|&n| Mode::new(n)).collect()
}

fn qubit_input(mode: &str, q: QubitState) -> Preparation {
    Preparation::Qubit {
        mode: Mode::new(mode),
        h: q.alpha,
        v: q.beta,
    }
}

fn pbs(basis: PolBasis, in1: &str, in2: &str, out1: &str, out2: &str) -> Step {
    Step::Element(ElementSpec::Pbs(Pbs::new(basis, in1, in2, out1, out2)))
}

fn detect(basis: PolBasis, mode: &str) -> Step {
    Step::Detect(DetectorSpec {
        mode: Mode::new(mode),
        basis,
        label: mode.to_string(),
    })
}

fn pi_phase(mode: &str, pol: Pol) -> ElementSpec {
    ElementSpec::PolPhase {
        mode: Mode::new(mode),
        pol,
        degrees: 180.0,
    }
}

/// 90 degree rotation followed by a pi phase on H: exchanges H and V.
fn flip(mode: &str) -> Vec<ElementSpec> {
    vec![
        ElementSpec::Rotate {
            mode: Mode::new(mode),
            degrees: 90.0,
        },
        pi_phase(mode, Pol::H),
    ]
}

fn rule(label: &str, pol: PolLabel, corrections: Vec<ElementSpec>) -> FeedForwardRule {
    FeedForwardRule {
        trigger: Trigger {
            label: label.to_string(),
            pol,
        },
        corrections,
    }
}

fn parity_check_circuit(input: QubitState) -> CircuitSpec {
    CircuitSpec {
        modes: modes(&["2'", "a", "2", "c"]),
        inputs: vec![
            qubit_input("2'", input),
            qubit_input("a", QubitState::diagonal()),
        ],
        steps: vec![
            pbs(PolBasis::HV, "2'", "a", "2", "c"),
            detect(PolBasis::FS, "c"),
        ],
        rules: vec![rule("c", PolLabel::S, vec![pi_phase("2", Pol::H)])],
        outputs: modes(&["2"]),
        ..Default::default()
    }
}

fn destructive_cnot_circuit(target: QubitState, control: QubitState) -> CircuitSpec {
    CircuitSpec {
        modes: modes(&["3'", "b", "3", "d"]),
        inputs: vec![qubit_input("3'", target), qubit_input("b", control)],
        steps: vec![
            pbs(PolBasis::FS, "3'", "b", "3", "d"),
            detect(PolBasis::HV, "d"),
        ],
        rules: vec![rule("d", PolLabel::V, flip("3"))],
        outputs: modes(&["3"]),
        ..Default::default()
    }
}

fn encoder_circuit(input: QubitState) -> CircuitSpec {
    CircuitSpec {
        modes: modes(&["2'", "a", "b", "2", "c"]),
        inputs: vec![
            qubit_input("2'", input),
            Preparation::Bell {
                modes: [Mode::new("a"), Mode::new("b")],
            },
        ],
        steps: vec![
            pbs(PolBasis::HV, "2'", "a", "2", "c"),
            detect(PolBasis::FS, "c"),
        ],
        rules: vec![rule("c", PolLabel::S, vec![pi_phase("2", Pol::H)])],
        outputs: modes(&["2", "b"]),
        ..Default::default()
    }
}

fn cnot_steps() -> Vec<Step> {
    vec![
        pbs(PolBasis::HV, "2'", "a", "2", "c"),
        detect(PolBasis::FS, "c"),
        pbs(PolBasis::FS, "3'", "b", "3", "d"),
        detect(PolBasis::HV, "d"),
    ]
}

fn cnot_rules() -> Vec<FeedForwardRule> {
    vec![
        rule("c", PolLabel::S, vec![pi_phase("2", Pol::H)]),
        rule("d", PolLabel::V, flip("3")),
    ]
}

fn cnot_circuit(input: TwoQubitState) -> CircuitSpec {
    CircuitSpec {
        modes: modes(&["2'", "3'", "a", "b", "2", "c", "3", "d"]),
        inputs: vec![
            Preparation::TwoQubit {
                modes: [Mode::new("2'"), Mode::new("3'")],
                amps: input.amps,
            },
            Preparation::Bell {
                modes: [Mode::new("a"), Mode::new("b")],
            },
        ],
        steps: cnot_steps(),
        rules: cnot_rules(),
        outputs: modes(&["2", "3"]),
        ..Default::default()
    }
}

fn gc_cnot_circuit(input: TwoQubitState) -> CircuitSpec {
    let both = || vec![pi_phase("2", Pol::H), pi_phase("3", Pol::V)];
    CircuitSpec {
        modes: modes(&["A", "B", "1", "2", "3", "4", "p", "q", "m", "n"]),
        inputs: vec![
            Preparation::TwoQubit {
                modes: [Mode::new("A"), Mode::new("B")],
                amps: input.amps,
            },
            Preparation::Chi {
                modes: [
                    Mode::new("1"),
                    Mode::new("2"),
                    Mode::new("3"),
                    Mode::new("4"),
                ],
            },
        ],
        steps: vec![
            pbs(PolBasis::HV, "A", "1", "q", "p"),
            pbs(PolBasis::HV, "B", "4", "n", "m"),
            detect(PolBasis::FS, "p"),
            detect(PolBasis::FS, "q"),
            detect(PolBasis::FS, "n"),
            detect(PolBasis::FS, "m"),
        ],
        rules: vec![
            rule("p", PolLabel::S, vec![pi_phase("2", Pol::H)]),
            rule("q", PolLabel::S, vec![pi_phase("2", Pol::H)]),
            rule("n", PolLabel::S, both()),
            rule("m", PolLabel::S, both()),
        ],
        outputs: modes(&["2", "3"]),
        ..Default::default()
    }
}

fn chi_via_cnot_circuit() -> CircuitSpec {
    let bell = |a: &str, b: &str| Preparation::Bell {
        modes: [Mode::new(a), Mode::new(b)],
    };
    CircuitSpec {
        modes: modes(&["1", "2'", "4", "3'", "a", "b", "2", "c", "3", "d"]),
        inputs: vec![bell("1", "2'"), bell("4", "3'"), bell("a", "b")],
        steps: cnot_steps(),
        rules: cnot_rules(),
        outputs: modes(&["1", "2", "3", "4"]),
        ..Default::default()
    }
}
