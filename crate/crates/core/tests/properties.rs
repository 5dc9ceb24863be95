use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use pbsgates::circuit::{
    enumerate_outcomes, execute, parse_circuit, Acceptance, CircuitSpec, DetectorSpec, ElementSpec,
    FeedForwardRule, PolLabel, Preparation, Step, Trigger,
};
use pbsgates::fock::{FockBasisState, Mode, PhotonState, Pol, PolBasis, PolSlot, Rebase};
use pbsgates::gates::{Gate, GateInputs, QubitState, TwoQubitState};
use pbsgates::optics::{OpticalElement, Pbs, PolPhase, Rotator};
use pbsgates::oracle::{compare, element_matrix, simulate, DenseBasis, DEFAULT_TRUNCATION};
use proptest::prelude::*;

const CASES: u32 = 1000;

fn cfg() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        ..ProptestConfig::default()
    }
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn slot() -> impl Strategy<Value = PolSlot> {
    (prop::sample::select(vec!["x", "y"]), prop::bool::ANY)
        .prop_map(|(m, h)| PolSlot::new(m, if h { Pol::H } else { Pol::V }))
}

/// Normalized state on modes x, y with 1 to 3 photons per term.
fn state() -> impl Strategy<Value = PhotonState> {
    prop::collection::vec((complex(), prop::collection::vec(slot(), 1..=3)), 1..6).prop_filter_map(
        "non-zero",
        |terms| {
            PhotonState::from_terms(terms.into_iter().map(|(amp, slots)| {
                let mut basis = FockBasisState::vacuum();
                for s in &slots {
                    basis = basis.with_added(s, 1);
                }
                (basis, amp)
            }))
            .normalized()
        },
    )
}

fn element() -> impl Strategy<Value = OpticalElement> {
    prop_oneof![
        prop::bool::ANY.prop_map(|fs| {
            let basis = if fs { PolBasis::FS } else { PolBasis::HV };
            OpticalElement::Pbs(Pbs::new(basis, "x", "y", "u", "w"))
        }),
        (prop::sample::select(vec!["x", "y"]), -2.0 * PI..2.0 * PI).prop_map(|(m, angle)| {
            OpticalElement::Rotator(Rotator {
                mode: Mode::new(m),
                angle,
            })
        }),
        (slot(), -2.0 * PI..2.0 * PI).prop_map(|(s, phase)| {
            OpticalElement::PolPhase(PolPhase {
                mode: s.mode,
                pol: s.pol,
                phase,
            })
        }),
    ]
}

fn unitarity_error(m: &DMatrix<Complex64>) -> f64 {
    let id = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
    (m.adjoint() * m - id)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn elements_preserve_norm_and_inner_products(a in state(), b in state(), el in element()) {
        let ua = el.apply(&a).unwrap();
        let ub = el.apply(&b).unwrap();
        prop_assert!((ua.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((ua.inner_product(&ub) - a.inner_product(&b)).norm() < 1e-12);
    }

    #[test]
    fn dense_element_matrices_are_unitary(el in element(), n in 1u32..=3) {
        let slots = if matches!(el, OpticalElement::Pbs(_)) { 4 } else { 2 };
        let m = element_matrix(&el, &DenseBasis::new(slots, n)).unwrap();
        prop_assert!(unitarity_error(&m) < 1e-12);
    }

    #[test]
    fn elements_are_linear(a in state(), b in state(), ca in complex(), cb in complex(), el in element()) {
        let lhs = el.apply(&PhotonState::superpose(&a, ca, &b, cb)).unwrap();
        let rhs = PhotonState::superpose(&el.apply(&a).unwrap(), ca, &el.apply(&b).unwrap(), cb);
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn outcome_probabilities_are_complete(
        s in state(),
        el in element(),
        bases in (prop::bool::ANY, prop::bool::ANY),
    ) {
        let out = el.apply(&s).unwrap();
        let modes: Vec<Mode> = out.modes().into_iter().collect();
        let detectors: Vec<DetectorSpec> = modes
            .iter()
            .zip([bases.0, bases.1])
            .map(|(m, fs)| DetectorSpec {
                mode: m.clone(),
                basis: if fs { PolBasis::FS } else { PolBasis::HV },
                label: m.as_str().to_string(),
            })
            .collect();
        let total: f64 = enumerate_outcomes(&out, &detectors).values().map(|b| b.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rebase_round_trip(s in state(), fs_first in prop::bool::ANY) {
        let m = Mode::new("x");
        let (there, back) = if fs_first {
            (Rebase::HvToFs, Rebase::FsToHv)
        } else {
            (Rebase::FsToHv, Rebase::HvToFs)
        };
        let moved = s.rebase_polarization(&m, there);
        prop_assert!((moved.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(moved.rebase_polarization(&m, back).approx_eq(&s, 1e-12));
    }

    #[test]
    fn pi_phase_is_an_involution(s in state(), sl in slot()) {
        let el = OpticalElement::PolPhase(PolPhase { mode: sl.mode, pol: sl.pol, phase: PI });
        let twice = el.apply(&el.apply(&s).unwrap()).unwrap();
        prop_assert!(twice.approx_eq(&s, 1e-12));
    }
}

fn qubit_amps() -> impl Strategy<Value = (Complex64, Complex64)> {
    (complex(), complex()).prop_filter_map("non-zero", |(a, b)| {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        (n > 1e-3).then(|| (a / n, b / n))
    })
}

fn correction() -> impl Strategy<Value = ElementSpec> {
    prop_oneof![
        (-360.0f64..360.0).prop_map(|degrees| ElementSpec::Rotate {
            mode: Mode::new("u"),
            degrees,
        }),
        (prop::bool::ANY, -360.0f64..360.0).prop_map(|(h, degrees)| ElementSpec::PolPhase {
            mode: Mode::new("u"),
            pol: if h { Pol::H } else { Pol::V },
            degrees,
        }),
    ]
}

fn pol_label(basis: PolBasis) -> impl Strategy<Value = PolLabel> {
    prop::bool::ANY.prop_map(move |t| PolLabel::from_channel(basis, t))
}

/// Random valid two-photon circuit.
fn circuit() -> impl Strategy<Value = CircuitSpec> {
    (
        qubit_amps(),
        qubit_amps(),
        prop::collection::vec(correction(), 0..3),
        prop::bool::ANY,
        prop::bool::ANY,
        prop::collection::vec(correction(), 1..3),
        prop::bool::ANY,
    )
        .prop_flat_map(|(qx, qy, pre, pbs_fs, det_fs, corr, passive)| {
            let det_basis = if det_fs { PolBasis::FS } else { PolBasis::HV };
            pol_label(det_basis).prop_map(move |pol| {
                let pbs_basis = if pbs_fs { PolBasis::FS } else { PolBasis::HV };
                let mut steps = vec![Step::Element(ElementSpec::Pbs(Pbs::new(
                    pbs_basis, "x", "y", "u", "w",
                )))];
                steps.extend(pre.iter().cloned().map(Step::Element));
                steps.push(Step::Detect(DetectorSpec {
                    mode: Mode::new("w"),
                    basis: det_basis,
                    label: "w".into(),
                }));
                CircuitSpec {
                    modes: ["x", "y", "u", "w"].into_iter().map(Mode::new).collect(),
                    inputs: vec![
                        Preparation::Qubit {
                            mode: Mode::new("x"),
                            h: qx.0,
                            v: qx.1,
                        },
                        Preparation::Qubit {
                            mode: Mode::new("y"),
                            h: qy.0,
                            v: qy.1,
                        },
                    ],
                    steps,
                    rules: vec![FeedForwardRule {
                        trigger: Trigger {
                            label: "w".into(),
                            pol,
                        },
                        corrections: corr.clone(),
                    }],
                    outputs: vec![Mode::new("u")],
                    acceptance: if passive {
                        Acceptance::Passive
                    } else {
                        Acceptance::AllSingles
                    },
                    ideal: None,
                }
            })
        })
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn parser_round_trip(spec in circuit()) {
        spec.validate().unwrap();
        let text = spec.to_text();
        let parsed = parse_circuit(&text).unwrap();
        prop_assert_eq!(parsed, spec);
    }

    #[test]
    fn parser_never_panics_on_garbage(text in "[ -~\\n\\t;#:']{0,200}") {
        let _ = parse_circuit(&text);
    }

    #[test]
    fn parser_never_panics_on_mutations(
        spec in circuit(),
        edits in prop::collection::vec((any::<prop::sample::Index>(), 0u8..3, "[ -~\\n]"), 1..6),
    ) {
        let mut chars: Vec<char> = spec.to_text().chars().collect();
        for (at, kind, s) in edits {
            let c = s.chars().next().unwrap_or(' ');
            let i = at.index(chars.len().max(1)).min(chars.len());
            match kind {
                0 if i < chars.len() => { chars.remove(i); }
                1 => chars.insert(i, c),
                _ if i < chars.len() => chars[i] = c,
                _ => chars.push(c),
            }
        }
        let text: String = chars.into_iter().collect();
        if let Ok(spec) = parse_circuit(&text) {
            // anything that parses must also execute or fail cleanly
            let _ = execute(&spec);
        }
    }

    #[test]
    fn random_circuits_complete_and_match_oracle(spec in circuit()) {
        let sparse = execute(&spec).unwrap();
        prop_assert!((sparse.total_probability() - 1.0).abs() < 1e-12);
        let dense = simulate(&spec, DEFAULT_TRUNCATION).unwrap();
        let agreement = compare(&sparse, &dense);
        prop_assert!(agreement.within(1e-10, 1e-12), "{:?}", agreement);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn success_is_input_independent(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = QubitState::random(&mut rng);
        let t = TwoQubitState::random(&mut rng);
        let one = |g: Gate, qubits: Vec<QubitState>| {
            let spec = g.circuit(&GateInputs { qubits, two_qubit: None }, Acceptance::AllSingles).unwrap();
            execute(&spec).unwrap().success_probability
        };
        let two = |g: Gate| {
            let spec = g.circuit(&GateInputs { qubits: vec![], two_qubit: Some(t) }, Acceptance::AllSingles).unwrap();
            execute(&spec).unwrap().success_probability
        };
        prop_assert!((one(Gate::ParityCheck, vec![q]) - 0.5).abs() < 1e-12);
        prop_assert!((one(Gate::Encoder, vec![q]) - 0.5).abs() < 1e-12);
        prop_assert!((one(Gate::DestructiveCnot, vec![q, QubitState::v()]) - 0.5).abs() < 1e-12);
        prop_assert!((two(Gate::Cnot) - 0.25).abs() < 1e-12);
        prop_assert!((two(Gate::GcCnot) - 0.25).abs() < 1e-12);
    }
}
