//! Circuit descriptions, validation, and post-selected execution.

mod engine;
mod outcome;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{FockBasisState, Mode, PhotonState, Pol, PolBasis};
use crate::gates;
use crate::optics::{OpticalElement, Pbs, PolPhase, Rotator};

pub use engine::{
    apply_feedforward, execute, execute_with, ExecError, ExecOptions, GateResult, OutcomeBranch,
};
pub use outcome::{enumerate_outcomes, DetectorReading, OutcomePattern};
pub use parse::{parse_circuit, ParseError};

/// Polarization symbol as written in circuit text and trigger conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolLabel {
    H,
    V,
    F,
    S,
}

impl PolLabel {
    pub fn basis(self) -> PolBasis {
        match self {
            PolLabel::H | PolLabel::V => PolBasis::HV,
            PolLabel::F | PolLabel::S => PolBasis::FS,
        }
    }

    /// True for the transmitted polarization of its basis (H or F).
    pub fn is_transmitted(self) -> bool {
        matches!(self, PolLabel::H | PolLabel::F)
    }

    pub fn from_channel(basis: PolBasis, transmitted: bool) -> Self {
        match (basis, transmitted) {
            (PolBasis::HV, true) => PolLabel::H,
            (PolBasis::HV, false) => PolLabel::V,
            (PolBasis::FS, true) => PolLabel::F,
            (PolBasis::FS, false) => PolLabel::S,
        }
    }
}

impl fmt::Display for PolLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolLabel::H => "H",
            PolLabel::V => "V",
            PolLabel::F => "F",
            PolLabel::S => "S",
        })
    }
}

/// An input state prepared before the first element.
#[derive(Clone, Debug, PartialEq)]
pub enum Preparation {
    /// `h |H> + v |V>` on one mode.
    Qubit {
        mode: Mode,
        h: Complex64,
        v: Complex64,
    },
    /// Amplitudes of HH, HV, VH, VV on two modes.
    TwoQubit {
        modes: [Mode; 2],
        amps: [Complex64; 4],
    },
    /// `(HH + VV)/sqrt2`.
    Bell { modes: [Mode; 2] },
    /// The four-photon resource on modes (1, 2, 3, 4).
    Chi { modes: [Mode; 4] },
    /// Explicit superposition; each amplitude multiplies a normalized Fock state.
    Terms(Vec<(Complex64, FockBasisState)>),
}

impl Preparation {
    pub fn modes(&self) -> Vec<Mode> {
        match self {
            Preparation::Qubit { mode, .. } => vec![mode.clone()],
            Preparation::TwoQubit { modes, .. } | Preparation::Bell { modes } => modes.to_vec(),
            Preparation::Chi { modes } => modes.to_vec(),
            Preparation::Terms(terms) => terms
                .iter()
                .flat_map(|(_, b)| b.modes().cloned().collect::<Vec<_>>())
                .collect(),
        }
    }

    pub fn build(&self) -> PhotonState {
        match self {
            Preparation::Qubit { mode, h, v } => gates::QubitState::unchecked(*h, *v).on(mode),
            Preparation::TwoQubit { modes, amps } => {
                gates::TwoQubitState::unchecked(*amps).on(&modes[0], &modes[1])
            }
            Preparation::Bell { modes } => gates::bell_phi_plus(&modes[0], &modes[1]),
            Preparation::Chi { modes } => {
                gates::chi_state(&modes[0], &modes[1], &modes[2], &modes[3])
            }
            Preparation::Terms(terms) => {
                PhotonState::from_terms(terms.iter().map(|(a, b)| (b.clone(), *a)))
            }
        }
    }
}

/// An element as written in a circuit; angles are in degrees.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementSpec {
    Pbs(Pbs),
    Rotate { mode: Mode, degrees: f64 },
    PolPhase { mode: Mode, pol: Pol, degrees: f64 },
}

impl ElementSpec {
    pub fn to_element(&self) -> OpticalElement {
        match self {
            ElementSpec::Pbs(p) => OpticalElement::Pbs(p.clone()),
            ElementSpec::Rotate { mode, degrees } => OpticalElement::Rotator(Rotator {
                mode: mode.clone(),
                angle: degrees * PI / 180.0,
            }),
            ElementSpec::PolPhase { mode, pol, degrees } => OpticalElement::PolPhase(PolPhase {
                mode: mode.clone(),
                pol: *pol,
                phase: degrees * PI / 180.0,
            }),
        }
    }

    /// Modes the element touches, in field order.
    pub fn modes(&self) -> Vec<&Mode> {
        match self {
            ElementSpec::Pbs(p) => vec![&p.in1, &p.in2, &p.out1, &p.out2],
            ElementSpec::Rotate { mode, .. } | ElementSpec::PolPhase { mode, .. } => vec![mode],
        }
    }
}

/// Polarization-resolving detector: a splitter in `basis` and two counters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectorSpec {
    pub mode: Mode,
    pub basis: PolBasis,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Element(ElementSpec),
    Detect(DetectorSpec),
}

/// Fires when detector `label` registers exactly one photon, in `pol`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trigger {
    pub label: String,
    pub pol: PolLabel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeedForwardRule {
    pub trigger: Trigger,
    pub corrections: Vec<ElementSpec>,
}

/// Which detection patterns count as success.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Acceptance {
    /// Every detector sees exactly one photon.
    #[default]
    AllSingles,
    /// As above, and no feed-forward rule fires.
    Passive,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CircuitSpec {
    pub modes: Vec<Mode>,
    pub inputs: Vec<Preparation>,
    pub steps: Vec<Step>,
    pub rules: Vec<FeedForwardRule>,
    pub outputs: Vec<Mode>,
    pub acceptance: Acceptance,
    /// Catalog gate whose ideal transformation this circuit implements.
    pub ideal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared mode `{0}`")]
    UndeclaredMode(Mode),
    #[error("mode `{0}` declared twice")]
    DuplicateMode(Mode),
    #[error("mode `{0}` was already detected")]
    DetectedModeReuse(Mode),
    #[error("mode `{0}` was consumed by an earlier beam splitter")]
    ConsumedModeReuse(Mode),
    #[error("output port `{0}` collides with a live mode")]
    ModeCollision(Mode),
    #[error("mode `{0}` is prepared by more than one input")]
    InputOverlap(Mode),
    #[error("beam splitter ports must be distinct (`{0}` repeated)")]
    InvalidPorts(Mode),
    #[error("detector label `{0}` used twice")]
    DuplicateLabel(String),
    #[error("unknown detector `{0}`")]
    UnknownDetector(String),
    #[error("polarization {pol} does not belong to the {basis} basis of detector `{label}`")]
    BasisMismatch {
        label: String,
        pol: PolLabel,
        basis: PolBasis,
    },
    #[error("feed-forward corrections may only rotate or phase-shift")]
    InvalidCorrection,
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("circuit declares no output modes")]
    MissingOutput,
}

/// Where a validation error points: an item and a field within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Item {
    Mode(usize),
    Input(usize),
    Step(usize),
    Rule(usize),
    Output(usize),
    Ideal,
    Document,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Site {
    pub item: Item,
    pub field: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ModeState {
    Fresh,
    Live,
    Consumed,
    Detected,
}

impl CircuitSpec {
    pub fn validate(&self) -> Result<(), CircuitError> {
        self.validate_sites().map_err(|(e, _)| e)
    }

    pub fn detectors(&self) -> impl Iterator<Item = &DetectorSpec> + '_ {
        self.steps.iter().filter_map(|s| match s {
            Step::Detect(d) => Some(d),
            Step::Element(_) => None,
        })
    }

    pub(crate) fn validate_sites(&self) -> Result<(), (CircuitError, Site)> {
        let at = |item, field| Site { item, field };
        let mut state: BTreeMap<&Mode, ModeState> = BTreeMap::new();
        for (i, m) in self.modes.iter().enumerate() {
            if state.insert(m, ModeState::Fresh).is_some() {
                return Err((CircuitError::DuplicateMode(m.clone()), at(Item::Mode(i), 0)));
            }
        }
        let declared = |m: &Mode, site: Site| -> Result<(), (CircuitError, Site)> {
            if self.modes.contains(m) {
                Ok(())
            } else {
                Err((CircuitError::UndeclaredMode(m.clone()), site))
            }
        };

        for (i, prep) in self.inputs.iter().enumerate() {
            let modes = prep.modes();
            let mut seen = BTreeSet::new();
            for (f, m) in modes.iter().enumerate() {
                declared(m, at(Item::Input(i), f))?;
                let fresh_here = seen.insert(m.clone());
                let repeated_in_prep = !fresh_here && !matches!(prep, Preparation::Terms(_));
                let s = state.get_mut(m).expect("declared");
                if repeated_in_prep || (fresh_here && *s == ModeState::Live) {
                    return Err((CircuitError::InputOverlap(m.clone()), at(Item::Input(i), f)));
                }
                *s = ModeState::Live;
            }
        }

        let reuse = |s: ModeState, m: &Mode| match s {
            ModeState::Detected => Some(CircuitError::DetectedModeReuse(m.clone())),
            ModeState::Consumed => Some(CircuitError::ConsumedModeReuse(m.clone())),
            _ => None,
        };
        let mut labels: BTreeMap<&str, PolBasis> = BTreeMap::new();

        for (i, step) in self.steps.iter().enumerate() {
            let site = |f| at(Item::Step(i), f);
            match step {
                Step::Element(el) => {
                    for (f, m) in el.modes().into_iter().enumerate() {
                        declared(m, site(f))?;
                    }
                    match el {
                        ElementSpec::Pbs(p) => {
                            if p.in1 == p.in2 {
                                return Err((CircuitError::InvalidPorts(p.in2.clone()), site(1)));
                            }
                            if p.out1 == p.out2 {
                                return Err((CircuitError::InvalidPorts(p.out2.clone()), site(3)));
                            }
                            for (f, m) in [(0, &p.in1), (1, &p.in2)] {
                                if let Some(e) = reuse(state[m], m) {
                                    return Err((e, site(f)));
                                }
                            }
                            for (f, m) in [(2, &p.out1), (3, &p.out2)] {
                                if m == &p.in1 || m == &p.in2 {
                                    continue;
                                }
                                if let Some(e) = reuse(state[m], m) {
                                    return Err((e, site(f)));
                                }
                                if state[m] == ModeState::Live {
                                    return Err((CircuitError::ModeCollision(m.clone()), site(f)));
                                }
                            }
                            for m in [&p.in1, &p.in2] {
                                if m != &p.out1 && m != &p.out2 {
                                    state.insert(m, ModeState::Consumed);
                                }
                            }
                            state.insert(&p.out1, ModeState::Live);
                            state.insert(&p.out2, ModeState::Live);
                        }
                        ElementSpec::Rotate { mode, .. } | ElementSpec::PolPhase { mode, .. } => {
                            if let Some(e) = reuse(state[mode], mode) {
                                return Err((e, site(0)));
                            }
                        }
                    }
                }
                Step::Detect(d) => {
                    declared(&d.mode, site(0))?;
                    if let Some(e) = reuse(state[&d.mode], &d.mode) {
                        return Err((e, site(0)));
                    }
                    if labels.insert(&d.label, d.basis).is_some() {
                        return Err((CircuitError::DuplicateLabel(d.label.clone()), site(1)));
                    }
                    state.insert(&d.mode, ModeState::Detected);
                }
            }
        }

        for (i, rule) in self.rules.iter().enumerate() {
            let site = |f| at(Item::Rule(i), f);
            let Some(&basis) = labels.get(rule.trigger.label.as_str()) else {
                return Err((
                    CircuitError::UnknownDetector(rule.trigger.label.clone()),
                    site(0),
                ));
            };
            if rule.trigger.pol.basis() != basis {
                return Err((
                    CircuitError::BasisMismatch {
                        label: rule.trigger.label.clone(),
                        pol: rule.trigger.pol,
                        basis,
                    },
                    site(1),
                ));
            }
            for (k, corr) in rule.corrections.iter().enumerate() {
                let f = 2 + k;
                let mode = match corr {
                    ElementSpec::Pbs(_) => return Err((CircuitError::InvalidCorrection, site(f))),
                    ElementSpec::Rotate { mode, .. } | ElementSpec::PolPhase { mode, .. } => mode,
                };
                declared(mode, site(f))?;
                if let Some(e) = reuse(state[mode], mode) {
                    return Err((e, site(f)));
                }
            }
        }

        if self.outputs.is_empty() {
            return Err((CircuitError::MissingOutput, at(Item::Document, 0)));
        }
        let mut seen = BTreeSet::new();
        for (i, m) in self.outputs.iter().enumerate() {
            declared(m, at(Item::Output(i), 0))?;
            if let Some(e) = reuse(state[m], m) {
                return Err((e, at(Item::Output(i), 0)));
            }
            if !seen.insert(m) {
                return Err((
                    CircuitError::DuplicateMode(m.clone()),
                    at(Item::Output(i), 0),
                ));
            }
        }

        if let Some(name) = &self.ideal {
            if gates::Gate::from_name(name).is_none() {
                return Err((CircuitError::UnknownGate(name.clone()), at(Item::Ideal, 0)));
            }
        }
        Ok(())
    }

    /// Renders the circuit in the line-oriented text format.
    pub fn to_text(&self) -> String {
        parse::pretty_print(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> CircuitSpec {
        CircuitSpec {
            modes: ["x", "y", "u", "w"].into_iter().map(Mode::new).collect(),
            inputs: vec![Preparation::Bell {
                modes: [Mode::new("x"), Mode::new("y")],
            }],
            steps: vec![Step::Element(ElementSpec::Pbs(Pbs::new(
                PolBasis::HV,
                "x",
                "y",
                "u",
                "w",
            )))],
            rules: vec![],
            outputs: vec![Mode::new("u"), Mode::new("w")],
            acceptance: Acceptance::AllSingles,
            ideal: None,
        }
    }

    #[test]
    fn base_is_valid() {
        base().validate().unwrap();
    }

    #[test]
    fn consumed_input_cannot_be_output() {
        let mut c = base();
        c.outputs.push(Mode::new("x"));
        assert_eq!(
            c.validate(),
            Err(CircuitError::ConsumedModeReuse(Mode::new("x")))
        );
    }

    #[test]
    fn detected_output_is_rejected() {
        let mut c = base();
        c.steps.push(Step::Detect(DetectorSpec {
            mode: Mode::new("u"),
            basis: PolBasis::FS,
            label: "k".into(),
        }));
        assert_eq!(
            c.validate(),
            Err(CircuitError::DetectedModeReuse(Mode::new("u")))
        );
    }

    #[test]
    fn collision_and_missing_output() {
        let mut c = base();
        c.modes.push(Mode::new("z"));
        c.inputs.push(Preparation::Qubit {
            mode: Mode::new("z"),
            h: Complex64::new(1.0, 0.0),
            v: Complex64::default(),
        });
        c.steps.push(Step::Element(ElementSpec::Pbs(Pbs::new(
            PolBasis::FS,
            "u",
            "w",
            "z",
            "y",
        ))));
        assert_eq!(
            c.validate(),
            Err(CircuitError::ModeCollision(Mode::new("z")))
        );

        let mut c = base();
        c.outputs.clear();
        assert_eq!(c.validate(), Err(CircuitError::MissingOutput));
    }

    #[test]
    fn trigger_basis_must_match_detector() {
        let mut c = base();
        c.outputs = vec![Mode::new("u")];
        c.steps.push(Step::Detect(DetectorSpec {
            mode: Mode::new("w"),
            basis: PolBasis::HV,
            label: "d".into(),
        }));
        c.rules.push(FeedForwardRule {
            trigger: Trigger {
                label: "d".into(),
                pol: PolLabel::S,
            },
            corrections: vec![],
        });
        assert!(matches!(
            c.validate(),
            Err(CircuitError::BasisMismatch { .. })
        ));
        c.rules[0].trigger.label = "nope".into();
        assert_eq!(
            c.validate(),
            Err(CircuitError::UnknownDetector("nope".into()))
        );
    }
}
