//! Ideal optical elements acting on [`PhotonState`]s.
//!
//! Port routing for a polarizing beam splitter: the transmitted polarization
//! (H or F) goes `in1 -> out1` and `in2 -> out2`, the reflected one (V or S)
//! goes `in1 -> out2` and `in2 -> out1`. All routing coefficients are +1.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{Mode, PhotonState, Pol, PolBasis, PolSlot, Rebase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpticsError {
    #[error("output port {0} collides with a mode that already carries photons")]
    ModeCollision(Mode),
    #[error("beam splitter ports must be distinct: {0}")]
    InvalidPorts(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pbs {
    pub in1: Mode,
    pub in2: Mode,
    pub out1: Mode,
    pub out2: Mode,
    pub basis: PolBasis,
}

impl Pbs {
    pub fn new(
        basis: PolBasis,
        in1: impl Into<Mode>,
        in2: impl Into<Mode>,
        out1: impl Into<Mode>,
        out2: impl Into<Mode>,
    ) -> Self {
        Pbs {
            in1: in1.into(),
            in2: in2.into(),
            out1: out1.into(),
            out2: out2.into(),
            basis,
        }
    }

    /// The same splitter traversed backwards.
    pub fn reversed(&self) -> Self {
        Pbs {
            in1: self.out1.clone(),
            in2: self.out2.clone(),
            out1: self.in1.clone(),
            out2: self.in2.clone(),
            basis: self.basis,
        }
    }
}

/// Orthogonal polarization rotation: `H -> cos H + sin V`, `V -> -sin H + cos V`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotator {
    pub mode: Mode,
    pub angle: f64,
}

/// Phase `e^{i phase}` per photon in `(mode, pol)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolPhase {
    pub mode: Mode,
    pub pol: Pol,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OpticalElement {
    Pbs(Pbs),
    Rotator(Rotator),
    PolPhase(PolPhase),
}

impl OpticalElement {
    pub fn apply(&self, state: &PhotonState) -> Result<PhotonState, OpticsError> {
        match self {
            OpticalElement::Pbs(p) => apply_pbs(state, p),
            OpticalElement::Rotator(r) => Ok(apply_rotator(state, r)),
            OpticalElement::PolPhase(p) => Ok(apply_pol_phase(state, p)),
        }
    }

    /// Modes the element reads from.
    pub fn input_modes(&self) -> Vec<&Mode> {
        match self {
            OpticalElement::Pbs(p) => vec![&p.in1, &p.in2],
            OpticalElement::Rotator(r) => vec![&r.mode],
            OpticalElement::PolPhase(p) => vec![&p.mode],
        }
    }
}

impl fmt::Display for OpticalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpticalElement::Pbs(p) => write!(
                f,
                "pbs[{}] {},{} -> {},{}",
                p.basis, p.in1, p.in2, p.out1, p.out2
            ),
            OpticalElement::Rotator(r) => write!(f, "rotate {} by {} rad", r.mode, r.angle),
            OpticalElement::PolPhase(p) => {
                write!(f, "phase {} on {}_{}", p.phase, p.pol, p.mode)
            }
        }
    }
}

pub fn apply_pbs(state: &PhotonState, el: &Pbs) -> Result<PhotonState, OpticsError> {
    if el.in1 == el.in2 {
        return Err(OpticsError::InvalidPorts(format!("in1 = in2 = {}", el.in1)));
    }
    if el.out1 == el.out2 {
        return Err(OpticsError::InvalidPorts(format!(
            "out1 = out2 = {}",
            el.out1
        )));
    }
    let live = state.modes();
    for out in [&el.out1, &el.out2] {
        if out != &el.in1 && out != &el.in2 && live.contains(out) {
            return Err(OpticsError::ModeCollision(out.clone()));
        }
    }

    let one = Complex64::new(1.0, 0.0);
    let route = |slot: &PolSlot| -> Option<Vec<(PolSlot, Complex64)>> {
        let target = match (slot.mode == el.in1, slot.mode == el.in2, slot.pol) {
            (true, _, Pol::H) => PolSlot::h(&el.out1),
            (true, _, Pol::V) => PolSlot::v(&el.out2),
            (_, true, Pol::H) => PolSlot::h(&el.out2),
            (_, true, Pol::V) => PolSlot::v(&el.out1),
            _ => return None,
        };
        Some(vec![(target, one)])
    };

    Ok(match el.basis {
        PolBasis::HV => state.substitute(route),
        PolBasis::FS => state
            .rebase_polarization(&el.in1, Rebase::HvToFs)
            .rebase_polarization(&el.in2, Rebase::HvToFs)
            .substitute(route)
            .rebase_polarization(&el.out1, Rebase::FsToHv)
            .rebase_polarization(&el.out2, Rebase::FsToHv),
    })
}

pub fn apply_rotator(state: &PhotonState, el: &Rotator) -> PhotonState {
    let (sin, cos) = el.angle.sin_cos();
    let h = PolSlot::h(&el.mode);
    let v = PolSlot::v(&el.mode);
    let c = |x: f64| Complex64::new(x, 0.0);
    state.substitute(|slot| {
        (slot.mode == el.mode).then(|| match slot.pol {
            Pol::H => vec![(h.clone(), c(cos)), (v.clone(), c(sin))],
            Pol::V => vec![(h.clone(), c(-sin)), (v.clone(), c(cos))],
        })
    })
}

pub fn apply_pol_phase(state: &PhotonState, el: &PolPhase) -> PhotonState {
    let slot = PolSlot::new(&el.mode, el.pol);
    state.map_phases(|basis| {
        let k = basis.count(&slot);
        Complex64::from_polar(1.0, el.phase * f64::from(k))
    })
}
