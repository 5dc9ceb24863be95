//! Qubit encodings, ancilla states, the gate catalog and fidelity metrics.

mod catalog;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::fock::{FockBasisState, Mode, PhotonState, PolSlot};

pub use catalog::{
    chi_via_cnot, cnot, destructive_cnot, encoder, gc_cnot, parity_check, run_circuit, Gate,
    GateInputs, GateReport,
};

/// Normalization tolerance for qubit amplitudes and fidelity inputs.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("state is not normalized (norm^2 = {0})")]
    NonNormalized(f64),
    #[error("gate {gate} expects {expected}")]
    BadInputs {
        gate: &'static str,
        expected: &'static str,
    },
}

fn check_norm(norm_sqr: f64) -> Result<(), GateError> {
    if (norm_sqr.sqrt() - 1.0).abs() > NORM_TOLERANCE {
        Err(GateError::NonNormalized(norm_sqr))
    } else {
        Ok(())
    }
}

fn random_amplitudes<R: Rng + ?Sized, const N: usize>(rng: &mut R) -> [Complex64; N] {
    let mut amps = [Complex64::default(); N];
    for a in &mut amps {
        *a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.map(|a| a / norm)
}

/// Polarization qubit `alpha |H> + beta |V>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl QubitState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, GateError> {
        check_norm(alpha.norm_sqr() + beta.norm_sqr())?;
        Ok(QubitState { alpha, beta })
    }

    pub(crate) fn unchecked(alpha: Complex64, beta: Complex64) -> Self {
        QubitState { alpha, beta }
    }

    pub fn h() -> Self {
        QubitState::unchecked(Complex64::new(1.0, 0.0), Complex64::default())
    }

    pub fn v() -> Self {
        QubitState::unchecked(Complex64::default(), Complex64::new(1.0, 0.0))
    }

    /// `(H + V)/sqrt2`.
    pub fn diagonal() -> Self {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        QubitState::unchecked(r, r)
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let [alpha, beta] = random_amplitudes(rng);
        QubitState { alpha, beta }
    }

    /// H and V exchanged.
    pub fn flipped(&self) -> Self {
        QubitState::unchecked(self.beta, self.alpha)
    }

    /// One photon in `mode` carrying this polarization.
    pub fn on(&self, mode: &Mode) -> PhotonState {
        PhotonState::from_terms([
            (
                FockBasisState::from_counts([(PolSlot::h(mode), 1)]),
                self.alpha,
            ),
            (
                FockBasisState::from_counts([(PolSlot::v(mode), 1)]),
                self.beta,
            ),
        ])
    }
}

/// Two polarization qubits with amplitudes of HH, HV, VH, VV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState {
    pub amps: [Complex64; 4],
}

impl TwoQubitState {
    pub fn new(amps: [Complex64; 4]) -> Result<Self, GateError> {
        check_norm(amps.iter().map(|a| a.norm_sqr()).sum())?;
        Ok(TwoQubitState { amps })
    }

    pub(crate) fn unchecked(amps: [Complex64; 4]) -> Self {
        TwoQubitState { amps }
    }

    /// Computational basis state: 0 = HH, 1 = HV, 2 = VH, 3 = VV.
    pub fn basis(index: usize) -> Self {
        let mut amps = [Complex64::default(); 4];
        amps[index] = Complex64::new(1.0, 0.0);
        TwoQubitState { amps }
    }

    pub fn product(first: QubitState, second: QubitState) -> Self {
        TwoQubitState {
            amps: [
                first.alpha * second.alpha,
                first.alpha * second.beta,
                first.beta * second.alpha,
                first.beta * second.beta,
            ],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        TwoQubitState {
            amps: random_amplitudes(rng),
        }
    }

    pub fn on(&self, first: &Mode, second: &Mode) -> PhotonState {
        let slots = [
            (PolSlot::h(first), PolSlot::h(second)),
            (PolSlot::h(first), PolSlot::v(second)),
            (PolSlot::v(first), PolSlot::h(second)),
            (PolSlot::v(first), PolSlot::v(second)),
        ];
        PhotonState::from_terms(
            slots
                .into_iter()
                .zip(self.amps)
                .map(|((a, b), amp)| (FockBasisState::from_counts([(a, 1), (b, 1)]), amp)),
        )
    }
}

/// Target of the controlled-NOT: the V-control amplitudes swap.
pub fn ideal_cnot(input: &TwoQubitState) -> TwoQubitState {
    let [a1, a2, a3, a4] = input.amps;
    TwoQubitState::unchecked([a1, a2, a4, a3])
}

/// `(H_m1 H_m2 + V_m1 V_m2)/sqrt2`.
pub fn bell_phi_plus(m1: &Mode, m2: &Mode) -> PhotonState {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let zero = Complex64::default();
    TwoQubitState::unchecked([r, zero, zero, r]).on(m1, m2)
}

/// Four-photon resource for the teleportation-style CNOT:
/// `(H1 H4 H2 H3 + H1 V4 H2 V3 + V1 H4 V2 V3 + V1 V4 V2 H3) / 2`.
pub fn chi_state(m1: &Mode, m2: &Mode, m3: &Mode, m4: &Mode) -> PhotonState {
    use crate::fock::Pol::{H, V};
    let half = Complex64::new(0.5, 0.0);
    // (pol1, pol4, pol2, pol3)
    let terms = [(H, H, H, H), (H, V, H, V), (V, H, V, V), (V, V, V, H)];
    PhotonState::from_terms(terms.into_iter().map(|(p1, p4, p2, p3)| {
        (
            FockBasisState::from_counts([
                (PolSlot::new(m1, p1), 1),
                (PolSlot::new(m4, p4), 1),
                (PolSlot::new(m2, p2), 1),
                (PolSlot::new(m3, p3), 1),
            ]),
            half,
        )
    }))
}

/// `|<a|b>|^2` for normalized states.
pub fn fidelity(a: &PhotonState, b: &PhotonState) -> Result<f64, GateError> {
    check_norm(a.norm_sqr())?;
    check_norm(b.norm_sqr())?;
    Ok(a.inner_product(b).norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::single;

    #[test]
    fn bell_state_shape() {
        let (a, b) = (Mode::new("a"), Mode::new("b"));
        let phi = bell_phi_plus(&a, &b);
        assert_eq!(phi.len(), 2);
        assert!((phi.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(phi
            .terms()
            .all(|(_, amp)| (amp - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16));
        let hv = single(&PolSlot::h(&a)).create(&PolSlot::v(&b));
        assert_eq!(phi.inner_product(&hv), Complex64::default());
    }

    #[test]
    fn chi_has_four_half_amplitudes() {
        let m: Vec<Mode> = ["1", "2", "3", "4"].into_iter().map(Mode::new).collect();
        let chi = chi_state(&m[0], &m[1], &m[2], &m[3]);
        assert_eq!(chi.len(), 4);
        assert!(chi.terms().all(|(_, a)| a == Complex64::new(0.5, 0.0)));
        assert!((chi.inner_product(&chi).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ideal_cnot_truth_table() {
        assert_eq!(
            ideal_cnot(&TwoQubitState::basis(0)),
            TwoQubitState::basis(0)
        );
        assert_eq!(
            ideal_cnot(&TwoQubitState::basis(2)),
            TwoQubitState::basis(3)
        );
        let x = TwoQubitState::unchecked([
            Complex64::new(0.1, 0.2),
            Complex64::new(0.3, 0.4),
            Complex64::new(0.5, 0.1),
            Complex64::new(0.2, 0.6),
        ]);
        assert_eq!(ideal_cnot(&ideal_cnot(&x)), x);
    }

    #[test]
    fn fidelity_basics() {
        let h = single(&PolSlot::h("x"));
        let v = single(&PolSlot::v("x"));
        assert_eq!(fidelity(&h, &h).unwrap(), 1.0);
        assert_eq!(fidelity(&h, &v).unwrap(), 0.0);
        let phased = h.scaled(Complex64::from_polar(1.0, 0.7));
        assert!((fidelity(&h, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            fidelity(&h.scaled(Complex64::new(2.0, 0.0)), &h),
            Err(GateError::NonNormalized(_))
        ));
    }

    #[test]
    fn qubit_validation() {
        assert!(QubitState::new(Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)).is_ok());
        assert!(QubitState::new(Complex64::new(0.6, 0.0), Complex64::new(0.6, 0.0)).is_err());
    }
}
