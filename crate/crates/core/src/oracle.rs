//! Brute-force dense reference simulator.
//!
//! Everything here is deliberately naive: element unitaries are built entry
//! by entry from permanents of single-photon matrices, states are dense
//! vectors over every occupation pattern with at most `N` photons, and
//! detection uses 0/1 projectors. It shares no evolution code with the
//! sparse engine and exists to cross-check it.
//!
//! Modes are mapped to *wires*: a splitter's outputs inherit the wires of
//! its inputs, so the dense basis only has to cover the modes alive at one
//! time. Slot `2 * wire` is H and `2 * wire + 1` is V.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{
    Acceptance, CircuitError, CircuitSpec, DetectorReading, ElementSpec, FeedForwardRule,
    GateResult, OutcomePattern, PolLabel, Step,
};
use crate::fock::{FockBasisState, Mode, PhotonState, Pol, PolBasis, PolSlot};
use crate::optics::{OpticalElement, Pbs};

/// Photon-number cutoff large enough for every built-in circuit.
pub const DEFAULT_TRUNCATION: u32 = 6;

/// Branches below this weight are treated as impossible outcomes.
const NEGLIGIBLE_PROBABILITY: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("state carries {photons} photons but the truncation is {truncation}")]
    TruncationTooSmall { photons: u32, truncation: u32 },
    #[error("basis has {actual} slots, element needs {expected}")]
    SlotMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Invalid(#[from] CircuitError),
}

/// All occupation vectors over `slots` slots with at most `max_photons`
/// photons, in lexicographic order.
#[derive(Clone, Debug)]
pub struct DenseBasis {
    slots: usize,
    max_photons: u32,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl DenseBasis {
    pub fn new(slots: usize, max_photons: u32) -> Self {
        let mut states = Vec::new();
        let mut current = vec![0u32; slots];
        fill(&mut current, 0, max_photons, &mut states);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        DenseBasis {
            slots,
            max_photons,
            states,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn max_photons(&self) -> u32 {
        self.max_photons
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u32]) -> Result<usize, OracleError> {
        self.index
            .get(occupation)
            .copied()
            .ok_or(OracleError::TruncationTooSmall {
                photons: occupation.iter().sum(),
                truncation: self.max_photons,
            })
    }
}

fn fill(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    for n in 0..=remaining {
        current[pos] = n;
        fill(current, pos + 1, remaining - n, out);
    }
    current[pos] = 0;
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn permanent(m: &DMatrix<Complex64>) -> Complex64 {
    fn go(m: &DMatrix<Complex64>, row: usize, used: &mut Vec<bool>) -> Complex64 {
        if row == m.nrows() {
            return Complex64::new(1.0, 0.0);
        }
        let mut sum = Complex64::default();
        for col in 0..m.ncols() {
            if !used[col] && m[(row, col)] != Complex64::default() {
                used[col] = true;
                sum += m[(row, col)] * go(m, row + 1, used);
                used[col] = false;
            }
        }
        sum
    }
    go(m, 0, &mut vec![false; m.ncols()])
}

fn repeated(occupation: &[u32]) -> Vec<usize> {
    occupation
        .iter()
        .enumerate()
        .flat_map(|(slot, &n)| std::iter::repeat_n(slot, n as usize))
        .collect()
}

/// Lifts a single-photon unitary `u` (columns are images of each slot's
/// creation operator) to the Fock space spanned by `basis`:
/// `<m|U|n> = perm(u[m, n]) / sqrt(prod m! prod n!)`.
pub fn lift(u: &DMatrix<Complex64>, basis: &DenseBasis) -> Result<DMatrix<Complex64>, OracleError> {
    if u.nrows() != basis.slots() || u.ncols() != basis.slots() {
        return Err(OracleError::SlotMismatch {
            expected: u.nrows(),
            actual: basis.slots(),
        });
    }
    let dim = basis.dim();
    let mut out = DMatrix::zeros(dim, dim);
    for (j, n) in basis.states().iter().enumerate() {
        let cols = repeated(n);
        let norm_n: f64 = n.iter().map(|&k| factorial(k)).product();
        for (i, m) in basis.states().iter().enumerate() {
            let rows = repeated(m);
            if rows.len() != cols.len() {
                continue;
            }
            let sub = DMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])]);
            let norm_m: f64 = m.iter().map(|&k| factorial(k)).product();
            out[(i, j)] = permanent(&sub) / (norm_m * norm_n).sqrt();
        }
    }
    Ok(out)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// 2x2 single-photon matrix taking HV amplitudes to the basis whose
/// transmitted/reflected channels sit in the H/V slots.
fn to_basis(basis: PolBasis) -> DMatrix<Complex64> {
    let r = FRAC_1_SQRT_2;
    match basis {
        PolBasis::HV => DMatrix::identity(2, 2),
        // H = (F - S)/sqrt2, V = (F + S)/sqrt2
        PolBasis::FS => DMatrix::from_row_slice(2, 2, &[c(r), c(r), c(-r), c(r)]),
    }
}

fn block_diag2(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(4, 4);
    out.view_mut((0, 0), (2, 2)).copy_from(a);
    out.view_mut((2, 2), (2, 2)).copy_from(a);
    out
}

/// Single-photon matrix of an element. Local slots are `[in1 H, in1 V,
/// in2 H, in2 V]` for a splitter (outputs take over the input wires) and
/// `[H, V]` otherwise.
pub fn single_photon_matrix(el: &OpticalElement) -> DMatrix<Complex64> {
    match el {
        OpticalElement::Pbs(p) => {
            // transmitted stays on its wire, reflected swaps wires
            let mut route = DMatrix::zeros(4, 4);
            route[(0, 0)] = c(1.0);
            route[(3, 1)] = c(1.0);
            route[(2, 2)] = c(1.0);
            route[(1, 3)] = c(1.0);
            let b = block_diag2(&to_basis(p.basis));
            b.adjoint() * route * b
        }
        OpticalElement::Rotator(r) => {
            let (s, co) = r.angle.sin_cos();
            DMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
        }
        OpticalElement::PolPhase(p) => {
            let mut m = DMatrix::identity(2, 2);
            let k = match p.pol {
                Pol::H => 0,
                Pol::V => 1,
            };
            m[(k, k)] = Complex64::from_polar(1.0, p.phase);
            m
        }
    }
}

/// Fock-space matrix of `el` over a local basis of 4 (splitter) or 2 slots.
pub fn element_matrix(
    el: &OpticalElement,
    basis: &DenseBasis,
) -> Result<DMatrix<Complex64>, OracleError> {
    lift(&single_photon_matrix(el), basis)
}

/// Diagonal of the projector onto `pattern`, given the (transmitted,
/// reflected) slot pair of each detector after its wire has been rotated
/// into the detection basis. Entries are exactly 0 or 1.
pub fn outcome_projector(
    pattern: &OutcomePattern,
    detector_slots: &[(usize, usize)],
    basis: &DenseBasis,
) -> Vec<f64> {
    basis
        .states()
        .iter()
        .map(|occ| {
            let hit = pattern
                .readings()
                .iter()
                .zip(detector_slots)
                .all(|(r, &(t, f))| occ[t] == r.transmitted && occ[f] == r.reflected);
            if hit {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Dense state over named wires.
struct DenseState {
    basis: Arc<DenseBasis>,
    amps: Vec<Complex64>,
    wires: BTreeMap<Mode, usize>,
}

impl DenseState {
    /// Applies a local matrix acting on `local_slots`.
    fn apply_local(
        &mut self,
        local: &DMatrix<Complex64>,
        local_basis: &DenseBasis,
        local_slots: &[usize],
    ) -> Result<(), OracleError> {
        let mut out = vec![Complex64::default(); self.amps.len()];
        for (i, &amp) in self.amps.iter().enumerate() {
            if amp == Complex64::default() {
                continue;
            }
            let occ = self.basis.state(i);
            let sub: Vec<u32> = local_slots.iter().map(|&s| occ[s]).collect();
            let j = local_basis.index_of(&sub)?;
            for (r, local_occ) in local_basis.states().iter().enumerate() {
                let m = local[(r, j)];
                if m == Complex64::default() {
                    continue;
                }
                let mut next = occ.to_vec();
                for (k, &s) in local_slots.iter().enumerate() {
                    next[s] = local_occ[k];
                }
                out[self.basis.index_of(&next)?] += m * amp;
            }
        }
        self.amps = out;
        Ok(())
    }

    fn apply(&mut self, el: &OpticalElement) -> Result<(), OracleError> {
        let n = self.basis.max_photons();
        match el {
            OpticalElement::Pbs(p) => {
                let w1 = self.wire(&p.in1);
                let w2 = self.wire(&p.in2);
                let local_basis = DenseBasis::new(4, n);
                let m = element_matrix(el, &local_basis)?;
                self.apply_local(&m, &local_basis, &[2 * w1, 2 * w1 + 1, 2 * w2, 2 * w2 + 1])?;
                self.wires.remove(&p.in1);
                self.wires.remove(&p.in2);
                self.wires.insert(p.out1.clone(), w1);
                self.wires.insert(p.out2.clone(), w2);
            }
            OpticalElement::Rotator(r) => self.apply_single_wire(el, &r.mode)?,
            OpticalElement::PolPhase(p) => self.apply_single_wire(el, &p.mode)?,
        }
        Ok(())
    }

    fn apply_single_wire(&mut self, el: &OpticalElement, mode: &Mode) -> Result<(), OracleError> {
        let local_basis = DenseBasis::new(2, self.basis.max_photons());
        let m = element_matrix(el, &local_basis)?;
        let w = self.wire(mode);
        self.apply_local(&m, &local_basis, &[2 * w, 2 * w + 1])
    }

    fn rotate_into(&mut self, mode: &Mode, basis: PolBasis) -> Result<(), OracleError> {
        let local_basis = DenseBasis::new(2, self.basis.max_photons());
        let m = lift(&to_basis(basis), &local_basis)?;
        let w = self.wire(mode);
        self.apply_local(&m, &local_basis, &[2 * w, 2 * w + 1])
    }

    fn wire(&self, mode: &Mode) -> usize {
        self.wires[mode]
    }

    /// Sparse view, dropping the wires listed in `traced` (whose occupation
    /// is fixed by a projection).
    fn to_sparse(&self, amps: &[Complex64], traced: &[usize]) -> PhotonState {
        let names: BTreeMap<usize, &Mode> = self.wires.iter().map(|(m, &w)| (w, m)).collect();
        PhotonState::from_terms_with_tolerance(
            amps.iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(i, &a)| {
                    let occ = self.basis.state(i);
                    let counts = occ.iter().enumerate().filter_map(|(slot, &n)| {
                        let w = slot / 2;
                        if n == 0 || traced.contains(&w) {
                            return None;
                        }
                        let pol = if slot % 2 == 0 { Pol::H } else { Pol::V };
                        Some((PolSlot::new(names[&w], pol), n))
                    });
                    (FockBasisState::from_counts(counts), a)
                }),
            0.0,
        )
    }
}

/// One post-selected branch of the dense simulation.
#[derive(Clone, Debug)]
pub struct DenseBranch {
    pub probability: f64,
    pub accepted: bool,
    /// Normalized (and, if accepted, corrected) state on undetected modes.
    pub state: PhotonState,
}

#[derive(Clone, Debug)]
pub struct DenseResult {
    pub outcomes: BTreeMap<OutcomePattern, DenseBranch>,
    pub dimension: usize,
}

impl DenseResult {
    pub fn success_probability(&self) -> f64 {
        self.outcomes
            .values()
            .filter(|b| b.accepted)
            .map(|b| b.probability)
            .sum()
    }
}

/// Assigns a wire to every mode that ever carries light.
fn assign_wires(spec: &CircuitSpec) -> BTreeMap<Mode, usize> {
    let mut wires = BTreeMap::new();
    let mut next = 0;
    let mut ensure = |wires: &mut BTreeMap<Mode, usize>, m: &Mode| {
        if !wires.contains_key(m) {
            wires.insert(m.clone(), next);
            next += 1;
        }
    };
    for prep in &spec.inputs {
        for m in prep.modes() {
            ensure(&mut wires, &m);
        }
    }
    for step in &spec.steps {
        match step {
            Step::Element(ElementSpec::Pbs(p)) => {
                ensure(&mut wires, &p.in1);
                ensure(&mut wires, &p.in2);
                let (w1, w2) = (wires[&p.in1], wires[&p.in2]);
                wires.remove(&p.in1);
                wires.remove(&p.in2);
                wires.insert(p.out1.clone(), w1);
                wires.insert(p.out2.clone(), w2);
            }
            Step::Element(ElementSpec::Rotate { mode, .. })
            | Step::Element(ElementSpec::PolPhase { mode, .. }) => ensure(&mut wires, mode),
            Step::Detect(d) => ensure(&mut wires, &d.mode),
        }
    }
    for m in &spec.outputs {
        ensure(&mut wires, m);
    }
    wires
}

fn rule_fires(rule: &FeedForwardRule, pattern: &OutcomePattern) -> bool {
    pattern.readings().iter().any(|r| {
        r.label == rule.trigger.label
            && r.transmitted + r.reflected == 1
            && PolLabel::from_channel(r.basis, r.transmitted == 1) == rule.trigger.pol
    })
}

/// Dense simulation of `spec` with photon cutoff `truncation`.
pub fn simulate(spec: &CircuitSpec, truncation: u32) -> Result<DenseResult, OracleError> {
    spec.validate()?;

    // Initial wire labels: only input modes and fresh splitter inputs.
    let all_wires = assign_wires(spec);
    let wire_count = all_wires.values().max().map_or(0, |w| w + 1);
    let mut input = PhotonState::vacuum();
    for prep in &spec.inputs {
        input = input
            .tensor(&prep.build())
            .map_err(|_| CircuitError::InputOverlap(prep.modes()[0].clone()))?;
    }
    let photons = input
        .terms()
        .map(|(s, _)| s.total_photons())
        .max()
        .unwrap_or(0);
    if photons > truncation {
        return Err(OracleError::TruncationTooSmall {
            photons,
            truncation,
        });
    }
    // every element conserves photon number, so the input count suffices
    let basis = DenseBasis::new(2 * wire_count, photons);

    // wire labels are replayed as elements run
    let mut wires: BTreeMap<Mode, usize> = BTreeMap::new();
    let mut next_wire = 0;
    let mut claim = |wires: &mut BTreeMap<Mode, usize>, m: &Mode| {
        if !wires.contains_key(m) {
            wires.insert(m.clone(), next_wire);
            next_wire += 1;
        }
    };
    for prep in &spec.inputs {
        for m in prep.modes() {
            claim(&mut wires, &m);
        }
    }

    let mut amps = vec![Complex64::default(); basis.dim()];
    for (state, amp) in input.terms() {
        let mut occ = vec![0u32; basis.slots()];
        for (slot, n) in state.iter() {
            let p = match slot.pol {
                Pol::H => 0,
                Pol::V => 1,
            };
            occ[2 * wires[&slot.mode] + p] = n;
        }
        amps[basis.index_of(&occ)?] += amp;
    }

    let mut dense = DenseState {
        basis: Arc::new(basis),
        amps,
        wires,
    };
    let mut detectors = Vec::new();
    for step in &spec.steps {
        match step {
            Step::Element(el) => {
                if let ElementSpec::Pbs(Pbs { in1, in2, .. }) = el {
                    claim(&mut dense.wires, in1);
                    claim(&mut dense.wires, in2);
                } else {
                    for m in el.modes() {
                        claim(&mut dense.wires, m);
                    }
                }
                dense.apply(&el.to_element())?;
            }
            Step::Detect(d) => {
                claim(&mut dense.wires, &d.mode);
                detectors.push(d.clone());
            }
        }
    }
    for m in &spec.outputs {
        claim(&mut dense.wires, m);
    }

    for d in &detectors {
        dense.rotate_into(&d.mode, d.basis)?;
    }
    let det_wires: Vec<usize> = detectors.iter().map(|d| dense.wire(&d.mode)).collect();
    let det_slots: Vec<(usize, usize)> = det_wires.iter().map(|&w| (2 * w, 2 * w + 1)).collect();

    // every pattern with support in the final state
    let mut patterns: BTreeMap<OutcomePattern, ()> = BTreeMap::new();
    for (i, a) in dense.amps.iter().enumerate() {
        if a.norm_sqr() <= NEGLIGIBLE_PROBABILITY {
            continue;
        }
        let occ = dense.basis.state(i);
        let readings = detectors
            .iter()
            .zip(&det_slots)
            .map(|(d, &(t, r))| DetectorReading {
                label: d.label.clone(),
                basis: d.basis,
                transmitted: occ[t],
                reflected: occ[r],
            })
            .collect();
        patterns.insert(OutcomePattern(readings), ());
    }

    let mut outcomes = BTreeMap::new();
    for pattern in patterns.into_keys() {
        let proj = outcome_projector(&pattern, &det_slots, &dense.basis);
        let branch: Vec<Complex64> = dense.amps.iter().zip(&proj).map(|(a, p)| a * p).collect();
        let probability: f64 = branch.iter().map(|a| a.norm_sqr()).sum();
        if probability <= NEGLIGIBLE_PROBABILITY {
            continue;
        }
        let single = pattern
            .readings()
            .iter()
            .all(|r| r.transmitted + r.reflected == 1);
        let fired: Vec<&FeedForwardRule> = spec
            .rules
            .iter()
            .filter(|r| rule_fires(r, &pattern))
            .collect();
        let accepted = single
            && match spec.acceptance {
                Acceptance::AllSingles => true,
                Acceptance::Passive => fired.is_empty(),
            };
        let mut conditional = DenseState {
            basis: Arc::clone(&dense.basis),
            amps: branch,
            wires: dense.wires.clone(),
        };
        if accepted {
            for rule in fired {
                for corr in &rule.corrections {
                    conditional.apply(&corr.to_element())?;
                }
            }
        }
        let scale = c(1.0 / probability.sqrt());
        let normalized: Vec<Complex64> = conditional.amps.iter().map(|a| a * scale).collect();
        let state = conditional.to_sparse(&normalized, &det_wires);
        outcomes.insert(
            pattern,
            DenseBranch {
                probability,
                accepted,
                state,
            },
        );
    }

    Ok(DenseResult {
        outcomes,
        dimension: dense.basis.dim(),
    })
}

/// Largest disagreements between a sparse run and a dense run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Agreement {
    pub max_probability_diff: f64,
    pub max_amplitude_diff: f64,
    /// Patterns that only one side reports with non-negligible weight.
    pub unmatched_patterns: usize,
}

impl Agreement {
    pub fn within(&self, amplitude_tol: f64, probability_tol: f64) -> bool {
        self.unmatched_patterns == 0
            && self.max_amplitude_diff <= amplitude_tol
            && self.max_probability_diff <= probability_tol
    }
}

/// Compares outcome by outcome. Patterns missing on one side count as
/// probability zero there; they are "unmatched" only above 1e-12.
pub fn compare(sparse: &GateResult, dense: &DenseResult) -> Agreement {
    let mut agreement = Agreement::default();
    let keys: std::collections::BTreeSet<&OutcomePattern> = sparse
        .outcomes
        .keys()
        .chain(dense.outcomes.keys())
        .collect();
    for key in keys {
        match (sparse.outcomes.get(key), dense.outcomes.get(key)) {
            (Some(s), Some(d)) => {
                agreement.max_probability_diff = agreement
                    .max_probability_diff
                    .max((s.probability - d.probability).abs());
                agreement.max_amplitude_diff = agreement
                    .max_amplitude_diff
                    .max(s.state.max_amplitude_diff(&d.state));
                if s.accepted != d.accepted {
                    agreement.unmatched_patterns += 1;
                }
            }
            (Some(b), None) => note_one_sided(&mut agreement, b.probability),
            (None, Some(b)) => note_one_sided(&mut agreement, b.probability),
            (None, None) => unreachable!(),
        }
    }
    agreement
}

fn note_one_sided(agreement: &mut Agreement, probability: f64) {
    agreement.max_probability_diff = agreement.max_probability_diff.max(probability);
    if probability > 1e-12 {
        agreement.unmatched_patterns += 1;
    }
}
