//! Sparse bosonic states over polarization-resolved optical modes.
//!
//! Every spatial mode carries two polarization slots. The stored basis is
//! always H/V; the diagonal F/S basis only appears transiently, when a mode is
//! rebased for a beam splitter or a detector. With that rebasing the H slot
//! holds the F amplitude and the V slot holds the S amplitude, where
//!
//! ```text
//! F = (H + V) / sqrt(2)
//! S = (V - H) / sqrt(2)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

/// Default magnitude below which amplitudes are dropped.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Spatial-mode label, e.g. `A`, `2'`, `c`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode(Arc<str>);

impl Mode {
    pub fn new(label: impl AsRef<str>) -> Self {
        Mode(Arc::from(label.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Mode {
    fn from(s: &str) -> Self {
        Mode::new(s)
    }
}

impl From<String> for Mode {
    fn from(s: String) -> Self {
        Mode(Arc::from(s))
    }
}

impl From<&Mode> for Mode {
    fn from(m: &Mode) -> Self {
        m.clone()
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Polarization of a stored slot. The storage basis is always H/V.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn other(self) -> Pol {
        match self {
            Pol::H => Pol::V,
            Pol::V => Pol::H,
        }
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pol::H => "H",
            Pol::V => "V",
        })
    }
}

/// Measurement / splitting basis of a beam splitter or detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolBasis {
    HV,
    FS,
}

impl PolBasis {
    /// Names of the (transmitted, reflected) polarizations.
    pub fn labels(self) -> (&'static str, &'static str) {
        match self {
            PolBasis::HV => ("H", "V"),
            PolBasis::FS => ("F", "S"),
        }
    }
}

impl fmt::Display for PolBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolBasis::HV => "hv",
            PolBasis::FS => "fs",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rebase {
    HvToFs,
    FsToHv,
}

/// One (spatial mode, polarization) slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolSlot {
    pub mode: Mode,
    pub pol: Pol,
}

impl PolSlot {
    pub fn new(mode: impl Into<Mode>, pol: Pol) -> Self {
        PolSlot {
            mode: mode.into(),
            pol,
        }
    }

    pub fn h(mode: impl Into<Mode>) -> Self {
        PolSlot::new(mode, Pol::H)
    }

    pub fn v(mode: impl Into<Mode>) -> Self {
        PolSlot::new(mode, Pol::V)
    }
}

impl fmt::Display for PolSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.pol, self.mode)
    }
}

/// Occupation numbers of a single photon configuration.
///
/// Stored as a slot-sorted list with no zero counts, so structural equality
/// is state equality.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisState {
    occ: Vec<(PolSlot, u32)>,
}

impl FockBasisState {
    pub fn vacuum() -> Self {
        FockBasisState::default()
    }

    /// Builds the canonical form from arbitrary (slot, count) pairs; repeated
    /// slots are summed and zero counts dropped.
    pub fn from_counts<I>(counts: I) -> Self
    where
        I: IntoIterator<Item = (PolSlot, u32)>,
    {
        let mut map: BTreeMap<PolSlot, u32> = BTreeMap::new();
        for (slot, n) in counts {
            *map.entry(slot).or_default() += n;
        }
        FockBasisState {
            occ: map.into_iter().filter(|&(_, n)| n > 0).collect(),
        }
    }

    pub fn count(&self, slot: &PolSlot) -> u32 {
        self.occ
            .binary_search_by(|(s, _)| s.cmp(slot))
            .map(|i| self.occ[i].1)
            .unwrap_or(0)
    }

    pub fn total_photons(&self) -> u32 {
        self.occ.iter().map(|&(_, n)| n).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PolSlot, u32)> + '_ {
        self.occ.iter().map(|(s, n)| (s, *n))
    }

    pub fn is_vacuum(&self) -> bool {
        self.occ.is_empty()
    }

    pub fn modes(&self) -> impl Iterator<Item = &Mode> + '_ {
        self.occ.iter().map(|(s, _)| &s.mode)
    }

    /// (H count, V count) on `mode`.
    pub fn mode_counts(&self, mode: &Mode) -> (u32, u32) {
        (self.count(&PolSlot::h(mode)), self.count(&PolSlot::v(mode)))
    }

    pub fn with_added(&self, slot: &PolSlot, n: u32) -> Self {
        let mut occ = self.occ.clone();
        match occ.binary_search_by(|(s, _)| s.cmp(slot)) {
            Ok(i) => occ[i].1 += n,
            Err(i) if n > 0 => occ.insert(i, (slot.clone(), n)),
            Err(_) => {}
        }
        FockBasisState { occ }
    }

    pub fn without_mode(&self, mode: &Mode) -> Self {
        FockBasisState {
            occ: self
                .occ
                .iter()
                .filter(|(s, _)| &s.mode != mode)
                .cloned()
                .collect(),
        }
    }

    /// Product of the factorials of all occupation numbers.
    fn factorial_product(&self) -> f64 {
        self.occ.iter().map(|&(_, n)| factorial(n)).product()
    }

    /// `mode:pol:count` strings in slot order.
    pub fn occupation_strings(&self) -> Vec<String> {
        self.occ
            .iter()
            .map(|(s, n)| format!("{}:{}:{}", s.mode, s.pol, n))
            .collect()
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.occ.is_empty() {
            return f.write_str("vac");
        }
        for (i, (slot, n)) in self.occ.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{slot}")?;
            if *n > 1 {
                write!(f, "^{n}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}>")
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FockError {
    #[error("states share spatial modes: {}", join_modes(.0))]
    OverlappingModes(Vec<Mode>),
}

fn join_modes(modes: &[Mode]) -> String {
    modes
        .iter()
        .map(Mode::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Sparse superposition of Fock basis states.
///
/// Values are immutable; every operation returns a new state.
#[derive(Clone)]
pub struct PhotonState {
    terms: BTreeMap<FockBasisState, Complex64>,
    tolerance: f64,
}

impl PhotonState {
    /// The empty superposition (not the vacuum).
    pub fn zero() -> Self {
        PhotonState {
            terms: BTreeMap::new(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn vacuum() -> Self {
        PhotonState::from_terms([(FockBasisState::vacuum(), Complex64::new(1.0, 0.0))])
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (FockBasisState, Complex64)>,
    {
        PhotonState::from_terms_with_tolerance(terms, DEFAULT_TOLERANCE)
    }

    pub fn from_terms_with_tolerance<I>(terms: I, tolerance: f64) -> Self
    where
        I: IntoIterator<Item = (FockBasisState, Complex64)>,
    {
        let mut map: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
        for (basis, amp) in terms {
            *map.entry(basis).or_default() += amp;
        }
        PhotonState {
            terms: map,
            tolerance,
        }
        .pruned()
    }

    pub fn with_tolerance(&self, tolerance: f64) -> Self {
        PhotonState {
            terms: self.terms.clone(),
            tolerance,
        }
        .pruned()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn pruned(mut self) -> Self {
        let tol = self.tolerance;
        self.terms.retain(|_, amp| amp.norm() >= tol);
        self
    }

    fn rebuild(&self, terms: BTreeMap<FockBasisState, Complex64>) -> Self {
        PhotonState {
            terms,
            tolerance: self.tolerance,
        }
        .pruned()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockBasisState, Complex64)> + '_ {
        self.terms.iter().map(|(b, a)| (b, *a))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, basis: &FockBasisState) -> Complex64 {
        self.terms.get(basis).copied().unwrap_or_default()
    }

    /// All spatial modes carrying a photon in at least one term.
    pub fn modes(&self) -> BTreeSet<Mode> {
        self.terms.keys().flat_map(|b| b.modes().cloned()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Rescaled to unit norm; `None` for the zero state.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        (n > 0.0).then(|| self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.rebuild(self.terms.iter().map(|(b, a)| (b.clone(), a * c)).collect())
    }

    /// Applies the creation operator on `slot`: `a†|n> = sqrt(n+1)|n+1>`.
    pub fn create(&self, slot: &PolSlot) -> Self {
        self.rebuild(
            self.terms
                .iter()
                .map(|(b, a)| {
                    let n = b.count(slot);
                    (b.with_added(slot, 1), a * f64::from(n + 1).sqrt())
                })
                .collect(),
        )
    }

    /// `ca * a + cb * b`.
    pub fn superpose(a: &PhotonState, ca: Complex64, b: &PhotonState, cb: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        for (basis, amp) in &a.terms {
            *terms.entry(basis.clone()).or_insert(Complex64::default()) += amp * ca;
        }
        for (basis, amp) in &b.terms {
            *terms.entry(basis.clone()).or_insert(Complex64::default()) += amp * cb;
        }
        a.rebuild(terms)
    }

    pub fn tensor(&self, other: &PhotonState) -> Result<Self, FockError> {
        let overlap: Vec<Mode> = self.modes().intersection(&other.modes()).cloned().collect();
        if !overlap.is_empty() {
            return Err(FockError::OverlappingModes(overlap));
        }
        let mut terms = BTreeMap::new();
        for (ba, aa) in &self.terms {
            for (bb, ab) in &other.terms {
                let joined = FockBasisState::from_counts(
                    ba.iter().chain(bb.iter()).map(|(s, n)| (s.clone(), n)),
                );
                terms.insert(joined, aa * ab);
            }
        }
        Ok(self.rebuild(terms))
    }

    /// `<self|other>`: conjugate-linear in `self`.
    pub fn inner_product(&self, other: &PhotonState) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|(b, a)| other.terms.get(b).map(|o| a.conj() * o))
            .sum()
    }

    /// Re-expresses the polarization of `mode` in the other basis.
    ///
    /// `HvToFs` leaves F amplitudes in the H slot and S amplitudes in the V
    /// slot; `FsToHv` undoes it.
    pub fn rebase_polarization(&self, mode: &Mode, direction: Rebase) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let h = PolSlot::h(mode);
        let v = PolSlot::v(mode);
        let c = |x: f64| Complex64::new(x, 0.0);
        match direction {
            // H = (F - S)/sqrt2, V = (F + S)/sqrt2
            Rebase::HvToFs => self.substitute(|slot| {
                (slot.mode == *mode).then(|| match slot.pol {
                    Pol::H => vec![(h.clone(), c(r)), (v.clone(), c(-r))],
                    Pol::V => vec![(h.clone(), c(r)), (v.clone(), c(r))],
                })
            }),
            // F = (H + V)/sqrt2, S = (V - H)/sqrt2
            Rebase::FsToHv => self.substitute(|slot| {
                (slot.mode == *mode).then(|| match slot.pol {
                    Pol::H => vec![(h.clone(), c(r)), (v.clone(), c(r))],
                    Pol::V => vec![(h.clone(), c(-r)), (v.clone(), c(r))],
                })
            }),
        }
    }

    /// Applies a linear map on creation operators.
    ///
    /// `map` returns the image of `a†_slot` as a combination of creation
    /// operators, or `None` to leave the slot alone. The substitution is
    /// simultaneous, so in-place relabeling is safe.
    pub fn substitute<F>(&self, map: F) -> Self
    where
        F: Fn(&PolSlot) -> Option<Vec<(PolSlot, Complex64)>>,
    {
        let mut out: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
        for (basis, amp) in &self.terms {
            // Work with raw monomials: |n> = prod (a†)^n / sqrt(n!) |0>.
            let mut fixed = Vec::new();
            let mut moved = Vec::new();
            for (slot, n) in basis.iter() {
                match map(slot) {
                    Some(image) => moved.push((image, n)),
                    None => fixed.push((slot.clone(), n)),
                }
            }
            if moved.is_empty() {
                *out.entry(basis.clone()).or_default() += amp;
                continue;
            }
            let raw = amp / basis.factorial_product().sqrt();
            let mut partial: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
            partial.insert(FockBasisState::from_counts(fixed), raw);
            for (image, n) in &moved {
                for _ in 0..*n {
                    let mut next: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
                    for (mono, c) in &partial {
                        for (target, coef) in image {
                            *next.entry(mono.with_added(target, 1)).or_default() += c * coef;
                        }
                    }
                    partial = next;
                }
            }
            for (mono, c) in partial {
                let norm = mono.factorial_product().sqrt();
                *out.entry(mono).or_default() += c * norm;
            }
        }
        self.rebuild(out)
    }

    /// Multiplies each term by `f(basis)`.
    pub fn map_phases<F>(&self, f: F) -> Self
    where
        F: Fn(&FockBasisState) -> Complex64,
    {
        self.rebuild(
            self.terms
                .iter()
                .map(|(b, a)| (b.clone(), a * f(b)))
                .collect(),
        )
    }

    /// Splits the state by the (H, V) counts on `mode`, removing the mode
    /// from each part.
    pub fn split_by_mode(&self, mode: &Mode) -> BTreeMap<(u32, u32), PhotonState> {
        let mut parts: BTreeMap<(u32, u32), BTreeMap<FockBasisState, Complex64>> = BTreeMap::new();
        for (basis, amp) in &self.terms {
            parts
                .entry(basis.mode_counts(mode))
                .or_default()
                .insert(basis.without_mode(mode), *amp);
        }
        parts
            .into_iter()
            .map(|(k, terms)| (k, self.rebuild(terms)))
            .collect()
    }

    /// Largest per-amplitude difference to `other`.
    pub fn max_amplitude_diff(&self, other: &PhotonState) -> f64 {
        let keys: BTreeSet<&FockBasisState> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .map(|k| (self.amplitude(k) - other.amplitude(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &PhotonState, tol: f64) -> bool {
        self.max_amplitude_diff(other) <= tol
    }
}

impl fmt::Debug for PhotonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (b, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){:?}", a.re, a.im, b)?;
        }
        Ok(())
    }
}

/// Single photon in `slot`.
pub fn single(slot: &PolSlot) -> PhotonState {
    PhotonState::vacuum().create(slot)
}
