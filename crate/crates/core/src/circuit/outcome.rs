use std::collections::BTreeMap;
use std::fmt;

use crate::fock::{PhotonState, PolBasis, Rebase};

use super::{DetectorSpec, PolLabel};

/// Photon counts at one polarization-resolving detector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectorReading {
    pub label: String,
    pub basis: PolBasis,
    pub transmitted: u32,
    pub reflected: u32,
}

impl DetectorReading {
    /// One-and-only-one photon at this detector.
    pub fn is_single(&self) -> bool {
        self.transmitted + self.reflected == 1
    }

    /// The polarization that fired, for a single-photon reading.
    pub fn fired(&self) -> Option<PolLabel> {
        self.is_single()
            .then(|| PolLabel::from_channel(self.basis, self.transmitted == 1))
    }
}

impl fmt::Display for DetectorReading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fired() {
            Some(pol) => write!(f, "{pol}_{}", self.label),
            None => {
                let (t, r) = self.basis.labels();
                write!(
                    f,
                    "{}:{t}{}{r}{}",
                    self.label, self.transmitted, self.reflected
                )
            }
        }
    }
}

/// Joint readings of all detectors, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomePattern(pub Vec<DetectorReading>);

impl OutcomePattern {
    pub fn readings(&self) -> &[DetectorReading] {
        &self.0
    }

    pub fn all_single(&self) -> bool {
        self.0.iter().all(DetectorReading::is_single)
    }

    pub fn reading(&self, label: &str) -> Option<&DetectorReading> {
        self.0.iter().find(|r| r.label == label)
    }

    /// Builds a single-photon pattern from `(label, pol)` pairs.
    pub fn singles<'a, I>(fired: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, PolLabel)>,
    {
        OutcomePattern(
            fired
                .into_iter()
                .map(|(label, pol)| DetectorReading {
                    label: label.to_string(),
                    basis: pol.basis(),
                    transmitted: u32::from(pol.is_transmitted()),
                    reflected: u32::from(!pol.is_transmitted()),
                })
                .collect(),
        )
    }
}

impl fmt::Display for OutcomePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Splits `state` into unnormalized branches, one per joint detector
/// reading with nonzero weight. Detected modes are removed from each branch,
/// so the branch norms add up to the norm of `state`.
pub fn enumerate_outcomes(
    state: &PhotonState,
    detectors: &[DetectorSpec],
) -> BTreeMap<OutcomePattern, PhotonState> {
    let mut rebased = state.clone();
    for d in detectors {
        if d.basis == PolBasis::FS {
            rebased = rebased.rebase_polarization(&d.mode, Rebase::HvToFs);
        }
    }

    let mut branches: Vec<(Vec<DetectorReading>, PhotonState)> = vec![(Vec::new(), rebased)];
    for d in detectors {
        branches = branches
            .into_iter()
            .flat_map(|(readings, branch)| {
                branch
                    .split_by_mode(&d.mode)
                    .into_iter()
                    .map(move |((t, r), part)| {
                        let mut next = readings.clone();
                        next.push(DetectorReading {
                            label: d.label.clone(),
                            basis: d.basis,
                            transmitted: t,
                            reflected: r,
                        });
                        (next, part)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    branches
        .into_iter()
        .filter(|(_, b)| !b.is_empty())
        .map(|(r, b)| (OutcomePattern(r), b))
        .collect()
}
