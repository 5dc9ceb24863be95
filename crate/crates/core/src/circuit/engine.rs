use std::collections::BTreeMap;

use thiserror::Error;

use crate::fock::{FockError, Mode, PhotonState, DEFAULT_TOLERANCE};
use crate::optics::OpticsError;
use crate::parallel::{self, Execution};

use super::outcome::{enumerate_outcomes, OutcomePattern};
use super::{Acceptance, CircuitError, CircuitSpec, DetectorSpec, FeedForwardRule, Step};

/// Largest tolerated deviation of the input norm from 1.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error(transparent)]
    Invalid(#[from] CircuitError),
    #[error("input state is not normalized (norm^2 = {0})")]
    NonPhysicalInput(f64),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

#[derive(Clone, Copy, Debug)]
pub struct ExecOptions {
    /// Amplitude pruning tolerance for every intermediate state.
    pub tolerance: f64,
    pub execution: Execution,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            tolerance: DEFAULT_TOLERANCE,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OutcomeBranch {
    pub probability: f64,
    pub accepted: bool,
    /// Normalized conditional state on the undetected modes, corrected by
    /// feed-forward when the outcome is accepted.
    pub state: PhotonState,
}

#[derive(Clone, Debug)]
pub struct GateResult {
    pub outcomes: BTreeMap<OutcomePattern, OutcomeBranch>,
    pub success_probability: f64,
    pub failure_probability: f64,
    pub outputs: Vec<Mode>,
}

impl GateResult {
    pub fn accepted(&self) -> impl Iterator<Item = (&OutcomePattern, &OutcomeBranch)> + '_ {
        self.outcomes.iter().filter(|(_, b)| b.accepted)
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.values().map(|b| b.probability).sum()
    }
}

pub fn execute(spec: &CircuitSpec) -> Result<GateResult, ExecError> {
    execute_with(spec, &ExecOptions::default())
}

pub fn execute_with(spec: &CircuitSpec, opts: &ExecOptions) -> Result<GateResult, ExecError> {
    spec.validate()?;

    let mut state = PhotonState::vacuum().with_tolerance(opts.tolerance);
    for prep in &spec.inputs {
        state = state.tensor(&prep.build().with_tolerance(opts.tolerance))?;
    }
    let norm_sqr = state.norm_sqr();
    if (norm_sqr.sqrt() - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(ExecError::NonPhysicalInput(norm_sqr));
    }

    // Detected modes are never touched again, so measuring at the end is
    // equivalent to measuring in place.
    let mut detectors: Vec<DetectorSpec> = Vec::new();
    for step in &spec.steps {
        match step {
            Step::Element(el) => state = el.to_element().apply(&state)?,
            Step::Detect(d) => detectors.push(d.clone()),
        }
    }

    let branches: Vec<(OutcomePattern, PhotonState)> =
        enumerate_outcomes(&state, &detectors).into_iter().collect();

    let processed = parallel::try_map(opts.execution, &branches, |(pattern, branch)| {
        let probability = branch.norm_sqr();
        let accepted = is_accepted(spec.acceptance, pattern, &spec.rules);
        let corrected = if accepted {
            apply_feedforward(branch, pattern, &spec.rules)
        } else {
            branch.clone()
        };
        let state = corrected.normalized().unwrap_or_else(PhotonState::zero);
        Ok::<_, ExecError>((
            pattern.clone(),
            OutcomeBranch {
                probability,
                accepted,
                state,
            },
        ))
    })?;

    let outcomes: BTreeMap<OutcomePattern, OutcomeBranch> = processed.into_iter().collect();
    let success_probability = outcomes
        .values()
        .filter(|b| b.accepted)
        .map(|b| b.probability)
        .sum();
    let failure_probability = outcomes
        .values()
        .filter(|b| !b.accepted)
        .map(|b| b.probability)
        .sum();
    Ok(GateResult {
        outcomes,
        success_probability,
        failure_probability,
        outputs: spec.outputs.clone(),
    })
}

fn triggered<'a>(
    pattern: &'a OutcomePattern,
    rules: &'a [FeedForwardRule],
) -> impl Iterator<Item = &'a FeedForwardRule> + 'a {
    rules.iter().filter(move |rule| {
        pattern.reading(&rule.trigger.label).and_then(|r| r.fired()) == Some(rule.trigger.pol)
    })
}

fn is_accepted(policy: Acceptance, pattern: &OutcomePattern, rules: &[FeedForwardRule]) -> bool {
    pattern.all_single()
        && match policy {
            Acceptance::AllSingles => true,
            Acceptance::Passive => triggered(pattern, rules).next().is_none(),
        }
}

/// Applies the corrections of every rule triggered by `pattern`, rule by
/// rule in declaration order.
pub fn apply_feedforward(
    branch: &PhotonState,
    pattern: &OutcomePattern,
    rules: &[FeedForwardRule],
) -> PhotonState {
    let mut state = branch.clone();
    for rule in triggered(pattern, rules) {
        for corr in &rule.corrections {
            // corrections are single-mode unitaries and cannot fail
            state = corr
                .to_element()
                .apply(&state)
                .expect("correction elements are infallible");
        }
    }
    state
}
