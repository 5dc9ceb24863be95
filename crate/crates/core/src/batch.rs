//! Running one gate over many inputs.

use crate::circuit::{Acceptance, ExecOptions};
use crate::gates::{run_circuit, Gate, GateError, GateInputs, GateReport};
use crate::parallel::{self, Execution};

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Exec(#[from] crate::circuit::ExecError),
}

/// Runs `gate` once per entry of `inputs`. Inputs are spread over threads
/// when `execution` is parallel; each run itself is sequential. Reports
/// come back in input order.
pub fn run_batch(
    gate: Gate,
    inputs: &[GateInputs],
    acceptance: Acceptance,
    execution: Execution,
) -> Result<Vec<GateReport>, BatchError> {
    let opts = ExecOptions {
        execution: Execution::Sequential,
        ..Default::default()
    };
    parallel::try_map(execution, inputs, |input| {
        let spec = gate.circuit(input, acceptance)?;
        Ok(run_circuit(&spec, &opts)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::TwoQubitState;
    use rand::SeedableRng;

    #[test]
    fn batch_orders_match() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let inputs: Vec<GateInputs> = (0..8)
            .map(|_| GateInputs {
                qubits: vec![],
                two_qubit: Some(TwoQubitState::random(&mut rng)),
            })
            .collect();
        let seq = run_batch(
            Gate::Cnot,
            &inputs,
            Acceptance::AllSingles,
            Execution::Sequential,
        )
        .unwrap();
        let par = run_batch(
            Gate::Cnot,
            &inputs,
            Acceptance::AllSingles,
            Execution::Parallel,
        )
        .unwrap();
        for (a, b) in seq.iter().zip(&par) {
            assert_eq!(a.success_probability, b.success_probability);
            assert_eq!(a.fidelities, b.fidelities);
        }
    }
}
