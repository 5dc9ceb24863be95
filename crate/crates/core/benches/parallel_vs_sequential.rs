use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pbsgates::batch::run_batch;
use pbsgates::circuit::{execute_with, ExecOptions};
use pbsgates::gates::{Gate, GateInputs, TwoQubitState};
use pbsgates::{Acceptance, Execution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn inputs(n: usize) -> Vec<GateInputs> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..n)
        .map(|_| GateInputs {
            qubits: vec![],
            two_qubit: Some(TwoQubitState::random(&mut rng)),
        })
        .collect()
}

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("gc_cnot_batch");
    for n in [16, 128] {
        let inputs = inputs(n);
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), n),
                &inputs,
                |b, inputs| {
                    b.iter(|| {
                        run_batch(
                            Gate::GcCnot,
                            black_box(inputs),
                            Acceptance::AllSingles,
                            exec,
                        )
                        .unwrap()
                    })
                },
            );
        }
    }
    group.finish();
}

fn branches(c: &mut Criterion) {
    let mut group = c.benchmark_group("chi_via_cnot_branches");
    let spec = Gate::ChiViaCnot
        .circuit(&GateInputs::default(), Acceptance::AllSingles)
        .unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let opts = ExecOptions {
            execution: exec,
            ..Default::default()
        };
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| execute_with(black_box(&spec), &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, batch, branches);
criterion_main!(benches);
