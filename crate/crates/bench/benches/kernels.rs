use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;
use qcrank_bench::{angles, zr80_spec};
use qcrank_core::ansatz::prepare_state;
use qcrank_core::bcs::solve_bcs;
use qcrank_core::routhian::{build_routhian, routhian_pauli};
use qcrank_core::{jordan_wigner, CompiledAnsatz, StateVector};

fn gates(c: &mut Criterion) {
    let mut s = StateVector::reference(16, 8).unwrap();
    c.bench_function("single_excitation_16q", |b| b.iter(|| s.apply_single_excitation(black_box(3), 12, 0.1).unwrap()));
    c.bench_function("pair_excitation_16q", |b| b.iter(|| s.apply_pair_excitation(black_box(1), 6, 0.1).unwrap()));
}

fn mapping(c: &mut Criterion) {
    let (_, spec) = zr80_spec(8, -0.25, 1.0);
    let op = build_routhian(&spec).unwrap();
    c.bench_function("jordan_wigner_m8", |b| b.iter(|| jordan_wigner(black_box(&op), 16).unwrap()));
}

fn energies(c: &mut Criterion) {
    let (problem, spec) = zr80_spec(8, -0.25, 1.0);
    let h = routhian_pauli(&spec).unwrap();
    let theta = angles(problem.program.parameter_count());
    let state = prepare_state(&theta, &problem.program).unwrap();
    c.bench_function("pauli_expectation_16q", |b| b.iter(|| state.expectation(black_box(&h)).unwrap()));
    c.bench_function("prepare_state_16q", |b| b.iter(|| prepare_state(black_box(&theta), &problem.program).unwrap()));

    let compiled = CompiledAnsatz::new(&problem.program, &h, 1e-6).unwrap();
    let mut grad = vec![0.0; theta.len()];
    c.bench_function("sector_energy_m8", |b| b.iter(|| compiled.energy(black_box(&theta))));
    c.bench_function("sector_gradient_m8", |b| b.iter(|| compiled.fd_gradient(black_box(&theta), &mut grad)));
}

fn bcs(c: &mut Criterion) {
    let (problem, _) = zr80_spec(8, -0.25, 1.0);
    let zero = DMatrix::zeros(16, 16);
    c.bench_function("bcs_rest_m8", |b| b.iter(|| solve_bcs(&problem.active, 0.5202, 0.0, black_box(&zero), 1.0).unwrap()));
    c.bench_function("bcs_cranked_m8", |b| b.iter(|| solve_bcs(&problem.active, 0.5202, 1.0, black_box(&problem.jx), 1.0).unwrap()));
}

criterion_group!(benches, gates, mapping, energies, bcs);
criterion_main!(benches);
