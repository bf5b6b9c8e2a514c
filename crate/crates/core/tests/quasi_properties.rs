mod common;

use std::sync::Arc;

use nalgebra::Vector3;
use nmr_lrhv::frames::Frame;
use nmr_lrhv::measurement::MeasurementSpec;
use nmr_lrhv::oracle::{
    apply_unitary, correlation_trace, evolve, pseudopure_state, random_state, random_unitary,
    Circuit, DensityOperator, Gate,
};
use nmr_lrhv::quasi::{
    apply_gate, canonicalize, correlation_quasi, density_from_quasi, min_quasi_bound,
    quasi_from_density, read_weights, transition_matrix, write_weights, QuasiState,
    TransitionMatrix,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{frames, random_rotation, random_spec, random_targets};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotated_frames_stay_valid(seed in any::<u64>()) {
        let r = random_rotation(&mut rng(seed));
        for frame in frames() {
            let rotated: Vec<_> = frame.vectors().iter().map(|v| r * v).collect();
            let f = Frame::custom(rotated, "rotated").unwrap();
            let report = f.validate();
            prop_assert!(report.max_residual() <= 1e-12, "{:?}", report);
        }
    }

    #[test]
    fn full_transition_matches_conjugation(seed in any::<u64>(), n in 1usize..=3) {
        for frame in frames() {
            if frame.size() == 6 && n == 3 && seed % 4 != 0 {
                continue; // the 216-dimensional case is slow; sample it
            }
            let rho = random_state(n, 1 + (seed as usize % (1 << n)), seed);
            let u = random_unitary(n, seed ^ 0x55);
            let w = quasi_from_density(&rho, frame.clone()).unwrap();
            let t = transition_matrix(&u, frame.clone()).unwrap();
            let via_t = apply_gate(&w, &t).unwrap();
            let mut evolved = rho.clone();
            apply_unitary(&mut evolved, &u, &(0..n).collect::<Vec<_>>()).unwrap();
            let direct = quasi_from_density(&evolved, frame).unwrap();
            prop_assert!(via_t.max_abs_diff(&direct) <= 1e-10);
        }
    }

    #[test]
    fn gate_local_matches_oracle(seed in any::<u64>(), n in 2usize..=4, k in 1usize..=2) {
        let mut r = rng(seed);
        for frame in frames() {
            let rho = random_state(n, 2, seed);
            let targets = random_targets(k, n, &mut r);
            let u = random_unitary(k, r.random());
            let w = quasi_from_density(&rho, frame.clone()).unwrap();
            let t = transition_matrix(&u, frame.clone()).unwrap().on(&targets);
            let local = apply_gate(&w, &t).unwrap();
            let mut evolved = rho.clone();
            apply_unitary(&mut evolved, &u, &targets).unwrap();
            prop_assert!(density_from_quasi(&local).max_abs_diff(&evolved) <= 1e-10);
            for _ in 0..5 {
                let spec = random_spec(n, &mut r);
                let q = correlation_quasi(&local, &spec).unwrap();
                let o = correlation_trace(&evolved, &spec).unwrap();
                prop_assert!((q - o).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn product_unitaries_factorize(seed in any::<u64>()) {
        for frame in frames() {
            let u1 = random_unitary(1, seed);
            let u2 = random_unitary(1, seed.wrapping_add(1));
            let t = transition_matrix(&u1.kronecker(&u2), frame.clone()).unwrap();
            let t1 = transition_matrix(&u1, frame.clone()).unwrap();
            let t2 = transition_matrix(&u2, frame.clone()).unwrap();
            let kron = t1.to_dmatrix().kronecker(&t2.to_dmatrix());
            prop_assert!((t.to_dmatrix() - kron).amax() <= 1e-12);
        }
    }

    #[test]
    fn pseudopure_mixing_is_linear(seed in any::<u64>(), n in 1usize..=3, eps in 0.0f64..=1.0) {
        for frame in frames() {
            let rho1 = random_state(n, 1, seed);
            let lhs = quasi_from_density(&pseudopure_state(&rho1, eps).unwrap(), frame.clone()).unwrap();
            let rhs = quasi_from_density(&rho1, frame).unwrap().pseudopure(eps).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }
    }

    #[test]
    fn weight_files_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        for frame in frames() {
            let w = quasi_from_density(&random_state(n, 2, seed), frame.clone()).unwrap();
            let mut buf = Vec::new();
            write_weights(&w, &mut buf).unwrap();
            let back = read_weights(buf.as_slice()).unwrap().into_state(frame).unwrap();
            prop_assert_eq!(back, w);
        }
    }

    #[test]
    fn evolution_preserves_spectrum_invariants(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let rho = pseudopure_state(&random_state(n, 1, seed), r.random()).unwrap();
        let mut c = Circuit::new(n);
        for _ in 0..6 {
            let k = if n > 1 && r.random::<bool>() { 2 } else { 1 };
            let targets = random_targets(k, n, &mut r);
            c.push(Gate::raw(random_unitary(k, r.random())).unwrap(), &targets).unwrap();
        }
        let out = evolve(&rho, &c).unwrap();
        let m = out.matrix();
        prop_assert!((m - m.adjoint()).camax() <= 1e-10);
        prop_assert!((m.trace().re - 1.0).abs() <= 1e-10);
        prop_assert!((out.purity() - rho.purity()).abs() <= 1e-10);
        prop_assert!(out.eigenvalues()[0] >= rho.eigenvalues()[0] - 1e-10);
    }
}

#[test]
fn canonical_weights_respect_lower_bound() {
    for seed in 0..1000u64 {
        let n = 1 + (seed % 3) as usize;
        let rank = 1 + (seed as usize / 3) % (1 << n);
        let rho = random_state(n, rank, seed);
        for frame in frames() {
            let w = quasi_from_density(&rho, frame.clone()).unwrap();
            let bound = min_quasi_bound(n, frame.size());
            assert!(w.min_weight().1 >= bound - 1e-10, "seed {seed}");
        }
    }
}

/// `|−n₀⟩ ⊗ |n₀⟩ ⊗ … ⊗ |n₀⟩` is the minimum eigenvector of `Q(0,…,0)`.
#[test]
fn lower_bound_attained_by_anti_aligned_first_qubit() {
    for frame in frames() {
        let n0 = frame.vectors()[0];
        let anti = nmr_lrhv::quasi::single_qubit_state(frame.clone(), -n0).unwrap();
        let along = nmr_lrhv::quasi::single_qubit_state(frame.clone(), n0).unwrap();
        for n in 1..=3 {
            let mut parts = vec![anti.clone()];
            parts.extend(std::iter::repeat_n(along.clone(), n - 1));
            let w = QuasiState::tensor_product(&parts).unwrap();
            let bound = min_quasi_bound(n, frame.size());
            assert!((w.weights()[0] - bound).abs() <= 1e-12);
            assert!((w.min_weight().1 - bound).abs() <= 1e-12);
        }
    }
}

/// Gate-local updates of canonical vectors stay canonical for both frames;
/// the cardinal frame's identity transition is a projector that commutes
/// through every gate transition.
#[test]
fn gate_local_updates_stay_canonical() {
    let mut r = rng(11);
    let frame = Arc::new(Frame::cardinal6());
    for trial in 0..20 {
        let n = 2 + trial % 3;
        let mut w = quasi_from_density(&random_state(n, 2, trial as u64), frame.clone()).unwrap();
        let mut rho = density_from_quasi(&w);
        for _ in 0..8 {
            let k = 1 + r.random_range(0..2);
            let targets = random_targets(k, n, &mut r);
            let u = random_unitary(k, r.random());
            w = apply_gate(&w, &transition_matrix(&u, frame.clone()).unwrap().on(&targets)).unwrap();
            apply_unitary(&mut rho, &u, &targets).unwrap();
        }
        let canonical = quasi_from_density(&rho, frame.clone()).unwrap();
        assert!(w.max_abs_diff(&canonical) <= 1e-12);
        assert!(canonicalize(&w).unwrap().max_abs_diff(&canonical) <= 1e-12);
    }
}

/// Weight vectors that differ by a null direction of the reconstruction map
/// give the same operator and correlators.
#[test]
fn reconstruction_equivalent_vectors_share_correlators() {
    let mut r = rng(5);
    let frame = Arc::new(Frame::cardinal6());
    let n = 2;
    let rho = random_state(n, 3, 17);
    let w = quasi_from_density(&rho, frame.clone()).unwrap();
    // +x, −x, +y, −y on qubit 1: equal-and-opposite pairs cancel
    let null = [1.0, 1.0, -1.0, -1.0, 0.0, 0.0];
    let shifted: Vec<f64> = w
        .weights()
        .iter()
        .enumerate()
        .map(|(i, x)| x + 0.01 * null[i % 6])
        .collect();
    let w2 = QuasiState::new(shifted, frame.clone(), n).unwrap();
    assert!(w2.max_abs_diff(&w) > 1e-3);
    assert!(density_from_quasi(&w2).max_abs_diff(&rho) <= 1e-12);
    for _ in 0..20 {
        let spec = random_spec(n, &mut r);
        let a = correlation_quasi(&w2, &spec).unwrap();
        let b = correlation_trace(&rho, &spec).unwrap();
        assert!((a - b).abs() <= 1e-10);
    }
    assert!(canonicalize(&w2).unwrap().max_abs_diff(&w) <= 1e-12);
}

#[test]
fn maximally_mixed_is_uniform_and_fixed() {
    for frame in frames() {
        let w = quasi_from_density(&DensityOperator::maximally_mixed(3), frame.clone()).unwrap();
        assert!(w.max_abs_diff(&QuasiState::uniform(frame.clone(), 3)) <= 1e-15);
        let t = TransitionMatrix::for_gate(&Gate::Cnot, frame.clone(), &[2, 0]).unwrap();
        let out = apply_gate(&w, &t).unwrap();
        assert!(out.max_abs_diff(&w) <= 1e-14);
        for spec in MeasurementSpec::pauli_grid(3).iter().take(63) {
            assert!(correlation_quasi(&out, spec).unwrap().abs() <= 1e-14);
        }
    }
}

#[test]
fn bloch_sphere_single_qubit_weights() {
    let frame = Arc::new(Frame::tetrahedron());
    let mut r = rng(3);
    for _ in 0..50 {
        let b = common::unit_vector(&mut r) * r.random::<f64>();
        let w = nmr_lrhv::quasi::single_qubit_state(frame.clone(), b).unwrap();
        for (x, n) in w.weights().iter().zip(frame.vectors()) {
            assert!((x - (1.0 + 3.0 * b.dot(n)) / 4.0).abs() <= 1e-14);
        }
    }
    assert!(nmr_lrhv::quasi::single_qubit_state(frame, Vector3::new(0.0, 0.0, 1.5)).is_err());
}
