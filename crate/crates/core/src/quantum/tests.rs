use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::bits::{BB84Key, Basis, BasisString, BitString};
use crate::error::Error;
use crate::rng::SeedStream;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn assert_amps(state: &Statevector, expected: &[f64]) {
    assert_eq!(state.dim(), expected.len());
    for (a, &e) in state.amplitudes().iter().zip(expected) {
        assert!((a - c(e)).norm() < 1e-12, "{:?} vs {expected:?}", state.amplitudes());
    }
}

/// Empirical frequency of `hits` in `trials` within three binomial σ of `p`.
fn within_3_sigma(hits: usize, trials: usize, p: f64) -> bool {
    let freq = hits as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    (freq - p).abs() <= 3.0 * sigma + 1e-12
}

fn all_keys(n: usize) -> impl Iterator<Item = BB84Key> {
    (0..1usize << (2 * n)).map(move |k| {
        let x = BitString::from_index(k >> n, n);
        let theta = BasisString::new(
            (0..n).map(|i| if (k >> (n - 1 - i)) & 1 == 1 { Basis::Diagonal } else { Basis::Rectilinear }).collect(),
        );
        BB84Key::new(x, theta).unwrap()
    })
}

#[test]
fn prepare_single_qubit_states() {
    assert_amps(&prepare_bb84(&BB84Key::parse("0", "+").unwrap()).unwrap(), &[1.0, 0.0]);
    assert_amps(&prepare_bb84(&BB84Key::parse("1", "x").unwrap()).unwrap(), &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
}

#[test]
fn prepare_two_qubits_orders_qubit_zero_first() {
    // |0⟩ ⊗ |−⟩ and |0⟩ ⊗ |+⟩ expanded by hand.
    let s = FRAC_1_SQRT_2;
    assert_amps(&prepare_bb84(&BB84Key::parse("01", "+x").unwrap()).unwrap(), &[s, -s, 0.0, 0.0]);
    assert_amps(&prepare_bb84(&BB84Key::parse("10", "+x").unwrap()).unwrap(), &[0.0, 0.0, s, s]);
    assert_amps(&prepare_bb84(&BB84Key::parse("00", "+x").unwrap()).unwrap(), &[s, s, 0.0, 0.0]);
}

#[test]
fn prepare_rejects_bad_sizes() {
    let empty = BB84Key::new(BitString::zeros(0), BasisString::default()).unwrap();
    assert!(matches!(prepare_bb84(&empty), Err(Error::InvalidSize(_))));
    let mut rng = SeedStream::new(1).stream(0);
    let big = BB84Key::random(MAX_STATEVECTOR_QUBITS + 1, &mut rng);
    assert!(matches!(prepare_bb84(&big), Err(Error::InvalidSize(_))));
}

#[test]
fn hadamard_examples() {
    let zero = Statevector::basis(1, 0).unwrap();
    assert_amps(&zero.apply_hadamard_all(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
    let minus = prepare_bb84(&BB84Key::parse("1", "x").unwrap()).unwrap();
    assert_amps(&minus.apply_hadamard_all(), &[0.0, 1.0]);
}

#[test]
fn measure_basis_state_is_deterministic() {
    let state = Statevector::basis(2, 0b01).unwrap();
    let mut rng = SeedStream::new(3).stream(0);
    for _ in 0..100 {
        let (y, post) = state.measure_computational(&mut rng);
        assert_eq!(y.to_string(), "01");
        assert_eq!(post, state);
    }
}

#[test]
fn measure_plus_is_fair() {
    let plus = prepare_bb84(&BB84Key::parse("0", "x").unwrap()).unwrap();
    let mut rng = SeedStream::new(4).stream(0);
    let trials = 100_000;
    let zeros = (0..trials).filter(|_| !plus.measure_computational(&mut rng).0.get(0)).count();
    assert!(within_3_sigma(zeros, trials, 0.5));
}

#[test]
fn measure_breidbart_state_frequency() {
    let psi = Statevector::new(vec![c(FRAC_PI_8.cos()), c(FRAC_PI_8.sin())]).unwrap();
    let mut rng = SeedStream::new(5).stream(0);
    let trials = 1_000_000;
    let zeros = (0..trials).filter(|_| !psi.measure_computational(&mut rng).0.get(0)).count();
    let p = FRAC_PI_8.cos().powi(2);
    assert!((p - 0.853553).abs() < 1e-6);
    assert!(within_3_sigma(zeros, trials, p));
}

#[test]
fn rotated_measurement_examples() {
    let mut rng = SeedStream::new(6).stream(0);
    let one = Statevector::basis(1, 1).unwrap();
    let plus = prepare_bb84(&BB84Key::parse("0", "x").unwrap()).unwrap();
    for _ in 0..200 {
        assert!(one.measure_in_rotated_basis(&[0.0], &mut rng).unwrap().0.get(0));
        assert!(!plus.measure_in_rotated_basis(&[FRAC_PI_4], &mut rng).unwrap().0.get(0));
    }
    let zero = Statevector::basis(1, 0).unwrap();
    let trials = 200_000;
    let zeros =
        (0..trials).filter(|_| !zero.measure_in_rotated_basis(&[FRAC_PI_8], &mut rng).unwrap().0.get(0)).count();
    assert!(within_3_sigma(zeros, trials, 0.853_553_390_593_273_8));
}

#[test]
fn rotated_measurement_collapses_onto_basis_vector() {
    let mut rng = SeedStream::new(7).stream(0);
    let zero = Statevector::basis(1, 0).unwrap();
    let (y, post) = zero.measure_in_rotated_basis(&[FRAC_PI_8], &mut rng).unwrap();
    let expected = Statevector::product(&[rotated_basis_vector(FRAC_PI_8, y.get(0))]).unwrap();
    assert!((post.fidelity(&expected) - 1.0).abs() < 1e-12);
}

#[test]
fn rotated_measurement_angle_count_mismatch() {
    let mut rng = SeedStream::new(8).stream(0);
    let s = Statevector::basis(2, 0).unwrap();
    assert!(matches!(s.measure_in_rotated_basis(&[0.0], &mut rng), Err(Error::InvalidArgument(_))));
}

#[test]
fn angle_zero_matches_computational_measurement() {
    let state = Statevector::product(&[[c(0.6), c(0.8)], [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)]]).unwrap();
    let root = SeedStream::new(9);
    for i in 0..50 {
        let a = state.measure_computational(&mut root.stream(i)).0;
        let b = state.measure_in_rotated_basis(&[0.0, 0.0], &mut root.stream(i)).unwrap().0;
        assert_eq!(a, b);
    }
}

#[test]
fn bb84_round_trip_is_exact() {
    // Hadamard exactly on the diagonal positions, then every outcome equals x.
    let mut rng = SeedStream::new(10).stream(0);
    for n in 1..=6 {
        for key in all_keys(n) {
            let mut state = prepare_bb84(&key).unwrap();
            for (q, basis) in key.theta().iter().enumerate() {
                if basis == Basis::Diagonal {
                    state = state.apply_single_qubit(q, &hadamard()).unwrap();
                }
            }
            let probs = state.probabilities();
            assert!((probs[key.x().to_index()] - 1.0).abs() < 1e-12);
            assert_eq!(&state.measure_computational(&mut rng).0, key.x());
        }
    }
}

#[test]
fn sampling_matches_born_rule() {
    let mut rng = SeedStream::new(11).stream(0);
    let raw: Vec<C64> = (0..8).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let state = Statevector::new(raw.iter().map(|a| a / norm).collect()).unwrap();
    let trials = 1_000_000;
    let mut counts = [0usize; 8];
    for _ in 0..trials {
        counts[state.measure_computational(&mut rng).0.to_index()] += 1;
    }
    for (i, p) in state.probabilities().into_iter().enumerate() {
        assert!(within_3_sigma(counts[i], trials, p), "outcome {i}: {} vs {p}", counts[i]);
    }
}

#[test]
fn measure_subset_collapses_partner() {
    let bell = Statevector::new(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
    let root = SeedStream::new(12);
    for i in 0..20 {
        let (y, post) = bell.measure_qubits(&[1], &mut root.stream(i)).unwrap();
        let idx = if y.get(0) { 3 } else { 0 };
        assert!((post.probabilities()[idx] - 1.0).abs() < 1e-12);
    }
    assert_eq!(bell.marginal_probabilities(&[0]).unwrap().len(), 2);
}

#[test]
fn apply_operator_matches_kronecker_route() {
    let mut rng = SeedStream::new(13).stream(0);
    let qubits: Vec<[C64; 2]> = (0..3)
        .map(|_| {
            let t: f64 = rng.random::<f64>() * 3.0;
            [c(t.cos()), C64::new(0.0, t.sin())]
        })
        .collect();
    let state = Statevector::product(&qubits).unwrap();
    let h = hadamard();
    let hm = DMatrix::from_fn(2, 2, |i, j| h[i][j]);
    let cnot = DMatrix::from_fn(4, 4, |i, j| {
        let target = [0, 1, 3, 2][j];
        if i == target {
            c(1.0)
        } else {
            c(0.0)
        }
    });
    let a = state.apply_operator(&cnot, &[2, 0]).unwrap().apply_operator(&hm, &[1]).unwrap();
    // Same CNOT (control 2, target 0) written as a full 8×8 permutation, then I⊗H⊗I.
    let full = DMatrix::from_fn(8, 8, |i, j| {
        let flipped = if j & 1 == 1 { j ^ 0b100 } else { j };
        if i == flipped {
            c(1.0)
        } else {
            c(0.0)
        }
    });
    let eye = DMatrix::<C64>::identity(2, 2);
    let hfull = eye.kronecker(&hm).kronecker(&eye);
    let v = nalgebra::DVector::from_column_slice(state.amplitudes());
    let b = hfull * (full * v);
    for (x, y) in a.amplitudes().iter().zip(b.iter()) {
        assert!((x - y).norm() < 1e-12);
    }
}

#[test]
fn product_and_dense_keys_agree() {
    let mut rng = SeedStream::new(14).stream(0);
    for _ in 0..20 {
        let key = BB84Key::random(5, &mut rng);
        let dense = QuantumKey::prepare_dense(&key).unwrap();
        let product = QuantumKey::prepare_product(&key).unwrap();
        let a = dense.to_statevector().unwrap();
        let b = product.to_statevector().unwrap();
        assert!((a.fidelity(&b) - 1.0).abs() < 1e-12);
        let ah = dense.apply_hadamard_all().to_statevector().unwrap();
        let bh = product.apply_hadamard_all().to_statevector().unwrap();
        assert!((ah.fidelity(&bh) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn product_key_sampling_matches_dense_distribution() {
    let key = BB84Key::parse("011", "x+x").unwrap();
    let dense = prepare_bb84(&key).unwrap();
    let angles = [FRAC_PI_8; 3];
    let mut rotated = dense.clone();
    for q in 0..3 {
        let g = state::rotation_to_computational(FRAC_PI_8);
        rotated = rotated.apply_single_qubit(q, &g).unwrap();
    }
    let exact = rotated.probabilities();
    let product = ProductState::from_bb84(&key).unwrap();
    let mut rng = SeedStream::new(15).stream(0);
    let trials = 400_000;
    let mut counts = [0usize; 8];
    for _ in 0..trials {
        counts[product.measure_in_rotated_basis(&angles, &mut rng).unwrap().0.to_index()] += 1;
    }
    for i in 0..8 {
        assert!(within_3_sigma(counts[i], trials, exact[i]), "outcome {i}");
    }
}

#[test]
fn partial_trace_of_bell_state_is_maximally_mixed() {
    let bell = Statevector::new(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
    let rho = DensityMatrix::from_statevector(&bell).unwrap();
    let half = HermitianOperator::identity(2).scale(0.5);
    for keep in [[0], [1]] {
        let reduced = rho.partial_trace(&keep).unwrap();
        assert!(reduced.operator().max_abs_diff(&half) < 1e-12);
    }
}

#[test]
fn partial_trace_of_product_state() {
    let state = prepare_bb84(&BB84Key::parse("00", "+x").unwrap()).unwrap();
    let rho = DensityMatrix::from_statevector(&state).unwrap();
    let reduced = rho.partial_trace(&[0]).unwrap();
    let expected = HermitianOperator::projector(&[c(1.0), c(0.0)]);
    assert!(reduced.operator().max_abs_diff(&expected) < 1e-12);
}

#[test]
fn partial_trace_argument_errors() {
    let rho = DensityMatrix::from_statevector(&Statevector::basis(2, 0).unwrap()).unwrap();
    assert!(matches!(rho.partial_trace(&[]), Err(Error::InvalidArgument(_))));
    assert!(matches!(rho.partial_trace(&[2]), Err(Error::InvalidArgument(_))));
    assert!(matches!(rho.partial_trace(&[0, 0]), Err(Error::InvalidArgument(_))));
}

#[test]
fn density_matrix_validation() {
    assert!(DensityMatrix::new(DMatrix::identity(2, 2)).is_err());
    let bad = DMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
    assert!(DensityMatrix::new(bad).is_err());
    assert!(matches!(DensityMatrix::new(DMatrix::identity(128, 128) / c(128.0)), Err(Error::InvalidSize(_))));
}

#[test]
fn eig_identity() {
    let spec = HermitianOperator::identity(2).eigen();
    assert_eq!(spec.values.len(), 2);
    assert!(spec.values.iter().all(|l| (l - 1.0).abs() < 1e-12));
}

#[test]
fn eig_of_v00_has_breidbart_eigenvector() {
    // |0⟩⟨0| + |+⟩⟨+| = [[1.5, 0.5], [0.5, 0.5]]
    let v = HermitianOperator::from_real_rows(&[&[1.5, 0.5], &[0.5, 0.5]]).unwrap();
    let spec = v.eigen();
    assert!((spec.values[0] - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-12);
    assert!((spec.values[1] - (1.0 + FRAC_1_SQRT_2)).abs() < 1e-12);
    assert!((spec.values[0] - 0.292893).abs() < 1e-6 && (spec.values[1] - 1.707107).abs() < 1e-6);
    let top = &spec.vectors[1];
    let overlap = top[0].conj() * c(FRAC_PI_8.cos()) + top[1].conj() * c(FRAC_PI_8.sin());
    assert!((overlap.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn eig_rejects_non_hermitian() {
    let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
    assert!(matches!(eig_hermitian(&m), Err(Error::InvalidArgument(_))));
}

#[test]
fn psd_examples() {
    assert!(is_psd(&HermitianOperator::identity(4), SPECTRAL_TOL));
    let d = HermitianOperator::from_real_rows(&[&[1.0, 0.0], &[0.0, -0.5]]).unwrap();
    assert!(!is_psd(&d, 1e-10));
}

fn random_state(num_qubits: usize, seed: u64) -> Statevector {
    let mut rng = SeedStream::new(seed).stream(0);
    let raw: Vec<C64> =
        (0..1usize << num_qubits).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::new(raw.iter().map(|a| a / norm).collect()).unwrap()
}

fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    let mut rng = SeedStream::new(seed).stream(0);
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    HermitianOperator::new((&g + g.adjoint()) * c(0.5)).unwrap()
}

fn random_density(num_qubits: usize, rank: usize, seed: u64) -> DensityMatrix {
    let dim = 1usize << num_qubits;
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    for r in 0..rank {
        let v = random_state(num_qubits, seed.wrapping_mul(31).wrapping_add(r as u64));
        let col = nalgebra::DVector::from_column_slice(v.amplitudes());
        acc += &col * col.adjoint();
    }
    acc /= c(rank as f64);
    // Symmetrize away rounding so the Hermitian check is exact.
    DensityMatrix::new((&acc + acc.adjoint()) * c(0.5)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hadamard_is_an_involution(n in 1usize..=8, seed in any::<u64>()) {
        let s = random_state(n, seed);
        let back = s.apply_hadamard_all().apply_hadamard_all();
        for (a, b) in s.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn unitaries_preserve_norm(n in 1usize..=8, seed in any::<u64>(), theta in 0.0f64..6.3, q in 0usize..8) {
        let s = random_state(n, seed);
        let (sn, cs) = theta.sin_cos();
        let gate = [[c(cs), C64::new(0.0, -sn)], [C64::new(0.0, -sn), c(cs)]];
        let out = s.apply_single_qubit(q % n, &gate).unwrap().apply_hadamard_all();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstruction(dim in 1usize..=32, seed in any::<u64>()) {
        let op = random_hermitian(dim, seed);
        let spec = op.eigen();
        let rec = HermitianOperator::new((&spec.reconstruct() + spec.reconstruct().adjoint()) * c(0.5)).unwrap();
        prop_assert!(rec.max_abs_diff(&op) <= 1e-10);
        for w in spec.values.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for i in 0..dim {
            for j in 0..dim {
                let ip = spec.vectors[i].dotc(&spec.vectors[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - c(expected)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(
        n in 2usize..=6,
        rank in 1usize..=4,
        seed in any::<u64>(),
        mask in 1u32..64,
    ) {
        let rho = random_density(n, rank, seed);
        let keep: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let reduced = rho.partial_trace(&keep).unwrap();
        prop_assert!((reduced.operator().trace() - 1.0).abs() < 1e-12);
        prop_assert!(reduced.operator().is_psd(SPECTRAL_TOL));
    }
}
