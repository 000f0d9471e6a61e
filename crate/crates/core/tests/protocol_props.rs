use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rio_core::circuit::{apply_gate, enumerate_branches, GateConst, QubitLabel, Register};
use rio_core::linalg::{global_phase_align, Matrix, StateVector};
use rio_core::protocol::*;
use rio_core::sampling::{haar_state, random_phases};
use rio_core::Complex64;

fn inputs(seed: u64) -> (StateVector<f64>, DiagonalPhases<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (haar_state(&mut rng, &[2, 2]), random_phases(&mut rng))
}

/// `R2(x)` straight from the ordering, without going through any circuit.
fn r2_oracle(x: u32) -> Matrix<f64> {
    let p = permutation_of_index(x).unwrap().p();
    let mut m = Matrix::zeros(4);
    for (row, &col) in p.iter().enumerate() {
        m[(row, col as usize)] = Complex64::new(1.0, 0.0);
    }
    m
}

#[test]
fn published_decompositions_all_match() {
    let audit = verify_decompositions::<f64>();
    assert_eq!(audit.len(), 24);
    for row in &audit {
        assert!(row.exact_match, "x = {} mismatch", row.x);
        assert_eq!(row.max_deviation, 0.0);
        assert_eq!(row.expected, r2_oracle(row.x));
    }
    let x2 = &audit[1];
    assert_eq!(x2.published.factors(), &[Generator::Cnot12]);
    let x5 = &audit[4];
    assert_eq!(x5.permutation.labels(), ["00", "11", "01", "10"]);
    assert_eq!(x5.published.factors(), &[Generator::Cnot12, Generator::Cnot21]);
}

/// Minimal word length for every permutation by exhaustive enumeration of
/// all words up to length 6.
fn brute_force_lengths() -> std::collections::HashMap<BasisMap, usize> {
    let mut best = std::collections::HashMap::new();
    for len in 0..=6u32 {
        for code in 0..4usize.pow(len) {
            let mut c = code;
            let word: Vec<Generator> = (0..len)
                .map(|_| {
                    let g = Generator::ALL[c % 4];
                    c /= 4;
                    g
                })
                .collect();
            best.entry(GateSequence::new(word).basis_map()).or_insert(len as usize);
        }
    }
    best
}

#[test]
fn synthesizer_is_sound_and_minimal() {
    let lengths = brute_force_lengths();
    assert_eq!(lengths.len(), 24);
    for x in 1..=24 {
        let target = build_r2::<f64>(x).unwrap();
        let word = synthesize_permutation(&target).unwrap();
        assert_eq!(word.matrix::<f64>(), *target.matrix(), "x = {x}");
        let map = permutation_of_index(x).unwrap().recovery_map();
        assert_eq!(word.len(), lengths[&map], "x = {x}");
        assert!(word.len() <= decomposition_table(x).unwrap().len(), "x = {x}");
    }
}

#[test]
fn recovery_matches_direct_matrix() {
    let reg = Register::qubits(&[QubitLabel::Y1, QubitLabel::Y2]).unwrap();
    let z = GateConst::Z.matrix::<f64>();
    let i = GateConst::I.matrix::<f64>();
    for x in 1..=24 {
        for (a1, a2) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
            let left = if a1 == 1 { &z } else { &i };
            let right = if a2 == 1 { &z } else { &i };
            let corr = left.kron(right).unwrap();
            let direct = corr.matrix().matmul(&r2_oracle(x)).unwrap();
            let (psi, _) = inputs(1000 + x as u64);
            let got = apply_recovery(&psi, &reg, a1, a2, x).unwrap();
            let want = direct.apply(psi.amplitudes()).unwrap();
            for (g, w) in got.amplitudes().iter().zip(&want) {
                assert!((g - w).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn bob_branches_after_cnots_are_uniform() {
    let reg = Register::protocol();
    for seed in 0..20 {
        let (xi, _) = inputs(seed);
        let mut psi = bell_channel::<f64>().kron(&xi).unwrap();
        psi = apply_gate(&psi, GateConst::Cnot, &[reg.id(QubitLabel::Y1), reg.id(QubitLabel::B1)]).unwrap();
        psi = apply_gate(&psi, GateConst::Cnot, &[reg.id(QubitLabel::Y2), reg.id(QubitLabel::B2)]).unwrap();
        let branches = enumerate_branches(&psi, &[reg.id(QubitLabel::B1), reg.id(QubitLabel::B2)]).unwrap();
        assert_eq!(branches.len(), 4);
        for b in &branches {
            assert!((b.probability - 0.25).abs() < 1e-12);
        }
        // b = 00 leaves sum_m y_m |m>_A |00>_B |m>_Y
        let post = branches[0].state.as_ref().unwrap();
        for a in 0..4usize {
            for y in 0..4usize {
                let amp = post.amplitude(&[a >> 1, a & 1, 0, 0, y >> 1, y & 1]);
                let want = if a == y { xi.amplitudes()[y] } else { Complex64::new(0.0, 0.0) };
                assert!((amp - want).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn worked_example_intermediate_amplitudes() {
    for seed in 0..25 {
        let (xi, t) = inputs(500 + seed);
        let tr = run_protocol(10, &t, &xi, Some(BranchBits::new(0, 0, 1, 1)), seed).unwrap();
        let y = xi.amplitudes();
        let want = [y[0] * t.get(3), y[1] * t.get(0), -y[2] * t.get(1), -y[3] * t.get(2)];
        for (got, w) in tr.pre_recovery.amplitudes().iter().zip(&want) {
            assert!((got - w).norm() < 1e-12);
        }
        for (got, w) in tr.final_state.amplitudes().iter().zip(tr.expected.amplitudes()) {
            assert!((got - w).norm() < 1e-12);
        }
        assert_eq!(tr.x_bits, "01010");
    }
}

#[test]
fn branch_uniformity_and_determinism() {
    for seed in 0..200u64 {
        let (xi, t) = inputs(seed);
        let x = 1 + (seed % 24) as u32;
        let mut reference: Option<StateVector<f64>> = None;
        for bits in BranchBits::all() {
            let tr = run_protocol(x, &t, &xi, Some(bits), seed).unwrap();
            assert!((tr.bob_probability - 0.25).abs() < 1e-12);
            assert!((tr.alice_probability - 0.25).abs() < 1e-12);
            match &reference {
                None => reference = Some(tr.final_state.clone()),
                Some(r) => {
                    let (_, res) = global_phase_align(r, &tr.final_state).unwrap();
                    assert!(res < 1e-10);
                }
            }
        }
    }
}

#[test]
fn sampled_runs_are_reproducible() {
    let (xi, t) = inputs(9);
    let a = run_protocol(17, &t, &xi, None, 42).unwrap();
    let b = run_protocol(17, &t, &xi, None, 42).unwrap();
    assert_eq!(a, b);
    assert!(a.residual < 1e-10);
    let bits: std::collections::HashSet<_> =
        (0..64).map(|s| run_protocol(17, &t, &xi, None, s).unwrap().bits).collect();
    assert!(bits.len() > 8, "seeds should reach many branches");
}

#[test]
fn single_precision_protocol() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xi: StateVector<f32> = haar_state(&mut rng, &[2, 2]);
    let t: DiagonalPhases<f32> = random_phases(&mut rng);
    for x in [1, 10, 24] {
        let tr = run_protocol(x, &t, &xi, Some(BranchBits::from_code(13)), 0).unwrap();
        assert!(tr.residual < 1e-5, "{}", tr.residual);
    }
}

#[test]
fn forced_branch_probabilities_are_never_impossible() {
    let xi = StateVector::<f64>::basis(&[2, 2], &[0, 0]).unwrap();
    for bits in BranchBits::all() {
        assert!(run_protocol(5, &DiagonalPhases::ones(), &xi, Some(bits), 0).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn t2_is_unitary_monomial(x in 1u32..=24, seed in any::<u64>()) {
        let (_, t) = inputs(seed);
        let m = build_t2::<f64>(x, &t).unwrap();
        prop_assert!(m.matrix().unitarity_deviation() < 1e-12);
        for i in 0..4 {
            let row_nz = (0..4).filter(|&j| m[(i, j)].norm() > 0.0).count();
            let col_nz = (0..4).filter(|&j| m[(j, i)].norm() > 0.0).count();
            prop_assert_eq!(row_nz, 1);
            prop_assert_eq!(col_nz, 1);
        }
    }

    #[test]
    fn protocol_output_is_target(x in 1u32..=24, code in 0u8..16, seed in any::<u64>()) {
        let (xi, t) = inputs(seed);
        let tr = run_protocol(x, &t, &xi, Some(BranchBits::from_code(code)), seed).unwrap();
        prop_assert!(tr.residual < 1e-10);
    }
}
