use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rio_core::circuit::{apply_gate, enumerate_branches, measure, GateConst, QubitLabel, Register, Selection};
use rio_core::linalg::StateVector;
use rio_core::sampling::haar_state;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn branch_probabilities_sum_to_one(seed in any::<u64>(), mask in 1u8..64) {
        let reg = Register::protocol();
        let psi: StateVector<f64> = haar_state(&mut ChaCha8Rng::seed_from_u64(seed), reg.dims());
        let qubits: Vec<_> = QubitLabel::PROTOCOL_ORDER
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, &l)| reg.id(l))
            .collect();
        let branches = enumerate_branches(&psi, &qubits).unwrap();
        prop_assert_eq!(branches.len(), 1 << qubits.len());
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for b in branches.iter().filter_map(|b| b.state.as_ref()) {
            prop_assert!(b.is_normalized());
        }
    }

    #[test]
    fn cnot_is_an_involution(seed in any::<u64>(), c in 0usize..6, t in 0usize..6) {
        prop_assume!(c != t);
        let reg = Register::protocol();
        let psi: StateVector<f64> = haar_state(&mut ChaCha8Rng::seed_from_u64(seed), reg.dims());
        let ids = [reg.id(QubitLabel::PROTOCOL_ORDER[c]), reg.id(QubitLabel::PROTOCOL_ORDER[t])];
        let twice = apply_gate(&apply_gate(&psi, GateConst::Cnot, &ids).unwrap(), GateConst::Cnot, &ids).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(twice.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn remeasurement_repeats_outcome(seed in any::<u64>(), q in 0usize..6) {
        let reg = Register::protocol();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi: StateVector<f64> = haar_state(&mut rng, reg.dims());
        let id = reg.id(QubitLabel::PROTOCOL_ORDER[q]);
        let (first, post) = measure(&psi, id, Selection::Sampled(&mut rng)).unwrap();
        let (second, _) = measure(&post, id, Selection::Sampled(&mut rng)).unwrap();
        prop_assert_eq!(first.outcome, second.outcome);
        prop_assert!((second.probability - 1.0).abs() < 1e-12);
    }
}
