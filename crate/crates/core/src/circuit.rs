//! Qubit-register layer: named gates, projective measurement with explicit
//! branch selection, and exhaustive branch enumeration.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, StateVector, UnitaryMatrix};
use crate::scalar::Real;

/// Probability below which a forced measurement branch is rejected.
pub const IMPOSSIBLE_BRANCH: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum QubitLabel {
    A1,
    A2,
    B1,
    B2,
    Y1,
    Y2,
}

impl QubitLabel {
    /// Storage order of the protocol register.
    pub const PROTOCOL_ORDER: [QubitLabel; 6] = [
        QubitLabel::A1,
        QubitLabel::A2,
        QubitLabel::B1,
        QubitLabel::B2,
        QubitLabel::Y1,
        QubitLabel::Y2,
    ];
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QubitId {
    pub label: QubitLabel,
    pub index: usize,
}

/// Labelled subsystems with their local dimensions (2 for qubits, 3 for
/// three-level atoms).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    labels: Vec<QubitLabel>,
    dims: Vec<usize>,
}

impl Register {
    pub fn qubits(labels: &[QubitLabel]) -> Result<Self> {
        Self::with_dims(labels, &vec![2; labels.len()])
    }

    pub fn with_dims(labels: &[QubitLabel], dims: &[usize]) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: dims.len(),
            });
        }
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(Error::DuplicateTarget(k));
            }
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidParameter("subsystem dimension below 2".into()));
        }
        Ok(Self {
            labels: labels.to_vec(),
            dims: dims.to_vec(),
        })
    }

    /// The six-qubit register `(A1, A2, B1, B2, Y1, Y2)`.
    pub fn protocol() -> Self {
        Self::qubits(&QubitLabel::PROTOCOL_ORDER).expect("labels are distinct")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn get(&self, label: QubitLabel) -> Option<QubitId> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|index| QubitId { label, index })
    }

    /// Panics when `label` is not part of the register.
    pub fn id(&self, label: QubitLabel) -> QubitId {
        self.get(label)
            .unwrap_or_else(|| panic!("qubit {label} not in register"))
    }
}

/// Textbook gate constants. `X`, `Y`, `Z` are the Pauli matrices
/// `sigma_1`, `sigma_2`, `sigma_3`; `Cnot` takes `(control, target)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GateConst {
    I,
    X,
    Y,
    Z,
    H,
    Cnot,
}

impl GateConst {
    pub fn arity(self) -> usize {
        match self {
            GateConst::Cnot => 2,
            _ => 1,
        }
    }

    pub fn matrix<T: Real>(self) -> UnitaryMatrix<T> {
        let z = Complex::<T>::zero();
        let o = Complex::<T>::one();
        let i = Complex::<T>::i();
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        let data = match self {
            GateConst::I => vec![o, z, z, o],
            GateConst::X => vec![z, o, o, z],
            GateConst::Y => vec![z, -i, i, z],
            GateConst::Z => vec![o, z, z, -o],
            GateConst::H => vec![h, h, h, -h],
            GateConst::Cnot => vec![
                o, z, z, z, //
                z, o, z, z, //
                z, z, z, o, //
                z, z, o, z,
            ],
        };
        let m = Matrix::from_row_major(data).expect("square");
        UnitaryMatrix::with_tolerance(m, T::constructive_tol()).expect("gate constants are unitary")
    }
}

/// Embeds a qubit operator on subsystems of dimension `dims`, acting on the
/// lowest two levels of each and as identity whenever any subsystem sits
/// above level 1.
pub fn lift_to_levels<T: Real>(gate: &UnitaryMatrix<T>, dims: &[usize]) -> Result<UnitaryMatrix<T>> {
    let qubit_dim = 1usize << dims.len();
    if gate.dim() != qubit_dim {
        return Err(Error::ArityMismatch {
            expected: dims.len(),
            found: gate.dim().trailing_zeros() as usize,
        });
    }
    if dims.iter().all(|&d| d == 2) {
        return Ok(gate.clone());
    }
    let total: usize = dims.iter().product();
    let digits = |mut idx: usize| {
        let mut out = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            out[k] = idx % dims[k];
            idx /= dims[k];
        }
        out
    };
    let as_qubit = |ds: &[usize]| -> Option<usize> {
        ds.iter()
            .try_fold(0usize, |acc, &d| (d < 2).then_some(acc * 2 + d))
    };
    let mut m = Matrix::zeros(total);
    for row in 0..total {
        let rd = digits(row);
        for col in 0..total {
            let cd = digits(col);
            m[(row, col)] = match (as_qubit(&rd), as_qubit(&cd)) {
                (Some(r), Some(c)) => gate[(r, c)],
                (None, None) if row == col => Complex::one(),
                _ => Complex::zero(),
            };
        }
    }
    Ok(UnitaryMatrix::from_trusted(m))
}

/// Applies `gate` to `targets` (for `Cnot`: control first).
///
/// Targets with more than two levels receive the gate on their two lowest
/// levels.
pub fn apply_gate<T: Real>(
    state: &StateVector<T>,
    gate: GateConst,
    targets: &[QubitId],
) -> Result<StateVector<T>> {
    if targets.len() != gate.arity() {
        return Err(Error::ArityMismatch {
            expected: gate.arity(),
            found: targets.len(),
        });
    }
    apply_unitary(state, &gate.matrix(), targets)
}

/// Applies an arbitrary qubit unitary on `targets`.
pub fn apply_unitary<T: Real>(
    state: &StateVector<T>,
    u: &UnitaryMatrix<T>,
    targets: &[QubitId],
) -> Result<StateVector<T>> {
    let idx: Vec<usize> = targets.iter().map(|q| q.index).collect();
    for (k, &i) in idx.iter().enumerate() {
        if idx[..k].contains(&i) {
            return Err(Error::DuplicateTarget(i));
        }
        if i >= state.dims().len() {
            return Err(Error::SubsystemOutOfRange {
                index: i,
                len: state.dims().len(),
            });
        }
    }
    let dims: Vec<usize> = idx.iter().map(|&i| state.dims()[i]).collect();
    let lifted = lift_to_levels(u, &dims)?;
    state.apply(&lifted, &idx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementRecord<T> {
    pub qubit: QubitId,
    pub outcome: usize,
    /// Probability of the recorded branch before projection.
    pub probability: T,
}

/// How `measure` chooses its branch.
pub enum Selection<'a> {
    Forced(usize),
    Sampled(&'a mut dyn RngCore),
}

/// Projective measurement of one subsystem in its level basis.
pub fn measure<T: Real>(
    state: &StateVector<T>,
    qubit: QubitId,
    selection: Selection<'_>,
) -> Result<(MeasurementRecord<T>, StateVector<T>)> {
    let dim = *state
        .dims()
        .get(qubit.index)
        .ok_or(Error::SubsystemOutOfRange {
            index: qubit.index,
            len: state.dims().len(),
        })?;
    let probs = (0..dim)
        .map(|l| state.level_probability(qubit.index, l))
        .collect::<Result<Vec<T>>>()?;
    let outcome = match selection {
        Selection::Forced(o) => {
            if o >= dim {
                return Err(Error::LevelOutOfRange { level: o, dim });
            }
            o
        }
        Selection::Sampled(rng) => {
            let total: T = probs.iter().copied().sum();
            let u = T::lit(rng.random::<f64>()) * total;
            let mut acc = T::zero();
            let mut chosen = None;
            for (l, &p) in probs.iter().enumerate() {
                acc = acc + p;
                if u < acc && p > T::zero() {
                    chosen = Some(l);
                    break;
                }
            }
            // Rounding can leave u just above the running sum.
            chosen.unwrap_or_else(|| {
                probs
                    .iter()
                    .rposition(|&p| p > T::zero())
                    .expect("normalized state has a populated level")
            })
        }
    };
    let probability = probs[outcome];
    if probability < T::lit(IMPOSSIBLE_BRANCH) {
        return Err(Error::ImpossibleBranch {
            outcome,
            probability: probability.to_f64_lossy(),
        });
    }
    let post = state.project_raw(qubit.index, outcome)?.renormalize()?;
    Ok((
        MeasurementRecord {
            qubit,
            outcome,
            probability,
        },
        post,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T> {
    pub outcomes: Vec<usize>,
    pub probability: T,
    /// `None` for branches below the impossible-branch threshold.
    pub state: Option<StateVector<T>>,
}

/// Every joint outcome over `qubits`, in lexicographic order of outcomes.
pub fn enumerate_branches<T: Real>(
    state: &StateVector<T>,
    qubits: &[QubitId],
) -> Result<Vec<Branch<T>>> {
    for (k, q) in qubits.iter().enumerate() {
        if qubits[..k].iter().any(|p| p.index == q.index) {
            return Err(Error::DuplicateTarget(q.index));
        }
        if q.index >= state.dims().len() {
            return Err(Error::SubsystemOutOfRange {
                index: q.index,
                len: state.dims().len(),
            });
        }
    }
    let dims: Vec<usize> = qubits.iter().map(|q| state.dims()[q.index]).collect();
    let count: usize = dims.iter().product();
    let mut out = Vec::with_capacity(count);
    for mut code in 0..count {
        let mut outcomes = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            outcomes[k] = code % dims[k];
            code /= dims[k];
        }
        let mut projected = state.clone();
        for (q, &o) in qubits.iter().zip(&outcomes) {
            projected = projected.project_raw(q.index, o)?;
        }
        let n = projected.norm();
        let probability = n * n;
        let post = if probability < T::lit(IMPOSSIBLE_BRANCH) {
            None
        } else {
            Some(projected.renormalize()?)
        };
        out.push(Branch {
            outcomes,
            probability,
            state: post,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reg1() -> Register {
        Register::qubits(&[QubitLabel::A1]).unwrap()
    }

    #[test]
    fn hadamard_on_zero() {
        let r = reg1();
        let psi = StateVector::<f64>::zero_qubits(1).unwrap();
        let out = apply_gate(&psi, GateConst::H, &[r.id(QubitLabel::A1)]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let r = Register::qubits(&[QubitLabel::Y1, QubitLabel::B1]).unwrap();
        let psi = StateVector::<f64>::basis(&[2, 2], &[1, 0]).unwrap();
        let out = apply_gate(
            &psi,
            GateConst::Cnot,
            &[r.id(QubitLabel::Y1), r.id(QubitLabel::B1)],
        )
        .unwrap();
        assert_eq!(out.amplitude(&[1, 1]), c(1.0, 0.0));
        // reversed roles on a register where the control is the low digit
        let out = apply_gate(
            &psi,
            GateConst::Cnot,
            &[r.id(QubitLabel::B1), r.id(QubitLabel::Y1)],
        )
        .unwrap();
        assert_eq!(out.amplitude(&[1, 0]), c(1.0, 0.0));
    }

    #[test]
    fn arity_and_duplicates_rejected() {
        let r = Register::qubits(&[QubitLabel::Y1, QubitLabel::Y2]).unwrap();
        let psi = StateVector::<f64>::zero_qubits(2).unwrap();
        let y1 = r.id(QubitLabel::Y1);
        assert!(matches!(
            apply_gate(&psi, GateConst::Cnot, &[y1]),
            Err(Error::ArityMismatch { expected: 2, found: 1 })
        ));
        assert_eq!(
            apply_gate(&psi, GateConst::Cnot, &[y1, y1]),
            Err(Error::DuplicateTarget(0))
        );
    }

    #[test]
    fn gate_constants_square_to_identity() {
        for g in [GateConst::X, GateConst::Y, GateConst::Z, GateConst::H, GateConst::Cnot] {
            let m = g.matrix::<f64>();
            let sq = m.compose(&m).unwrap();
            let dev = sq.matrix().max_abs_diff(&Matrix::identity(m.dim()));
            assert!(dev <= 1e-15, "{g:?}: {dev}");
        }
    }

    #[test]
    fn pauli_matrices_match_listing() {
        let y = GateConst::Y.matrix::<f64>();
        assert_eq!(y[(0, 1)], c(0.0, -1.0));
        assert_eq!(y[(1, 0)], c(0.0, 1.0));
        let z = GateConst::Z.matrix::<f64>();
        assert_eq!(z[(1, 1)], c(-1.0, 0.0));
    }

    #[test]
    fn forced_measurement() {
        let r = reg1();
        let q = r.id(QubitLabel::A1);
        let plus = apply_gate(&StateVector::<f64>::zero_qubits(1).unwrap(), GateConst::H, &[q]).unwrap();
        let (rec, post) = measure(&plus, q, Selection::Forced(0)).unwrap();
        assert!((rec.probability - 0.5).abs() < 1e-15);
        assert_eq!(post, StateVector::basis(&[2], &[0]).unwrap());

        let one = StateVector::<f64>::basis(&[2], &[1]).unwrap();
        assert!(matches!(
            measure(&one, q, Selection::Forced(0)),
            Err(Error::ImpossibleBranch { outcome: 0, .. })
        ));
    }

    #[test]
    fn sampled_measurement_is_seeded_and_repeatable() {
        let r = reg1();
        let q = r.id(QubitLabel::A1);
        let psi = StateVector::<f64>::normalized(vec![2], vec![c(0.3, 0.0), c(0.0, 0.8)]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..32)
                .map(|_| measure(&psi, q, Selection::Sampled(&mut rng)).unwrap().0.outcome)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        // re-measurement agrees with the first outcome
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (first, post) = measure(&psi, q, Selection::Sampled(&mut rng)).unwrap();
        let (second, _) = measure(&post, q, Selection::Sampled(&mut rng)).unwrap();
        assert_eq!(first.outcome, second.outcome);
        assert!((second.probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_branches() {
        let r = Register::qubits(&[QubitLabel::A1, QubitLabel::B1]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![2, 2], vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
        let branches = enumerate_branches(&bell, &[r.id(QubitLabel::A1), r.id(QubitLabel::B1)]).unwrap();
        let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        assert!((probs[0] - 0.5).abs() < 1e-15 && (probs[3] - 0.5).abs() < 1e-15);
        assert_eq!(probs[1], 0.0);
        assert_eq!(probs[2], 0.0);
        assert!(branches[1].state.is_none() && branches[2].state.is_none());
        assert_eq!(branches[1].outcomes, vec![0, 1]);
    }

    #[test]
    fn product_state_single_branch() {
        let r = Register::qubits(&[QubitLabel::A1, QubitLabel::A2]).unwrap();
        let psi = StateVector::<f64>::zero_qubits(2).unwrap();
        let branches = enumerate_branches(&psi, &[r.id(QubitLabel::A1), r.id(QubitLabel::A2)]).unwrap();
        let live: Vec<_> = branches.iter().filter(|b| b.state.is_some()).collect();
        assert_eq!(live.len(), 1);
        assert_eq!(live[0].outcomes, vec![0, 0]);
        assert_eq!(live[0].probability, 1.0);
    }

    #[test]
    fn lifting_acts_on_lowest_levels() {
        let x3 = lift_to_levels(&GateConst::X.matrix::<f64>(), &[3]).unwrap();
        assert_eq!(x3[(1, 0)], c(1.0, 0.0));
        assert_eq!(x3[(2, 2)], c(1.0, 0.0));
        let cn = lift_to_levels(&GateConst::Cnot.matrix::<f64>(), &[3, 3]).unwrap();
        assert!(cn.matrix().unitarity_deviation() < 1e-15);
        // |e,g> -> |e,e> ; |i,g> untouched
        assert_eq!(cn[(4, 3)], c(1.0, 0.0));
        assert_eq!(cn[(6, 6)], c(1.0, 0.0));
    }
}
