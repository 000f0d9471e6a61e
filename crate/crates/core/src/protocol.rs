//! Remote implementation of two-qubit operations with one nonzero entry per
//! row and column.
//!
//! Alice holds `A1 A2`, Bob holds `B1 B2` (the other halves of two Bell
//! pairs) and the target pair `Y1 Y2`. An operator `T2(x, t)` applied by
//! Alice ends up acting on `Y1 Y2` after two rounds of classical
//! communication and Bob's recovery `R(a1, a2, x)`.
//!
//! Basis labels `00, 01, 10, 11` read `Y1 Y2` (first bit most significant),
//! with `0 = g` and `1 = e` for atoms.

use std::collections::VecDeque;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{
    apply_gate, apply_unitary, measure, GateConst, MeasurementRecord, QubitId, QubitLabel,
    Register, Selection,
};
use crate::error::{Error, Result};
use crate::linalg::{phase_residual, Matrix, StateVector, UnitaryMatrix};
use crate::scalar::Real;

/// Number of operators in the family (all orderings of four basis labels).
pub const OPERATOR_COUNT: u32 = 24;

/// Basis permutation as a map `image[j]` of basis index `j`.
pub type BasisMap = [u8; 4];

const IDENTITY_MAP: BasisMap = [0, 1, 2, 3];

fn compose(outer: &BasisMap, inner: &BasisMap) -> BasisMap {
    let mut out = [0; 4];
    for j in 0..4 {
        out[j] = outer[inner[j] as usize];
    }
    out
}

fn map_matrix<T: Real>(map: &BasisMap) -> Matrix<T> {
    let mut m = Matrix::zeros(4);
    for (j, &i) in map.iter().enumerate() {
        m[(i as usize, j)] = Complex::one();
    }
    m
}

/// Two-bit label of a basis index, e.g. `2 -> "10"`.
pub fn basis_label(m: u8) -> String {
    format!("{:02b}", m)
}

/// `x` as the five-bit string sent over the classical channel.
pub fn x_bits(x: u32) -> String {
    format!("{:05b}", x)
}

/// The ordering `p(x) = (p_00, p_01, p_10, p_11)` of the four basis labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PermutationSpec {
    x: u32,
    p: [u8; 4],
}

impl PermutationSpec {
    pub fn x(&self) -> u32 {
        self.x
    }

    /// `p_m(x)` for `m = 0..4`.
    pub fn p(&self) -> [u8; 4] {
        self.p
    }

    pub fn labels(&self) -> [String; 4] {
        self.p.map(basis_label)
    }

    /// Basis map of `R2(x) = sum_m |m><p_m(x)|`: sends `|p_m>` to `|m>`.
    pub fn recovery_map(&self) -> BasisMap {
        let mut map = [0; 4];
        for (m, &pm) in self.p.iter().enumerate() {
            map[pm as usize] = m as u8;
        }
        map
    }
}

fn check_x(x: u32) -> Result<()> {
    if (1..=OPERATOR_COUNT).contains(&x) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange(x))
    }
}

/// Lexicographic rank-`x` ordering of `(00, 01, 10, 11)`, with `x = 1` the
/// identity ordering.
pub fn permutation_of_index(x: u32) -> Result<PermutationSpec> {
    check_x(x)?;
    let mut pool: Vec<u8> = vec![0, 1, 2, 3];
    let mut rank = (x - 1) as usize;
    let mut p = [0u8; 4];
    let mut radix = 6; // 3!
    for (k, slot) in p.iter_mut().enumerate() {
        let digit = rank / radix;
        rank %= radix;
        *slot = pool.remove(digit);
        if k < 3 {
            radix /= 3 - k;
        }
    }
    Ok(PermutationSpec { x, p })
}

/// The four diagonal entries `t_00, t_01, t_10, t_11`; each must be
/// unimodular for `T2(x, t)` to be unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalPhases<T>([Complex<T>; 4]);

impl<T: Real> DiagonalPhases<T> {
    pub fn new(t: [Complex<T>; 4]) -> Result<Self> {
        for (index, z) in t.iter().enumerate() {
            let modulus = z.norm();
            if !((modulus - T::one()).abs() <= T::constructive_tol()) {
                return Err(Error::NotUnimodular {
                    index,
                    modulus: modulus.to_f64_lossy(),
                });
            }
        }
        Ok(Self(t))
    }

    pub fn from_angles(theta: [T; 4]) -> Self {
        Self(theta.map(|a| Complex::from_polar(T::one(), a)))
    }

    pub fn ones() -> Self {
        Self([Complex::one(); 4])
    }

    /// All four entries equal to `e^{i theta}`.
    pub fn uniform(theta: T) -> Self {
        Self::from_angles([theta; 4])
    }

    pub fn get(&self, m: usize) -> Complex<T> {
        self.0[m]
    }

    pub fn as_array(&self) -> &[Complex<T>; 4] {
        &self.0
    }
}

/// `R2(x) = T2(x, 1)`, the permutation part of the operator.
pub fn build_r2<T: Real>(x: u32) -> Result<UnitaryMatrix<T>> {
    let spec = permutation_of_index(x)?;
    Ok(UnitaryMatrix::from_trusted(map_matrix(&spec.recovery_map())))
}

/// `T2(x, t) = diag(t) R2(x)`.
pub fn build_t2<T: Real>(x: u32, t: &DiagonalPhases<T>) -> Result<UnitaryMatrix<T>> {
    let r = build_r2::<T>(x)?;
    let d = Matrix::diagonal(t.as_array());
    UnitaryMatrix::with_tolerance(d.matmul(r.matrix())?, T::constructive_tol())
}

/// Generators of the recovery circuits, acting on `Y1 Y2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Generator {
    /// CNOT with control `Y1`, target `Y2`.
    Cnot12,
    /// CNOT with control `Y2`, target `Y1`.
    Cnot21,
    /// `sigma_1` on `Y1`.
    XI,
    /// `sigma_1` on `Y2`.
    IX,
}

impl Generator {
    pub const ALL: [Generator; 4] = [
        Generator::Cnot12,
        Generator::Cnot21,
        Generator::XI,
        Generator::IX,
    ];

    pub fn basis_map(self) -> BasisMap {
        let mut map = [0; 4];
        for j in 0..4u8 {
            map[j as usize] = match self {
                Generator::Cnot12 if j & 2 != 0 => j ^ 1,
                Generator::Cnot21 if j & 1 != 0 => j ^ 2,
                Generator::XI => j ^ 2,
                Generator::IX => j ^ 1,
                _ => j,
            };
        }
        map
    }

    pub fn matrix<T: Real>(self) -> UnitaryMatrix<T> {
        UnitaryMatrix::from_trusted(map_matrix(&self.basis_map()))
    }

    /// Applies the generator with `y1`, `y2` as the logical pair.
    pub fn apply<T: Real>(
        self,
        state: &StateVector<T>,
        y1: QubitId,
        y2: QubitId,
    ) -> Result<StateVector<T>> {
        match self {
            Generator::Cnot12 => apply_gate(state, GateConst::Cnot, &[y1, y2]),
            Generator::Cnot21 => apply_gate(state, GateConst::Cnot, &[y2, y1]),
            Generator::XI => apply_gate(state, GateConst::X, &[y1]),
            Generator::IX => apply_gate(state, GateConst::X, &[y2]),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Cnot12 => "CNOT(Y1,Y2)",
            Generator::Cnot21 => "CNOT(Y2,Y1)",
            Generator::XI => "X(x)I",
            Generator::IX => "I(x)X",
        })
    }
}

/// Product of generators in written order: the rightmost factor acts first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct GateSequence(Vec<Generator>);

impl GateSequence {
    pub fn new(factors: Vec<Generator>) -> Self {
        Self(factors)
    }

    pub fn factors(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Factors in the order they act on a state.
    pub fn application_order(&self) -> impl Iterator<Item = Generator> + '_ {
        self.0.iter().rev().copied()
    }

    pub fn basis_map(&self) -> BasisMap {
        self.0
            .iter()
            .fold(IDENTITY_MAP, |acc, g| compose(&acc, &g.basis_map()))
    }

    /// Floating-point product of the factor matrices.
    pub fn matrix<T: Real>(&self) -> Matrix<T> {
        self.0
            .iter()
            .fold(Matrix::identity(4), |acc, g| &acc * g.matrix::<T>().matrix())
    }

    pub fn apply<T: Real>(
        &self,
        state: &StateVector<T>,
        y1: QubitId,
        y2: QubitId,
    ) -> Result<StateVector<T>> {
        self.application_order()
            .try_fold(state.clone(), |s, g| g.apply(&s, y1, y2))
    }
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("I(x)I");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Published recovery circuits, written as products (rightmost acts first).
/// `sigma_1 (x) sigma_1` for `x = 24` is written as its two generators.
const PUBLISHED: [&[Generator]; 24] = {
    use Generator::*;
    [
        &[],
        &[Cnot12],
        &[Cnot21, Cnot12, Cnot21],
        &[Cnot21, Cnot12],
        &[Cnot12, Cnot21],
        &[Cnot21],
        &[Cnot12, IX],
        &[IX],
        &[XI, Cnot12, Cnot21],
        &[Cnot21, IX],
        &[Cnot21, XI, Cnot12, Cnot21],
        &[Cnot21, Cnot12, IX],
        &[Cnot21, Cnot12, XI],
        &[Cnot21, Cnot12, XI, Cnot21],
        &[Cnot21, XI],
        &[Cnot12, XI, Cnot21],
        &[XI],
        &[Cnot12, XI],
        &[IX, Cnot21],
        &[Cnot12, IX, Cnot21],
        &[Cnot21, XI, Cnot12],
        &[Cnot21, Cnot12, IX, Cnot21],
        &[XI, Cnot12],
        &[XI, IX],
    ]
};

/// The published decomposition of `R2(x)`, verbatim.
pub fn decomposition_table(x: u32) -> Result<GateSequence> {
    check_x(x)?;
    Ok(GateSequence(PUBLISHED[(x - 1) as usize].to_vec()))
}

/// Shortest generator word for a basis map, ties broken lexicographically
/// in written order with `Cnot12 < Cnot21 < XI < IX`.
pub fn synthesize_map(target: &BasisMap) -> GateSequence {
    // BFS appends on the right of the written word: the new factor acts
    // first. Queue order then yields the lexicographically least word.
    let mut seen: Vec<(BasisMap, Vec<Generator>)> = vec![(IDENTITY_MAP, Vec::new())];
    let mut queue = VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        let (map, word) = seen[idx].clone();
        if &map == target {
            return GateSequence(word);
        }
        for g in Generator::ALL {
            let next = compose(&map, &g.basis_map());
            if seen.iter().all(|(m, _)| *m != next) {
                let mut w = word.clone();
                w.push(g);
                seen.push((next, w));
                queue.push_back(seen.len() - 1);
            }
        }
    }
    unreachable!("the generators span every permutation of four basis states")
}

fn as_basis_map<T: Real>(m: &Matrix<T>) -> Result<BasisMap> {
    if m.dim() != 4 {
        return Err(Error::NotPermutation);
    }
    let tol = T::constructive_tol();
    let mut map = [0u8; 4];
    for j in 0..4 {
        let mut hit = None;
        for i in 0..4 {
            let z = m[(i, j)];
            if (z - Complex::one()).norm() <= tol {
                if hit.replace(i).is_some() {
                    return Err(Error::NotPermutation);
                }
            } else if z.norm() > tol {
                return Err(Error::NotPermutation);
            }
        }
        map[j] = hit.ok_or(Error::NotPermutation)? as u8;
    }
    let mut sorted = map;
    sorted.sort_unstable();
    if sorted != IDENTITY_MAP {
        return Err(Error::NotPermutation);
    }
    Ok(map)
}

/// Shortest generator word whose product equals the permutation `target`.
pub fn synthesize_permutation<T: Real>(target: &UnitaryMatrix<T>) -> Result<GateSequence> {
    Ok(synthesize_map(&as_basis_map(target.matrix())?))
}

/// One row of the decomposition audit.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionAudit<T> {
    pub x: u32,
    pub permutation: PermutationSpec,
    pub published: GateSequence,
    pub product: Matrix<T>,
    pub expected: Matrix<T>,
    /// Exact comparison of the two basis maps.
    pub exact_match: bool,
    pub max_deviation: T,
    pub synthesized: GateSequence,
}

/// Multiplies each published sequence and compares it with `R2(x)`.
pub fn verify_decompositions<T: Real>() -> Vec<DecompositionAudit<T>> {
    (1..=OPERATOR_COUNT)
        .map(|x| {
            let permutation = permutation_of_index(x).expect("in range");
            let published = decomposition_table(x).expect("in range");
            let expected_map = permutation.recovery_map();
            let product = published.matrix::<T>();
            let expected = map_matrix::<T>(&expected_map);
            DecompositionAudit {
                x,
                permutation,
                exact_match: published.basis_map() == expected_map,
                max_deviation: product.max_abs_diff(&expected),
                product,
                expected,
                synthesized: synthesize_map(&expected_map),
                published,
            }
        })
        .collect()
}

/// The circuit Bob runs for `R2(x)`: the published one when it checks out,
/// the synthesized one otherwise.
pub fn recovery_sequence(x: u32) -> Result<GateSequence> {
    let published = decomposition_table(x)?;
    let expected = permutation_of_index(x)?.recovery_map();
    if published.basis_map() == expected {
        Ok(published)
    } else {
        Ok(synthesize_map(&expected))
    }
}

/// Bob's recovery: `R2(x)` first, then `sigma_3` on `Y1` if `a1 = 1` and on
/// `Y2` if `a2 = 1`.
pub fn apply_recovery<T: Real>(
    state: &StateVector<T>,
    register: &Register,
    a1: u8,
    a2: u8,
    x: u32,
) -> Result<StateVector<T>> {
    let y1 = register.id(QubitLabel::Y1);
    let y2 = register.id(QubitLabel::Y2);
    let mut s = recovery_sequence(x)?.apply(state, y1, y2)?;
    if a1 == 1 {
        s = apply_gate(&s, GateConst::Z, &[y1])?;
    }
    if a2 == 1 {
        s = apply_gate(&s, GateConst::Z, &[y2])?;
    }
    Ok(s)
}

/// Measurement outcomes `(b1, b2)` of Bob and `(a1, a2)` of Alice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BranchBits {
    pub b1: u8,
    pub b2: u8,
    pub a1: u8,
    pub a2: u8,
}

impl BranchBits {
    pub fn new(b1: u8, b2: u8, a1: u8, a2: u8) -> Self {
        Self { b1, b2, a1, a2 }
    }

    /// Branch `code` in `0..16`, bits read `b1 b2 a1 a2`.
    pub fn from_code(code: u8) -> Self {
        Self {
            b1: (code >> 3) & 1,
            b2: (code >> 2) & 1,
            a1: (code >> 1) & 1,
            a2: code & 1,
        }
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..16).map(Self::from_code)
    }

    pub fn label(&self) -> String {
        format!("{}{}{}{}", self.b1, self.b2, self.a1, self.a2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript<T> {
    pub x: u32,
    pub x_bits: String,
    pub bits: BranchBits,
    pub measurements: Vec<MeasurementRecord<T>>,
    /// Joint probability of Bob's outcome `(b1, b2)`.
    pub bob_probability: T,
    /// Joint probability of Alice's outcome `(a1, a2)` given Bob's.
    pub alice_probability: T,
    pub input: StateVector<T>,
    pub phases: DiagonalPhases<T>,
    /// `Y1 Y2` state after Alice's measurement, before recovery.
    pub pre_recovery: StateVector<T>,
    pub final_state: StateVector<T>,
    /// `T2(x, t) xi`.
    pub expected: StateVector<T>,
    /// `||expected - phase * final||` after global phase alignment.
    pub residual: T,
}

/// Two normalized Bell pairs `A1B1`, `A2B2` on `(A1, A2, B1, B2)`.
pub fn bell_channel<T: Real>() -> StateVector<T> {
    let half = Complex::new(T::lit(0.5), T::zero());
    let mut amps = vec![Complex::zero(); 16];
    for a1 in 0..2 {
        for a2 in 0..2 {
            // |a1 a2 b1 b2> with b = a
            amps[(a1 << 3) | (a2 << 2) | (a1 << 1) | a2] = half;
        }
    }
    StateVector::new(vec![2; 4], amps).expect("normalized")
}

pub(crate) fn check_pair_state<T: Real>(xi: &StateVector<T>) -> Result<()> {
    if xi.dims() != [2, 2] {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: xi.dim(),
        });
    }
    if !xi.is_normalized() {
        return Err(Error::NotNormalized {
            norm: xi.norm().to_f64_lossy(),
        });
    }
    Ok(())
}

/// Runs the full protocol on the register `(A1, A2, B1, B2, Y1, Y2)`.
///
/// With `forced = None` the four measurements are drawn from a ChaCha
/// stream seeded with `seed`; otherwise the given branch is traversed.
pub fn run_protocol<T: Real>(
    x: u32,
    t: &DiagonalPhases<T>,
    xi: &StateVector<T>,
    forced: Option<BranchBits>,
    seed: u64,
) -> Result<ProtocolTranscript<T>> {
    check_x(x)?;
    check_pair_state(xi)?;
    let reg = Register::protocol();
    let [a1q, a2q, b1q, b2q, y1q, y2q] = QubitLabel::PROTOCOL_ORDER.map(|l| reg.id(l));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi = bell_channel::<T>().kron(xi)?;
    psi = apply_gate(&psi, GateConst::Cnot, &[y1q, b1q])?;
    psi = apply_gate(&psi, GateConst::Cnot, &[y2q, b2q])?;

    let mut measurements = Vec::with_capacity(4);
    let mut measure_one = |psi: &StateVector<T>, q: QubitId, bit: Option<u8>| -> Result<_> {
        let (rec, post) = match bit {
            Some(b) => measure(psi, q, Selection::Forced(b as usize))?,
            None => measure(psi, q, Selection::Sampled(&mut rng))?,
        };
        measurements.push(rec);
        Ok((rec.outcome as u8, rec.probability, post))
    };

    let (b1, pb1, psi_b1) = measure_one(&psi, b1q, forced.map(|f| f.b1))?;
    let (b2, pb2, mut psi) = measure_one(&psi_b1, b2q, forced.map(|f| f.b2))?;

    if b1 == 1 {
        psi = apply_gate(&psi, GateConst::X, &[a1q])?;
    }
    if b2 == 1 {
        psi = apply_gate(&psi, GateConst::X, &[a2q])?;
    }
    let t2 = build_t2(x, t)?;
    psi = apply_unitary(&psi, &t2, &[a1q, a2q])?;
    psi = apply_gate(&psi, GateConst::H, &[a1q])?;
    psi = apply_gate(&psi, GateConst::H, &[a2q])?;

    let (a1, pa1, psi_a1) = measure_one(&psi, a1q, forced.map(|f| f.a1))?;
    let (a2, pa2, psi) = measure_one(&psi_a1, a2q, forced.map(|f| f.a2))?;

    let fixed = [
        (a1q.index, a1 as usize),
        (a2q.index, a2 as usize),
        (b1q.index, b1 as usize),
        (b2q.index, b2 as usize),
    ];
    let pre_recovery = psi.condition_on(&fixed)?;
    let recovered = apply_recovery(&psi, &reg, a1, a2, x)?;
    let final_state = recovered.condition_on(&fixed)?;
    let expected = StateVector::new(vec![2, 2], t2.matrix().apply(xi.amplitudes())?)?;
    let residual = phase_residual(&expected, &final_state)?;

    Ok(ProtocolTranscript {
        x,
        x_bits: x_bits(x),
        bits: BranchBits { b1, b2, a1, a2 },
        measurements,
        bob_probability: pb1 * pb2,
        alice_probability: pa1 * pa2,
        input: xi.clone(),
        phases: *t,
        pre_recovery,
        final_state,
        expected,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn anchor_permutations() {
        assert_eq!(permutation_of_index(1).unwrap().p(), [0, 1, 2, 3]);
        // p(10) = (ge, eg, ee, gg)
        assert_eq!(permutation_of_index(10).unwrap().p(), [1, 2, 3, 0]);
        assert_eq!(permutation_of_index(24).unwrap().p(), [3, 2, 1, 0]);
        assert_eq!(permutation_of_index(5).unwrap().labels(), ["00", "11", "01", "10"]);
        assert_eq!(permutation_of_index(0), Err(Error::IndexOutOfRange(0)));
        assert_eq!(permutation_of_index(25), Err(Error::IndexOutOfRange(25)));
    }

    #[test]
    fn permutations_are_distinct_and_sorted() {
        let all: Vec<[u8; 4]> = (1..=24).map(|x| permutation_of_index(x).unwrap().p()).collect();
        for w in all.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn x_renders_as_five_bits() {
        assert_eq!(x_bits(10), "01010");
        assert_eq!(x_bits(24), "11000");
        assert_eq!(x_bits(1), "00001");
    }

    #[test]
    fn r2_anchor_matrices() {
        assert_eq!(build_r2::<f64>(1).unwrap().matrix(), &Matrix::identity(4));
        assert_eq!(build_r2::<f64>(2).unwrap(), Generator::Cnot12.matrix());
        assert_eq!(build_r2::<f64>(6).unwrap(), Generator::Cnot21.matrix());
        let xx = GateConst::X.matrix::<f64>().kron(&GateConst::X.matrix()).unwrap();
        assert_eq!(build_r2::<f64>(24).unwrap(), xx);
    }

    #[test]
    fn t2_for_x10_has_the_displayed_layout() {
        let t = DiagonalPhases::from_angles([0.1, 0.2, 0.3, 0.4]);
        let m = build_t2::<f64>(10, &t).unwrap();
        // rows/cols are 0-based here
        let nonzero = [(0, 1, 0), (1, 2, 1), (2, 3, 2), (3, 0, 3)];
        for i in 0..4 {
            for j in 0..4 {
                match nonzero.iter().find(|&&(r, cc, _)| r == i && cc == j) {
                    Some(&(_, _, m_idx)) => assert_eq!(m[(i, j)], t.get(m_idx)),
                    None => assert_eq!(m[(i, j)], c(0.0, 0.0)),
                }
            }
        }
    }

    #[test]
    fn non_unimodular_phases_rejected() {
        let err = DiagonalPhases::<f64>::new([c(1.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotUnimodular { index: 1, .. }));
    }

    #[test]
    fn t2_with_unit_phases_is_r2() {
        for x in 1..=24 {
            assert_eq!(
                build_t2::<f64>(x, &DiagonalPhases::ones()).unwrap(),
                build_r2::<f64>(x).unwrap()
            );
        }
    }

    #[test]
    fn published_table_anchors() {
        use Generator::*;
        assert!(decomposition_table(1).unwrap().is_empty());
        assert_eq!(decomposition_table(3).unwrap().factors(), &[Cnot21, Cnot12, Cnot21]);
        assert_eq!(decomposition_table(11).unwrap().factors(), &[Cnot21, XI, Cnot12, Cnot21]);
        assert_eq!(decomposition_table(24).unwrap().factors(), &[XI, IX]);
        assert_eq!(
            decomposition_table(24).unwrap().basis_map(),
            permutation_of_index(24).unwrap().recovery_map()
        );
    }

    #[test]
    fn synthesizer_small_cases() {
        use Generator::*;
        assert!(synthesize_map(&IDENTITY_MAP).is_empty());
        let r2 = build_r2::<f64>(2).unwrap();
        assert_eq!(synthesize_permutation(&r2).unwrap().factors(), &[Cnot12]);
        let h = GateConst::H.matrix::<f64>().kron(&GateConst::I.matrix()).unwrap();
        assert_eq!(synthesize_permutation(&h), Err(Error::NotPermutation));
    }

    #[test]
    fn bell_channel_is_two_pairs() {
        let ch = bell_channel::<f64>();
        assert!((ch.amplitude(&[0, 0, 0, 0]) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((ch.amplitude(&[1, 0, 1, 0]) - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(ch.amplitude(&[1, 0, 0, 0]), c(0.0, 0.0));
    }

    #[test]
    fn identity_operator_returns_input() {
        let xi = StateVector::<f64>::normalized(
            vec![2, 2],
            vec![c(0.2, 0.1), c(-0.4, 0.3), c(0.5, 0.0), c(0.1, -0.6)],
        )
        .unwrap();
        let tr = run_protocol(1, &DiagonalPhases::ones(), &xi, None, 11).unwrap();
        assert!(tr.residual < 1e-12);
        assert!((tr.bob_probability - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let xi = StateVector::<f64>::zero_qubits(3).unwrap();
        assert!(run_protocol(3, &DiagonalPhases::ones(), &xi, None, 0).is_err());
        let xi = StateVector::<f64>::zero_qubits(2).unwrap();
        assert_eq!(
            run_protocol(0, &DiagonalPhases::ones(), &xi, None, 0).unwrap_err(),
            Error::IndexOutOfRange(0)
        );
    }
}
