//! Cavity-QED realization of the protocol gates.
//!
//! Atoms are ladder-type three-level systems `g < e < i`. CNOT gates use two
//! atoms crossing a far-detuned cavity (effective coupling
//! `lambda = g^2 / delta`) sandwiched between classical pulses on the target
//! atom; Hadamard gates use a resonant Jaynes-Cummings passage followed by a
//! Ramsey zone.
//!
//! Times are in seconds and couplings in rad/s, so `lambda * t` is a phase.

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use crate::circuit::{lift_to_levels, GateConst};
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, fidelity, HermitianMatrix, Matrix, StateVector, UnitaryMatrix};
use crate::protocol::{
    bell_channel, build_t2, check_pair_state, recovery_sequence, BranchBits, DiagonalPhases,
    Generator,
};
use crate::scalar::Real;

/// Dimension of one atom.
pub const ATOM_DIM: usize = 3;

/// Above this, pulses refuse an input with population in `|i>`.
pub const AUX_ENTRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AtomLevel {
    G = 0,
    E = 1,
    I = 2,
}

impl AtomLevel {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Physical constants of the setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Atom-cavity coupling, rad/s.
    pub g: f64,
    /// Atom-cavity detuning `omega_0 - omega`, rad/s.
    pub delta: f64,
    pub q_factor: f64,
    /// Cavity frequency, Hz.
    pub cavity_hz: f64,
    /// Rydberg-level radiative lifetime, s.
    pub radiative_time: f64,
    /// Duration of one classical-field pulse, s.
    pub pulse_time: f64,
    /// Probability that the dispersive cavity is excited during a passage.
    pub excitation_probability: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::from_khz(24.0, 10.0)
    }
}

impl PhysicalParams {
    /// Smallest `delta / g` treated as dispersive.
    pub const DISPERSIVE_RATIO: f64 = 10.0;

    /// `g = 2 pi g_khz kHz`, `delta = delta_over_g * g`, remaining values at
    /// their defaults.
    pub fn from_khz(g_khz: f64, delta_over_g: f64) -> Self {
        let g = std::f64::consts::TAU * g_khz * 1e3;
        Self {
            g,
            delta: delta_over_g * g,
            q_factor: 1e8,
            cavity_hz: 50e9,
            radiative_time: 3e-2,
            pulse_time: 6.3e-6,
            excitation_probability: 0.01,
        }
    }

    /// Effective atom-atom coupling `g^2 / delta`.
    pub fn lambda(&self) -> f64 {
        self.g * self.g / self.delta
    }

    pub fn delta_over_g(&self) -> f64 {
        self.delta / self.g
    }

    /// `delta / g` meets the dispersive threshold.
    pub fn is_dispersive(&self) -> bool {
        self.delta_over_g() >= Self::DISPERSIVE_RATIO
    }

    /// Checks positivity; returns warnings for soft violations.
    pub fn validate(&self) -> Result<Vec<String>> {
        let named = [
            ("g", self.g),
            ("delta", self.delta),
            ("q_factor", self.q_factor),
            ("cavity_hz", self.cavity_hz),
            ("radiative_time", self.radiative_time),
            ("excitation_probability", self.excitation_probability),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.pulse_time.is_finite() && self.pulse_time >= 0.0) {
            return Err(Error::InvalidParameter("pulse_time must be non-negative".into()));
        }
        if self.excitation_probability > 1.0 {
            return Err(Error::InvalidParameter("excitation_probability above 1".into()));
        }
        let mut warnings = Vec::new();
        if !self.is_dispersive() {
            warnings.push(format!(
                "delta/g = {} is below the dispersive threshold {}",
                self.delta_over_g(),
                Self::DISPERSIVE_RATIO
            ));
        }
        Ok(warnings)
    }

    /// Two-atom cavity time `pi / lambda = pi delta / g^2`.
    pub fn cnot_cavity_time(&self) -> f64 {
        std::f64::consts::PI / self.lambda()
    }

    /// Resonant passage time `pi / g`.
    pub fn jc_time(&self) -> f64 {
        std::f64::consts::PI / self.g
    }

    /// `Q / (2 pi nu)`.
    pub fn photon_lifetime(&self) -> f64 {
        self.q_factor / (std::f64::consts::TAU * self.cavity_hz)
    }
}

fn c<T: Real>(re: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::zero())
}

/// Subsystem indices of two atoms sharing a cavity; `first` is atom 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomPair {
    pub first: usize,
    pub second: usize,
}

impl AtomPair {
    /// Atoms 1 and 2 of a bare two-atom state.
    pub const BARE: AtomPair = AtomPair { first: 0, second: 1 };

    pub fn atom(&self, which: u8) -> Result<usize> {
        match which {
            1 => Ok(self.first),
            2 => Ok(self.second),
            other => Err(Error::InvalidAtom(other)),
        }
    }
}

fn check_atom_dims<T: Real>(state: &StateVector<T>, subs: &[usize]) -> Result<()> {
    for &s in subs {
        match state.dims().get(s) {
            Some(&ATOM_DIM) => {}
            Some(&d) => {
                return Err(Error::DimensionMismatch {
                    expected: ATOM_DIM,
                    found: d,
                })
            }
            None => {
                return Err(Error::SubsystemOutOfRange {
                    index: s,
                    len: state.dims().len(),
                })
            }
        }
    }
    Ok(())
}

fn check_duration<T: Real>(duration: T) -> Result<()> {
    if duration < T::zero() || !duration.is_finite() {
        return Err(Error::NegativeDuration(duration.to_f64_lossy()));
    }
    Ok(())
}

/// `lambda [ |e1><e1| + |e2><e2| + S1+ S2- + S1- S2+ ]` on two atoms.
pub fn dispersive_hamiltonian<T: Real>(lambda: T) -> HermitianMatrix<T> {
    let mut h = Matrix::zeros(ATOM_DIM * ATOM_DIM);
    let e = AtomLevel::E.index();
    let g = AtomLevel::G.index();
    let idx = |a: usize, b: usize| a * ATOM_DIM + b;
    for a in 0..ATOM_DIM {
        for b in 0..ATOM_DIM {
            let n = (a == e) as u8 + (b == e) as u8;
            h[(idx(a, b), idx(a, b))] = Complex::new(lambda * T::lit(n as f64), T::zero());
        }
    }
    let hop = Complex::new(lambda, T::zero());
    h[(idx(e, g), idx(g, e))] = hop;
    h[(idx(g, e), idx(e, g))] = hop;
    HermitianMatrix::new(h).expect("symmetric by construction")
}

/// `lambda |e><e|` on one atom, the cavity interaction with its partner absent.
pub fn solo_hamiltonian<T: Real>(lambda: T) -> HermitianMatrix<T> {
    let mut h = Matrix::zeros(ATOM_DIM);
    h[(1, 1)] = Complex::new(lambda, T::zero());
    HermitianMatrix::new(h).expect("diagonal")
}

pub fn dispersive_unitary<T: Real>(params: &PhysicalParams, duration: T) -> Result<UnitaryMatrix<T>> {
    check_duration(duration)?;
    expm_hermitian(&dispersive_hamiltonian(T::lit(params.lambda())), duration)
}

pub fn solo_unitary<T: Real>(params: &PhysicalParams, duration: T) -> Result<UnitaryMatrix<T>> {
    check_duration(duration)?;
    expm_hermitian(&solo_hamiltonian(T::lit(params.lambda())), duration)
}

/// Joint evolution of both atoms of `pair` inside the dispersive cavity.
pub fn dispersive_evolve<T: Real>(
    state: &StateVector<T>,
    pair: AtomPair,
    params: &PhysicalParams,
    duration: T,
) -> Result<StateVector<T>> {
    check_atom_dims(state, &[pair.first, pair.second])?;
    state.apply(&dispersive_unitary(params, duration)?, &[pair.first, pair.second])
}

/// Evolution of atom `atom` (1 or 2 of `pair`) alone in the cavity.
pub fn solo_dispersive_evolve<T: Real>(
    state: &StateVector<T>,
    pair: AtomPair,
    atom: u8,
    params: &PhysicalParams,
    duration: T,
) -> Result<StateVector<T>> {
    let sub = pair.atom(atom)?;
    check_atom_dims(state, &[sub])?;
    state.apply(&solo_unitary(params, duration)?, &[sub])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PulseStage {
    /// Before the cavity: `|e> -> (|i>+|g>)/sqrt2`, `|g> -> (|g>-|i>)/sqrt2`.
    Pre,
    /// After the cavity: `|g> -> (|g>+|e>)/sqrt2`, `|i> -> (|e>-|g>)/sqrt2`.
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Transition {
    GE,
    EI,
}

/// One classical-field rotation on a single atom.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec<T> {
    pub stage: PulseStage,
    pub transition: Transition,
    pub matrix: UnitaryMatrix<T>,
}

fn three_level<T: Real>(rows: [[f64; 3]; 3]) -> UnitaryMatrix<T> {
    let m = Matrix::from_real(&[&rows[0], &rows[1], &rows[2]]).expect("3x3");
    UnitaryMatrix::with_tolerance(m, T::constructive_tol()).expect("pulse is unitary")
}

/// The two elementary rotations of a pulse stage, in the order they act.
pub fn pulse_elements<T: Real>(stage: PulseStage) -> [PulseSpec<T>; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // |e> <-> |i> with unit coefficients both ways.
    let swap_ei = three_level([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
    match stage {
        PulseStage::Pre => [
            PulseSpec {
                stage,
                transition: Transition::GE,
                // g -> (g - e)/sqrt2, e -> (g + e)/sqrt2
                matrix: three_level([[s, s, 0.0], [-s, s, 0.0], [0.0, 0.0, 1.0]]),
            },
            PulseSpec {
                stage,
                transition: Transition::EI,
                matrix: swap_ei,
            },
        ],
        PulseStage::Post => [
            PulseSpec {
                stage,
                transition: Transition::EI,
                matrix: swap_ei,
            },
            PulseSpec {
                stage,
                transition: Transition::GE,
                // g -> (g + e)/sqrt2, e -> (e - g)/sqrt2
                matrix: three_level([[s, -s, 0.0], [s, s, 0.0], [0.0, 0.0, 1.0]]),
            },
        ],
    }
}

pub fn pulse_unitary<T: Real>(stage: PulseStage) -> UnitaryMatrix<T> {
    let [first, second] = pulse_elements::<T>(stage);
    second.matrix.compose(&first.matrix).expect("3x3")
}

pub fn pulse_pre<T: Real>(state: &StateVector<T>, atom: usize) -> Result<StateVector<T>> {
    check_atom_dims(state, &[atom])?;
    state.apply(&pulse_unitary(PulseStage::Pre), &[atom])
}

pub fn pulse_post<T: Real>(state: &StateVector<T>, atom: usize) -> Result<StateVector<T>> {
    check_atom_dims(state, &[atom])?;
    state.apply(&pulse_unitary(PulseStage::Post), &[atom])
}

/// Staggered cavity entry: one atom enters `offset_fraction * t` before the
/// other and, spending the same total time inside, leaves that much earlier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaggeredSchedule {
    pub offset_fraction: f64,
    /// 1 (control) or 2 (target).
    pub early_atom: u8,
}

impl StaggeredSchedule {
    pub fn new(offset_fraction: f64, early_atom: u8) -> Result<Self> {
        if !(0.0..1.0).contains(&offset_fraction) {
            return Err(Error::InvalidOffset(offset_fraction));
        }
        if early_atom != 1 && early_atom != 2 {
            return Err(Error::InvalidAtom(early_atom));
        }
        Ok(Self {
            offset_fraction,
            early_atom,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CavitySchedule {
    Ideal,
    Staggered(StaggeredSchedule),
}

/// Cavity stage of the CNOT on two atoms (atom 1 most significant).
pub fn cavity_stage_unitary<T: Real>(
    params: &PhysicalParams,
    schedule: CavitySchedule,
) -> Result<UnitaryMatrix<T>> {
    let full = T::lit(params.cnot_cavity_time());
    match schedule {
        CavitySchedule::Ideal => dispersive_unitary(params, full),
        CavitySchedule::Staggered(s) => {
            let s = StaggeredSchedule::new(s.offset_fraction, s.early_atom)?;
            let tau = full * T::lit(s.offset_fraction);
            let joint = dispersive_unitary(params, full - tau)?;
            let solo = solo_unitary(params, tau)?;
            let id = UnitaryMatrix::identity(ATOM_DIM);
            let on_first = solo.kron(&id)?;
            let on_second = id.kron(&solo)?;
            let (early, late) = if s.early_atom == 1 {
                (on_first, on_second)
            } else {
                (on_second, on_first)
            };
            late.compose(&joint)?.compose(&early)
        }
    }
}

/// Full physical CNOT on two atoms: pre-pulse on the target, cavity stage,
/// post-pulse on the target. Atom 1 is the control.
pub fn physical_cnot_unitary<T: Real>(
    params: &PhysicalParams,
    schedule: CavitySchedule,
) -> Result<UnitaryMatrix<T>> {
    let id = UnitaryMatrix::identity(ATOM_DIM);
    let pre = id.kron(&pulse_unitary(PulseStage::Pre))?;
    let post = id.kron(&pulse_unitary(PulseStage::Post))?;
    post.compose(&cavity_stage_unitary(params, schedule)?)?.compose(&pre)
}

/// Total population with any of the given atoms in `|i>`.
pub fn aux_population<T: Real>(state: &StateVector<T>, atoms: &[usize]) -> Result<T> {
    check_atom_dims(state, atoms)?;
    let dims = state.dims();
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let aux = AtomLevel::I.index();
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| atoms.iter().any(|&a| (i / strides[a]) % dims[a] == aux))
        .map(|(_, z)| z.norm_sqr())
        .sum())
}

/// Applies the physical CNOT with `control` and `target` atoms.
///
/// Rejects inputs with auxiliary-level amplitude above [`AUX_ENTRY_TOL`].
pub fn physical_cnot<T: Real>(
    state: &StateVector<T>,
    control: usize,
    target: usize,
    params: &PhysicalParams,
    schedule: CavitySchedule,
) -> Result<StateVector<T>> {
    let aux = aux_population(state, &[control, target])?.sqrt();
    if aux > T::lit(AUX_ENTRY_TOL) {
        return Err(Error::AuxiliaryPopulated {
            amplitude: aux.to_f64_lossy(),
        });
    }
    state.apply(&physical_cnot_unitary(params, schedule)?, &[control, target])
}

/// `g (a^dagger S^- + a S^+)` on atom (2 levels) times Fock `0..=n_max`.
pub fn jc_hamiltonian<T: Real>(g: T, n_max: usize) -> HermitianMatrix<T> {
    let nf = n_max + 1;
    let mut h = Matrix::zeros(2 * nf);
    // |e, n> couples to |g, n+1> with strength g sqrt(n+1)
    for n in 0..n_max {
        let amp = Complex::new(g * T::lit(((n + 1) as f64).sqrt()), T::zero());
        let e_n = nf + n;
        let g_n1 = n + 1;
        h[(g_n1, e_n)] = amp;
        h[(e_n, g_n1)] = amp;
    }
    HermitianMatrix::new(h).expect("symmetric by construction")
}

/// Resonant evolution of an atom (levels g, e) with a truncated cavity mode.
///
/// The excitation number is conserved, so the truncation is exact unless
/// `|e, n_max>` is populated; that case is reported as an overflow.
pub fn jc_evolve<T: Real>(
    state: &StateVector<T>,
    params: &PhysicalParams,
    duration: T,
) -> Result<StateVector<T>> {
    check_duration(duration)?;
    let dims = state.dims();
    if dims.len() != 2 || dims[0] != 2 || dims[1] < 2 {
        return Err(Error::InvalidParameter(
            "jc_evolve expects dims [2, n_max + 1] with n_max >= 1".into(),
        ));
    }
    let n_max = dims[1] - 1;
    let top = state.amplitude(&[1, n_max]).norm();
    if top > T::lit(1e-10) {
        return Err(Error::TruncationOverflow {
            amplitude: top.to_f64_lossy(),
            cap: n_max,
        });
    }
    let u = expm_hermitian(&jc_hamiltonian(T::lit(params.g), n_max), duration)?;
    state.apply(&u, &[0, 1])
}

/// Ramsey zone: `|g> -> (|g>+|e>)/sqrt2`, `|e> -> (|e>-|g>)/sqrt2`.
///
/// This is `(I + i sigma_y)/sqrt2` with the `sigma_y` basis ordered
/// `(e, g)`; in the storage order `(g, e)` its matrix reads
/// `[[1, -1], [1, 1]]/sqrt2`.
pub fn ramsey_plus<T: Real>() -> UnitaryMatrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = Matrix::from_real(&[&[s, -s], &[s, s]]).expect("2x2");
    UnitaryMatrix::with_tolerance(m, T::constructive_tol()).expect("rotation")
}

pub fn apply_ramsey_plus<T: Real>(state: &StateVector<T>, atom: usize) -> Result<StateVector<T>> {
    let d = *state.dims().get(atom).ok_or(Error::SubsystemOutOfRange {
        index: atom,
        len: state.dims().len(),
    })?;
    state.apply(&lift_to_levels(&ramsey_plus(), &[d])?, &[atom])
}

/// Atom operator of the physical Hadamard: resonant passage through an
/// empty cavity for `g t = pi`, then the Ramsey zone.
pub fn physical_hadamard_unitary<T: Real>(params: &PhysicalParams) -> Result<UnitaryMatrix<T>> {
    let t = T::lit(params.jc_time());
    let mut jc = Matrix::zeros(2);
    for k in 0..2 {
        let input = StateVector::basis(&[2, 2], &[k, 0])?;
        let out = jc_evolve(&input, params, t)?;
        let residual = (out.amplitude(&[0, 1]).norm_sqr() + out.amplitude(&[1, 1]).norm_sqr()).sqrt();
        if residual > T::lit(1e-10) {
            return Err(Error::CavityNotVacuum {
                residual: residual.to_f64_lossy(),
            });
        }
        jc[(0, k)] = out.amplitude(&[0, 0]);
        jc[(1, k)] = out.amplitude(&[1, 0]);
    }
    UnitaryMatrix::new(ramsey_plus::<T>().matrix().matmul(&jc)?)
}

/// Applies the physical Hadamard to a single-atom state.
pub fn physical_hadamard<T: Real>(
    state: &StateVector<T>,
    params: &PhysicalParams,
) -> Result<StateVector<T>> {
    if state.dims() != [2] {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: state.dim(),
        });
    }
    state.apply(&physical_hadamard_unitary(params)?, &[0])
}

/// Register layout of the physical run: `A1 A2` as qubits, the four atoms
/// that meet in a dispersive cavity as three-level systems.
pub const PHYSICAL_DIMS: [usize; 6] = [2, 2, 3, 3, 3, 3];
const A1: usize = 0;
const A2: usize = 1;
const B1: usize = 2;
const B2: usize = 3;
const Y1: usize = 4;
const Y2: usize = 5;

/// Outcome of one physical branch run.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalRun<T> {
    pub bits: BranchBits,
    /// Full register state after recovery.
    pub final_state: StateVector<T>,
    /// `|a1 a2 b1 b2> (x) T2(x,t) xi` on the same register.
    pub ideal: StateVector<T>,
    pub fidelity: T,
    /// Population left in `|i>` on any atom at the end.
    pub aux_population: T,
    /// Probability of the traversed `(b1, b2, a1, a2)` branch.
    pub branch_probability: T,
}

fn embed_pair_state<T: Real>(xi: &StateVector<T>) -> Result<StateVector<T>> {
    let mut amps = vec![Complex::zero(); 9];
    for y1 in 0..2 {
        for y2 in 0..2 {
            amps[y1 * 3 + y2] = xi.amplitude(&[y1, y2]);
        }
    }
    StateVector::new(vec![3, 3], amps)
}

fn embed_channel<T: Real>() -> Result<StateVector<T>> {
    let ch = bell_channel::<T>();
    let mut amps = vec![Complex::zero(); 2 * 2 * 3 * 3];
    for a1 in 0..2 {
        for a2 in 0..2 {
            for b1 in 0..2 {
                for b2 in 0..2 {
                    amps[((a1 * 2 + a2) * 3 + b1) * 3 + b2] = ch.amplitude(&[a1, a2, b1, b2]);
                }
            }
        }
    }
    StateVector::new(vec![2, 2, 3, 3], amps)
}

fn project<T: Real>(state: &StateVector<T>, sub: usize, level: usize, prob: &mut T) -> Result<StateVector<T>> {
    let p = state.level_probability(sub, level)?;
    if p < T::lit(crate::circuit::IMPOSSIBLE_BRANCH) {
        return Err(Error::ImpossibleBranch {
            outcome: level,
            probability: p.to_f64_lossy(),
        });
    }
    *prob = *prob * p;
    state.project_raw(sub, level)?.renormalize()
}

/// Runs one measurement branch of the protocol with every gate realized
/// physically: the three kinds of CNOT through the dispersive cavity under
/// `schedule`, Alice's Hadamards through the resonant cavity and Ramsey
/// zone, and single-atom Pauli gates as classical rotations on `g, e`.
///
/// Auxiliary-level amplitude left behind by an imperfect cavity stage is
/// propagated, not rejected.
pub fn run_physical_branch<T: Real>(
    x: u32,
    t: &DiagonalPhases<T>,
    xi: &StateVector<T>,
    bits: BranchBits,
    schedule: CavitySchedule,
    params: &PhysicalParams,
) -> Result<PhysicalRun<T>> {
    check_pair_state(xi)?;
    let cnot = physical_cnot_unitary::<T>(params, schedule)?;
    let hadamard = physical_hadamard_unitary::<T>(params)?;
    let x3 = lift_to_levels(&GateConst::X.matrix::<T>(), &[ATOM_DIM])?;
    let z3 = lift_to_levels(&GateConst::Z.matrix::<T>(), &[ATOM_DIM])?;
    let x2 = GateConst::X.matrix::<T>();
    let t2 = build_t2(x, t)?;

    let mut prob = T::one();
    let mut psi = embed_channel::<T>()?.kron(&embed_pair_state(xi)?)?;
    debug_assert_eq!(psi.dims(), PHYSICAL_DIMS);

    psi = psi.apply(&cnot, &[Y1, B1])?;
    psi = psi.apply(&cnot, &[Y2, B2])?;
    psi = project(&psi, B1, bits.b1 as usize, &mut prob)?;
    psi = project(&psi, B2, bits.b2 as usize, &mut prob)?;

    if bits.b1 == 1 {
        psi = psi.apply(&x2, &[A1])?;
    }
    if bits.b2 == 1 {
        psi = psi.apply(&x2, &[A2])?;
    }
    psi = psi.apply(&t2, &[A1, A2])?;
    psi = psi.apply(&hadamard, &[A1])?;
    psi = psi.apply(&hadamard, &[A2])?;
    psi = project(&psi, A1, bits.a1 as usize, &mut prob)?;
    psi = project(&psi, A2, bits.a2 as usize, &mut prob)?;

    for g in recovery_sequence(x)?.application_order() {
        psi = match g {
            Generator::Cnot12 => psi.apply(&cnot, &[Y1, Y2])?,
            Generator::Cnot21 => psi.apply(&cnot, &[Y2, Y1])?,
            Generator::XI => psi.apply(&x3, &[Y1])?,
            Generator::IX => psi.apply(&x3, &[Y2])?,
        };
    }
    if bits.a1 == 1 {
        psi = psi.apply(&z3, &[Y1])?;
    }
    if bits.a2 == 1 {
        psi = psi.apply(&z3, &[Y2])?;
    }

    let target = t2.matrix().apply(xi.amplitudes())?;
    let mut ideal_amps = vec![Complex::zero(); psi.dim()];
    let fixed = [bits.a1 as usize, bits.a2 as usize, bits.b1 as usize, bits.b2 as usize];
    for y1 in 0..2 {
        for y2 in 0..2 {
            let levels = [fixed[0], fixed[1], fixed[2], fixed[3], y1, y2];
            let idx = levels
                .iter()
                .zip(PHYSICAL_DIMS)
                .fold(0, |acc, (&l, d)| acc * d + l);
            ideal_amps[idx] = target[y1 * 2 + y2];
        }
    }
    let ideal = StateVector::new(PHYSICAL_DIMS.to_vec(), ideal_amps)?;
    let fid = fidelity(&ideal, &psi)?;
    let aux = aux_population(&psi, &[B1, B2, Y1, Y2])?;
    Ok(PhysicalRun {
        bits,
        final_state: psi,
        ideal,
        fidelity: fid,
        aux_population: aux,
        branch_probability: prob,
    })
}

/// The branch traced step by step in the worked example.
pub const WORKED_EXAMPLE_X: u32 = 10;
pub const WORKED_EXAMPLE_BITS: BranchBits = BranchBits {
    b1: 0,
    b2: 0,
    a1: 1,
    a2: 1,
};

/// Largest offset accepted by [`timing_error_fidelity`].
pub const MAX_OFFSET_FRACTION: f64 = 0.5;

/// Fidelity of the worked-example branch when every dispersive cavity
/// stage uses a staggered entry with the given offset.
pub fn timing_error_fidelity<T: Real>(
    offset_fraction: f64,
    xi: &StateVector<T>,
    t: &DiagonalPhases<T>,
    params: &PhysicalParams,
) -> Result<T> {
    if !(0.0..=MAX_OFFSET_FRACTION).contains(&offset_fraction) {
        return Err(Error::InvalidOffset(offset_fraction));
    }
    let schedule = CavitySchedule::Staggered(StaggeredSchedule::new(offset_fraction, 1)?);
    Ok(run_physical_branch(WORKED_EXAMPLE_X, t, xi, WORKED_EXAMPLE_BITS, schedule, params)?.fidelity)
}

/// One row of a timing-offset sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub y_gg: f64,
    pub y_ge: f64,
    pub y_eg: f64,
    pub y_ee: f64,
    pub offset_fraction: f64,
    pub fidelity: f64,
}

/// Positive grid points `(y_gg, y_ge, y_eg) = (i, j, k) step` with
/// `y_gg^2 + y_ge^2 + y_eg^2 <= 1`; `y_ee` fills the norm. `1/step` must be
/// an integer.
pub fn amplitude_grid(step: f64) -> Result<Vec<[f64; 4]>> {
    let n = (1.0 / step).round();
    if !(step > 0.0) || n < 1.0 || ((n * step) - 1.0).abs() > 1e-9 || n > 1000.0 {
        return Err(Error::InvalidParameter(format!(
            "grid step {step} must be 1/n for a positive integer n <= 1000"
        )));
    }
    let n = n as i64;
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                let rest = n * n - i * i - j * j - k * k;
                if rest >= 0 {
                    let nf = n as f64;
                    out.push([i as f64 / nf, j as f64 / nf, k as f64 / nf, (rest as f64).sqrt() / nf]);
                }
            }
        }
    }
    Ok(out)
}

/// Fidelity over the real-positive amplitude family with all `t_m` equal to
/// `e^{i phase}`.
pub fn fidelity_sweep(
    offset_fraction: f64,
    step: f64,
    phase: f64,
    params: &PhysicalParams,
) -> Result<Vec<SweepRow>> {
    let t = DiagonalPhases::<f64>::uniform(phase);
    amplitude_grid(step)?
        .into_iter()
        .map(|y| {
            let xi = StateVector::normalized(vec![2, 2], y.iter().map(|&v| c::<f64>(v)).collect())?;
            let f = timing_error_fidelity(offset_fraction, &xi, &t, params)?;
            Ok(SweepRow {
                y_gg: y[0],
                y_ge: y[1],
                y_eg: y[2],
                y_ee: y[3],
                offset_fraction,
                fidelity: f,
            })
        })
        .collect()
}

/// Serial stage counts used to cost one protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub dispersive_cnot: u32,
    pub resonant_hadamard: u32,
    pub classical_pulses: u32,
}

impl Default for StageCounts {
    /// Three dispersive cavities, the two Hadamards on Alice's atoms, and
    /// thirteen classical fields.
    fn default() -> Self {
        Self {
            dispersive_cnot: 3,
            resonant_hadamard: 2,
            classical_pulses: 13,
        }
    }
}

/// Ratio below which one time counts as much shorter than another.
pub const FEASIBILITY_RATIO: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityCheck {
    pub name: String,
    pub duration: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl FeasibilityCheck {
    fn new(name: &str, duration: f64, bound: f64) -> Self {
        let ratio = duration / bound;
        Self {
            name: name.to_string(),
            duration,
            bound,
            ratio,
            pass: ratio <= FEASIBILITY_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub params: PhysicalParams,
    pub stages: StageCounts,
    /// `pi delta / g^2`.
    pub cnot_cavity_time: f64,
    /// `pi / g`.
    pub jc_time: f64,
    pub pulse_time: f64,
    /// `Q / (2 pi nu)`.
    pub photon_lifetime: f64,
    /// Photon lifetime divided by the cavity excitation probability.
    pub effective_decay_time: f64,
    pub radiative_time: f64,
    pub total_protocol_time: f64,
    pub checks: Vec<FeasibilityCheck>,
}

impl TimingReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn timing_report(params: &PhysicalParams) -> TimingReport {
    timing_report_with(params, StageCounts::default())
}

pub fn timing_report_with(params: &PhysicalParams, stages: StageCounts) -> TimingReport {
    let cnot_cavity_time = params.cnot_cavity_time();
    let jc_time = params.jc_time();
    let photon_lifetime = params.photon_lifetime();
    let effective_decay_time = photon_lifetime / params.excitation_probability;
    let total_protocol_time = stages.dispersive_cnot as f64 * cnot_cavity_time
        + stages.resonant_hadamard as f64 * jc_time
        + stages.classical_pulses as f64 * params.pulse_time;
    let checks = vec![
        FeasibilityCheck::new("protocol << radiative", total_protocol_time, params.radiative_time),
        FeasibilityCheck::new(
            "protocol << effective cavity decay",
            total_protocol_time,
            effective_decay_time,
        ),
        FeasibilityCheck::new("resonant passage << radiative", jc_time, params.radiative_time),
        FeasibilityCheck::new("classical pulse << cavity passage", params.pulse_time, cnot_cavity_time),
    ];
    TimingReport {
        params: *params,
        stages,
        cnot_cavity_time,
        jc_time,
        pulse_time: params.pulse_time,
        photon_lifetime,
        effective_decay_time,
        radiative_time: params.radiative_time,
        total_protocol_time,
        checks,
    }
}

/// Ideal CNOT lifted to two atoms, for comparisons.
pub fn ideal_cnot_on_atoms<T: Real>() -> UnitaryMatrix<T> {
    lift_to_levels(&GateConst::Cnot.matrix(), &[ATOM_DIM, ATOM_DIM]).expect("two atoms")
}

/// Computational-subspace indices `gg, ge, eg, ee` of two atoms.
pub const COMPUTATIONAL_INDICES: [usize; 4] = [0, 1, 3, 4];

/// Restriction of an atom-pair operator to `span{gg, ge, eg, ee}`.
pub fn computational_block<T: Real>(u: &UnitaryMatrix<T>) -> Matrix<T> {
    u.matrix().restrict(&COMPUTATIONAL_INDICES)
}
