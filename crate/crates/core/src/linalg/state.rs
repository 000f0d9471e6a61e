use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use super::matrix::{Matrix, UnitaryMatrix, DEFAULT_MAX_DIM};
use crate::error::{Error, Result};
use crate::scalar::{is_finite, Real};

/// Pure state over a composite space.
///
/// Subsystems are stored big-endian: the first entry of `dims` is the most
/// significant digit of the flat amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    dims: Vec<usize>,
    amps: Vec<Complex<T>>,
}

fn total_dim(dims: &[usize]) -> Result<usize> {
    let mut total = 1usize;
    for &d in dims {
        if d == 0 {
            return Err(Error::InvalidParameter("zero subsystem dimension".into()));
        }
        total = total
            .checked_mul(d)
            .filter(|&t| t <= DEFAULT_MAX_DIM)
            .ok_or(Error::SpaceTooLarge {
                dim: total.saturating_mul(d),
                max: DEFAULT_MAX_DIM,
            })?;
    }
    Ok(total)
}

/// Row-major strides for big-endian subsystem ordering.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

impl<T: Real> StateVector<T> {
    /// Validates finiteness and unit norm (constructive tolerance).
    pub fn new(dims: Vec<usize>, amps: Vec<Complex<T>>) -> Result<Self> {
        let s = Self::from_raw(dims, amps)?;
        let norm = s.norm();
        if !((norm - T::one()).abs() <= T::constructive_tol()) {
            return Err(Error::NotNormalized {
                norm: norm.to_f64_lossy(),
            });
        }
        Ok(s)
    }

    /// Rescales to unit norm before validating.
    pub fn normalized(dims: Vec<usize>, amps: Vec<Complex<T>>) -> Result<Self> {
        let mut s = Self::from_raw(dims, amps)?;
        let norm = s.norm();
        if norm <= T::min_positive_value() || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm: norm.to_f64_lossy(),
            });
        }
        let inv = T::one() / norm;
        s.amps.iter_mut().for_each(|z| *z = z.scale(inv));
        Ok(s)
    }

    fn from_raw(dims: Vec<usize>, amps: Vec<Complex<T>>) -> Result<Self> {
        let n = total_dim(&dims)?;
        if amps.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: amps.len(),
            });
        }
        if !amps.iter().all(|&z| is_finite(z)) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dims, amps })
    }

    /// Product basis state with the given level on each subsystem.
    pub fn basis(dims: &[usize], levels: &[usize]) -> Result<Self> {
        if dims.len() != levels.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                found: levels.len(),
            });
        }
        let n = total_dim(dims)?;
        let mut index = 0;
        for (&d, &l) in dims.iter().zip(levels) {
            if l >= d {
                return Err(Error::LevelOutOfRange { level: l, dim: d });
            }
            index = index * d + l;
        }
        let mut amps = vec![Complex::zero(); n];
        amps[index] = Complex::one();
        Ok(Self {
            dims: dims.to_vec(),
            amps,
        })
    }

    /// `n` qubits in `|0...0>`.
    pub fn zero_qubits(n: usize) -> Result<Self> {
        Self::basis(&vec![2; n], &vec![0; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, levels: &[usize]) -> Complex<T> {
        let idx = levels
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&l, &d)| acc * d + l);
        self.amps[idx]
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_space(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::zero(), |acc, (&a, &b)| acc + a.conj() * b))
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&rhs.dims);
        total_dim(&dims)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| rhs.amps.iter().map(move |&b| a * b))
            .collect();
        Ok(Self { dims, amps })
    }

    pub fn scale_phase(&self, phase: Complex<T>) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|&z| z * phase).collect(),
        }
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (k, &t) in targets.iter().enumerate() {
            if t >= self.dims.len() {
                return Err(Error::SubsystemOutOfRange {
                    index: t,
                    len: self.dims.len(),
                });
            }
            if targets[..k].contains(&t) {
                return Err(Error::DuplicateTarget(t));
            }
        }
        Ok(())
    }

    /// Applies `op` to the listed subsystems (first target most significant),
    /// identity elsewhere. `op` need not be unitary; callers renormalize.
    pub(crate) fn apply_operator(&self, op: &Matrix<T>, targets: &[usize]) -> Result<Self> {
        self.check_targets(targets)?;
        let local: usize = targets.iter().map(|&t| self.dims[t]).product();
        if op.dim() != local {
            return Err(Error::DimensionMismatch {
                expected: local,
                found: op.dim(),
            });
        }
        let st = strides(&self.dims);
        // Flat offset of each local basis index.
        let offsets: Vec<usize> = (0..local)
            .map(|mut l| {
                let mut off = 0;
                for &t in targets.iter().rev() {
                    off += (l % self.dims[t]) * st[t];
                    l /= self.dims[t];
                }
                off
            })
            .collect();
        let mut out = vec![Complex::zero(); self.amps.len()];
        let mut gathered = vec![Complex::zero(); local];
        for base in 0..self.amps.len() {
            if targets.iter().any(|&t| !(base / st[t]).is_multiple_of(self.dims[t])) {
                continue;
            }
            for (g, &o) in gathered.iter_mut().zip(&offsets) {
                *g = self.amps[base + o];
            }
            for (i, &oi) in offsets.iter().enumerate() {
                let row = op.row(i);
                let mut acc = Complex::zero();
                for (&a, &g) in row.iter().zip(&gathered) {
                    acc = acc + a * g;
                }
                out[base + oi] = acc;
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps: out,
        })
    }

    /// Applies a unitary on the listed subsystems.
    pub fn apply(&self, u: &UnitaryMatrix<T>, targets: &[usize]) -> Result<Self> {
        self.apply_operator(u.matrix(), targets)
    }

    /// Probability of finding `subsystem` at `level`.
    pub fn level_probability(&self, subsystem: usize, level: usize) -> Result<T> {
        self.check_targets(&[subsystem])?;
        let d = self.dims[subsystem];
        if level >= d {
            return Err(Error::LevelOutOfRange { level, dim: d });
        }
        let st = strides(&self.dims)[subsystem];
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i / st) % d == level)
            .map(|(_, z)| z.norm_sqr())
            .sum())
    }

    /// Projects `subsystem` onto `level` without renormalizing.
    pub(crate) fn project_raw(&self, subsystem: usize, level: usize) -> Result<Self> {
        self.check_targets(&[subsystem])?;
        let d = self.dims[subsystem];
        if level >= d {
            return Err(Error::LevelOutOfRange { level, dim: d });
        }
        let st = strides(&self.dims)[subsystem];
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &z)| if (i / st) % d == level { z } else { Complex::zero() })
            .collect();
        Ok(Self {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// Rescales to unit norm.
    pub(crate) fn renormalize(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm <= T::min_positive_value() {
            return Err(Error::NotNormalized {
                norm: norm.to_f64_lossy(),
            });
        }
        let inv = T::one() / norm;
        self.amps.iter_mut().for_each(|z| *z = z.scale(inv));
        Ok(self)
    }

    /// State of the remaining subsystems given fixed levels on `fixed`.
    ///
    /// Meaningful when the state is a product across the split (for example
    /// after projective measurement of every fixed subsystem). The result is
    /// renormalized.
    pub fn condition_on(&self, fixed: &[(usize, usize)]) -> Result<Self> {
        let subs: Vec<usize> = fixed.iter().map(|&(s, _)| s).collect();
        self.check_targets(&subs)?;
        for &(s, l) in fixed {
            if l >= self.dims[s] {
                return Err(Error::LevelOutOfRange {
                    level: l,
                    dim: self.dims[s],
                });
            }
        }
        let st = strides(&self.dims);
        let rest: Vec<usize> = (0..self.dims.len()).filter(|k| !subs.contains(k)).collect();
        let dims: Vec<usize> = rest.iter().map(|&k| self.dims[k]).collect();
        let base: usize = fixed.iter().map(|&(s, l)| l * st[s]).sum();
        let n = total_dim(&dims)?;
        let amps = (0..n)
            .map(|mut l| {
                let mut off = base;
                for &k in rest.iter().rev() {
                    off += (l % self.dims[k]) * st[k];
                    l /= self.dims[k];
                }
                self.amps[off]
            })
            .collect();
        Self::from_raw(dims, amps)?.renormalize()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - T::one()).abs() <= T::constructive_tol()
    }

    pub fn to_f64(&self) -> StateVector<f64> {
        StateVector {
            dims: self.dims.clone(),
            amps: self
                .amps
                .iter()
                .map(|z| Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
                .collect(),
        }
    }
}

impl StateVector<f64> {
    /// Lossless narrowing is not possible; this rounds each amplitude.
    pub fn cast<U: Real>(&self) -> StateVector<U> {
        StateVector {
            dims: self.dims.clone(),
            amps: self
                .amps
                .iter()
                .map(|z| Complex::new(U::lit(z.re), U::lit(z.im)))
                .collect(),
        }
    }
}

/// Serializable amplitude pair for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeRecord {
    pub re: f64,
    pub im: f64,
}

impl<T: Real> From<Complex<T>> for AmplitudeRecord {
    fn from(z: Complex<T>) -> Self {
        Self {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
        }
    }
}

/// `|<a|b>|^2`.
pub fn fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    let ov = a.inner(b)?;
    Ok(ov.norm_sqr().min(T::one()))
}

/// Global phase alignment of `b` onto `a`.
///
/// Returns the unit scalar `phase` that makes `<a|phase b>` real and
/// positive, together with `||a - phase b||`.
pub fn global_phase_align<T: Real>(
    a: &StateVector<T>,
    b: &StateVector<T>,
) -> Result<(Complex<T>, T)> {
    let ov = a.inner(b)?;
    let mag = ov.norm();
    if mag <= T::lit(1e-14) {
        return Err(Error::NoAlignment);
    }
    let phase = ov.conj() / mag;
    let residual = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(&x, &y)| (x - y * phase).norm_sqr())
        .sum::<T>()
        .sqrt();
    Ok((phase, residual))
}

/// Residual after phase alignment; `f64::INFINITY`-like for orthogonal inputs.
pub fn phase_residual<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    match global_phase_align(a, b) {
        Ok((_, r)) => Ok(r),
        Err(Error::NoAlignment) => Ok(T::infinity()),
        Err(e) => Err(e),
    }
}
