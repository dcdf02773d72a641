//! The isolated two-site position-based qubit.
//!
//! Tight-binding Hamiltonian `[[E_p1, |t_s|e^{iα}], [|t_s|e^{-iα}, E_p2]]`
//! with every parameter a [`Signal`], its instantaneous spectrum and
//! eigenbasis, and the adiabatic phase-integral evolution.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cis, Real};
use crate::signals::{adaptive_simpson, Signal};

/// The four tight-binding signals of one two-site qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct QubitParams<T> {
    /// On-site energy of dot 1.
    pub ep1: Signal<T>,
    /// On-site energy of dot 2.
    pub ep2: Signal<T>,
    /// Hopping magnitude `|t_s|`, expected non-negative.
    pub ts_mag: Signal<T>,
    /// Hopping phase `α` in radians.
    pub alpha: Signal<T>,
}

impl<T: Real> QubitParams<T> {
    /// Parameters that do not depend on time.
    pub fn constant(ep1: T, ep2: T, ts_mag: T, alpha: T) -> Self {
        Self {
            ep1: Signal::constant(ep1),
            ep2: Signal::constant(ep2),
            ts_mag: Signal::constant(ts_mag),
            alpha: Signal::constant(alpha),
        }
    }

    /// Complex hopping `t_s(t) = |t_s(t)| e^{iα(t)}`.
    pub fn hopping(&self, t: T) -> Complex<T> {
        cis(self.alpha.eval(t)).scale(self.ts_mag.eval(t))
    }

    pub fn is_constant(&self) -> bool {
        [&self.ep1, &self.ep2, &self.ts_mag, &self.alpha]
            .iter()
            .all(|s| s.as_constant().is_some())
    }
}

/// Which basis a [`StateVector`]'s amplitudes refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Tensor order cavity level, then `|x1⟩/|x2⟩` per qubit.
    Position,
    Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    pub amplitudes: Vec<Complex<T>>,
    pub basis: Basis,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: Vec<Complex<T>>, basis: Basis) -> Self {
        Self { amplitudes, basis }
    }

    /// Position-basis state with a single unit amplitude at `index`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex::zero(); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Self::new(amplitudes, Basis::Position)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> T {
        crate::linalg::norm_sqr(&self.amplitudes)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n < T::lit(1e-20) {
            return Err(Error::ZeroState);
        }
        let inv = T::one() / n.sqrt();
        Ok(Self::new(self.amplitudes.iter().map(|z| z.scale(inv)).collect(), self.basis))
    }
}

/// Spectrum and gauge-fixed eigenvectors of `[[a, c], [c*, b]]`.
///
/// Eigenvalues ascend. Each eigenvector has a real second component, negative
/// for the lower level and positive for the upper one; when that component
/// vanishes the first component is made real and positive instead.
pub(crate) fn hermitian2_eigen<T: Real>(a: T, b: T, c: Complex<T>) -> Result<([T; 2], [[Complex<T>; 2]; 2])> {
    let [e1, e2] = hermitian2_energies(a, b, c);
    let threshold = T::tol(1e-13, 450.0) * T::one().max(e1.abs() + e2.abs());
    let gap = e2 - e1;
    if gap < threshold {
        return Err(Error::DegenerateSpectrum {
            gap: gap.as_f64(),
            threshold: threshold.as_f64(),
        });
    }
    let vector = |e: T, sign: T| -> [Complex<T>; 2] {
        // Two null vectors of H - E, one per row; keep the better conditioned.
        let row1 = [c, Complex::new(e - a, T::zero())];
        let row2 = [Complex::new(e - b, T::zero()), c.conj()];
        let n1 = row1[0].norm_sqr() + row1[1].norm_sqr();
        let n2 = row2[0].norm_sqr() + row2[1].norm_sqr();
        let (v, n) = if n1 >= n2 { (row1, n1) } else { (row2, n2) };
        let inv = T::one() / n.sqrt();
        let v = [v[0].scale(inv), v[1].scale(inv)];
        let zero = T::zero();
        if v[1].norm() > T::epsilon() {
            let gauge = v[1].conj().unscale(v[1].norm()).scale(sign);
            [v[0] * gauge, Complex::new(sign * v[1].norm(), zero)]
        } else {
            let gauge = v[0].conj().unscale(v[0].norm());
            [Complex::new(v[0].norm(), zero), v[1] * gauge]
        }
    };
    Ok(([e1, e2], [vector(e1, -T::one()), vector(e2, T::one())]))
}

pub(crate) fn hermitian2_energies<T: Real>(a: T, b: T, c: Complex<T>) -> [T; 2] {
    let half = T::lit(0.5);
    let mean = (a + b) * half;
    let s = ((a - b) * half).hypot(c.norm());
    [mean - s, mean + s]
}

/// Instantaneous Hamiltonian in the `(|x1⟩, |x2⟩)` basis.
pub fn hamiltonian_at<T: Real>(qp: &QubitParams<T>, t: T) -> CMatrix<T> {
    let ts = qp.hopping(t);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new(qp.ep1.eval(t), T::zero()),
            ts,
            ts.conj(),
            Complex::new(qp.ep2.eval(t), T::zero()),
        ],
    )
}

/// `(E1, E2)` with `E1 ≤ E2`.
pub fn eigenenergies<T: Real>(qp: &QubitParams<T>, t: T) -> (T, T) {
    let [e1, e2] = hermitian2_energies(qp.ep1.eval(t), qp.ep2.eval(t), qp.hopping(t));
    (e1, e2)
}

/// Normalized `(|E1⟩, |E2⟩)` in the position basis.
pub fn eigenstates<T: Real>(qp: &QubitParams<T>, t: T) -> Result<(StateVector<T>, StateVector<T>)> {
    let (_, [v1, v2]) = hermitian2_eigen(qp.ep1.eval(t), qp.ep2.eval(t), qp.hopping(t))?;
    Ok((
        StateVector::new(v1.to_vec(), Basis::Position),
        StateVector::new(v2.to_vec(), Basis::Position),
    ))
}

/// `S` with `(|E1⟩, |E2⟩)ᵀ = S (|x1⟩, |x2⟩)ᵀ`: row k holds the components of `|E_k⟩`.
pub fn basis_change_matrix<T: Real>(qp: &QubitParams<T>, t: T) -> Result<CMatrix<T>> {
    let (_, [v1, v2]) = hermitian2_eigen(qp.ep1.eval(t), qp.ep2.eval(t), qp.hopping(t))?;
    Ok(CMatrix::from_row_slice(2, 2, &[v1[0], v1[1], v2[0], v2[1]]))
}

/// Adiabatic evolution from energy-basis coefficients at `t0`:
/// `Σ_k c_k e^{-i/ħ ∫E_k} |E_k(t)⟩`, returned in the position basis.
///
/// No diabatic correction is applied, so the result is exact only for
/// time-independent parameters.
pub fn adiabatic_evolve<T: Real>(
    qp: &QubitParams<T>,
    c_e1: Complex<T>,
    c_e2: Complex<T>,
    t0: T,
    t: T,
    hbar: T,
) -> Result<StateVector<T>> {
    let norm_sq = c_e1.norm_sqr() + c_e2.norm_sqr();
    if (norm_sq - T::one()).abs() > T::tol(1e-10, 64.0) {
        return Err(Error::NormViolation {
            norm_sq: norm_sq.as_f64(),
        });
    }
    let (phase1, phase2) = if qp.is_constant() {
        let (e1, e2) = eigenenergies(qp, t0);
        (e1 * (t - t0), e2 * (t - t0))
    } else {
        let (lo, hi, sign) = if t0 <= t { (t0, t, T::one()) } else { (t, t0, -T::one()) };
        let both = adaptive_simpson(
            |s| {
                let (e1, e2) = eigenenergies(qp, s);
                Complex::new(e1, e2)
            },
            lo,
            hi,
        )?;
        (sign * both.re, sign * both.im)
    };
    let (k1, k2) = eigenstates(qp, t)?;
    let w1 = c_e1 * cis(-phase1 / hbar);
    let w2 = c_e2 * cis(-phase2 / hbar);
    let amplitudes = k1
        .amplitudes
        .iter()
        .zip(&k2.amplitudes)
        .map(|(&a, &b)| w1 * a + w2 * b)
        .collect();
    Ok(StateVector::new(amplitudes, Basis::Position))
}
