//! Block-diagonal evolution operators.
//!
//! Three independent constructions of `U(t, t0)` per cavity block:
//!
//! * [`closed_form_block`]: the 2×2 analytic coefficients written through the
//!   integrated diagonal `A`, `B` and the integrated hopping `τ`;
//! * [`exp_of_integral_block`]: `exp(∫H dt' / iħ)` for blocks of any size;
//! * [`time_ordered_oracle`]: a midpoint product of short-step exponentials.
//!
//! The first two are the same function and agree to rounding. They equal the
//! true time-ordered evolution only when `H(t)` commutes with itself at
//! different times; the oracle is the reference for everything else.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cavity::{cavity_level_energy, mode_signal, BlockHamiltonian, CavityParams, DipoleQubit, HermitianBlock, Hop};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cis, sinc, Real};
use crate::signals::{integrate_hopping, Signal};
use crate::tbq::{hermitian2_eigen, Basis, QubitParams, StateVector};

/// Oracle steps per unit of `max|H|·Δt/ħ`.
pub const ORACLE_STEPS_PER_UNIT: usize = 1 << 12;
/// Upper bound on automatically chosen oracle steps.
pub const ORACLE_MAX_STEPS: usize = 1 << 20;

/// One 2×2 cavity block described by its diagonal drives:
/// `[[ec + d1 + E_p1, t_s], [t_s*, ec + d2 + E_p2]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDrive<T> {
    pub d1: Signal<T>,
    pub d2: Signal<T>,
    pub ec: T,
    pub qp: QubitParams<T>,
}

/// How the per-block diagonal drives are read off the mode signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveReading {
    /// Block `n` carries `-E_fn` on site 1 and `+E_fn` on site 2.
    #[default]
    #[serde(rename = "section2_signed")]
    LevelSigned,
    /// Every block carries `-E_f1` on site 1 and `+E_f2` on site 2
    /// (`+E_f1` when the cavity has a single level).
    #[serde(rename = "section4_independent")]
    SharedModes,
}

impl<T: Real> BlockDrive<T> {
    pub fn block(&self) -> HermitianBlock<T> {
        let ec = Signal::constant(self.ec);
        HermitianBlock {
            diagonal: vec![
                Signal::sum(vec![ec.clone(), self.qp.ep1.clone(), self.d1.clone()]),
                Signal::sum(vec![ec, self.qp.ep2.clone(), self.d2.clone()]),
            ],
            hops: vec![Hop {
                row: 0,
                col: 1,
                magnitude: self.qp.ts_mag.clone(),
                phase: self.qp.alpha.clone(),
            }],
        }
    }

    pub fn matrix_at(&self, t: T) -> CMatrix<T> {
        self.block().eval(t)
    }
}

/// Drives of every cavity block of a single-qubit model.
pub fn block_drives<T: Real>(
    cav: &CavityParams<T>,
    dq: &DipoleQubit<T>,
    reading: DriveReading,
) -> Result<Vec<BlockDrive<T>>> {
    cav.validate()?;
    (1..=cav.n_levels)
        .map(|n| {
            let ec = cavity_level_energy(cav, n)?;
            let (d1, d2) = match reading {
                DriveReading::LevelSigned => {
                    let f = mode_signal(cav, dq, n)?;
                    (-f.clone(), f)
                }
                DriveReading::SharedModes => {
                    let f1 = mode_signal(cav, dq, 1)?;
                    let f2 = if cav.n_levels >= 2 { mode_signal(cav, dq, 2)? } else { f1.clone() };
                    (-f1, f2)
                }
            };
            Ok(BlockDrive {
                d1,
                d2,
                ec,
                qp: dq.params.clone(),
            })
        })
        .collect()
}

/// Single-qubit [`BlockHamiltonian`] built from block drives.
pub fn hamiltonian_from_drives<T: Real>(drives: &[BlockDrive<T>], hbar: T) -> BlockHamiltonian<T> {
    BlockHamiltonian::new(drives.iter().map(BlockDrive::block).collect(), vec![drives.len(), 2], hbar)
}

/// Analytic 2×2 propagator of one block.
///
/// With `A = ∫(ec + d1 + E_p1)`, `B = ∫(ec + d2 + E_p2)`, `τ = ∫e^{iα}|t_s|` and
/// `R = √((A-B)² + 4ττ̄)`:
///
/// ```text
/// U11 = e^{-i(A+B)/2ħ} [cos(R/2ħ) - i (A-B) sin(R/2ħ)/R]
/// U22 = e^{-i(A+B)/2ħ} [cos(R/2ħ) + i (A-B) sin(R/2ħ)/R]
/// U12 = -i e^{-i(A+B)/2ħ} 2τ sin(R/2ħ)/R,   U21 = -i e^{-i(A+B)/2ħ} 2τ̄ sin(R/2ħ)/R
/// ```
///
/// `sin(R/2ħ)/R` is evaluated as `sinc(R/2ħ)/2ħ`, so `R → 0` needs no
/// special case.
pub fn closed_form_block<T: Real>(bd: &BlockDrive<T>, t0: T, t: T, hbar: T) -> Result<CMatrix<T>> {
    let ec = Signal::constant(bd.ec);
    let a = ec.integrate(t0, t) + bd.qp.ep1.integrate(t0, t) + bd.d1.integrate(t0, t);
    let b = ec.integrate(t0, t) + bd.qp.ep2.integrate(t0, t) + bd.d2.integrate(t0, t);
    let tau = integrate_hopping(&bd.qp.ts_mag, &bd.qp.alpha, t0, t)?;
    let tau_bar = tau.conj();
    let two = T::lit(2.0);
    let r = (a - b).hypot(two * tau.norm());
    let x = r / (two * hbar);
    let sin_over_r = sinc(x) / (two * hbar);
    let global = cis(-(a + b) / (two * hbar));
    let i = Complex::new(T::zero(), T::one());
    let cos_x = Complex::new(x.cos(), T::zero());
    let detune = i.scale((a - b) * sin_over_r);
    let u11 = global * (cos_x - detune);
    let u22 = global * (cos_x + detune);
    let u12 = global * (-i) * tau.scale(two * sin_over_r);
    let u21 = global * (-i) * tau_bar.scale(two * sin_over_r);
    Ok(CMatrix::from_row_slice(2, 2, &[u11, u12, u21, u22]))
}

/// `exp(M/iħ)` with `M = ∫_{t0}^{t} H(t') dt'`, via Hermitian
/// eigendecomposition of `M`.
pub fn exp_of_integral_block<T: Real>(block: &HermitianBlock<T>, t0: T, t: T, hbar: T) -> Result<CMatrix<T>> {
    Ok(block.integrate(t0, t)?.unitary_exp(T::one() / hbar))
}

/// `∏_{k=steps..1} exp(H(t_k^mid) Δt / iħ)`: second-order accurate.
///
/// Panics if `steps == 0`.
pub fn time_ordered_oracle<T: Real>(block: &HermitianBlock<T>, t0: T, t: T, steps: usize, hbar: T) -> CMatrix<T> {
    assert!(steps >= 1, "oracle needs at least one step");
    let dt = (t - t0) / T::from_count(steps);
    let half = T::lit(0.5);
    let mut u = CMatrix::identity(block.dim());
    for k in 0..steps {
        let mid = t0 + dt * (T::from_count(k) + half);
        let step = block.eval(mid).unitary_exp(dt / hbar);
        u = &step * &u;
    }
    u
}

/// Default oracle resolution for one block over `[t0, t]`.
pub fn default_oracle_steps<T: Real>(block: &HermitianBlock<T>, t0: T, t: T, hbar: T) -> usize {
    let phase = (block.norm_bound() * (t - t0).abs() / hbar).max(T::one());
    let steps = (phase * T::from_count(ORACLE_STEPS_PER_UNIT)).ceil();
    steps
        .to_usize()
        .unwrap_or(ORACLE_MAX_STEPS)
        .clamp(1, ORACLE_MAX_STEPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    ExpIntegral,
    Oracle,
}

/// Block-diagonal unitary mapping states at `t0` to states at `t1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator<T> {
    pub blocks: Vec<CMatrix<T>>,
    pub t0: T,
    pub t1: T,
    pub method: Method,
}

impl<T: Real> Propagator<T> {
    pub fn identity(n_blocks: usize, block_dim: usize, t0: T, method: Method) -> Self {
        Self {
            blocks: vec![CMatrix::identity(block_dim); n_blocks],
            t0,
            t1: t0,
            method,
        }
    }

    pub fn closed_form(drives: &[BlockDrive<T>], t0: T, t1: T, hbar: T) -> Result<Self> {
        let blocks = drives
            .iter()
            .map(|bd| closed_form_block(bd, t0, t1, hbar))
            .collect::<Result<_>>()?;
        Ok(Self {
            blocks,
            t0,
            t1,
            method: Method::ClosedForm,
        })
    }

    pub fn exp_of_integral(h: &BlockHamiltonian<T>, t0: T, t1: T) -> Result<Self> {
        let blocks = h
            .blocks()
            .iter()
            .map(|b| exp_of_integral_block(b, t0, t1, h.hbar()))
            .collect::<Result<_>>()?;
        Ok(Self {
            blocks,
            t0,
            t1,
            method: Method::ExpIntegral,
        })
    }

    /// Oracle propagator; `steps = None` picks [`default_oracle_steps`] per block.
    pub fn oracle(h: &BlockHamiltonian<T>, t0: T, t1: T, steps: Option<usize>) -> Self {
        let blocks = h
            .blocks()
            .iter()
            .map(|b| {
                let n = steps.unwrap_or_else(|| default_oracle_steps(b, t0, t1, h.hbar()));
                time_ordered_oracle(b, t0, t1, n, h.hbar())
            })
            .collect();
        Self {
            blocks,
            t0,
            t1,
            method: Method::Oracle,
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self) -> usize {
        self.blocks.first().map_or(0, CMatrix::rows)
    }

    /// `later · self`, valid when `later` starts where `self` ends.
    pub fn then(&self, later: &Self) -> Result<Self> {
        if later.n_blocks() != self.n_blocks() || later.block_dim() != self.block_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.n_blocks() * self.block_dim(),
                found: later.n_blocks() * later.block_dim(),
            });
        }
        Ok(Self {
            blocks: self.blocks.iter().zip(&later.blocks).map(|(e, l)| l * e).collect(),
            t0: self.t0,
            t1: later.t1,
            method: later.method,
        })
    }

    pub fn unitarity_residual(&self) -> T {
        self.blocks.iter().fold(T::zero(), |m, u| m.max(u.unitarity_residual()))
    }

    /// Largest entrywise difference between matching blocks.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .fold(T::zero(), |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    /// The full block-diagonal matrix.
    pub fn full_matrix(&self) -> CMatrix<T> {
        let d = self.block_dim();
        let n = d * self.n_blocks();
        let mut m = CMatrix::zeros(n, n);
        for (k, u) in self.blocks.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    m[(k * d + i, k * d + j)] = u[(i, j)];
                }
            }
        }
        m
    }
}

/// Applies each block unitary to its slice of amplitudes.
pub fn propagate_state<T: Real>(prop: &Propagator<T>, psi0: &StateVector<T>) -> Result<StateVector<T>> {
    let d = prop.block_dim();
    let expected = d * prop.n_blocks();
    if psi0.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: psi0.dim(),
        });
    }
    let mut out = Vec::with_capacity(expected);
    for (u, slice) in prop.blocks.iter().zip(psi0.amplitudes.chunks(d.max(1))) {
        out.extend(u.mul_vec(slice));
    }
    Ok(StateVector::new(out, Basis::Position))
}

/// Instantaneous eigenpairs of one 2×2 block at `t`, energies ascending.
pub fn eigen_block<T: Real>(bd: &BlockDrive<T>, t: T) -> Result<([T; 2], [StateVector<T>; 2])> {
    let m = bd.matrix_at(t);
    let (energies, [v1, v2]) = hermitian2_eigen(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)])?;
    Ok((
        energies,
        [
            StateVector::new(v1.to_vec(), Basis::Position),
            StateVector::new(v2.to_vec(), Basis::Position),
        ],
    ))
}

/// Zero drive, handy for blocks without cavity coupling.
pub fn undriven<T: Real>(qp: QubitParams<T>, ec: T) -> BlockDrive<T> {
    BlockDrive {
        d1: Signal::zero(),
        d2: Signal::zero(),
        ec,
        qp,
    }
}
