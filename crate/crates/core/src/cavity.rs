//! Cavity levels, mode drives and composite Hamiltonian assembly.
//!
//! The total Hamiltonian never couples different cavity levels, so it is
//! stored as one Hermitian block per level. A [`BlockHamiltonian`] has no way
//! to hold a cross-level entry.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cis, Real};
use crate::signals::{integrate_hopping, Signal};
use crate::tbq::QubitParams;

/// Largest `n_levels · 2^{#qubits}` accepted by [`assemble_general`].
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 20;

/// Which trigonometric convention the mode drives follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeParity {
    /// Odd `n`: `sin(((n+1)/2)ωt)`, even `n`: `cos(((n+1)/2)ωt)`, amplitude
    /// `√((2/ε)ħ((n+1)/2)ω)`.
    #[default]
    General,
    /// Odd `n`: `cos(nωt)`, even `n`: `sin(nωt)`, amplitude `√((2/ε)ħnω)`.
    /// Reproduces the worked `E_f1 ∝ cos ωt`, `E_f2 ∝ sin 2ωt` pair.
    #[serde(rename = "section2_examples")]
    CosFirst,
}

fn one<T: Real>() -> T {
    T::one()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct CavityParams<T> {
    /// Angular frequency ω.
    pub omega: T,
    /// Number of retained cavity levels `K`.
    pub n_levels: usize,
    /// Permittivity scale ε.
    pub epsilon: T,
    #[serde(default = "one")]
    pub hbar: T,
    #[serde(default)]
    pub mode_parity: ModeParity,
}

impl<T: Real> CavityParams<T> {
    pub fn new(omega: T, n_levels: usize, epsilon: T) -> Self {
        Self {
            omega,
            n_levels,
            epsilon,
            hbar: T::one(),
            mode_parity: ModeParity::General,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 1 {
            return Err(Error::ConfigMismatch("cavity.n_levels must be at least 1".into()));
        }
        for (name, v) in [("omega", self.omega), ("epsilon", self.epsilon), ("hbar", self.hbar)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::ConfigMismatch(format!("cavity.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_levels {
            return Err(Error::IndexOutOfRange {
                what: "cavity level",
                index: n,
                max: self.n_levels,
            });
        }
        Ok(())
    }
}

/// A qubit together with its dipole coupling to each cavity level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct DipoleQubit<T> {
    #[serde(flatten)]
    pub params: QubitParams<T>,
    /// Distance between the dot centers, `x2 - x1`.
    pub dipole_length: T,
    #[serde(default = "one")]
    pub charge: T,
    /// Geometric placement coefficients `a_1..a_K`.
    pub couplings: Vec<T>,
}

impl<T: Real> DipoleQubit<T> {
    pub fn new(params: QubitParams<T>, dipole_length: T, couplings: Vec<T>) -> Self {
        Self {
            params,
            dipole_length,
            charge: T::one(),
            couplings,
        }
    }
}

/// `E_cn = ħω(2n - 1)/2` for `1 ≤ n ≤ K`.
pub fn cavity_level_energy<T: Real>(cav: &CavityParams<T>, n: usize) -> Result<T> {
    cav.check_level(n)?;
    Ok(cav.hbar * cav.omega * T::from_count(2 * n - 1) * T::lit(0.5))
}

/// Mode drive `E_fn(t)` of level `n` on the given qubit.
pub fn mode_signal<T: Real>(cav: &CavityParams<T>, dq: &DipoleQubit<T>, n: usize) -> Result<Signal<T>> {
    cav.check_level(n)?;
    if dq.couplings.len() != cav.n_levels {
        return Err(coupling_mismatch(dq.couplings.len(), cav.n_levels));
    }
    let a_n = dq.couplings[n - 1];
    let dipole = dq.charge * dq.dipole_length * T::lit(0.5);
    let odd = n % 2 == 1;
    let (multiple, trig_is_sin) = match cav.mode_parity {
        ModeParity::General => (T::from_count(n + 1) * T::lit(0.5), odd),
        ModeParity::CosFirst => (T::from_count(n), !odd),
    };
    let freq = multiple * cav.omega;
    let amplitude = a_n * dipole * (T::lit(2.0) / cav.epsilon * cav.hbar * freq).sqrt();
    Ok(if trig_is_sin {
        Signal::sin(amplitude, freq)
    } else {
        Signal::cos(amplitude, freq)
    })
}

fn coupling_mismatch(found: usize, n_levels: usize) -> Error {
    Error::ConfigMismatch(format!(
        "couplings has {found} entries but cavity.n_levels is {n_levels}"
    ))
}

/// Hopping term `|t_s(t)| e^{iα(t)}` at `(row, col)` with `row < col`; the
/// conjugate sits at `(col, row)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hop<T> {
    pub row: usize,
    pub col: usize,
    pub magnitude: Signal<T>,
    pub phase: Signal<T>,
}

/// Time-dependent Hermitian matrix with real signal diagonal and
/// upper-triangular hopping terms.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBlock<T> {
    pub diagonal: Vec<Signal<T>>,
    pub hops: Vec<Hop<T>>,
}

impl<T: Real> HermitianBlock<T> {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn eval(&self, t: T) -> CMatrix<T> {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (i, d) in self.diagonal.iter().enumerate() {
            m[(i, i)] = Complex::new(d.eval(t), T::zero());
        }
        for h in &self.hops {
            let z = cis(h.phase.eval(t)).scale(h.magnitude.eval(t));
            m[(h.row, h.col)] = m[(h.row, h.col)] + z;
            m[(h.col, h.row)] = m[(h.col, h.row)] + z.conj();
        }
        m
    }

    /// `∫_{t0}^{t1} H(t) dt` entrywise.
    pub fn integrate(&self, t0: T, t1: T) -> Result<CMatrix<T>> {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (i, d) in self.diagonal.iter().enumerate() {
            m[(i, i)] = Complex::new(d.integrate(t0, t1), T::zero());
        }
        for h in &self.hops {
            let z = integrate_hopping(&h.magnitude, &h.phase, t0, t1)?;
            m[(h.row, h.col)] = m[(h.row, h.col)] + z;
            m[(h.col, h.row)] = m[(h.col, h.row)] + z.conj();
        }
        Ok(m)
    }

    /// Bound on the largest eigenvalue magnitude over all `t` (Gershgorin).
    pub fn norm_bound(&self) -> T {
        let mut rows: Vec<T> = self.diagonal.iter().map(|d| d.sup_bound()).collect();
        for h in &self.hops {
            let b = h.magnitude.sup_bound();
            rows[h.row] = rows[h.row] + b;
            rows[h.col] = rows[h.col] + b;
        }
        rows.into_iter().fold(T::zero(), T::max)
    }

    pub fn is_constant(&self) -> bool {
        self.diagonal.iter().all(|d| d.as_constant().is_some())
            && self
                .hops
                .iter()
                .all(|h| h.magnitude.as_constant().is_some() && h.phase.as_constant().is_some())
    }
}

/// One Hermitian block per cavity level; the tensor factor dimensions are
/// `[K, 2, 2, ...]` (cavity first, then one 2 per qubit).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian<T> {
    blocks: Vec<HermitianBlock<T>>,
    factor_dims: Vec<usize>,
    hbar: T,
}

impl<T: Real> BlockHamiltonian<T> {
    /// Panics if the blocks do not share one dimension or `factor_dims` does
    /// not describe them.
    pub fn new(blocks: Vec<HermitianBlock<T>>, factor_dims: Vec<usize>, hbar: T) -> Self {
        let dim = blocks.first().map_or(0, HermitianBlock::dim);
        assert!(blocks.iter().all(|b| b.dim() == dim), "blocks share one dimension");
        assert_eq!(factor_dims.first().copied(), Some(blocks.len()), "cavity factor first");
        assert_eq!(factor_dims[1..].iter().product::<usize>(), dim, "qubit factors");
        Self {
            blocks,
            factor_dims,
            hbar,
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self) -> usize {
        self.blocks.first().map_or(0, HermitianBlock::dim)
    }

    pub fn total_dim(&self) -> usize {
        self.n_blocks() * self.block_dim()
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn blocks(&self) -> &[HermitianBlock<T>] {
        &self.blocks
    }

    /// Block of cavity level `n` (1-based).
    pub fn block(&self, n: usize) -> Result<&HermitianBlock<T>> {
        if n == 0 || n > self.blocks.len() {
            return Err(Error::IndexOutOfRange {
                what: "cavity level",
                index: n,
                max: self.blocks.len(),
            });
        }
        Ok(&self.blocks[n - 1])
    }

    /// The full block-diagonal matrix at `t`.
    pub fn full_matrix(&self, t: T) -> CMatrix<T> {
        let d = self.block_dim();
        let mut m = CMatrix::zeros(self.total_dim(), self.total_dim());
        for (k, b) in self.blocks.iter().enumerate() {
            let h = b.eval(t);
            for i in 0..d {
                for j in 0..d {
                    m[(k * d + i, k * d + j)] = h[(i, j)];
                }
            }
        }
        m
    }
}

fn check_couplings<T: Real>(cav: &CavityParams<T>, dq: &DipoleQubit<T>) -> Result<()> {
    if dq.couplings.len() != cav.n_levels {
        return Err(coupling_mismatch(dq.couplings.len(), cav.n_levels));
    }
    Ok(())
}

/// One qubit in the cavity: block `n` is
/// `[[E_cn - E_fn + E_p1, t_s], [t_s*, E_cn + E_fn + E_p2]]`.
pub fn assemble_one_qubit<T: Real>(cav: &CavityParams<T>, dq: &DipoleQubit<T>) -> Result<BlockHamiltonian<T>> {
    cav.validate()?;
    check_couplings(cav, dq)?;
    let qp = &dq.params;
    let mut blocks = Vec::with_capacity(cav.n_levels);
    for n in 1..=cav.n_levels {
        let ec = Signal::constant(cavity_level_energy(cav, n)?);
        let drive = mode_signal(cav, dq, n)?;
        blocks.push(HermitianBlock {
            diagonal: vec![
                Signal::sum(vec![ec.clone(), qp.ep1.clone(), -drive.clone()]),
                Signal::sum(vec![ec, qp.ep2.clone(), drive]),
            ],
            hops: vec![Hop {
                row: 0,
                col: 1,
                magnitude: qp.ts_mag.clone(),
                phase: qp.alpha.clone(),
            }],
        });
    }
    Ok(BlockHamiltonian::new(blocks, vec![cav.n_levels, 2], cav.hbar))
}

/// Two qubits `A ⊗ B` in the cavity: block `n` is
/// `E_cn·I + H_A ⊗ I + I ⊗ H_B + diag(-E_fa-E_fb, -E_fa+E_fb, E_fa-E_fb, E_fa+E_fb)`.
pub fn assemble_two_qubit<T: Real>(
    cav: &CavityParams<T>,
    qa: &DipoleQubit<T>,
    qb: &DipoleQubit<T>,
) -> Result<BlockHamiltonian<T>> {
    cav.validate()?;
    check_couplings(cav, qa)?;
    check_couplings(cav, qb)?;
    let (a, b) = (&qa.params, &qb.params);
    let mut blocks = Vec::with_capacity(cav.n_levels);
    for n in 1..=cav.n_levels {
        let ec = Signal::constant(cavity_level_energy(cav, n)?);
        let fa = mode_signal(cav, qa, n)?;
        let fb = mode_signal(cav, qb, n)?;
        let entry = |pa: &Signal<T>, pb: &Signal<T>, da: Signal<T>, db: Signal<T>| {
            Signal::sum(vec![ec.clone(), pa.clone(), pb.clone(), da, db])
        };
        let hop = |row, col, q: &QubitParams<T>| Hop {
            row,
            col,
            magnitude: q.ts_mag.clone(),
            phase: q.alpha.clone(),
        };
        blocks.push(HermitianBlock {
            diagonal: vec![
                entry(&a.ep1, &b.ep1, -fa.clone(), -fb.clone()),
                entry(&a.ep1, &b.ep2, -fa.clone(), fb.clone()),
                entry(&a.ep2, &b.ep1, fa.clone(), -fb.clone()),
                entry(&a.ep2, &b.ep2, fa, fb),
            ],
            hops: vec![hop(0, 1, b), hop(0, 2, a), hop(1, 3, a), hop(2, 3, b)],
        });
    }
    Ok(BlockHamiltonian::new(blocks, vec![cav.n_levels, 2, 2], cav.hbar))
}

/// Any number of two-site subsystems in the cavity, with
/// [`DEFAULT_DIMENSION_CAP`] on the total dimension.
pub fn assemble_general<T: Real>(
    cav: &CavityParams<T>,
    subsystems: &[DipoleQubit<T>],
) -> Result<BlockHamiltonian<T>> {
    assemble_general_with_cap(cav, subsystems, DEFAULT_DIMENSION_CAP)
}

/// [`assemble_general`] with an explicit cap on `K · 2^{#subsystems}`.
///
/// Subsystem 0 is the most significant qubit factor. Each diagonal entry sums
/// `E_cn`, then every subsystem's on-site energy, then every subsystem's
/// signed drive (`-E_fn` on site 1, `+E_fn` on site 2).
pub fn assemble_general_with_cap<T: Real>(
    cav: &CavityParams<T>,
    subsystems: &[DipoleQubit<T>],
    cap: usize,
) -> Result<BlockHamiltonian<T>> {
    cav.validate()?;
    if subsystems.is_empty() {
        return Err(Error::ConfigMismatch("at least one qubit is required".into()));
    }
    for dq in subsystems {
        check_couplings(cav, dq)?;
    }
    let m = subsystems.len();
    let block_dim = u32::try_from(m)
        .ok()
        .and_then(|m| 1usize.checked_shl(m))
        .filter(|&d| d != 0);
    let total = block_dim.and_then(|d| d.checked_mul(cav.n_levels));
    let (block_dim, total) = match (block_dim, total) {
        (Some(d), Some(t)) if t <= cap => (d, t),
        _ => {
            return Err(Error::DimensionOverflow {
                total: total.unwrap_or(usize::MAX),
                cap,
            })
        }
    };
    debug_assert_eq!(total, block_dim * cav.n_levels);

    // Bit of subsystem k inside a block index: set means site 2.
    let site2 = |index: usize, k: usize| (index >> (m - 1 - k)) & 1 == 1;

    let mut hops = Vec::new();
    for row in 0..block_dim {
        for (k, dq) in subsystems.iter().enumerate() {
            if !site2(row, k) {
                hops.push(Hop {
                    row,
                    col: row | (1 << (m - 1 - k)),
                    magnitude: dq.params.ts_mag.clone(),
                    phase: dq.params.alpha.clone(),
                });
            }
        }
    }
    hops.sort_by_key(|h| (h.row, h.col));

    let mut blocks = Vec::with_capacity(cav.n_levels);
    for n in 1..=cav.n_levels {
        let ec = Signal::constant(cavity_level_energy(cav, n)?);
        let drives = subsystems
            .iter()
            .map(|dq| mode_signal(cav, dq, n))
            .collect::<Result<Vec<_>>>()?;
        let diagonal = (0..block_dim)
            .map(|index| {
                let mut terms = Vec::with_capacity(1 + 2 * m);
                terms.push(ec.clone());
                for (k, dq) in subsystems.iter().enumerate() {
                    let p = &dq.params;
                    terms.push(if site2(index, k) { p.ep2.clone() } else { p.ep1.clone() });
                }
                for (k, f) in drives.iter().enumerate() {
                    terms.push(if site2(index, k) { f.clone() } else { -f.clone() });
                }
                Signal::sum(terms)
            })
            .collect();
        blocks.push(HermitianBlock {
            diagonal,
            hops: hops.clone(),
        });
    }
    let mut factor_dims = vec![cav.n_levels];
    factor_dims.extend(std::iter::repeat_n(2, m));
    Ok(BlockHamiltonian::new(blocks, factor_dims, cav.hbar))
}
