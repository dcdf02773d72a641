//! Measurement-side quantities: density matrices, populations, partial
//! traces, entanglement entropy, projectors and Rabi frequency estimation.
//!
//! Tensor factors are ordered cavity first, then one two-site factor per
//! qubit. Cavity levels are 1-based (`n` of `E_cn`); qubit indices are
//! 0-based.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, CMatrix};
use crate::scalar::Real;
use crate::tbq::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    X1,
    X2,
}

impl Site {
    fn index(self) -> usize {
        match self {
            Site::X1 => 0,
            Site::X2 => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    pub matrix: CMatrix<T>,
    pub factor_dims: Vec<usize>,
}

impl<T: Real> DensityMatrix<T> {
    /// Checks that `factor_dims` describes the matrix. Physical validity is
    /// checked separately by [`DensityMatrix::validate`].
    pub fn new(matrix: CMatrix<T>, factor_dims: Vec<usize>) -> Result<Self> {
        let product: usize = factor_dims.iter().product();
        if !matrix.is_square() || matrix.rows() != product {
            return Err(Error::DimensionMismatch {
                expected: product,
                found: matrix.rows(),
            });
        }
        Ok(Self { matrix, factor_dims })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Hermitian to 1e-12, unit trace to 1e-10, eigenvalues ≥ -1e-10.
    pub fn validate(&self) -> Result<()> {
        let herm = self.matrix.hermiticity_residual();
        if herm > T::tol(1e-12, 64.0) {
            return Err(Error::InvalidDensity(format!("hermiticity residual {herm:e}")));
        }
        let tr = self.matrix.trace();
        if (tr.re - T::one()).abs() > T::tol(1e-10, 64.0) || tr.im.abs() > T::tol(1e-10, 64.0) {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let (vals, _) = self.matrix.eigh();
        if let Some(&low) = vals.first() {
            if low < -T::tol(1e-10, 64.0) {
                return Err(Error::InvalidDensity(format!("negative eigenvalue {low:e}")));
            }
        }
        Ok(())
    }

    fn check_factor(&self, factor: usize) -> Result<()> {
        if factor >= self.factor_dims.len() {
            return Err(Error::IndexOutOfRange {
                what: "tensor factor",
                index: factor,
                max: self.factor_dims.len().saturating_sub(1),
            });
        }
        Ok(())
    }

    fn stride(&self, factor: usize) -> usize {
        self.factor_dims[factor + 1..].iter().product()
    }
}

/// `ρ = |ψ⟩⟨ψ|`.
pub fn density_from_state<T: Real>(psi: &StateVector<T>, factor_dims: &[usize]) -> Result<DensityMatrix<T>> {
    let a = &psi.amplitudes;
    let m = CMatrix::from_fn(a.len(), a.len(), |j, k| a[j] * a[k].conj());
    DensityMatrix::new(m, factor_dims.to_vec())
}

/// `P(E_cn)`: the diagonal weight of cavity block `n` (1-based).
pub fn cavity_population<T: Real>(rho: &DensityMatrix<T>, n: usize) -> Result<T> {
    let levels = rho.factor_dims.first().copied().unwrap_or(0);
    if n == 0 || n > levels {
        return Err(Error::IndexOutOfRange {
            what: "cavity level",
            index: n,
            max: levels,
        });
    }
    let rest = rho.stride(0);
    Ok(((n - 1) * rest..n * rest).fold(T::zero(), |acc, i| acc + rho.matrix[(i, i)].re))
}

/// Probability that qubit `qubit_index` (0-based) occupies `site`.
pub fn site_probability<T: Real>(rho: &DensityMatrix<T>, qubit_index: usize, site: Site) -> Result<T> {
    let factor = qubit_index + 1;
    rho.check_factor(factor)?;
    let stride = rho.stride(factor);
    let d = rho.factor_dims[factor];
    if site.index() >= d {
        return Err(Error::IndexOutOfRange {
            what: "site",
            index: site.index() + 1,
            max: d,
        });
    }
    Ok((0..rho.dim())
        .filter(|&i| (i / stride) % d == site.index())
        .fold(T::zero(), |acc, i| acc + rho.matrix[(i, i)].re))
}

/// Partial trace over every factor except `keep_factor`.
pub fn reduce<T: Real>(rho: &DensityMatrix<T>, keep_factor: usize) -> Result<DensityMatrix<T>> {
    rho.check_factor(keep_factor)?;
    let d = rho.factor_dims[keep_factor];
    let stride = rho.stride(keep_factor);
    let mut out = CMatrix::zeros(d, d);
    for i in 0..rho.dim() {
        let a = (i / stride) % d;
        let base = i - a * stride;
        for b in 0..d {
            let j = base + b * stride;
            out[(a, b)] = out[(a, b)] + rho.matrix[(i, j)];
        }
    }
    DensityMatrix::new(out, vec![d])
}

/// `-Tr ρ ln ρ` from the eigenvalues, clamped to `[0, 1]`.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let (vals, _) = rho.matrix.eigh();
    entropy_of_spectrum(&vals)
}

fn entropy_of_spectrum<T: Real>(vals: &[T]) -> Result<T> {
    if let Some(&low) = vals.iter().find(|&&l| l < -T::tol(1e-8, 64.0)) {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {low:e}")));
    }
    Ok(vals.iter().fold(T::zero(), |s, &l| {
        let l = l.max(T::zero()).min(T::one());
        if l > T::zero() {
            s - l * l.ln()
        } else {
            s
        }
    }))
}

/// Entropy of a 2×2 density matrix through its Bloch radius
/// `r = √((1 - 2ρ22)² + 4|ρ12|²)`:
/// `S = -½ [ln(1-r) + ln(1+r) + 2r·artanh(r) - ln 4]`, with the pure-state
/// limit `S = 0` for `r ≥ 1 - 1e-12`.
pub fn entropy_closed_form_2x2<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let two = T::lit(2.0);
    let rho22 = rho.matrix[(1, 1)].re;
    let rho12 = rho.matrix[(0, 1)];
    let r = (T::one() - two * rho22).hypot(two * rho12.norm());
    if r > T::one() + T::tol(1e-8, 64.0) {
        return Err(Error::InvalidDensity(format!("Bloch radius {r} exceeds 1")));
    }
    if r >= T::one() - T::tol(1e-12, 16.0) {
        return Ok(T::zero());
    }
    let one = T::one();
    let s = (one - r).ln() + (one + r).ln() + two * r * r.atanh() - T::lit(4.0).ln();
    Ok(-s * T::lit(0.5))
}

/// `I ⊗ … ⊗ |x_site⟩⟨x_site| ⊗ … ⊗ I` with the projector in the slot of
/// qubit `qubit_index`.
pub fn projector_site<T: Real>(factor_dims: &[usize], qubit_index: usize, site: Site) -> Result<CMatrix<T>> {
    let factor = qubit_index + 1;
    if factor >= factor_dims.len() {
        return Err(Error::IndexOutOfRange {
            what: "tensor factor",
            index: factor,
            max: factor_dims.len().saturating_sub(1),
        });
    }
    let d = factor_dims[factor];
    if site.index() >= d {
        return Err(Error::IndexOutOfRange {
            what: "site",
            index: site.index() + 1,
            max: d,
        });
    }
    let mut local = CMatrix::zeros(d, d);
    local[(site.index(), site.index())] = Complex::new(T::one(), T::zero());
    Ok(factor_dims
        .iter()
        .enumerate()
        .fold(CMatrix::identity(1), |acc, (k, &dk)| {
            if k == factor {
                acc.kron(&local)
            } else {
                acc.kron(&CMatrix::identity(dk))
            }
        }))
}

/// `|⟨ψ(t0)| P_Ecn |ψ(t)⟩|²` with `P_Ecn = |E_cn⟩⟨E_cn| ⊗ I`.
pub fn multiphoton_probability<T: Real>(
    psi_t0: &StateVector<T>,
    psi_t: &StateVector<T>,
    cavity_level: usize,
    factor_dims: &[usize],
) -> Result<T> {
    let dim: usize = factor_dims.iter().product();
    for psi in [psi_t0, psi_t] {
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.dim(),
            });
        }
    }
    let levels = factor_dims.first().copied().unwrap_or(0);
    if cavity_level == 0 || cavity_level > levels {
        return Err(Error::IndexOutOfRange {
            what: "cavity level",
            index: cavity_level,
            max: levels,
        });
    }
    let rest = dim / levels;
    let range = (cavity_level - 1) * rest..cavity_level * rest;
    let overlap = inner(&psi_t0.amplitudes[range.clone()], &psi_t.amplitudes[range]);
    Ok(overlap.norm_sqr())
}

/// Renormalized joint distribution `|ψ_i|² / Σ|ψ_j|²` and its denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct JointProbabilities<T> {
    pub probabilities: Vec<T>,
    pub denominator: T,
}

pub fn normalized_joint_probabilities<T: Real>(psi: &StateVector<T>) -> Result<JointProbabilities<T>> {
    let denominator = norm_sqr(&psi.amplitudes);
    if denominator < T::lit(1e-20) {
        return Err(Error::ZeroState);
    }
    Ok(JointProbabilities {
        probabilities: psi.amplitudes.iter().map(|z| z.norm_sqr() / denominator).collect(),
        denominator,
    })
}

/// Dominant angular frequency of a uniformly sampled series.
///
/// Hann-windowed DFT peak, refined by log-parabolic interpolation over the
/// three bins around it, then polished by a least-squares sinusoid fit
/// restricted to half a bin around the interpolated frequency.
pub fn rabi_frequency_estimate<T: Real>(series: &[(T, T)]) -> Result<T> {
    let n = series.len();
    if n < 16 {
        return Err(Error::InvalidSeries(format!("need at least 16 samples, got {n}")));
    }
    let t0 = series[0].0;
    let dt = (series[n - 1].0 - t0) / T::from_count(n - 1);
    if !(dt > T::zero()) {
        return Err(Error::InvalidSeries("times must increase".into()));
    }
    let jitter = T::tol(1e-6, 64.0) * dt;
    if series
        .iter()
        .enumerate()
        .any(|(k, &(t, _))| (t - (t0 + dt * T::from_count(k))).abs() > jitter)
    {
        return Err(Error::InvalidSeries("sampling is not uniform".into()));
    }

    let mean = series.iter().fold(T::zero(), |s, &(_, p)| s + p) / T::from_count(n);
    let centered: Vec<T> = series.iter().map(|&(_, p)| p - mean).collect();
    let peak_scale = series.iter().fold(T::zero(), |m, &(_, p)| m.max(p.abs()));

    let two_pi = T::TAU();
    let half = T::lit(0.5);
    let denom = T::from_count(n - 1);
    let mut buffer: Vec<Complex<T>> = centered
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let w = half - half * (two_pi * T::from_count(k) / denom).cos();
            Complex::new(x * w, T::zero())
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let mags: Vec<T> = buffer.iter().map(|z| z.norm()).collect();

    let top = n / 2;
    let (peak_bin, peak) = (1..=top)
        .map(|k| (k, mags[k]))
        .fold((1, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
    let mut sorted: Vec<T> = mags[1..=top].to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = sorted[sorted.len() / 2];
    let floor = median.max(T::lit(8.0) * T::from_count(n) * T::epsilon() * peak_scale);
    if !(peak >= T::lit(10.0) * floor) || peak.is_zero() {
        return Err(Error::NoOscillation {
            peak: peak.as_f64(),
            floor: floor.as_f64(),
        });
    }

    let tiny = T::min_positive_value();
    let log_mag = |k: usize| mags[k].max(tiny).ln();
    let (lm, l0, lp) = (log_mag(peak_bin - 1), log_mag(peak_bin), log_mag((peak_bin + 1).min(n - 1)));
    let curvature = lm - l0 - l0 + lp;
    let offset = if curvature < T::zero() {
        (half * (lm - lp) / curvature).max(-half).min(half)
    } else {
        T::zero()
    };
    let bin_width = two_pi / (T::from_count(n) * dt);
    let coarse = (T::from_count(peak_bin) + offset) * bin_width;

    let times: Vec<T> = (0..n).map(|k| dt * (T::from_count(k) - denom * half)).collect();
    let rss = |omega: T| sinusoid_residual(&times, &centered, omega);
    let refined = golden_section_min(rss, coarse - half * bin_width, coarse + half * bin_width);
    Ok(refined)
}

// Residual sum of squares of the least-squares fit c + a·cos(ωt) + b·sin(ωt).
fn sinusoid_residual<T: Real>(times: &[T], values: &[T], omega: T) -> T {
    let mut g = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    let basis = |t: T| [T::one(), (omega * t).cos(), (omega * t).sin()];
    for (&t, &y) in times.iter().zip(values) {
        let phi = basis(t);
        for i in 0..3 {
            rhs[i] = rhs[i] + phi[i] * y;
            for j in 0..3 {
                g[i][j] = g[i][j] + phi[i] * phi[j];
            }
        }
    }
    let coef = solve3(g, rhs);
    times.iter().zip(values).fold(T::zero(), |acc, (&t, &y)| {
        let phi = basis(t);
        let r = y - (coef[0] * phi[0] + coef[1] * phi[1] + coef[2] * phi[2]);
        acc + r * r
    })
}

// Gaussian elimination with partial pivoting; singular systems yield zeros.
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> [T; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        a.swap(col, pivot);
        b.swap(col, pivot);
        if a[col][col].abs() <= T::min_positive_value() {
            return [T::zero(); 3];
        }
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let s = (row + 1..3).fold(b[row], |s, k| s - a[row][k] * x[k]);
        x[row] = s / a[row][row];
    }
    x
}

fn golden_section_min<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (hi - lo) <= T::epsilon() * T::lit(4.0) * (lo.abs() + hi.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) * T::lit(0.5)
}
