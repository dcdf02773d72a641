//! Time-dependent real parameters and their exact integrals.
//!
//! Every model parameter (on-site energies, hopping magnitude and phase,
//! cavity mode drives) is a [`Signal`]: a constant, a sinusoid, or a sum of
//! signals. All three forms have closed-form antiderivatives, so the
//! propagator coefficients never carry quadrature error unless a hopping
//! phase varies in time.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, sinc, Real};

/// Relative tolerance of [`adaptive_simpson`] as used by the model.
pub const QUADRATURE_REL_TOL: f64 = 1e-12;
/// Absolute tolerance floor of [`adaptive_simpson`].
pub const QUADRATURE_ABS_TOL: f64 = 1e-15;
/// Maximum bisection depth before quadrature gives up.
pub const QUADRATURE_MAX_DEPTH: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Sin,
    Cos,
}

/// A real function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Signal<T> {
    Constant {
        value: T,
    },
    /// `amplitude · trig(omega·t + phase)`.
    Sinusoid {
        amplitude: T,
        omega: T,
        #[serde(default)]
        phase: T,
        #[serde(rename = "fn")]
        trig: Trig,
    },
    Sum {
        terms: Vec<Signal<T>>,
    },
}

impl<T: Real> Signal<T> {
    pub fn constant(value: T) -> Self {
        Signal::Constant { value }
    }

    pub fn zero() -> Self {
        Signal::constant(T::zero())
    }

    pub fn sin(amplitude: T, omega: T) -> Self {
        Signal::Sinusoid {
            amplitude,
            omega,
            phase: T::zero(),
            trig: Trig::Sin,
        }
    }

    pub fn cos(amplitude: T, omega: T) -> Self {
        Signal::Sinusoid {
            amplitude,
            omega,
            phase: T::zero(),
            trig: Trig::Cos,
        }
    }

    pub fn sum(terms: Vec<Signal<T>>) -> Self {
        Signal::Sum { terms }
    }

    pub fn eval(&self, t: T) -> T {
        match self {
            Signal::Constant { value } => *value,
            Signal::Sinusoid {
                amplitude,
                omega,
                phase,
                trig,
            } => {
                let arg = *omega * t + *phase;
                *amplitude
                    * match trig {
                        Trig::Sin => arg.sin(),
                        Trig::Cos => arg.cos(),
                    }
            }
            Signal::Sum { terms } => terms.iter().fold(T::zero(), |acc, s| acc + s.eval(t)),
        }
    }

    /// `∫_{t0}^{t1} s(t) dt` in closed form.
    ///
    /// Sinusoids use the product form `A·Δ·trig(mid)·sinc(ωΔ/2)`, which is
    /// exact for every `ω` (including zero) and exactly antisymmetric under
    /// swapping the bounds.
    pub fn integrate(&self, t0: T, t1: T) -> T {
        match self {
            Signal::Constant { value } => *value * (t1 - t0),
            Signal::Sinusoid {
                amplitude,
                omega,
                phase,
                trig,
            } => {
                let half = T::lit(0.5);
                let delta = t1 - t0;
                let mid = *omega * (t0 + t1) * half + *phase;
                let envelope = *amplitude * delta * sinc(*omega * delta * half);
                envelope
                    * match trig {
                        Trig::Sin => mid.sin(),
                        Trig::Cos => mid.cos(),
                    }
            }
            Signal::Sum { terms } => terms.iter().fold(T::zero(), |acc, s| acc + s.integrate(t0, t1)),
        }
    }

    /// `k · s(t)`, rewritten structurally.
    pub fn scaled(&self, k: T) -> Self {
        match self {
            Signal::Constant { value } => Signal::Constant { value: *value * k },
            Signal::Sinusoid {
                amplitude,
                omega,
                phase,
                trig,
            } => Signal::Sinusoid {
                amplitude: *amplitude * k,
                omega: *omega,
                phase: *phase,
                trig: *trig,
            },
            Signal::Sum { terms } => Signal::Sum {
                terms: terms.iter().map(|s| s.scaled(k)).collect(),
            },
        }
    }

    /// The constant value of a signal that does not vary in time.
    pub fn as_constant(&self) -> Option<T> {
        match self {
            Signal::Constant { value } => Some(*value),
            Signal::Sinusoid {
                amplitude,
                omega,
                phase,
                trig,
            } => {
                if amplitude.is_zero() {
                    Some(T::zero())
                } else if omega.is_zero() {
                    Some(
                        *amplitude
                            * match trig {
                                Trig::Sin => phase.sin(),
                                Trig::Cos => phase.cos(),
                            },
                    )
                } else {
                    None
                }
            }
            Signal::Sum { terms } => terms
                .iter()
                .try_fold(T::zero(), |acc, s| s.as_constant().map(|c| acc + c)),
        }
    }

    /// Upper bound on `|s(t)|` over all `t`.
    pub fn sup_bound(&self) -> T {
        match self {
            Signal::Constant { value } => value.abs(),
            Signal::Sinusoid { amplitude, .. } => amplitude.abs(),
            Signal::Sum { terms } => terms.iter().fold(T::zero(), |acc, s| acc + s.sup_bound()),
        }
    }

    /// `∫|s(t)| dt` over the interval between `t0` and `t1`, by quadrature.
    pub fn integrate_abs(&self, t0: T, t1: T) -> Result<T> {
        let (a, b, _) = ordered(t0, t1);
        let v = adaptive_simpson(|t| Complex::new(self.eval(t).abs(), T::zero()), a, b)?;
        Ok(v.re)
    }
}

impl<T: Real> std::ops::Neg for Signal<T> {
    type Output = Signal<T>;

    fn neg(self) -> Signal<T> {
        self.scaled(-T::one())
    }
}

fn ordered<T: Real>(t0: T, t1: T) -> (T, T, T) {
    if t0 <= t1 {
        (t0, t1, T::one())
    } else {
        (t1, t0, -T::one())
    }
}

/// `τ = ∫_{t0}^{t1} e^{iα(t)} |t_s(t)| dt`.
///
/// Exact when the phase is constant; otherwise adaptive Simpson quadrature.
pub fn integrate_hopping<T: Real>(
    ts_mag: &Signal<T>,
    alpha: &Signal<T>,
    t0: T,
    t1: T,
) -> Result<Complex<T>> {
    if let Some(phase) = alpha.as_constant() {
        return Ok(cis(phase).scale(ts_mag.integrate(t0, t1)));
    }
    if ts_mag.as_constant() == Some(T::zero()) {
        return Ok(Complex::zero());
    }
    let (a, b, sign) = ordered(t0, t1);
    let v = adaptive_simpson(|t| cis(alpha.eval(t)).scale(ts_mag.eval(t)), a, b)?;
    Ok(v.scale(sign))
}

/// Adaptive Simpson quadrature of a complex integrand on `[a, b]`.
///
/// Tolerance is `max(QUADRATURE_REL_TOL · ∫|f|, QUADRATURE_ABS_TOL)`, with the
/// `∫|f|` scale taken from the initial 16-panel pass. Fails with
/// [`Error::QuadratureNonConvergence`] if any subinterval still misses its
/// local tolerance after [`QUADRATURE_MAX_DEPTH`] bisections.
pub fn adaptive_simpson<T: Real>(f: impl Fn(T) -> Complex<T>, a: T, b: T) -> Result<Complex<T>> {
    adaptive_simpson_with(
        f,
        a,
        b,
        T::tol(QUADRATURE_REL_TOL, 64.0),
        T::tol(QUADRATURE_ABS_TOL, 1.0),
        QUADRATURE_MAX_DEPTH,
    )
}

/// [`adaptive_simpson`] with explicit tolerances and depth.
pub fn adaptive_simpson_with<T: Real>(
    f: impl Fn(T) -> Complex<T>,
    a: T,
    b: T,
    rel_tol: T,
    abs_tol: T,
    max_depth: usize,
) -> Result<Complex<T>> {
    if a == b {
        return Ok(Complex::zero());
    }
    const PANELS: usize = 16;
    let h = (b - a) / T::from_count(PANELS);
    let half = T::lit(0.5);
    let mut panels = Vec::with_capacity(PANELS);
    let mut scale = T::zero();
    for k in 0..PANELS {
        let lo = a + h * T::from_count(k);
        let hi = if k + 1 == PANELS { b } else { lo + h };
        let mid = (lo + hi) * half;
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = simpson(lo, hi, flo, fmid, fhi);
        scale = scale + (hi - lo) * (flo.norm() + T::lit(4.0) * fmid.norm() + fhi.norm()) / T::lit(6.0);
        panels.push((lo, hi, flo, fmid, fhi, whole));
    }
    let tol = (rel_tol * scale).max(abs_tol);
    let panel_tol = tol / T::from_count(PANELS);
    let mut total = Complex::zero();
    for (lo, hi, flo, fmid, fhi, whole) in panels {
        total = total + refine(&f, lo, hi, flo, fmid, fhi, whole, panel_tol, max_depth, (a, b))?;
    }
    Ok(total)
}

fn simpson<T: Real>(a: T, b: T, fa: Complex<T>, fm: Complex<T>, fb: Complex<T>) -> Complex<T> {
    (fa + fm.scale(T::lit(4.0)) + fb).scale((b - a) / T::lit(6.0))
}

#[allow(clippy::too_many_arguments)]
fn refine<T: Real>(
    f: &impl Fn(T) -> Complex<T>,
    a: T,
    b: T,
    fa: Complex<T>,
    fm: Complex<T>,
    fb: Complex<T>,
    whole: Complex<T>,
    tol: T,
    depth_left: usize,
    bounds: (T, T),
) -> Result<Complex<T>> {
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let fifteen = T::lit(15.0);
    if delta.norm() <= fifteen * tol {
        return Ok(left + right + delta.unscale(fifteen));
    }
    if depth_left == 0 || m <= a || m >= b {
        return Err(Error::QuadratureNonConvergence {
            a: bounds.0.as_f64(),
            b: bounds.1.as_f64(),
            max_depth: QUADRATURE_MAX_DEPTH,
        });
    }
    let l = refine(f, a, m, fa, flm, fm, left, tol * half, depth_left - 1, bounds)?;
    let r = refine(f, m, b, fm, frm, fb, right, tol * half, depth_left - 1, bounds)?;
    Ok(l + r)
}
