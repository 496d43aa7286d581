//! The fractional trigonometric series `S_z(t) = Σ_{k≥1} k^z e^{-itk}`,
//! `-1 < Re z < 0`, and its singular part `Γ(z+1)(it)^{-z-1}` at `t → 0`.
//!
//! The series converges only conditionally. It is summed with the Abel factor
//! `e^{-εk}` for a short decreasing list of ε and extrapolated to ε = 0 by
//! polynomial (Richardson/Neville) extrapolation; `S(ε)` is analytic in ε on
//! a disc of radius `|t|`, so the schedule is scaled to `|t|`.
//!
//! The `k = 0` term is absent: `0_+^z = 0` for `Re z < 0`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::gamma;

/// Abel damping below this is treated as lost in rounding.
pub const TAIL_CUTOFF: f64 = 1e-16;
pub const MIN_EPSILON: f64 = 1e-6;
pub const DEFAULT_TOLERANCE: f64 = 1e-5;
pub const DEFAULT_MAX_TERMS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesQuery {
    pub z: Complex64,
    pub t: f64,
    /// Abel parameters, strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Relative error estimate above which evaluation fails.
    pub tolerance: f64,
    pub max_terms: usize,
}

impl SeriesQuery {
    /// Default schedule `ε_j = |t| / 2^{5+j}`, `j = 0..4`.
    pub fn new(z: Complex64, t: f64) -> Result<Self> {
        let start = t.abs() / 32.0;
        let epsilons = (0..4).map(|j| start / f64::powi(2.0, j)).collect();
        let q = Self {
            z,
            t,
            epsilons,
            tolerance: DEFAULT_TOLERANCE,
            max_terms: DEFAULT_MAX_TERMS,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn real(z: f64, t: f64) -> Result<Self> {
        Self::new(Complex64::new(z, 0.0), t)
    }

    pub fn with_epsilons(mut self, epsilons: Vec<f64>) -> Result<Self> {
        self.epsilons = epsilons;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z.re > -1.0 && self.z.re < 0.0) {
            return Err(Error::param("z", format!("Re z = {} not in (-1, 0)", self.z.re)));
        }
        if !(self.t != 0.0 && self.t.abs() <= std::f64::consts::PI) {
            return Err(Error::param("t", format!("{} not in [-π, π] \\ {{0}}", self.t)));
        }
        if self.epsilons.len() < 2 {
            return Err(Error::param("epsilons", "need at least two Abel parameters"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("epsilons", "schedule must be strictly decreasing"));
        }
        let smallest = *self.epsilons.last().unwrap();
        if smallest < MIN_EPSILON {
            return Err(Error::param(
                "epsilons",
                format!("smallest ε = {smallest:e} below {MIN_EPSILON:e}"),
            ));
        }
        if self.terms() > self.max_terms {
            return Err(Error::param(
                "max_terms",
                format!("{} terms needed, cap is {}", self.terms(), self.max_terms),
            ));
        }
        Ok(())
    }

    /// Truncation point: `e^{-ε_min N} ≤ TAIL_CUTOFF`.
    pub fn terms(&self) -> usize {
        let smallest = self.epsilons.last().copied().unwrap_or(1.0);
        (-TAIL_CUTOFF.ln() / smallest).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Absolute error estimate of the extrapolation.
    pub error: f64,
}

/// Abel sums `Σ_{k=1}^{N} k^z e^{-itk} e^{-εk}` for every ε of the query.
pub fn abel_sums(q: &SeriesQuery) -> Vec<Complex64> {
    const RESYNC: usize = 4096;
    let n_terms = q.terms();
    let mut sums = vec![Complex64::new(0.0, 0.0); q.epsilons.len()];
    let steps: Vec<f64> = q.epsilons.iter().map(|e| (-e).exp()).collect();
    let mut damping = steps.clone();
    for k in 1..=n_terms {
        let kf = k as f64;
        let term = (q.z * kf.ln() - Complex64::new(0.0, q.t * kf)).exp();
        if k % RESYNC == 0 {
            for (d, e) in damping.iter_mut().zip(&q.epsilons) {
                *d = (-e * kf).exp();
            }
        }
        for (s, d) in sums.iter_mut().zip(&damping) {
            *s += term * *d;
        }
        for (d, step) in damping.iter_mut().zip(&steps) {
            *d *= step;
        }
    }
    sums
}

/// Neville extrapolation of `(x_i, y_i)` to `x = 0`.
fn extrapolate_to_zero(x: &[f64], y: &[Complex64]) -> Complex64 {
    let mut p = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (x[i], x[i + level]);
            p[i] = (p[i + 1] * xa - p[i] * xb) / (xa - xb);
        }
    }
    p[0]
}

/// Abel-regularized `S_z(t)`.
pub fn eval_fractional_series(q: &SeriesQuery) -> Result<SeriesValue> {
    q.validate()?;
    let sums = abel_sums(q);
    let full = extrapolate_to_zero(&q.epsilons, &sums);
    // Drop the largest ε: one order lower, closest to zero.
    let reduced = extrapolate_to_zero(&q.epsilons[1..], &sums[1..]);
    let error = (full - reduced).norm();
    if !full.re.is_finite() || !full.im.is_finite() {
        return Err(Error::Accuracy("non-finite Abel extrapolation".into()));
    }
    if error > q.tolerance * full.norm().max(1.0) {
        return Err(Error::Accuracy(format!(
            "Abel extrapolation at z = {}, t = {}: error estimate {error:e} above tolerance {:e}",
            q.z, q.t, q.tolerance
        )));
    }
    Ok(SeriesValue { value: full, error })
}

/// `Γ(z+1)(it)^{-z-1}` on the principal branch, `arg(it) = ±π/2`.
pub fn singular_part(z: Complex64, t: f64) -> Complex64 {
    let arg = FRAC_PI_2.copysign(t);
    let log_it = Complex64::new(t.abs().ln(), arg);
    gamma(z + 1.0) * ((-z - 1.0) * log_it).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularComparison {
    pub t: f64,
    pub series: Complex64,
    pub singular: Complex64,
    /// `series − singular`, the smooth part `b(t)`.
    pub remainder: Complex64,
    pub error: f64,
}

pub fn smooth_remainder(q: &SeriesQuery) -> Result<SingularComparison> {
    let s = eval_fractional_series(q)?;
    let singular = singular_part(q.z, q.t);
    Ok(SingularComparison {
        t: q.t,
        series: s.value,
        singular,
        remainder: s.value - singular,
        error: s.error,
    })
}

/// Log-spaced points `10^{a + (b-a) j/(count-1)}`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|j| {
            let s = if count > 1 { j as f64 / (count - 1) as f64 } else { 0.0 };
            10f64.powf(a + (b - a) * s)
        })
        .collect()
}

/// Least-squares slope of `ln|S_z(t)|` against `ln t`. The singular part
/// predicts `-Re z - 1`.
pub fn blow_up_slope(z: Complex64, times: &[f64]) -> Result<f64> {
    let mut mags = Vec::with_capacity(times.len());
    for &t in times {
        mags.push(eval_fractional_series(&SeriesQuery::new(z, t)?)?.value.norm());
    }
    crate::fit::log_log(times, &mags)
        .map(|f| f.slope)
        .ok_or_else(|| Error::param("times", "need at least two distinct times"))
}
