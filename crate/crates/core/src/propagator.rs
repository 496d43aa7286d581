//! The Schrödinger flow `e^{-itH}`.
//!
//! The spectral form multiplies `c_μ` by `e^{-it(2|μ|+n)}` and is exact for
//! every `t`. The Mehler form integrates against the oscillatory kernel
//!
//! `K_t(x, y) = e^{-iπn/4} (2π sin 2t)^{-n/2}
//!              exp[(i/2)(cot 2t (|x|²+|y|²) − 2x·y / sin 2t)]`
//!
//! on `0 < t < π/2`. Other times are reached through
//! `e^{-i(π/2)H} = e^{-iπn/2} P` with `P f(x) = f(-x)`, which only changes the
//! constant phase to `e^{-iπn(2k+1)/4}` on the k-th quarter period.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermite::{HermiteBasis1D, PointSet, SpectralState};

pub const DEFAULT_SINGULAR_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Mehler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSpec {
    pub t: f64,
    pub method: Method,
    pub singular_margin: f64,
}

impl PropagatorSpec {
    pub fn spectral(t: f64) -> Self {
        Self {
            t,
            method: Method::Spectral,
            singular_margin: DEFAULT_SINGULAR_MARGIN,
        }
    }

    pub fn mehler(t: f64) -> Result<Self> {
        let spec = Self {
            t,
            method: Method::Mehler,
            singular_margin: DEFAULT_SINGULAR_MARGIN,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::param("t", "time must be finite"));
        }
        if self.method == Method::Mehler {
            check_regular_time(self.t, self.singular_margin)?;
        }
        Ok(())
    }

    /// The evolved function sampled at `targets`, starting from `state`.
    pub fn apply(
        &self,
        state: &SpectralState,
        basis: &HermiteBasis1D,
        targets: &PointSet,
    ) -> Result<Vec<Complex64>> {
        self.validate()?;
        match self.method {
            Method::Spectral => crate::hermite::synthesize(&evolve_spectral(state, self.t), targets),
            Method::Mehler => {
                let samples = crate::hermite::synthesize_on_grid(state, basis)?;
                evolve_kernel_at(
                    &samples,
                    self.t,
                    basis,
                    state.index().dim(),
                    targets,
                    self.singular_margin,
                )
            }
        }
    }
}

/// Distance from `t` to the nearest multiple of π/2.
pub fn distance_to_singular_set(t: f64) -> f64 {
    let r = t.rem_euclid(FRAC_PI_2);
    r.min(FRAC_PI_2 - r)
}

fn check_regular_time(t: f64, margin: f64) -> Result<()> {
    if distance_to_singular_set(t) < margin {
        Err(Error::SingularTime { t, margin })
    } else {
        Ok(())
    }
}

/// `c_μ ↦ e^{-it(2|μ|+n)} c_μ`.
pub fn evolve_spectral(state: &SpectralState, t: f64) -> SpectralState {
    let index = state.index();
    let mut out = state.clone();
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= Complex64::from_polar(1.0, -t * index.eigenvalue(i));
    }
    out
}

/// One-dimensional factor of the kernel, without the `n`-dependent phase.
#[derive(Debug, Clone, Copy)]
struct KernelFactor {
    amplitude: f64,
    cot: f64,
    csc: f64,
    quarter: i64,
}

impl KernelFactor {
    fn new(t: f64) -> Self {
        let s = (2.0 * t).sin();
        Self {
            amplitude: (2.0 * PI * s.abs()).powf(-0.5),
            cot: (2.0 * t).cos() / s,
            csc: 1.0 / s,
            quarter: (t / FRAC_PI_2).floor() as i64,
        }
    }

    fn phase(&self, dim: usize) -> Complex64 {
        let n = dim as f64;
        let k = self.quarter as f64;
        Complex64::from_polar(1.0, -PI * n * (2.0 * k + 1.0) / 4.0)
    }

    /// Exponential part for a single coordinate pair.
    fn oscillation(&self, x: f64, y: f64) -> Complex64 {
        Complex64::from_polar(1.0, 0.5 * (self.cot * (x * x + y * y) - 2.0 * x * y * self.csc))
    }
}

/// `K_t(x, y)` for `x, y ∈ ℝⁿ`.
pub fn mehler_kernel(x: &[f64], y: &[f64], t: f64, margin: f64) -> Result<Complex64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Shape(format!(
            "kernel arguments of dimensions {} and {}",
            x.len(),
            y.len()
        )));
    }
    check_regular_time(t, margin)?;
    let f = KernelFactor::new(t);
    let dim = x.len();
    let mut value = f.phase(dim) * f.amplitude.powi(dim as i32);
    for (a, b) in x.iter().zip(y) {
        value *= f.oscillation(*a, *b);
    }
    Ok(value)
}

/// `u(t, x_i) = Σ_j w̃_j K_t(x_i, x_j) f(x_j)` on the tensor grid of `basis`.
///
/// The data are expected to decay at least like `e^{-x²/4}`; the rule is
/// then resolving the integrand.
pub fn evolve_kernel(
    samples: &[Complex64],
    t: f64,
    basis: &HermiteBasis1D,
    dim: usize,
    margin: f64,
) -> Result<Vec<Complex64>> {
    evolve_kernel_at(samples, t, basis, dim, &basis.grid(dim), margin)
}

/// As [`evolve_kernel`], evaluating the result at arbitrary `targets`.
pub fn evolve_kernel_at(
    samples: &[Complex64],
    t: f64,
    basis: &HermiteBasis1D,
    dim: usize,
    targets: &PointSet,
    margin: f64,
) -> Result<Vec<Complex64>> {
    check_regular_time(t, margin)?;
    let m = basis.len();
    if !(1..=2).contains(&dim) || samples.len() != m.pow(dim as u32) {
        return Err(Error::Shape(format!(
            "{} samples for a {m}-point rule in dimension {dim}",
            samples.len()
        )));
    }
    if targets.dim() != dim {
        return Err(Error::Shape(format!(
            "targets of dimension {} for dimension {dim}",
            targets.dim()
        )));
    }
    let f = KernelFactor::new(t);
    let nodes = basis.nodes();
    let w = basis.rule().scaled_weights();
    let scale = f.phase(dim) * f.amplitude.powi(dim as i32);

    // Row of weighted 1D kernel values against all nodes.
    let row = |x: f64| -> Vec<Complex64> {
        nodes
            .iter()
            .zip(w)
            .map(|(&y, &wy)| f.oscillation(x, y) * wy)
            .collect()
    };

    Ok(targets
        .iter()
        .map(|p| {
            let sum: Complex64 = match dim {
                1 => row(p[0]).iter().zip(samples).map(|(k, s)| k * s).sum(),
                _ => {
                    let r1 = row(p[0]);
                    let r2 = row(p[1]);
                    r1.iter()
                        .enumerate()
                        .map(|(j1, a)| {
                            let inner: Complex64 = r2
                                .iter()
                                .zip(&samples[j1 * m..(j1 + 1) * m])
                                .map(|(b, s)| b * s)
                                .sum();
                            a * inner
                        })
                        .sum()
                }
            };
            scale * sum
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::random_coefficients;
    use crate::hermite::{synthesize, synthesize_on_grid, MultiIndexSet};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_state(dim: usize, k: usize, seed: u64) -> SpectralState {
        let index = Arc::new(MultiIndexSet::new(dim, k).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = random_coefficients(index.len(), &mut rng);
        SpectralState::new(index, coeffs).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let s = random_state(1, 10, 1);
        assert_eq!(evolve_spectral(&s, 0.0), s);
    }

    #[test]
    fn ground_state_picks_up_single_phase() {
        let index = Arc::new(MultiIndexSet::new(1, 3).unwrap());
        let s = SpectralState::basis_vector(index, &[0]).unwrap();
        for t in [0.1, 1.0, -2.5] {
            let e = evolve_spectral(&s, t);
            assert!((e.coeffs()[0] - Complex64::from_polar(1.0, -t)).norm() < 1e-15);
        }
    }

    #[test]
    fn half_period_density_is_periodic() {
        let basis = HermiteBasis1D::with_default_rule(20).unwrap();
        let s = random_state(1, 20, 4);
        for t in [0.2, 0.9, 2.0] {
            let a = synthesize_on_grid(&evolve_spectral(&s, t), &basis).unwrap();
            let b = synthesize_on_grid(&evolve_spectral(&s, t + PI), &basis).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x.norm_sqr() - y.norm_sqr()).abs() < 1e-12);
            }
        }
        // t = π multiplies every coefficient by e^{-iπn}
        let e = evolve_spectral(&s, PI);
        for (a, b) in e.coeffs().iter().zip(s.coeffs()) {
            assert!((a + b).norm() < 1e-13);
        }
    }

    #[test]
    fn kernel_modulus() {
        let t: f64 = 0.3;
        let expect = (2.0 * PI * (2.0 * t).sin()).powf(-0.5);
        for (x, y) in [(0.0, 0.0), (1.2, -3.0), (5.0, 4.5)] {
            let k = mehler_kernel(&[x], &[y], t, DEFAULT_SINGULAR_MARGIN).unwrap();
            assert!((k.norm() / expect - 1.0).abs() < 1e-12);
        }
        let k = mehler_kernel(&[1.0, -0.5], &[0.2, 2.0], 1.1, 1e-2).unwrap();
        let expect = 1.0 / (2.0 * PI * (2.2f64).sin().abs());
        assert!((k.norm() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_at_quarter_period() {
        let t = PI / 4.0;
        for (x, y) in [(0.7, -1.1), (2.0, 3.0)] {
            let k = mehler_kernel(&[x], &[y], t, 1e-2).unwrap();
            let expect = Complex64::from_polar((2.0 * PI).powf(-0.5), -PI / 4.0 - x * y);
            assert!((k - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn kernel_rejects_singular_times() {
        for t in [0.0, 0.005, PI / 2.0 + 0.001, -PI] {
            assert!(matches!(
                mehler_kernel(&[0.0], &[0.0], t, 1e-2),
                Err(Error::SingularTime { .. })
            ));
        }
        assert!(PropagatorSpec::mehler(PI).is_err());
    }

    #[test]
    fn kernel_applied_to_ground_state() {
        let basis = HermiteBasis1D::new(64, 129).unwrap();
        let index = Arc::new(MultiIndexSet::new(1, 64).unwrap());
        let phi0 = SpectralState::basis_vector(index, &[0]).unwrap();
        let samples = synthesize_on_grid(&phi0, &basis).unwrap();
        let t = 0.3;
        let targets = PointSet::uniform(-6.0, 6.0, 121);
        let kernel = evolve_kernel_at(&samples, t, &basis, 1, &targets, 1e-2).unwrap();
        let spectral = synthesize(&evolve_spectral(&phi0, t), &targets).unwrap();
        let err = kernel
            .iter()
            .zip(&spectral)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");

        let zero = vec![Complex64::new(0.0, 0.0); basis.len()];
        assert!(evolve_kernel(&zero, t, &basis, 1, 1e-2)
            .unwrap()
            .iter()
            .all(|z| z.norm() == 0.0));
    }

    #[test]
    fn kernel_matches_spectral_for_random_expansion() {
        let state = random_state(1, 32, 11);
        let targets = PointSet::uniform(-6.0, 6.0, 121);
        let basis = HermiteBasis1D::new(64, 129).unwrap();
        let k = PropagatorSpec::mehler(0.7).unwrap().apply(&state, &basis, &targets).unwrap();
        let s = synthesize(&evolve_spectral(&state, 0.7), &targets).unwrap();
        assert!(k.iter().zip(&s).all(|(a, b)| (a - b).norm() < 1e-6));

        // Short times chirp faster than 129 nodes resolve; 4K + 1 nodes do.
        let basis = HermiteBasis1D::new(64, 257).unwrap();
        for t in [0.3, 0.7, 1.2, 2.3, -0.4] {
            let k = PropagatorSpec::mehler(t).unwrap().apply(&state, &basis, &targets).unwrap();
            let s = PropagatorSpec::spectral(t).apply(&state, &basis, &targets).unwrap();
            let err = k.iter().zip(&s).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-6, "t={t}: {err}");
        }
    }

    #[test]
    fn kernel_matches_spectral_in_two_dimensions() {
        let basis = HermiteBasis1D::new(12, 129).unwrap();
        let state = random_state(2, 6, 5);
        let targets = PointSet::new(2, vec![0.0, 0.0, 1.0, -2.0, -0.5, 2.5]).unwrap();
        let t = 1.2;
        let k = PropagatorSpec::mehler(t).unwrap().apply(&state, &basis, &targets).unwrap();
        let s = synthesize(&evolve_spectral(&state, t), &targets).unwrap();
        for (a, b) in k.iter().zip(&s) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn unitary_and_group_law(seed in any::<u64>(), s in -4.0f64..4.0, t in -4.0f64..4.0) {
            let raw = random_state(1, 24, seed);
            let scale = 1.0 / raw.norm_sqr().sqrt();
            let state = SpectralState::new(
                raw.index().clone(),
                raw.coeffs().iter().map(|c| c * scale).collect(),
            ).unwrap();
            let n0 = 1.0;
            let once = evolve_spectral(&state, t);
            prop_assert!((once.norm_sqr().sqrt() - n0).abs() < 1e-14 * n0.max(1.0));
            let twice = evolve_spectral(&evolve_spectral(&state, s), t);
            let direct = evolve_spectral(&state, s + t);
            for (a, b) in twice.coeffs().iter().zip(direct.coeffs()) {
                prop_assert!((a - b).norm() < 1e-13);
            }
        }
    }
}
