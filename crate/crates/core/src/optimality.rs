//! The coherent-state ensemble
//!
//! `γ₀ = (2π)^{-n} ∬ e^{-x²/L² - ξ²/μ} |F_{x,ξ}⟩⟨F_{x,ξ}| dx dξ`,
//! `F_{x,ξ}(z) = (2πβ)^{-n/4} e^{-(z-x)²/4β} e^{iξ·z}`,
//!
//! whose density, mixed norm, trace and Schatten bound are all explicit.
//! With `D(t) = (4β² + 2βL²) cos² 2t + (1 + 2μβ) sin² 2t` the density is
//!
//! `ρ(t, z) = (2π)^{-n} (2πβμL²/D)^{n/2} e^{-2β|z|²/D}`,
//!
//! normalized so that `∫ρ = N = (μL²)^{n/2} / 2^n`. For `2/p + n/q = n`,
//!
//! `‖ρ‖^p_{L^p_t L^q_x} = C^{p/q} √2 π β / (√(2β² + βL²) √(1 + 2μβ))`,
//! `C = [(2π)^{-q/2} 2^{-1/2} (π/q)^{1/2} (μL²)^{q/2}]^n`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::{mixed_norm, DensityField, MixedNormSpec, SpaceGrid};
use crate::error::{Error, Result};
use crate::fit::{least_squares, LineFit};
use crate::hermite::{analyze, fill_hermite_functions, HermiteBasis1D, MultiIndexSet, PointSet};
use crate::quadrature::build_quadrature;

/// Minimum of `βμ` and `L²/β` for the asymptotic regime `1/μ ≪ β ≪ L²`.
pub const REGIME_RATIO: f64 = 10.0;
/// Largest band limit and phase-space rule accepted by [`gamma0_matrix`].
pub const MAX_MATRIX_BAND: usize = 128;
pub const MAX_PHASE_NODES: usize = 128;
/// Relative trace deficit of the matrix oracle that counts as unresolved.
pub const MAX_TRACE_DEFICIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    pub beta: f64,
    pub l: f64,
    pub mu: f64,
    pub dim: usize,
}

impl CoherentParams {
    pub fn new(beta: f64, l: f64, mu: f64, dim: usize) -> Result<Self> {
        for (name, v) in [("beta", beta), ("L", l), ("mu", mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive and finite")));
            }
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::param("n", format!("dimension {dim} not in {{1, 2}}")));
        }
        Ok(Self { beta, l, mu, dim })
    }

    /// `β = 1`, `μ = L² = 10^m`.
    pub fn scaling_point(m: f64, dim: usize) -> Result<Self> {
        let s = 10f64.powf(m);
        Self::new(1.0, s.sqrt(), s, dim)
    }

    pub fn in_regime(&self) -> bool {
        self.beta * self.mu >= REGIME_RATIO && self.l * self.l / self.beta >= REGIME_RATIO
    }

    /// `D(t)` for one coordinate.
    pub fn denominator(&self, t: f64) -> f64 {
        let (s, c) = (2.0 * t).sin_cos();
        let (a, b) = self.denominator_coefficients();
        a * c * c + b * s * s
    }

    /// Coefficients `(4β² + 2βL², 1 + 2μβ)` of `cos² 2t` and `sin² 2t` in `D`.
    pub fn denominator_coefficients(&self) -> (f64, f64) {
        let beta = self.beta;
        (
            4.0 * beta * beta + 2.0 * beta * self.l * self.l,
            1.0 + 2.0 * self.mu * beta,
        )
    }

    fn mu_l2(&self) -> f64 {
        self.mu * self.l * self.l
    }
}

/// `F_{x,ξ}` sampled at `points`.
pub fn coherent_state(
    x: &[f64],
    xi: &[f64],
    beta: f64,
    points: &PointSet,
) -> Result<Vec<Complex64>> {
    let n = points.dim();
    if x.len() != n || xi.len() != n {
        return Err(Error::Shape(format!(
            "centre of dimension {}/{} for points of dimension {n}",
            x.len(),
            xi.len()
        )));
    }
    if !(beta > 0.0) {
        return Err(Error::param("beta", "must be positive"));
    }
    let norm = (2.0 * PI * beta).powf(-(n as f64) / 4.0);
    Ok(points
        .iter()
        .map(|z| {
            let mut log_mod = 0.0;
            let mut phase = 0.0;
            for a in 0..n {
                log_mod -= (z[a] - x[a]).powi(2) / (4.0 * beta);
                phase += xi[a] * z[a];
            }
            Complex64::from_polar(norm * log_mod.exp(), phase)
        })
        .collect())
}

/// `|e^{itH} F_{x,ξ}(z)|`.
pub fn evolved_coherent_magnitude(x: &[f64], xi: &[f64], beta: f64, t: f64, z: &[f64]) -> f64 {
    let (s, c) = (2.0 * t).sin_cos();
    let d0 = 4.0 * beta * beta * c * c + s * s;
    let n = z.len() as f64;
    let shift: f64 = z
        .iter()
        .zip(x)
        .zip(xi)
        .map(|((z, x), xi)| (z - x * c + xi * s).powi(2))
        .sum();
    (2.0 * beta / (PI * d0)).powf(n / 4.0) * (-beta * shift / d0).exp()
}

/// `ρ(t, z)` of the ensemble.
pub fn closed_form_density(params: &CoherentParams, t: f64, z: &[f64]) -> f64 {
    let d = params.denominator(t);
    let n = params.dim as f64;
    let r2: f64 = z.iter().map(|v| v * v).sum();
    (2.0 * PI).powf(-n)
        * (2.0 * PI * params.beta * params.mu_l2() / d).powf(n / 2.0)
        * (-2.0 * params.beta * r2 / d).exp()
}

fn strichartz_pair(params: &CoherentParams, p: f64, q: f64) -> Result<MixedNormSpec> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::param("q", format!("{q} must be finite and above 1")));
    }
    MixedNormSpec::new(params.dim, p, q)
}

/// `ln C` of the module docs, i.e. `ln ‖ρ(t)‖_q^q − (n(q−1)/2) ln(β/D)`.
fn log_space_constant(params: &CoherentParams, q: f64) -> f64 {
    let n = params.dim as f64;
    n * (-(q / 2.0) * (2.0 * PI).ln() - 0.5 * 2f64.ln()
        + 0.5 * (PI / q).ln()
        + (q / 2.0) * params.mu_l2().ln())
}

/// `‖ρ‖_{L^p_t L^q_x}` on `[-π, π] × ℝⁿ` in closed form.
pub fn closed_form_mixed_norm(params: &CoherentParams, p: f64, q: f64) -> Result<f64> {
    strichartz_pair(params, p, q)?;
    let beta = params.beta;
    let l2 = params.l * params.l;
    let time_factor = 2f64.sqrt() * PI * beta
        / ((2.0 * beta * beta + beta * l2).sqrt() * (1.0 + 2.0 * params.mu * beta).sqrt());
    let log_p = (p / q) * log_space_constant(params, q) + time_factor.ln();
    Ok((log_p / p).exp())
}

/// Leading term of [`closed_form_mixed_norm`] when `1/μ ≪ β ≪ L²`:
/// `(π c^{p/q})^{1/p} (μL²)^{n/2 − 1/(2p)}` with `C = c (μL²)^{nq/2}`.
pub fn asymptotic_mixed_norm(params: &CoherentParams, p: f64, q: f64) -> Result<f64> {
    strichartz_pair(params, p, q)?;
    let n = params.dim as f64;
    let log_c = log_space_constant(params, q) - n * (q / 2.0) * params.mu_l2().ln();
    let log_prefactor = (PI.ln() + (p / q) * log_c) / p;
    Ok((log_prefactor + (n / 2.0 - 1.0 / (2.0 * p)) * params.mu_l2().ln()).exp())
}

/// `N = Tr γ₀ = (μL²)^{n/2} / 2^n`.
pub fn trace_n(params: &CoherentParams) -> f64 {
    let n = params.dim as i32;
    params.mu_l2().powf(n as f64 / 2.0) / 2f64.powi(n)
}

/// `(r^{-n} N)^{1/r} ≥ ‖γ₀‖_{𝔖^r}`.
pub fn berezin_bound(params: &CoherentParams, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::param("r", format!("Schatten exponent {r} below 1")));
    }
    if r.is_infinite() {
        return Ok(1.0);
    }
    Ok((r.powf(-(params.dim as f64)) * trace_n(params)).powf(1.0 / r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSummary {
    pub trace: f64,
    pub mixed_norm: f64,
    pub berezin_bound: f64,
    /// `mixed_norm / berezin_bound`, a lower bound for the Strichartz quotient.
    pub ratio: f64,
}

pub fn ensemble_summary(params: &CoherentParams, p: f64, q: f64, r: f64) -> Result<EnsembleSummary> {
    let mixed_norm = closed_form_mixed_norm(params, p, q)?;
    let bound = berezin_bound(params, r)?;
    Ok(EnsembleSummary {
        trace: trace_n(params),
        mixed_norm,
        berezin_bound: bound,
        ratio: mixed_norm / bound,
    })
}

/// Gauss–Hermite nodes and weights for `∫ e^{-x²/a²} g(x) dx ≈ Σ w_i g(x_i)`.
fn scaled_rule(nodes: usize, scale: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = build_quadrature(nodes)?;
    Ok((
        rule.nodes().iter().map(|s| scale * s).collect(),
        rule.weights().iter().map(|w| scale * w).collect(),
    ))
}

/// `ρ(t, z)` by a `nodes × nodes` Gauss–Hermite product rule over phase
/// space applied to the closed-form magnitude (n = 1).
pub fn phase_space_density(params: &CoherentParams, t: f64, z: f64, nodes: usize) -> Result<f64> {
    if params.dim != 1 {
        return Err(Error::param("n", "phase-space oracle is one-dimensional"));
    }
    let (xs, wx) = scaled_rule(nodes, params.l)?;
    let (ks, wk) = scaled_rule(nodes, params.mu.sqrt())?;
    let mut sum = 0.0;
    for (x, a) in xs.iter().zip(&wx) {
        for (k, b) in ks.iter().zip(&wk) {
            let m = evolved_coherent_magnitude(&[*x], &[*k], params.beta, t, &[z]);
            sum += a * b * m * m;
        }
    }
    Ok(sum / (2.0 * PI))
}

/// The mixed norm by numerical integration of [`closed_form_density`]:
/// periodic trapezoid in t, Gauss–Hermite in z stretched to the widest
/// time slice.
pub fn mixed_norm_by_quadrature(
    params: &CoherentParams,
    p: f64,
    q: f64,
    time_points: usize,
    space_nodes: usize,
) -> Result<f64> {
    let spec = strichartz_pair(params, p, q)?;
    if time_points == 0 {
        return Err(Error::param("time_points", "need at least one time sample"));
    }
    let (a, b) = params.denominator_coefficients();
    let stretch = 2.0 * params.beta * q / a.max(b);
    let grid = SpaceGrid::gauss_hermite(params.dim, space_nodes, stretch)?;
    let times: Vec<f64> = (0..time_points)
        .map(|i| -PI + 2.0 * PI * i as f64 / time_points as f64)
        .collect();
    let mut values = Vec::with_capacity(times.len() * grid.len());
    for &t in &times {
        values.extend(grid.points.iter().map(|z| closed_form_density(params, t, z)));
    }
    let field = DensityField {
        traces: vec![trace_n(params); times.len()],
        times,
        time_step: 2.0 * PI / time_points as f64,
        grid,
        values,
    };
    mixed_norm(&field, &spec)
}

/// Matrix of `γ₀` in `Φ_0 … Φ_K` (n = 1), assembled as `B Bᴴ` from a
/// `nodes × nodes` phase-space rule with `x = L s`, `ξ = √μ s`.
#[derive(Debug, Clone)]
pub struct Gamma0Matrix {
    pub index: Arc<MultiIndexSet>,
    pub matrix: DMatrix<Complex64>,
    pub trace: f64,
    /// `(N − Tr) / N`.
    pub trace_deficit: f64,
}

pub fn gamma0_matrix(params: &CoherentParams, k_max: usize, nodes: usize) -> Result<Gamma0Matrix> {
    if params.dim != 1 {
        return Err(Error::param("n", "matrix oracle is one-dimensional"));
    }
    if k_max > MAX_MATRIX_BAND {
        return Err(Error::param("K", format!("{k_max} above {MAX_MATRIX_BAND}")));
    }
    if nodes == 0 || nodes > MAX_PHASE_NODES {
        return Err(Error::param("nodes", format!("{nodes} not in 1..={MAX_PHASE_NODES}")));
    }
    let index = Arc::new(MultiIndexSet::new(1, k_max)?);
    let basis = HermiteBasis1D::new(k_max, 2 * k_max + 1)?;
    let grid = basis.grid(1);
    let (xs, wx) = scaled_rule(nodes, params.l)?;
    let (ks, wk) = scaled_rule(nodes, params.mu.sqrt())?;

    let mut b = DMatrix::<Complex64>::zeros(index.len(), nodes * nodes);
    for (i, (x, a)) in xs.iter().zip(&wx).enumerate() {
        for (j, (k, w)) in ks.iter().zip(&wk).enumerate() {
            let weight = a * w / (2.0 * PI);
            if weight == 0.0 {
                continue;
            }
            let samples = coherent_state(&[*x], &[*k], params.beta, &grid)?;
            let overlaps = analyze(&samples, &basis, &index)?;
            let col = i * nodes + j;
            let s = weight.sqrt();
            for (row, c) in overlaps.coeffs().iter().enumerate() {
                b[(row, col)] = c * s;
            }
        }
    }
    let matrix = &b * b.adjoint();
    let trace: f64 = (0..matrix.nrows()).map(|i| matrix[(i, i)].re).sum();
    let n = trace_n(params);
    let trace_deficit = (n - trace) / n;
    if trace_deficit > MAX_TRACE_DEFICIT {
        return Err(Error::Resolution(format!(
            "band K = {k_max} captures only {:.1}% of Tr γ₀ = {n}",
            100.0 * trace / n
        )));
    }
    Ok(Gamma0Matrix {
        index,
        matrix,
        trace,
        trace_deficit,
    })
}

impl Gamma0Matrix {
    /// `ρ(t, z) = Σ_{jk} A_{jk} e^{-it(λ_j - λ_k)} Φ_j(z) Φ_k(z)`.
    pub fn density(&self, t: f64, z: f64) -> f64 {
        let k1 = self.index.len();
        let mut phi = vec![0.0; k1];
        fill_hermite_functions(z, &mut phi);
        let e: Vec<Complex64> = phi
            .iter()
            .enumerate()
            .map(|(j, f)| Complex64::from_polar(*f, -t * self.index.eigenvalue(j)))
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..k1 {
            let mut row = Complex64::new(0.0, 0.0);
            for k in 0..k1 {
                row += self.matrix[(j, k)] * e[k].conj();
            }
            sum += e[j] * row;
        }
        sum.re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// One row of the scaling table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub params: CoherentParams,
    pub summary: EnsembleSummary,
}

pub fn scaling_points(
    params: &[CoherentParams],
    p: f64,
    q: f64,
    r: f64,
) -> Result<Vec<ScalingPoint>> {
    params
        .iter()
        .map(|pr| {
            Ok(ScalingPoint {
                params: *pr,
                summary: ensemble_summary(pr, p, q, r)?,
            })
        })
        .collect()
}

/// Least-squares fit of `ln(ratio)` against `ln N`. The exponent predicted
/// for the ensemble is `(1 + q)/(2q) − 1/r`.
pub fn scaling_exponent_fit(params: &[CoherentParams], p: f64, q: f64, r: f64) -> Result<LineFit> {
    if params.len() < 5 {
        return Err(Error::param("params", "need at least five parameter points"));
    }
    if let Some(bad) = params.iter().find(|pr| !pr.in_regime()) {
        return Err(Error::Regime(format!(
            "β = {}, L = {}, μ = {} violates 1/μ ≪ β ≪ L² (ratio {REGIME_RATIO})",
            bad.beta, bad.l, bad.mu
        )));
    }
    let points = scaling_points(params, p, q, r)?;
    let ln_n: Vec<f64> = points.iter().map(|s| s.summary.trace.ln()).collect();
    let span = ln_n.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - ln_n.iter().copied().fold(f64::INFINITY, f64::min);
    if span < 2.0 * 10f64.ln() {
        return Err(Error::param("params", "N must span at least two decades"));
    }
    let ln_ratio: Vec<f64> = points.iter().map(|s| s.summary.ratio.ln()).collect();
    least_squares(&ln_n, &ln_ratio).ok_or_else(|| Error::param("params", "degenerate N values"))
}

pub fn predicted_exponent(q: f64, r: f64) -> f64 {
    (1.0 + q) / (2.0 * q) - 1.0 / r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::schatten_norm_matrix;
    use crate::hermite::SpectralState;
    use crate::propagator::evolve_spectral;

    fn params(beta: f64, l: f64, mu: f64) -> CoherentParams {
        CoherentParams::new(beta, l, mu, 1).unwrap()
    }

    /// Trapezoid on a uniform grid wide enough for Gaussian tails.
    fn uniform_integral(f: impl Fn(f64) -> f64, half_width: f64, n: usize) -> f64 {
        let h = 2.0 * half_width / n as f64;
        (0..=n).map(|i| f(-half_width + i as f64 * h) * h).sum()
    }

    #[test]
    fn parameter_validation() {
        assert!(CoherentParams::new(0.0, 1.0, 1.0, 1).is_err());
        assert!(CoherentParams::new(1.0, -1.0, 1.0, 1).is_err());
        assert!(CoherentParams::new(1.0, 1.0, 1.0, 3).is_err());
        assert!(params(1.0, 10f64.sqrt(), 10.0).in_regime());
        assert!(!params(0.5, 2.0, 2.0).in_regime());
    }

    #[test]
    fn coherent_states_are_normalized() {
        let basis = HermiteBasis1D::new(0, 200).unwrap();
        let grid = basis.grid(1);
        let w = basis.grid_weights(1);
        for (x, xi, beta) in [(0.0, 0.0, 0.5), (1.0, 2.0, 0.3), (-0.5, -1.0, 0.8)] {
            let f = coherent_state(&[x], &[xi], beta, &grid).unwrap();
            let norm: f64 = f.iter().zip(&w).map(|(v, w)| w * v.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-10, "{norm}");
        }
    }

    #[test]
    fn half_beta_ground_state() {
        let pts = PointSet::uniform(-4.0, 4.0, 17);
        let f = coherent_state(&[0.0], &[0.0], 0.5, &pts).unwrap();
        for (z, v) in pts.iter().zip(&f) {
            let phi0 = PI.powf(-0.25) * (-z[0] * z[0] / 2.0).exp();
            assert!((v - phi0).norm() < 1e-12);
        }
        let a = coherent_state(&[0.3], &[0.0], 0.7, &pts).unwrap();
        let b = coherent_state(&[0.3], &[4.0], 0.7, &pts).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u.norm() - v.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn magnitude_at_time_zero_and_at_half_beta() {
        let pts = PointSet::uniform(-3.0, 3.0, 13);
        let f = coherent_state(&[0.4], &[1.3], 0.3, &pts).unwrap();
        for (z, v) in pts.iter().zip(&f) {
            let m = evolved_coherent_magnitude(&[0.4], &[1.3], 0.3, 0.0, z);
            assert!((m - v.norm()).abs() < 1e-14);
        }
        for t in [0.2, 1.0, 2.5] {
            let (s, c) = (2.0 * t as f64).sin_cos();
            for z in [-1.0, 0.0, 0.8] {
                let m = evolved_coherent_magnitude(&[0.7], &[-0.4], 0.5, t, &[z]);
                let expect = PI.powf(-0.25) * (-(z - 0.7 * c - 0.4 * s).powi(2) / 2.0).exp();
                assert!((m - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn magnitude_matches_spectral_evolution() {
        let (x, xi, beta, t) = (1.0, 0.5, 0.2, 0.4);
        let k = 96;
        let basis = HermiteBasis1D::with_default_rule(k).unwrap();
        let index = Arc::new(MultiIndexSet::new(1, k).unwrap());
        let f = coherent_state(&[x], &[xi], beta, &basis.grid(1)).unwrap();
        let state = analyze(&f, &basis, &index).unwrap();
        // e^{itH} is the spectral flow run backwards.
        let evolved: SpectralState = evolve_spectral(&state, -t);
        let pts = PointSet::uniform(-3.0, 3.0, 25);
        let u = crate::hermite::synthesize(&evolved, &pts).unwrap();
        for (z, v) in pts.iter().zip(&u) {
            let m = evolved_coherent_magnitude(&[x], &[xi], beta, t, z);
            assert!((m - v.norm()).abs() < 1e-6, "z={}: {m} vs {}", z[0], v.norm());
        }
    }

    #[test]
    fn density_integrates_to_trace() {
        for (beta, l, mu, t) in [(0.5, 3.0, 4.0, 0.4), (1.0, 2.0, 0.7, 1.9)] {
            let p = params(beta, l, mu);
            let total = uniform_integral(|z| closed_form_density(&p, t, &[z]), 60.0, 60_000);
            assert!((total / trace_n(&p) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn density_matches_phase_space_quadrature() {
        let p = params(0.5, 3.0, 4.0);
        let direct = phase_space_density(&p, 0.4, 0.7, 96).unwrap();
        let closed = closed_form_density(&p, 0.4, &[0.7]);
        assert!((direct / closed - 1.0).abs() < 1e-6);

        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let t = -PI + 2.0 * PI * next();
            let z = -3.0 + 6.0 * next();
            let direct = phase_space_density(&p, t, z, 96).unwrap();
            let closed = closed_form_density(&p, t, &[z]);
            assert!((direct / closed - 1.0).abs() < 1e-6, "t={t} z={z}");
        }
    }

    #[test]
    fn density_at_time_zero_and_periodicity() {
        let p = params(0.5, 3.0, 4.0);
        let (beta, l2, mu) = (0.5, 9.0, 4.0);
        let expect = (2.0 * PI * beta * mu * l2 / (4.0 * beta * beta + 2.0 * beta * l2)).sqrt() / (2.0 * PI);
        assert!((closed_form_density(&p, 0.0, &[0.0]) - expect).abs() < 1e-15);
        for t in [0.1, 0.9, 2.0] {
            for z in [0.0, 1.5] {
                let a = closed_form_density(&p, t, &[z]);
                assert!((a - closed_form_density(&p, t + PI, &[z])).abs() < 1e-14 * a);
                // D has period π/2; a shift by π/4 exchanges the
                // coefficients of cos² and sin².
                let b = closed_form_density(&p, t + PI / 2.0, &[z]);
                assert!((a - b).abs() < 1e-13 * a);
                let (ca, cb) = p.denominator_coefficients();
                let (s, c) = (2.0 * t).sin_cos();
                let swapped = ca * s * s + cb * c * c;
                let by_formula = (2.0 * PI * beta * mu * l2 / swapped).sqrt() / (2.0 * PI)
                    * (-2.0 * beta * z * z / swapped).exp();
                let shifted = closed_form_density(&p, t + PI / 4.0, &[z]);
                assert!((shifted - by_formula).abs() < 1e-13 * by_formula);
            }
        }
    }

    #[test]
    fn two_dimensional_density_tensorizes() {
        let p1 = params(0.7, 2.0, 3.0);
        let p2 = CoherentParams::new(0.7, 2.0, 3.0, 2).unwrap();
        let t = 0.6;
        let v = closed_form_density(&p2, t, &[0.3, -0.9]);
        let w = closed_form_density(&p1, t, &[0.3]) * closed_form_density(&p1, t, &[-0.9]);
        assert!((v - w).abs() < 1e-14 * v);
        assert!((trace_n(&p2) - trace_n(&p1).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn mixed_norm_matches_direct_quadrature() {
        // Independent oracle: trapezoid in t and in z on uniform grids.
        let p = params(0.5, 2.0, 2.0);
        let (pp, q) = (3.0, 3.0);
        let nt = 2000;
        let mut acc = 0.0;
        for i in 0..nt {
            let t = -PI + 2.0 * PI * i as f64 / nt as f64;
            let space = uniform_integral(|z| closed_form_density(&p, t, &[z]).powf(q), 20.0, 20_000);
            acc += (2.0 * PI / nt as f64) * space.powf(pp / q);
        }
        let oracle = acc.powf(1.0 / pp);
        let closed = closed_form_mixed_norm(&p, pp, q).unwrap();
        assert!((closed / oracle - 1.0).abs() < 1e-6, "{closed} vs {oracle}");
        let quad = mixed_norm_by_quadrature(&p, pp, q, 512, 64).unwrap();
        assert!((quad / closed - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mixed_norm_rejects_off_line_exponents() {
        let p = params(0.5, 2.0, 2.0);
        assert!(closed_form_mixed_norm(&p, 2.0, 3.0).is_err());
        assert!(closed_form_mixed_norm(&p, f64::INFINITY, 1.0).is_err());
        let p2 = CoherentParams::new(0.5, 2.0, 2.0, 2).unwrap();
        assert!(closed_form_mixed_norm(&p2, 3.0, 1.5).is_ok());
    }

    #[test]
    fn asymptotic_regime() {
        let (pp, q) = (3.0, 3.0);
        let p = params(1.0, 100f64.sqrt(), 100.0);
        let exact = closed_form_mixed_norm(&p, pp, q).unwrap();
        let approx = asymptotic_mixed_norm(&p, pp, q).unwrap();
        assert!((exact / approx - 1.0).abs() < 0.05);

        let a = params(1.0, 1e3f64.sqrt(), 1e3);
        let b = params(1.0, 2e3f64.sqrt(), 1e3);
        let ratio = closed_form_mixed_norm(&b, pp, q).unwrap() / closed_form_mixed_norm(&a, pp, q).unwrap();
        let predicted = 2f64.powf((1.0 + 1.0 / q) / 4.0);
        assert!((ratio / predicted - 1.0).abs() < 0.02);
    }

    #[test]
    fn trace_and_bound_values() {
        let p = params(0.5, 2.0, 2.0);
        assert!((trace_n(&p) - 2f64.sqrt()).abs() < 1e-15);
        let oracle = uniform_integral(
            |x| uniform_integral(|xi| (-x * x / 4.0 - xi * xi / 2.0).exp(), 40.0, 8000),
            40.0,
            8000,
        ) / (2.0 * PI);
        assert!((oracle - trace_n(&p)).abs() < 1e-10);
        assert!((berezin_bound(&p, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((berezin_bound(&p, 2.0).unwrap() - (2f64.sqrt() / 2.0).sqrt()).abs() < 1e-15);
        assert!(berezin_bound(&p, 0.5).is_err());
    }

    #[test]
    fn matrix_oracle() {
        let p = params(0.5, 3.0, 3.0);
        let g = gamma0_matrix(&p, 96, 96).unwrap();
        assert!(g.trace_deficit.abs() < 0.01, "{}", g.trace_deficit);
        assert!(g.min_eigenvalue() >= -1e-10);
        for r in [1.0, 1.5, 2.0, 4.0] {
            let actual = schatten_norm_matrix(&g.matrix, r).unwrap();
            let bound = berezin_bound(&p, r).unwrap();
            assert!(actual <= bound * (1.0 + 1e-10), "r={r}: {actual} vs {bound}");
        }
        for z in [0.0, 0.7, -1.8] {
            let a = g.density(0.4, z);
            let b = closed_form_density(&p, 0.4, &[z]);
            assert!((a / b - 1.0).abs() < 1e-4, "z={z}: {a} vs {b}");
        }
    }

    #[test]
    fn coarse_band_is_a_resolution_error() {
        let p = params(0.5, 6.0, 6.0);
        assert!(matches!(gamma0_matrix(&p, 4, 32), Err(Error::Resolution(_))));
    }

    #[test]
    fn scaling_slopes() {
        let seq: Vec<CoherentParams> =
            (1..=6).map(|m| CoherentParams::scaling_point(m as f64, 1).unwrap()).collect();
        for (q, r) in [(3.0, 2.0), (3.0, 3.0), (3.0, 1.5)] {
            let fit = scaling_exponent_fit(&seq, 3.0, q, r).unwrap();
            assert!((fit.slope - predicted_exponent(q, r)).abs() < 0.05, "q={q} r={r}: {}", fit.slope);
            let rev: Vec<_> = seq.iter().rev().copied().collect();
            let back = scaling_exponent_fit(&rev, 3.0, q, r).unwrap();
            assert!((back.slope - fit.slope).abs() < 1e-12);
        }
        assert!(predicted_exponent(3.0, 1.5).abs() < 1e-15);

        let pts = scaling_points(&seq, 3.0, 3.0, 2.0).unwrap();
        assert!(pts.windows(2).all(|w| w[1].summary.ratio > w[0].summary.ratio));
    }

    #[test]
    fn scaling_fit_preconditions() {
        let mut seq: Vec<CoherentParams> =
            (1..=6).map(|m| CoherentParams::scaling_point(m as f64, 1).unwrap()).collect();
        assert!(scaling_exponent_fit(&seq[..4], 3.0, 3.0, 2.0).is_err());
        seq[0] = params(1.0, 1.0, 1.0);
        assert!(matches!(
            scaling_exponent_fit(&seq, 3.0, 3.0, 2.0),
            Err(Error::Regime(_))
        ));
        let narrow: Vec<CoherentParams> = (0..5)
            .map(|j| CoherentParams::scaling_point(2.0 + 0.2 * j as f64, 1).unwrap())
            .collect();
        assert!(scaling_exponent_fit(&narrow, 3.0, 3.0, 2.0).is_err());
    }
}
