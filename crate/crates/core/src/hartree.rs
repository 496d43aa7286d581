//! Rank-J evolution of `i∂_t γ = [H + w⋆ρ_γ, γ]` in one dimension,
//! `γ = Σ_j n_j |u_j⟩⟨u_j|`, by Strang splitting:
//!
//! 1. `u_j ← e^{-iVΔt/2} u_j` with `V = w⋆ρ` from the current state,
//! 2. `u_j ← e^{-iHΔt} u_j` spectrally,
//! 3. `u_j ← e^{-iVΔt/2} u_j` with `V` recomputed.
//!
//! States live in `Φ_0 … Φ_K`. The potential phase is applied at the
//! `K + 1` Gauss–Hermite collocation nodes, where synthesis and analysis are
//! exact inverses, so every sub-step is unitary on coefficients and the
//! phase, being common to all `j`, preserves the Gram matrix. Densities and
//! convolutions use a separate uniform grid on `[-R, R]`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::density::OrthonormalSystem;
use crate::error::{Error, Result};
use crate::hermite::{fill_hermite_functions, HermiteBasis1D, MultiIndexSet};

pub const MIN_HALF_WIDTH: f64 = 8.0;
pub const DEFAULT_BAND_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum InteractionKernel {
    /// `w(x) = amplitude (2πσ²)^{-1/2} e^{-x²/2σ²}`.
    Gaussian { amplitude: f64, width: f64 },
    /// Linear interpolation of samples at `(k − (len−1)/2) spacing`, zero
    /// outside.
    Tabulated { spacing: f64, samples: Vec<f64> },
}

impl InteractionKernel {
    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        let k = InteractionKernel::Gaussian { amplitude, width };
        k.validate()?;
        Ok(k)
    }

    pub fn tabulated(spacing: f64, samples: Vec<f64>) -> Result<Self> {
        let k = InteractionKernel::Tabulated { spacing, samples };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InteractionKernel::Gaussian { amplitude, width } => {
                if !amplitude.is_finite() {
                    return Err(Error::param("amplitude", "must be finite"));
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::param("width", format!("{width} must be positive")));
                }
            }
            InteractionKernel::Tabulated { spacing, samples } => {
                if !(*spacing > 0.0 && spacing.is_finite()) {
                    return Err(Error::param("spacing", format!("{spacing} must be positive")));
                }
                if samples.len() % 2 == 0 {
                    return Err(Error::param(
                        "samples",
                        "need an odd number of samples centred on 0",
                    ));
                }
                if samples.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("samples", "non-finite kernel value"));
                }
                let n = samples.len();
                for i in 0..n / 2 {
                    let (a, b) = (samples[i], samples[n - 1 - i]);
                    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                        return Err(Error::param("samples", "kernel must be even"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            InteractionKernel::Gaussian { amplitude, .. } => *amplitude == 0.0,
            InteractionKernel::Tabulated { samples, .. } => samples.iter().all(|v| *v == 0.0),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InteractionKernel::Gaussian { amplitude, width } => {
                amplitude * (-x * x / (2.0 * width * width)).exp() / (2.0 * PI * width * width).sqrt()
            }
            InteractionKernel::Tabulated { spacing, samples } => {
                let last = samples.len() - 1;
                let s = x.abs() / spacing + last as f64 / 2.0;
                if s > last as f64 {
                    return 0.0;
                }
                if last == 0 {
                    return samples[0];
                }
                let i = (s.floor() as usize).min(last - 1);
                let f = s - i as f64;
                samples[i] * (1.0 - f) + samples[i + 1] * f
            }
        }
    }
}

/// `count` equispaced points on `[-R, R]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub half_width: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(half_width: f64, count: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("half_width", format!("{half_width} must be positive")));
        }
        if count < 2 {
            return Err(Error::param("points", "need at least two grid points"));
        }
        Ok(Self { half_width, count })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.count).map(|i| -self.half_width + i as f64 * h).collect()
    }
}

/// `V(x_i) = Σ_j w(x_i − y_j) ρ(y_j) h` on the grid itself.
pub fn convolve(w: &InteractionKernel, rho: &[f64], grid: &UniformGrid) -> Result<Vec<f64>> {
    convolve_at(w, rho, grid, &grid.points())
}

/// As [`convolve`], evaluated at arbitrary targets.
pub fn convolve_at(
    w: &InteractionKernel,
    rho: &[f64],
    grid: &UniformGrid,
    targets: &[f64],
) -> Result<Vec<f64>> {
    if rho.len() != grid.count {
        return Err(Error::Shape(format!(
            "{} density samples on a {}-point grid",
            rho.len(),
            grid.count
        )));
    }
    let h = grid.spacing();
    let ys = grid.points();
    Ok(targets
        .iter()
        .map(|&x| ys.iter().zip(rho).map(|(y, r)| w.eval(x - y) * r).sum::<f64>() * h)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HartreeConfig {
    pub dt: f64,
    pub steps: usize,
    pub grid: UniformGrid,
    pub interaction: InteractionKernel,
    /// Largest tolerated share of `Σ‖u_j‖²` in the top eighth of the band.
    pub band_tolerance: f64,
}

impl HartreeConfig {
    pub fn new(dt: f64, steps: usize, grid: UniformGrid, interaction: InteractionKernel) -> Self {
        Self {
            dt,
            steps,
            grid,
            interaction,
            band_tolerance: DEFAULT_BAND_TOLERANCE,
        }
    }

    pub fn validate(&self, k_max: usize) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("{} must be positive", self.dt)));
        }
        if self.dt * self.steps as f64 > 2.0 * PI * (1.0 + 1e-12) {
            return Err(Error::param("steps", "total time dt·steps exceeds 2π"));
        }
        if self.grid.half_width < MIN_HALF_WIDTH {
            return Err(Error::param(
                "half_width",
                format!("grid must cover [-{MIN_HALF_WIDTH}, {MIN_HALF_WIDTH}]"),
            ));
        }
        // At least four points per local wavelength 2π/√(2K+1) of Φ_K.
        let max_h = PI / (2.0 * (2.0 * k_max as f64 + 1.0).sqrt());
        if self.grid.spacing() > max_h {
            return Err(Error::param(
                "points",
                format!(
                    "grid spacing {} does not resolve band limit {k_max} (need ≤ {max_h})",
                    self.grid.spacing()
                ),
            ));
        }
        self.interaction.validate()
    }
}

/// Weights and coefficient vectors of `γ = Σ n_j |u_j⟩⟨u_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct HartreeState {
    pub index: Arc<MultiIndexSet>,
    pub weights: Vec<f64>,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl HartreeState {
    /// Embeds a one-dimensional system into the band `Φ_0 … Φ_K`.
    pub fn from_system(system: &OrthonormalSystem, k_max: usize) -> Result<Self> {
        let src = system.index();
        if src.dim() != 1 {
            return Err(Error::param("n", "Hartree evolution is one-dimensional"));
        }
        if src.k_max() > k_max {
            return Err(Error::param(
                "K",
                format!("system uses degree {} above band {k_max}", src.k_max()),
            ));
        }
        let index = Arc::new(MultiIndexSet::new(1, k_max)?);
        let coeffs = system
            .states()
            .iter()
            .map(|s| {
                let mut c = vec![Complex64::new(0.0, 0.0); index.len()];
                c[..s.coeffs().len()].copy_from_slice(s.coeffs());
                c
            })
            .collect();
        Ok(Self {
            index,
            weights: system.weights().to_vec(),
            coeffs,
        })
    }

    pub fn k_max(&self) -> usize {
        self.index.k_max()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum())
            .collect()
    }

    /// `Σ n_j ‖u_j‖²`.
    pub fn trace(&self) -> f64 {
        self.masses().iter().zip(&self.weights).map(|(m, n)| m * n).sum()
    }

    /// `G_jk = ⟨u_j, u_k⟩`.
    pub fn gram(&self) -> Vec<Vec<Complex64>> {
        self.coeffs
            .iter()
            .map(|a| {
                self.coeffs
                    .iter()
                    .map(|b| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
                    .collect()
            })
            .collect()
    }

    /// Frobenius distance between the Gram matrices of two states.
    pub fn gram_distance(&self, other: &Self) -> f64 {
        let (a, b) = (self.gram(), other.gram());
        a.iter()
            .zip(&b)
            .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).norm_sqr()))
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ n_j ⟨u_j, H u_j⟩`.
    pub fn kinetic_energy(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.weights)
            .map(|(c, n)| {
                n * c
                    .iter()
                    .enumerate()
                    .map(|(k, v)| self.index.eigenvalue(k) * v.norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    /// `max_j ‖u_j − v_j‖₂` on coefficients.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub trace: f64,
    /// `max_j |‖u_j‖² − ‖u_j‖²_{previous step}|`.
    pub mass_drift: f64,
    /// Frobenius distance of the Gram matrix from its initial value.
    pub gram_drift: f64,
    pub energy: f64,
    /// Share of the mass in the top eighth of the band.
    pub band_tail: f64,
}

#[derive(Debug, Clone)]
pub struct HartreeRun {
    pub initial: HartreeState,
    pub state: HartreeState,
    /// Entry 0 describes the initial state.
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Precomputed tables for one band limit, grid and interaction.
#[derive(Debug, Clone)]
pub struct HartreeSolver {
    config: HartreeConfig,
    basis: HermiteBasis1D,
    /// `Φ_k(y_p)` on the uniform grid, row-major `(K+1) × P`.
    grid_table: Vec<f64>,
    /// `w(x_m − y_p) h` from grid to collocation nodes, `M × P`.
    to_nodes: Vec<f64>,
    /// `w(y_i − y_p) h` on the grid, `P × P`.
    on_grid: Vec<f64>,
}

impl HartreeSolver {
    pub fn new(k_max: usize, config: HartreeConfig) -> Result<Self> {
        config.validate(k_max)?;
        let basis = HermiteBasis1D::new(k_max, k_max + 1)?;
        let ys = config.grid.points();
        let p = ys.len();
        let h = config.grid.spacing();
        let mut grid_table = vec![0.0; (k_max + 1) * p];
        let mut phi = vec![0.0; k_max + 1];
        for (col, &y) in ys.iter().enumerate() {
            fill_hermite_functions(y, &mut phi);
            for (k, v) in phi.iter().enumerate() {
                grid_table[k * p + col] = *v;
            }
        }
        let w = &config.interaction;
        let to_nodes = basis
            .nodes()
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| w.eval(x - y) * h))
            .collect();
        let on_grid = ys
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| w.eval(x - y) * h))
            .collect();
        Ok(Self {
            config,
            basis,
            grid_table,
            to_nodes,
            on_grid,
        })
    }

    pub fn config(&self) -> &HartreeConfig {
        &self.config
    }

    fn check_state(&self, state: &HartreeState) -> Result<()> {
        if state.k_max() != self.basis.k_max() || state.index.dim() != 1 {
            return Err(Error::Shape(format!(
                "state band {} for a solver of band {}",
                state.k_max(),
                self.basis.k_max()
            )));
        }
        if state.weights.len() != state.coeffs.len() {
            return Err(Error::Shape("weights and functions differ in number".into()));
        }
        Ok(())
    }

    /// `ρ` on the uniform grid.
    pub fn density(&self, state: &HartreeState) -> Vec<f64> {
        let p = self.config.grid.count;
        let mut rho = vec![0.0; p];
        let (mut re, mut im) = (vec![0.0; p], vec![0.0; p]);
        for (c, n) in state.coeffs.iter().zip(&state.weights) {
            re.iter_mut().for_each(|v| *v = 0.0);
            im.iter_mut().for_each(|v| *v = 0.0);
            for (k, a) in c.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &self.grid_table[k * p..(k + 1) * p];
                for ((r, i), f) in re.iter_mut().zip(im.iter_mut()).zip(row) {
                    *r += a.re * f;
                    *i += a.im * f;
                }
            }
            for ((o, r), i) in rho.iter_mut().zip(&re).zip(&im) {
                *o += n * (r * r + i * i);
            }
        }
        rho
    }

    fn apply_table(table: &[f64], rho: &[f64]) -> Vec<f64> {
        let p = rho.len();
        table
            .chunks_exact(p)
            .map(|row| row.iter().zip(rho).map(|(w, r)| w * r).sum())
            .collect()
    }

    /// `w⋆ρ` at the collocation nodes.
    pub fn potential_at_nodes(&self, rho: &[f64]) -> Vec<f64> {
        Self::apply_table(&self.to_nodes, rho)
    }

    /// `Σ n_j ⟨u_j, H u_j⟩ + ½ Σ_i (w⋆ρ)(y_i) ρ(y_i) h`.
    pub fn energy(&self, state: &HartreeState) -> f64 {
        let kinetic = state.kinetic_energy();
        if self.config.interaction.is_zero() {
            return kinetic;
        }
        let rho = self.density(state);
        let v = Self::apply_table(&self.on_grid, &rho);
        let h = self.config.grid.spacing();
        kinetic + 0.5 * h * v.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Share of `Σ‖u_j‖²` carried by the top eighth of the band.
    pub fn band_tail(&self, state: &HartreeState) -> f64 {
        let len = state.index.len();
        let start = len - (len / 8).max(1);
        let (mut tail, mut total) = (0.0, 0.0);
        for c in &state.coeffs {
            for (k, v) in c.iter().enumerate() {
                let m = v.norm_sqr();
                total += m;
                if k >= start {
                    tail += m;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// `u_j ← e^{-iV τ} u_j` through the collocation nodes.
    fn potential_phase(&self, state: &mut HartreeState, tau: f64) {
        if self.config.interaction.is_zero() {
            return;
        }
        let rho = self.density(state);
        let v = self.potential_at_nodes(&rho);
        let phases: Vec<Complex64> = v.iter().map(|v| Complex64::from_polar(1.0, -v * tau)).collect();
        let m = self.basis.len();
        let w = self.basis.rule().scaled_weights();
        let mut nodal = vec![Complex64::new(0.0, 0.0); m];
        for c in state.coeffs.iter_mut() {
            nodal.iter_mut().for_each(|u| *u = Complex64::new(0.0, 0.0));
            for (k, a) in c.iter().enumerate() {
                for (u, f) in nodal.iter_mut().zip(self.basis.row(k)) {
                    *u += a * f;
                }
            }
            for ((u, ph), wi) in nodal.iter_mut().zip(&phases).zip(w) {
                *u *= ph * wi;
            }
            for (k, a) in c.iter_mut().enumerate() {
                *a = nodal.iter().zip(self.basis.row(k)).map(|(u, f)| u * f).sum();
            }
        }
    }

    fn linear(&self, state: &mut HartreeState, tau: f64) {
        for c in state.coeffs.iter_mut() {
            for (k, a) in c.iter_mut().enumerate() {
                *a *= Complex64::from_polar(1.0, -tau * state.index.eigenvalue(k));
            }
        }
    }

    /// One Strang step of length `dt`.
    pub fn strang_step(&self, state: &HartreeState) -> Result<HartreeState> {
        self.check_state(state)?;
        let dt = self.config.dt;
        let mut next = state.clone();
        self.potential_phase(&mut next, dt / 2.0);
        self.linear(&mut next, dt);
        self.potential_phase(&mut next, dt / 2.0);
        let tail = self.band_tail(&next);
        if tail > self.config.band_tolerance {
            return Err(Error::BandLimit(format!(
                "{tail:e} of the mass reached the top of band K = {}",
                self.basis.k_max()
            )));
        }
        Ok(next)
    }

    fn diagnostics(
        &self,
        step: usize,
        state: &HartreeState,
        previous: &HartreeState,
        initial: &HartreeState,
    ) -> StepDiagnostics {
        let mass_drift = state
            .masses()
            .iter()
            .zip(previous.masses())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        StepDiagnostics {
            step,
            time: step as f64 * self.config.dt,
            trace: state.trace(),
            mass_drift,
            gram_drift: state.gram_distance(initial),
            energy: self.energy(state),
            band_tail: self.band_tail(state),
        }
    }

    /// `steps` Strang steps with diagnostics after each.
    pub fn evolve(&self, initial: &HartreeState) -> Result<HartreeRun> {
        self.check_state(initial)?;
        let mut diagnostics = Vec::with_capacity(self.config.steps + 1);
        diagnostics.push(self.diagnostics(0, initial, initial, initial));
        let mut state = initial.clone();
        for step in 1..=self.config.steps {
            let next = self.strang_step(&state).map_err(|e| match e {
                Error::BandLimit(reason) => Error::Instability { step, reason },
                other => other,
            })?;
            let d = self.diagnostics(step, &next, &state, initial);
            let finite = next.coeffs.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite());
            if !finite || !d.energy.is_finite() {
                return Err(Error::Instability {
                    step,
                    reason: "non-finite coefficients or energy".into(),
                });
            }
            diagnostics.push(d);
            state = next;
        }
        Ok(HartreeRun {
            initial: initial.clone(),
            state,
            diagnostics,
        })
    }
}

/// Convenience wrapper: build a solver for `state`'s band and evolve.
pub fn evolve_hartree(state: &HartreeState, config: &HartreeConfig) -> Result<HartreeRun> {
    HartreeSolver::new(state.k_max(), config.clone())?.evolve(state)
}

/// `max_i |E_i − E_0|` over a run.
pub fn energy_drift(run: &HartreeRun) -> f64 {
    let e0 = run.diagnostics[0].energy;
    run.diagnostics
        .iter()
        .map(|d| (d.energy - e0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::random_orthonormal_system;
    use crate::hermite::SpectralState;
    use crate::propagator::evolve_spectral;

    const K: usize = 31;

    fn grid() -> UniformGrid {
        UniformGrid::new(10.0, 401).unwrap()
    }

    fn config(dt: f64, steps: usize, amplitude: f64) -> HartreeConfig {
        HartreeConfig::new(dt, steps, grid(), InteractionKernel::gaussian(amplitude, 1.0).unwrap())
    }

    fn pair(seed: u64) -> HartreeState {
        let small = Arc::new(MultiIndexSet::new(1, 3).unwrap());
        let system = random_orthonormal_system(2, &small, seed)
            .unwrap()
            .with_weights(vec![1.0, 0.5])
            .unwrap();
        HartreeState::from_system(&system, K).unwrap()
    }

    fn gaussian(x: f64, mass: f64, centre: f64, var: f64) -> f64 {
        mass * (-(x - centre).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
    }

    #[test]
    fn kernel_validation_and_evaluation() {
        assert!(InteractionKernel::gaussian(1.0, 0.0).is_err());
        assert!(InteractionKernel::tabulated(0.1, vec![1.0, 2.0]).is_err());
        assert!(InteractionKernel::tabulated(0.1, vec![1.0, 2.0, 3.0]).is_err());
        let t = InteractionKernel::tabulated(0.5, vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(t.eval(0.0), 2.0);
        assert!((t.eval(0.25) - 1.5).abs() < 1e-15);
        assert!((t.eval(-0.75) - 0.5).abs() < 1e-15);
        assert_eq!(t.eval(1.0), 0.0);
        assert_eq!(t.eval(3.0), 0.0);
        let g = InteractionKernel::gaussian(2.0, 0.5).unwrap();
        assert_eq!(g.eval(0.3), g.eval(-0.3));
    }

    #[test]
    fn convolution_of_gaussians() {
        let grid = grid();
        let rho: Vec<f64> = grid.points().iter().map(|&x| gaussian(x, 1.5, 0.7, 0.5)).collect();
        let w = InteractionKernel::gaussian(0.8, 0.6).unwrap();
        let v = convolve(&w, &rho, &grid).unwrap();
        for (x, v) in grid.points().iter().zip(&v) {
            let expect = gaussian(*x, 1.2, 0.7, 0.5 + 0.36);
            assert!((v - expect).abs() < 1e-6);
        }
        let zero = convolve(&w, &vec![0.0; grid.count], &grid).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        assert!(matches!(convolve(&w, &[1.0; 3], &grid), Err(Error::Shape(_))));
    }

    #[test]
    fn narrow_kernel_is_nearly_identity() {
        let grid = grid();
        let rho: Vec<f64> = grid.points().iter().map(|&x| gaussian(x, 1.0, 0.0, 0.5)).collect();
        let w = InteractionKernel::gaussian(1.0, grid.spacing()).unwrap();
        let v = convolve(&w, &rho, &grid).unwrap();
        let peak = rho.iter().copied().fold(0.0, f64::max);
        let sup = v.iter().zip(&rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup <= 0.02 * peak);
    }

    #[test]
    fn config_validation() {
        assert!(config(0.0, 10, 1.0).validate(K).is_err());
        assert!(config(0.1, 100, 1.0).validate(K).is_err());
        let mut narrow = config(0.01, 10, 1.0);
        narrow.grid = UniformGrid::new(6.0, 401).unwrap();
        assert!(narrow.validate(K).is_err());
        let mut coarse = config(0.01, 10, 1.0);
        coarse.grid = UniformGrid::new(10.0, 41).unwrap();
        assert!(coarse.validate(K).is_err());
        assert!(config(0.01, 10, 1.0).validate(K).is_ok());
    }

    #[test]
    fn zero_interaction_reduces_to_linear_flow() {
        let state = pair(3);
        let solver = HartreeSolver::new(K, config(0.05, 1, 0.0)).unwrap();
        let next = solver.strang_step(&state).unwrap();
        for (a, b) in next.coeffs.iter().zip(&state.coeffs) {
            let s = SpectralState::new(state.index.clone(), b.clone()).unwrap();
            let lin = evolve_spectral(&s, 0.05);
            for (x, y) in a.iter().zip(lin.coeffs()) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn single_ground_state_keeps_its_mass() {
        let index = Arc::new(MultiIndexSet::new(1, 0).unwrap());
        let system = OrthonormalSystem::new(
            vec![1.0],
            vec![SpectralState::basis_vector(index, &[0]).unwrap()],
        )
        .unwrap();
        let state = HartreeState::from_system(&system, K).unwrap();
        let solver = HartreeSolver::new(K, config(0.05, 1, 2.0)).unwrap();
        let next = solver.strang_step(&state).unwrap();
        assert!((next.masses()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_state_gram_is_preserved() {
        let state = pair(4);
        let solver = HartreeSolver::new(K, config(0.05, 1, 1.0)).unwrap();
        let next = solver.strang_step(&state).unwrap();
        assert!(next.gram_distance(&state) < 1e-10);
        assert!(next.distance(&state) > 1e-3);
    }

    #[test]
    fn linear_flow_returns_after_half_period() {
        let state = pair(5);
        let steps = 100;
        let run = evolve_hartree(&state, &config(PI / steps as f64, steps, 0.0)).unwrap();
        let solver = HartreeSolver::new(K, config(0.1, 1, 0.0)).unwrap();
        let a = solver.density(&state);
        let b = solver.density(&run.state);
        let sup = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-8, "{sup}");
    }

    #[test]
    fn run_conserves_structure() {
        let state = pair(6);
        let run = evolve_hartree(&state, &config(0.01, 200, 0.5)).unwrap();
        let t0 = run.diagnostics[0].trace;
        for d in &run.diagnostics {
            assert!(d.mass_drift < 1e-12);
            assert!(d.gram_drift < 1e-10);
            assert!((d.trace - t0).abs() < 1e-10);
        }
        assert_eq!(run.diagnostics.len(), 201);
        assert!((run.diagnostics[200].time - 2.0).abs() < 1e-12);
    }

    #[test]
    fn strang_splitting_is_second_order() {
        let state = pair(7);
        let t_end: f64 = 0.5;
        let terminal = |dt: f64| {
            let steps = (t_end / dt).round() as usize;
            evolve_hartree(&state, &config(dt, steps, 0.5)).unwrap().state
        };
        let dt = 0.02;
        let reference = terminal(dt / 8.0);
        let e1 = terminal(dt).distance(&reference);
        let e2 = terminal(dt / 2.0).distance(&reference);
        let ratio = e1 / e2;
        assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn energy_drift_is_quadratic_in_dt() {
        let state = pair(8);
        let t_end: f64 = 1.0;
        let dts = [1e-2, 5e-3, 2.5e-3];
        let drifts: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let steps = (t_end / dt).round() as usize;
                energy_drift(&evolve_hartree(&state, &config(dt, steps, 0.5)).unwrap())
            })
            .collect();
        let slope = crate::fit::log_log(&dts, &drifts).unwrap().slope;
        assert!((1.8..=2.2).contains(&slope), "slope {slope}, drifts {drifts:?}");
    }

    #[test]
    fn overflowing_band_is_reported() {
        let index = Arc::new(MultiIndexSet::new(1, 7).unwrap());
        let system = OrthonormalSystem::new(
            vec![1.0],
            vec![SpectralState::basis_vector(index, &[7]).unwrap()],
        )
        .unwrap();
        let state = HartreeState::from_system(&system, 7).unwrap();
        let mut cfg = config(0.01, 3, 0.5);
        cfg.grid = UniformGrid::new(10.0, 401).unwrap();
        assert!(matches!(
            evolve_hartree(&state, &cfg),
            Err(Error::Instability { step: 1, .. })
        ));
    }
}
