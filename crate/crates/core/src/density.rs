//! Weighted orthonormal systems `γ₀ = Σ_j n_j |u_j⟩⟨u_j|`, the densities
//! `ρ(t, x) = Σ_j n_j |e^{-itH} u_j(x)|²` of their evolution, Schatten norms
//! and the mixed norm `‖ρ‖_{L^p_t L^q_x}` over `t ∈ [-π, π]`.
//!
//! Space integrals of `ρ^q` use the Gauss–Hermite rule stretched to the
//! envelope `e^{-q x²}`: for a band limit `K` the integrand is then a
//! polynomial of degree `2qK` times the rule's weight, exact for integer `q`
//! once `M ≥ qK + 1`. Traces use the unstretched rule, exact for `M ≥ K + 1`.
//! Time integrals use the periodic trapezoid rule on `N_t ≥ 4K + 3` points.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermite::{fill_hermite_functions, synthesize, MultiIndexSet, PointSet, SpectralState};
use crate::propagator::evolve_spectral;
use crate::quadrature::build_quadrature;

/// Complex entries with independent standard-normal real and imaginary parts.
pub fn random_coefficients<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct OrthonormalSystem {
    index: Arc<MultiIndexSet>,
    weights: Vec<f64>,
    states: Vec<SpectralState>,
}

impl OrthonormalSystem {
    pub const GRAM_TOLERANCE: f64 = 1e-10;

    pub fn new(weights: Vec<f64>, states: Vec<SpectralState>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::param("J", "a system needs at least one function"))?;
        let index = Arc::clone(first.index());
        if weights.len() != states.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} functions",
                weights.len(),
                states.len()
            )));
        }
        if states.iter().any(|s| s.index() != &index) {
            return Err(Error::Shape("functions use different index sets".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Data("non-finite weight".into()));
        }
        let system = Self {
            index,
            weights,
            states,
        };
        let drift = system.gram_drift();
        if drift > Self::GRAM_TOLERANCE {
            return Err(Error::param(
                "states",
                format!("functions are not orthonormal (‖UᴴU − I‖_max = {drift:e})"),
            ));
        }
        Ok(system)
    }

    pub fn index(&self) -> &Arc<MultiIndexSet> {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[SpectralState] {
        &self.states
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.states.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} functions",
                weights.len(),
                self.states.len()
            )));
        }
        self.weights = weights;
        Ok(self)
    }

    /// Coefficient matrix `U` (index size × J).
    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.index.len(), self.len(), |r, c| {
            self.states[c].coeffs()[r]
        })
    }

    pub fn gram(&self) -> DMatrix<Complex64> {
        let u = self.matrix();
        u.adjoint() * u
    }

    /// `max |UᴴU − I|` entrywise.
    pub fn gram_drift(&self) -> f64 {
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// `U ↦ U Q` for a J×J matrix `Q`, weights unchanged.
    pub fn rotated(&self, q: &DMatrix<Complex64>) -> Result<Self> {
        if q.nrows() != self.len() || q.ncols() != self.len() {
            return Err(Error::Shape("rotation must be J×J".into()));
        }
        let u = self.matrix() * q;
        let states = (0..u.ncols())
            .map(|c| SpectralState::new(Arc::clone(&self.index), u.column(c).iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.weights.clone(), states)
    }

    /// `∫ ρ dx = Σ n_j` for an orthonormal system.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Orthonormalized seeded standard-Gaussian `D × J` matrix, unit weights.
pub fn random_orthonormal_system(
    j: usize,
    index: &Arc<MultiIndexSet>,
    seed: u64,
) -> Result<OrthonormalSystem> {
    let d = index.len();
    if j == 0 || j > d {
        return Err(Error::param(
            "J",
            format!("system size {j} must lie in 1..={d} (index-set size)"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = random_coefficients(d * j, &mut rng);
    let a = DMatrix::from_column_slice(d, j, &entries);
    let q = a.qr().q();
    let states = (0..j)
        .map(|c| SpectralState::new(Arc::clone(index), q.column(c).iter().copied().collect()))
        .collect::<Result<Vec<_>>>()?;
    OrthonormalSystem::new(vec![1.0; j], states)
}

/// Random unitary `J × J` matrix from the same construction.
pub fn random_unitary(j: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = random_coefficients(j * j, &mut rng);
    DMatrix::from_column_slice(j, j, &entries).qr().q()
}

/// Exponent pair of `L^p_t L^q_x`; `f64::INFINITY` allowed for either.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedNormSpec {
    pub p: f64,
    pub q: f64,
}

impl MixedNormSpec {
    /// `(p, q)` on the Strichartz line `2/p + n/q = n`.
    pub fn new(dim: usize, p: f64, q: f64) -> Result<Self> {
        let spec = Self { p, q };
        spec.check_range()?;
        let residual = 2.0 / p + dim as f64 / q - dim as f64;
        if residual.abs() > 1e-12 {
            return Err(Error::param(
                "p",
                format!("2/p + n/q − n = {residual:e} for p = {p}, q = {q}, n = {dim}"),
            ));
        }
        Ok(spec)
    }

    /// The Strichartz partner `p = 2q / (n(q − 1))` of `q`.
    pub fn for_q(dim: usize, q: f64) -> Result<Self> {
        let p = if q == 1.0 {
            f64::INFINITY
        } else {
            2.0 * q / (dim as f64 * (q - 1.0))
        };
        Self::new(dim, p, q)
    }

    pub fn check_range(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v >= 1.0) {
                return Err(Error::param(name, format!("exponent {v} below 1")));
            }
        }
        Ok(())
    }

    /// `q < (n+1)/(n−1)`, no upper bound for `n = 1`.
    pub fn admissible(&self, dim: usize) -> bool {
        dim == 1 || self.q < (dim as f64 + 1.0) / (dim as f64 - 1.0)
    }

    /// Large `q` in one dimension, where quadrature of `ρ^q` degrades.
    pub fn quadrature_warning(&self, dim: usize) -> bool {
        dim == 1 && self.q > 16.0
    }

    /// Critical Schatten exponent `2q / (q + 1)`.
    pub fn schatten_exponent(&self) -> f64 {
        if self.q.is_infinite() {
            2.0
        } else {
            2.0 * self.q / (self.q + 1.0)
        }
    }
}

/// Nodes with measure weights: `∫ g ≈ Σ w_i g(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    pub points: PointSet,
    pub weights: Vec<f64>,
}

impl SpaceGrid {
    /// Tensor Gauss–Hermite rule of `m` nodes per axis, stretched to the
    /// envelope `e^{-stretch |x|²}`.
    pub fn gauss_hermite(dim: usize, m: usize, stretch: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::param("n", format!("dimension {dim} not in {{1, 2}}")));
        }
        let rule = build_quadrature(m)?;
        let (x, w) = rule.stretched(stretch);
        let weights = match dim {
            1 => w,
            _ => w.iter().flat_map(|a| w.iter().map(move |b| a * b)).collect(),
        };
        Ok(Self {
            points: PointSet::tensor(&x, dim),
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Time and space discretization of a density trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrids {
    pub time_points: usize,
    /// Grid used for `∫ ρ^q`.
    pub norm_grid: SpaceGrid,
    /// Grid used for `∫ ρ`.
    pub trace_grid: SpaceGrid,
}

impl DensityGrids {
    /// Defaults for band limit `K`: `N_t = 4K + 3`, norm grid stretched to
    /// `e^{-q x²}` with `⌈q⌉K + 1` nodes, trace grid with `K + 1` nodes.
    pub fn for_band_limit(dim: usize, k_max: usize, q: f64) -> Result<Self> {
        let (stretch, nodes) = if q.is_finite() {
            (q, (q.ceil() as usize) * k_max + 1)
        } else {
            (1.0, 2 * k_max + 1)
        };
        Ok(Self {
            time_points: 4 * k_max + 3,
            norm_grid: SpaceGrid::gauss_hermite(dim, nodes, stretch)?,
            trace_grid: SpaceGrid::gauss_hermite(dim, k_max + 1, 1.0)?,
        })
    }

    pub fn with_time_points(mut self, n: usize) -> Self {
        self.time_points = n;
        self
    }

    /// Uniform periodic grid `t_i = -π + 2πi/N_t`, `i < N_t`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.time_points as f64;
        (0..self.time_points)
            .map(|i| -PI + 2.0 * PI * i as f64 / n)
            .collect()
    }

    pub fn time_step(&self) -> f64 {
        2.0 * PI / self.time_points as f64
    }
}

/// `ρ(t_i, x_j)` on a time × space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub times: Vec<f64>,
    pub time_step: f64,
    pub grid: SpaceGrid,
    /// Row-major `times.len() × grid.len()`.
    pub values: Vec<f64>,
    /// `∫ ρ(t_i, ·)` from the trace grid.
    pub traces: Vec<f64>,
}

impl DensityField {
    pub fn slice(&self, i: usize) -> &[f64] {
        let p = self.grid.len();
        &self.values[i * p..(i + 1) * p]
    }

    /// `max_i |∫ρ(t_i) − expected|`.
    pub fn trace_drift(&self, expected: f64) -> f64 {
        self.traces
            .iter()
            .map(|t| (t - expected).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.traces.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

/// `ρ(t, x)` at arbitrary points through explicit evolution and synthesis.
pub fn density(system: &OrthonormalSystem, t: f64, points: &PointSet) -> Result<Vec<f64>> {
    let mut rho = vec![0.0; points.len()];
    for (state, n) in system.states().iter().zip(system.weights()) {
        let u = synthesize(&evolve_spectral(state, t), points)?;
        for (r, v) in rho.iter_mut().zip(&u) {
            *r += n * v.norm_sqr();
        }
    }
    Ok(rho)
}

/// `Φ_μ(x_p)` as a `D × P` row-major table.
fn basis_table(index: &MultiIndexSet, points: &PointSet) -> Vec<f64> {
    let k1 = index.k_max() + 1;
    let d = index.len();
    let p = points.len();
    let mut table = vec![0.0; d * p];
    let mut h = vec![vec![0.0; k1]; index.dim()];
    for (col, x) in points.iter().enumerate() {
        for (axis, &xa) in x.iter().enumerate() {
            fill_hermite_functions(xa, &mut h[axis]);
        }
        for (row, mu) in index.iter().enumerate() {
            table[row * p + col] = mu.iter().enumerate().map(|(a, &k)| h[a][k]).product();
        }
    }
    table
}

/// `ρ` on `table`'s points at time `t`, accumulated into `out`.
fn density_from_table(
    system: &OrthonormalSystem,
    table: &[f64],
    t: f64,
    out: &mut [f64],
    re: &mut [f64],
    im: &mut [f64],
) {
    let index = system.index();
    let p = out.len();
    let phases: Vec<Complex64> = (0..index.len())
        .map(|i| Complex64::from_polar(1.0, -t * index.eigenvalue(i)))
        .collect();
    out.iter_mut().for_each(|v| *v = 0.0);
    for (state, n) in system.states().iter().zip(system.weights()) {
        re.iter_mut().for_each(|v| *v = 0.0);
        im.iter_mut().for_each(|v| *v = 0.0);
        for (row, (c, ph)) in state.coeffs().iter().zip(&phases).enumerate() {
            let a = c * ph;
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let phi = &table[row * p..(row + 1) * p];
            for ((r, i), f) in re.iter_mut().zip(im.iter_mut()).zip(phi) {
                *r += a.re * f;
                *i += a.im * f;
            }
        }
        for ((o, r), i) in out.iter_mut().zip(re.iter()).zip(im.iter()) {
            *o += n * (r * r + i * i);
        }
    }
}

/// The density trajectory on `grids`.
pub fn density_field(system: &OrthonormalSystem, grids: &DensityGrids) -> Result<DensityField> {
    let index = system.index();
    for grid in [&grids.norm_grid, &grids.trace_grid] {
        if grid.points.dim() != index.dim() {
            return Err(Error::Shape(format!(
                "space grid of dimension {} for a system of dimension {}",
                grid.points.dim(),
                index.dim()
            )));
        }
    }
    if grids.time_points == 0 {
        return Err(Error::param("time_points", "need at least one time sample"));
    }
    let norm_table = basis_table(index, &grids.norm_grid.points);
    let trace_table = basis_table(index, &grids.trace_grid.points);
    let times = grids.times();
    let p = grids.norm_grid.len();
    let pt = grids.trace_grid.len();

    let mut values = vec![0.0; times.len() * p];
    let mut traces = Vec::with_capacity(times.len());
    let (mut re, mut im) = (vec![0.0; p], vec![0.0; p]);
    let (mut tre, mut tim, mut trho) = (vec![0.0; pt], vec![0.0; pt], vec![0.0; pt]);
    for (i, &t) in times.iter().enumerate() {
        density_from_table(system, &norm_table, t, &mut values[i * p..(i + 1) * p], &mut re, &mut im);
        density_from_table(system, &trace_table, t, &mut trho, &mut tre, &mut tim);
        traces.push(grids.trace_grid.integrate(&trho));
    }
    Ok(DensityField {
        times,
        time_step: grids.time_step(),
        grid: grids.norm_grid.clone(),
        values,
        traces,
    })
}

/// `(Σ_i Δt (Σ_j w_j |ρ_ij|^q)^{p/q})^{1/p}`, with `∞` exponents as maxima.
pub fn mixed_norm(field: &DensityField, spec: &MixedNormSpec) -> Result<f64> {
    spec.check_range()?;
    if field.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("density field contains non-finite values".into()));
    }
    let space_norms: Vec<f64> = (0..field.times.len())
        .map(|i| {
            let slice = field.slice(i);
            if spec.q.is_infinite() {
                slice.iter().map(|v| v.abs()).fold(0.0, f64::max)
            } else {
                field
                    .grid
                    .weights
                    .iter()
                    .zip(slice)
                    .map(|(w, v)| w * v.abs().powf(spec.q))
                    .sum::<f64>()
                    .powf(1.0 / spec.q)
            }
        })
        .collect();
    Ok(if spec.p.is_infinite() {
        space_norms.iter().copied().fold(0.0, f64::max)
    } else {
        let dt = field.time_step;
        space_norms
            .iter()
            .map(|s| dt * s.powf(spec.p))
            .sum::<f64>()
            .powf(1.0 / spec.p)
    })
}

fn check_schatten_exponent(r: f64) -> Result<()> {
    if r >= 1.0 {
        Ok(())
    } else {
        Err(Error::param("r", format!("Schatten exponent {r} below 1")))
    }
}

fn lr_norm(values: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        values.map(f64::abs).fold(0.0, f64::max)
    } else {
        values.map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `(Σ |n_j|^r)^{1/r}`, the Schatten norm of `Σ n_j |u_j⟩⟨u_j|`.
pub fn schatten_norm_diagonal(weights: &[f64], r: f64) -> Result<f64> {
    check_schatten_exponent(r)?;
    Ok(lr_norm(weights.iter().copied(), r))
}

/// ℓ^r norm of the singular values of `a`.
pub fn schatten_norm_matrix(a: &DMatrix<Complex64>, r: f64) -> Result<f64> {
    check_schatten_exponent(r)?;
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Data("matrix has non-finite entries".into()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sv = a.clone().svd(false, false).singular_values;
    Ok(lr_norm(sv.iter().copied(), r))
}

/// `‖ρ‖_{L^p_t L^q_x} / ‖γ₀‖_{𝔖^{2q/(q+1)}}`.
pub fn strichartz_ratio(
    system: &OrthonormalSystem,
    spec: &MixedNormSpec,
    grids: &DensityGrids,
) -> Result<f64> {
    ratio_with_exponent(system, spec, grids, spec.schatten_exponent())
}

/// As [`strichartz_ratio`] with an arbitrary Schatten exponent `r` in the
/// denominator.
pub fn ratio_with_exponent(
    system: &OrthonormalSystem,
    spec: &MixedNormSpec,
    grids: &DensityGrids,
    r: f64,
) -> Result<f64> {
    let denominator = schatten_norm_diagonal(system.weights(), r)?;
    if denominator == 0.0 {
        return Err(Error::Degenerate("all weights vanish".into()));
    }
    let field = density_field(system, grids)?;
    Ok(mixed_norm(&field, spec)? / denominator)
}

/// Which orthonormal systems a sweep draws for a given size J.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemFamily {
    /// Random J-dimensional subspace of the span of `Φ_0 … Φ_K`, fixed K.
    FixedBand { k_max: usize },
    /// Random orthonormal basis of the span of `Φ_0 … Φ_{J-1}`: the band
    /// grows with J so the system stays saturated.
    Saturated,
}

impl SystemFamily {
    pub fn band_limit(&self, j: usize) -> usize {
        match *self {
            SystemFamily::FixedBand { k_max } => k_max,
            SystemFamily::Saturated => j - 1,
        }
    }
}

/// One row of a Strichartz sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrichartzRow {
    pub seed: u64,
    pub j: usize,
    pub k_max: usize,
    pub p: f64,
    pub q: f64,
    pub mixed_norm: f64,
    /// Ratio with the critical exponent `2q/(q+1)`.
    pub ratio: f64,
    /// Ratio with the comparison exponent.
    pub ratio_alt: f64,
    pub alt_exponent: f64,
    pub trace_drift: f64,
}

/// Equal-weight system of size `j` from `family`, measured at `q` (n = 1).
pub fn strichartz_row(
    family: SystemFamily,
    j: usize,
    q: f64,
    alt_exponent: f64,
    seed: u64,
) -> Result<StrichartzRow> {
    let spec = MixedNormSpec::for_q(1, q)?;
    let k_max = family.band_limit(j);
    let index = Arc::new(MultiIndexSet::new(1, k_max)?);
    let system = random_orthonormal_system(j, &index, seed)?;
    let grids = DensityGrids::for_band_limit(1, k_max, q)?;
    let field = density_field(&system, &grids)?;
    let norm = mixed_norm(&field, &spec)?;
    let weights = system.weights();
    Ok(StrichartzRow {
        seed,
        j,
        k_max,
        p: spec.p,
        q,
        mixed_norm: norm,
        ratio: norm / schatten_norm_diagonal(weights, spec.schatten_exponent())?,
        ratio_alt: norm / schatten_norm_diagonal(weights, alt_exponent)?,
        alt_exponent,
        trace_drift: field.trace_drift(system.total_weight()),
    })
}
