//! Normalized Hermite functions and the Fourier–Hermite transform pair.
//!
//! `h_k(x) = (2^k √π k!)^{-1/2} H_k(x) e^{-x²/2}` is evaluated through the
//! normalized recurrence
//! `h_{k+1} = x √(2/(k+1)) h_k − √(k/(k+1)) h_{k−1}`, carrying a separate
//! log-scale so the Gaussian factor never underflows before the polynomial
//! part has grown. Multi-dimensional functions `Φ_μ` are tensor products.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{build_quadrature, QuadratureRule};

pub const MAX_DEGREE: usize = 512;

/// `h_0(x), …, h_K(x)`.
pub fn eval_hermite_functions(k_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    fill_hermite_functions(x, &mut out);
    out
}

/// Writes `h_0(x), …, h_{out.len()-1}(x)` into `out`.
pub fn fill_hermite_functions(x: f64, out: &mut [f64]) {
    const BIG: f64 = 1e100;
    if out.is_empty() {
        return;
    }
    let mut log_scale = -0.5 * x * x;
    let mut factor = log_scale.exp();
    let rescale = |m: f64, log_scale: f64, factor: f64| {
        if log_scale > -700.0 {
            m * factor
        } else if m == 0.0 {
            0.0
        } else {
            m.signum() * (m.abs().ln() + log_scale).exp()
        }
    };

    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    out[0] = rescale(cur, log_scale, factor);
    for k in 0..out.len() - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            log_scale += BIG.ln();
            factor = log_scale.exp();
        }
        out[k + 1] = rescale(cur, log_scale, factor);
    }
}

/// Quadrature rule plus the `(K+1) × M` table of `h_k(x_i)`.
#[derive(Debug, Clone)]
pub struct HermiteBasis1D {
    k_max: usize,
    rule: QuadratureRule,
    table: Vec<f64>,
}

impl HermiteBasis1D {
    pub fn new(k_max: usize, nodes: usize) -> Result<Self> {
        if k_max > MAX_DEGREE {
            return Err(Error::param(
                "K",
                format!("degree {k_max} exceeds {MAX_DEGREE}"),
            ));
        }
        if nodes < k_max + 1 {
            return Err(Error::param(
                "M",
                format!("need at least K+1 = {} nodes, got {nodes}", k_max + 1),
            ));
        }
        let rule = build_quadrature(nodes)?;
        let mut table = vec![0.0; (k_max + 1) * nodes];
        let mut column = vec![0.0; k_max + 1];
        for (i, &x) in rule.nodes().iter().enumerate() {
            fill_hermite_functions(x, &mut column);
            for (k, v) in column.iter().enumerate() {
                table[k * nodes + i] = *v;
            }
        }
        Ok(Self { k_max, rule, table })
    }

    /// Basis with the default rule size `M = 2K + 1`.
    pub fn with_default_rule(k_max: usize) -> Result<Self> {
        Self::new(k_max, 2 * k_max + 1)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    /// `h_k` sampled on the nodes.
    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.rule.len();
        &self.table[k * m..(k + 1) * m]
    }

    /// The tensor grid of the rule in `dim` dimensions.
    pub fn grid(&self, dim: usize) -> PointSet {
        PointSet::tensor(self.rule.nodes(), dim)
    }

    /// De-weighted tensor weights `Π w̃_{i_d}`, in grid order.
    pub fn grid_weights(&self, dim: usize) -> Vec<f64> {
        let w = self.rule.scaled_weights();
        match dim {
            1 => w.to_vec(),
            2 => w
                .iter()
                .flat_map(|a| w.iter().map(move |b| a * b))
                .collect(),
            _ => unreachable!("dimension validated by MultiIndexSet"),
        }
    }
}

/// Multi-indices `μ ∈ ℕ₀ⁿ` with `|μ| ≤ K`, ordered by total degree and then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    k_max: usize,
    entries: Vec<usize>,
}

impl MultiIndexSet {
    pub fn new(dim: usize, k_max: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::param("n", format!("dimension {dim} not in {{1, 2}}")));
        }
        if k_max > MAX_DEGREE {
            return Err(Error::param(
                "K",
                format!("degree {k_max} exceeds {MAX_DEGREE}"),
            ));
        }
        let mut entries = Vec::new();
        for degree in 0..=k_max {
            if dim == 1 {
                entries.push(degree);
            } else {
                for first in 0..=degree {
                    entries.push(first);
                    entries.push(degree - first);
                }
            }
        }
        Ok(Self {
            dim,
            k_max,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.entries.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.get(i).iter().sum()
    }

    /// Eigenvalue `2|μ| + n` of `H` on `Φ_μ`.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        (2 * self.degree(i) + self.dim) as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.entries.chunks(self.dim)
    }

    pub fn position(&self, mu: &[usize]) -> Option<usize> {
        if mu.len() != self.dim {
            return None;
        }
        let degree: usize = mu.iter().sum();
        if degree > self.k_max {
            return None;
        }
        Some(match self.dim {
            1 => degree,
            _ => degree * (degree + 1) / 2 + mu[0],
        })
    }
}

/// A finite list of points in ℝⁿ stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::Shape(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Data("point coordinates must be finite".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn line(points: &[f64]) -> Self {
        Self {
            dim: 1,
            coords: points.to_vec(),
        }
    }

    /// `count` equispaced points covering `[lo, hi]` inclusive.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Self {
        let step = if count > 1 {
            (hi - lo) / (count - 1) as f64
        } else {
            0.0
        };
        Self::line(&(0..count).map(|i| lo + step * i as f64).collect::<Vec<_>>())
    }

    /// Tensor product of `axis` with itself, first coordinate slowest.
    pub fn tensor(axis: &[f64], dim: usize) -> Self {
        let coords = match dim {
            1 => axis.to_vec(),
            2 => axis
                .iter()
                .flat_map(|&a| axis.iter().flat_map(move |&b| [a, b]))
                .collect(),
            _ => panic!("tensor grids are supported for n = 1, 2"),
        };
        Self { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }
}

/// Coefficients `c_μ` of a function in the Hermite eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    index: Arc<MultiIndexSet>,
    coeffs: Vec<Complex64>,
}

impl SpectralState {
    pub fn new(index: Arc<MultiIndexSet>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != index.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for an index set of size {}",
                coeffs.len(),
                index.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Data("non-finite spectral coefficient".into()));
        }
        Ok(Self { index, coeffs })
    }

    pub fn zeros(index: Arc<MultiIndexSet>) -> Self {
        let coeffs = vec![Complex64::new(0.0, 0.0); index.len()];
        Self { index, coeffs }
    }

    /// `Φ_μ` itself.
    pub fn basis_vector(index: Arc<MultiIndexSet>, mu: &[usize]) -> Result<Self> {
        let pos = index
            .position(mu)
            .ok_or_else(|| Error::param("mu", format!("{mu:?} not in the index set")))?;
        let mut state = Self::zeros(index);
        state.coeffs[pos] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn index(&self) -> &Arc<MultiIndexSet> {
        &self.index
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Fourier–Hermite coefficients `c_μ ≈ ∫ f Φ_μ` from samples on the tensor
/// Gauss–Hermite grid of `basis` (first coordinate slowest).
pub fn analyze(
    samples: &[Complex64],
    basis: &HermiteBasis1D,
    index: &Arc<MultiIndexSet>,
) -> Result<SpectralState> {
    let m = basis.len();
    let dim = index.dim();
    if samples.len() != m.pow(dim as u32) {
        return Err(Error::Shape(format!(
            "{} samples for a {m}-point rule in dimension {dim}",
            samples.len()
        )));
    }
    if index.k_max() > basis.k_max() {
        return Err(Error::Shape(format!(
            "index set degree {} exceeds basis degree {}",
            index.k_max(),
            basis.k_max()
        )));
    }
    let w = basis.rule().scaled_weights();

    let coeffs = match dim {
        1 => (0..index.len())
            .map(|k| {
                basis
                    .row(k)
                    .iter()
                    .zip(w)
                    .zip(samples)
                    .map(|((h, w), f)| f * (h * w))
                    .sum()
            })
            .collect(),
        _ => {
            // Contract the fast axis first: partial[i1][k2] = Σ_{i2} w h_{k2} f.
            let k1 = index.k_max() + 1;
            let mut partial = vec![Complex64::new(0.0, 0.0); m * k1];
            for i1 in 0..m {
                let slab = &samples[i1 * m..(i1 + 1) * m];
                for k2 in 0..k1 {
                    partial[i1 * k1 + k2] = basis
                        .row(k2)
                        .iter()
                        .zip(w)
                        .zip(slab)
                        .map(|((h, w), f)| f * (h * w))
                        .sum();
                }
            }
            index
                .iter()
                .map(|mu| {
                    let row = basis.row(mu[0]);
                    (0..m)
                        .map(|i1| partial[i1 * k1 + mu[1]] * (row[i1] * w[i1]))
                        .sum()
                })
                .collect()
        }
    };
    SpectralState::new(Arc::clone(index), coeffs)
}

/// `f(x) = Σ_μ c_μ Φ_μ(x)` at arbitrary points.
pub fn synthesize(state: &SpectralState, points: &PointSet) -> Result<Vec<Complex64>> {
    let index = state.index();
    if points.dim() != index.dim() {
        return Err(Error::Shape(format!(
            "points of dimension {} for a state of dimension {}",
            points.dim(),
            index.dim()
        )));
    }
    let k1 = index.k_max() + 1;
    let mut h = vec![vec![0.0; k1]; index.dim()];
    Ok(points
        .iter()
        .map(|p| {
            for (d, &x) in p.iter().enumerate() {
                fill_hermite_functions(x, &mut h[d]);
            }
            index
                .iter()
                .zip(state.coeffs())
                .map(|(mu, c)| {
                    let phi: f64 = mu.iter().enumerate().map(|(d, &k)| h[d][k]).product();
                    c * phi
                })
                .sum()
        })
        .collect())
}

/// Synthesis on the tensor grid of `basis`, using the stored table.
pub fn synthesize_on_grid(state: &SpectralState, basis: &HermiteBasis1D) -> Result<Vec<Complex64>> {
    let index = state.index();
    if index.k_max() > basis.k_max() {
        return Err(Error::Shape(format!(
            "state degree {} exceeds basis degree {}",
            index.k_max(),
            basis.k_max()
        )));
    }
    let m = basis.len();
    match index.dim() {
        1 => {
            let mut out = vec![Complex64::new(0.0, 0.0); m];
            for (k, c) in state.coeffs().iter().enumerate() {
                for (o, h) in out.iter_mut().zip(basis.row(k)) {
                    *o += c * h;
                }
            }
            Ok(out)
        }
        _ => {
            let mut out = vec![Complex64::new(0.0, 0.0); m * m];
            for (mu, c) in index.iter().zip(state.coeffs()) {
                let r1 = basis.row(mu[0]);
                let r2 = basis.row(mu[1]);
                for (i1, a) in r1.iter().enumerate() {
                    let ca = c * a;
                    for (o, b) in out[i1 * m..(i1 + 1) * m].iter_mut().zip(r2) {
                        *o += ca * b;
                    }
                }
            }
            Ok(out)
        }
    }
}

/// `Σ w̃_i |f(x_i)|²` over the tensor grid: the discrete L² norm squared.
pub fn grid_norm_sqr(samples: &[Complex64], basis: &HermiteBasis1D, dim: usize) -> f64 {
    basis
        .grid_weights(dim)
        .iter()
        .zip(samples)
        .map(|(w, f)| w * f.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::random_coefficients;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn h0_at_origin() {
        let h = eval_hermite_functions(0, 0.0);
        assert!((h[0] - PI.powf(-0.25)).abs() < 1e-16);
        assert!((h[0] - 0.751_126).abs() < 1e-6);
    }

    #[test]
    fn h1_vanishes_at_origin() {
        assert_eq!(eval_hermite_functions(1, 0.0)[1], 0.0);
    }

    #[test]
    fn values_far_out_are_finite() {
        for x in [-60.0, -35.0, 0.5, 27.0, 60.0] {
            let h = eval_hermite_functions(MAX_DEGREE, x);
            assert!(h.iter().all(|v| v.is_finite()));
        }
        // Past the turning point of h_512 the function decays but is representable.
        let h = eval_hermite_functions(MAX_DEGREE, 40.0);
        assert!(h[MAX_DEGREE] != 0.0 && h[MAX_DEGREE].abs() < 1e-20);
    }

    #[test]
    fn parity_is_exact() {
        for x in [0.3, 1.7, 6.2, 19.5] {
            let pos = eval_hermite_functions(100, x);
            let neg = eval_hermite_functions(100, -x);
            for (k, (a, b)) in pos.iter().zip(&neg).enumerate() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(*b, sign * a);
            }
        }
    }

    #[test]
    fn discrete_orthonormality() {
        let basis = HermiteBasis1D::new(40, 41).unwrap();
        let w = basis.rule().scaled_weights();
        for j in 0..=40 {
            for k in 0..=40 {
                let g: f64 = basis
                    .row(j)
                    .iter()
                    .zip(basis.row(k))
                    .zip(w)
                    .map(|((a, b), w)| a * b * w)
                    .sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-10, "({j},{k}) -> {g}");
            }
        }
    }

    #[test]
    fn gram_on_2d_grid_is_identity() {
        let basis = HermiteBasis1D::with_default_rule(6).unwrap();
        let index = Arc::new(MultiIndexSet::new(2, 6).unwrap());
        for i in 0..index.len() {
            let phi = synthesize_on_grid(
                &SpectralState::basis_vector(index.clone(), index.get(i)).unwrap(),
                &basis,
            )
            .unwrap();
            let back = analyze(&phi, &basis, &index).unwrap();
            for (j, cj) in back.coeffs().iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((cj - c(expect)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn index_set_order_and_size() {
        let set = MultiIndexSet::new(2, 3).unwrap();
        assert_eq!(set.len(), 10); // C(5, 2)
        let listed: Vec<Vec<usize>> = set.iter().map(|m| m.to_vec()).collect();
        assert_eq!(
            listed,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![0, 2],
                vec![1, 1],
                vec![2, 0],
                vec![0, 3],
                vec![1, 2],
                vec![2, 1],
                vec![3, 0]
            ]
        );
        for (i, mu) in set.iter().enumerate() {
            assert_eq!(set.position(mu), Some(i));
        }
        assert_eq!(MultiIndexSet::new(1, 64).unwrap().len(), 65);
        assert!(MultiIndexSet::new(3, 2).is_err());
    }

    #[test]
    fn analyze_ground_state_and_zero() {
        let basis = HermiteBasis1D::with_default_rule(8).unwrap();
        let index = Arc::new(MultiIndexSet::new(1, 8).unwrap());
        let phi0: Vec<Complex64> = basis.row(0).iter().map(|&v| c(v)).collect();
        let state = analyze(&phi0, &basis, &index).unwrap();
        assert!((state.coeffs()[0] - c(1.0)).norm() < 1e-14);
        assert!(state.coeffs()[1..].iter().all(|z| z.norm() < 1e-14));

        let zero = vec![c(0.0); basis.len()];
        let state = analyze(&zero, &basis, &index).unwrap();
        assert!(state.coeffs().iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn analyze_first_moment_gaussian() {
        // x e^{-x²/2} = π^{1/4} / √2 · h_1(x)
        let basis = HermiteBasis1D::with_default_rule(6).unwrap();
        let index = Arc::new(MultiIndexSet::new(1, 6).unwrap());
        let samples: Vec<Complex64> = basis
            .nodes()
            .iter()
            .map(|&x| c(x * (-0.5 * x * x).exp()))
            .collect();
        let state = analyze(&samples, &basis, &index).unwrap();
        let expect = PI.powf(0.25) / 2f64.sqrt();
        // ∫ x e^{-x²/2} h_1 = (2/√π)^{1/2} ∫ x² e^{-x²}
        let oracle: f64 = basis
            .rule()
            .integrate_weighted(|x| x * x * (2.0 / PI.sqrt()).sqrt());
        assert!((oracle - expect).abs() < 1e-14);
        for (k, z) in state.coeffs().iter().enumerate() {
            let e = if k == 1 { expect } else { 0.0 };
            assert!((z - c(e)).norm() < 1e-13, "k={k}: {z}");
        }
    }

    #[test]
    fn analyze_shape_errors() {
        let basis = HermiteBasis1D::with_default_rule(4).unwrap();
        let index = Arc::new(MultiIndexSet::new(1, 4).unwrap());
        assert!(matches!(
            analyze(&[c(0.0); 3], &basis, &index),
            Err(Error::Shape(_))
        ));
        let big = Arc::new(MultiIndexSet::new(1, 6).unwrap());
        assert!(matches!(
            analyze(&vec![c(0.0); basis.len()], &basis, &big),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn synthesize_small_cases() {
        let index = Arc::new(MultiIndexSet::new(1, 1).unwrap());
        let origin = PointSet::line(&[0.0]);
        let unit = SpectralState::basis_vector(index.clone(), &[0]).unwrap();
        let v = synthesize(&unit, &origin).unwrap();
        assert!((v[0] - c(PI.powf(-0.25))).norm() < 1e-16);

        let both = SpectralState::new(index, vec![c(1.0), c(1.0)]).unwrap();
        let v = synthesize(&both, &origin).unwrap();
        assert!((v[0] - c(PI.powf(-0.25))).norm() < 1e-16);
    }

    #[test]
    fn synthesize_matches_table() {
        let basis = HermiteBasis1D::with_default_rule(10).unwrap();
        let index = Arc::new(MultiIndexSet::new(2, 10).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let state = SpectralState::new(index.clone(), random_coefficients(index.len(), &mut rng))
            .unwrap();
        let a = synthesize_on_grid(&state, &basis).unwrap();
        let b = synthesize(&state, &basis.grid(2)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn round_trip_and_plancherel(seed in any::<u64>(), k in 1usize..24, dim in 1usize..=2) {
            let basis = HermiteBasis1D::new(k, 2 * k).unwrap();
            let index = Arc::new(MultiIndexSet::new(dim, k).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = SpectralState::new(index.clone(), random_coefficients(index.len(), &mut rng)).unwrap();
            let samples = synthesize_on_grid(&state, &basis).unwrap();
            let back = analyze(&samples, &basis, &index).unwrap();
            let err = state.coeffs().iter().zip(back.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-10, "round trip error {err}");
            let grid = grid_norm_sqr(&samples, &basis, dim);
            prop_assert!((grid - state.norm_sqr()).abs() < 1e-10 * state.norm_sqr().max(1.0));
        }
    }
}
