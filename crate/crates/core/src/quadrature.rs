//! Gauss–Hermite quadrature for the weight `e^{-x²}`.
//!
//! Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of the
//! orthonormal Hermite polynomials (Golub–Welsch), polished by Newton steps on
//! the normalized three-term recurrence. Weights come from the Christoffel
//! formula `w_i = 1 / (M p_{M-1}(x_i)²)` evaluated in log space, which keeps the
//! de-weighted weights `w_i e^{x_i²}` accurate even where `w_i` itself
//! underflows (M ≳ 380).

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_NODES: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `∫ f(x) e^{-x²} dx ≈ Σ w_i f(x_i)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// De-weighted weights `w_i e^{x_i²}`, for `∫ g(x) dx ≈ Σ w̃_i g(x_i)` when
    /// `g` decays like a Gaussian.
    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    /// Nodes and measure weights of the rule stretched to the envelope
    /// `e^{-s x²}`: `∫ P(x) e^{-s x²} dx` is exact for `deg P ≤ 2M - 1`.
    pub fn stretched(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let root = s.sqrt();
        let nodes = self.nodes.iter().map(|y| y / root).collect();
        let weights = self.scaled_weights.iter().map(|w| w / root).collect();
        (nodes, weights)
    }

    /// `Σ w_i f(x_i)`, i.e. the rule applied against the weight `e^{-x²}`.
    pub fn integrate_weighted(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

pub fn build_quadrature(m: usize) -> Result<QuadratureRule> {
    if m == 0 || m > MAX_NODES {
        return Err(Error::param(
            "M",
            format!("node count {m} outside 1..={MAX_NODES}"),
        ));
    }

    // Jacobi matrix: zero diagonal, off-diagonal sqrt(k/2).
    let mut diag = vec![0.0; m];
    let mut off: Vec<f64> = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
    off.push(0.0);
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(|a, b| a.total_cmp(b));

    // Polish the non-negative half and mirror it so the rule is exactly symmetric.
    let half = m / 2;
    let mut positive: Vec<f64> = (0..half)
        .map(|i| {
            let guess = 0.5 * (diag[m - 1 - i] - diag[i]);
            newton_polish(m, guess)
        })
        .collect();
    positive.reverse();

    let mut nodes = Vec::with_capacity(m);
    nodes.extend(positive.iter().rev().map(|x| -x));
    if m % 2 == 1 {
        nodes.push(0.0);
    }
    nodes.extend(positive.iter().copied());

    let mut weights = Vec::with_capacity(m);
    let mut scaled_weights = Vec::with_capacity(m);
    for &x in &nodes {
        let (_, prev, log_scale) = orthonormal_pair(m, x);
        let log_w = -(m as f64).ln() - 2.0 * (prev.abs().ln() + log_scale);
        weights.push(log_w.exp());
        scaled_weights.push((log_w + x * x).exp());
    }

    Ok(QuadratureRule {
        nodes,
        weights,
        scaled_weights,
    })
}

/// Values `(p_m, p_{m-1})` of the orthonormal Hermite polynomials at `x`,
/// returned as mantissas sharing the factor `exp(log_scale)`.
fn orthonormal_pair(m: usize, x: f64) -> (f64, f64, f64) {
    const BIG: f64 = 1e100;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut log_scale = 0.0;
    for k in 0..m {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            log_scale += BIG.ln();
        }
    }
    (cur, prev, log_scale)
}

fn newton_polish(m: usize, mut x: f64) -> f64 {
    let slope = (2.0 * m as f64).sqrt();
    for _ in 0..8 {
        let (pm, pm1, _) = orthonormal_pair(m, x);
        let step = pm / (slope * pm1);
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// `off[i]` couples rows `i` and `i + 1`; on return `diag` holds the
/// eigenvalues (unsorted).
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::Accuracy(
                    "tridiagonal QL iteration did not converge".into(),
                ));
            }

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
