use std::f64::consts::PI;
use std::sync::Arc;

use hermite_core::density::schatten_norm_matrix;
use hermite_core::hermite::{analyze, synthesize, HermiteBasis1D, MultiIndexSet, PointSet};
use hermite_core::optimality::{
    berezin_bound, closed_form_density, closed_form_mixed_norm, coherent_state,
    evolved_coherent_magnitude, gamma0_matrix, mixed_norm_by_quadrature, phase_space_density,
    predicted_exponent, scaling_exponent_fit, scaling_points, CoherentParams,
};
use hermite_core::propagator::evolve_spectral;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::max_of;
use crate::config::{field_error, OptimalityConfig};
use crate::error::{Context, LabError};
use crate::report::{Check, Report, Table};

pub const COLUMNS: [&str; 9] = [
    "r",
    "m",
    "beta",
    "l",
    "mu",
    "n_trace",
    "mixed_norm",
    "berezin_bound",
    "ratio",
];

pub const SLOPE_TOLERANCE: f64 = 0.05;
pub const MIN_DECADES: f64 = 5.0;

const CTX: &str = "optimality";

fn params(v: [f64; 3]) -> hermite_core::Result<CoherentParams> {
    CoherentParams::new(v[0], v[1], v[2], 1)
}

/// Largest deviation between `|e^{itH}F_{x,ξ}|` computed spectrally and in
/// closed form, on `[-3, 3]`.
pub fn coherent_propagation_error(x: f64, xi: f64, beta: f64, t: f64, k_max: usize) -> hermite_core::Result<f64> {
    let basis = HermiteBasis1D::with_default_rule(k_max)?;
    let index = Arc::new(MultiIndexSet::new(1, k_max)?);
    let f = coherent_state(&[x], &[xi], beta, &basis.grid(1))?;
    let state = analyze(&f, &basis, &index)?;
    let evolved = evolve_spectral(&state, -t);
    let pts = PointSet::uniform(-3.0, 3.0, 25);
    let u = synthesize(&evolved, &pts)?;
    Ok(max_of(pts.iter().zip(&u).map(|(z, v)| {
        (evolved_coherent_magnitude(&[x], &[xi], beta, t, z) - v.norm()).abs()
    })))
}

pub fn run(cfg: &OptimalityConfig, seed: u64) -> Result<Report, LabError> {
    if cfg.r.is_empty() {
        return Err(field_error(CTX, "r", "need at least one Schatten exponent"));
    }
    if cfg.m_points < 2 || !(cfg.m_min < cfg.m_max) {
        return Err(field_error(CTX, "m_points", "need m_min < m_max and m_points ≥ 2"));
    }
    let ms: Vec<f64> = (0..cfg.m_points)
        .map(|i| cfg.m_min + (cfg.m_max - cfg.m_min) * i as f64 / (cfg.m_points - 1) as f64)
        .collect();
    let seq = ms
        .iter()
        .map(|&m| CoherentParams::scaling_point(m, 1))
        .collect::<hermite_core::Result<Vec<_>>>()
        .context(CTX)?;

    let mut table = Table::new(&COLUMNS);
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for &r in &cfg.r {
        let points = scaling_points(&seq, cfg.p, cfg.q, r).context(CTX)?;
        for (m, pt) in ms.iter().zip(&points) {
            table.push(vec![
                r.into(),
                (*m).into(),
                pt.params.beta.into(),
                pt.params.l.into(),
                pt.params.mu.into(),
                pt.summary.trace.into(),
                pt.summary.mixed_norm.into(),
                pt.summary.berezin_bound.into(),
                pt.summary.ratio.into(),
            ]);
        }
        let fit = scaling_exponent_fit(&seq, cfg.p, cfg.q, r).context(CTX)?;
        let predicted = predicted_exponent(cfg.q, r);
        notes.push(format!(
            "r = {r}: fitted slope {} (intercept {}), predicted (1+q)/(2q) − 1/r = {predicted}",
            fit.slope, fit.intercept
        ));
        checks.push(Check::near(
            format!("scaling slope at q = {}, r = {r}", cfg.q),
            fit.slope,
            predicted,
            SLOPE_TOLERANCE,
        ));
    }
    let traces: Vec<f64> = seq.iter().map(hermite_core::optimality::trace_n).collect();
    let decades = (max_of(traces.iter().copied()) / traces.iter().copied().fold(f64::INFINITY, f64::min)).log10();
    checks.push(Check::at_least("decades of N spanned", decades + 1e-9, MIN_DECADES));

    // Matrix oracle.
    let oracle = params(cfg.oracle).context(CTX)?;
    let g = gamma0_matrix(&oracle, cfg.matrix_k_max, cfg.matrix_nodes).context(CTX)?;
    notes.push(format!(
        "matrix oracle β = {}, L = {}, μ = {}, K = {}: trace {}, deficit {}, min eigenvalue {}",
        oracle.beta,
        oracle.l,
        oracle.mu,
        cfg.matrix_k_max,
        g.trace,
        g.trace_deficit,
        g.min_eigenvalue()
    ));
    checks.push(Check::at_most("matrix oracle trace deficit", g.trace_deficit.abs(), 0.01));
    for &r in &cfg.r {
        let actual = schatten_norm_matrix(&g.matrix, r).context(CTX)?;
        let bound = berezin_bound(&oracle, r).context(CTX)?;
        notes.push(format!(
            "Berezin–Lieb at r = {r}: ‖γ₀‖ = {actual}, bound {bound}, slack {}",
            1.0 - actual / bound
        ));
        checks.push(Check::at_most(
            format!("‖γ₀‖_{{S^{r}}} / Berezin–Lieb bound"),
            actual / bound,
            1.0 + 1e-10,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(f64, f64)> = (0..cfg.oracle_points)
        .map(|_| (rng.random_range(-PI..PI), rng.random_range(-3.0..3.0)))
        .collect();
    let deviations = samples
        .par_iter()
        .map(|&(t, z)| {
            let closed = closed_form_density(&oracle, t, &[z]);
            let quad = phase_space_density(&oracle, t, z, cfg.oracle_nodes)?;
            Ok(((quad / closed - 1.0).abs(), (g.density(t, z) / closed - 1.0).abs()))
        })
        .collect::<hermite_core::Result<Vec<(f64, f64)>>>()
        .context(CTX)?;
    notes.push(format!(
        "matrix-oracle density vs closed form, max relative deviation {}",
        max_of(deviations.iter().map(|d| d.1))
    ));
    checks.push(Check::at_most(
        format!("closed-form ρ vs phase-space quadrature ({} points, relative)", samples.len()),
        max_of(deviations.iter().map(|d| d.0)),
        1e-6,
    ));

    // Closed-form cross-checks.
    let [x, xi, beta, t] = cfg.coherent;
    let magnitude = coherent_propagation_error(x, xi, beta, t, cfg.coherent_k_max).context(CTX)?;
    checks.push(Check::at_most("evolved coherent magnitude vs spectral propagation", magnitude, 1e-6));
    let norm_errors = cfg
        .check_params
        .par_iter()
        .map(|&v| {
            let p = params(v)?;
            let closed = closed_form_mixed_norm(&p, cfg.p, cfg.q)?;
            let quad = mixed_norm_by_quadrature(
                &p,
                cfg.p,
                cfg.q,
                cfg.quadrature_time_points,
                cfg.quadrature_space_nodes,
            )?;
            Ok((quad / closed - 1.0).abs())
        })
        .collect::<hermite_core::Result<Vec<f64>>>()
        .context(CTX)?;
    checks.push(Check::at_most(
        format!("closed-form mixed norm vs quadrature ({} sets, relative)", norm_errors.len()),
        max_of(norm_errors.iter().copied()),
        1e-6,
    ));

    Ok(Report {
        command: "optimality",
        title: "coherent-state ensemble scaling",
        property: "for γ₀ = (2π)^{-1} ∬ e^{-x²/L²-ξ²/μ} |F_{x,ξ}⟩⟨F_{x,ξ}| the ratio ‖ρ‖_{L^p_t L^q_x} / ‖γ₀‖_{S^r} \
                   grows like N^{(1+q)/(2q) − 1/r}, so no Schatten exponent above 2q/(q+1) can work",
        notes,
        checks,
        table,
    })
}
