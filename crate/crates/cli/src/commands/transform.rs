use std::sync::Arc;

use hermite_core::density::random_coefficients;
use hermite_core::hermite::{
    analyze, grid_norm_sqr, synthesize_on_grid, HermiteBasis1D, MultiIndexSet, SpectralState,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{draw_seed, max_of};
use crate::config::{field_error, TransformConfig};
use crate::error::{Context, LabError};
use crate::report::{Check, Report, Table};

pub const COLUMNS: [&str; 8] = [
    "state",
    "seed",
    "k_max",
    "nodes",
    "coeff_norm_sq",
    "grid_norm_sq",
    "roundtrip_error",
    "norm_identity_error",
];

struct Row {
    seed: u64,
    coeff_norm: f64,
    grid_norm: f64,
    roundtrip: f64,
}

/// Unit-norm state with standard complex Gaussian coefficients.
pub fn random_unit_state(index: &Arc<MultiIndexSet>, seed: u64) -> hermite_core::Result<SpectralState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = random_coefficients(index.len(), &mut rng);
    let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= norm);
    SpectralState::new(index.clone(), c)
}

pub fn run(cfg: &TransformConfig, seed: u64) -> Result<Report, LabError> {
    if cfg.states == 0 {
        return Err(field_error("transform", "states", "must be at least 1"));
    }
    let basis = HermiteBasis1D::new(cfg.k_max, cfg.nodes).context("transform")?;
    let index = Arc::new(MultiIndexSet::new(1, cfg.k_max).context("transform")?);
    let rows = (0..cfg.states)
        .into_par_iter()
        .map(|i| {
            let seed = draw_seed(seed, i);
            let state = random_unit_state(&index, seed)?;
            let samples = synthesize_on_grid(&state, &basis)?;
            let back = analyze(&samples, &basis, &index)?;
            Ok(Row {
                seed,
                coeff_norm: state.norm_sqr(),
                grid_norm: grid_norm_sqr(&samples, &basis, 1),
                roundtrip: max_of(back.coeffs().iter().zip(state.coeffs()).map(|(a, b)| (a - b).norm())),
            })
        })
        .collect::<hermite_core::Result<Vec<Row>>>()
        .context("transform")?;

    let mut table = Table::new(&COLUMNS);
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![
            i.into(),
            r.seed.into(),
            cfg.k_max.into(),
            cfg.nodes.into(),
            r.coeff_norm.into(),
            r.grid_norm.into(),
            r.roundtrip.into(),
            (r.coeff_norm - r.grid_norm).abs().into(),
        ]);
    }
    Ok(Report {
        command: "transform",
        title: "Hermite analysis/synthesis round trip",
        property: "for f = Σ_{k≤K} c_k Φ_k sampled at M ≥ 2K+1 Gauss–Hermite nodes, \
                   analysis recovers c exactly and ‖f‖²_{L²} = Σ|c_k|²",
        notes: vec![format!(
            "{} unit-norm random states, K = {}, M = {}",
            cfg.states, cfg.k_max, cfg.nodes
        )],
        checks: vec![
            Check::at_most("max coefficient round-trip error", max_of(rows.iter().map(|r| r.roundtrip)), 1e-10),
            Check::at_most(
                "max norm identity error",
                max_of(rows.iter().map(|r| (r.coeff_norm - r.grid_norm).abs())),
                1e-10,
            ),
        ],
        table,
    })
}
