use std::f64::consts::PI;
use std::sync::Arc;

use hermite_core::density::{
    density_field, mixed_norm, schatten_norm_diagonal, strichartz_row, DensityGrids, MixedNormSpec,
    OrthonormalSystem, StrichartzRow, SystemFamily,
};
use hermite_core::fit::least_squares;
use hermite_core::hermite::{MultiIndexSet, SpectralState};
use rayon::prelude::*;

use super::{draw_seed, max_of};
use crate::config::{field_error, Family, StrichartzConfig};
use crate::error::{Context, LabError};
use crate::report::{Check, Report, Table};

pub const COLUMNS: [&str; 11] = [
    "seed",
    "j",
    "k_max",
    "p",
    "q",
    "r",
    "mixed_norm",
    "ratio",
    "r_alt",
    "ratio_alt",
    "trace_drift",
];

pub const SLOPE_WINDOW: f64 = 0.05;
pub const MIN_ALT_SLOPE: f64 = 0.1;
pub const TRACE_TOLERANCE: f64 = 1e-9;

/// `‖ρ‖_{L^p_t L^q_x}` of the single state Φ_0 in one dimension:
/// `(2π)^{1/p} π^{-1/2} (π/q)^{1/(2q)}`.
pub fn ground_state_norm(p: f64, q: f64) -> f64 {
    let time = if p.is_infinite() { 1.0 } else { (2.0 * PI).powf(1.0 / p) };
    time * PI.powf(-0.5) * (PI / q).powf(1.0 / (2.0 * q))
}

fn ground_row(q: f64, alt: f64) -> hermite_core::Result<StrichartzRow> {
    let spec = MixedNormSpec::for_q(1, q)?;
    let index = Arc::new(MultiIndexSet::new(1, 0)?);
    let system = OrthonormalSystem::new(vec![1.0], vec![SpectralState::basis_vector(index, &[0])?])?;
    let grids = DensityGrids::for_band_limit(1, 0, q)?;
    let field = density_field(&system, &grids)?;
    let norm = mixed_norm(&field, &spec)?;
    Ok(StrichartzRow {
        seed: 0,
        j: 1,
        k_max: 0,
        p: spec.p,
        q,
        mixed_norm: norm,
        ratio: norm / schatten_norm_diagonal(system.weights(), spec.schatten_exponent())?,
        ratio_alt: norm / schatten_norm_diagonal(system.weights(), alt)?,
        alt_exponent: alt,
        trace_drift: field.trace_drift(1.0),
    })
}

/// Least-squares slope of `ln ratio` against `ln J` over every row.
pub fn ratio_slope(rows: &[StrichartzRow], pick: impl Fn(&StrichartzRow) -> f64) -> Option<f64> {
    let x: Vec<f64> = rows.iter().map(|r| (r.j as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| pick(r).ln()).collect();
    least_squares(&x, &y).map(|f| f.slope)
}

pub fn run(cfg: &StrichartzConfig, seed: u64) -> Result<Report, LabError> {
    let spec = MixedNormSpec::for_q(1, cfg.q).context("strichartz")?;
    let r = spec.schatten_exponent();
    let rows = match cfg.family {
        Family::Ground => vec![ground_row(cfg.q, cfg.alt_exponent).context("strichartz")?],
        Family::Saturated | Family::FixedBand => {
            if cfg.seeds == 0 || cfg.j.is_empty() || cfg.j.contains(&0) {
                return Err(field_error("strichartz", "j", "need seeds ≥ 1 and sizes J ≥ 1"));
            }
            let family = match cfg.family {
                Family::FixedBand => {
                    if let Some(j) = cfg.j.iter().find(|&&j| j > cfg.k_max + 1) {
                        return Err(field_error(
                            "strichartz",
                            "j",
                            format!("J = {j} exceeds the band dimension {}", cfg.k_max + 1),
                        ));
                    }
                    SystemFamily::FixedBand { k_max: cfg.k_max }
                }
                _ => SystemFamily::Saturated,
            };
            let jobs: Vec<(u64, usize)> = (0..cfg.seeds)
                .flat_map(|i| cfg.j.iter().map(move |&j| (draw_seed(seed, i), j)))
                .collect();
            jobs.par_iter()
                .map(|&(s, j)| strichartz_row(family, j, cfg.q, cfg.alt_exponent, s))
                .collect::<hermite_core::Result<Vec<_>>>()
                .context("strichartz")?
        }
    };

    let mut table = Table::new(&COLUMNS);
    for row in &rows {
        table.push(vec![
            row.seed.into(),
            row.j.into(),
            row.k_max.into(),
            row.p.into(),
            row.q.into(),
            r.into(),
            row.mixed_norm.into(),
            row.ratio.into(),
            row.alt_exponent.into(),
            row.ratio_alt.into(),
            row.trace_drift.into(),
        ]);
    }

    let mut checks = vec![Check::at_most(
        "max trace drift of ρ",
        max_of(rows.iter().map(|r| r.trace_drift)),
        TRACE_TOLERANCE,
    )];
    let mut notes = vec![format!(
        "family {:?}, q = {}, p = {}, critical r = {r}, comparison r = {}",
        cfg.family, cfg.q, spec.p, cfg.alt_exponent
    )];
    if cfg.family == Family::Ground {
        let expect = ground_state_norm(spec.p, cfg.q);
        checks.push(Check::at_most(
            "relative error of the Φ_0 ratio against its closed form",
            (rows[0].ratio / expect - 1.0).abs(),
            1e-10,
        ));
        notes.push(format!("closed-form Φ_0 value {expect}"));
    } else if let (Some(crit), Some(alt)) =
        (ratio_slope(&rows, |r| r.ratio), ratio_slope(&rows, |r| r.ratio_alt))
    {
        checks.push(Check::within(
            "slope of ln ratio vs ln J at the critical exponent",
            crit,
            -SLOPE_WINDOW,
            SLOPE_WINDOW,
        ));
        checks.push(Check::at_least(
            format!("slope of ln ratio vs ln J at r = {}", cfg.alt_exponent),
            alt,
            MIN_ALT_SLOPE,
        ));
        notes.push(format!("{} seeds, J ∈ {:?}", cfg.seeds, cfg.j));
    }

    Ok(Report {
        command: "strichartz",
        title: "orthonormal Strichartz ratio sweep",
        property: "for orthonormal (u_j) and ρ = Σ n_j |e^{-itH}u_j|², \
                   ‖ρ‖_{L^p_t L^q_x} ≤ C ‖(n_j)‖_{ℓ^{2q/(q+1)}} with 2/p + n/q = n and C independent of J",
        notes,
        checks,
        table,
    })
}
