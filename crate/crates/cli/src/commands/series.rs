use std::f64::consts::PI;

use hermite_core::fit::log_log;
use hermite_core::series::{eval_fractional_series, log_grid, smooth_remainder, SeriesQuery};
use hermite_core::Complex64;
use rayon::prelude::*;

use super::max_of;
use crate::config::{field_error, SeriesConfig};
use crate::error::{Context, LabError};
use crate::report::{Check, Report, Table};

pub const COLUMNS: [&str; 10] = [
    "z_re",
    "z_im",
    "t",
    "series_re",
    "series_im",
    "singular_re",
    "singular_im",
    "remainder_re",
    "remainder_im",
    "error_estimate",
];

/// `Σ (-1)^k k^{-1/2} = -(1 - √2) ζ(1/2)`.
pub const ALTERNATING_VALUE: f64 = -0.604_898_643_421_630_4;
pub const SLOPE_TOLERANCE: f64 = 0.03;

fn query(z: Complex64, t: f64, tolerance: f64) -> hermite_core::Result<SeriesQuery> {
    let mut q = SeriesQuery::new(z, t)?;
    q.tolerance = tolerance;
    q.validate()?;
    Ok(q)
}

pub fn run(cfg: &SeriesConfig) -> Result<Report, LabError> {
    if cfg.z.is_empty() {
        return Err(field_error("series", "z", "need at least one exponent"));
    }
    if !(cfg.t_min > 0.0 && cfg.t_min <= cfg.t_max && cfg.t_max <= PI) || cfg.t_points == 0 {
        return Err(field_error("series", "t_min", "need 0 < t_min ≤ t_max ≤ π and t_points ≥ 1"));
    }
    if !(cfg.slope_t_min > 0.0 && cfg.slope_t_min < cfg.slope_t_max && cfg.slope_t_max <= PI)
        || cfg.slope_points < 2
    {
        return Err(field_error(
            "series",
            "slope_t_min",
            "need 0 < slope_t_min < slope_t_max ≤ π and slope_points ≥ 2",
        ));
    }
    let zs: Vec<Complex64> = cfg.z.iter().map(|&re| Complex64::new(re, cfg.z_imag)).collect();
    let table_times = log_grid(cfg.t_min, cfg.t_max, cfg.t_points);
    let slope_times = log_grid(cfg.slope_t_min, cfg.slope_t_max, cfg.slope_points);

    let jobs: Vec<(Complex64, f64)> =
        zs.iter().flat_map(|&z| table_times.iter().map(move |&t| (z, t))).collect();
    let comparisons = jobs
        .par_iter()
        .map(|&(z, t)| smooth_remainder(&query(z, t, cfg.tolerance)?))
        .collect::<hermite_core::Result<Vec<_>>>()
        .context("series")?;

    let slope_jobs: Vec<(Complex64, f64)> =
        zs.iter().flat_map(|&z| slope_times.iter().map(move |&t| (z, t))).collect();
    let magnitudes = slope_jobs
        .par_iter()
        .map(|&(z, t)| Ok(eval_fractional_series(&query(z, t, cfg.tolerance)?)?.value.norm()))
        .collect::<hermite_core::Result<Vec<f64>>>()
        .context("series")?;
    let at_one = zs
        .par_iter()
        .map(|&z| Ok(smooth_remainder(&query(z, 1.0, cfg.tolerance)?)?.remainder.norm()))
        .collect::<hermite_core::Result<Vec<f64>>>()
        .context("series")?;
    let alternating = eval_fractional_series(&query(Complex64::new(-0.5, 0.0), PI, cfg.tolerance).context("series")?)
        .context("series")?
        .value;

    let mut table = Table::new(&COLUMNS);
    for ((z, _), c) in jobs.iter().zip(&comparisons) {
        table.push(vec![
            z.re.into(),
            z.im.into(),
            c.t.into(),
            c.series.re.into(),
            c.series.im.into(),
            c.singular.re.into(),
            c.singular.im.into(),
            c.remainder.re.into(),
            c.remainder.im.into(),
            c.error.into(),
        ]);
    }

    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let n = table_times.len();
    let m = slope_times.len();
    for (i, z) in zs.iter().enumerate() {
        let mags = &magnitudes[i * m..(i + 1) * m];
        let slope = log_log(&slope_times, mags)
            .ok_or_else(|| field_error("series", "slope_points", "degenerate slope window"))?
            .slope;
        let predicted = -z.re - 1.0;
        checks.push(Check::near(
            format!("blow-up slope of ln|S_z| vs ln t at z = {z}"),
            slope,
            predicted,
            SLOPE_TOLERANCE,
        ));
        let sup = max_of(comparisons[i * n..(i + 1) * n].iter().map(|c| c.remainder.norm()));
        notes.push(format!(
            "z = {z}: sup|b| = {sup} on [{}, {}], |b(1)| = {}",
            cfg.t_min, cfg.t_max, at_one[i]
        ));
        checks.push(Check::at_most(
            format!("sup|b(t)| / |b(1)| at z = {z}"),
            sup / at_one[i],
            10.0,
        ));
    }
    checks.push(Check::near(
        "S_{-1/2}(π) real part",
        alternating.re,
        ALTERNATING_VALUE,
        1e-3,
    ));
    checks.push(Check::at_most("|Im S_{-1/2}(π)|", alternating.im.abs(), 1e-3));

    Ok(Report {
        command: "series",
        title: "fractional series S_z(t) = Σ_{k≥1} k^z e^{-ikt}",
        property: "b(t) = S_z(t) − Γ(z+1)(it)^{-z-1} extends smoothly to t = 0, so |S_z(t)| grows \
                   like t^{-Re z-1} as t → 0 while b stays bounded",
        notes,
        checks,
        table,
    })
}
