use std::f64::consts::PI;
use std::sync::Arc;

use hermite_core::density::random_orthonormal_system;
use hermite_core::fit::log_log;
use hermite_core::hartree::{
    energy_drift, HartreeConfig, HartreeSolver, HartreeState, InteractionKernel, UniformGrid,
};
use hermite_core::hermite::{MultiIndexSet, SpectralState};
use hermite_core::propagator::evolve_spectral;
use rayon::prelude::*;

use super::max_of;
use crate::config::{field_error, HartreeSection, KernelChoice};
use crate::error::{Context, LabError};
use crate::report::{Check, Report, Table};

pub const COLUMNS: [&str; 7] = [
    "step",
    "time",
    "trace",
    "mass_drift",
    "gram_drift",
    "energy",
    "band_tail",
];

const CTX: &str = "hartree";

fn kernel(cfg: &HartreeSection) -> hermite_core::Result<InteractionKernel> {
    match cfg.kernel {
        KernelChoice::Gaussian => InteractionKernel::gaussian(cfg.amplitude, cfg.width),
        KernelChoice::Tabulated => InteractionKernel::tabulated(cfg.kernel_spacing, cfg.kernel_samples.clone()),
    }
}

fn solver(
    cfg: &HartreeSection,
    dt: f64,
    steps: usize,
    interaction: InteractionKernel,
) -> hermite_core::Result<HartreeSolver> {
    let mut c = HartreeConfig::new(dt, steps, UniformGrid::new(cfg.half_width, cfg.points)?, interaction);
    c.band_tolerance = cfg.band_tolerance;
    HartreeSolver::new(cfg.k_max, c)
}

pub fn initial_state(cfg: &HartreeSection, seed: u64) -> hermite_core::Result<HartreeState> {
    let index = Arc::new(MultiIndexSet::new(1, cfg.initial_degree)?);
    let system = random_orthonormal_system(cfg.weights.len(), &index, seed)?.with_weights(cfg.weights.clone())?;
    HartreeState::from_system(&system, cfg.k_max)
}

pub fn run(cfg: &HartreeSection, seed: u64) -> Result<Report, LabError> {
    if cfg.weights.is_empty() {
        return Err(field_error(CTX, "weights", "need at least one weight"));
    }
    if cfg.energy_dts.len() < 2 || !(cfg.energy_time > 0.0) {
        return Err(field_error(CTX, "energy_dts", "need two or more steps and energy_time > 0"));
    }
    if cfg.return_steps == 0 {
        return Err(field_error(CTX, "return_steps", "must be at least 1"));
    }
    let interaction = kernel(cfg).context(CTX)?;
    let zero = InteractionKernel::gaussian(0.0, 1.0).context(CTX)?;
    let state = initial_state(cfg, seed).context(CTX)?;

    let run = solver(cfg, cfg.dt, cfg.steps, interaction.clone())
        .and_then(|s| s.evolve(&state))
        .context(CTX)?;
    let mut table = Table::new(&COLUMNS);
    for d in &run.diagnostics {
        table.push(vec![
            d.step.into(),
            d.time.into(),
            d.trace.into(),
            d.mass_drift.into(),
            d.gram_drift.into(),
            d.energy.into(),
            d.band_tail.into(),
        ]);
    }
    let trace0 = run.diagnostics[0].trace;

    // One step without interaction against the linear flow.
    let free = solver(cfg, cfg.dt, 1, zero.clone()).context(CTX)?;
    let next = free.strang_step(&state).context(CTX)?;
    let mut reduction: f64 = 0.0;
    for (a, b) in next.coeffs.iter().zip(&state.coeffs) {
        let lin = evolve_spectral(&SpectralState::new(state.index.clone(), b.clone()).context(CTX)?, cfg.dt);
        reduction = reduction.max(max_of(a.iter().zip(lin.coeffs()).map(|(x, y)| (x - y).norm())));
    }

    let drifts = cfg
        .energy_dts
        .par_iter()
        .map(|&dt| {
            let steps = (cfg.energy_time / dt).round() as usize;
            Ok(energy_drift(&solver(cfg, dt, steps, interaction.clone())?.evolve(&state)?))
        })
        .collect::<hermite_core::Result<Vec<f64>>>()
        .context(CTX)?;
    let order = log_log(&cfg.energy_dts, &drifts)
        .ok_or_else(|| field_error(CTX, "energy_dts", "need distinct step sizes"))?
        .slope;

    let half = solver(cfg, PI / cfg.return_steps as f64, cfg.return_steps, zero).context(CTX)?;
    let back = half.evolve(&state).context(CTX)?.state;
    let (a, b) = (half.density(&state), half.density(&back));
    let periodic = max_of(a.iter().zip(&b).map(|(x, y)| (x - y).abs()));

    Ok(Report {
        command: "hartree",
        title: "Hartree evolution by Strang splitting",
        property: "i∂_t γ = [H + w⋆ρ_γ, γ] conjugates γ₀ by unitaries: each orbital keeps its mass, \
                   the Gram matrix is invariant and the energy is conserved",
        notes: vec![
            format!(
                "J = {}, weights {:?}, band K = {}, dt = {}, {} steps, kernel {:?}",
                cfg.weights.len(),
                cfg.weights,
                cfg.k_max,
                cfg.dt,
                cfg.steps,
                cfg.kernel
            ),
            format!(
                "energy drift over T = {} at dt = {:?}: {:?}",
                cfg.energy_time, cfg.energy_dts, drifts
            ),
            format!(
                "trace drift over the run {}",
                max_of(run.diagnostics.iter().map(|d| (d.trace - trace0).abs()))
            ),
        ],
        checks: vec![
            Check::at_most("reduction to the linear flow at w = 0", reduction, 1e-10),
            Check::at_most(
                "max per-step mass drift",
                max_of(run.diagnostics.iter().map(|d| d.mass_drift)),
                1e-12,
            ),
            Check::at_most(
                format!("max Gram drift over {} steps", cfg.steps),
                max_of(run.diagnostics.iter().map(|d| d.gram_drift)),
                1e-10,
            ),
            Check::within("energy-drift order in dt", order, 1.8, 2.2),
            Check::at_most("density return after time π at w = 0", periodic, 1e-8),
        ],
        table,
    })
}
