//! One function per subcommand. Each returns a [`Table`] ready to render.

use antiphase_core::{
    decoupled_polar, eigenvalues_closed_form, floquet_block, integrate_orbit,
    max_transverse_floquet, spectrum_uniform, wrap_phase, DecoupledPoint, RingParams, BLOCK_SCALE,
};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::table::{Cell, Table};

fn provenance(table: &mut Table, command: &str, config: &RunConfig) {
    table
        .comment(format!("antiphase {}", env!("CARGO_PKG_VERSION")))
        .comment(format!("command: {command}"))
        .comment(format!("config: {}", config.to_json_line()));
}

fn rate_note(table: &mut Table) {
    table.comment(format!(
        "rates are in block time units: multiply by {} for rates of the equations of motion",
        1.0 / BLOCK_SCALE
    ));
}

/// Evaluate `f` on every index in `0..count` on a pool of `workers` threads.
/// Results come back in index order whatever the scheduling.
pub fn run_cells<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> antiphase_core::Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("building worker pool")?;
    let out: antiphase_core::Result<Vec<T>> =
        pool.install(|| (0..count).into_par_iter().map(&f).collect());
    Ok(out?)
}

/// Trajectory from the decoupled state at `(theta0, psi0)`.
pub fn simulate(config: &RunConfig) -> Result<Table> {
    let params = config.ring()?;
    let n = params.n();
    let mut columns = vec!["t".to_string()];
    columns.extend((0..n).map(|j| format!("a_{j}")));
    columns.extend((0..n).map(|j| format!("phi_{j}")));
    columns.extend(["theta".to_string(), "psi".to_string()]);
    let mut table = Table::new(columns);
    provenance(&mut table, "simulate", config);
    table.comment("phi_j reduced to [0, 2pi); theta = phi_0 and psi = phi_1 - phi_0 unwrapped");

    let start = decoupled_polar(&params, DecoupledPoint::new(config.theta0, config.psi0))?;
    let mut rows = Vec::new();
    integrate_orbit(
        &params,
        &start,
        config.dt,
        config.n_steps,
        config.sample_stride,
        |s| {
            let mut row = Vec::with_capacity(2 * n + 3);
            row.push(Cell::Float(s.time));
            row.extend(s.state.amplitudes().map(Cell::Float));
            row.extend(s.state.phases().map(|p| Cell::Float(wrap_phase(p))));
            row.push(Cell::Float(s.state.phase(0)));
            row.push(Cell::Float(s.state.phase(1) - s.state.phase(0)));
            rows.push(row);
        },
    )
    .context("simulation aborted")?;
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

/// Closed-form block spectra over the ψ grid.
pub fn eigs(config: &RunConfig) -> Result<Table> {
    let params = config.ring()?;
    // rejects detuned configurations before anything else
    spectrum_uniform(&params, 0.0)?;
    let psis = config.grid("psi_grid")?.values();
    let mut columns = vec!["psi".to_string(), "k".to_string()];
    for i in 1..=4 {
        columns.push(format!("re_{i}"));
        columns.push(format!("im_{i}"));
    }
    let mut table = Table::new(columns);
    provenance(&mut table, "eigs", config);
    rate_note(&mut table);
    for &psi in &psis {
        for k in 0..params.n_blocks() {
            let ev = eigenvalues_closed_form(&params, psi, k)?;
            let mut row = vec![Cell::Float(psi), Cell::from(k)];
            for z in ev {
                row.push(Cell::Float(z.re));
                row.push(Cell::Float(z.im));
            }
            table.push(row);
        }
    }
    Ok(table)
}

/// Max transverse real part over the (α, ψ) grid, α outer.
pub fn sweep_uniform(config: &RunConfig, workers: usize) -> Result<Table> {
    let params = config.ring()?;
    if !params.is_uniform() {
        return Err(antiphase_core::Error::DetunedSystem(params.detuning()).into());
    }
    let alphas = config.grid("alpha_grid")?.values();
    let psis = config.grid("psi_grid")?.values();
    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| psis.iter().map(move |&p| (a, p)))
        .collect();
    let values = run_cells(cells.len(), workers, |i| {
        let (alpha, psi) = cells[i];
        Ok(spectrum_uniform(&params.with_alpha(alpha)?, psi)?.max_transverse)
    })?;

    let mut table = Table::new(["alpha", "psi", "max_transverse"]);
    provenance(&mut table, "sweep-uniform", config);
    rate_note(&mut table);
    for ((alpha, psi), v) in cells.iter().zip(values) {
        table.push(vec![Cell::Float(*alpha), Cell::Float(*psi), Cell::Float(v)]);
    }
    Ok(table)
}

fn detuning_axis(config: &RunConfig) -> Result<Vec<f64>> {
    let omegas = config.grid("omega_grid")?.values();
    if omegas.contains(&0.0) {
        return Err(antiphase_core::Error::ZeroDetuning.into());
    }
    if omegas.iter().any(|&w| w < 0.0) {
        bail!("omega_grid must be strictly positive");
    }
    Ok(omegas)
}

/// Max transverse Floquet exponent over the (α, Ω) grid, α outer.
pub fn sweep_alternating(config: &RunConfig, workers: usize) -> Result<Table> {
    let params = config.ring()?;
    let alphas = config.grid("alpha_grid")?.values();
    let omegas = detuning_axis(config)?;
    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| omegas.iter().map(move |&w| (a, w)))
        .collect();
    let steps = config.floquet_steps;
    let values = run_cells(cells.len(), workers, |i| {
        let (alpha, detuning) = cells[i];
        let p = params.with_alpha(alpha)?.with_detuning(detuning)?;
        max_transverse_floquet(&p, steps)
    })?;

    let mut table = Table::new(["alpha", "omega_detuning", "max_transverse_floquet"]);
    provenance(&mut table, "sweep-alternating", config);
    table
        .comment(format!("floquet_steps: {steps}"))
        .comment("period: 2pi/|omega_detuning|; exponents ln|mu|/period; psi0 = 0");
    rate_note(&mut table);
    for ((alpha, detuning), v) in cells.iter().zip(values) {
        table.push(vec![
            Cell::Float(*alpha),
            Cell::Float(*detuning),
            Cell::Float(v),
        ]);
    }
    Ok(table)
}

/// Per-block Floquet exponents at the configured detuning, or over the Ω grid
/// when one is given.
pub fn floquet(config: &RunConfig, workers: usize) -> Result<Table> {
    let params = config.ring()?;
    let omegas = match &config.omega_grid {
        Some(_) => detuning_axis(config)?,
        None => vec![params.detuning()],
    };
    let steps = config.floquet_steps;
    let blocks = params.n_blocks();
    let psi0 = config.psi0;
    let per_omega = run_cells(omegas.len(), workers, |i| {
        let p: RingParams = params.with_detuning(omegas[i])?;
        (0..blocks)
            .map(|k| floquet_block(&p, k, psi0, steps))
            .collect::<antiphase_core::Result<Vec<_>>>()
    })?;

    let mut table = Table::new(["omega_detuning", "k", "exp_1", "exp_2", "exp_3", "exp_4"]);
    provenance(&mut table, "floquet", config);
    table
        .comment(format!("floquet_steps: {steps}"))
        .comment("period: 2pi/|omega_detuning|; exponents ln|mu|/period, descending");
    rate_note(&mut table);
    for (w, rates) in omegas.iter().zip(per_omega) {
        for (k, r) in rates.iter().enumerate() {
            let mut row = vec![Cell::Float(*w), Cell::from(k)];
            row.extend(r.iter().map(|&x| Cell::Float(x)));
            table.push(row);
        }
    }
    Ok(table)
}
