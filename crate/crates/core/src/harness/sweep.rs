//! `ε`-ladder comparisons between the split-step solution and `v₀`.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::norms::{error_norms, ErrorRecord};
use super::scenario::Scenario;
use crate::bloch::{well_prepared_corrector, BlochBand, InitialProfile};
use crate::error::{Error, Result};
use crate::field::{WaveField, WaveGrid};
use crate::nls::{solve_nls, NlsConfig};
use crate::rays::{trace_bundle, RayBundle, RaySettings};
use crate::wkb::{assemble_v0, eulerianize, initial_data, launch_grid_within};

/// Errors below this are treated as round-off and excluded from fits.
pub const FLOOR: f64 = 1e-10;

/// Traces the ray fan of `scenario` up to `τ₀` and checks that it stays
/// caustic-free.
pub fn ray_prepass(scenario: &Scenario, band: &BlochBand) -> Result<RayBundle> {
    let profile = scenario.profile();
    let settings = RaySettings::new(
        scenario.nls.sigma,
        scenario.coupling(),
        scenario.nls.t_end,
        scenario.sweep.ray_dt,
    );
    // a few spacings past the box so the fan covers every grid point
    let pad = 4.0 * scenario.sweep.ray_spacing;
    let x0 = launch_grid_within(
        &profile,
        scenario.sweep.ray_spacing,
        scenario.nls.x_min - pad,
        scenario.nls.x_max + pad,
    );
    let bundle = trace_bundle(band, &scenario.confinement()?, &x0, &profile, &settings)?;
    if scenario.nls.t_end >= bundle.caustic_time {
        return Err(Error::PostCaustic {
            t: scenario.nls.t_end,
            caustic: bundle.caustic_time,
        });
    }
    Ok(bundle)
}

/// Solver configuration of `scenario` at scale `epsilon`.
pub fn nls_config(scenario: &Scenario, epsilon: f64) -> Result<NlsConfig> {
    let mut config = NlsConfig::new(
        epsilon,
        scenario.nls.sigma,
        scenario.coupling(),
        scenario.potential()?,
        scenario.confinement()?,
        scenario.grid(epsilon)?,
        scenario.dt(epsilon),
        scenario.nls.t_end,
    )
    .with_snapshots(scenario.snapshot_times());
    if !scenario.nls.edge_check {
        config.edge_tol = f64::INFINITY;
    }
    Ok(config)
}

/// Initial data on the solver grid, optionally well prepared.
pub fn initial_field(scenario: &Scenario, band: &BlochBand, epsilon: f64, corrector: bool) -> Result<WaveField> {
    let grid = scenario.grid(epsilon)?;
    let profile = scenario.profile();
    let phi1 = if corrector {
        Some(well_prepared_corrector(
            band,
            &profile,
            &scenario.confinement()?,
            scenario.coupling().at(0.0).re,
            scenario.nls.sigma,
            &grid.points(),
        )?)
    } else {
        None
    };
    initial_data(&profile, band, epsilon, &grid, phi1.as_ref())
}

/// `v₀` at time `t` on `grid`.
pub fn approximate_solution(
    bundle: &RayBundle,
    band: &BlochBand,
    profile: &InitialProfile,
    epsilon: f64,
    grid: &WaveGrid,
    t: f64,
) -> Result<WaveField> {
    let fields = eulerianize(bundle, profile, t, &grid.points())?;
    assemble_v0(&fields, band, epsilon, grid)
}

/// One rung of the ladder: solve, assemble `v₀` at every snapshot and keep
/// the worst error.
pub fn run_epsilon(
    scenario: &Scenario,
    band: &BlochBand,
    bundle: &RayBundle,
    epsilon: f64,
    corrector: bool,
) -> Result<ErrorRecord> {
    let start = Instant::now();
    let config = nls_config(scenario, epsilon)?;
    let psi0 = initial_field(scenario, band, epsilon, corrector)?;
    let snaps = solve_nls(&config, &psi0)?;
    let profile = scenario.profile();
    let mut record = ErrorRecord::zero(epsilon);
    for psi in &snaps {
        let v0 = approximate_solution(bundle, band, &profile, epsilon, &config.grid, psi.t)?;
        record.absorb(&error_norms(psi, &v0, scenario.sweep.s_max)?);
    }
    record.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub corrector: bool,
    pub records: Vec<ErrorRecord>,
    /// Rungs whose pipeline failed, with the error message.
    pub failures: Vec<(f64, String)>,
    /// Least-squares slope of `log error` against `log ε`; `None` when
    /// fewer than two rungs are above the floor.
    pub fitted_order_l2: Option<f64>,
    pub fitted_order_linf: Option<f64>,
    /// Set when some rung's `L²` error is below [`FLOOR`].
    pub floor: bool,
}

impl ConvergenceReport {
    pub fn from_records(scenario: &str, corrector: bool, records: Vec<ErrorRecord>, failures: Vec<(f64, String)>) -> Self {
        let fit = |f: fn(&ErrorRecord) -> f64| {
            let pts: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.l2_error >= FLOOR)
                .map(|r| (r.epsilon.ln(), f(r).ln()))
                .collect();
            fit_slope(&pts)
        };
        ConvergenceReport {
            scenario: scenario.to_string(),
            corrector,
            fitted_order_l2: fit(|r| r.l2_error),
            fitted_order_linf: fit(|r| r.linf_error),
            floor: records.iter().any(|r| r.l2_error < FLOOR),
            records,
            failures,
        }
    }

    /// `L²` errors strictly decrease along the ladder.
    pub fn strictly_decreasing(&self) -> bool {
        self.failures.is_empty() && self.records.windows(2).all(|w| w[1].l2_error < w[0].l2_error)
    }

    /// CSV: `epsilon, l2_error, linf_error, xs_0..xs_s, runtime_seconds`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let s_keys: Vec<u32> = self
            .records
            .first()
            .map(|r| r.xs_errors.keys().copied().collect())
            .unwrap_or_default();
        let mut header = vec!["epsilon".to_string(), "l2_error".into(), "linf_error".into()];
        header.extend(s_keys.iter().map(|s| format!("xs_{s}")));
        header.push("runtime_seconds".into());
        writeln!(out, "{}", header.join(","))?;
        for r in &self.records {
            let mut row = vec![
                format!("{:.17e}", r.epsilon),
                format!("{:.17e}", r.l2_error),
                format!("{:.17e}", r.linf_error),
            ];
            row.extend(s_keys.iter().map(|s| format!("{:.17e}", r.xs_errors.get(s).copied().unwrap_or(f64::NAN))));
            row.push(format!("{:.3}", r.runtime_seconds));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Least-squares slope through `(x, y)` points.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Checks for at least three rungs, each half the previous one.
pub fn check_ladder(epsilons: &[f64]) -> Result<()> {
    if epsilons.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 epsilons, got {}", epsilons.len())));
    }
    if epsilons.windows(2).any(|w| (w[1] / w[0] - 0.5).abs() > 1e-12) {
        return Err(Error::invalid("epsilon ladder must halve at every rung"));
    }
    Ok(())
}

/// Runs the ladder for `scenario` with its own band and corrector setting.
pub fn convergence_sweep(scenario: &Scenario, epsilons: &[f64]) -> Result<ConvergenceReport> {
    let band = scenario.band()?;
    sweep_with_band(scenario, &band, epsilons, scenario.sweep.corrector)
}

/// Runs the ladder with an explicit band (for instance with a gauge twist).
/// Failures on individual rungs are recorded, not propagated.
pub fn sweep_with_band(
    scenario: &Scenario,
    band: &BlochBand,
    epsilons: &[f64],
    corrector: bool,
) -> Result<ConvergenceReport> {
    check_ladder(epsilons)?;
    let bundle = ray_prepass(scenario, band)?;
    let results: Vec<(f64, Result<ErrorRecord>)> = epsilons
        .par_iter()
        .map(|&eps| (eps, run_epsilon(scenario, band, &bundle, eps, corrector)))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (eps, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push((eps, e.to_string())),
        }
    }
    Ok(ConvergenceReport::from_records(&scenario.name, corrector, records, failures))
}
