//! Strang-split spectral solver for
//!
//! ```text
//! iε∂_tψ = -ε²/2 ∂²_xψ + V(x/ε)ψ + U(x)ψ + ελ(t)|ψ|^{2σ}ψ
//! ```
//!
//! on a periodic box. The potential/nonlinear sub-flow is solved exactly
//! pointwise (for complex `λ` the modulus obeys a separable ODE), the
//! kinetic sub-flow exactly in Fourier space.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::Fft;

use crate::coupling::Coupling;
use crate::error::{Error, Result};
pub use crate::field::{mass, WaveField, WaveGrid};
use crate::fourier;
use crate::lattice::PeriodicPotential;
use crate::rays::ConfinementPotential;

/// Default bound `dt ≤ dt_factor·ε`.
pub const DT_FACTOR: f64 = 0.1;
/// Largest admissible modulus at the box edges.
pub const EDGE_TOL: f64 = 1e-10;
/// Moduli beyond this are reported as overflow.
pub const OVERFLOW_MODULUS: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct NlsConfig {
    pub epsilon: f64,
    pub sigma: u32,
    pub lambda: Coupling,
    pub potential: PeriodicPotential,
    pub confinement: ConfinementPotential,
    pub grid: WaveGrid,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub dt_factor: f64,
    pub edge_tol: f64,
}

impl NlsConfig {
    pub fn new(
        epsilon: f64,
        sigma: u32,
        lambda: Coupling,
        potential: PeriodicPotential,
        confinement: ConfinementPotential,
        grid: WaveGrid,
        dt: f64,
        t_end: f64,
    ) -> Self {
        NlsConfig {
            epsilon,
            sigma,
            lambda,
            potential,
            confinement,
            grid,
            dt,
            t_end,
            snapshot_times: vec![t_end],
            dt_factor: DT_FACTOR,
            edge_tol: EDGE_TOL,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(Error::invalid("need epsilon > 0, dt > 0, t_end >= 0"));
        }
        if self.dt > self.dt_factor * self.epsilon * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "dt = {} exceeds {} * epsilon",
                self.dt, self.dt_factor
            )));
        }
        if !self.grid.n.is_power_of_two() {
            return Err(Error::invalid(format!("grid size {} is not a power of two", self.grid.n)));
        }
        if self
            .snapshot_times
            .windows(2)
            .any(|w| w[1] < w[0])
            || self.snapshot_times.iter().any(|&t| t < 0.0 || t > self.t_end + 1e-12)
        {
            return Err(Error::invalid("snapshot times must be sorted within [0, t_end]"));
        }
        Ok(())
    }
}

/// Stepper with precomputed potentials and transform plans.
pub struct SplitStep {
    epsilon: f64,
    sigma: u32,
    lambda: Coupling,
    /// `(V(x/ε) + U(x))/ε` at the grid points.
    potential: Vec<f64>,
    xi2: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kinetic: Vec<Complex64>,
    kinetic_h: f64,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(config: &NlsConfig) -> Self {
        let g = config.grid;
        let eps = config.epsilon;
        let potential = g
            .points()
            .into_iter()
            .map(|x| (config.potential.eval(x / eps) + config.confinement.value(x)) / eps)
            .collect();
        let xi2 = fourier::wavenumbers(g.n, g.length()).into_iter().map(|k| k * k).collect();
        SplitStep {
            epsilon: eps,
            sigma: config.sigma,
            lambda: config.lambda.clone(),
            potential,
            xi2,
            forward: fourier::forward(g.n),
            inverse: fourier::inverse(g.n),
            kinetic: Vec::new(),
            kinetic_h: f64::NAN,
            scratch: vec![Complex64::new(0.0, 0.0); fourier::forward(g.n).get_inplace_scratch_len()],
        }
    }

    /// Exact flow of the potential and nonlinear terms over `h` with
    /// coupling `lam`.
    fn potential_flow(&self, psi: &mut [Complex64], h: f64, lam: Complex64, t: f64) -> Result<()> {
        let s = self.sigma as i32;
        let sf = self.sigma as f64;
        let (a, b) = (lam.re, lam.im);
        for (z, &v) in psi.iter_mut().zip(&self.potential) {
            let m0 = z.norm_sqr();
            let mut theta = -v * h;
            if m0 > 0.0 && lam != Complex64::new(0.0, 0.0) {
                let ms = m0.powi(s);
                if b == 0.0 {
                    theta -= a * ms * h;
                } else {
                    let q = 1.0 - 2.0 * sf * b * h * ms;
                    if q <= 0.0 {
                        return Err(Error::Overflow { last_valid: t });
                    }
                    let m = m0 * q.powf(-1.0 / sf);
                    if !(m.sqrt() < OVERFLOW_MODULUS) {
                        return Err(Error::Overflow { last_valid: t });
                    }
                    theta -= a * (-q.ln() / (2.0 * sf * b));
                    *z *= (m / m0).sqrt();
                }
            }
            *z *= Complex64::cis(theta);
        }
        Ok(())
    }

    fn kinetic_flow(&mut self, psi: &mut [Complex64], h: f64) {
        if h != self.kinetic_h {
            let n = psi.len() as f64;
            self.kinetic = self
                .xi2
                .iter()
                .map(|&q| Complex64::cis(-0.5 * h * self.epsilon * q) / n)
                .collect();
            self.kinetic_h = h;
        }
        self.forward.process_with_scratch(psi, &mut self.scratch);
        for (z, m) in psi.iter_mut().zip(&self.kinetic) {
            *z *= m;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }

    /// One Strang step from `t` to `t + h`; `λ` is sampled at the midpoint
    /// of each half step. On overflow `psi` is left partially updated.
    pub fn step(&mut self, psi: &mut [Complex64], t: f64, h: f64) -> Result<()> {
        self.potential_flow(psi, 0.5 * h, self.lambda.at(t + 0.25 * h), t)?;
        self.kinetic_flow(psi, h);
        self.potential_flow(psi, 0.5 * h, self.lambda.at(t + 0.75 * h), t)?;
        Ok(())
    }
}

fn check_edges(psi: &WaveField, tol: f64) -> Result<()> {
    let n = psi.values.len();
    let w = 4.min(n / 2);
    let edge = psi.values[..w]
        .iter()
        .chain(&psi.values[n - w..])
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if edge > tol {
        return Err(Error::EdgeLeakage { t: psi.t, magnitude: edge });
    }
    Ok(())
}

/// Runs the solver from `psi0` and returns one field per snapshot time.
pub fn solve_nls(config: &NlsConfig, psi0: &WaveField) -> Result<Vec<WaveField>> {
    config.validate()?;
    if psi0.grid != config.grid || psi0.epsilon != config.epsilon {
        return Err(Error::GridMismatch("initial field is not on the solver grid".into()));
    }
    let mut stepper = SplitStep::new(config);
    let mut psi = psi0.values.clone();
    let mut t = psi0.t;
    let mut out = Vec::with_capacity(config.snapshot_times.len());
    for &ts in &config.snapshot_times {
        let span = ts - t;
        if span < -1e-12 {
            return Err(Error::invalid("snapshot before the initial time"));
        }
        let steps = (span / config.dt - 1e-9).ceil().max(0.0) as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for j in 0..steps {
                stepper.step(&mut psi, t + j as f64 * h, h)?;
            }
        }
        t = ts;
        let snap = WaveField {
            epsilon: config.epsilon,
            t,
            grid: config.grid,
            values: psi.clone(),
        };
        check_edges(&snap, config.edge_tol)?;
        out.push(snap);
    }
    Ok(out)
}
