//! Semiclassical rays of one Bloch band in a slowly varying potential.
//!
//! Along `ẋ = E'(k)`, `k̇ = -U'(x)` the integrator carries the tangent
//! vector `(δx, δk)` (so `J = δx`), the phase `φ`, the Berry integral and the
//! nonlinear phase integral. Integration is fixed-step RK4.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bloch::{BandState, BlochBand, GaugeTwist, InitialProfile};
use crate::coupling::Coupling;
use crate::error::{Error, Result};

/// Default threshold on `J` below which a ray is considered at a caustic.
pub const CAUSTIC_TOL: f64 = 1e-6;
/// Default modulus threshold of the blow-up experiment.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Slowly varying external potential `U(x)` with bounded `U''`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfinementPotential {
    Zero,
    /// `U = ω² x² / 2`.
    Harmonic { omega: f64 },
    /// `U = -E x`.
    Stark { field: f64 },
    /// `U = c₀ + c₁ x + c₂ x²`.
    Polynomial(Vec<f64>),
}

impl ConfinementPotential {
    pub fn harmonic(omega: f64) -> Self {
        ConfinementPotential::Harmonic { omega }
    }

    pub fn stark(field: f64) -> Self {
        ConfinementPotential::Stark { field }
    }

    /// Polynomial of degree at most two; higher degrees have unbounded `U''`.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().skip(3).any(|&c| c != 0.0) {
            return Err(Error::invalid("confinement polynomial must have degree <= 2"));
        }
        Ok(ConfinementPotential::Polynomial(coeffs))
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            ConfinementPotential::Zero => 0.0,
            ConfinementPotential::Harmonic { omega } => 0.5 * omega * omega * x * x,
            ConfinementPotential::Stark { field } => -field * x,
            ConfinementPotential::Polynomial(c) => c.iter().rev().fold(0.0, |acc, a| acc * x + a),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ConfinementPotential::Zero => 0.0,
            ConfinementPotential::Harmonic { omega } => omega * omega * x,
            ConfinementPotential::Stark { field } => -field,
            ConfinementPotential::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (j, a)| acc * x + j as f64 * a),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            ConfinementPotential::Zero | ConfinementPotential::Stark { .. } => 0.0,
            ConfinementPotential::Harmonic { omega } => omega * omega,
            ConfinementPotential::Polynomial(c) => {
                let _ = x;
                2.0 * c.get(2).copied().unwrap_or(0.0)
            }
        }
    }
}

/// Shared integration settings for a family of rays.
#[derive(Debug, Clone)]
pub struct RaySettings {
    pub sigma: u32,
    pub lambda: Coupling,
    pub t_end: f64,
    pub dt: f64,
    pub caustic_tol: f64,
}

impl RaySettings {
    pub fn new(sigma: u32, lambda: Coupling, t_end: f64, dt: f64) -> Self {
        RaySettings {
            sigma,
            lambda,
            t_end,
            dt,
            caustic_tol: CAUSTIC_TOL,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0) || !(self.dt > 0.0) {
            return Err(Error::invalid(format!(
                "need t_end >= 0 and dt > 0 (got {}, {})",
                self.t_end, self.dt
            )));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// One traced ray. Sample `j` is at time `t[j]`; the path stops before the
/// first sample with `J <= caustic_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    pub x0: f64,
    pub k0: f64,
    /// `|a_I(x0)|`.
    pub a_abs: f64,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// Unfolded momentum; `∂_x φ(t, X_t) = k`.
    pub k: Vec<f64>,
    /// `J = ∂X_t/∂x0`.
    pub jac: Vec<f64>,
    /// `∂k/∂x0`.
    pub dk: Vec<f64>,
    pub phi: Vec<f64>,
    /// `∫ Im⟨χ, ∂_kχ⟩ U'(X_s) ds`.
    pub berry: Vec<f64>,
    /// `-∫ Re λ(s) κ(k) |a_I|^{2σ} / J^σ ds`.
    pub nlphase: Vec<f64>,
    /// Crossing time of `J = 0` if the ray reached a caustic.
    pub caustic_time: Option<f64>,
    /// Times at which the momentum left the first Brillouin zone.
    pub fold_times: Vec<f64>,
}

impl RayPath {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Total phase correction `ω = berry + nlphase`.
    pub fn omega(&self, j: usize) -> f64 {
        self.berry[j] + self.nlphase[j]
    }
}

/// Rays over an increasing launch grid.
#[derive(Debug, Clone)]
pub struct RayBundle {
    pub paths: Vec<RayPath>,
    /// Earliest caustic over all rays, `+∞` if none.
    pub caustic_time: f64,
    pub dt: f64,
    /// Gauge twist of the band the rays were traced on, with its period.
    pub twist: Option<(GaugeTwist, f64)>,
}

impl RayBundle {
    /// `θ(k)` of the band's gauge twist.
    pub fn twist_phase(&self, k: f64) -> f64 {
        self.twist.as_ref().map_or(0.0, |(tw, period)| tw.phase(k, *period))
    }

    pub fn x0(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.x0).collect()
    }

    /// Number of samples every ray has.
    pub fn common_len(&self) -> usize {
        self.paths.iter().map(RayPath::len).min().unwrap_or(0)
    }

    /// True when `x0 ↦ X_t(x0)` is strictly increasing at every common sample.
    pub fn is_monotone(&self) -> bool {
        (0..self.common_len()).all(|j| self.paths.windows(2).all(|w| w[1].x[j] > w[0].x[j]))
    }
}

#[derive(Clone, Copy)]
struct Ray {
    x: f64,
    k: f64,
    dx: f64,
    dk: f64,
    phi: f64,
    berry: f64,
    nl: f64,
    /// `|ã|^{-2σ}`, only evolved in the blow-up experiment.
    u: f64,
}

impl Ray {
    fn axpy(&self, h: f64, d: &Ray) -> Ray {
        Ray {
            x: self.x + h * d.x,
            k: self.k + h * d.k,
            dx: self.dx + h * d.dx,
            dk: self.dk + h * d.dk,
            phi: self.phi + h * d.phi,
            berry: self.berry + h * d.berry,
            nl: self.nl + h * d.nl,
            u: self.u + h * d.u,
        }
    }
}

struct Flow<'a> {
    band: &'a BlochBand,
    u: &'a ConfinementPotential,
    sigma: u32,
    lambda: &'a Coupling,
    a_pow: f64,
}

impl Flow<'_> {
    fn rhs(&self, t: f64, r: &Ray) -> Result<Ray> {
        let s: BandState = self.band.state_uncached(r.k)?;
        let du = self.u.derivative(r.x);
        let lam = self.lambda.at(t);
        let (nl, grow) = if lam == Complex64::new(0.0, 0.0) {
            (0.0, 0.0)
        } else {
            let kappa = self.band.kappa(&s, self.sigma);
            let jpow = r.dx.powi(self.sigma as i32);
            (
                -lam.re * kappa * self.a_pow / jpow,
                -(self.sigma as f64) * lam.im * kappa / jpow,
            )
        };
        Ok(Ray {
            x: s.velocity,
            k: -du,
            dx: s.curvature * r.dk,
            dk: -self.u.second_derivative(r.x) * r.dx,
            phi: r.k * s.velocity - s.energy - self.u.value(r.x),
            // the twist part is a total derivative and is added in closed form
            berry: (s.connection - self.band.twist_derivative(r.k)) * du,
            nl,
            u: grow,
        })
    }

    fn step(&self, t: f64, h: f64, r: &Ray) -> Result<Ray> {
        let k1 = self.rhs(t, r)?;
        let k2 = self.rhs(t + 0.5 * h, &r.axpy(0.5 * h, &k1))?;
        let k3 = self.rhs(t + 0.5 * h, &r.axpy(0.5 * h, &k2))?;
        let k4 = self.rhs(t + h, &r.axpy(h, &k3))?;
        let mut out = *r;
        for (w, d) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
            out = out.axpy(w * h / 6.0, d);
        }
        Ok(out)
    }
}

/// Traces one ray launched at `x0` with `k0 = φ_I'(x0)`.
pub fn trace_ray(
    band: &BlochBand,
    u: &ConfinementPotential,
    x0: f64,
    profile: &InitialProfile,
    settings: &RaySettings,
) -> Result<RayPath> {
    settings.validate()?;
    let a_abs = profile.a(x0).abs();
    let flow = Flow {
        band,
        u,
        sigma: settings.sigma,
        lambda: &settings.lambda,
        a_pow: a_abs.powi(2 * settings.sigma as i32),
    };
    let mut r = Ray {
        x: x0,
        k: profile.phi_prime(x0),
        dx: 1.0,
        dk: profile.phi_second(x0),
        phi: profile.phi(x0),
        berry: 0.0,
        nl: 0.0,
        u: 1.0,
    };
    let n = settings.steps();
    let lattice = *band.problem().potential().lattice();
    let mut path = RayPath {
        x0,
        k0: r.k,
        a_abs,
        t: Vec::with_capacity(n + 1),
        x: Vec::with_capacity(n + 1),
        k: Vec::with_capacity(n + 1),
        jac: Vec::with_capacity(n + 1),
        dk: Vec::with_capacity(n + 1),
        phi: Vec::with_capacity(n + 1),
        berry: Vec::with_capacity(n + 1),
        nlphase: Vec::with_capacity(n + 1),
        caustic_time: None,
        fold_times: Vec::new(),
    };
    let theta0 = band.twist_phase(r.k);
    let push = |p: &mut RayPath, t: f64, r: &Ray| {
        p.t.push(t);
        p.x.push(r.x);
        p.k.push(r.k);
        p.jac.push(r.dx);
        p.dk.push(r.dk);
        p.phi.push(r.phi);
        p.berry.push(r.berry + theta0 - band.twist_phase(r.k));
        p.nlphase.push(r.nl);
    };
    push(&mut path, 0.0, &r);
    let mut shift = lattice.fold(r.k).1;
    for j in 0..n {
        let t = j as f64 * settings.dt;
        let h = settings.dt.min(settings.t_end - t);
        let next = flow.step(t, h, &r)?;
        if next.dx <= settings.caustic_tol {
            path.caustic_time = Some(t + h * r.dx / (r.dx - next.dx));
            break;
        }
        r = next;
        let s = lattice.fold(r.k).1;
        if s != shift {
            path.fold_times.push(t + h);
            shift = s;
        }
        push(&mut path, if j + 1 == n { settings.t_end } else { t + h }, &r);
    }
    Ok(path)
}

/// Traces rays from every point of `x0_grid` in parallel. Rays that fail
/// keep whatever they had before the failure.
pub fn trace_bundle(
    band: &BlochBand,
    u: &ConfinementPotential,
    x0_grid: &[f64],
    profile: &InitialProfile,
    settings: &RaySettings,
) -> Result<RayBundle> {
    settings.validate()?;
    if x0_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("launch grid must be strictly increasing"));
    }
    let paths: Vec<RayPath> = x0_grid
        .par_iter()
        .map(|&x0| trace_ray(band, u, x0, profile, settings))
        .collect::<Result<_>>()?;
    let caustic_time = paths
        .iter()
        .filter_map(|p| p.caustic_time)
        .fold(f64::INFINITY, f64::min);
    Ok(RayBundle {
        paths,
        caustic_time,
        dt: settings.dt,
        twist: band.twist().map(|tw| (tw.clone(), band.period())),
    })
}

/// `ã₀(t) = a_I(x0) exp(i(berry + nlphase))` at every sample.
pub fn amplitude_on_ray(path: &RayPath, a_i: Complex64) -> Vec<Complex64> {
    (0..path.len())
        .map(|j| a_i * Complex64::cis(path.omega(j)))
        .collect()
}

/// Result of integrating the modulus law with complex `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub t: Vec<f64>,
    /// `|ã₀(t)|²`.
    pub modulus_sq: Vec<f64>,
    /// Richardson-refined first time `|ã₀|²` exceeds the threshold, `+∞` if never.
    pub blowup_time: f64,
    /// Crossing times at `dt` and `dt/2` before extrapolation.
    pub raw_times: (f64, f64),
}

/// Integrates `d|ã|²/dt = Im λ κ |ã|^{2σ+2} / J^σ` along the ray from `x0`.
///
/// The law is linear in `u = |ã|^{-2σ}`, which is what is integrated.
#[allow(clippy::too_many_arguments)]
pub fn blowup_experiment(
    band: &BlochBand,
    u: &ConfinementPotential,
    x0: f64,
    sigma: u32,
    lambda: &Coupling,
    a_abs: f64,
    t_end: f64,
    dt: f64,
) -> Result<BlowupReport> {
    if sigma == 0 || a_abs <= 0.0 {
        return Err(Error::invalid("blow-up experiment needs sigma >= 1 and |a_I| > 0"));
    }
    let settings = RaySettings::new(sigma, lambda.clone(), t_end, dt);
    settings.validate()?;
    let coarse = blowup_run(band, u, x0, sigma, lambda, a_abs, t_end, dt)?;
    let fine = blowup_run(band, u, x0, sigma, lambda, a_abs, t_end, 0.5 * dt)?;
    let blowup_time = match (coarse.1, fine.1) {
        (Some(a), Some(b)) => b + (b - a) / 3.0,
        (_, Some(b)) => b,
        (Some(a), None) => a,
        (None, None) => f64::INFINITY,
    };
    Ok(BlowupReport {
        t: fine.0.iter().map(|p| p.0).collect(),
        modulus_sq: fine.0.iter().map(|p| p.1).collect(),
        blowup_time,
        raw_times: (
            coarse.1.unwrap_or(f64::INFINITY),
            fine.1.unwrap_or(f64::INFINITY),
        ),
    })
}

type Trajectory = (Vec<(f64, f64)>, Option<f64>);

#[allow(clippy::too_many_arguments)]
fn blowup_run(
    band: &BlochBand,
    u: &ConfinementPotential,
    x0: f64,
    sigma: u32,
    lambda: &Coupling,
    a_abs: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let flow = Flow {
        band,
        u,
        sigma,
        lambda,
        a_pow: a_abs.powi(2 * sigma as i32),
    };
    let s = sigma as f64;
    let level = BLOWUP_THRESHOLD.powf(-s);
    let mut r = Ray {
        x: x0,
        k: 0.0,
        dx: 1.0,
        dk: 0.0,
        phi: 0.0,
        berry: 0.0,
        nl: 0.0,
        u: a_abs.powf(-2.0 * s),
    };
    let to_mod = |u: f64| if u > 0.0 { u.powf(-1.0 / s) } else { f64::INFINITY };
    let mut traj = vec![(0.0, a_abs * a_abs)];
    let n = (t_end / dt - 1e-9).ceil() as usize;
    for j in 0..n {
        let t = j as f64 * dt;
        let h = dt.min(t_end - t);
        let next = flow.step(t, h, &r)?;
        if next.u <= level {
            let tc = t + h * (r.u - level) / (r.u - next.u);
            return Ok((traj, Some(tc)));
        }
        if next.dx <= CAUSTIC_TOL {
            break;
        }
        r = next;
        traj.push((t + h, to_mod(r.u)));
    }
    Ok((traj, None))
}

/// Caustic time `π/(2ω)` of a flat-phase launch in a harmonic trap on the free band.
pub fn harmonic_caustic_time(omega: f64) -> f64 {
    0.5 * PI / omega
}
