//! Eulerian fields from rays and assembly of the leading-order WKB field
//!
//! ```text
//! v₀(t, x) = a_I(x₀)/√J · χ(x/ε, ∂_xφ) · e^{iω(t, x₀)} · e^{iφ(t,x)/ε},   x = X_t(x₀)
//! ```

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bloch::{BlochBand, CorrectorField, InitialProfile};
use crate::error::{Error, Result};
use crate::field::{WaveField, WaveGrid};
use crate::rays::{RayBundle, RayPath};

/// Launch points cover the Gaussian out to this many widths.
pub const FAN_MARGIN: f64 = 6.0;

/// Uniform launch grid covering `center ± FAN_MARGIN·width` with spacing
/// at most `spacing`.
pub fn launch_grid(profile: &InitialProfile, spacing: f64) -> Vec<f64> {
    launch_grid_within(profile, spacing, f64::NEG_INFINITY, f64::INFINITY)
}

/// As [`launch_grid`], clipped to `[lo, hi]`. Needed for profiles of
/// unbounded width.
pub fn launch_grid_within(profile: &InitialProfile, spacing: f64, lo: f64, hi: f64) -> Vec<f64> {
    let r = profile.support_radius(FAN_MARGIN);
    let a = (profile.center - r).max(lo);
    let b = (profile.center + r).min(hi);
    let n = (((b - a) / spacing).ceil() as usize).max(1);
    (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
}

/// Ray data pulled back to a spatial grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianFields {
    pub t: f64,
    pub x: Vec<f64>,
    /// `X_t^{-1}(x)`, `NaN` outside the ray fan.
    pub x0: Vec<f64>,
    pub phi: Vec<f64>,
    /// `∂_xφ`, the unfolded quasimomentum.
    pub grad_phi: Vec<f64>,
    /// `a_I(x₀)/√J`, zero outside the fan.
    pub amp: Vec<Complex64>,
    pub omega: Vec<f64>,
    pub jac: Vec<f64>,
    pub covered: Vec<bool>,
}

impl EulerianFields {
    /// Amplitude including the phase correction, `a₀ = a_I/√J · e^{iω}`.
    pub fn a0(&self, j: usize) -> Complex64 {
        self.amp[j] * Complex64::cis(self.omega[j])
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV: `x, x0, phi, grad_phi, amp_re, amp_im, omega, jac`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,x0,phi,grad_phi,amp_re,amp_im,omega,jac")?;
        for j in 0..self.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.x[j],
                self.x0[j],
                self.phi[j],
                self.grad_phi[j],
                self.amp[j].re,
                self.amp[j].im,
                self.omega[j],
                self.jac[j]
            )?;
        }
        Ok(())
    }
}

/// Per-ray values at one time.
#[derive(Debug, Clone, Copy)]
struct Node {
    x0: f64,
    x: f64,
    k: f64,
    jac: f64,
    dk: f64,
    phi: f64,
    omega: f64,
}

/// `omega` of the node excludes the gauge twist `θ(k0) - θ(k)`, which the
/// caller adds back at the interpolated momentum.
fn node_at(path: &RayPath, t: f64, dt: f64, theta: impl Fn(f64) -> f64) -> Option<Node> {
    let theta0 = theta(path.k0);
    let smooth = |j: usize| path.omega(j) - theta0 + theta(path.k[j]);
    let n = path.len();
    let last = *path.t.last()?;
    if t > last + 1e-9 * dt {
        return None;
    }
    let pos = t / dt;
    let j = pos.round() as usize;
    if (pos - j as f64).abs() < 1e-9 && j < n && (path.t[j] - t).abs() < 1e-9 * dt.max(1.0) {
        return Some(Node {
            x0: path.x0,
            x: path.x[j],
            k: path.k[j],
            jac: path.jac[j],
            dk: path.dk[j],
            phi: path.phi[j],
            omega: smooth(j),
        });
    }
    if n < 4 {
        return None;
    }
    let i = (pos.floor() as usize).saturating_sub(1).min(n - 4);
    let ts = &path.t[i..i + 4];
    let l = |v: &[f64]| lagrange4(ts, &v[i..i + 4], t);
    let omega: Vec<f64> = (i..i + 4).map(smooth).collect();
    Some(Node {
        x0: path.x0,
        x: l(&path.x),
        k: l(&path.k),
        jac: l(&path.jac),
        dk: l(&path.dk),
        phi: l(&path.phi),
        omega: lagrange4(ts, &omega, t),
    })
}

/// Pulls the bundle back to `x_grid` at time `t`.
pub fn eulerianize(
    bundle: &RayBundle,
    profile: &InitialProfile,
    t: f64,
    x_grid: &[f64],
) -> Result<EulerianFields> {
    if t >= bundle.caustic_time {
        return Err(Error::PostCaustic {
            t,
            caustic: bundle.caustic_time,
        });
    }
    let nodes: Vec<Node> = bundle
        .paths
        .iter()
        .map(|p| node_at(p, t, bundle.dt, |k| bundle.twist_phase(k)))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::invalid(format!("rays do not reach t = {t}")))?;
    if nodes.len() < 4 {
        return Err(Error::invalid("need at least four rays"));
    }
    if nodes.windows(2).any(|w| w[1].x <= w[0].x) {
        return Err(Error::PostCaustic {
            t,
            caustic: bundle.caustic_time,
        });
    }

    let m = x_grid.len();
    let mut out = EulerianFields {
        t,
        x: x_grid.to_vec(),
        x0: vec![f64::NAN; m],
        phi: vec![0.0; m],
        grad_phi: vec![0.0; m],
        amp: vec![Complex64::new(0.0, 0.0); m],
        omega: vec![0.0; m],
        jac: vec![0.0; m],
        covered: vec![false; m],
    };
    let first = nodes[0].x;
    let last = nodes[nodes.len() - 1].x;
    let mut i = 0;
    for (j, &x) in x_grid.iter().enumerate() {
        if x < first || x > last {
            continue;
        }
        while i + 2 < nodes.len() && nodes[i + 1].x < x {
            i += 1;
        }
        let (a, b) = (&nodes[i], &nodes[i + 1]);
        let h = b.x0 - a.x0;
        let s = invert_hermite(a.x, b.x, a.jac * h, b.jac * h, x);
        let x0 = a.x0 + s * h;
        // four-point stencil around the interval
        let lo = i.saturating_sub(1).min(nodes.len() - 4);
        let st = &nodes[lo..lo + 4];
        let xs: Vec<f64> = st.iter().map(|n| n.x0).collect();
        let pick = |f: fn(&Node) -> f64| -> Vec<f64> { st.iter().map(f).collect() };
        let jac = lagrange4(&xs, &pick(|n| n.jac), x0);
        out.x0[j] = x0;
        out.phi[j] = hermite(a.phi, b.phi, a.k * a.jac * h, b.k * b.jac * h, s);
        out.grad_phi[j] = hermite(a.k, b.k, a.dk * h, b.dk * h, s);
        out.jac[j] = jac;
        let twist = bundle.twist_phase(profile.phi_prime(x0)) - bundle.twist_phase(out.grad_phi[j]);
        out.omega[j] = lagrange4(&xs, &pick(|n| n.omega), x0) + twist;
        out.amp[j] = Complex64::new(profile.a(x0) / jac.sqrt(), 0.0);
        out.covered[j] = true;
    }
    Ok(out)
}

/// `v₀` on `grid` from fields sampled at the grid points.
pub fn assemble_v0(fields: &EulerianFields, band: &BlochBand, epsilon: f64, grid: &WaveGrid) -> Result<WaveField> {
    check_points(&fields.x, grid)?;
    let values = (0..grid.n)
        .into_par_iter()
        .map(|j| {
            if !fields.covered[j] || fields.amp[j] == Complex64::new(0.0, 0.0) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let x = fields.x[j];
            let state = band.state(fields.grad_phi[j])?;
            Ok(fields.a0(j) * state.eval(x / epsilon) * Complex64::cis(fields.phi[j] / epsilon))
        })
        .collect::<Result<_>>()?;
    Ok(WaveField {
        epsilon,
        t: fields.t,
        grid: *grid,
        values,
    })
}

/// `ψ_I = e^{iφ_I/ε}(a_I χ(x/ε, φ_I') + ε φ₁(x, x/ε))`.
pub fn initial_data(
    profile: &InitialProfile,
    band: &BlochBand,
    epsilon: f64,
    grid: &WaveGrid,
    corrector: Option<&CorrectorField>,
) -> Result<WaveField> {
    if let Some(c) = corrector {
        check_points(&c.x, grid)?;
    }
    let values = (0..grid.n)
        .into_par_iter()
        .map(|j| {
            let x = grid.x(j);
            let a = profile.a(x);
            let phase = Complex64::cis(profile.phi(x) / epsilon);
            let mut v = Complex64::new(0.0, 0.0);
            if a != 0.0 {
                v += a * band.state(profile.phi_prime(x))?.eval(x / epsilon);
            }
            if let Some(c) = corrector {
                v += epsilon * c.eval(j, x / epsilon);
            }
            Ok(v * phase)
        })
        .collect::<Result<_>>()?;
    Ok(WaveField {
        epsilon,
        t: 0.0,
        grid: *grid,
        values,
    })
}

fn check_points(x: &[f64], grid: &WaveGrid) -> Result<()> {
    if x.len() != grid.n || x.iter().enumerate().any(|(j, &v)| (v - grid.x(j)).abs() > 1e-12 * (1.0 + v.abs())) {
        return Err(Error::GridMismatch(format!(
            "{} sample points do not match {grid:?}",
            x.len()
        )));
    }
    Ok(())
}

/// Cubic Hermite on `[0, 1]` with end values `y0, y1` and end slopes `d0, d1`.
pub(crate) fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1
}

fn hermite_slope(y0: f64, y1: f64, d0: f64, d1: f64, s: f64) -> f64 {
    let s2 = s * s;
    (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * d1
}

/// Solves `hermite(y0, y1, d0, d1, s) = y` for `s ∈ [0, 1]`, assuming a
/// monotone increasing interpolant.
fn invert_hermite(y0: f64, y1: f64, d0: f64, d1: f64, y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut s = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
    for _ in 0..60 {
        let f = hermite(y0, y1, d0, d1, s) - y;
        if f.abs() <= 1e-15 * (1.0 + y.abs()) {
            break;
        }
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let d = hermite_slope(y0, y1, d0, d1, s);
        let next = s - f / d;
        s = if d > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    s
}

/// Lagrange interpolation through four points.
pub(crate) fn lagrange4(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += w * ys[i];
    }
    acc
}
