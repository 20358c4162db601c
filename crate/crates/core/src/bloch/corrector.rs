//! First-order corrector of well-prepared initial data.
//!
//! Inserting `e^{iφ/ε}(u₀ + εu₁)` into the equation gives, at first order,
//! `(H(k) - E) u₁ = w` with
//!
//! ```text
//! w = i a' Pχ + i a k'(P - E')∂_kχ - i a U' ∂_kχ - λ|a|^{2σ} a |χ|^{2σ}χ
//! ```
//!
//! at `t = 0`, where `P = -i∂_y + k`, `k = φ_I'` and the time derivative of
//! `u₀` has been replaced using the transport law. Only the component of
//! `w` orthogonal to `χ` is solvable; the corrector is the unique solution
//! in the orthogonal complement.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{BandState, BlochBand, Spectrum};
use crate::error::{Error, Result};
use crate::fourier;
use crate::rays::ConfinementPotential;

/// Gaussian amplitude `a_I` with a polynomial phase `φ_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialProfile {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// `φ_I(x) = Σ_j phase[j] x^j`.
    pub phase: Vec<f64>,
}

impl InitialProfile {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        InitialProfile {
            amplitude,
            center,
            width,
            phase: Vec::new(),
        }
    }

    /// Gaussian with unit `L²` norm.
    pub fn normalized_gaussian(center: f64, width: f64) -> Self {
        Self::gaussian((PI * width * width).powf(-0.25), center, width)
    }

    pub fn with_phase(mut self, phase: Vec<f64>) -> Self {
        self.phase = phase;
        self
    }

    pub fn a(&self, x: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let z = (x - self.center) / self.width;
        self.amplitude * (-0.5 * z * z).exp()
    }

    pub fn a_prime(&self, x: f64) -> f64 {
        -(x - self.center) / (self.width * self.width) * self.a(x)
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.phase.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn phi_prime(&self, x: f64) -> f64 {
        self.phase
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * x + j as f64 * c)
    }

    pub fn phi_second(&self, x: f64) -> f64 {
        self.phase
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * x + (j * (j - 1)) as f64 * c)
    }

    /// Half-width of the region outside which `a_I` is negligible.
    pub fn support_radius(&self, n_sigma: f64) -> f64 {
        n_sigma * self.width
    }

    /// `‖a_I‖²_{L²}`.
    pub fn mass(&self) -> f64 {
        self.amplitude * self.amplitude * self.width * PI.sqrt()
    }
}

/// Plane-wave coefficients of `φ₁(x, ·)` at each `x` of a grid.
#[derive(Debug, Clone)]
pub struct CorrectorField {
    pub x: Vec<f64>,
    first_modes: Vec<i64>,
    coeffs: Vec<Vec<Complex64>>,
    period: f64,
}

impl CorrectorField {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn coeffs(&self, j: usize) -> &[Complex64] {
        &self.coeffs[j]
    }

    pub fn first_mode(&self, j: usize) -> i64 {
        self.first_modes[j]
    }

    /// `φ₁(x_j, y)`.
    pub fn eval(&self, j: usize, y: f64) -> Complex64 {
        let g = 2.0 * PI / self.period;
        let z = Complex64::cis(g * y);
        let mut zm = Complex64::cis(g * y * self.first_modes[j] as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs[j] {
            acc += c * zm;
            zm *= z;
        }
        acc / self.period.sqrt()
    }
}

/// Computes `φ₁` on `x_grid` for initial data `a_I e^{iφ_I/ε} χ(x/ε, φ_I')`.
pub fn well_prepared_corrector(
    band: &BlochBand,
    profile: &InitialProfile,
    confinement: &ConfinementPotential,
    lambda0: f64,
    sigma: u32,
    x_grid: &[f64],
) -> Result<CorrectorField> {
    // one eigensolve per distinct momentum
    let quantize = |k: f64| (k / 1e-10).round() as i64;
    let mut keys: Vec<(i64, f64)> = x_grid
        .iter()
        .map(|&x| {
            let k = profile.phi_prime(x);
            (quantize(k), k)
        })
        .collect();
    keys.sort_by_key(|p| p.0);
    keys.dedup_by_key(|p| p.0);
    let solved: HashMap<i64, (BandState, Spectrum)> = keys
        .par_iter()
        .map(|&(key, k)| Ok((key, band.state_with_spectrum(k)?)))
        .collect::<Result<_>>()?;

    let rows: Vec<(i64, Vec<Complex64>)> = x_grid
        .par_iter()
        .map(|&x| {
            let (state, spectrum) = &solved[&quantize(profile.phi_prime(x))];
            let coeffs = corrector_at(band, state, spectrum, profile, confinement, lambda0, sigma, x)?;
            Ok((state.first_mode(), coeffs))
        })
        .collect::<Result<_>>()?;
    let (first_modes, coeffs) = rows.into_iter().unzip();
    Ok(CorrectorField {
        x: x_grid.to_vec(),
        first_modes,
        coeffs,
        period: band.period(),
    })
}

#[allow(clippy::too_many_arguments)]
fn corrector_at(
    band: &BlochBand,
    state: &BandState,
    spectrum: &Spectrum,
    profile: &InitialProfile,
    confinement: &ConfinementPotential,
    lambda0: f64,
    sigma: u32,
    x: f64,
) -> Result<Vec<Complex64>> {
    let dim = state.coeffs().len();
    let a = profile.a(x);
    if a == 0.0 && profile.a_prime(x) == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); dim]);
    }
    let w = source(band, state, spectrum, profile, confinement, lambda0, sigma, x);
    let n = band.index() - 1;
    let en = state.energy;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for l in 0..dim {
        if l == n {
            continue;
        }
        let de = spectrum.energies[l] - en;
        if de.abs() < band.gap_tol() {
            return Err(Error::IsolatednessViolation {
                band: band.index(),
                k: state.k,
                gap: de.abs(),
                tol: band.gap_tol(),
            });
        }
        let u = spectrum.vectors.column(l);
        let proj: Complex64 = (0..dim).map(|i| u[i].conj() * w[i]).sum::<Complex64>() / de;
        for i in 0..dim {
            out[i] += u[i] * proj;
        }
    }
    Ok(out)
}

/// Right-hand side `w` in the folded plane-wave basis (not yet projected).
#[allow(clippy::too_many_arguments)]
pub(crate) fn source(
    band: &BlochBand,
    state: &BandState,
    spectrum: &Spectrum,
    profile: &InitialProfile,
    confinement: &ConfinementPotential,
    lambda0: f64,
    sigma: u32,
    x: f64,
) -> Vec<Complex64> {
    let chi = state.coeffs();
    let dim = chi.len();
    let n = band.index() - 1;
    let p = band.problem().velocity_diagonal(state.folded_k);
    let i = Complex64::i();

    // ∂_kχ = Σ_{l≠n} χ_l ⟨χ_l, Pχ⟩ / (E_n - E_l) + i A χ
    let mut chi_k: Vec<Complex64> = chi.iter().map(|c| i * state.connection * c).collect();
    for l in 0..dim {
        if l == n {
            continue;
        }
        let u = spectrum.vectors.column(l);
        let t: Complex64 = (0..dim).map(|m| u[m].conj() * p[m] * chi[m]).sum();
        let f = t / (state.energy - spectrum.energies[l]);
        for m in 0..dim {
            chi_k[m] += u[m] * f;
        }
    }

    let a = profile.a(x);
    let a1 = profile.a_prime(x);
    let k1 = profile.phi_second(x);
    let du = confinement.derivative(x);
    let mut w: Vec<Complex64> = (0..dim)
        .map(|m| {
            i * a1 * p[m] * chi[m] + i * a * k1 * (p[m] - state.velocity) * chi_k[m]
                - i * a * du * chi_k[m]
        })
        .collect();
    if lambda0 != 0.0 && a != 0.0 {
        let f = cubic_term(chi, sigma, band.period());
        let scale = lambda0 * a.abs().powi(2 * sigma as i32) * a;
        for (wm, fm) in w.iter_mut().zip(&f) {
            *wm -= scale * fm;
        }
    }
    w
}

/// Plane-wave coefficients (modes `-M..=M`) of `|χ|^{2σ}χ`.
fn cubic_term(chi: &[Complex64], sigma: u32, period: f64) -> Vec<Complex64> {
    let dim = chi.len();
    let cutoff = (dim - 1) / 2;
    let n = ((2 * sigma as usize + 2) * 2 * cutoff + 1).next_power_of_two();
    let mut s = fourier::synthesize(-(cutoff as i64), chi, n);
    for z in &mut s {
        *z *= z.norm_sqr().powi(sigma as i32);
    }
    fourier::forward(n).process(&mut s);
    let scale = period.powi(-(sigma as i32)) / n as f64;
    (0..dim)
        .map(|i| {
            let m = i as i64 - cutoff as i64;
            s[m.rem_euclid(n as i64) as usize] * scale
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BlochProblem;
    use crate::lattice::{Lattice, PeriodicPotential};
    use nalgebra::{DMatrix, DVector};

    fn grid() -> Vec<f64> {
        (0..41).map(|j| -2.0 + 0.1 * j as f64).collect()
    }

    #[test]
    fn profile_derivatives() {
        let p = InitialProfile::gaussian(1.3, 0.2, 0.7).with_phase(vec![0.1, -0.5, 0.25, 0.3]);
        let h = 1e-5;
        for x in [-1.0, 0.0, 0.8] {
            assert!((p.a_prime(x) - (p.a(x + h) - p.a(x - h)) / (2.0 * h)).abs() < 1e-8);
            assert!((p.phi_prime(x) - (p.phi(x + h) - p.phi(x - h)) / (2.0 * h)).abs() < 1e-8);
            assert!(
                (p.phi_second(x) - (p.phi_prime(x + h) - p.phi_prime(x - h)) / (2.0 * h)).abs() < 1e-8
            );
        }
        let n = InitialProfile::normalized_gaussian(0.0, 0.5);
        assert!((n.mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_band_has_no_corrector() {
        let p = BlochProblem::new(PeriodicPotential::zero(Lattice::unit()), 6, 2).unwrap();
        let b = BlochBand::new(p, 1).unwrap();
        let prof = InitialProfile::normalized_gaussian(0.1, 0.5).with_phase(vec![0.0, 0.3, 0.2]);
        let c = well_prepared_corrector(&b, &prof, &ConfinementPotential::harmonic(1.0), 1.0, 1, &grid()).unwrap();
        for j in 0..c.len() {
            assert!(c.coeffs(j).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn matches_bordered_dense_solve() {
        let prob = BlochProblem::new(PeriodicPotential::mathieu(Lattice::unit(), 1.0), 10, 3).unwrap();
        let band = BlochBand::new(prob.clone(), 1).unwrap();
        let prof = InitialProfile::normalized_gaussian(0.0, 0.5);
        let u = ConfinementPotential::harmonic(1.0);
        let xs = grid();
        let c = well_prepared_corrector(&band, &prof, &u, 1.0, 1, &xs).unwrap();
        let mut worst: f64 = 0.0;
        for (j, &x) in xs.iter().enumerate() {
            let (state, spectrum) = band.state_with_spectrum(0.0).unwrap();
            let w = source(&band, &state, &spectrum, &prof, &u, 1.0, 1, x);
            let chi = DVector::from_column_slice(state.coeffs());
            let qw = DVector::from_column_slice(&w) - &chi * chi.dotc(&DVector::from_column_slice(&w));
            // [[H - E, χ], [χ^H, 0]] [φ; μ] = [Qw; 0]
            let d = prob.dim();
            let h = prob.hamiltonian(state.folded_k);
            let mut m = DMatrix::<Complex64>::zeros(d + 1, d + 1);
            for r in 0..d {
                for s in 0..d {
                    m[(r, s)] = h[(r, s)];
                }
                m[(r, r)] -= state.energy;
                m[(r, d)] = chi[r];
                m[(d, r)] = chi[r].conj();
            }
            let mut rhs = DVector::<Complex64>::zeros(d + 1);
            rhs.rows_mut(0, d).copy_from(&qw);
            let sol = m.lu().solve(&rhs).unwrap();
            for r in 0..d {
                worst = worst.max((sol[r] - c.coeffs(j)[r]).norm());
            }
            let along: Complex64 = chi.iter().zip(c.coeffs(j)).map(|(a, b)| a.conj() * b).sum();
            assert!(along.norm() < 1e-10);
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn cubic_term_of_constant_state() {
        let mut chi = vec![Complex64::new(0.0, 0.0); 9];
        chi[4] = Complex64::new(1.0, 0.0);
        let f = cubic_term(&chi, 1, 1.0);
        assert!((f[4] - 1.0).norm() < 1e-14);
        assert!(f.iter().enumerate().all(|(i, z)| i == 4 || z.norm() < 1e-14));
    }
}
