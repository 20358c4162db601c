//! Brillouin-zone samples of one gauge-fixed band.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::band::kappa_from_coeffs;
use super::{BandState, BlochBand, BlochProblem};
use crate::error::{Error, Result};

/// Gauge-fixed samples of band `n` on a cell-centered, periodic `k` grid
/// `k_j = -G/2 + (j + ½)Δk`. The grid is symmetric under `k → -k` and
/// contains `k = 0` when the number of points is odd.
#[derive(Debug, Clone)]
pub struct BandTable {
    band: Arc<BlochBand>,
    k_grid: Vec<f64>,
    states: Vec<Arc<BandState>>,
    /// `E_1..E_n` at each grid point.
    lower_energies: Vec<Vec<f64>>,
    fd_connection: Vec<Complex64>,
    min_gap: f64,
}

/// Builds the table for band `n` (1-based) with `k_points` samples.
pub fn build_band_table(problem: &BlochProblem, n: usize, k_points: usize) -> Result<BandTable> {
    BandTable::build(BlochBand::new(problem.clone(), n)?, k_points)
}

impl BandTable {
    pub fn build(band: BlochBand, k_points: usize) -> Result<Self> {
        if k_points < 16 {
            return Err(Error::invalid(format!("k_points = {k_points} < 16")));
        }
        let g = band.dual_period();
        let dk = g / k_points as f64;
        let k_grid: Vec<f64> = (0..k_points)
            .map(|j| -0.5 * g + (j as f64 + 0.5) * dk)
            .collect();
        let n = band.index();
        let solved: Vec<(BandState, Vec<f64>)> = k_grid
            .par_iter()
            .map(|&k| {
                let (state, spectrum) = band.state_with_spectrum(k)?;
                Ok((state, spectrum.energies[..n].to_vec()))
            })
            .collect::<Result<_>>()?;
        let (states, lower_energies): (Vec<_>, Vec<_>) = solved
            .into_iter()
            .map(|(s, e)| (Arc::new(s), e))
            .unzip();

        let min_gap = states.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
        if min_gap <= band.gap_tol() {
            let worst = states
                .iter()
                .min_by(|a, b| a.gap.total_cmp(&b.gap))
                .expect("nonempty grid");
            return Err(Error::IsolatednessViolation {
                band: n,
                k: worst.k,
                gap: min_gap,
                tol: band.gap_tol(),
            });
        }

        // centered differences; the neighbor past either end is the wrapped
        // state translated by one dual-lattice vector. A band that touches
        // its neighbor at the zone edge has no smooth continuation there, so
        // its end points use one-sided stencils instead.
        let last = k_points - 1;
        let ov = |a: &BandState, b: &BandState, shift: i64| {
            overlap(a.first_mode(), a.coeffs(), b.first_mode() + shift, b.coeffs())
        };
        let fd_connection = (0..k_points)
            .map(|j| {
                let s = &states[j];
                if band.edge_degenerate() && (j == 0 || j == last) {
                    let (a, b, sign) = if j == 0 { (1, 2, 1.0) } else { (last - 1, last - 2, -1.0) };
                    let d = -3.0 * ov(s, s, 0) + 4.0 * ov(s, &states[a], 0) - ov(s, &states[b], 0);
                    return sign * d / (2.0 * dk);
                }
                let (next, next_shift) = if j == last { (&states[0], -1) } else { (&states[j + 1], 0) };
                let (prev, prev_shift) = if j == 0 { (&states[last], 1) } else { (&states[j - 1], 0) };
                (ov(s, next, next_shift) - ov(s, prev, prev_shift)) / (2.0 * dk)
            })
            .collect();

        Ok(BandTable {
            band: Arc::new(band),
            k_grid,
            states,
            lower_energies,
            fd_connection,
            min_gap,
        })
    }

    /// The underlying band, for on-demand queries between grid points.
    pub fn band(&self) -> &BlochBand {
        &self.band
    }

    pub fn band_index(&self) -> usize {
        self.band.index()
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }

    pub fn dk(&self) -> f64 {
        self.band.dual_period() / self.k_grid.len() as f64
    }

    pub fn states(&self) -> &[Arc<BandState>] {
        &self.states
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn velocities(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.velocity).collect()
    }

    /// `⟨χ, ∂_k χ⟩` from the closed-form derivative of the gauge-fixed states.
    pub fn connection(&self) -> Vec<Complex64> {
        self.states
            .iter()
            .map(|s| Complex64::new(s.connection_re, s.connection))
            .collect()
    }

    /// `⟨χ, ∂_k χ⟩` by centered differences of the stored eigenvectors.
    pub fn fd_connection(&self) -> &[Complex64] {
        &self.fd_connection
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.gap).collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn kappas(&self, sigma: u32) -> Vec<f64> {
        let a = self.band.period();
        self.states
            .iter()
            .map(|s| kappa_from_coeffs(s.coeffs(), sigma, a))
            .collect()
    }

    /// Energies of bands `1..=n` at grid point `j`.
    pub fn lower_energies(&self, j: usize) -> &[f64] {
        &self.lower_energies[j]
    }

    /// Gauge-fixed state at arbitrary `k` (fresh eigensolve, cached).
    pub fn state(&self, k: f64) -> Result<Arc<BandState>> {
        self.band.state(k)
    }

    /// CSV: `k, E_1..E_n, velocity_n, Re_connection_n, Im_connection_n,
    /// kappa_sigma_n, gap_n`.
    pub fn write_csv<W: Write>(&self, mut out: W, sigma: u32) -> std::io::Result<()> {
        let n = self.band_index();
        let mut header = vec!["k".to_string()];
        header.extend((1..=n).map(|i| format!("E_{i}")));
        header.extend([
            format!("velocity_{n}"),
            format!("Re_connection_{n}"),
            format!("Im_connection_{n}"),
            format!("kappa_{sigma}_{n}"),
            format!("gap_{n}"),
        ]);
        writeln!(out, "{}", header.join(","))?;
        let kappas = self.kappas(sigma);
        let conn = self.connection();
        for (j, s) in self.states.iter().enumerate() {
            let mut row = vec![format!("{:.17e}", s.k)];
            row.extend(self.lower_energies[j].iter().map(|e| format!("{e:.17e}")));
            row.push(format!("{:.17e}", s.velocity));
            row.push(format!("{:.17e}", conn[j].re));
            row.push(format!("{:.17e}", conn[j].im));
            row.push(format!("{:.17e}", kappas[j]));
            row.push(format!("{:.17e}", s.gap));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `Σ_m conj(a_m) b_m` for coefficient vectors with arbitrary mode offsets.
pub(crate) fn overlap(first_a: i64, a: &[Complex64], first_b: i64, b: &[Complex64]) -> Complex64 {
    let lo = first_a.max(first_b);
    let hi = (first_a + a.len() as i64).min(first_b + b.len() as i64);
    (lo..hi)
        .map(|m| a[(m - first_a) as usize].conj() * b[(m - first_b) as usize])
        .sum()
}
