//! Plane-wave Galerkin solution of the cell problem
//!
//! ```text
//! H(k) χ = E χ,    H(k) = ½(-i∂_y + k)² + V(y),    χ periodic on the cell
//! ```
//!
//! In the basis `e^{iGmy}/√period`, `|m| ≤ M`, the matrix is
//! `H_{mm'} = ½(k + mG)² δ_{mm'} + V̂_{m-m'}`. Eigenvectors are stored as
//! coefficient vectors normalized to `Σ|c_m|² = 1`, which is the
//! `L²(Y)` normalization of `χ`.
//!
//! [`BlochBand`] fixes a smooth gauge for one isolated band and answers
//! pointwise queries at any quasimomentum; [`BandTable`] samples it over
//! the Brillouin zone.

mod band;
mod corrector;
mod table;

pub use band::{BandState, BlochBand, GaugeTwist};
pub use corrector::{well_prepared_corrector, CorrectorField, InitialProfile};
pub use table::{build_band_table, BandTable};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::PeriodicPotential;

/// Default plane-wave cutoff `M` (matrix size `2M + 1`).
pub const DEFAULT_CUTOFF: usize = 32;
/// Default number of Brillouin-zone samples in a band table.
pub const DEFAULT_K_POINTS: usize = 129;
/// Bands closer than this are treated as touching.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Truncated cell problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochProblem {
    potential: PeriodicPotential,
    cutoff: usize,
    n_bands: usize,
}

/// One eigenpair of `H(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochPair {
    pub energy: f64,
    /// Coefficients of modes `-M..=M`.
    pub coeffs: Vec<Complex64>,
}

/// Full spectral decomposition of `H(k)`, ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub k: f64,
    pub energies: Vec<f64>,
    /// Column `j` is the eigenvector of `energies[j]`.
    pub vectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn vector(&self, band: usize) -> Vec<Complex64> {
        self.vectors.column(band).iter().copied().collect()
    }
}

impl BlochProblem {
    pub fn new(potential: PeriodicPotential, cutoff: usize, n_bands: usize) -> Result<Self> {
        let highest = potential.highest_mode();
        if cutoff < 2 * highest {
            return Err(Error::invalid(format!(
                "cutoff {cutoff} is below twice the highest potential mode {highest}"
            )));
        }
        if n_bands == 0 || n_bands > 2 * cutoff + 1 {
            return Err(Error::invalid(format!(
                "n_bands = {n_bands} must lie in 1..={}",
                2 * cutoff + 1
            )));
        }
        Ok(BlochProblem {
            potential,
            cutoff,
            n_bands,
        })
    }

    /// Cutoff [`DEFAULT_CUTOFF`] (or twice the highest mode if larger) and four bands.
    pub fn with_defaults(potential: PeriodicPotential) -> Self {
        let cutoff = DEFAULT_CUTOFF.max(2 * potential.highest_mode());
        BlochProblem {
            potential,
            cutoff,
            n_bands: 4,
        }
    }

    pub fn potential(&self) -> &PeriodicPotential {
        &self.potential
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    /// Matrix dimension `2M + 1`.
    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    /// Mode of vector slot `i`.
    pub fn mode(&self, i: usize) -> i64 {
        i as i64 - self.cutoff as i64
    }

    /// Diagonal of the velocity operator `∂_k H = -i∂_y + k`.
    pub fn velocity_diagonal(&self, k: f64) -> Vec<f64> {
        let g = self.potential.lattice().dual_period();
        (0..self.dim()).map(|i| k + g * self.mode(i) as f64).collect()
    }

    pub fn hamiltonian(&self, k: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let vel = self.velocity_diagonal(k);
        DMatrix::from_fn(n, n, |i, j| {
            let v = self.potential.coefficient(self.mode(i) - self.mode(j));
            if i == j {
                v + Complex64::new(0.5 * vel[i] * vel[i], 0.0)
            } else {
                v
            }
        })
    }

    /// Full ascending spectrum of `H(k)`.
    pub fn spectrum(&self, k: f64) -> Result<Spectrum> {
        let n = self.dim();
        let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if self.potential.is_even() {
            // real symmetric fast path
            let h = self.hamiltonian(k).map(|z| z.re);
            let eig = h
                .try_symmetric_eigen(1e-15, 10_000)
                .ok_or(Error::EigenSolve { k })?;
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            )
        } else {
            let eig = self
                .hamiltonian(k)
                .try_symmetric_eigen(1e-15, 10_000)
                .ok_or(Error::EigenSolve { k })?;
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        };
        if values.iter().any(|e| !e.is_finite()) {
            return Err(Error::EigenSolve { k });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let energies = order.iter().map(|&i| values[i]).collect();
        let mut sorted = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let col = vectors.column(src);
            let norm = col.norm();
            sorted.set_column(dst, &(col / Complex64::new(norm, 0.0)));
        }
        Ok(Spectrum {
            k,
            energies,
            vectors: sorted,
        })
    }

    /// The lowest `n_bands` eigenpairs at `k`, ascending.
    pub fn solve_at_k(&self, k: f64) -> Result<Vec<BlochPair>> {
        let s = self.spectrum(k)?;
        Ok((0..self.n_bands)
            .map(|b| BlochPair {
                energy: s.energies[b],
                coeffs: s.vector(b),
            })
            .collect())
    }
}

/// Eigenpairs of the lowest `n_bands` bands at `k`.
pub fn solve_bloch_at_k(problem: &BlochProblem, k: f64) -> Result<Vec<BlochPair>> {
    problem.solve_at_k(k)
}

/// `∂_k E_n(k) = Σ_m |c_m|² (k + mG)`, gauge independent.
pub fn group_velocity(problem: &BlochProblem, n: usize, k: f64) -> Result<f64> {
    check_band(problem, n)?;
    let (folded, _) = problem.potential().lattice().fold(k);
    let s = problem.spectrum(folded)?;
    let vel = problem.velocity_diagonal(folded);
    Ok(s.vectors
        .column(n - 1)
        .iter()
        .zip(&vel)
        .map(|(c, p)| c.norm_sqr() * p)
        .sum())
}

/// `∫_Y |χ_n(y, k)|^{2σ+2} dy`; `sigma = 0` returns the normalization.
pub fn kappa_integral(problem: &BlochProblem, n: usize, k: f64, sigma: u32) -> Result<f64> {
    check_band(problem, n)?;
    let (folded, _) = problem.potential().lattice().fold(k);
    let s = problem.spectrum(folded)?;
    Ok(band::kappa_from_coeffs(
        &s.vector(n - 1),
        sigma,
        problem.potential().lattice().period(),
    ))
}

fn check_band(problem: &BlochProblem, n: usize) -> Result<()> {
    if n == 0 || n > problem.dim() {
        return Err(Error::invalid(format!("band index {n} outside 1..={}", problem.dim())));
    }
    Ok(())
}
