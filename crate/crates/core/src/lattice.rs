//! One-dimensional Bravais lattice, its periodic potential, and the
//! rescaling of physical condensate parameters into the dimensionless
//! semiclassical parameter ε.
//!
//! The potential is stored as a truncated Fourier series
//!
//! ```text
//! V(y) = Σ_{|m| ≤ M} V̂_m exp(i m G y),    G = 2π / period
//! ```
//!
//! with Hermitian symmetry `V̂_{-m} = conj(V̂_m)` so that `V` is real.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum tolerated violation of `V̂_{-m} = conj(V̂_m)` before a potential is rejected.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A one-dimensional lattice `Γ = period · ℤ` with its dual `Γ* = G · ℤ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    period: f64,
    dual_period: f64,
}

impl Lattice {
    pub fn new(period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid(format!(
                "lattice period must be positive, got {period}"
            )));
        }
        Ok(Lattice {
            period,
            dual_period: 2.0 * PI / period,
        })
    }

    /// The unit lattice, period 1.
    pub fn unit() -> Self {
        Lattice {
            period: 1.0,
            dual_period: 2.0 * PI,
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Generator of the dual lattice, `2π / period`.
    pub fn dual_period(&self) -> f64 {
        self.dual_period
    }

    /// Centered fundamental domain `[-period/2, period/2]`.
    pub fn y_domain(&self) -> (f64, f64) {
        (-0.5 * self.period, 0.5 * self.period)
    }

    /// Brillouin zone `[-G/2, G/2]`.
    pub fn brillouin(&self) -> (f64, f64) {
        (-0.5 * self.dual_period, 0.5 * self.dual_period)
    }

    /// Folds `k` into `[-G/2, G/2)`; returns the folded momentum and the
    /// integer `j` with `k = folded + j·G`.
    pub fn fold(&self, k: f64) -> (f64, i64) {
        let g = self.dual_period;
        let j = ((k + 0.5 * g) / g).floor();
        let folded = k - j * g;
        // floor can land one ulp outside the half-open zone
        if folded >= 0.5 * g {
            (folded - g, j as i64 + 1)
        } else {
            (folded, j as i64)
        }
    }
}

impl Default for Lattice {
    fn default() -> Self {
        Lattice::unit()
    }
}

/// Real periodic potential `V_Γ` given by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPotential {
    lattice: Lattice,
    coeffs: BTreeMap<i64, Complex64>,
}

impl PeriodicPotential {
    /// Builds a potential from `(mode, coefficient)` pairs.
    ///
    /// Missing partners `-m` are filled in by conjugation; pairs that are
    /// present must agree with Hermitian symmetry to [`HERMITIAN_TOL`] and are
    /// then symmetrized exactly.
    pub fn from_fourier(lattice: Lattice, coeffs: &[(i64, Complex64)]) -> Result<Self> {
        let mut raw = BTreeMap::new();
        for &(m, c) in coeffs {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient at mode {m}")));
            }
            if raw.insert(m, c).is_some() {
                return Err(Error::invalid(format!("duplicate Fourier mode {m}")));
            }
        }
        let mut sym = BTreeMap::new();
        for (&m, &c) in &raw {
            let partner = raw.get(&-m).copied();
            let value = match partner {
                Some(p) => {
                    let asymmetry = (p - c.conj()).norm();
                    if asymmetry > HERMITIAN_TOL {
                        return Err(Error::NonHermitian { mode: m, asymmetry });
                    }
                    0.5 * (c + p.conj())
                }
                None => c,
            };
            if m == 0 {
                sym.insert(0, Complex64::new(value.re, 0.0));
            } else {
                sym.insert(m, value);
                sym.insert(-m, value.conj());
            }
        }
        sym.retain(|_, c| c.norm() > 0.0);
        Ok(PeriodicPotential {
            lattice,
            coeffs: sym,
        })
    }

    pub fn zero(lattice: Lattice) -> Self {
        PeriodicPotential {
            lattice,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(lattice: Lattice, value: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if value != 0.0 {
            coeffs.insert(0, Complex64::new(value, 0.0));
        }
        PeriodicPotential { lattice, coeffs }
    }

    /// `V(y) = amplitude · cos(G y)`, the Mathieu potential.
    pub fn mathieu(lattice: Lattice, amplitude: f64) -> Self {
        let half = Complex64::new(0.5 * amplitude, 0.0);
        Self::from_fourier(lattice, &[(1, half), (-1, half)]).expect("cosine is Hermitian")
    }

    /// Discrete Fourier analysis of `samples` taken uniformly over one cell
    /// starting at `-period/2`, truncated to modes `|m| ≤ max_mode`.
    pub fn from_samples(lattice: Lattice, samples: &[f64], max_mode: usize) -> Result<Self> {
        let n = samples.len();
        if n == 0 || 2 * max_mode + 1 > n {
            return Err(Error::invalid(format!(
                "{n} samples cannot resolve {max_mode} Fourier modes"
            )));
        }
        let g = lattice.dual_period();
        let (y0, _) = lattice.y_domain();
        let h = lattice.period() / n as f64;
        let mut pairs = Vec::with_capacity(2 * max_mode + 1);
        for m in -(max_mode as i64)..=(max_mode as i64) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &v) in samples.iter().enumerate() {
                let y = y0 + j as f64 * h;
                acc += v * Complex64::cis(-(m as f64) * g * y);
            }
            pairs.push((m, acc / n as f64));
        }
        // rounding noise would otherwise register as spurious modes
        let scale = pairs.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let floor = 1e-14 * scale.max(1e-300);
        let clean = |x: f64| if x.abs() <= floor { 0.0 } else { x };
        let pairs: Vec<(i64, Complex64)> = pairs
            .into_iter()
            .map(|(m, c)| (m, Complex64::new(clean(c.re), clean(c.im))))
            .collect();
        // real samples give exactly Hermitian sums up to rounding
        let mut sym: Vec<(i64, Complex64)> = Vec::new();
        for &(m, c) in &pairs {
            if m >= 0 {
                let partner = pairs
                    .iter()
                    .find(|(p, _)| *p == -m)
                    .map(|(_, c)| *c)
                    .unwrap_or(c.conj());
                let v = 0.5 * (c + partner.conj());
                sym.push((m, v));
                if m > 0 {
                    sym.push((-m, v.conj()));
                }
            }
        }
        Self::from_fourier(lattice, &sym)
    }

    /// Parses a named preset: `zero`, `cosine`, `mathieu:amplitude=A`, `constant:value=c`.
    pub fn preset(lattice: Lattice, name: &str) -> Result<Self> {
        let name = name.trim();
        let (head, args) = match name.split_once(':') {
            Some((h, a)) => (h.trim(), a.trim()),
            None => (name, ""),
        };
        let arg = |key: &str| -> Result<Option<f64>> {
            for kv in args.split(',').filter(|s| !s.trim().is_empty()) {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::invalid(format!("bad preset argument '{kv}'")))?;
                if k.trim() == key {
                    return v
                        .trim()
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::invalid(format!("bad number in preset '{name}'")));
                }
            }
            Ok(None)
        };
        match head {
            "zero" => Ok(Self::zero(lattice)),
            "cosine" => Ok(Self::mathieu(lattice, 1.0)),
            "mathieu" => Ok(Self::mathieu(lattice, arg("amplitude")?.unwrap_or(1.0))),
            "constant" => Ok(Self::constant(lattice, arg("value")?.unwrap_or(0.0))),
            _ => Err(Error::invalid(format!("unknown potential preset '{name}'"))),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Nonzero coefficients, ascending by mode.
    pub fn coefficients(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, mode: i64) -> Complex64 {
        self.coeffs.get(&mode).copied().unwrap_or_default()
    }

    /// Largest `|m|` with a nonzero coefficient.
    pub fn highest_mode(&self) -> usize {
        self.coeffs.keys().map(|m| m.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// True when every coefficient is real, i.e. `V` is even and the Bloch
    /// Hamiltonian is a real symmetric matrix.
    pub fn is_even(&self) -> bool {
        self.coeffs.values().all(|c| c.im == 0.0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.eval_complex(y).re
    }

    /// The series value before discarding the (rounding-level) imaginary part.
    pub fn eval_complex(&self, y: f64) -> Complex64 {
        let g = self.lattice.dual_period;
        self.coeffs
            .iter()
            .map(|(&m, &c)| c * Complex64::cis(m as f64 * g * y))
            .sum()
    }
}

/// Dimensionless parameters obtained from physical condensate data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReport {
    /// Semiclassical parameter ε = (a0 / x_s)².
    pub epsilon: f64,
    /// Characteristic length x_s [m].
    pub x_s: f64,
    /// Lattice wave vector ξ [1/m] matching the scaling.
    pub xi: f64,
    /// Reference interaction strength δ̄ = 4π|ā|N / a0.
    pub delta_bar: f64,
    /// Reference scattering length ā [m].
    pub a_bar: f64,
}

impl ScalingReport {
    /// Coupling λ = δ/δ̄ for an instantaneous scattering length `a`.
    pub fn lambda_ratio(&self, a: f64) -> f64 {
        a.abs() / self.a_bar.abs()
    }
}

/// Rescales oscillator length `a0`, reference scattering length `a_bar`,
/// atom number `n_atoms` and trap frequency `omega0` into the weakly
/// nonlinear semiclassical regime.
pub fn scale_physical_params(
    a0: f64,
    a_bar: f64,
    n_atoms: f64,
    omega0: f64,
) -> Result<ScalingReport> {
    for (name, v) in [
        ("a0", a0),
        ("a_bar", a_bar),
        ("N", n_atoms),
        ("omega0", omega0),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let interaction = 4.0 * PI * n_atoms * a_bar;
    let epsilon = (a0 / interaction).powf(2.0 / 3.0);
    let x_s = (interaction * a0 * a0).cbrt();
    let xi = a0.powf(-4.0 / 3.0) * interaction.cbrt();
    Ok(ScalingReport {
        epsilon,
        x_s,
        xi,
        delta_bar: interaction / a0,
        a_bar,
    })
}
