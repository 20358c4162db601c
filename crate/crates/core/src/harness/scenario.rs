//! Experiment configuration, read from TOML with sections `[lattice]`,
//! `[potential]`, `[confinement]`, `[initial]`, `[nls]` and `[sweep]`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{BlochBand, BlochProblem, InitialProfile};
use crate::coupling::Coupling;
use crate::error::{Error, Result};
use crate::field::WaveGrid;
use crate::lattice::{Lattice, PeriodicPotential};
use crate::rays::ConfinementPotential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    /// Preset name understood by [`PeriodicPotential::preset`].
    pub preset: String,
    /// Plane-wave cutoff `M` (basis `|m| ≤ M`).
    pub cutoff: usize,
    /// Band index, 1-based.
    pub band: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConfinementSection {
    Zero,
    Harmonic { omega: f64 },
    Stark { field: f64 },
    Polynomial { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub center: f64,
    /// Gaussian width; `inf` gives a constant amplitude.
    pub width: f64,
    /// Peak of `a_I`; unit `L²` mass when absent.
    #[serde(default)]
    pub amplitude: Option<f64>,
    /// Polynomial coefficients of `φ_I`, lowest degree first.
    #[serde(default)]
    pub phase: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlsSection {
    pub sigma: u32,
    pub lambda_re: f64,
    #[serde(default)]
    pub lambda_im: f64,
    /// Optional modulation `λ(t) = λ + amp·sin(freq·t)`.
    #[serde(default)]
    pub lambda_mod_amplitude: f64,
    #[serde(default)]
    pub lambda_mod_frequency: f64,
    /// Final time `τ₀`.
    pub t_end: f64,
    /// Box `[x_min, x_max)`.
    pub x_min: f64,
    pub x_max: f64,
    pub points_per_cell: usize,
    /// Time step `dt = dt_coeff·ε^dt_power`.
    pub dt_coeff: f64,
    pub dt_power: f64,
    /// Number of uniformly spaced comparison times in `(0, τ₀]`.
    pub snapshots: usize,
    /// Reject runs whose field reaches the box edge. Off for data that
    /// are periodic on the box.
    #[serde(default = "yes")]
    pub edge_check: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub epsilons: Vec<f64>,
    pub corrector: bool,
    pub s_max: u32,
    pub ray_dt: f64,
    /// Spacing of ray launch points.
    pub ray_spacing: f64,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub lattice: LatticeSection,
    pub potential: PotentialSection,
    pub confinement: ConfinementSection,
    pub initial: InitialSection,
    pub nls: NlsSection,
    pub sweep: SweepSection,
}

impl Scenario {
    /// Mathieu lattice of amplitude 1, harmonic trap, `λ = 1`, `σ = 1`,
    /// normalized Gaussian, `φ_I = 0`, `τ₀ = 0.5`.
    pub fn full() -> Self {
        Scenario {
            name: "full_scenario".into(),
            lattice: LatticeSection { period: 1.0 },
            potential: PotentialSection {
                preset: "mathieu:amplitude=1".into(),
                cutoff: 12,
                band: 1,
            },
            confinement: ConfinementSection::Harmonic { omega: 1.0 },
            initial: InitialSection {
                center: 0.0,
                width: 0.5,
                amplitude: None,
                phase: Vec::new(),
            },
            nls: NlsSection {
                sigma: 1,
                lambda_re: 1.0,
                lambda_im: 0.0,
                lambda_mod_amplitude: 0.0,
                lambda_mod_frequency: 0.0,
                t_end: 0.5,
                x_min: -24.0,
                x_max: 24.0,
                points_per_cell: 16,
                dt_coeff: 0.25,
                dt_power: 2.0,
                snapshots: 8,
                edge_check: true,
            },
            sweep: SweepSection {
                epsilons: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
                corrector: true,
                s_max: 1,
                ray_dt: 5e-3,
                ray_spacing: 0.02,
            },
        }
    }

    /// No lattice, no trap, `λ = 1`, `σ = 1`, up to `τ₀ = 1`.
    pub fn self_phase_modulation() -> Self {
        let mut s = Self::full();
        s.name = "self_phase_modulation".into();
        s.potential.preset = "zero".into();
        s.potential.cutoff = 4;
        s.confinement = ConfinementSection::Zero;
        s.nls.t_end = 1.0;
        s.nls.x_min = -8.0;
        s.nls.x_max = 8.0;
        s.sweep.epsilons = vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
        s
    }

    /// Constant amplitude, no lattice, no trap, no nonlinearity: the leading
    /// term is the exact solution.
    pub fn linear_trivial() -> Self {
        let mut s = Self::self_phase_modulation();
        s.name = "linear_trivial".into();
        s.nls.lambda_re = 0.0;
        s.nls.edge_check = false;
        s.initial.width = f64::INFINITY;
        s.initial.amplitude = Some(1.0);
        s.sweep.ray_spacing = 0.1;
        s
    }

    /// Built-in scenario by name.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "full_scenario" | "full" => Some(Self::full()),
            "self_phase_modulation" | "spm" => Some(Self::self_phase_modulation()),
            "linear_trivial" | "linear" => Some(Self::linear_trivial()),
            _ => None,
        }
    }

    /// A built-in name, or else a path to a TOML file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match Self::named(name_or_path) {
            Some(s) => Ok(s),
            None => Self::load(name_or_path),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config { message, .. } => Error::Config {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.potential.band == 0 || self.potential.band > 2 * self.potential.cutoff + 1 {
            return bad(format!("band {} outside the basis", self.potential.band));
        }
        if !(self.initial.width > 0.0) {
            return bad("initial width must be positive".into());
        }
        if self.nls.sigma == 0 {
            return bad("sigma must be at least 1".into());
        }
        if !(self.nls.t_end > 0.0) || self.nls.snapshots == 0 {
            return bad("need t_end > 0 and at least one snapshot".into());
        }
        if self.sweep.epsilons.iter().any(|&e| !(e > 0.0)) {
            return bad("epsilons must be positive".into());
        }
        if !(self.sweep.ray_dt > 0.0) || !(self.sweep.ray_spacing > 0.0) {
            return bad("ray_dt and ray_spacing must be positive".into());
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.lattice.period)
    }

    pub fn potential(&self) -> Result<PeriodicPotential> {
        PeriodicPotential::preset(self.lattice()?, &self.potential.preset)
    }

    pub fn problem(&self) -> Result<BlochProblem> {
        BlochProblem::new(self.potential()?, self.potential.cutoff, self.potential.band + 1)
    }

    pub fn band(&self) -> Result<BlochBand> {
        BlochBand::new(self.problem()?, self.potential.band)
    }

    pub fn confinement(&self) -> Result<ConfinementPotential> {
        Ok(match &self.confinement {
            ConfinementSection::Zero => ConfinementPotential::Zero,
            ConfinementSection::Harmonic { omega } => ConfinementPotential::harmonic(*omega),
            ConfinementSection::Stark { field } => ConfinementPotential::stark(*field),
            ConfinementSection::Polynomial { coeffs } => ConfinementPotential::polynomial(coeffs.clone())?,
        })
    }

    pub fn profile(&self) -> InitialProfile {
        let i = &self.initial;
        let p = match i.amplitude {
            Some(a) => InitialProfile::gaussian(a, i.center, i.width),
            None => InitialProfile::normalized_gaussian(i.center, i.width),
        };
        p.with_phase(i.phase.clone())
    }

    pub fn coupling(&self) -> Coupling {
        let n = &self.nls;
        let mean = Complex64::new(n.lambda_re, n.lambda_im);
        if n.lambda_mod_amplitude == 0.0 {
            Coupling::Constant(mean)
        } else {
            Coupling::Modulated {
                mean,
                amplitude: Complex64::new(n.lambda_mod_amplitude, 0.0),
                frequency: n.lambda_mod_frequency,
            }
        }
    }

    pub fn grid(&self, epsilon: f64) -> Result<WaveGrid> {
        WaveGrid::resolving(
            self.nls.x_min,
            self.nls.x_max,
            epsilon,
            self.lattice.period,
            self.nls.points_per_cell,
        )
    }

    pub fn dt(&self, epsilon: f64) -> f64 {
        self.nls.dt_coeff * epsilon.powf(self.nls.dt_power)
    }

    /// `τ₀ j / snapshots` for `j = 1..=snapshots`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let n = self.nls.snapshots;
        (1..=n).map(|j| self.nls.t_end * j as f64 / n as f64).collect()
    }
}
