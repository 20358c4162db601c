//! Time-dependent nonlinear coupling `λ(t)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

/// `λ(t)`, real in the standard regime and complex for loss/gain studies.
#[derive(Clone)]
pub enum Coupling {
    Constant(Complex64),
    /// `λ₀ + λ₁ sin(ν t)`.
    Modulated { mean: Complex64, amplitude: Complex64, frequency: f64 },
    Custom(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl Coupling {
    pub fn real(lambda: f64) -> Self {
        Coupling::Constant(Complex64::new(lambda, 0.0))
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Coupling::Constant(Complex64::new(re, im))
    }

    pub fn custom(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Coupling::Custom(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> Complex64 {
        match self {
            Coupling::Constant(l) => *l,
            Coupling::Modulated { mean, amplitude, frequency } => mean + amplitude * (frequency * t).sin(),
            Coupling::Custom(f) => f(t),
        }
    }

    /// True when `λ(t)` is known to be constant in time.
    pub fn is_autonomous(&self) -> bool {
        matches!(self, Coupling::Constant(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coupling::Constant(l) if *l == Complex64::new(0.0, 0.0))
    }
}

impl fmt::Debug for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Constant(l) => write!(f, "Constant({l})"),
            Coupling::Modulated { mean, amplitude, frequency } => {
                write!(f, "Modulated({mean} + {amplitude} sin({frequency} t))")
            }
            Coupling::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Default for Coupling {
    fn default() -> Self {
        Coupling::real(0.0)
    }
}
