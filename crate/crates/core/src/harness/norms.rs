//! Error norms between a reference solution and an approximation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::field::{mass, WaveField};
use crate::fourier;

/// Errors of one `ε` run, taken as the maximum over all compared snapshots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub epsilon: f64,
    pub l2_error: f64,
    pub linf_error: f64,
    /// `s → ‖w‖_{X^s_ε}`.
    pub xs_errors: BTreeMap<u32, f64>,
    pub runtime_seconds: f64,
}

impl ErrorRecord {
    pub fn zero(epsilon: f64) -> Self {
        ErrorRecord {
            epsilon,
            l2_error: 0.0,
            linf_error: 0.0,
            xs_errors: BTreeMap::new(),
            runtime_seconds: 0.0,
        }
    }

    /// Componentwise maximum, used for the sup over snapshots.
    pub fn absorb(&mut self, other: &ErrorRecord) {
        self.l2_error = self.l2_error.max(other.l2_error);
        self.linf_error = self.linf_error.max(other.linf_error);
        for (&s, &v) in &other.xs_errors {
            let e = self.xs_errors.entry(s).or_insert(0.0);
            *e = e.max(v);
        }
    }
}

/// `L²`, `L∞` and `X^s_ε` (`s = 0..=s_max`) norms of `psi - v0`, with
///
/// ```text
/// ‖w‖_{X^s_ε} = Σ_{α+β ≤ s} ‖x^α (ε∂_x)^β w‖_{L²}
/// ```
///
/// and `∂_x` taken spectrally on the periodic grid.
pub fn error_norms(psi: &WaveField, v0: &WaveField, s_max: u32) -> Result<ErrorRecord> {
    psi.check_compatible(v0)?;
    let diff: Vec<Complex64> = psi.values.iter().zip(&v0.values).map(|(a, b)| a - b).collect();
    let mut w = WaveField {
        values: diff,
        ..psi.clone()
    };
    let l2 = mass(&w);
    let linf = w.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let xs = xs_norms(&mut w, s_max);
    Ok(ErrorRecord {
        epsilon: psi.epsilon,
        l2_error: l2,
        linf_error: linf,
        xs_errors: xs,
        runtime_seconds: 0.0,
    })
}

/// `X^s_ε` norms of `w` for `s = 0..=s_max`. Consumes the values of `w`.
fn xs_norms(w: &mut WaveField, s_max: u32) -> BTreeMap<u32, f64> {
    let grid = w.grid;
    let x = grid.points();
    let dx = grid.dx();
    // terms[a][b] = ‖x^a (ε∂)^b w‖
    let s = s_max as usize;
    let mut terms = vec![vec![0.0; s + 1]; s + 1];
    let mut d = std::mem::take(&mut w.values);
    for b in 0..=s {
        if b > 0 {
            d = fourier::derivative(&d, grid.length());
            for z in d.iter_mut() {
                *z *= w.epsilon;
            }
        }
        for a in 0..=(s - b) {
            let sum: f64 = d
                .iter()
                .zip(&x)
                .map(|(z, &xj)| xj.powi(a as i32).powi(2) * z.norm_sqr())
                .sum();
            terms[a][b] = (sum * dx).sqrt();
        }
    }
    (0..=s_max)
        .map(|s| {
            let s = s as usize;
            let total = (0..=s)
                .flat_map(|a| (0..=(s - a)).map(move |b| (a, b)))
                .map(|(a, b)| terms[a][b])
                .sum();
            (s as u32, total)
        })
        .collect()
}
