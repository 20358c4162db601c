//! Discrete Wigner transforms and the semiclassical Wigner measure.
//!
//! ```text
//! W(x, ξ) = (2π)⁻¹ ∫ ψ(x - εη/2) conj ψ(x + εη/2) e^{iξη} dη
//! ```
//!
//! On a grid with spacing `Δx` the shifts `εη/2 = jΔx` give `Δη = 2Δx/ε`,
//! and the `η` sum for every `x` is one FFT.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bloch::BlochBand;
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::fourier;
use crate::wkb::EulerianFields;

/// Window applied to the `η` sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowParams {
    /// Largest shift `|εη/2|`.
    pub half_width: f64,
    /// Number of shifts on each side.
    pub shifts: usize,
    /// Every `x_stride`-th grid point is a row of the output.
    pub x_stride: usize,
}

/// `W` on a tensor grid, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    /// Ascending.
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
    pub window: WindowParams,
}

#[derive(Debug, Clone, Copy)]
pub struct WignerOptions {
    pub x_stride: usize,
    /// Defaults to a quarter of the box.
    pub half_width: Option<f64>,
}

impl Default for WignerOptions {
    fn default() -> Self {
        WignerOptions {
            x_stride: 1,
            half_width: None,
        }
    }
}

impl WignerGrid {
    pub fn rows(&self) -> usize {
        self.x.len()
    }

    pub fn cols(&self) -> usize {
        self.xi.len()
    }

    pub fn at(&self, i: usize, q: usize) -> f64 {
        self.values[i * self.cols() + q]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols()..(i + 1) * self.cols()]
    }

    pub fn dx(&self) -> f64 {
        if self.x.len() < 2 {
            return 1.0;
        }
        self.x[1] - self.x[0]
    }

    pub fn dxi(&self) -> f64 {
        self.xi[1] - self.xi[0]
    }

    /// `∫ W dξ` at every row.
    pub fn marginal(&self) -> Vec<f64> {
        let d = self.dxi();
        (0..self.rows()).map(|i| self.row(i).iter().sum::<f64>() * d).collect()
    }

    /// `∫∫ W dx dξ`.
    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx() * self.dxi()
    }

    fn same_grid(&self, other: &WignerGrid) -> Result<()> {
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p - q).abs() < 1e-9);
        if !close(&self.x, &other.x) || !close(&self.xi, &other.xi) {
            return Err(Error::GridMismatch("Wigner grids differ".into()));
        }
        Ok(())
    }

    /// `∫∫ |W₁ - W₂| dx dξ`.
    pub fn l1_distance(&self, other: &WignerGrid) -> Result<f64> {
        self.same_grid(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum();
        Ok(s * self.dx() * self.dxi())
    }

    /// Separable Gaussian smoothing with standard deviations `sigma_x` and
    /// `sigma_xi`, truncated at four deviations, zero outside the grid.
    pub fn mollify(&self, sigma_x: f64, sigma_xi: f64) -> WignerGrid {
        let (r, c) = (self.rows(), self.cols());
        let kernel = |sigma: f64, h: f64| -> Vec<f64> {
            if sigma <= 0.0 {
                return vec![1.0];
            }
            let half = (4.0 * sigma / h).ceil() as i64;
            let k: Vec<f64> = (-half..=half).map(|j| (-0.5 * (j as f64 * h / sigma).powi(2)).exp()).collect();
            let s: f64 = k.iter().sum();
            k.into_iter().map(|v| v / s).collect()
        };
        let kx = kernel(sigma_x, self.dx());
        let kq = kernel(sigma_xi, self.dxi());
        let conv = |src: &[f64], k: &[f64], dst: &mut [f64]| {
            let h = (k.len() / 2) as i64;
            let n = src.len() as i64;
            for (i, d) in dst.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, &w) in k.iter().enumerate() {
                    let s = i as i64 + j as i64 - h;
                    if (0..n).contains(&s) {
                        acc += w * src[s as usize];
                    }
                }
                *d = acc;
            }
        };
        let mut tmp = vec![0.0; r * c];
        tmp.par_chunks_mut(c)
            .zip(self.values.par_chunks(c))
            .for_each(|(dst, src)| conv(src, &kq, dst));
        let mut out = vec![0.0; r * c];
        let cols: Vec<Vec<f64>> = (0..c)
            .into_par_iter()
            .map(|q| {
                let col: Vec<f64> = (0..r).map(|i| tmp[i * c + q]).collect();
                let mut d = vec![0.0; r];
                conv(&col, &kx, &mut d);
                d
            })
            .collect();
        for (q, col) in cols.iter().enumerate() {
            for i in 0..r {
                out[i * c + q] = col[i];
            }
        }
        WignerGrid {
            values: out,
            ..self.clone()
        }
    }

    /// CSV: `x, xi, W` in row-major order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,xi,W")?;
        for i in 0..self.rows() {
            for q in 0..self.cols() {
                writeln!(out, "{:.17e},{:.17e},{:.17e}", self.x[i], self.xi[q], self.at(i, q))?;
            }
        }
        Ok(())
    }
}

/// Discrete Wigner transform of `psi` with a Hann window in `η`.
pub fn wigner_transform(psi: &WaveField, opts: WignerOptions) -> WignerGrid {
    let g = psi.grid;
    let n = g.n;
    let dx = g.dx();
    let eps = psi.epsilon;
    let half_width = opts.half_width.unwrap_or(0.25 * g.length());
    // the Hann period equals the transform length, so an on-grid carrier
    // lands in three nonnegative bins
    let most = ((half_width / dx).floor() as usize).clamp(1, n / 2 - 1);
    let m = prev_power_of_two(2 * most + 2).max(4);
    let shifts = m / 2 - 1;
    let d_eta = 2.0 * dx / eps;
    let d_xi = 2.0 * PI / (m as f64 * d_eta);
    let window: Vec<f64> = (0..=shifts)
        .map(|j| 0.5 * (1.0 + (PI * j as f64 / (shifts + 1) as f64).cos()))
        .collect();
    let stride = opts.x_stride.max(1);
    let rows: Vec<usize> = (0..n).step_by(stride).collect();
    let inverse = fourier::inverse(m);
    let scale = d_eta / (2.0 * PI);
    let v = &psi.values;
    let values: Vec<f64> = rows
        .par_iter()
        .flat_map_iter(|&i| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for j in 0..=shifts {
                let minus = v[(i + n - j % n) % n];
                let plus = v[(i + j) % n];
                let f = minus * plus.conj() * window[j];
                buf[j] += f;
                if j > 0 {
                    // the -j term is the conjugate, so W comes out real
                    buf[m - j] += f.conj();
                }
            }
            inverse.process(&mut buf);
            // reorder so that ξ ascends from -m/2
            let half = m / 2;
            (0..m).map(move |q| buf[(q + half) % m].re * scale)
        })
        .collect();
    let xi = (0..m).map(|q| (q as f64 - (m / 2) as f64) * d_xi).collect();
    WignerGrid {
        x: rows.iter().map(|&i| g.x(i)).collect(),
        xi,
        values,
        window: WindowParams {
            half_width: shifts as f64 * dx,
            shifts,
            x_stride: stride,
        },
    }
}

fn prev_power_of_two(v: usize) -> usize {
    1 << (usize::BITS - 1 - v.leading_zeros())
}

/// The limit measure
///
/// ```text
/// μ(x, ξ) = |a_I(X⁻¹x)|²/J · Σ_m |c_m(k)|² δ(ξ - k - mG) / period,   k = ∂_xφ
/// ```
///
/// deposited onto the grid of `like` (linear sharing between the two
/// neighboring `ξ` cells). Rows of `like` must be points of `fields`.
pub fn wigner_predicted(fields: &EulerianFields, band: &BlochBand, like: &WignerGrid) -> Result<WignerGrid> {
    let g = band.dual_period();
    let period = band.period();
    let dxi = like.dxi();
    let xi0 = like.xi[0];
    let cols = like.cols();
    let rows: Vec<Vec<f64>> = like
        .x
        .par_iter()
        .map(|&x| {
            let mut row = vec![0.0; cols];
            let j = fields
                .x
                .iter()
                .position(|&p| (p - x).abs() < 1e-9 * (1.0 + x.abs()))
                .ok_or_else(|| Error::GridMismatch(format!("x = {x} is not a field point")))?;
            let w = fields.amp[j].norm_sqr();
            if !fields.covered[j] || w == 0.0 {
                return Ok(row);
            }
            let k = fields.grad_phi[j];
            let state = band.state(k)?;
            for (mode, c) in state.modes() {
                // the synthesized Bloch wave carries e^{iGmy} for the
                // stored mode index, on top of the e^{iφ/ε} carrier
                let xi = k + mode as f64 * g;
                let s = (xi - xi0) / dxi;
                let q = s.floor();
                if q < 0.0 || q as usize + 1 >= cols {
                    continue;
                }
                let f = s - q;
                let mass = w * c.norm_sqr() / period / dxi;
                row[q as usize] += (1.0 - f) * mass;
                row[q as usize + 1] += f * mass;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(WignerGrid {
        values: rows.concat(),
        ..like.clone()
    })
}

/// `Σ_x |∫W dξ - |ψ(x)|²| Δx`, over the rows of `w`.
pub fn marginal_defect(w: &WignerGrid, psi: &WaveField) -> f64 {
    let stride = w.window.x_stride;
    w.marginal()
        .iter()
        .enumerate()
        .map(|(i, m)| (m - psi.values[i * stride].norm_sqr()).abs())
        .sum::<f64>()
        * w.dx()
}

/// Mollified comparison between a numerical transform and the predicted
/// measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WignerComparison {
    /// `‖W̃ - μ̃‖_{L¹}` relative to `∫∫μ̃`.
    pub l1: f64,
    pub marginal_defect: f64,
    pub predicted_mass: f64,
    pub numerical_mass: f64,
}

pub fn compare_wigner(
    numerical: &WignerGrid,
    predicted: &WignerGrid,
    psi: &WaveField,
    sigma_x: f64,
    sigma_xi: f64,
) -> Result<WignerComparison> {
    let a = numerical.mollify(sigma_x, sigma_xi);
    let b = predicted.mollify(sigma_x, sigma_xi);
    let mass = b.total();
    Ok(WignerComparison {
        l1: a.l1_distance(&b)? / mass,
        marginal_defect: marginal_defect(numerical, psi),
        predicted_mass: mass,
        numerical_mass: a.total(),
    })
}
