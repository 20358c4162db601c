//! FFT plumbing shared by the band solver, the split-step solver and the
//! Wigner transform.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Unnormalized forward transform plan, `X_q = Σ x_j e^{-2πi jq/n}`.
pub fn forward(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().expect("fft planner poisoned").plan_fft_forward(n)
}

/// Unnormalized inverse transform plan, `x_j = Σ X_q e^{+2πi jq/n}`.
pub fn inverse(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().expect("fft planner poisoned").plan_fft_inverse(n)
}

/// Angular wavenumbers of an `n`-point periodic grid of length `length`,
/// in FFT order.
pub fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let dk = 2.0 * PI / length;
    (0..n)
        .map(|q| {
            let s = if q <= n / 2 { q as i64 } else { q as i64 - n as i64 };
            s as f64 * dk
        })
        .collect()
}

/// Samples `Σ_m c_m e^{2πi m q / n}` for `q = 0..n`, where `coeffs[i]` is
/// the coefficient of mode `first_mode + i`.
pub fn synthesize(first_mode: i64, coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, &c) in coeffs.iter().enumerate() {
        let m = first_mode + i as i64;
        let slot = m.rem_euclid(n as i64) as usize;
        buf[slot] += c;
    }
    inverse(n).process(&mut buf);
    buf
}

/// Spectral derivative of periodic samples on a grid of length `length`.
pub fn derivative(values: &[Complex64], length: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    forward(n).process(&mut buf);
    let ks = wavenumbers(n, length);
    for (q, (b, &k)) in buf.iter_mut().zip(&ks).enumerate() {
        // the Nyquist mode has no consistent odd derivative
        if n % 2 == 0 && q == n / 2 {
            *b = Complex64::new(0.0, 0.0);
        } else {
            *b *= Complex64::new(0.0, k / n as f64);
        }
    }
    inverse(n).process(&mut buf);
    buf
}
