//! First-order corrector that makes initial data well prepared.

use bloch_wkb::bloch::{well_prepared_corrector, InitialProfile};
use bloch_wkb::harness::Scenario;

fn main() -> bloch_wkb::Result<()> {
    let s = Scenario::full();
    let band = s.band()?;
    let profile = InitialProfile::normalized_gaussian(0.0, 0.5).with_phase(vec![0.0, 0.4]);
    let x: Vec<f64> = (0..=8).map(|j| -1.0 + 0.25 * j as f64).collect();
    let phi1 = well_prepared_corrector(&band, &profile, &s.confinement()?, 1.0, 1, &x)?;
    println!("x, |phi1(x, 0)|, max_y |phi1(x, y)|");
    for (j, &xj) in x.iter().enumerate() {
        let peak = (0..32)
            .map(|i| phi1.eval(j, i as f64 / 32.0).norm())
            .fold(0.0, f64::max);
        println!("{xj:+.2}, {:.6e}, {peak:.6e}", phi1.eval(j, 0.0).norm());
    }
    Ok(())
}
