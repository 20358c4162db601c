//! Split-step solution from well-prepared data, with the mass at every
//! snapshot.

use bloch_wkb::field::mass;
use bloch_wkb::harness::{initial_field, nls_config, Scenario};
use bloch_wkb::nls::solve_nls;

fn main() -> bloch_wkb::Result<()> {
    let eps = 1.0 / std::env::args().nth(1).map_or(16.0, |a| a.parse().expect("1/eps"));
    let s = Scenario::full();
    let band = s.band()?;
    let config = nls_config(&s, eps)?;
    let psi0 = initial_field(&s, &band, eps, true)?;
    println!("eps = {eps}, dt = {:e}, {} points", config.dt, config.grid.n);
    let m0 = mass(&psi0);
    for psi in solve_nls(&config, &psi0)? {
        println!("t = {:.4}: mass {:.15} (drift {:+.1e})", psi.t, mass(&psi), mass(&psi) - m0);
    }
    Ok(())
}
