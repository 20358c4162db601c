//! Ray fan of a Gaussian in a lattice with a harmonic trap, up to the first
//! caustic.

use bloch_wkb::bloch::{BlochBand, BlochProblem, InitialProfile};
use bloch_wkb::lattice::{Lattice, PeriodicPotential};
use bloch_wkb::rays::{trace_bundle, ConfinementPotential, RaySettings};
use bloch_wkb::Coupling;

fn main() -> bloch_wkb::Result<()> {
    let band = BlochBand::new(BlochProblem::new(PeriodicPotential::mathieu(Lattice::unit(), 1.0), 12, 2)?, 1)?;
    let profile = InitialProfile::normalized_gaussian(0.0, 0.5);
    let x0: Vec<f64> = (0..=20).map(|j| -2.0 + 0.2 * j as f64).collect();
    let settings = RaySettings::new(1, Coupling::real(1.0), 1.5, 1e-3);
    let bundle = trace_bundle(&band, &ConfinementPotential::harmonic(1.0), &x0, &profile, &settings)?;
    println!("first caustic at t = {:.4}", bundle.caustic_time);
    println!("x0, x(T), k(T), J(T), berry(T), nlphase(T)");
    for p in &bundle.paths {
        let j = p.len() - 1;
        println!(
            "{:+.2}, {:+.6}, {:+.6}, {:.6}, {:+.3e}, {:+.6}",
            p.x0, p.x[j], p.k[j], p.jac[j], p.berry[j], p.nlphase[j]
        );
    }
    Ok(())
}
