//! Finite-time blow-up of the amplitude modulus for a gaining coupling.

use bloch_wkb::bloch::{BlochBand, BlochProblem};
use bloch_wkb::lattice::{Lattice, PeriodicPotential};
use bloch_wkb::rays::{blowup_experiment, ConfinementPotential};
use bloch_wkb::Coupling;

fn main() -> bloch_wkb::Result<()> {
    let band = BlochBand::new(BlochProblem::new(PeriodicPotential::zero(Lattice::unit()), 8, 2)?, 1)?;
    for (gain, a) in [(1.0, 1.0), (1.0, 2.0), (0.5, 1.0), (-1.0, 1.0)] {
        let lambda = Coupling::complex(0.0, gain);
        let r = blowup_experiment(&band, &ConfinementPotential::Zero, 0.0, 1, &lambda, a, 3.0, 1e-3)?;
        // |ã|² = a²/(1 - Im λ a² t) for σ = 1
        let exact = if gain > 0.0 { 1.0 / (gain * a * a) } else { f64::INFINITY };
        println!("Im lambda = {gain:+}, |a| = {a}: blow-up at {:.6} (closed form {exact:.6})", r.blowup_time);
    }
    Ok(())
}
