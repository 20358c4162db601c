//! One Bloch state in the fixed gauge: coefficients, velocity, connection
//! and the nonlinear averaging factor.

use bloch_wkb::bloch::{BlochBand, BlochProblem, GaugeTwist};
use bloch_wkb::lattice::{Lattice, PeriodicPotential};

fn main() -> bloch_wkb::Result<()> {
    let k: f64 = std::env::args().nth(1).map_or(0.7, |a| a.parse().expect("k"));
    let problem = BlochProblem::new(PeriodicPotential::mathieu(Lattice::unit(), 1.0), 12, 2)?;
    let band = BlochBand::new(problem.clone(), 1)?;
    let s = band.state(k)?;
    println!("k = {k}");
    println!("E = {:.12}, v = {:.12}, E'' = {:.12}", s.energy, s.velocity, s.curvature);
    println!("connection = {:.3e} (Re part {:.1e}), gap = {:.6}", s.connection, s.connection_re, s.gap);
    for sigma in 1..=3 {
        println!("kappa_{sigma} = {:.10}", band.kappa(&s, sigma));
    }
    for (m, c) in s.modes().filter(|(_, c)| c.norm() > 1e-6) {
        println!("  c[{m:+}] = {:+.8} {:+.8}i", c.re, c.im);
    }
    // a gauge twist moves only the phase and the connection
    let twisted = BlochBand::new(problem, 1)?.with_twist(GaugeTwist::new(0.4, vec![0.3], vec![]));
    let t = twisted.state(k)?;
    println!(
        "twisted: E changes by {:.1e}, connection by {:.6} (theta' = {:.6})",
        t.energy - s.energy,
        t.connection - s.connection,
        twisted.twist_derivative(k)
    );
    Ok(())
}
