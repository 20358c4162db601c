//! Lowest bands of a Mathieu lattice over the Brillouin zone, as CSV.

use bloch_wkb::bloch::{build_band_table, BlochProblem};
use bloch_wkb::lattice::{Lattice, PeriodicPotential};

fn main() -> bloch_wkb::Result<()> {
    let amplitude: f64 = std::env::args().nth(1).map_or(1.0, |a| a.parse().expect("amplitude"));
    let problem = BlochProblem::new(PeriodicPotential::mathieu(Lattice::unit(), amplitude), 16, 4)?;
    for n in 1..=3 {
        let table = build_band_table(&problem, n, 65)?;
        let e = table.energies();
        let (lo, hi) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        eprintln!("band {n}: [{lo:.5}, {hi:.5}], min gap above {:.5}", table.min_gap());
    }
    build_band_table(&problem, 1, 65)?
        .write_csv(std::io::stdout(), 1)
        .expect("stdout");
    Ok(())
}
