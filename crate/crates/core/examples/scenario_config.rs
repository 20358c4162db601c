//! Reads a scenario from TOML (or a built-in name) and prints it back with
//! the derived grid and time step.

use bloch_wkb::harness::Scenario;

fn main() -> bloch_wkb::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "full_scenario".into());
    let s = Scenario::resolve(&name)?;
    print!("{}", s.to_toml());
    for &eps in &s.sweep.epsilons {
        let g = s.grid(eps)?;
        println!("# eps = {eps}: {} points, dx = {:.3e}, dt = {:.3e}", g.n, g.dx(), s.dt(eps));
    }
    println!("# snapshots {:?}", s.snapshot_times());
    Ok(())
}
