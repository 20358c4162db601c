//! Assembles the approximate solution `v₀` and writes it as a binary field.

use bloch_wkb::field::mass;
use bloch_wkb::harness::{ray_prepass, Scenario};
use bloch_wkb::wkb::{assemble_v0, eulerianize};

fn main() -> bloch_wkb::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps = 1.0 / args.next().map_or(32.0, |a| a.parse().expect("1/eps"));
    let t: f64 = args.next().map_or(0.5, |a| a.parse().expect("t"));
    let s = Scenario::full();
    let band = s.band()?;
    let bundle = ray_prepass(&s, &band)?;
    let grid = s.grid(eps)?;
    let fields = eulerianize(&bundle, &s.profile(), t, &grid.points())?;
    let v0 = assemble_v0(&fields, &band, eps, &grid)?;
    println!("eps = {eps}, t = {t}, {} points, mass {:.12}", grid.n, mass(&v0));
    let path = std::env::temp_dir().join("v0.bwkb");
    v0.save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
