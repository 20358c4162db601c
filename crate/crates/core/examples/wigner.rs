//! Wigner transform of `v₀` against the semiclassical measure.

use bloch_wkb::field::WaveGrid;
use bloch_wkb::harness::{
    approximate_solution, compare_wigner, ray_prepass, wigner_predicted, wigner_transform, Scenario, WignerOptions,
};
use bloch_wkb::wkb::eulerianize;

fn main() -> bloch_wkb::Result<()> {
    let s = Scenario::full();
    let band = s.band()?;
    let bundle = ray_prepass(&s, &band)?;
    let t = 0.4;
    for inv in [8.0, 16.0, 32.0] {
        let eps = 1.0 / inv;
        let grid = WaveGrid::resolving(-4.0, 4.0, eps, 1.0, 16)?;
        let fields = eulerianize(&bundle, &s.profile(), t, &grid.points())?;
        let v0 = approximate_solution(&bundle, &band, &s.profile(), eps, &grid, t)?;
        let w = wigner_transform(&v0, WignerOptions { x_stride: 4, half_width: None });
        let mu = wigner_predicted(&fields, &band, &w)?;
        let c = compare_wigner(&w, &mu, &v0, 0.1, 0.5)?;
        println!(
            "eps = 1/{inv}: relative L1 {:.4e}, marginal defect {:.1e}, mass {:.6} vs {:.6}",
            c.l1, c.marginal_defect, c.numerical_mass, c.predicted_mass
        );
    }
    Ok(())
}
