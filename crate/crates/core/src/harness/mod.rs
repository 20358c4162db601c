//! Experiments on top of the solver stack: error norms, `ε`-convergence
//! sweeps, Wigner transforms, configuration and the command line.

mod cli;
mod norms;
mod scenario;
mod sweep;
mod wigner;

pub use cli::{run_cli, Manifest, RunInfo};
pub use norms::{error_norms, ErrorRecord};
pub use scenario::{
    ConfinementSection, InitialSection, LatticeSection, NlsSection, PotentialSection, Scenario, SweepSection,
};
pub use sweep::{
    approximate_solution, check_ladder, convergence_sweep, fit_slope, initial_field, nls_config, ray_prepass,
    run_epsilon, sweep_with_band, ConvergenceReport, FLOOR,
};
pub use wigner::{
    compare_wigner, marginal_defect, wigner_predicted, wigner_transform, WignerComparison, WignerGrid, WignerOptions,
    WindowParams,
};
