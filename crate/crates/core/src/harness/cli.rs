//! The `bwkb` command line.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::sweep::{approximate_solution, initial_field, nls_config, ray_prepass, sweep_with_band};
use super::wigner::{compare_wigner, wigner_predicted, wigner_transform, WignerOptions};
use crate::bloch::{build_band_table, BlochProblem, DEFAULT_CUTOFF, DEFAULT_K_POINTS};
use crate::error::{Error, Result};
use crate::field::WaveGrid;
use crate::lattice::{scale_physical_params, Lattice, PeriodicPotential};
use crate::nls::solve_nls;
use crate::wkb::eulerianize;

#[derive(Parser, Debug)]
#[command(name = "bwkb", version, about = "Semiclassical WKB toolkit for weakly nonlinear Bloch waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rescale physical condensate parameters into ε, x_s, ξ, δ̄.
    Scale(ScaleArgs),
    /// Tabulate a band over the Brillouin zone.
    Bands(BandsArgs),
    /// Trace the ray fan of a scenario.
    Rays(ScenarioArgs),
    /// Assemble v₀ at one time.
    Wkb(FieldArgs),
    /// Run the split-step solver.
    Solve(SolveArgs),
    /// ε-convergence sweep of the solver against v₀.
    Compare(CompareArgs),
    /// Wigner transform of v₀ against the predicted measure.
    Wigner(WignerArgs),
}

#[derive(Args, Debug)]
struct ScaleArgs {
    #[arg(long)]
    a0: f64,
    #[arg(long)]
    a_bar: f64,
    #[arg(long)]
    n_atoms: f64,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BandsArgs {
    #[arg(long, default_value = "mathieu")]
    preset: String,
    /// Band index, 1-based.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    period: f64,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    #[arg(long, default_value_t = DEFAULT_K_POINTS)]
    k_points: usize,
    #[arg(long, default_value_t = 1)]
    sigma: u32,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Built-in scenario name, scenario TOML or run manifest.
    #[arg(long, default_value = "full_scenario")]
    config: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_parser = parse_number)]
    eps: f64,
    #[arg(long)]
    t: f64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_parser = parse_number)]
    eps: f64,
    /// Comma-separated snapshot times; defaults to the scenario's.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    snapshots: Vec<f64>,
    /// Start from the bare leading term instead of well-prepared data.
    #[arg(long)]
    bare: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Comma-separated ladder, fractions allowed; defaults to the scenario's.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    eps: Vec<f64>,
    /// Also run with bare initial data.
    #[arg(long)]
    both: bool,
}

#[derive(Args, Debug)]
struct WignerArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Window of x for the transform.
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 4.0)]
    x_max: f64,
    #[arg(long, default_value_t = 4)]
    x_stride: usize,
    #[arg(long, default_value_t = 0.1)]
    sigma_x: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma_xi: f64,
}

/// Parses `0.25` or `1/4`.
fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("bad number '{s}'"))?,
    };
    Ok(v)
}

/// What was run, for reproduction. A manifest is itself a valid `--config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub run: RunInfo,
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub argv: Vec<String>,
    pub outputs: Vec<String>,
    /// Nothing is random; recorded for completeness.
    pub seed: u64,
    pub threads: usize,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = Scenario::named(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.contains("[run]") {
        let m = Manifest::load(path)?;
        return m.scenario.ok_or_else(|| Error::Config {
            path: path.to_path_buf(),
            message: "manifest has no scenario".into(),
        });
    }
    Scenario::load(path)
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn field(&mut self, name: &str, field: &crate::field::WaveField) -> Result<()> {
        field.save(self.dir.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn manifest(mut self, argv: &[String], scenario: Option<&Scenario>) -> Result<()> {
        self.written.push("manifest.toml".into());
        let m = Manifest {
            run: RunInfo {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                argv: argv.to_vec(),
                outputs: self.written.clone(),
                seed: 0,
                threads: rayon::current_num_threads(),
            },
            scenario: scenario.cloned(),
        };
        let text = toml::to_string(&m).map_err(|e| Error::Format(e.to_string()))?;
        let path = self.dir.join("manifest.toml");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

/// Runs `bwkb` with `argv` (program name first) and returns the exit code.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command, argv: &[String]) -> Result<()> {
    match command {
        Command::Scale(a) => {
            let r = scale_physical_params(a.a0, a.a_bar, a.n_atoms, a.omega0)?;
            println!("epsilon = {:.6e}", r.epsilon);
            println!("x_s = {:.6e}", r.x_s);
            println!("xi = {:.6e}", r.xi);
            println!("delta_bar = {:.6e}", r.delta_bar);
            let mut out = Outputs::new(&a.out)?;
            out.write("scale.csv", |w| {
                writeln!(w, "epsilon,x_s,xi,delta_bar")?;
                writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e}", r.epsilon, r.x_s, r.xi, r.delta_bar)
            })?;
            out.manifest(argv, None)
        }
        Command::Bands(a) => {
            let potential = PeriodicPotential::preset(Lattice::new(a.period)?, &a.preset)?;
            let problem = BlochProblem::new(potential, a.cutoff, a.n + 1)?;
            let table = build_band_table(&problem, a.n, a.k_points)?;
            println!("band {}: min gap {:.6e}", a.n, table.min_gap());
            let mut out = Outputs::new(&a.out)?;
            out.write("bands.csv", |w| table.write_csv(w, a.sigma))?;
            out.manifest(argv, None)
        }
        Command::Rays(a) => {
            let s = load_scenario(&a.config)?;
            let band = s.band()?;
            let bundle = ray_prepass(&s, &band)?;
            println!("{} rays, first caustic at t = {}", bundle.paths.len(), bundle.caustic_time);
            let mut out = Outputs::new(&a.out)?;
            out.write("rays.csv", |w| {
                writeln!(w, "ray,x0,t,x,k,jac,dk,phi,berry,nlphase")?;
                for (r, p) in bundle.paths.iter().enumerate() {
                    for j in 0..p.len() {
                        writeln!(
                            w,
                            "{r},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                            p.x0, p.t[j], p.x[j], p.k[j], p.jac[j], p.dk[j], p.phi[j], p.berry[j], p.nlphase[j]
                        )?;
                    }
                }
                Ok(())
            })?;
            out.manifest(argv, Some(&s))
        }
        Command::Wkb(a) => {
            let s = load_scenario(&a.scenario.config)?;
            let band = s.band()?;
            let bundle = ray_prepass(&s, &band)?;
            let grid = s.grid(a.eps)?;
            let fields = eulerianize(&bundle, &s.profile(), a.t, &grid.points())?;
            let v0 = crate::wkb::assemble_v0(&fields, &band, a.eps, &grid)?;
            println!("|v0|_L2 = {:.12e}", crate::field::mass(&v0));
            let mut out = Outputs::new(&a.scenario.out)?;
            out.field("v0.bwkb", &v0)?;
            out.write("fields.csv", |w| fields.write_csv(w))?;
            out.manifest(argv, Some(&s))
        }
        Command::Solve(a) => {
            let mut s = load_scenario(&a.scenario.config)?;
            let band = s.band()?;
            let mut config = nls_config(&s, a.eps)?;
            if !a.snapshots.is_empty() {
                s.nls.t_end = a.snapshots.iter().copied().fold(0.0, f64::max);
                config.t_end = s.nls.t_end;
                config.snapshot_times = a.snapshots.clone();
            }
            let psi0 = initial_field(&s, &band, a.eps, !a.bare)?;
            let snaps = solve_nls(&config, &psi0)?;
            let mut out = Outputs::new(&a.scenario.out)?;
            out.field("psi_0.bwkb", &psi0)?;
            for (j, f) in snaps.iter().enumerate() {
                println!("t = {:.6}: mass {:.15e}", f.t, crate::field::mass(f));
                out.field(&format!("psi_{}.bwkb", j + 1), f)?;
            }
            out.manifest(argv, Some(&s))
        }
        Command::Compare(a) => {
            let s = load_scenario(&a.scenario.config)?;
            let eps = if a.eps.is_empty() { s.sweep.epsilons.clone() } else { a.eps.clone() };
            let band = s.band()?;
            let mut runs = vec![s.sweep.corrector];
            if a.both {
                runs = vec![true, false];
            }
            let mut out = Outputs::new(&a.scenario.out)?;
            for corrected in runs {
                let report = sweep_with_band(&s, &band, &eps, corrected)?;
                let tag = if corrected { "corrected" } else { "bare" };
                let fmt = |o: Option<f64>| o.map_or("n/a (floor)".to_string(), |v| format!("{v:.4}"));
                println!(
                    "{tag}: L2 order {}, Linf order {}",
                    fmt(report.fitted_order_l2),
                    fmt(report.fitted_order_linf)
                );
                for (e, msg) in &report.failures {
                    eprintln!("{tag}: eps = {e}: {msg}");
                }
                out.write(&format!("convergence_{tag}.csv"), |w| report.write_csv(w))?;
            }
            out.manifest(argv, Some(&s))
        }
        Command::Wigner(a) => {
            let s = load_scenario(&a.field.scenario.config)?;
            let band = s.band()?;
            let bundle = ray_prepass(&s, &band)?;
            let grid = WaveGrid::resolving(a.x_min, a.x_max, a.field.eps, s.lattice.period, s.nls.points_per_cell)?;
            let fields = eulerianize(&bundle, &s.profile(), a.field.t, &grid.points())?;
            let v0 = approximate_solution(&bundle, &band, &s.profile(), a.field.eps, &grid, a.field.t)?;
            let w = wigner_transform(
                &v0,
                WignerOptions {
                    x_stride: a.x_stride,
                    half_width: None,
                },
            );
            let mu = wigner_predicted(&fields, &band, &w)?;
            let c = compare_wigner(&w, &mu, &v0, a.sigma_x, a.sigma_xi)?;
            println!("L1 discrepancy {:.4e}, marginal defect {:.4e}", c.l1, c.marginal_defect);
            let mut out = Outputs::new(&a.field.scenario.out)?;
            out.write("wigner.csv", |f| w.write_csv(f))?;
            out.write("wigner_predicted.csv", |f| mu.write_csv(f))?;
            out.manifest(argv, Some(&s))
        }
    }
}
