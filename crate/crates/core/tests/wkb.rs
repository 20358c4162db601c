use std::f64::consts::{FRAC_PI_4, PI};

use bloch_wkb::bloch::{well_prepared_corrector, BlochBand, BlochProblem, GaugeTwist, InitialProfile};
use bloch_wkb::field::{mass, WaveField, WaveGrid};
use bloch_wkb::harness::{approximate_solution, ray_prepass, Scenario};
use bloch_wkb::lattice::{Lattice, PeriodicPotential};
use bloch_wkb::rays::{trace_bundle, ConfinementPotential, RayBundle, RaySettings};
use bloch_wkb::wkb::{assemble_v0, eulerianize, initial_data, launch_grid};
use bloch_wkb::Coupling;
use num_complex::Complex64;

fn free_band() -> BlochBand {
    BlochBand::new(BlochProblem::new(PeriodicPotential::zero(Lattice::unit()), 8, 2).unwrap(), 1).unwrap()
}

fn mathieu_band() -> BlochBand {
    let problem = BlochProblem::new(PeriodicPotential::mathieu(Lattice::unit(), 1.0), 12, 2).unwrap();
    BlochBand::new(problem, 1).unwrap()
}

fn bundle(band: &BlochBand, u: &ConfinementPotential, profile: &InitialProfile, lambda: f64, t_end: f64) -> RayBundle {
    let settings = RaySettings::new(1, Coupling::real(lambda), t_end, 5e-3);
    trace_bundle(band, u, &launch_grid(profile, 0.04), profile, &settings).unwrap()
}

fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

#[test]
fn identity_at_time_zero() {
    let band = mathieu_band();
    let u = ConfinementPotential::harmonic(1.0);
    let profile = InitialProfile::gaussian(0.8, 0.1, 0.6).with_phase(vec![0.0, 0.3, 0.1]);
    let b = bundle(&band, &u, &profile, 1.0, 0.1);
    let xs = grid_points(-2.0, 2.0, 401);
    let f = eulerianize(&b, &profile, 0.0, &xs).unwrap();
    for j in 0..xs.len() {
        assert!(f.covered[j]);
        assert!((f.phi[j] - profile.phi(xs[j])).abs() < 1e-12);
        assert!((f.grad_phi[j] - profile.phi_prime(xs[j])).abs() < 1e-12);
        assert!((f.amp[j].re - profile.a(xs[j])).abs() < 1e-12);
        assert!(f.omega[j].abs() < 1e-12);
    }
}

#[test]
fn free_translation() {
    let band = free_band();
    let k0 = 0.7;
    let profile = InitialProfile::gaussian(1.0, 0.0, 0.5).with_phase(vec![0.0, k0]);
    let t = 0.8;
    let b = bundle(&band, &ConfinementPotential::Zero, &profile, 0.0, t);
    let xs = grid_points(-1.5, 2.5, 301);
    let f = eulerianize(&b, &profile, t, &xs).unwrap();
    for j in 0..xs.len() {
        let x = xs[j];
        assert!((f.a0(j) - profile.a(x - k0 * t)).norm() < 1e-10);
        assert!((f.phi[j] - (k0 * x - 0.5 * k0 * k0 * t)).abs() < 1e-10);
    }
}

#[test]
fn harmonic_jacobian_at_quarter_period() {
    let band = free_band();
    let profile = InitialProfile::gaussian(1.0, 0.0, 0.5);
    let t = FRAC_PI_4;
    let b = bundle(&band, &ConfinementPotential::harmonic(1.0), &profile, 0.0, t);
    let xs = grid_points(-2.0, 2.0, 201);
    let f = eulerianize(&b, &profile, t, &xs).unwrap();
    for j in 0..xs.len() {
        assert!((f.jac[j] - t.cos()).abs() < 1e-6);
    }
}

#[test]
fn pullback_invariants() {
    let band = mathieu_band();
    let u = ConfinementPotential::harmonic(1.0);
    let profile = InitialProfile::gaussian(1.0, 0.0, 0.5).with_phase(vec![0.0, 0.2]);
    let t = 0.4;
    let b = bundle(&band, &u, &profile, 1.0, t);
    let xs = grid_points(-1.5, 1.5, 3001);
    let f = eulerianize(&b, &profile, t, &xs).unwrap();
    let dx = xs[1] - xs[0];
    for j in 1..xs.len() - 1 {
        let fd = (f.phi[j + 1] - f.phi[j - 1]) / (2.0 * dx);
        assert!((fd - f.grad_phi[j]).abs() < 1e-5, "x {}: {fd} vs {}", xs[j], f.grad_phi[j]);
    }
    for j in 0..xs.len() {
        let law = f.a0(j).norm() * f.jac[j].sqrt() - profile.a(f.x0[j]).abs();
        assert!(law.abs() < 1e-8);
    }
}

#[test]
fn modulus_ignores_the_sign_of_lambda() {
    let profile = InitialProfile::normalized_gaussian(0.0, 0.5);
    let band = mathieu_band();
    let u = ConfinementPotential::harmonic(1.0);
    let eps = 1.0 / 32.0;
    let grid = WaveGrid::resolving(-3.0, 3.0, eps, 1.0, 16).unwrap();
    let v = |lambda: f64| {
        let b = bundle(&band, &u, &profile, lambda, 0.4);
        let f = eulerianize(&b, &profile, 0.4, &grid.points()).unwrap();
        assemble_v0(&f, &band, eps, &grid).unwrap()
    };
    let (p, m) = (v(1.0), v(-1.0));
    for (a, b) in p.values.iter().zip(&m.values) {
        assert!((a.norm() - b.norm()).abs() < 1e-12);
    }
}

#[test]
fn synthesis_is_resolved() {
    let s = Scenario::full();
    let band = s.band().unwrap();
    let b = ray_prepass(&s, &band).unwrap();
    let eps = 1.0 / 32.0;
    let norm = |ppc: usize| {
        let grid = WaveGrid::resolving(-4.0, 4.0, eps, 1.0, ppc).unwrap();
        mass(&approximate_solution(&b, &band, &s.profile(), eps, &grid, 0.3).unwrap())
    };
    let (a, c) = (norm(16), norm(32));
    assert!((a - c).abs() < 1e-8, "{a} vs {c}");
}

#[test]
fn assembly_at_time_zero_is_the_definition() {
    let band = mathieu_band();
    let u = ConfinementPotential::harmonic(1.0);
    let profile = InitialProfile::gaussian(1.0, 0.0, 0.5).with_phase(vec![0.0, 0.4, 0.2]);
    let eps = 1.0 / 16.0;
    let grid = WaveGrid::resolving(-3.0, 3.0, eps, 1.0, 16).unwrap();
    let b = bundle(&band, &u, &profile, 1.0, 0.1);
    let f = eulerianize(&b, &profile, 0.0, &grid.points()).unwrap();
    let v0 = assemble_v0(&f, &band, eps, &grid).unwrap();
    let bare = initial_data(&profile, &band, eps, &grid, None).unwrap();
    for (j, x) in grid.points().into_iter().enumerate() {
        let chi = band.state_uncached(profile.phi_prime(x)).unwrap().eval(x / eps);
        let expect = profile.a(x) * chi * Complex64::cis(profile.phi(x) / eps);
        assert!((v0.values[j] - expect).norm() < 1e-10);
        assert!((bare.values[j] - expect).norm() < 1e-10);
    }
}

#[test]
fn free_band_modulus_is_amplitude() {
    let band = free_band();
    let u = ConfinementPotential::harmonic(1.0);
    let profile = InitialProfile::gaussian(1.0, 0.0, 0.5);
    let eps = 1.0 / 16.0;
    let grid = WaveGrid::resolving(-3.0, 3.0, eps, 1.0, 16).unwrap();
    let b = bundle(&band, &u, &profile, 1.0, 0.5);
    let f = eulerianize(&b, &profile, 0.5, &grid.points()).unwrap();
    let v0 = assemble_v0(&f, &band, eps, &grid).unwrap();
    for j in 0..grid.n {
        assert!((v0.values[j].norm() - f.a0(j).norm()).abs() < 1e-14);
    }
}

#[test]
fn norm_approaches_amplitude_norm() {
    // two-scale oracle: ‖v₀‖² = ∫ |a₀(x)|² |χ(x/ε, ∂φ)|² dx by fine quadrature,
    // and its ε → 0 limit ‖a_I‖² since |χ|² averages to 1 over a cell
    let band = mathieu_band();
    let profile = InitialProfile::normalized_gaussian(0.0, 0.5);
    let target = profile.mass().sqrt();
    for eps in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0] {
        let grid = WaveGrid::resolving(-4.0, 4.0, eps, 1.0, 16).unwrap();
        let v = initial_data(&profile, &band, eps, &grid, None).unwrap();
        let n = 200_000;
        let h = 8.0 / n as f64;
        let chi = band.state(0.0).unwrap();
        let oracle: f64 = (0..n)
            .map(|i| {
                let x = -4.0 + (i as f64 + 0.5) * h;
                profile.a(x).powi(2) * chi.eval(x / eps).norm_sqr()
            })
            .sum::<f64>()
            * h;
        assert!((mass(&v) - oracle.sqrt()).abs() < 1e-8);
        assert!((mass(&v) - target).abs() < eps, "eps {eps}: {} vs {target}", mass(&v));
    }
}

#[test]
fn initial_data_examples() {
    let free = free_band();
    let profile = InitialProfile::gaussian(1.0, 0.0, 0.5).with_phase(vec![0.0, 0.3]);
    let eps = 1.0 / 16.0;
    let grid = WaveGrid::resolving(-3.0, 3.0, eps, 1.0, 16).unwrap();
    let u = ConfinementPotential::harmonic(1.0);
    let phi1 = well_prepared_corrector(&free, &profile, &u, 1.0, 1, &grid.points()).unwrap();
    let with = initial_data(&profile, &free, eps, &grid, Some(&phi1)).unwrap();
    let bare = initial_data(&profile, &free, eps, &grid, None).unwrap();
    for (a, b) in with.values.iter().zip(&bare.values) {
        assert!((a - b).norm() < 1e-14);
    }

    let band = mathieu_band();
    let norm = |eps: f64| {
        let grid = WaveGrid::resolving(-3.0, 3.0, eps, 1.0, 16).unwrap();
        let phi1 = well_prepared_corrector(&band, &profile, &u, 1.0, 1, &grid.points()).unwrap();
        mass(&initial_data(&profile, &band, eps, &grid, Some(&phi1)).unwrap())
    };
    let (a, b, c) = (norm(1.0 / 16.0), norm(1.0 / 32.0), norm(1.0 / 64.0));
    assert!((a - b).abs() < 1.0 / 16.0 && (b - c).abs() < 1.0 / 32.0);
    assert!((b - c).abs() < 0.75 * (a - b).abs() + 1e-12, "{a} {b} {c}");

    let zero = InitialProfile::gaussian(0.0, 0.0, 0.5);
    let z = initial_data(&zero, &band, eps, &grid, None).unwrap();
    assert!(z.values.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn gauge_twist_is_invisible_end_to_end() {
    let s = Scenario::full();
    let plain = s.band().unwrap();
    let twisted = s
        .band()
        .unwrap()
        .with_twist(GaugeTwist::new(1.1, vec![0.4, -0.3], vec![0.25, 0.0, 0.6]));
    let eps = 1.0 / 32.0;
    let grid = WaveGrid::resolving(-4.0, 4.0, eps, 1.0, 16).unwrap();
    let v = |band: &BlochBand| -> WaveField {
        let b = ray_prepass(&s, band).unwrap();
        approximate_solution(&b, band, &s.profile(), eps, &grid, 0.45).unwrap()
    };
    let (a, b) = (v(&plain), v(&twisted));
    let r = grid.n / 2;
    let align = (a.values[r] / b.values[r]).arg();
    for (p, q) in a.values.iter().zip(&b.values) {
        assert!((p.norm() - q.norm()).abs() < 1e-8);
        if p.norm() > 1e-6 {
            let d = (p / (q * Complex64::cis(align))).arg();
            assert!(d.abs() < 1e-6, "phase {d:e}");
        }
    }
    assert!(align.abs() <= PI);
}
