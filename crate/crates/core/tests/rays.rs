use std::f64::consts::FRAC_PI_2;

use bloch_wkb::bloch::{group_velocity, BlochBand, BlochProblem, InitialProfile};
use bloch_wkb::harness::{ray_prepass, Scenario};
use bloch_wkb::lattice::{Lattice, PeriodicPotential};
use bloch_wkb::rays::{
    amplitude_on_ray, blowup_experiment, trace_bundle, trace_ray, ConfinementPotential, RaySettings,
};
use bloch_wkb::Coupling;
use num_complex::Complex64;
use proptest::prelude::*;

fn free_band() -> BlochBand {
    BlochBand::new(BlochProblem::new(PeriodicPotential::zero(Lattice::unit()), 8, 2).unwrap(), 1).unwrap()
}

fn mathieu_band() -> BlochBand {
    let problem = BlochProblem::new(PeriodicPotential::mathieu(Lattice::unit(), 1.0), 12, 2).unwrap();
    BlochBand::new(problem, 1).unwrap()
}

fn linear() -> RaySettings {
    RaySettings::new(1, Coupling::real(0.0), 1.0, 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn energy_is_conserved(x0 in -2.0f64..2.0, k0 in -1.0f64..1.0, omega in 0.3f64..1.5) {
        let band = mathieu_band();
        let u = ConfinementPotential::harmonic(omega);
        let profile = InitialProfile::gaussian(1.0, 0.0, 1.0).with_phase(vec![0.0, k0]);
        let settings = RaySettings::new(1, Coupling::real(1.0), 5.0, 1e-3);
        let path = trace_ray(&band, &u, x0, &profile, &settings).unwrap();
        let h = |j: usize| band.state(path.k[j]).unwrap().energy + u.value(path.x[j]);
        let h0 = h(0);
        for j in (0..path.len()).step_by(50) {
            prop_assert!((h(j) - h0).abs() < 1e-8, "t = {}: drift {:e}", path.t[j], h(j) - h0);
        }
        prop_assert_eq!(path.jac[0], 1.0);
        prop_assert!(path.berry.iter().chain(&path.nlphase).all(|v| v.is_finite()));
    }
}

#[test]
fn jacobian_error_is_fourth_order() {
    let band = free_band();
    let u = ConfinementPotential::harmonic(1.0);
    let profile = InitialProfile::gaussian(1.0, 0.0, 1.0);
    let err = |dt: f64| {
        let settings = RaySettings::new(1, Coupling::real(0.0), 1.4, dt);
        let path = trace_ray(&band, &u, 1.0, &profile, &settings).unwrap();
        (0..path.len())
            .map(|j| (path.jac[j] - path.t[j].cos()).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(0.04) / err(0.02);
    assert!(ratio >= 8.0, "ratio {ratio}");
}

#[test]
fn harmonic_phase_solves_hamilton_jacobi() {
    let band = free_band();
    let u = ConfinementPotential::harmonic(1.0);
    let profile = InitialProfile::gaussian(1.0, 0.0, 1.0);
    let settings = RaySettings::new(1, Coupling::real(0.0), 1.2, 1e-3);
    for x0 in [-1.5, 0.5, 2.0] {
        let path = trace_ray(&band, &u, x0, &profile, &settings).unwrap();
        for j in (0..path.len()).step_by(100) {
            let (t, x) = (path.t[j], path.x[j]);
            assert!((path.k[j] + x0 * t.sin()).abs() < 1e-6);
            assert!((path.phi[j] + 0.5 * x * x * t.tan()).abs() < 1e-6);
        }
    }
}

#[test]
fn phase_gradient_is_momentum() {
    let band = mathieu_band();
    let u = ConfinementPotential::harmonic(1.0);
    let profile = InitialProfile::gaussian(1.0, 0.0, 1.0).with_phase(vec![0.0, 0.3, 0.1]);
    let settings = RaySettings::new(1, Coupling::real(1.0), 0.6, 1e-3);
    let h = 1e-3;
    for x0 in [-1.0, 0.0, 0.7] {
        let rays: Vec<_> = [x0 - h, x0, x0 + h]
            .iter()
            .map(|&x| trace_ray(&band, &u, x, &profile, &settings).unwrap())
            .collect();
        for j in (0..rays[1].len()).step_by(60) {
            let dphi = (rays[2].phi[j] - rays[0].phi[j]) / (2.0 * h);
            let expect = rays[1].k[j] * rays[1].jac[j];
            assert!((dphi - expect).abs() < 1e-5, "x0 {x0}, t {}: {dphi} vs {expect}", rays[1].t[j]);
        }
    }
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn stark_field_drives_bloch_oscillations() {
    let band = mathieu_band();
    let problem = band.problem().clone();
    let u = ConfinementPotential::stark(1.0);
    let profile = InitialProfile::gaussian(1.0, 0.0, 1.0);
    let settings = RaySettings::new(1, Coupling::real(0.0), 8.0, 1e-3);
    let path = trace_ray(&band, &u, 0.2, &profile, &settings).unwrap();
    assert!(!path.fold_times.is_empty());
    for j in (0..path.len()).step_by(1000) {
        let t = path.t[j];
        assert!((path.k[j] - t).abs() < 1e-10);
        let oracle = 0.2 + simpson(|s| group_velocity(&problem, 1, s).unwrap(), 0.0, t, 2000);
        assert!((path.x[j] - oracle).abs() < 1e-6, "t {t}: {} vs {oracle}", path.x[j]);
    }
}

#[test]
fn bundle_examples() {
    let band = free_band();
    let k0 = 0.8;
    let profile = InitialProfile::gaussian(1.0, 0.0, 1.0).with_phase(vec![0.0, k0]);
    let x0: Vec<f64> = (0..11).map(|j| -1.0 + 0.2 * j as f64).collect();
    let b = trace_bundle(&band, &ConfinementPotential::Zero, &x0, &profile, &linear()).unwrap();
    assert_eq!(b.caustic_time, f64::INFINITY);
    for p in &b.paths {
        let last = p.len() - 1;
        assert!((p.x[last] - p.x0 - k0).abs() < 1e-12);
        assert!(p.jac.iter().all(|&j| (j - 1.0).abs() < 1e-12));
    }
    assert!(b.is_monotone());

    let flat = InitialProfile::gaussian(1.0, 0.0, 1.0);
    let settings = RaySettings::new(1, Coupling::real(0.0), 2.0, 1e-3);
    let b = trace_bundle(&band, &ConfinementPotential::harmonic(1.0), &x0, &flat, &settings).unwrap();
    assert!((b.caustic_time - FRAC_PI_2).abs() < 2.0 * settings.dt);

    let at_zero = RaySettings::new(1, Coupling::real(0.0), 0.0, 1e-3);
    let b = trace_bundle(&band, &ConfinementPotential::Zero, &[0.0, 1.0], &flat, &at_zero).unwrap();
    assert_eq!(b.paths[0].x, vec![0.0]);
    assert_eq!(b.paths[1].x, vec![1.0]);
    assert!(b.is_monotone());

    assert!(trace_bundle(&band, &ConfinementPotential::Zero, &[1.0, 0.0], &flat, &at_zero).is_err());
}

#[test]
fn stationary_ray_at_band_minimum() {
    let band = free_band();
    let flat = InitialProfile::gaussian(1.0, 0.0, 1.0);
    let path = trace_ray(&band, &ConfinementPotential::Zero, 0.4, &flat, &linear()).unwrap();
    assert!(path.x.iter().all(|&x| x == 0.4));
    assert!(path.k.iter().all(|&k| k == 0.0));
    assert!(path.jac.iter().all(|&j| j == 1.0));
    assert!(path.phi.iter().all(|&p| p.abs() < 1e-15));
}

#[test]
fn full_scenario_fan_is_monotone_before_the_caustic() {
    let s = Scenario::full();
    let band = s.band().unwrap();
    let b = ray_prepass(&s, &band).unwrap();
    assert!(b.caustic_time > s.nls.t_end);
    assert!(b.is_monotone());
    for p in &b.paths {
        assert_eq!(p.jac[0], 1.0);
        assert!(p.jac.iter().all(|&j| j > 0.0));
        assert!(p.berry.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn amplitude_examples() {
    let band = free_band();
    let flat = InitialProfile::gaussian(0.9, 0.0, 1.0);
    let a_i = Complex64::new(flat.a(0.3), 0.0);
    let path = trace_ray(&band, &ConfinementPotential::Zero, 0.3, &flat, &linear()).unwrap();
    assert!(amplitude_on_ray(&path, a_i).iter().all(|z| (z - a_i).norm() < 1e-15));

    let settings = RaySettings::new(1, Coupling::real(1.0), 1.0, 1e-3);
    let path = trace_ray(&band, &ConfinementPotential::Zero, 0.3, &flat, &settings).unwrap();
    for (j, z) in amplitude_on_ray(&path, a_i).iter().enumerate() {
        let expect = a_i * Complex64::cis(-a_i.norm_sqr() * path.t[j]);
        assert!((z - expect).norm() < 1e-10);
        assert!((z.norm() - a_i.norm()).abs() < 1e-10);
    }
}

#[test]
fn blowup_examples() {
    let band = free_band();
    let zero = ConfinementPotential::Zero;
    let r = blowup_experiment(&band, &zero, 0.0, 1, &Coupling::complex(0.0, 1.0), 1.0, 1.5, 1e-3).unwrap();
    assert!((r.blowup_time - 1.0).abs() < 1e-3);
    for (t, m) in r.t.iter().zip(&r.modulus_sq).step_by(50) {
        assert!((m - 1.0 / (1.0 - t)).abs() < 1e-6 * m * m, "t {t}");
    }
    let r = blowup_experiment(&band, &zero, 0.0, 1, &Coupling::complex(0.0, 1.0), 2.0, 1.0, 1e-3).unwrap();
    assert!((r.blowup_time - 0.25).abs() < 1e-3);
    let r = blowup_experiment(&band, &zero, 0.0, 1, &Coupling::real(1.0), 1.0, 1.0, 1e-3).unwrap();
    assert_eq!(r.blowup_time, f64::INFINITY);
    assert!(r.modulus_sq.iter().all(|&m| (m - 1.0).abs() < 1e-14));
}
