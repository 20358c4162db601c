use std::f64::consts::PI;

use bloch_wkb::bloch::{
    build_band_table, group_velocity, kappa_integral, solve_bloch_at_k, BlochBand, BlochProblem, GaugeTwist,
};
use bloch_wkb::lattice::{Lattice, PeriodicPotential};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn cosine() -> PeriodicPotential {
    let half = Complex64::new(0.5, 0.0);
    PeriodicPotential::from_fourier(Lattice::unit(), &[(1, half), (-1, half)]).unwrap()
}

/// Independent dense eigensolve of the plane-wave matrix at cutoff `m`.
fn dense_energies(v: &PeriodicPotential, k: f64, m: i64) -> Vec<f64> {
    let g = v.lattice().dual_period();
    let dim = (2 * m + 1) as usize;
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let (mi, mj) = (i as i64 - m, j as i64 - m);
        let mut e = v.coefficient(mi - mj);
        if i == j {
            e += 0.5 * (k + mi as f64 * g).powi(2);
        }
        e
    });
    let mut e: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Mathieu-like potentials with a guaranteed first gap.
fn gapped_potential() -> impl Strategy<Value = PeriodicPotential> {
    (0.5f64..2.0, 0.0f64..2.0 * PI, -0.4f64..0.4, -0.4f64..0.4, 0.5f64..2.0).prop_map(|(v1, th, re2, im2, period)| {
        let c1 = Complex64::from_polar(v1, th);
        let c2 = Complex64::new(re2, im2);
        PeriodicPotential::from_fourier(
            Lattice::new(period).unwrap(),
            &[(1, c1), (-1, c1.conj()), (2, c2), (-2, c2.conj())],
        )
        .unwrap()
    })
}

fn twist() -> impl Strategy<Value = GaugeTwist> {
    (
        -PI..PI,
        prop::collection::vec(-0.8f64..0.8, 0..4),
        prop::collection::vec(-0.8f64..0.8, 0..4),
    )
        .prop_map(|(o, c, s)| GaugeTwist::new(o, c, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn hellmann_feynman(v in gapped_potential(), s in -0.5f64..0.5, n in 1usize..3) {
        let problem = BlochProblem::new(v, 16, 3).unwrap();
        let k = s * problem.potential().lattice().dual_period();
        let e = |q: f64| problem.spectrum(q).unwrap().energies[n - 1];
        let h = 1e-3;
        let fd = (e(k - 2.0 * h) - 8.0 * e(k - h) + 8.0 * e(k + h) - e(k + 2.0 * h)) / (12.0 * h);
        let vel = group_velocity(&problem, n, k).unwrap();
        prop_assert!((vel - fd).abs() / (1.0 + vel.abs()) < 1e-5, "v {vel} fd {fd}");
    }

    #[test]
    fn eigenvectors_are_normalized(v in gapped_potential(), s in -0.5f64..0.5) {
        let problem = BlochProblem::new(v, 12, 4).unwrap();
        let k = s * problem.potential().lattice().dual_period();
        for pair in solve_bloch_at_k(&problem, k).unwrap() {
            let norm: f64 = pair.coeffs.iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
        let band = BlochBand::new(problem, 1).unwrap();
        let state = band.state(k).unwrap();
        let norm: f64 = state.coeffs().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!((band.kappa(&state, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn twist_leaves_observables_alone(v in gapped_potential(), tw in twist(), s in -1.5f64..1.5, sigma in 1u32..4) {
        let problem = BlochProblem::new(v, 12, 3).unwrap();
        let k = s * problem.potential().lattice().dual_period();
        let plain = BlochBand::new(problem.clone(), 1).unwrap();
        let twisted = BlochBand::new(problem, 1).unwrap().with_twist(tw);
        let (a, b) = (plain.state_uncached(k).unwrap(), twisted.state_uncached(k).unwrap());
        prop_assert!((a.energy - b.energy).abs() < 1e-10);
        prop_assert!((a.velocity - b.velocity).abs() < 1e-10);
        prop_assert!((a.curvature - b.curvature).abs() < 1e-10);
        prop_assert!((a.gap - b.gap).abs() < 1e-10);
        prop_assert!((plain.kappa(&a, sigma) - twisted.kappa(&b, sigma)).abs() < 1e-10);
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((p.norm() - q.norm()).abs() < 1e-10);
        }
        // only the connection moves, by θ'(k)
        let shift = twisted.twist_derivative(k);
        prop_assert!((b.connection - a.connection - shift).abs() < 1e-10);
    }

    #[test]
    fn kappa_obeys_power_mean(v in gapped_potential(), s in -0.5f64..0.5, n in 1usize..4, sigma in 1u32..4) {
        let problem = BlochProblem::new(v, 12, 4).unwrap();
        let k = s * problem.potential().lattice().dual_period();
        // Jensen on the cell: κ ≥ period^{-σ}, which is 1 on the unit cell
        let a = problem.potential().lattice().period();
        prop_assert!(kappa_integral(&problem, n, k, sigma).unwrap() * a.powi(sigma as i32) >= 1.0 - 1e-12);
    }

    #[test]
    fn galerkin_energies_decrease_with_cutoff(v in gapped_potential(), s in -0.5f64..0.5) {
        let k = s * v.lattice().dual_period();
        let mut last = f64::INFINITY;
        for m in 4..20 {
            let e = BlochProblem::new(v.clone(), m, 1).unwrap().spectrum(k).unwrap().energies[0];
            prop_assert!(e <= last + 1e-12, "M = {m}: {e} > {last}");
            last = e;
        }
    }
}

#[test]
fn lowest_energy_matches_doubled_cutoff() {
    let v = cosine();
    let problem = BlochProblem::new(v.clone(), 32, 2).unwrap();
    let e = problem.spectrum(0.0).unwrap().energies[0];
    let oracle = dense_energies(&v, 0.0, 64)[0];
    assert!((e - oracle).abs() < 1e-10, "{e} vs {oracle}");
}

#[test]
fn free_and_shifted_spectra() {
    let free = BlochProblem::new(PeriodicPotential::zero(Lattice::unit()), 8, 3).unwrap();
    assert!((free.spectrum(1.0).unwrap().energies[0] - 0.5).abs() < 1e-14);
    let shifted = BlochProblem::new(PeriodicPotential::constant(Lattice::unit(), 0.7), 8, 3).unwrap();
    let (a, b) = (free.spectrum(1.0).unwrap(), shifted.spectrum(1.0).unwrap());
    for (x, y) in a.energies.iter().zip(&b.energies) {
        assert!((y - x - 0.7).abs() < 1e-12);
    }
    for j in 0..3 {
        for (p, q) in a.vector(j).iter().zip(b.vector(j)) {
            assert!((p.norm() - q.norm()).abs() < 1e-12);
        }
    }
}

#[test]
fn cosine_table_invariants() {
    let v = cosine();
    let problem = BlochProblem::new(v.clone(), 32, 2).unwrap();
    let table = build_band_table(&problem, 1, 129).unwrap();
    let ks = table.k_grid();
    let es = table.energies();
    let n = ks.len();
    for j in 0..n {
        assert!((es[j] - es[n - 1 - j]).abs() < 1e-8);
    }
    let oracle = ks
        .iter()
        .map(|&k| {
            let e = dense_energies(&v, k, 64);
            e[1] - e[0]
        })
        .fold(f64::INFINITY, f64::min);
    assert!(table.min_gap() > 0.0);
    assert!((table.min_gap() - oracle).abs() < 1e-8, "{} vs {oracle}", table.min_gap());
    let re = table.states().iter().map(|s| s.connection_re.abs()).fold(0.0, f64::max);
    assert!(re < 1e-6);
}

#[test]
fn velocity_examples() {
    let free = BlochProblem::new(PeriodicPotential::zero(Lattice::unit()), 8, 2).unwrap();
    assert!((group_velocity(&free, 1, 0.7).unwrap() - 0.7).abs() < 1e-14);

    let problem = BlochProblem::new(cosine(), 32, 2).unwrap();
    assert!(group_velocity(&problem, 1, 0.0).unwrap().abs() < 1e-14);
    let h = 1e-4;
    let e = |k: f64| problem.spectrum(k).unwrap().energies[0];
    let fd = (e(0.5 + h) - e(0.5 - h)) / (2.0 * h);
    let v = group_velocity(&problem, 1, 0.5).unwrap();
    assert!(((v - fd) / v).abs() < 1e-6, "{v} vs {fd}");
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[test]
fn kappa_matches_quadrature() {
    let problem = BlochProblem::new(cosine(), 32, 2).unwrap();
    let s = problem.spectrum(0.0).unwrap();
    let c = s.vector(0);
    let m = problem.cutoff() as i64;
    let chi = |y: f64| -> f64 {
        c.iter()
            .enumerate()
            .map(|(i, ci)| ci * Complex64::cis(2.0 * PI * (i as i64 - m) as f64 * y))
            .sum::<Complex64>()
            .norm_sqr()
    };
    let oracle = simpson(&|y| chi(y).powi(2), -0.5, 0.5, 1e-13);
    let kappa = kappa_integral(&problem, 1, 0.0, 1).unwrap();
    assert!((kappa - oracle).abs() < 1e-8, "{kappa} vs {oracle}");
    assert!((kappa_integral(&problem, 1, 0.0, 0).unwrap() - 1.0).abs() < 1e-12);

    let free = BlochProblem::new(PeriodicPotential::zero(Lattice::unit()), 8, 2).unwrap();
    for sigma in 1..4 {
        assert!((kappa_integral(&free, 1, 0.4, sigma).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn touching_bands_are_rejected() {
    let free = BlochProblem::new(PeriodicPotential::zero(Lattice::unit()), 8, 3).unwrap();
    assert!(build_band_table(&free, 2, 33).is_err());
}
