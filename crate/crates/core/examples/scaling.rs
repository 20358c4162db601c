//! Dimensionless parameters of a trapped condensate in an optical lattice.
//!
//! `cargo run --example scaling -- <a0> <a_bar> <n_atoms>` with lengths in
//! meters; defaults to a sodium-like condensate.

use bloch_wkb::lattice::scale_physical_params;

fn main() -> bloch_wkb::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let get = |i: usize, d: f64| args.get(i).copied().unwrap_or(d);
    let (a0, a_bar, n) = (get(0, 3.4e-6), get(1, 5.4e-9), get(2, 1.5e5));
    let r = scale_physical_params(a0, a_bar, n, 1.0)?;
    println!("a0 = {a0:e} m, scattering length {a_bar:e} m, N = {n:e}");
    println!("epsilon   = {:.4e}", r.epsilon);
    println!("x_s       = {:.4e} m", r.x_s);
    println!("xi        = {:.4e}", r.xi);
    println!("delta_bar = {:.4e}", r.delta_bar);
    Ok(())
}
