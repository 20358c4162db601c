//! Full-scenario convergence ladder: split-step solution against `v₀`.

use bloch_wkb::harness::{convergence_sweep, Scenario};

fn main() -> bloch_wkb::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut scenario = Scenario::resolve(args.first().map(String::as_str).unwrap_or("full_scenario"))?;
    if let Some(c) = args.get(1) {
        scenario.sweep.corrector = c == "corrected";
    }
    let eps = scenario.sweep.epsilons.clone();
    let report = convergence_sweep(&scenario, &eps)?;
    report.write_csv(std::io::stdout()).expect("stdout");
    for (e, msg) in &report.failures {
        eprintln!("eps = {e}: {msg}");
    }
    println!("L2 order:   {:?}", report.fitted_order_l2);
    println!("Linf order: {:?}", report.fitted_order_linf);
    Ok(())
}
