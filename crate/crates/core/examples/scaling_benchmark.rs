//! Runtime experiment for the three methods at n = 3, followed by a power
//! law fit of cost against N.

use pipsolver::bench::{fit_csv, run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> pipsolver::error::Result<()> {
    let cfg =
        ExperimentConfig { kind: ExperimentKind::Runtime, dims: 2..=8, degrees: 3..=3, reps: 2, ..Default::default() };
    let mut csv = Vec::new();
    run_experiment(&cfg, &mut csv)?;
    let text = String::from_utf8(csv).expect("csv is utf-8");
    print!("{text}");
    for fit in fit_csv(&text)? {
        println!("{:<10} {:<13} q = {:.3} (r^2 = {:.4})", fit.method, fit.column, fit.fit.q, fit.fit.r_squared);
    }
    Ok(())
}
