//! Interpolates a smooth function with the recursive solver and compares
//! the result with a dense LU solve on the same nodes.

use pipsolver::pipsolver::{solve, SolverConfig};
use pipsolver::vandermonde::{build_vandermonde, lu_solve};

fn main() -> pipsolver::error::Result<()> {
    let (m, n) = (3, 6);
    let f = |x: &[f64]| 1.0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>());
    let sol = solve(f, m, n, &SolverConfig::default())?;
    let r = &sol.report;
    println!(
        "N = {}, {} multiply-adds, peak storage {} reals, {:.2e} s",
        r.node_count, r.multiply_adds, r.peak_reals_stored, r.seconds
    );

    let residual = sol.nodes().iter().map(|(p, _)| (sol.poly.evaluate(p).unwrap() - f(p)).abs()).fold(0.0, f64::max);
    println!("max residual on the nodes: {residual:.2e}");

    let values: Vec<f64> = sol.nodes().iter().map(|(p, _)| f(p)).collect();
    let dense = lu_solve(&build_vandermonde(sol.nodes(), m, n)?, &values)?;
    let gap = sol.poly.coeffs().iter().zip(&dense.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max coefficient gap to dense LU: {gap:.2e}");
    Ok(())
}
