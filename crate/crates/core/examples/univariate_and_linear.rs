//! The two leaf solvers on their own: a line in the plane and a full
//! degree-one problem in five variables.

use std::f64::consts::FRAC_1_SQRT_2;

use pipsolver::linearpip::{solve_linear, FlatSpec};
use pipsolver::onedim::{solve_on_line, LineSpec};

fn main() -> pipsolver::error::Result<()> {
    let line = LineSpec::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], vec![0.5, -0.5], 1.0)?;
    let (nodes, q) = solve_on_line(|x| (x[0] - x[1]).cos() + x[0], 5, &line)?;
    // x1 - x2 = 1 along this line, so f = cos(1) + 1/2 + (x1 + x2) / 2 there.
    println!("line: {} Chebyshev nodes, effective degree {:?}", nodes.len(), q.effective_degree_tol(1e-12));
    println!("line: c_0 = {:.15}, c_x1 = {:.15}, c_x2 = {:.15}", q.coeffs()[0], q.coeffs()[1], q.coeffs()[2]);

    let f = |x: &[f64]| 2.0 + x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum::<f64>();
    let (nodes, q) = solve_linear(f, &FlatSpec::full(5))?;
    println!("flat: {} nodes, coefficients {:?}", nodes.len(), q.coeffs());
    Ok(())
}
