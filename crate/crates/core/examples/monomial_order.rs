//! Prints the graded monomial order and the block sizes for a small space.

use pipsolver::monomials::{build_order, count_degree, count_total};

fn main() -> pipsolver::error::Result<()> {
    let (m, n) = (3, 3);
    let order = build_order(m, n)?;
    println!("N({m}, {n}) = {}", count_total(m, n)?);
    for k in 0..=n {
        let names: Vec<String> = order.block(k).map(|pos| format!("{:?}", order.exponents_at(pos))).collect();
        println!("degree {k} ({} terms): {}", count_degree(m, k)?, names.join(" "));
    }
    Ok(())
}
