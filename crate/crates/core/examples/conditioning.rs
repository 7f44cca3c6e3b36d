//! Condition numbers of the Vandermonde matrices on the constructed nodes,
//! next to the N^2 reference bound.

use pipsolver::bench::conditioning_row;
use pipsolver::nodegen::AssemblyConfig;

fn main() -> pipsolver::error::Result<()> {
    let cfg = AssemblyConfig { rescale: true, ..Default::default() };
    println!("{:>3} {:>3} {:>6} {:>12} {:>12}  within", "m", "n", "N", "cond_1", "N^2");
    for (m, n) in [(1, 8), (2, 2), (2, 5), (3, 3), (4, 3), (6, 2)] {
        let row = conditioning_row(m, n, &cfg)?;
        println!("{m:>3} {n:>3} {:>6} {:>12.3e} {:>12.3e}  {}", row.big_n, row.cond_1, row.bound(), row.within_bound());
    }
    Ok(())
}
