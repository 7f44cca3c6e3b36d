//! Builds a generic node set, checks it against the determinant oracle, and
//! writes it in the node file format.

use pipsolver::decomposition::Lambda;
use pipsolver::nodegen::{assemble_generic, write_node_file, AssemblyConfig};
use pipsolver::vandermonde::genericity_check;

fn main() -> pipsolver::error::Result<()> {
    let cfg = AssemblyConfig { lambda: Lambda::from_ratio(2, 1)?, ..Default::default() };
    let asm = assemble_generic(2, 3, &cfg)?;
    write_node_file(std::io::stdout().lock(), &asm.nodes, 3)?;

    let report = genericity_check(&asm.nodes, 2, 3)?;
    eprintln!(
        "generic: {}, ln|det V| = {:.3}, min pivot = {:.3e}",
        report.generic, report.abs_det_log, report.min_pivot
    );
    eprintln!("closest pair of nodes: {:.3}", asm.nodes.min_pairwise_distance());
    Ok(())
}
