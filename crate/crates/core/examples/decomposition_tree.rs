//! Shows the decomposition tree and the hyperplane attached to every split.

use pipsolver::decomposition::{assign_hyperplanes, build_tree, debug_dump, Lambda};
use pipsolver::frame::Frame;

fn main() -> pipsolver::error::Result<()> {
    let (m, n) = (3, 3);
    let tree = build_tree(m, n)?;
    let map = assign_hyperplanes(&tree, &Frame::standard(m), &Lambda::from_ratio(2, 1)?)?;
    println!("{} vertices, {} leaves, {} levels", tree.len(), tree.leaves().len(), tree.depth());
    print!("{}", debug_dump(&tree, &map));
    Ok(())
}
