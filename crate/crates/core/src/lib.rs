//! Multivariate polynomial interpolation by recursive hyperplane decomposition.
//!
//! Given a dimension `m`, a degree bound `n` and a function `f: R^m -> R`, the
//! crate constructs `N(m, n) = C(m + n, m)` interpolation nodes that are generic
//! by construction (their multivariate Vandermonde matrix is regular) and
//! computes the unique polynomial of degree at most `n` matching `f` on them.
//!
//! The problem `(m, n)` is split along a hyperplane into a lower-dimensional
//! problem `(m - 1, n)` living on the hyperplane and a lower-degree problem
//! `(m, n - 1)` living off it. Repeating the split produces a binary tree whose
//! leaves are univariate problems (solved on Chebyshev nodes along a line) or
//! degree-one problems (solved on affinely independent nodes). The solutions
//! are composed back as `Q = Q1 + Q_H * Q2`, where `Q_H` is the degree-one
//! polynomial vanishing on the split hyperplane. The whole solve runs in
//! `O(N^2)` arithmetic and `O(m N)` storage and never forms the `N x N`
//! Vandermonde matrix.
//!
//! Dense Vandermonde baselines (pivoted LU solve, explicit inversion) and a
//! determinant-based genericity oracle live in [`vandermonde`]; the
//! experiment harness that compares them lives in [`bench`].
//!
//! ```
//! use pipsolver::{pipsolver::{solve, SolverConfig}, monomials::count_total};
//!
//! let f = |x: &[f64]| 1.0 + x[0] * x[1] - 2.0 * x[2] * x[2];
//! let solution = solve(&f, 3, 2, &SolverConfig::default()).unwrap();
//! assert_eq!(solution.nodes().len(), count_total(3, 2).unwrap());
//! for (p, _) in solution.nodes().iter() {
//!     assert!((solution.poly.evaluate(p).unwrap() - f(p)).abs() < 1e-10);
//! }
//! ```

pub mod bench;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod frame;
pub mod instrument;
pub mod linearpip;
pub mod monomials;
pub mod nodegen;
pub mod onedim;
pub mod pipsolver;
pub mod polynomial;
pub mod vandermonde;

pub use error::{Error, Result};
