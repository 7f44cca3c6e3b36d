//! Degree-`n` interpolation along an affine line in `R^m`.
//!
//! Nodes are Chebyshev points on the line, the univariate problem in the
//! line parameter `t = <x - b, xi>` is solved by Newton divided differences,
//! and the result is expanded back into `m` variables.

use std::sync::Arc;

use crate::decomposition::BitString;
use crate::error::{Error, Result};
use crate::instrument;
use crate::monomials::{build_order, MonomialOrder};
use crate::nodegen::NodeSet;
use crate::polynomial::{dot, embed_univariate_in, MultiPoly, UNIT_TOLERANCE};

/// Relative gap (of the node span) below which two nodes count as equal.
pub const DUPLICATE_TOLERANCE: f64 = 1e-14;

/// The line `{ t * xi + b }` together with the Chebyshev spread `kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSpec {
    direction: Vec<f64>,
    base: Vec<f64>,
    kappa: f64,
}

impl LineSpec {
    pub fn new(direction: Vec<f64>, base: Vec<f64>, kappa: f64) -> Result<Self> {
        if direction.len() != base.len() {
            return Err(Error::DimensionMismatch { expected: direction.len(), got: base.len() });
        }
        let norm = dot(&direction, &direction).sqrt();
        if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
            return Err(Error::NonUnitDirection { norm });
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
        }
        Ok(LineSpec { direction, base, kappa })
    }

    /// The `x_1` axis through the origin with `kappa = 1`.
    pub fn axis(m: usize) -> Self {
        let mut direction = vec![0.0; m];
        direction[0] = 1.0;
        LineSpec { direction, base: vec![0.0; m], kappa: 1.0 }
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// The point `t * xi + b`.
    pub fn point(&self, t: f64) -> Vec<f64> {
        self.direction.iter().zip(&self.base).map(|(d, b)| t * d + b).collect()
    }
}

/// Line parameters `kappa cos((2k - 1) pi / (2 count))`, `k = 1..=count`.
pub fn chebyshev_parameters(count: usize, kappa: f64) -> Vec<f64> {
    (1..=count)
        .map(|k| {
            let theta = (2 * k - 1) as f64 * std::f64::consts::PI / (2 * count) as f64;
            // cos(pi / 2) is not exactly zero in floating point; the middle
            // node of an odd count is placed on the base point itself.
            if 2 * k - 1 == count {
                0.0
            } else {
                kappa * theta.cos()
            }
        })
        .collect()
}

/// `count` Chebyshev nodes on `line`, all labelled with `label`.
pub fn chebyshev_nodes_labelled(count: usize, line: &LineSpec, label: &BitString) -> NodeSet {
    let mut set = NodeSet::with_capacity(line.dim(), count);
    for t in chebyshev_parameters(count, line.kappa) {
        set.push(&line.point(t), label);
    }
    set
}

pub fn chebyshev_nodes(count: usize, line: &LineSpec) -> NodeSet {
    chebyshev_nodes_labelled(count, line, &BitString::empty())
}

/// Coefficients `(c_0, ..., c_k)` of the unique polynomial of degree at most
/// `k` through `(nodes[j], values[j])`. Runs in `O(k^2)`.
pub fn solve_univariate(nodes: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let count = nodes.len();
    if values.len() != count {
        return Err(Error::DimensionMismatch { expected: count, got: values.len() });
    }
    if count == 0 {
        return Err(Error::Degenerate("no interpolation nodes".into()));
    }
    let lo = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;

    // Leja ordering keeps the divided-difference table well scaled.
    let mut order: Vec<usize> = (0..count).collect();
    if let Some(first) = (0..count).max_by(|&a, &b| nodes[a].abs().total_cmp(&nodes[b].abs())) {
        order.swap(0, first);
    }
    let mut prod: Vec<f64> = vec![1.0; count];
    for i in 1..count {
        let last = nodes[order[i - 1]];
        for &j in &order[i..] {
            prod[j] *= (nodes[j] - last).abs();
        }
        let best = (i..count).max_by(|&a, &b| prod[order[a]].total_cmp(&prod[order[b]])).unwrap();
        order.swap(i, best);
    }
    for i in 0..count {
        for j in i + 1..count {
            let gap = (nodes[order[i]] - nodes[order[j]]).abs();
            if !(gap > DUPLICATE_TOLERANCE * span) || span == 0.0 {
                return Err(Error::Degenerate(format!(
                    "interpolation nodes {} and {} coincide",
                    nodes[order[i]], nodes[order[j]]
                )));
            }
        }
    }
    let t: Vec<f64> = order.iter().map(|&i| nodes[i]).collect();
    let mut a: Vec<f64> = order.iter().map(|&i| values[i]).collect();

    // Divided differences in place: a[i] = f[t_0, ..., t_i].
    for level in 1..count {
        for i in (level..count).rev() {
            a[i] = (a[i] - a[i - 1]) / (t[i] - t[i - level]);
        }
    }
    // Newton form to monomial form by nested multiplication.
    let mut c = vec![0.0; count];
    c[0] = a[count - 1];
    for i in (0..count - 1).rev() {
        // c <- c * (t - t_i) + a_i, with c of degree count - 2 - i.
        let deg = count - 1 - i;
        for j in (1..=deg).rev() {
            c[j] = c[j - 1] - t[i] * c[j];
        }
        c[0] = a[i] - t[i] * c[0];
    }
    instrument::count_ops((3 * count * count) as u64);
    Ok(c)
}

/// Solves the degree-`n` problem on `line` with a fresh monomial table.
pub fn solve_on_line<F>(f: F, n: usize, line: &LineSpec) -> Result<(NodeSet, MultiPoly)>
where
    F: Fn(&[f64]) -> f64,
{
    let space = Arc::new(build_order(line.dim(), n)?);
    solve_on_line_in(&space, |p| Ok(f(p)), n, line, &BitString::empty())
}

/// Solver entry point: `f` may fail (the corrected values of the recursion
/// raise geometry errors) and the result lives in the caller's table.
pub fn solve_on_line_in<F>(
    space: &Arc<MonomialOrder>,
    f: F,
    n: usize,
    line: &LineSpec,
    label: &BitString,
) -> Result<(NodeSet, MultiPoly)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let nodes = chebyshev_nodes_labelled(n + 1, line, label);
    let values = nodes.iter().map(|(p, _)| f(p)).collect::<Result<Vec<f64>>>()?;
    let poly = solve_line_values(space, line, &values)?;
    Ok((nodes, poly))
}

/// Interpolates `values` given at the `values.len()` Chebyshev nodes of
/// `line` (in node order) and embeds the result in `space`.
pub fn solve_line_values(space: &Arc<MonomialOrder>, line: &LineSpec, values: &[f64]) -> Result<MultiPoly> {
    let params = chebyshev_parameters(values.len(), line.kappa);
    let coeffs = solve_univariate(&params, values)?;
    embed_univariate_in(space, &coeffs, &line.direction, &line.base)
}
