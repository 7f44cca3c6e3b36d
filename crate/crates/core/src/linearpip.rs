//! Degree-one interpolation on a `k`-dimensional affine flat.

use std::sync::Arc;

use crate::decomposition::BitString;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::instrument;
use crate::monomials::{build_order, MonomialOrder};
use crate::nodegen::NodeSet;
use crate::polynomial::MultiPoly;

/// The flat `b + span{xi_a : a in active}` of an orthonormal frame.
///
/// Nodes sit at `b` and `b + s * xi_a`; `s` is the offset length (default 1).
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSpec {
    frame: Frame,
    active: Vec<usize>,
    base: Vec<f64>,
    offset: f64,
}

impl FlatSpec {
    /// `active` lists 0-based frame axes.
    pub fn new(frame: Frame, active: Vec<usize>, base: Vec<f64>) -> Result<Self> {
        let m = frame.dim();
        if base.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: base.len() });
        }
        if active.is_empty() || active.len() > m {
            return Err(Error::Config(format!("a flat needs between 1 and {m} active axes")));
        }
        for (i, &a) in active.iter().enumerate() {
            if a >= m || active[..i].contains(&a) {
                return Err(Error::Config(format!("invalid or repeated active axis {a}")));
            }
        }
        Ok(FlatSpec { frame, active, base, offset: 1.0 })
    }

    /// The whole space in the standard frame, based at the origin.
    pub fn full(m: usize) -> Self {
        FlatSpec { frame: Frame::standard(m), active: (0..m).collect(), base: vec![0.0; m], offset: 1.0 }
    }

    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        if !(offset.is_finite() && offset != 0.0) {
            return Err(Error::Config(format!("linear node offset must be nonzero, got {offset}")));
        }
        self.offset = offset;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// Dimension `k` of the flat.
    pub fn rank(&self) -> usize {
        self.active.len()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn node(&self, a: usize) -> Vec<f64> {
        let axis = self.frame.axis(self.active[a]);
        self.base.iter().zip(axis).map(|(b, x)| b + self.offset * x).collect()
    }
}

/// `b`, then `b + s xi_a` for every active axis.
pub fn linear_generic_nodes_labelled(flat: &FlatSpec, label: &BitString) -> NodeSet {
    let mut set = NodeSet::with_capacity(flat.dim(), flat.rank() + 1);
    set.push(&flat.base, label);
    for a in 0..flat.rank() {
        set.push(&flat.node(a), label);
    }
    set
}

pub fn linear_generic_nodes(flat: &FlatSpec) -> NodeSet {
    linear_generic_nodes_labelled(flat, &BitString::empty())
}

/// Solves the degree-one problem on `flat` with a fresh monomial table.
pub fn solve_linear<F>(f: F, flat: &FlatSpec) -> Result<(NodeSet, MultiPoly)>
where
    F: Fn(&[f64]) -> f64,
{
    let space = Arc::new(build_order(flat.dim(), 1)?);
    solve_linear_in(&space, |p| Ok(f(p)), flat, &BitString::empty())
}

/// In flat coordinates `y_a = <x - b, xi_a>` the solution is
/// `g(b) + sum_a (g(b + s xi_a) - g(b)) / s * y_a`; expanding `y_a` gives the
/// ambient coefficients.
pub fn solve_linear_in<F>(
    space: &Arc<MonomialOrder>,
    f: F,
    flat: &FlatSpec,
    label: &BitString,
) -> Result<(NodeSet, MultiPoly)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let nodes = linear_generic_nodes_labelled(flat, label);
    let values = nodes.iter().map(|(p, _)| f(p)).collect::<Result<Vec<f64>>>()?;
    let poly = solve_linear_values(space, flat, &values)?;
    Ok((nodes, poly))
}

/// Interpolates `values` given at the linear generic nodes of `flat` (base
/// first, then one node per active axis).
pub fn solve_linear_values(space: &Arc<MonomialOrder>, flat: &FlatSpec, values: &[f64]) -> Result<MultiPoly> {
    let m = flat.dim();
    if values.len() != flat.rank() + 1 {
        return Err(Error::DimensionMismatch { expected: flat.rank() + 1, got: values.len() });
    }
    let c0_flat = values[0];
    let mut lin = vec![0.0; m];
    for (a, &axis_id) in flat.active.iter().enumerate() {
        let slope = (values[a + 1] - c0_flat) / flat.offset;
        for (l, x) in lin.iter_mut().zip(flat.frame.axis(axis_id)) {
            *l += slope * x;
        }
    }
    let c0 = c0_flat - lin.iter().zip(&flat.base).map(|(c, b)| c * b).sum::<f64>();
    instrument::count_ops((m * (flat.rank() + 2)) as u64);
    MultiPoly::linear(space, c0, &lin)
}
