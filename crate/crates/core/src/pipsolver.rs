//! The recursive interpolation solver.
//!
//! At an interior vertex `v` with split polynomial `Q_H`, the lower-dimension
//! child `w` interpolates the current function on the hyperplane, the
//! lower-degree child `u` interpolates `(g - Q_w) / Q_H` off it, and
//! `Q_v = Q_w + Q_H Q_u`. Corrections are never expanded: each sub-problem
//! carries the accumulated polynomial `Q^_v` and the product of split
//! polynomials `Q^_{H,v}` (as a list of linear factors), and its function is
//! evaluated lazily as `(f - Q^_v) / Q^_{H,v}` at its own nodes.

use std::ops::Range;
use std::sync::Arc;
use std::time::Instant;

use crate::decomposition::{DecompTree, HyperplaneMap, HyperplaneSpec};
use crate::error::{Error, Result};
use crate::instrument::{self, Reservation, Usage};
use crate::linearpip::{solve_linear_values, FlatSpec};
use crate::monomials::{build_order, MonomialOrder};
use crate::nodegen::{assemble_generic, Assembly, AssemblyConfig, NodeSet};
use crate::onedim::{solve_line_values, LineSpec};
use crate::polynomial::{MultiPoly, Scratch};

/// Relative size below which a divisor value counts as zero.
pub const DIVISION_TOLERANCE: f64 = 1e-12;

/// How leaf solutions are combined into the global polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Composition {
    /// Bottom-up merge `Q_v = Q_w + Q_H Q_u` at every interior vertex.
    #[default]
    Merge,
    /// One running sum `sum_leaves Q^_{H,leaf} Q_leaf`, which is also the
    /// correction polynomial each later leaf sees.
    Accumulate,
}

/// Solver parameters.
#[derive(Debug, Clone, Default)]
pub struct SolverConfig {
    pub assembly: AssemblyConfig,
    pub composition: Composition,
}

/// Product of the split polynomials on the path to a vertex, kept factored.
#[derive(Debug, Clone, Default)]
pub struct DivisorProduct {
    factors: Vec<HyperplaneSpec>,
}

impl DivisorProduct {
    pub fn one() -> Self {
        DivisorProduct::default()
    }

    pub fn factors(&self) -> &[HyperplaneSpec] {
        &self.factors
    }

    /// Degree of the product (number of factors).
    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn times(&self, h: &HyperplaneSpec) -> Self {
        let mut factors = self.factors.clone();
        factors.push(h.clone());
        DivisorProduct { factors }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        instrument::count_ops((self.factors.len() * x.len()) as u64);
        self.factors.iter().map(|h| h.eval(x)).product()
    }

    /// `q` times this product, one linear factor at a time.
    pub fn multiply(&self, q: &MultiPoly) -> Result<MultiPoly> {
        let mut out = q.clone();
        for h in &self.factors {
            out = out.mul_linear(&MultiPoly::hyperplane(q.space(), &h.normal, &h.base)?)?;
        }
        Ok(out)
    }

    pub fn to_poly(&self, space: &Arc<MonomialOrder>) -> Result<MultiPoly> {
        self.multiply(&MultiPoly::constant(space, 1.0))
    }
}

/// Correction state of one sub-problem.
#[derive(Debug, Clone)]
pub struct SubProblemFrame {
    /// Tree vertex (0 for the root or a base case).
    pub vertex: usize,
    /// Accumulated correction `Q^_v`; `None` stands for zero.
    pub correction: Option<MultiPoly>,
    /// Accumulated divisor `Q^_{H,v}`.
    pub divisor: DivisorProduct,
    /// The sub-solution once computed.
    pub solution: Option<MultiPoly>,
}

impl SubProblemFrame {
    pub fn root() -> Self {
        SubProblemFrame { vertex: 0, correction: None, divisor: DivisorProduct::one(), solution: None }
    }

    pub fn is_solved(&self) -> bool {
        self.solution.is_some()
    }

    fn corrected(&self, fp: f64, p: &[f64], scratch: &mut Scratch) -> Result<f64> {
        let q = self.correction.as_ref().map_or(0.0, |c| c.evaluate_with(p, scratch));
        let mut d = 1.0;
        let mut scale = 1.0;
        let mut worst: Option<(&HyperplaneSpec, f64)> = None;
        for h in &self.divisor.factors {
            let value = h.eval(p);
            let size = 1.0
                + h.normal.iter().zip(p).map(|(a, b)| (a * b).abs()).sum::<f64>()
                + h.normal.iter().zip(&h.base).map(|(a, b)| (a * b).abs()).sum::<f64>();
            d *= value;
            scale *= size;
            if worst.is_none_or(|(_, v)| value.abs() < v.abs()) {
                worst = Some((h, value));
            }
        }
        instrument::count_ops((3 * self.divisor.factors.len() * p.len() + 2) as u64);
        if !(d.abs() > DIVISION_TOLERANCE * scale) {
            let (h, value) = worst.expect("a vanishing divisor has at least one factor");
            return Err(Error::IllPosedGeometry { node: p.to_vec(), hyperplane: h.eps.to_string(), value });
        }
        Ok((fp - q) / d)
    }
}

/// `(f(p) - Q^_v(p)) / Q^_{H,v}(p)`.
pub fn corrected_value<F: Fn(&[f64]) -> f64>(f: F, frame: &SubProblemFrame, p: &[f64]) -> Result<f64> {
    let mut scratch = Scratch::default();
    frame.corrected(f(p), p, &mut scratch)
}

/// Counted work of one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct SolveReport {
    pub multiply_adds: u64,
    pub peak_reals_stored: usize,
    /// Largest single tracked buffer; stays far below `N^2`.
    pub largest_block: usize,
    pub seconds: f64,
    pub node_count: usize,
}

impl SolveReport {
    fn from_usage(usage: Usage, seconds: f64, node_count: usize) -> Self {
        SolveReport {
            multiply_adds: usage.multiply_adds,
            peak_reals_stored: usage.peak_reals_stored,
            largest_block: usage.largest_block,
            seconds,
            node_count,
        }
    }
}

/// Interpolant, the nodes it was built on, and the work report.
#[derive(Debug, Clone)]
pub struct Solution {
    pub poly: MultiPoly,
    pub assembly: Assembly,
    pub report: SolveReport,
}

impl Solution {
    pub fn nodes(&self) -> &NodeSet {
        &self.assembly.nodes
    }
}

/// The operation counts of a finished run.
pub fn op_counter_report(run: &Solution) -> SolveReport {
    run.report
}

/// Generates the nodes for `(m, n)`, evaluates `f` on them and returns the
/// unique interpolant of degree at most `n`.
pub fn solve<F>(f: F, m: usize, n: usize, config: &SolverConfig) -> Result<Solution>
where
    F: Fn(&[f64]) -> f64,
{
    let start = Instant::now();
    let (result, usage) = instrument::measure(|| -> Result<(MultiPoly, Assembly)> {
        let assembly = assemble_generic(m, n, &config.assembly)?;
        let values = Values::new(assembly.nodes.iter().map(|(p, _)| f(p)).collect());
        let poly = solve_assembled(&assembly, values.as_slice(), config.composition)?;
        Ok((poly, assembly))
    });
    let (poly, assembly) = result?;
    let report = SolveReport::from_usage(usage, start.elapsed().as_secs_f64(), assembly.nodes.len());
    Ok(Solution { poly, assembly, report })
}

/// Interpolates prescribed `values` (one per node, in node order) on an
/// existing assembly.
pub fn solve_values(assembly: &Assembly, values: &[f64], composition: Composition) -> Result<(MultiPoly, SolveReport)> {
    let start = Instant::now();
    let (poly, usage) = instrument::measure(|| solve_assembled(assembly, values, composition));
    Ok((poly?, SolveReport::from_usage(usage, start.elapsed().as_secs_f64(), assembly.nodes.len())))
}

/// Tracked owner of the node values.
struct Values {
    data: Vec<f64>,
    _tracked: Reservation,
}

impl Values {
    fn new(data: Vec<f64>) -> Self {
        let tracked = Reservation::new(data.len());
        Values { data, _tracked: tracked }
    }

    fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn solve_assembled(asm: &Assembly, values: &[f64], composition: Composition) -> Result<MultiPoly> {
    if values.len() != asm.nodes.len() {
        return Err(Error::DimensionMismatch { expected: asm.nodes.len(), got: values.len() });
    }
    let space = Arc::new(build_order(asm.m, asm.n)?);
    let q = match (&asm.tree, &asm.hyperplanes) {
        (Some(tree), Some(_)) => {
            let mut leaf_of = vec![None; tree.len()];
            for (leaf, r) in &asm.leaf_ranges {
                leaf_of[*leaf] = Some(r.clone());
            }
            let mut ctx = Ctx { asm, space: space.clone(), values, leaf_of, scratch: Scratch::default() };
            match composition {
                Composition::Merge => ctx.merge(tree.root(), &SubProblemFrame::root())?,
                Composition::Accumulate => ctx.accumulate()?,
            }
        }
        _ => solve_base_case(asm, &space, values)?,
    };
    if asm.transform_is_identity {
        Ok(q)
    } else {
        q.compose_affine(&asm.transform.inverse()?)
    }
}

/// `n = 0`, `m = 1` and `n = 1` are solved directly on the construction nodes.
fn solve_base_case(asm: &Assembly, space: &Arc<MonomialOrder>, values: &[f64]) -> Result<MultiPoly> {
    let origin = vec![0.0; asm.m];
    if asm.n == 0 {
        Ok(MultiPoly::constant(space, values[0]))
    } else if asm.m == 1 {
        let line = LineSpec::new(asm.frame.axis(0).to_vec(), origin, asm.kappa)?;
        solve_line_values(space, &line, values)
    } else {
        let flat = FlatSpec::new(asm.frame.clone(), (0..asm.m).collect(), origin)?.with_offset(asm.linear_offset)?;
        solve_linear_values(space, &flat, values)
    }
}

struct Ctx<'a> {
    asm: &'a Assembly,
    space: Arc<MonomialOrder>,
    values: &'a [f64],
    leaf_of: Vec<Option<Range<usize>>>,
    scratch: Scratch,
}

impl Ctx<'_> {
    fn tree(&self) -> &DecompTree {
        self.asm.tree.as_ref().expect("tree present")
    }

    fn hyperplanes(&self) -> &HyperplaneMap {
        self.asm.hyperplanes.as_ref().expect("hyperplanes present")
    }

    /// Solves the leaf problem with the corrected values of its own nodes.
    fn solve_leaf(&mut self, leaf: usize, frame: &SubProblemFrame) -> Result<MultiPoly> {
        let range = self.leaf_of[leaf].clone().expect("every leaf owns nodes");
        let nodes = &self.asm.construction;
        let mut values = Vec::with_capacity(range.len());
        for i in range {
            values.push(frame.corrected(self.values[i], nodes.point(i), &mut self.scratch)?);
        }
        let base = self.hyperplanes().base(leaf).to_vec();
        let frame_axes = &self.asm.frame;
        match self.tree().vertex(leaf).sigma {
            (1, _) => {
                let line = LineSpec::new(frame_axes.axis(0).to_vec(), base, self.asm.kappa)?;
                solve_line_values(&self.space, &line, &values)
            }
            (k, _) => {
                let flat =
                    FlatSpec::new(frame_axes.clone(), (0..k).collect(), base)?.with_offset(self.asm.linear_offset)?;
                solve_linear_values(&self.space, &flat, &values)
            }
        }
    }

    /// `Q_v = Q_w + Q_H Q_u`, lower-dimension branch first.
    fn merge(&mut self, v: usize, frame: &SubProblemFrame) -> Result<MultiPoly> {
        let node = self.tree().vertex(v).clone();
        let (Some(u), Some(w)) = (node.lower_degree, node.lower_dim) else {
            return self.solve_leaf(v, frame);
        };
        let h = self.hyperplanes().split_of(v).expect("interior vertex has a split").clone();

        let w_frame = SubProblemFrame { vertex: w, ..frame.clone() };
        let q_w = self.merge(w, &w_frame)?;

        let shifted = frame.divisor.multiply(&q_w)?;
        let correction = match &frame.correction {
            Some(c) => c.add(&shifted)?,
            None => shifted,
        };
        let u_frame = SubProblemFrame {
            vertex: u,
            correction: Some(correction),
            divisor: frame.divisor.times(&h),
            solution: None,
        };
        let q_u = self.merge(u, &u_frame)?;
        drop(u_frame);

        let h_poly = MultiPoly::hyperplane(&self.space, &h.normal, &h.base)?;
        let mut q_v = q_u.mul_linear(&h_poly)?;
        q_v.add_assign(&q_w)?;
        Ok(q_v)
    }

    /// One running sum over the leaves in lower-dimension-first order. When a
    /// leaf is reached the sum equals that leaf's correction polynomial.
    fn accumulate(&mut self) -> Result<MultiPoly> {
        let mut acc = MultiPoly::zero(&self.space, 0)?;
        let mut stack = vec![(self.tree().root(), DivisorProduct::one())];
        while let Some((v, divisor)) = stack.pop() {
            let node = self.tree().vertex(v).clone();
            match (node.lower_degree, node.lower_dim) {
                (Some(u), Some(w)) => {
                    let h = self.hyperplanes().split_of(v).expect("interior vertex has a split");
                    stack.push((u, divisor.times(h)));
                    stack.push((w, divisor));
                }
                _ => {
                    let frame = SubProblemFrame { vertex: v, correction: Some(acc), divisor, solution: None };
                    let q = self.solve_leaf(v, &frame)?;
                    let SubProblemFrame { correction, divisor, .. } = frame;
                    acc = correction.expect("set above");
                    acc.add_assign(&divisor.multiply(&q)?)?;
                }
            }
        }
        Ok(acc)
    }
}
