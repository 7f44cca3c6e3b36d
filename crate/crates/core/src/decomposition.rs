//! The sub-problem tree and its splitting hyperplanes.
//!
//! The problem `(m, n)` splits into a lower-degree child `(m, n - 1)` (bit 0)
//! and a lower-dimension child `(m - 1, n)` (bit 1). Vertices with dimension
//! one or degree one are leaves. Every bit-1 vertex owns a hyperplane: the
//! flat of its parent cut at offset `alpha(eps)` along the highest frame axis
//! the parent still spans.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::monomials::count_total;

/// Absolute gap below which two parallel hyperplanes count as coincident.
pub const DISJOINT_TOLERANCE: f64 = 1e-9;

/// A finite bit sequence labelling a vertex by its path from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn empty() -> Self {
        BitString(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut v = self.0.clone();
        v.push(bit);
        BitString(v)
    }

    pub fn ends_in_one(&self) -> bool {
        self.0.last() == Some(&true)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_char(if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses a string of `0`/`1`; the empty string and `-` denote the root.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "-" {
            return Ok(BitString::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Config(format!("invalid bit {other:?} in bit string {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl From<&[u8]> for BitString {
    fn from(bits: &[u8]) -> Self {
        BitString(bits.iter().map(|&b| b != 0).collect())
    }
}

/// One sub-problem of the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub eps: BitString,
    /// `(dimension, degree)`.
    pub sigma: (usize, usize),
    pub parent: Option<usize>,
    /// Bit-0 child, `(k, d - 1)`.
    pub lower_degree: Option<usize>,
    /// Bit-1 child, `(k - 1, d)`.
    pub lower_dim: Option<usize>,
}

impl Vertex {
    pub fn is_leaf(&self) -> bool {
        self.lower_degree.is_none()
    }

    /// Edge distance from the root, `(m - k) + (n - d)` for `sigma = (k, d)`.
    pub fn depth(&self) -> usize {
        self.eps.len()
    }
}

/// The binary tree `T_{m,n}`, stored in pre-order with the bit-0 child first.
#[derive(Debug, Clone)]
pub struct DecompTree {
    m: usize,
    n: usize,
    vertices: Vec<Vertex>,
}

impl DecompTree {
    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Leaves in left-to-right order (bit 0 before bit 1).
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].is_leaf()).collect()
    }

    /// Number of levels on the longest root-to-leaf path, `m + n - 2`.
    ///
    /// Vertex depths count edges from the root, so the deepest leaf sits at
    /// [`DecompTree::max_vertex_depth`] `= m + n - 3`; a tree whose root is
    /// on level 1 therefore spans `m + n - 2` levels.
    pub fn depth(&self) -> usize {
        self.max_vertex_depth() + 1
    }

    /// Largest edge distance from the root to any vertex.
    pub fn max_vertex_depth(&self) -> usize {
        self.vertices.iter().map(Vertex::depth).max().unwrap_or(0)
    }

    /// Locates a vertex by its bit string.
    pub fn find(&self, eps: &BitString) -> Option<usize> {
        let mut v = 0;
        for &bit in &eps.0 {
            let node = &self.vertices[v];
            v = if bit { node.lower_dim? } else { node.lower_degree? };
        }
        Some(v)
    }

    /// Nodes each leaf contributes: `d + 1` for a line leaf `(1, d)`,
    /// `k + 1` for a linear leaf `(k, 1)`.
    pub fn leaf_node_count(&self, leaf: usize) -> usize {
        let (k, d) = self.vertices[leaf].sigma;
        if k == 1 {
            d + 1
        } else {
            k + 1
        }
    }

    pub fn leaf_node_budget(&self) -> usize {
        self.leaves().into_iter().map(|l| self.leaf_node_count(l)).sum()
    }
}

/// Builds `T_{m,n}` for `m, n >= 2`.
pub fn build_tree(m: usize, n: usize) -> Result<DecompTree> {
    if m < 2 || n < 2 {
        return Err(Error::Config(format!("the decomposition tree needs m >= 2 and n >= 2, got ({m}, {n})")));
    }
    let leaves = count_total(m - 1, n - 1)?;
    let mut vertices = Vec::with_capacity(2 * leaves - 1);
    // Explicit stack of (parent, is_lower_dim, eps, sigma) in pre-order.
    let mut stack = vec![(None::<usize>, false, BitString::empty(), (m, n))];
    while let Some((parent, bit, eps, sigma)) = stack.pop() {
        let id = vertices.len();
        if let Some(p) = parent {
            let pv: &mut Vertex = &mut vertices[p];
            if bit {
                pv.lower_dim = Some(id);
            } else {
                pv.lower_degree = Some(id);
            }
        }
        let (k, d) = sigma;
        if k > 1 && d > 1 {
            stack.push((Some(id), true, eps.child(true), (k - 1, d)));
            stack.push((Some(id), false, eps.child(false), (k, d - 1)));
        }
        vertices.push(Vertex { eps, sigma, parent, lower_degree: None, lower_dim: None });
    }
    Ok(DecompTree { m, n, vertices })
}

/// The exact rational spacing parameter `lambda > 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lambda(BigRational);

impl Lambda {
    pub fn new(value: BigRational) -> Result<Self> {
        if value <= BigRational::one() {
            return Err(Error::Config(format!("lambda must exceed 1, got {value}")));
        }
        Ok(Lambda(value))
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Config("lambda denominator is zero".into()));
        }
        Lambda::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Default for Lambda {
    /// `11/10`; see the crate README for why the default is this close to 1.
    fn default() -> Self {
        Lambda(BigRational::new(BigInt::from(11), BigInt::from(10)))
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Lambda {
    type Err = Error;

    /// Accepts integers (`2`), fractions (`11/10`) and finite decimals (`1.1`),
    /// all converted exactly.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse lambda from {s:?}"));
        let int = |t: &str| t.parse::<BigInt>().map_err(|_| bad());
        let value = if let Some((num, den)) = s.split_once('/') {
            let den = int(den)?;
            if den.is_zero() {
                return Err(bad());
            }
            BigRational::new(int(num)?, den)
        } else if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = whole.starts_with('-');
            let whole = if whole.is_empty() || whole == "-" { BigInt::zero() } else { int(whole)? };
            let scale = BigInt::from(10).pow(frac.len() as u32);
            let frac = int(frac)?;
            let mag = whole.abs() * &scale + frac;
            BigRational::new(if negative { -mag } else { mag }, scale)
        } else {
            BigRational::from_integer(int(s)?)
        };
        Lambda::new(value)
    }
}

/// `alpha(eps) = sum_i (-1)^(i-1) eps_i lambda^i`, exactly.
pub fn alpha(eps: &BitString, lambda: &Lambda) -> BigRational {
    let mut power = BigRational::one();
    let mut acc = BigRational::zero();
    for (i, &bit) in eps.0.iter().enumerate() {
        power *= lambda.value();
        if bit {
            if i % 2 == 0 {
                acc += &power;
            } else {
                acc -= &power;
            }
        }
    }
    acc
}

/// The hyperplane `<normal, x - base> = 0` owned by a bit-1 vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneSpec {
    pub eps: BitString,
    /// 0-based frame axis of the normal: the normal is `xi_{axis+1}`.
    pub axis: usize,
    pub normal: Vec<f64>,
    pub base: Vec<f64>,
    pub alpha: BigRational,
}

impl HyperplaneSpec {
    /// Signed value `<normal, x - base>`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x.iter().zip(&self.base)).map(|(n, (xi, bi))| n * (xi - bi)).sum()
    }

    /// Offset of the hyperplane along its normal, as a float.
    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64().unwrap_or(f64::NAN)
    }
}

/// Hyperplanes keyed by bit string plus the base point of every vertex.
#[derive(Debug, Clone)]
pub struct HyperplaneMap {
    specs: BTreeMap<BitString, HyperplaneSpec>,
    bases: Vec<Vec<f64>>,
    split: Vec<Option<BitString>>,
}

impl HyperplaneMap {
    pub fn get(&self, eps: &BitString) -> Option<&HyperplaneSpec> {
        self.specs.get(eps)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &HyperplaneSpec)> {
        self.specs.iter()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Base point of a vertex: bit-0 vertices inherit their parent's.
    pub fn base(&self, vertex: usize) -> &[f64] {
        &self.bases[vertex]
    }

    /// The hyperplane along which an interior vertex splits (its bit-1 child's).
    pub fn split_of(&self, vertex: usize) -> Option<&HyperplaneSpec> {
        self.split[vertex].as_ref().and_then(|e| self.specs.get(e))
    }
}

/// Assigns a hyperplane to every bit-1 vertex and validates that parallel
/// hyperplanes cut from the same flat are pairwise disjoint.
pub fn assign_hyperplanes(tree: &DecompTree, frame: &Frame, lambda: &Lambda) -> Result<HyperplaneMap> {
    let m = tree.dims().0;
    if frame.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: frame.dim() });
    }
    let lam = lambda.value();
    let mut bases = vec![Vec::new(); tree.len()];
    let mut alphas = vec![BigRational::zero(); tree.len()];
    let mut split = vec![None; tree.len()];
    let mut specs = BTreeMap::new();
    bases[0] = vec![0.0; m];
    // Pre-order guarantees parents come first.
    for id in 1..tree.len() {
        let v = tree.vertex(id);
        let p = v.parent.expect("non-root vertex has a parent");
        let i = v.eps.len();
        let power = num_traits::pow(lam.clone(), i);
        let mut a = alphas[p].clone();
        if v.eps.ends_in_one() {
            if i % 2 == 1 {
                a += power;
            } else {
                a -= power;
            }
        }
        alphas[id] = a.clone();
        if v.eps.ends_in_one() {
            let axis = v.sigma.0;
            let normal = frame.axis(axis).to_vec();
            let af = a.to_f64().unwrap_or(f64::NAN);
            let base: Vec<f64> = bases[p].iter().zip(&normal).map(|(b, n)| b + af * n).collect();
            bases[id] = base.clone();
            split[p] = Some(v.eps.clone());
            specs.insert(v.eps.clone(), HyperplaneSpec { eps: v.eps.clone(), axis, normal, base, alpha: a });
        } else {
            bases[id] = bases[p].clone();
        }
    }

    // Parallel cuts of one flat: the splits of a chain v, v0, v00, ... share
    // the flat, the normal and the base, and differ only in alpha.
    for (id, v) in tree.vertices().iter().enumerate() {
        if v.is_leaf() || (v.parent.is_some() && !v.eps.ends_in_one()) {
            continue;
        }
        let mut offsets: Vec<(&BitString, &BigRational)> = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            if tree.vertex(c).is_leaf() {
                break;
            }
            let spec = &specs[split[c].as_ref().expect("interior vertex has a split")];
            offsets.push((&spec.eps, &spec.alpha));
            cur = tree.vertex(c).lower_degree;
        }
        for (i, (ea, a)) in offsets.iter().enumerate() {
            if a.to_f64().unwrap_or(0.0).abs() <= DISJOINT_TOLERANCE {
                return Err(Error::Config(format!(
                    "hyperplane {ea} passes through the base of its flat; choose a larger lambda"
                )));
            }
            for (eb, b) in &offsets[i + 1..] {
                let gap = (*a - *b).to_f64().unwrap_or(0.0).abs();
                if gap <= DISJOINT_TOLERANCE {
                    return Err(Error::Config(format!(
                        "hyperplanes {ea} and {eb} coincide (gap {gap:e}); choose a larger lambda"
                    )));
                }
            }
        }
    }
    Ok(HyperplaneMap { specs, bases, split })
}

/// Text listing of every vertex for inspection and golden files:
/// `eps sigma nu base alpha`, with `-` where a vertex owns no hyperplane.
pub fn debug_dump(tree: &DecompTree, map: &HyperplaneMap) -> String {
    let mut out = String::new();
    for (id, v) in tree.vertices().iter().enumerate() {
        let eps = if v.eps.is_empty() { "-".to_string() } else { v.eps.to_string() };
        let base: Vec<String> = map.base(id).iter().map(|b| format!("{b}")).collect();
        let (nu, alpha) = match map.get(&v.eps) {
            Some(h) => (format!("xi_{}", h.axis + 1), h.alpha.to_string()),
            None => ("-".to_string(), "-".to_string()),
        };
        let _ =
            writeln!(out, "eps={eps} sigma=({},{}) nu={nu} b=[{}] alpha={alpha}", v.sigma.0, v.sigma.1, base.join(","));
    }
    out
}
