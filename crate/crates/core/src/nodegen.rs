//! Generic node sets assembled from the leaves of the decomposition tree.
//!
//! Every leaf contributes the nodes of its own small problem: Chebyshev
//! points on a line for `(1, d)` leaves, `k + 1` affinely independent points
//! for `(k, 1)` leaves. Because each split puts the nodes of its
//! lower-dimension branch on the split hyperplane and keeps the nodes of its
//! lower-degree branch off it, the union is unisolvent for degree `n`.

use std::io::{BufRead, Write};
use std::ops::Range;

use crate::decomposition::{assign_hyperplanes, build_tree, BitString, DecompTree, HyperplaneMap, Lambda};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::instrument::Reservation;
use crate::linearpip::{linear_generic_nodes_labelled, FlatSpec};
use crate::monomials::count_total;
use crate::onedim::{chebyshev_nodes_labelled, LineSpec};
use crate::polynomial::AffineMap;

/// Minimum `|Q_H(p)|` for nodes that must avoid a split hyperplane.
pub const SEPARATION_TOLERANCE: f64 = 1e-9;

/// Ordered points in `R^m`, each tagged with the leaf that produced it.
#[derive(Debug)]
pub struct NodeSet {
    m: usize,
    coords: Vec<f64>,
    labels: Vec<BitString>,
    provenance: Vec<usize>,
    tracked: Reservation,
}

impl Clone for NodeSet {
    fn clone(&self) -> Self {
        NodeSet {
            m: self.m,
            coords: self.coords.clone(),
            labels: self.labels.clone(),
            provenance: self.provenance.clone(),
            tracked: Reservation::new(self.coords.len()),
        }
    }
}

impl PartialEq for NodeSet {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.coords == other.coords && (0..self.len()).all(|i| self.label(i) == other.label(i))
    }
}

impl NodeSet {
    pub fn new(m: usize) -> Self {
        NodeSet::with_capacity(m, 0)
    }

    /// Reserves (and registers) storage for `count` points.
    pub fn with_capacity(m: usize, count: usize) -> Self {
        NodeSet {
            m,
            coords: Vec::with_capacity(m * count),
            labels: Vec::new(),
            provenance: Vec::with_capacity(count),
            tracked: Reservation::new(m * count),
        }
    }

    /// Builds a set from flat row-major coordinates, all with an empty label.
    pub fn from_coords(m: usize, coords: Vec<f64>) -> Result<Self> {
        if m == 0 || !coords.len().is_multiple_of(m) {
            return Err(Error::DimensionMismatch { expected: m, got: coords.len() });
        }
        let mut set = NodeSet::with_capacity(m, coords.len() / m);
        for p in coords.chunks(m) {
            set.push(p, &BitString::empty());
        }
        Ok(set)
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let m = points.first().map_or(0, Vec::len);
        let mut coords = Vec::with_capacity(m * points.len());
        for p in points {
            if p.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        NodeSet::from_coords(m, coords)
    }

    pub fn push(&mut self, point: &[f64], label: &BitString) {
        assert_eq!(point.len(), self.m, "point dimension");
        if self.labels.last() != Some(label) {
            self.labels.push(label.clone());
        }
        self.provenance.push(self.labels.len() - 1);
        self.coords.extend_from_slice(point);
        if self.coords.len() > self.tracked.len() {
            self.tracked = Reservation::new(self.coords.capacity());
        }
    }

    pub fn append(&mut self, other: &NodeSet) {
        for (p, l) in other.iter() {
            self.push(p, l);
        }
    }

    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.m..(i + 1) * self.m]
    }

    /// Row-major coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Bit string of the leaf that produced node `i`.
    pub fn label(&self, i: usize) -> &BitString {
        &self.labels[self.provenance[i]]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &BitString)> + '_ {
        (0..self.len()).map(move |i| (self.point(i), self.label(i)))
    }

    /// Applies `t` to every point, keeping labels.
    pub fn map(&self, t: &AffineMap) -> NodeSet {
        let mut out = NodeSet::with_capacity(self.m, self.len());
        for (p, l) in self.iter() {
            out.push(&t.apply(p), l);
        }
        out
    }

    /// Smallest Euclidean distance between two points (`inf` below two points).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d: f64 = self.point(i).iter().zip(self.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.min(d);
            }
        }
        best.sqrt()
    }

    /// Per-axis `(min, max)` over all points.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bb = vec![(f64::INFINITY, f64::NEG_INFINITY); self.m];
        for (p, _) in self.iter() {
            for (b, &x) in bb.iter_mut().zip(p) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        bb
    }
}

/// Parameters of the node construction.
#[derive(Debug, Clone)]
pub struct AssemblyConfig {
    /// Orientation of the construction; `None` means the standard basis.
    pub frame: Option<Frame>,
    /// Hyperplane spacing.
    pub lambda: Lambda,
    /// Spread of the Chebyshev nodes on line leaves.
    pub kappa: f64,
    /// Distance of the off-base nodes on linear leaves.
    pub linear_offset: f64,
    /// Translation applied to every node after assembly.
    pub mu: Option<Vec<f64>>,
    /// Map the assembled nodes into `[-1, 1]^m` axis by axis.
    pub rescale: bool,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            frame: None,
            lambda: Lambda::default(),
            kappa: 1.0,
            linear_offset: 1.0,
            mu: None,
            rescale: false,
        }
    }
}

impl AssemblyConfig {
    pub fn frame_for(&self, m: usize) -> Result<Frame> {
        match &self.frame {
            Some(f) if f.dim() != m => Err(Error::DimensionMismatch { expected: m, got: f.dim() }),
            Some(f) => Ok(f.clone()),
            None => Ok(Frame::standard(m)),
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.linear_offset.is_finite() && self.linear_offset != 0.0) {
            return Err(Error::Config("linear node offset must be nonzero".into()));
        }
        if let Some(mu) = &self.mu {
            if mu.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: mu.len() });
            }
        }
        Ok(())
    }
}

/// Output of [`assemble_generic`].
#[derive(Debug, Clone)]
pub struct Assembly {
    pub m: usize,
    pub n: usize,
    pub frame: Frame,
    /// Nodes in construction coordinates, where the tree geometry lives.
    pub construction: NodeSet,
    /// Map from construction coordinates to the returned nodes.
    pub transform: AffineMap,
    /// Whether `transform` is the identity (nodes are then bit-identical).
    pub transform_is_identity: bool,
    /// The returned node set, `transform` applied to `construction`.
    pub nodes: NodeSet,
    /// Tree and hyperplanes; absent for the direct base cases.
    pub tree: Option<DecompTree>,
    pub hyperplanes: Option<HyperplaneMap>,
    /// For every leaf vertex, its index range in the node set.
    pub leaf_ranges: Vec<(usize, Range<usize>)>,
    /// Chebyshev spread and linear offset the leaves were built with.
    pub kappa: f64,
    pub linear_offset: f64,
}

impl Assembly {
    /// Node index range covering the subtree rooted at `vertex`.
    pub fn subtree_range(&self, vertex: usize) -> Range<usize> {
        let Some(tree) = &self.tree else { return 0..self.nodes.len() };
        let mut lo = usize::MAX;
        let mut hi = 0;
        let mut stack = vec![vertex];
        while let Some(v) = stack.pop() {
            let node = tree.vertex(v);
            if node.is_leaf() {
                if let Some((_, r)) = self.leaf_ranges.iter().find(|(l, _)| *l == v) {
                    lo = lo.min(r.start);
                    hi = hi.max(r.end);
                }
            } else {
                stack.extend(node.lower_degree);
                stack.extend(node.lower_dim);
            }
        }
        lo..hi
    }
}

/// Nodes of one leaf: `d + 1` Chebyshev points along `xi_1` for a `(1, d)`
/// leaf, the base plus `s xi_a` for `a = 1..=k` for a `(k, 1)` leaf.
pub fn leaf_nodes(
    tree: &DecompTree,
    leaf: usize,
    hyperplanes: &HyperplaneMap,
    frame: &Frame,
    kappa: f64,
    linear_offset: f64,
) -> Result<NodeSet> {
    let v = tree.vertex(leaf);
    let base = hyperplanes.base(leaf).to_vec();
    match v.sigma {
        (1, d) => {
            let line = LineSpec::new(frame.axis(0).to_vec(), base, kappa)?;
            Ok(chebyshev_nodes_labelled(d + 1, &line, &v.eps))
        }
        (k, 1) => {
            let flat = FlatSpec::new(frame.clone(), (0..k).collect(), base)?.with_offset(linear_offset)?;
            Ok(linear_generic_nodes_labelled(&flat, &v.eps))
        }
        (k, d) => Err(Error::Config(format!("vertex {} with sigma ({k}, {d}) is not a leaf", v.eps))),
    }
}

/// Builds the `N(m, n)` generic nodes for the degree-`n` problem in `m`
/// variables.
pub fn assemble_generic(m: usize, n: usize, cfg: &AssemblyConfig) -> Result<Assembly> {
    let total = count_total(m, n)?;
    cfg.validate(m)?;
    let frame = cfg.frame_for(m)?;
    let root = BitString::empty();

    let (construction, tree, hyperplanes, leaf_ranges) = if n == 0 {
        let mut set = NodeSet::with_capacity(m, 1);
        set.push(&vec![0.0; m], &root);
        (set, None, None, vec![])
    } else if m == 1 {
        let line = LineSpec::new(frame.axis(0).to_vec(), vec![0.0], cfg.kappa)?;
        (chebyshev_nodes_labelled(n + 1, &line, &root), None, None, vec![])
    } else if n == 1 {
        let flat = FlatSpec::new(frame.clone(), (0..m).collect(), vec![0.0; m])?.with_offset(cfg.linear_offset)?;
        (linear_generic_nodes_labelled(&flat, &root), None, None, vec![])
    } else {
        let tree = build_tree(m, n)?;
        let hyperplanes = assign_hyperplanes(&tree, &frame, &cfg.lambda)?;
        let mut set = NodeSet::with_capacity(m, total);
        let mut ranges = Vec::new();
        for leaf in tree.leaves() {
            let start = set.len();
            set.append(&leaf_nodes(&tree, leaf, &hyperplanes, &frame, cfg.kappa, cfg.linear_offset)?);
            ranges.push((leaf, start..set.len()));
        }
        (set, Some(tree), Some(hyperplanes), ranges)
    };

    if construction.len() != total {
        return Err(Error::CountMismatch { expected: total, got: construction.len() });
    }

    let mut assembly = Assembly {
        m,
        n,
        frame,
        transform: AffineMap::identity(m),
        transform_is_identity: true,
        nodes: construction.clone(),
        construction,
        tree,
        hyperplanes,
        leaf_ranges,
        kappa: cfg.kappa,
        linear_offset: cfg.linear_offset,
    };
    check_separation(&assembly)?;

    let (transform, identity) = output_transform(&assembly.construction, cfg)?;
    if !identity {
        assembly.nodes = assembly.construction.map(&transform);
    }
    assembly.transform = transform;
    assembly.transform_is_identity = identity;
    Ok(assembly)
}

/// Rescale-then-translate map applied after construction.
fn output_transform(nodes: &NodeSet, cfg: &AssemblyConfig) -> Result<(AffineMap, bool)> {
    let m = nodes.dim();
    let mu = cfg.mu.clone().unwrap_or_else(|| vec![0.0; m]);
    if !cfg.rescale {
        let identity = mu.iter().all(|&v| v == 0.0);
        return Ok((AffineMap::translation(mu), identity));
    }
    let bb = nodes.bounding_box();
    let mut scale = vec![1.0; m];
    let mut shift = vec![0.0; m];
    for (i, &(lo, hi)) in bb.iter().enumerate() {
        let half = (hi - lo) / 2.0;
        let h = if half > 0.0 { half } else { 1.0 };
        let c = (hi + lo) / 2.0;
        scale[i] = 1.0 / h;
        shift[i] = -c / h + mu[i];
    }
    Ok((AffineMap::diagonal(&scale, shift)?, false))
}

/// For every split, the nodes of the lower-dimension branch must lie on the
/// split hyperplane and the nodes of the lower-degree branch must avoid it.
fn check_separation(asm: &Assembly) -> Result<()> {
    let (Some(tree), Some(hyp)) = (&asm.tree, &asm.hyperplanes) else { return Ok(()) };
    // Node range of every vertex, filled bottom-up (children follow parents
    // in pre-order, so a reverse sweep sees children first).
    let mut ranges: Vec<Range<usize>> = vec![0..0; tree.len()];
    for (leaf, r) in &asm.leaf_ranges {
        ranges[*leaf] = r.clone();
    }
    for v in (0..tree.len()).rev() {
        let node = tree.vertex(v);
        if let (Some(u), Some(w)) = (node.lower_degree, node.lower_dim) {
            ranges[v] = ranges[u].start.min(ranges[w].start)..ranges[u].end.max(ranges[w].end);
        }
    }
    let nodes = &asm.construction;
    for v in 0..tree.len() {
        let node = tree.vertex(v);
        let (Some(u), Some(w)) = (node.lower_degree, node.lower_dim) else { continue };
        let h = hyp.split_of(v).expect("interior vertex has a split");
        let scale = 1.0 + h.base.iter().map(|b| b.abs()).fold(0.0, f64::max);
        for i in ranges[w].clone() {
            let value = h.eval(nodes.point(i));
            if value.abs() > SEPARATION_TOLERANCE * scale {
                return Err(Error::IllPosedGeometry {
                    node: nodes.point(i).to_vec(),
                    hyperplane: h.eps.to_string(),
                    value,
                });
            }
        }
        for i in ranges[u].clone() {
            let value = h.eval(nodes.point(i));
            if !(value.abs() > SEPARATION_TOLERANCE) {
                return Err(Error::Config(format!(
                    "node {:?} of branch {} lies on split hyperplane {} (value {value:e}); \
                     adjust lambda or the linear offset",
                    nodes.point(i),
                    tree.vertex(u).eps,
                    h.eps
                )));
            }
        }
    }
    Ok(())
}

/// Writes `m,n,count` followed by one row per node: coordinates with 17
/// significant digits, then the leaf bit string.
pub fn write_node_file<W: Write>(mut w: W, nodes: &NodeSet, n: usize) -> Result<()> {
    writeln!(w, "{},{},{}", nodes.dim(), n, nodes.len())?;
    for (p, label) in nodes.iter() {
        for x in p {
            write!(w, "{x:.16e},")?;
        }
        writeln!(w, "{label}")?;
    }
    Ok(())
}

/// Parses a node file; returns `(n, nodes)`.
pub fn read_node_file<R: BufRead>(r: R) -> Result<(usize, NodeSet)> {
    let mut lines = r.lines().enumerate();
    let parse_err = |line: usize, message: String| Error::Parse { line: line + 1, message };
    let (_, header) = lines.next().ok_or_else(|| parse_err(0, "empty node file".into()))?;
    let header = header?;
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.len() != 3 {
        return Err(parse_err(0, format!("header must be `m,n,count`, got {header:?}")));
    }
    let num = |i: usize, name: &str| {
        fields[i]
            .trim()
            .parse::<usize>()
            .map_err(|_| parse_err(0, format!("field `{name}`: not a non-negative integer: {:?}", fields[i])))
    };
    let (m, n, count) = (num(0, "m")?, num(1, "n")?, num(2, "count")?);
    if m == 0 {
        return Err(parse_err(0, "field `m`: must be at least 1".into()));
    }
    let mut set = NodeSet::with_capacity(m, count);
    let mut point = vec![0.0; m];
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != m + 1 {
            return Err(parse_err(i, format!("expected {} fields, got {}", m + 1, fields.len())));
        }
        for (j, f) in fields[..m].iter().enumerate() {
            point[j] =
                f.trim().parse().map_err(|_| parse_err(i, format!("coordinate {}: not a number: {f:?}", j + 1)))?;
        }
        let label: BitString = fields[m].parse().map_err(|e| parse_err(i, format!("provenance: {e}")))?;
        set.push(&point, &label);
    }
    if set.len() != count {
        return Err(Error::CountMismatch { expected: count, got: set.len() });
    }
    Ok((n, set))
}
