//! Dense multivariate polynomials over the canonical monomial order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::{self, Reservation};
use crate::monomials::{build_order, MonomialOrder, MultiIndex};

/// Tolerance on `| |xi| - 1 |` for direction vectors.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Ordering tag written into polynomial files.
pub const ORDERING_TAG: &str = "graded-lex-eqC";

/// A polynomial of degree at most `degree` stored as a dense coefficient
/// vector of length `N(m, degree)` in canonical order.
///
/// The monomial table is shared: every polynomial in one computation points
/// at the same [`MonomialOrder`], whose maximum degree bounds how far
/// [`MultiPoly::mul_linear`] may raise the degree.
#[derive(Debug)]
pub struct MultiPoly {
    space: Arc<MonomialOrder>,
    degree: usize,
    coeffs: Vec<f64>,
    _tracked: Reservation,
}

impl Clone for MultiPoly {
    fn clone(&self) -> Self {
        MultiPoly::from_parts(self.space.clone(), self.degree, self.coeffs.clone())
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.degree == other.degree && self.coeffs == other.coeffs
    }
}

impl MultiPoly {
    fn from_parts(space: Arc<MonomialOrder>, degree: usize, coeffs: Vec<f64>) -> Self {
        let tracked = Reservation::new(coeffs.len());
        MultiPoly { space, degree, coeffs, _tracked: tracked }
    }

    /// Zero polynomial of degree bound `degree` in `space`.
    pub fn zero(space: &Arc<MonomialOrder>, degree: usize) -> Result<Self> {
        check_degree(space, degree)?;
        Ok(Self::from_parts(space.clone(), degree, vec![0.0; space.prefix_len(degree)]))
    }

    pub fn constant(space: &Arc<MonomialOrder>, value: f64) -> Self {
        Self::from_parts(space.clone(), 0, vec![value])
    }

    /// Wraps a coefficient vector of length `N(m, degree)`.
    pub fn with_coeffs(space: &Arc<MonomialOrder>, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_degree(space, degree)?;
        let want = space.prefix_len(degree);
        if coeffs.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: coeffs.len() });
        }
        Ok(Self::from_parts(space.clone(), degree, coeffs))
    }

    /// Builds a polynomial in a fresh `(m, n)` space.
    pub fn from_coeffs(m: usize, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let space = Arc::new(build_order(m, n)?);
        Self::with_coeffs(&space, n, coeffs)
    }

    /// `c0 + <c, x>`.
    pub fn linear(space: &Arc<MonomialOrder>, c0: f64, c: &[f64]) -> Result<Self> {
        if c.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: c.len() });
        }
        let mut coeffs = Vec::with_capacity(c.len() + 1);
        coeffs.push(c0);
        coeffs.extend_from_slice(c);
        Self::with_coeffs(space, 1, coeffs)
    }

    /// `<normal, x - base>`, the degree-one polynomial vanishing on a hyperplane.
    pub fn hyperplane(space: &Arc<MonomialOrder>, normal: &[f64], base: &[f64]) -> Result<Self> {
        Self::linear(space, -dot(normal, base), normal)
    }

    pub fn space(&self) -> &Arc<MonomialOrder> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Degree bound `n` of the representation.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of one monomial, zero when it is beyond the degree bound.
    pub fn coeff(&self, idx: &MultiIndex) -> Result<f64> {
        if idx.order() > self.degree {
            return Ok(0.0);
        }
        Ok(self.coeffs[self.space.position_of(idx)?])
    }

    /// Largest `k` with a nonzero degree-`k` block, `None` for the zero polynomial.
    pub fn effective_degree(&self) -> Option<usize> {
        (0..=self.degree).rev().find(|&k| self.coeffs[self.space.block(k)].iter().any(|&c| c != 0.0))
    }

    /// Largest `k` whose block has an entry above `tol` in magnitude.
    pub fn effective_degree_tol(&self, tol: f64) -> Option<usize> {
        (0..=self.degree).rev().find(|&k| self.coeffs[self.space.block(k)].iter().any(|&c| c.abs() > tol))
    }

    /// Returns `sum_i c_i P_{I_i}(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut scratch = Scratch::new(self.coeffs.len());
        Ok(self.evaluate_with(x, &mut scratch))
    }

    /// Evaluation reusing a caller-owned monomial buffer.
    pub fn evaluate_with(&self, x: &[f64], scratch: &mut Scratch) -> f64 {
        let len = self.coeffs.len();
        scratch.ensure(len);
        let buf = &mut scratch.buf[..len];
        self.space.fill_monomials(x, self.degree, buf);
        instrument::count_ops(len as u64);
        buf.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Coefficient-wise sum; the lower-degree vector embeds as a prefix.
    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let space = wider_space(self, other, self.degree.max(other.degree))?;
        let degree = self.degree.max(other.degree);
        let mut coeffs = vec![0.0; space.prefix_len(degree)];
        coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        for (c, o) in coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        instrument::count_ops(other.coeffs.len() as u64);
        Ok(MultiPoly::from_parts(space, degree, coeffs))
    }

    /// In-place `self += other`, growing the degree bound when needed.
    pub fn add_assign(&mut self, other: &MultiPoly) -> Result<()> {
        if other.degree > self.degree {
            let space = wider_space(self, other, other.degree)?;
            let mut coeffs = std::mem::take(&mut self.coeffs);
            coeffs.resize(space.prefix_len(other.degree), 0.0);
            *self = MultiPoly::from_parts(space, other.degree, coeffs);
        } else if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        instrument::count_ops(other.coeffs.len() as u64);
        Ok(())
    }

    pub fn scale(&self, factor: f64) -> MultiPoly {
        instrument::count_ops(self.coeffs.len() as u64);
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        MultiPoly::from_parts(self.space.clone(), self.degree, coeffs)
    }

    /// Exact product with a polynomial of effective degree at most one.
    ///
    /// Costs `(m + 1) N(m, deg q)` multiply-adds.
    pub fn mul_linear(&self, l: &MultiPoly) -> Result<MultiPoly> {
        if l.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: l.dim() });
        }
        if l.effective_degree().unwrap_or(0) > 1 {
            return Err(Error::Degenerate("mul_linear expects a factor of degree at most one".into()));
        }
        let m = self.dim();
        let c0 = l.coeffs[0];
        let lin: Vec<f64> = (0..m).map(|j| l.coeffs.get(1 + j).copied().unwrap_or(0.0)).collect();
        let degree = self.degree + 1;
        let space = wider_space(self, l, degree)?;
        let mut out = vec![0.0; space.prefix_len(degree)];
        for (pos, &c) in self.coeffs.iter().enumerate() {
            out[pos] += c0 * c;
            for (j, &lj) in lin.iter().enumerate() {
                out[space.shift(pos, j)] += lj * c;
            }
        }
        instrument::count_ops(((m + 1) * self.coeffs.len()) as u64);
        Ok(MultiPoly::from_parts(space, degree, out))
    }

    /// The polynomial `x -> q(A x + b)`, same degree bound.
    pub fn compose_affine(&self, t: &AffineMap) -> Result<MultiPoly> {
        let m = self.dim();
        if t.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, got: t.dim() });
        }
        let space = self.space.clone();
        let images: Vec<MultiPoly> =
            (0..m).map(|j| MultiPoly::linear(&space, t.b[j], &t.a[j * m..(j + 1) * m])).collect::<Result<_>>()?;
        let mut result = vec![0.0; self.coeffs.len()];
        let _tracked = Reservation::new(result.len());
        result[0] = self.coeffs[0];

        // Depth-first walk over monomials: the children of I are I + e_j for
        // j at or after the last nonzero exponent of I, so each monomial is
        // reached once and the stack never holds more than `degree` images.
        struct Frame {
            pos: usize,
            image: MultiPoly,
            next_j: usize,
        }
        let mut stack: Vec<Frame> = Vec::with_capacity(self.degree);
        if self.degree > 0 {
            stack.push(Frame { pos: 0, image: MultiPoly::constant(&space, 1.0), next_j: 0 });
        }
        while let Some(top) = stack.last_mut() {
            if top.next_j >= m {
                stack.pop();
                continue;
            }
            let j = top.next_j;
            top.next_j += 1;
            let child_pos = space.shift(top.pos, j);
            let image = top.image.mul_linear(&images[j])?;
            let c = self.coeffs[child_pos];
            if c != 0.0 {
                for (r, v) in result.iter_mut().zip(image.coeffs()) {
                    *r += c * v;
                }
                instrument::count_ops(image.coeffs.len() as u64);
            }
            if image.degree < self.degree {
                stack.push(Frame { pos: child_pos, image, next_j: j });
            }
        }
        Ok(MultiPoly::from_parts(space, self.degree, result))
    }

    pub fn to_file(&self) -> PolyFile {
        PolyFile {
            m: self.dim(),
            n: self.degree,
            ordering: ORDERING_TAG.to_string(),
            coefficients: self.coeffs.clone(),
        }
    }
}

fn check_degree(space: &MonomialOrder, degree: usize) -> Result<()> {
    if degree > space.max_degree() {
        return Err(Error::DegreeOverflow { degree, bound: space.max_degree() });
    }
    Ok(())
}

/// Picks whichever operand's table can hold `degree`.
fn wider_space(a: &MultiPoly, b: &MultiPoly, degree: usize) -> Result<Arc<MonomialOrder>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let best = if a.space.max_degree() >= b.space.max_degree() { &a.space } else { &b.space };
    check_degree(best, degree)?;
    Ok(best.clone())
}

/// Reusable monomial buffer for repeated evaluation.
#[derive(Debug, Default)]
pub struct Scratch {
    buf: Vec<f64>,
    _tracked: Option<Reservation>,
}

impl Scratch {
    pub fn new(len: usize) -> Self {
        Scratch { buf: vec![0.0; len], _tracked: Some(Reservation::new(len)) }
    }

    fn ensure(&mut self, len: usize) {
        if self.buf.len() < len {
            *self = Scratch::new(len);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An invertible affine map `x -> A x + b` with `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl AffineMap {
    /// Pivot tolerance, relative to the largest entry of `A`, for the rank check.
    pub const RANK_TOLERANCE: f64 = 1e-12;

    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let m = b.len();
        if a.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, got: a.len() });
        }
        let map = AffineMap { a, b };
        map.inverse_matrix()?;
        Ok(map)
    }

    pub fn identity(m: usize) -> Self {
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            a[i * m + i] = 1.0;
        }
        AffineMap { a, b: vec![0.0; m] }
    }

    pub fn translation(b: Vec<f64>) -> Self {
        let mut t = AffineMap::identity(b.len());
        t.b = b;
        t
    }

    /// `x -> diag(scale) x + shift`.
    pub fn diagonal(scale: &[f64], shift: Vec<f64>) -> Result<Self> {
        let m = scale.len();
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            a[i * m + i] = scale[i];
        }
        AffineMap::new(a, shift)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m).map(|i| dot(&self.a[i * m..(i + 1) * m], x) + self.b[i]).collect()
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = self.inverse_matrix()?;
        let m = self.dim();
        let b = (0..m).map(|i| -dot(&inv[i * m..(i + 1) * m], &self.b)).collect();
        Ok(AffineMap { a: inv, b })
    }

    /// Gauss-Jordan with partial pivoting; rejects rank-deficient matrices.
    fn inverse_matrix(&self) -> Result<Vec<f64>> {
        let m = self.dim();
        let scale = self.a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let mut work = self.a.clone();
        let mut inv = AffineMap::identity(m).a;
        for col in 0..m {
            let (piv_row, piv) = (col..m).map(|r| (r, work[r * m + col].abs())).fold((col, -1.0), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
            if !(piv > Self::RANK_TOLERANCE * scale) {
                return Err(Error::RankDeficient { column: col, pivot: piv.max(0.0) });
            }
            for k in 0..m {
                work.swap(col * m + k, piv_row * m + k);
                inv.swap(col * m + k, piv_row * m + k);
            }
            let p = work[col * m + col];
            for k in 0..m {
                work[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r != col {
                    let f = work[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            work[r * m + k] -= f * work[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        Ok(inv)
    }
}

/// `sum_i coeffs[i] * <x - base, dir>^i` as a polynomial in `space`.
pub fn embed_univariate_in(space: &Arc<MonomialOrder>, coeffs: &[f64], dir: &[f64], base: &[f64]) -> Result<MultiPoly> {
    let m = space.dim();
    if dir.len() != m || base.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: dir.len().min(base.len()) });
    }
    let norm = dot(dir, dir).sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitDirection { norm });
    }
    if coeffs.is_empty() {
        return MultiPoly::zero(space, 0);
    }
    check_degree(space, coeffs.len() - 1)?;
    let mut q = MultiPoly::constant(space, coeffs[coeffs.len() - 1]);
    if coeffs.len() == 1 {
        return Ok(q);
    }
    let t = MultiPoly::hyperplane(space, dir, base)?;
    for &c in coeffs.iter().rev().skip(1) {
        q = q.mul_linear(&t)?;
        q.coeffs[0] += c;
    }
    Ok(q)
}

/// Like [`embed_univariate_in`] with a fresh space sized for the degree.
pub fn embed_univariate(coeffs: &[f64], dir: &[f64], base: &[f64]) -> Result<MultiPoly> {
    let space = Arc::new(build_order(dir.len(), coeffs.len().saturating_sub(1))?);
    embed_univariate_in(&space, coeffs, dir, base)
}

/// On-disk polynomial document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFile {
    pub m: usize,
    pub n: usize,
    pub ordering: String,
    pub coefficients: Vec<f64>,
}

impl PolyFile {
    pub fn into_poly(self) -> Result<MultiPoly> {
        if self.ordering != ORDERING_TAG {
            return Err(Error::Parse {
                line: 1,
                message: format!("field `ordering`: expected {ORDERING_TAG:?}, got {:?}", self.ordering),
            });
        }
        MultiPoly::from_coeffs(self.m, self.n, self.coefficients)
            .map_err(|e| Error::Parse { line: 1, message: format!("field `coefficients`: {e}") })
    }
}
