//! Dense Vandermonde baselines: the matrix itself, a pivoted LU solve, an
//! explicit inverse, and the genericity/conditioning oracle.
//!
//! Factorizations use faer's partial-pivoting LU in place; the row-major
//! input is transposed in place to the column-major layout faer is tuned for. Multiply-add counts reported to [`crate::instrument`] are those of
//! the textbook algorithms, so they do not depend on faer's blocking.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor, inverse as lu_inverse, solve};
use faer::perm::PermRef;
use faer::{MatMut, MatRef, Par};

use crate::error::{Error, Result};
use crate::instrument::{self, Reservation};
use crate::monomials::{build_order, count_total};
use crate::nodegen::NodeSet;

/// Pivots at or below this fraction of the largest entry mark a singular matrix.
pub const SINGULAR_THRESHOLD: f64 = 1e-13;

/// Largest `N` for which [`genericity_check`] computes the 1-norm condition number.
pub const COND1_MAX_N: usize = 3000;

/// Largest `N` for which [`genericity_check`] computes the 2-norm condition number.
pub const COND2_MAX_N: usize = 300;

/// Row-major dense matrix.
#[derive(Debug)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    _tracked: Reservation,
}

impl Clone for DenseMatrix {
    fn clone(&self) -> Self {
        DenseMatrix::from_vec(self.rows, self.cols, self.data.clone())
    }
}

impl PartialEq for DenseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl DenseMatrix {
    fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        let tracked = Reservation::new(data.len());
        DenseMatrix { rows, cols, data, _tracked: tracked }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix::from_vec(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(DenseMatrix::from_vec(rows.len(), cols, data))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a != 0.0 {
                    for j in 0..other.cols {
                        out.data[i * other.cols + j] += a * other.get(k, j);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    fn check_square(&self) -> Result<usize> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        Ok(self.rows)
    }
}

/// `V[i][j]` = monomial `j` (canonical order) at node `i`.
pub fn build_vandermonde(nodes: &NodeSet, m: usize, n: usize) -> Result<DenseMatrix> {
    if nodes.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: nodes.dim() });
    }
    let total = count_total(m, n)?;
    if nodes.len() != total {
        return Err(Error::CountMismatch { expected: total, got: nodes.len() });
    }
    let order = build_order(m, n)?;
    let mut v = DenseMatrix::zeros(total, total);
    for (i, (p, _)) in nodes.iter().enumerate() {
        order.fill_monomials(p, n, &mut v.data[i * total..(i + 1) * total]);
    }
    Ok(v)
}

/// Multiply-adds of textbook partial-pivoting LU on an `n x n` matrix.
pub fn lu_op_count(n: usize) -> u64 {
    let n = n as u64;
    // sum_{k=1}^{n-1} (n - k)^2 = (n-1) n (2n-1) / 6
    if n == 0 {
        0
    } else {
        (n - 1) * n * (2 * n - 1) / 6
    }
}

/// LU factors of a square matrix stored in place, column-major: strictly
/// lower part is `L` (unit diagonal implied), upper part is `U`.
struct LuFactors {
    n: usize,
    data: Vec<f64>,
    fwd: Vec<usize>,
    bwd: Vec<usize>,
    _tracked: Reservation,
}

/// Square transpose, swapping in cache-sized tiles.
fn transpose_in_place(data: &mut [f64], n: usize) {
    const TILE: usize = 32;
    for bi in (0..n).step_by(TILE) {
        for bj in (bi..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + TILE).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

impl LuFactors {
    /// Factors the row-major `n x n` matrix `data`.
    fn factor(mut data: Vec<f64>, n: usize) -> Self {
        let tracked = Reservation::new(data.len());
        transpose_in_place(&mut data, n);
        let mut fwd = vec![0usize; n];
        let mut bwd = vec![0usize; n];
        if n > 0 {
            let a = MatMut::from_column_major_slice_mut(&mut data, n, n);
            let par = Par::Seq;
            let mut mem = MemBuffer::new(factor::lu_in_place_scratch::<usize, f64>(n, n, par, Default::default()));
            let stack = MemStack::new(&mut mem);
            factor::lu_in_place(a, &mut fwd, &mut bwd, par, stack, Default::default());
        }
        instrument::count_ops(lu_op_count(n));
        LuFactors { n, data, fwd, bwd, _tracked: tracked }
    }

    fn pivot(&self, j: usize) -> f64 {
        self.data[j * self.n + j]
    }

    /// First column whose pivot fails `|u_jj| > threshold`.
    fn first_small_pivot(&self, threshold: f64) -> Option<(usize, f64)> {
        (0..self.n).map(|j| (j, self.pivot(j).abs())).find(|&(_, p)| !(p > threshold))
    }

    fn mat(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.n, self.n)
    }

    fn perm(&self) -> PermRef<'_, usize> {
        PermRef::new_checked(&self.fwd, &self.bwd, self.n)
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = self.n;
        if n == 0 {
            return;
        }
        let par = Par::Seq;
        let mut mem = MemBuffer::new(solve::solve_in_place_scratch::<usize, f64>(n, 1, par));
        let stack = MemStack::new(&mut mem);
        let b = MatMut::from_column_major_slice_mut(rhs, n, 1);
        solve::solve_in_place(self.mat(), self.mat(), self.perm(), b, par, stack);
        instrument::count_ops((n * n) as u64);
    }

    fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n, n);
        if n > 0 {
            let par = Par::Seq;
            let mut mem = MemBuffer::new(lu_inverse::inverse_scratch::<usize, f64>(n, par));
            let stack = MemStack::new(&mut mem);
            let dst = MatMut::from_column_major_slice_mut(&mut out.data, n, n);
            lu_inverse::inverse(dst, self.mat(), self.mat(), self.perm(), par, stack);
            transpose_in_place(&mut out.data, n);
        }
        instrument::count_ops((n as u64).pow(3));
        out
    }

    fn log_abs_det(&self) -> f64 {
        (0..self.n).map(|j| self.pivot(j).abs().ln()).sum()
    }
}

/// Solution of a dense solve plus its residual `||V x - rhs||_inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct LuSolution {
    pub x: Vec<f64>,
    pub residual_inf: f64,
}

/// Solves `V x = rhs` by partial-pivoting LU.
pub fn lu_solve(v: &DenseMatrix, rhs: &[f64]) -> Result<LuSolution> {
    let n = v.check_square()?;
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let threshold = SINGULAR_THRESHOLD * v.norm_max();
    let lu = LuFactors::factor(v.data.clone(), n);
    if let Some((column, pivot)) = lu.first_small_pivot(threshold) {
        return Err(Error::SingularMatrix { column, pivot, threshold });
    }
    let mut x = rhs.to_vec();
    lu.solve(&mut x);
    let residual_inf = v.mul_vec(&x).iter().zip(rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(LuSolution { x, residual_inf })
}

/// Explicit inverse via LU.
pub fn invert(v: &DenseMatrix) -> Result<DenseMatrix> {
    let n = v.check_square()?;
    let threshold = SINGULAR_THRESHOLD * v.norm_max();
    let lu = LuFactors::factor(v.data.clone(), n);
    if let Some((column, pivot)) = lu.first_small_pivot(threshold) {
        return Err(Error::SingularMatrix { column, pivot, threshold });
    }
    Ok(lu.inverse())
}

/// `||V||_1 ||V^-1||_1`, or infinity when `V` fails the pivot test.
pub fn condition_number_1(v: &DenseMatrix) -> f64 {
    match invert(v) {
        Ok(inv) => v.norm_1() * inv.norm_1(),
        Err(_) => f64::INFINITY,
    }
}

/// Singular values in descending order by one-sided Jacobi rotations.
pub fn singular_values(v: &DenseMatrix) -> Vec<f64> {
    let (rows, cols) = (v.rows, v.cols);
    // Work on columns: a[j] is column j.
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| v.get(i, j)).collect()).collect();
    let _tracked = Reservation::new(rows * cols);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = a[p]
                    .iter()
                    .zip(&a[q])
                    .fold((0.0, 0.0, 0.0), |(al, be, ga), (x, y)| (al + x * x, be + y * y, ga + x * y));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = a.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = a.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// `sigma_max / sigma_min`, infinity for a singular matrix.
pub fn condition_number_2(v: &DenseMatrix) -> f64 {
    let sv = singular_values(v);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Result of [`genericity_check`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GenericityReport {
    pub generic: bool,
    /// `ln |det V|` of the Vandermonde matrix of the given nodes.
    pub abs_det_log: f64,
    /// Smallest pivot of the normalized, equilibrated matrix.
    pub min_pivot: f64,
    /// First column whose pivot failed the threshold.
    pub failing_column: Option<usize>,
    /// 1-norm condition number; `None` when `N` exceeds [`COND1_MAX_N`].
    pub cond_1: Option<f64>,
    /// 2-norm condition number; `None` when `N` exceeds [`COND2_MAX_N`].
    pub cond_2: Option<f64>,
}

/// Decides whether `nodes` are unisolvent for degree `n`.
///
/// The test is scale free: nodes are mapped axis by axis onto `[-1, 1]`,
/// the Vandermonde columns are scaled to unit maximum, and the set is generic
/// when every LU pivot exceeds [`SINGULAR_THRESHOLD`]. Unisolvence is
/// invariant under these affine and diagonal changes, so the verdict is that
/// of the original nodes; `abs_det_log` is converted back exactly.
/// Condition numbers are those of the unmodified matrix.
pub fn genericity_check(nodes: &NodeSet, m: usize, n: usize) -> Result<GenericityReport> {
    let total = count_total(m, n)?;
    if nodes.len() != total {
        return Err(Error::CountMismatch { expected: total, got: nodes.len() });
    }
    if nodes.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: nodes.dim() });
    }
    let order = build_order(m, n)?;
    let bb = nodes.bounding_box();
    let (center, half): (Vec<f64>, Vec<f64>) = bb
        .iter()
        .map(|&(lo, hi)| {
            let h = (hi - lo) / 2.0;
            ((hi + lo) / 2.0, if h > 0.0 { h } else { 1.0 })
        })
        .unzip();

    let (generic, min_pivot, failing_column, abs_det_log) = {
        let mut data = vec![0.0; total * total];
        let mut p = vec![0.0; m];
        for (i, (x, _)) in nodes.iter().enumerate() {
            for k in 0..m {
                p[k] = (x[k] - center[k]) / half[k];
            }
            order.fill_monomials(&p, n, &mut data[i * total..(i + 1) * total]);
        }
        let mut col_scale = vec![0.0f64; total];
        for row in data.chunks(total) {
            for (s, v) in col_scale.iter_mut().zip(row) {
                *s = s.max(v.abs());
            }
        }
        for s in col_scale.iter_mut() {
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        for row in data.chunks_mut(total) {
            for (v, s) in row.iter_mut().zip(&col_scale) {
                *v /= s;
            }
        }
        let lu = LuFactors::factor(data, total);
        let failing = lu.first_small_pivot(SINGULAR_THRESHOLD);
        let min_pivot = (0..total).map(|j| lu.pivot(j).abs()).fold(f64::INFINITY, f64::min);
        // V(x) = V(x') T with T block triangular, diagonal entries h^I.
        let log_h: f64 = (0..order.len())
            .map(|pos| order.exponents_at(pos).iter().zip(&half).map(|(&e, h)| e as f64 * h.ln()).sum::<f64>())
            .sum();
        let log_cols: f64 = col_scale.iter().map(|s| s.ln()).sum();
        let det = if failing.is_some() { f64::NEG_INFINITY } else { lu.log_abs_det() + log_cols + log_h };
        (failing.is_none(), min_pivot, failing.map(|f| f.0), det)
    };

    let (cond_1, cond_2) = if total <= COND1_MAX_N {
        let v = build_vandermonde(nodes, m, n)?;
        let c1 = if generic { condition_number_1(&v) } else { f64::INFINITY };
        let c2 = (total <= COND2_MAX_N).then(|| if generic { condition_number_2(&v) } else { f64::INFINITY });
        (Some(c1), c2)
    } else {
        (None, None)
    };
    Ok(GenericityReport { generic, abs_det_log, min_pivot, failing_column, cond_1, cond_2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[&[f64]]) -> NodeSet {
        NodeSet::from_points(&points.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn vandermonde_examples() {
        let v = build_vandermonde(&set(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]), 2, 1).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]]);
        let v = build_vandermonde(&set(&[&[0.0]]), 1, 0).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1.0]]);
        let v = build_vandermonde(&set(&[&[-1.0], &[0.0], &[1.0]]), 1, 2).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1.0, -1.0, 1.0], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]);
        assert!(matches!(build_vandermonde(&set(&[&[0.0]]), 1, 1), Err(Error::CountMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn lu_solve_examples() {
        let v = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]]).unwrap();
        let s = lu_solve(&v, &[1.0, 3.0, 0.0]).unwrap();
        assert!(close(&s.x, &[1.0, 2.0, -1.0], 1e-15));
        assert!(s.residual_inf < 1e-15);

        let rhs = [0.25, -3.0, 7.5, 1.0];
        assert_eq!(lu_solve(&DenseMatrix::identity(4), &rhs).unwrap().x, rhs);

        let v = DenseMatrix::from_rows(&[vec![1.0, -1.0, 1.0], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(close(&lu_solve(&v, &[1.0, 0.0, 1.0]).unwrap().x, &[0.0, 0.0, 1.0], 1e-15));
    }

    #[test]
    fn singular_solve_is_an_error() {
        let v = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(lu_solve(&v, &[1.0, 1.0]), Err(Error::SingularMatrix { column: 1, .. })));
        assert!(invert(&v).is_err());
        assert_eq!(condition_number_1(&v), f64::INFINITY);
    }

    #[test]
    fn inverse_examples() {
        let nodes = set(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let inv = invert(&build_vandermonde(&nodes, 3, 1).unwrap()).unwrap();
        let want = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 1.0, 0.0],
            vec![-1.0, 0.0, 0.0, 1.0],
        ];
        assert_eq!(inv.to_rows(), want);
        assert_eq!(invert(&DenseMatrix::identity(3)).unwrap(), DenseMatrix::identity(3));
        let v = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(invert(&v).unwrap().to_rows(), vec![vec![1.0, 0.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn genericity_examples() {
        let r = genericity_check(&set(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]), 2, 1).unwrap();
        assert!(!r.generic);
        assert_eq!(r.cond_1, Some(f64::INFINITY));

        let r = genericity_check(&set(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]), 2, 1).unwrap();
        assert!(r.generic);
        assert!(r.abs_det_log.abs() < 1e-14, "det log {}", r.abs_det_log);
        assert!(r.cond_1.unwrap() >= 1.0);
    }

    #[test]
    fn determinant_is_recovered_through_normalization() {
        // Univariate Vandermonde determinant: prod_{i<j} (x_j - x_i).
        let xs = [-3.0, 0.5, 2.0, 7.0];
        let nodes = NodeSet::from_coords(1, xs.to_vec()).unwrap();
        let mut want = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                want += f64::ln((xs[j] - xs[i]).abs());
            }
        }
        let r = genericity_check(&nodes, 1, 3).unwrap();
        assert!((r.abs_det_log - want).abs() < 1e-12);
    }

    #[test]
    fn singular_values_of_a_known_matrix() {
        let v = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![4.0, 5.0]]).unwrap();
        // Singular values of [[3,0],[4,5]] are 3 sqrt(5) and sqrt(5).
        let sv = singular_values(&v);
        assert!(close(&sv, &[3.0 * 5f64.sqrt(), 5f64.sqrt()], 1e-12));
        assert!((condition_number_2(&v) - 3.0).abs() < 1e-12);
    }
}
