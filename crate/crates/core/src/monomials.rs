//! Counting and enumerating monomials in the graded order used for every
//! coefficient vector in the crate.
//!
//! Monomials of degree at most `n` in `m` variables are listed by ascending
//! total degree. Inside one degree block the exponent tuples are sorted
//! lexicographically with the larger leading exponent first, so for `m = 2`,
//! `n = 2` the order is `1, x1, x2, x1^2, x1 x2, x2^2`.

use std::fmt;

use crate::error::{Error, Result};
use crate::instrument::{self, Reservation};

/// Binomial coefficient `C(a, b)` by the multiplicative formula with exact
/// division after every step. Returns `None` on overflow.
pub fn binomial(a: usize, b: usize) -> Option<usize> {
    if b > a {
        return Some(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// `N(m, n) = C(m + n, m)`: the number of monomials of degree at most `n` in
/// `m` variables.
pub fn count_total(m: usize, n: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::Config("dimension m must be at least 1".into()));
    }
    m.checked_add(n).and_then(|s| binomial(s, m)).ok_or(Error::Sizing { m, n })
}

/// `M(m, k)`: the number of monomials of exact degree `k` in `m` variables.
pub fn count_degree(m: usize, k: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::Config("dimension m must be at least 1".into()));
    }
    // C(m + k - 1, m - 1) equals C(m + k, m) - C(m + k - 1, m).
    (m - 1).checked_add(k).and_then(|s| binomial(s, m - 1)).ok_or(Error::Sizing { m, n: k })
}

/// Exponent tuple addressing one monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Config("a multi-index needs at least one variable".into()));
        }
        Ok(MultiIndex(exponents))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `#I`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// The canonical monomial table for `(m, n)` plus a shift table mapping
/// `(position of I, j)` to the position of `I + e_j`.
///
/// An order for `(m, n)` is a prefix of the order for `(m, n')` when
/// `n <= n'`, so one table serves every polynomial of degree at most `n`.
#[derive(Debug)]
pub struct MonomialOrder {
    m: usize,
    n: usize,
    exponents: Vec<u32>,
    shift: Vec<u32>,
    block_starts: Vec<usize>,
    _tracked: Reservation,
}

impl MonomialOrder {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn max_degree(&self) -> usize {
        self.n
    }

    /// Number of monomials, `N(m, n)`.
    pub fn len(&self) -> usize {
        self.block_starts[self.n + 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of monomials of degree at most `d` (a prefix length).
    pub fn prefix_len(&self, d: usize) -> usize {
        self.block_starts[d.min(self.n) + 1]
    }

    /// Half-open position range of the degree-`k` block.
    pub fn block(&self, k: usize) -> std::ops::Range<usize> {
        self.block_starts[k]..self.block_starts[k + 1]
    }

    /// Exponents of the monomial at `pos`.
    pub fn exponents_at(&self, pos: usize) -> &[u32] {
        &self.exponents[pos * self.m..(pos + 1) * self.m]
    }

    pub fn index_at(&self, pos: usize) -> MultiIndex {
        MultiIndex(self.exponents_at(pos).to_vec())
    }

    /// Position of `I + e_j` given the position of `I`; requires `#I < n`.
    #[inline]
    pub fn shift(&self, pos: usize, j: usize) -> usize {
        self.shift[pos * self.m + j] as usize
    }

    /// All multi-indices in canonical order.
    pub fn table(&self) -> Vec<MultiIndex> {
        (0..self.len()).map(|p| self.index_at(p)).collect()
    }

    /// Inverse of table lookup.
    pub fn position_of(&self, idx: &MultiIndex) -> Result<usize> {
        if idx.dim() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: idx.dim() });
        }
        let k = idx.order();
        if k > self.n {
            return Err(Error::IndexOutOfRange { order: k, bound: self.n });
        }
        Ok(rank_position(idx.exponents(), self.m, k))
    }

    /// Monomial values at `x` for every degree up to `degree`, written into
    /// `out[..prefix_len(degree)]`. Costs one multiplication per monomial.
    pub fn fill_monomials(&self, x: &[f64], degree: usize, out: &mut [f64]) {
        let m = self.m;
        out[0] = 1.0;
        let mut count = 0u64;
        for k in 1..=degree {
            let prev = self.block(k - 1);
            let mut dst = self.block_starts[k];
            for (j, &xj) in x.iter().enumerate().take(m) {
                // Degree k-1 monomials whose first j exponents vanish are the
                // trailing C(k - 1 + m - j - 1, m - j - 1) entries of the block.
                let len = binomial(k - 1 + m - j - 1, m - j - 1).unwrap_or(0);
                let src = prev.end - len;
                for s in src..prev.end {
                    out[dst] = xj * out[s];
                    dst += 1;
                }
                count += len as u64;
            }
        }
        instrument::count_ops(count);
    }
}

/// Position of an exponent tuple of total degree `k` in an `m`-variable order.
fn rank_position(exps: &[u32], m: usize, k: usize) -> usize {
    let offset = if k == 0 { 0 } else { binomial(m + k - 1, m).unwrap_or(0) };
    let mut rank = 0;
    let mut remaining = k;
    for (p, &e) in exps.iter().enumerate().take(m.saturating_sub(1)) {
        let e = e as usize;
        if remaining > e {
            let v = m - p - 1;
            rank += binomial(remaining - e - 1 + v, v).unwrap_or(0);
        }
        remaining -= e;
    }
    offset + rank
}

/// Builds the canonical order for `(m, n)`.
pub fn build_order(m: usize, n: usize) -> Result<MonomialOrder> {
    let total = count_total(m, n)?;
    if total.checked_mul(m).is_none_or(|v| v > u32::MAX as usize) {
        return Err(Error::Sizing { m, n });
    }
    let mut block_starts = Vec::with_capacity(n + 2);
    block_starts.push(0);
    for k in 0..=n {
        block_starts.push(block_starts[k] + count_degree(m, k)?);
    }

    let mut exponents = vec![0u32; total * m];
    for k in 1..=n {
        let prev = block_starts[k - 1]..block_starts[k];
        let mut dst = block_starts[k];
        for j in 0..m {
            let len = binomial(k - 1 + m - j - 1, m - j - 1).unwrap_or(0);
            for s in prev.end - len..prev.end {
                let (head, tail) = exponents.split_at_mut(dst * m);
                tail[..m].copy_from_slice(&head[s * m..(s + 1) * m]);
                tail[j] += 1;
                dst += 1;
            }
        }
    }

    let inner = if n == 0 { 0 } else { block_starts[n] };
    let mut shift = vec![0u32; inner * m];
    let mut scratch = vec![0u32; m];
    for pos in 0..inner {
        scratch.copy_from_slice(&exponents[pos * m..(pos + 1) * m]);
        let k: usize = scratch.iter().map(|&e| e as usize).sum();
        for j in 0..m {
            scratch[j] += 1;
            shift[pos * m + j] = rank_position(&scratch, m, k + 1) as u32;
            scratch[j] -= 1;
        }
    }

    let tracked = Reservation::new(exponents.len() + shift.len());
    Ok(MonomialOrder { m, n, exponents, shift, block_starts, _tracked: tracked })
}

/// Convenience wrapper around [`MonomialOrder::position_of`].
pub fn position_of(order: &MonomialOrder, idx: &MultiIndex) -> Result<usize> {
    order.position_of(idx)
}

/// The `k`-th symmetric power of `point`: all degree-`k` monomials evaluated
/// at `point`, in canonical order.
pub fn symmetric_power(point: &[f64], k: usize) -> Vec<f64> {
    let m = point.len();
    let mut block = vec![1.0];
    for d in 1..=k {
        let mut next = Vec::with_capacity(binomial(m + d - 1, m - 1).unwrap_or(0));
        for (j, &xj) in point.iter().enumerate() {
            let len = binomial(d - 1 + m - j - 1, m - j - 1).unwrap_or(0);
            next.extend(block[block.len() - len..].iter().map(|v| xj * v));
        }
        block = next;
    }
    block
}
