//! Orthonormal frames `xi_1, ..., xi_m` that orient the decomposition.

use rand::Rng;

use crate::error::{Error, Result};
use crate::polynomial::dot;

/// Tolerance on `|<xi_i, xi_j> - delta_ij|`.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

/// An orthonormal basis of `R^m`. Axis `i` (0-based) is `xi_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    m: usize,
    axes: Vec<f64>,
}

impl Frame {
    /// The standard basis `e_1, ..., e_m`.
    pub fn standard(m: usize) -> Self {
        let mut axes = vec![0.0; m * m];
        for i in 0..m {
            axes[i * m + i] = 1.0;
        }
        Frame { m, axes }
    }

    /// Validates and wraps `axes`, one basis vector per entry.
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        let m = axes.len();
        if m == 0 {
            return Err(Error::Config("a frame needs at least one axis".into()));
        }
        for a in &axes {
            if a.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: a.len() });
            }
        }
        for i in 0..m {
            for j in i..m {
                let value = dot(&axes[i], &axes[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                if !((value - want).abs() <= ORTHONORMAL_TOLERANCE) {
                    return Err(Error::NonOrthonormalFrame { i: i + 1, j: j + 1, value });
                }
            }
        }
        Ok(Frame { m, axes: axes.concat() })
    }

    /// A random rotation: uniform entries orthonormalised by two passes of
    /// modified Gram-Schmidt.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        loop {
            let mut axes: Vec<Vec<f64>> = (0..m).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let mut ok = true;
            for i in 0..m {
                for _ in 0..2 {
                    for j in 0..i {
                        let (head, tail) = axes.split_at_mut(i);
                        let p = dot(&tail[0], &head[j]);
                        for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                            *a -= p * b;
                        }
                    }
                }
                let norm = dot(&axes[i], &axes[i]).sqrt();
                if norm < 1e-6 {
                    ok = false;
                    break;
                }
                axes[i].iter_mut().for_each(|v| *v /= norm);
            }
            if ok {
                if let Ok(frame) = Frame::new(axes) {
                    return frame;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Axis `i` (0-based), i.e. `xi_{i+1}`.
    pub fn axis(&self, i: usize) -> &[f64] {
        &self.axes[i * self.m..(i + 1) * self.m]
    }

    pub fn is_standard(&self) -> bool {
        *self == Frame::standard(self.m)
    }
}
