//! Real tridiagonal operators on the magnetization grid.

use num_complex::Complex64;

/// A real tridiagonal operator with `n` diagonal entries and `n - 1`
/// off-diagonal entries. Matrix-vector products cost O(n).
///
/// When `symmetric` is true the operator equals its transpose by
/// construction (a single off-diagonal array is shared by both sides).
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
    symmetric: bool,
}

impl TridiagonalOperator {
    pub fn new_symmetric(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Self {
        assert_eq!(off_diagonal.len() + 1, diagonal.len(), "off-diagonal length must be n - 1");
        Self { diagonal, off_diagonal, symmetric: true }
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `out = A x` for real vectors.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        debug_assert!(x.len() == n && out.len() == n);
        let d = &self.diagonal;
        let e = &self.off_diagonal;
        if n == 1 {
            out[0] = d[0] * x[0];
            return;
        }
        out[0] = d[0] * x[0] + e[0] * x[1];
        for i in 1..n - 1 {
            out[i] = e[i - 1] * x[i - 1] + d[i] * x[i] + e[i] * x[i + 1];
        }
        out[n - 1] = e[n - 2] * x[n - 2] + d[n - 1] * x[n - 1];
    }

    /// `out = A x` for complex vectors (the operator itself is real).
    pub fn apply_complex(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        debug_assert!(x.len() == n && out.len() == n);
        let d = &self.diagonal;
        let e = &self.off_diagonal;
        if n == 1 {
            out[0] = x[0] * d[0];
            return;
        }
        out[0] = x[0] * d[0] + x[1] * e[0];
        for i in 1..n - 1 {
            out[i] = x[i - 1] * e[i - 1] + x[i] * d[i] + x[i + 1] * e[i];
        }
        out[n - 1] = x[n - 2] * e[n - 2] + x[n - 1] * d[n - 1];
    }

    /// Quadratic form `x^T A x` for a real unit-normalized vector.
    pub fn expectation(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diagonal[i] * x[i] * x[i];
        }
        for i in 0..n - 1 {
            acc += 2.0 * self.off_diagonal[i] * x[i] * x[i + 1];
        }
        acc
    }

    /// Gershgorin bound on the spectral radius: `max_i (|d_i| + |e_{i-1}| + |e_i|)`.
    pub fn gershgorin_radius(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for i in 0..n {
            let mut row = self.diagonal[i].abs();
            if i > 0 {
                row += self.off_diagonal[i - 1].abs();
            }
            if i + 1 < n {
                row += self.off_diagonal[i].abs();
            }
            r = r.max(row);
        }
        r
    }
}
