//! Lowest eigenpairs of symmetric tridiagonal operators.
//!
//! Eigenvalues come from Sturm-count bisection (robust down to gaps far below
//! the eigenvalue scale); eigenvectors from inverse iteration with partial
//! pivoting and re-orthogonalization inside near-degenerate clusters.

use crate::error::{Error, Result};
use crate::tridiag::TridiagonalOperator;

/// Pivot floor protecting the Sturm recurrence and the shifted solves.
const PIVMIN: f64 = 1e-305;

/// Relative eigenvalue separation below which two states are treated as a
/// cluster for inverse iteration.
const CLUSTER_REL: f64 = 1e-7;

/// Number of eigenvalues of `T` at or below `x`, by the LDL^T inertia count.
/// Tiny pivots are clamped to `-PIVMIN` before their sign is read, so the
/// count is exact for a matrix within `PIVMIN` of `T`.
fn count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    let mut q = d[0] - x;
    if q.abs() < PIVMIN {
        q = -PIVMIN;
    }
    let mut count = usize::from(q <= 0.0);
    for i in 1..n {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < PIVMIN {
            q = -PIVMIN;
        }
        if q <= 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` lowest eigenvalues (ascending) by bisection, accurate to a few ulps
/// of the operator norm.
pub fn lowest_eigenvalues(op: &TridiagonalOperator, k: usize) -> Vec<f64> {
    assert!(op.is_symmetric(), "eigensolver requires a symmetric operator");
    let n = op.dim();
    let k = k.min(n);
    let (d, e) = (op.diagonal(), op.off_diagonal());
    let radius = op.gershgorin_radius();
    let scale = radius.max(PIVMIN);
    let mut values = Vec::with_capacity(k);
    for j in 0..k {
        let (mut lo, mut hi) = (-radius - scale * 1e-12, radius + scale * 1e-12);
        // Invariant: count(lo) <= j < count(hi).
        while hi - lo > 4.0 * f64::EPSILON * scale {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(d, e, mid) <= j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        values.push(0.5 * (lo + hi));
    }
    values
}

/// Solve `(T - shift) x = b` in place by Gaussian elimination with partial
/// pivoting (fill-in limited to a second superdiagonal). `pivot_floor`
/// bounds the inverse-iteration growth per singular pivot so the solution
/// stays far from f64 overflow.
fn solve_shifted(d: &[f64], e: &[f64], shift: f64, b: &mut [f64], pivot_floor: f64) {
    let n = d.len();
    if n == 1 {
        let mut p = d[0] - shift;
        if p.abs() < pivot_floor {
            p = pivot_floor;
        }
        b[0] /= p;
        return;
    }
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut gamma = vec![0.0; n];
    // Current row of the elimination front: (p, q, r).
    let mut p = d[0] - shift;
    let mut q = e[0];
    let mut r = 0.0;
    for i in 0..n - 1 {
        let sub = e[i];
        let next_d = d[i + 1] - shift;
        let next_e = if i + 2 < n { e[i + 1] } else { 0.0 };
        if sub.abs() > p.abs() {
            // Pivot on the subdiagonal row.
            alpha[i] = sub;
            beta[i] = next_d;
            gamma[i] = next_e;
            b.swap(i, i + 1);
            let m = p / sub;
            p = q - m * next_d;
            q = r - m * next_e;
            r = 0.0;
            b[i + 1] -= m * b[i];
        } else {
            let piv = if p.abs() < pivot_floor {
                pivot_floor.copysign(if p == 0.0 { 1.0 } else { p })
            } else {
                p
            };
            alpha[i] = piv;
            beta[i] = q;
            gamma[i] = r;
            let m = sub / piv;
            p = next_d - m * q;
            q = next_e - m * r;
            r = 0.0;
            b[i + 1] -= m * b[i];
        }
    }
    alpha[n - 1] = if p.abs() < pivot_floor { pivot_floor } else { p };
    // Back substitution.
    b[n - 1] /= alpha[n - 1];
    if n >= 2 {
        b[n - 2] = (b[n - 2] - beta[n - 2] * b[n - 1]) / alpha[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - beta[i] * b[i + 1] - gamma[i] * b[i + 2]) / alpha[i];
    }
}

/// Overflow-safe unit normalization: scale by the largest magnitude first
/// (inverse iteration legitimately produces entries near 1e300).
fn normalize(v: &mut [f64]) -> f64 {
    let max = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if max == 0.0 || !max.is_finite() {
        return 0.0;
    }
    for x in v.iter_mut() {
        *x /= max;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    norm * max
}

fn orthogonalize(v: &mut [f64], basis: &[&[f64]]) {
    for u in basis {
        let dot: f64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
        for (x, y) in v.iter_mut().zip(u.iter()) {
            *x -= dot * y;
        }
    }
}

/// Deterministic start vector (splitmix64 stream).
fn seeded_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(0x243f6a8885a308d3);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    (0..n).map(|_| (next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5).collect()
}

/// The `k` lowest eigenpairs. Eigenvalues ascend; eigenvectors are unit
/// normalized, mutually orthogonal, and sign-fixed so the entry of largest
/// magnitude is positive.
pub fn lowest_eigenpairs(
    op: &TridiagonalOperator,
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.dim();
    let k = k.min(n);
    let values = lowest_eigenvalues(op, k);
    let (d, e) = (op.diagonal(), op.off_diagonal());
    let scale = op.gershgorin_radius().max(PIVMIN);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);

    for (j, &lambda) in values.iter().enumerate() {
        // Members of this state's near-degenerate cluster, for orthogonalization.
        let cluster: Vec<&[f64]> = (0..j)
            .filter(|&i| (values[i] - lambda).abs() < CLUSTER_REL * scale)
            .map(|i| vectors[i].as_slice())
            .collect();
        // Distinct shift within an exactly degenerate cluster.
        let shift = lambda + cluster.len() as f64 * 2.0 * f64::EPSILON * scale;

        let pivot_floor = (1e-20 * scale).max(PIVMIN);
        let mut v = seeded_vector(n, 0x5eed + j as u64);
        normalize(&mut v);
        let mut residual = f64::INFINITY;
        let mut best = v.clone();
        for round in 0..12 {
            orthogonalize(&mut v, &cluster);
            if normalize(&mut v) == 0.0 {
                v = seeded_vector(n, 0xabcd + (j + round) as u64);
                normalize(&mut v);
                continue;
            }
            solve_shifted(d, e, shift, &mut v, pivot_floor);
            orthogonalize(&mut v, &cluster);
            if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
                v = seeded_vector(n, 0xf00d + (j + round) as u64);
                normalize(&mut v);
                continue;
            }
            // Residual || T v - lambda v ||.
            let mut tv = vec![0.0; n];
            op.apply(&v, &mut tv);
            let res = tv
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if res < residual {
                residual = res;
                best.copy_from_slice(&v);
            }
            if res <= 1e-13 * scale * (n as f64).sqrt() {
                break;
            }
        }
        if residual > 1e-8 * scale {
            return Err(Error::Convergence(format!(
                "inverse iteration failed for eigenpair {j}: residual {residual:.3e} at scale {scale:.3e}"
            )));
        }
        // Deterministic sign.
        let (mut imax, mut amax) = (0, 0.0);
        for (i, &x) in best.iter().enumerate() {
            if x.abs() > amax {
                amax = x.abs();
                imax = i;
            }
        }
        if best[imax] < 0.0 {
            for x in best.iter_mut() {
                *x = -*x;
            }
        }
        vectors.push(best);
    }
    Ok((values, vectors))
}
