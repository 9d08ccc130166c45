//! Instantaneous spectra, gap extraction, and gap-scaling fits.
//!
//! For even p the Hamiltonian commutes with the reflection `k -> N - k` and
//! the evolving state only couples to its own parity sector, so the
//! dynamically relevant gap runs to the second excited state. States are
//! classified by the reflection expectation of their eigenvectors (not by
//! index), with near-degenerate clusters rotated into parity eigenstates
//! first. This survives the exponentially close even/odd pairs below the
//! transition.

use crate::eigen::{lowest_eigenpairs, lowest_eigenvalues};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::master::build_effective_hamiltonian;
use crate::model::ModelParams;
use crate::quantum::build_quantum_hamiltonian;
use crate::tridiag::TridiagonalOperator;

/// Lowest eigenvalues (and optional eigenvectors) at one control value.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    /// Control value the operator was built at (Gamma or T), when known.
    pub control: Option<f64>,
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

/// Scaling law fitted to per-size minimum gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingModel {
    /// `Delta ~ N^{-z}`.
    Power,
    /// `Delta ~ exp(-alpha N)`.
    Exponential,
}

/// Result of a gap-scaling fit over system sizes.
#[derive(Debug, Clone)]
pub struct GapScaling {
    pub model: ScalingModel,
    /// `z` (power) or `alpha` (exponential).
    pub exponent: f64,
    pub exponent_stderr: f64,
    /// Prefactor of the fitted law.
    pub amplitude: f64,
    /// L2 norm of the log-space fit residuals.
    pub residual_norm: f64,
    /// The fitted `(N, Delta_N)` data.
    pub data: Vec<(f64, f64)>,
}

/// Lowest `k` eigenpairs of a symmetric tridiagonal operator as a spectrum
/// slice (no control value attached).
pub fn tridiag_lowest_eigs(op: &TridiagonalOperator, k: usize) -> Result<SpectrumSlice> {
    let (vals, vecs) = lowest_eigenpairs(op, k)?;
    Ok(SpectrumSlice { control: None, eigenvalues: vals, eigenvectors: Some(vecs) })
}

/// Lowest `k` eigenvalues of `H_Q(Gamma)`.
pub fn quantum_spectrum(
    params: &ModelParams,
    gamma: f64,
    k: usize,
    with_vectors: bool,
) -> Result<SpectrumSlice> {
    let op = build_quantum_hamiltonian(params, gamma)?;
    if with_vectors {
        let (vals, vecs) = lowest_eigenpairs(&op, k)?;
        Ok(SpectrumSlice { control: Some(gamma), eigenvalues: vals, eigenvectors: Some(vecs) })
    } else {
        Ok(SpectrumSlice {
            control: Some(gamma),
            eigenvalues: lowest_eigenvalues(&op, k),
            eigenvectors: None,
        })
    }
}

/// Lowest `k` eigenvalues of the classical relaxation operator `Heff(T)`.
/// The lowest one is the stationary mode at 0.
pub fn classical_spectrum(
    params: &ModelParams,
    temperature: f64,
    k: usize,
    with_vectors: bool,
) -> Result<SpectrumSlice> {
    let op = build_effective_hamiltonian(params, temperature)?;
    if with_vectors {
        let (vals, vecs) = lowest_eigenpairs(&op, k)?;
        Ok(SpectrumSlice {
            control: Some(temperature),
            eigenvalues: vals,
            eigenvectors: Some(vecs),
        })
    } else {
        Ok(SpectrumSlice {
            control: Some(temperature),
            eigenvalues: lowest_eigenvalues(&op, k),
            eigenvectors: None,
        })
    }
}

/// Reflection expectation `<v|R|v>` with `(R v)_k = v_{N-k}`.
fn reflection_expectation(v: &[f64]) -> f64 {
    let n = v.len();
    v.iter().enumerate().map(|(k, x)| x * v[n - 1 - k]).sum()
}

/// Symmetric eigensolve for tiny cluster matrices (Jacobi with vectors).
fn tiny_symmetric_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let c = a.len();
    let mut u = vec![vec![0.0; c]; c];
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..60 {
        let mut off = 0.0;
        for i in 0..c {
            for j in (i + 1)..c {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for i in 0..c {
            for j in (i + 1)..c {
                let apq = a[i][j];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[j][j] - a[i][i]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let cc = 1.0 / (1.0 + t * t).sqrt();
                let ss = t * cc;
                for k in 0..c {
                    let (aki, akj) = (a[k][i], a[k][j]);
                    a[k][i] = cc * aki - ss * akj;
                    a[k][j] = ss * aki + cc * akj;
                }
                for k in 0..c {
                    let (aik, ajk) = (a[i][k], a[j][k]);
                    a[i][k] = cc * aik - ss * ajk;
                    a[j][k] = ss * aik + cc * ajk;
                }
                for row in u.iter_mut() {
                    let (ui, uj) = (row[i], row[j]);
                    row[i] = cc * ui - ss * uj;
                    row[j] = ss * ui + cc * uj;
                }
            }
        }
    }
    ((0..c).map(|i| a[i][i]).collect(), u)
}

/// Low-lying states labeled by parity, sorted by energy.
pub(crate) fn parity_resolved_states(
    op: &TridiagonalOperator,
    k: usize,
) -> Result<Vec<(f64, f64)>> {
    let scale = op.gershgorin_radius().max(1e-300);
    let (vals, vecs) = lowest_eigenpairs(op, k)?;
    let m = vals.len();
    let mut states: Vec<(f64, f64)> = Vec::with_capacity(m);
    let mut i = 0;
    while i < m {
        // Collect the near-degenerate cluster starting at i.
        let mut j = i + 1;
        while j < m && (vals[j] - vals[j - 1]).abs() < 1e-6 * scale {
            j += 1;
        }
        if j - i == 1 {
            let r = reflection_expectation(&vecs[i]);
            if r.abs() < 1.0 - 1e-6 {
                return Err(Error::MixedParity { index: i, asymmetry: 1.0 - r.abs() });
            }
            states.push((vals[i], r.signum()));
        } else {
            // Rotate the cluster into eigenvectors of the reflection, then
            // read energies back from Rayleigh quotients.
            let c = j - i;
            let mut rmat = vec![vec![0.0; c]; c];
            let n = op.dim();
            for a in 0..c {
                for b in a..c {
                    let dot: f64 = (0..n).map(|q| vecs[i + a][q] * vecs[i + b][n - 1 - q]).sum();
                    rmat[a][b] = dot;
                    rmat[b][a] = dot;
                }
            }
            let (rvals, u) = tiny_symmetric_eigen(rmat);
            for t in 0..c {
                if rvals[t].abs() < 1.0 - 1e-6 {
                    return Err(Error::MixedParity {
                        index: i + t,
                        asymmetry: 1.0 - rvals[t].abs(),
                    });
                }
                let mut w = vec![0.0; n];
                for (a, row) in u.iter().enumerate() {
                    for (q, wq) in w.iter_mut().enumerate() {
                        *wq += row[t] * vecs[i + a][q];
                    }
                }
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in w.iter_mut() {
                    *x /= norm;
                }
                states.push((op.expectation(&w), rvals[t].signum()));
            }
        }
        i = j;
    }
    states.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(states)
}

/// The gap governing the annealing dynamics at transverse field `Gamma`.
///
/// Odd p: `E_1 - E_0`. Even p: the gap from the ground state to the lowest
/// excited state of the same reflection parity (the second excited state
/// away from degeneracies), because the dynamics preserves parity.
pub fn dynamical_gap(params: &ModelParams, gamma: f64) -> Result<f64> {
    let op = build_quantum_hamiltonian(params, gamma)?;
    let sectors = params.sectors();
    if !params.is_even() {
        if sectors < 2 {
            return Err(Error::Domain("need at least two sectors for a gap".into()));
        }
        let vals = lowest_eigenvalues(&op, 2);
        return Ok(vals[1] - vals[0]);
    }
    let k = 4.min(sectors);
    let states = parity_resolved_states(&op, k)?;
    let (e0, parity0) = states[0];
    for &(e, parity) in states.iter().skip(1) {
        if parity == parity0 {
            return Ok(e - e0);
        }
    }
    Err(Error::Convergence(format!(
        "no state with the ground parity among the lowest {k} at Gamma = {gamma}"
    )))
}

/// Scan the dynamical gap over `[range.0, range.1]` with `resolution` coarse
/// points, then refine the interior minimum by golden section to 1e-5 in
/// Gamma. Errors when the minimum sits on a range endpoint.
pub fn min_gap_scan(
    params: &ModelParams,
    range: (f64, f64),
    resolution: usize,
) -> Result<(f64, f64)> {
    let (lo, hi) = range;
    if !(hi > lo) || resolution < 3 {
        return Err(Error::Domain(format!(
            "need an increasing range and >= 3 scan points, got [{lo}, {hi}] x {resolution}"
        )));
    }
    let xs: Vec<f64> = (0..resolution)
        .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
        .collect();
    let mut best = (0usize, f64::INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let g = dynamical_gap(params, x)?;
        if g < best.1 {
            best = (i, g);
        }
    }
    if best.0 == 0 || best.0 == resolution - 1 {
        return Err(Error::NoInteriorMinimum { at: xs[best.0] });
    }
    // Golden-section refinement on the bracketing interval.
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = (xs[best.0 - 1], xs[best.0 + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = dynamical_gap(params, c)?;
    let mut fd = dynamical_gap(params, d)?;
    while (b - a).abs() > 1e-5 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = dynamical_gap(params, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = dynamical_gap(params, d)?;
        }
    }
    let gamma_min = 0.5 * (a + b);
    Ok((gamma_min, dynamical_gap(params, gamma_min)?))
}

/// Least-squares fit of minimum gaps against system size in log space:
/// `ln Delta = ln A - z ln N` (power) or `ln Delta = ln A - alpha N`
/// (exponential).
pub fn gap_scaling_fit(data: &[(f64, f64)], model: ScalingModel) -> Result<GapScaling> {
    if data.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "gap scaling fit needs >= 4 sizes, got {}",
            data.len()
        )));
    }
    for &(n, gap) in data {
        if !(n > 0.0 && gap > 0.0) {
            return Err(Error::Domain(format!("sizes and gaps must be positive, got ({n}, {gap})")));
        }
    }
    let xs: Vec<f64> = data
        .iter()
        .map(|&(n, _)| match model {
            ScalingModel::Power => n.ln(),
            ScalingModel::Exponential => n,
        })
        .collect();
    let ys: Vec<f64> = data.iter().map(|&(_, g)| g.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(GapScaling {
        model,
        exponent: -fit.slope,
        exponent_stderr: fit.slope_stderr,
        amplitude: fit.intercept.exp(),
        residual_norm: fit.ssr.sqrt(),
        data: data.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::critical_temperature;

    fn params(p: u32, n: usize) -> ModelParams {
        ModelParams::with_unit_coupling(p, n).unwrap()
    }

    #[test]
    fn tridiag_eigs_match_dense_oracle() {
        // Pseudo-random symmetric tridiagonal, n = 257, lowest 8 vs Jacobi.
        let n = 257;
        let d: Vec<f64> = (0..n).map(|i| ((i * 2654435761) % 1000) as f64 / 250.0 - 2.0).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| ((i * 40503) % 997) as f64 / 997.0 - 0.5).collect();
        let op = TridiagonalOperator::new_symmetric(d.clone(), e.clone());
        let slice = tridiag_lowest_eigs(&op, 8).unwrap();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = d[i];
        }
        for i in 0..n - 1 {
            dense[i][i + 1] = e[i];
            dense[i + 1][i] = e[i];
        }
        let oracle = crate::oracle::dense_symmetric_eigenvalues(&dense);
        for j in 0..8 {
            assert!(
                (slice.eigenvalues[j] - oracle[j]).abs() < 1e-10,
                "lambda_{j}: {} vs {}",
                slice.eigenvalues[j],
                oracle[j]
            );
        }
    }

    #[test]
    fn ground_energy_exact_at_zero_field() {
        // The operator is diagonal at Gamma = 0 and carries -N J / 2 exactly;
        // bisection resolves it to a few ulps of the operator scale.
        let p = params(3, 32);
        let op = crate::quantum::build_quantum_hamiltonian(&p, 0.0).unwrap();
        assert_eq!(op.diagonal().iter().cloned().fold(f64::INFINITY, f64::min), -16.0);
        assert_eq!(op.off_diagonal().iter().cloned().fold(0.0_f64, f64::max), 0.0);
        let vals = quantum_spectrum(&p, 0.0, 1, false).unwrap().eigenvalues;
        assert!((vals[0] + 16.0).abs() < 1e-12);
    }

    #[test]
    fn dynamical_gap_at_zero_field() {
        // Even p: gap within the even parity sector, E(1 - 2/N) - E(1).
        let n = 16;
        let p = params(2, n);
        let gap = dynamical_gap(&p, 0.0).unwrap();
        let expect = 2.0 * (1.0 - 1.0 / n as f64);
        assert!((gap - expect).abs() < 1e-12, "gap {gap} vs {expect}");

        // Odd p: plain first gap, (J N / 2)(1 - (1 - 2/N)^3) -> 3J.
        for n in [16usize, 64, 256] {
            let p3 = params(3, n);
            let gap = dynamical_gap(&p3, 0.0).unwrap();
            let m1 = 1.0 - 2.0 / n as f64;
            let expect = 0.5 * n as f64 * (1.0 - m1.powi(3));
            assert!((gap - expect).abs() < 1e-10, "N = {n}: {gap} vs {expect}");
        }
        let gap_big = dynamical_gap(&params(3, 512), 0.0).unwrap();
        assert!((gap_big - 3.0).abs() < 0.02, "gap -> 3J, got {gap_big}");
    }

    #[test]
    fn dynamical_gap_strong_field_limits() {
        let gamma = 1000.0;
        let gap_odd = dynamical_gap(&params(3, 8), gamma).unwrap();
        assert!((gap_odd - 2.0 * gamma).abs() < 1.0, "odd-p gap {gap_odd}");
        let gap_even = dynamical_gap(&params(2, 8), gamma).unwrap();
        assert!((gap_even - 4.0 * gamma).abs() < 5.0, "even-p gap {gap_even}");
    }

    #[test]
    fn dynamical_gap_dominates_first_gap_for_even_p() {
        for gamma in [0.2, 0.8, 1.0, 1.3, 2.5] {
            let p = params(2, 24);
            let dyn_gap = dynamical_gap(&p, gamma).unwrap();
            let vals = quantum_spectrum(&p, gamma, 2, false).unwrap().eigenvalues;
            let first = vals[1] - vals[0];
            assert!(dyn_gap >= first - 1e-10, "Gamma = {gamma}: {dyn_gap} < {first}");
        }
        for gamma in [0.3, 0.65, 1.1] {
            let p = params(3, 24);
            let dyn_gap = dynamical_gap(&p, gamma).unwrap();
            let vals = quantum_spectrum(&p, gamma, 2, false).unwrap().eigenvalues;
            assert!((dyn_gap - (vals[1] - vals[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_labels_are_sharp() {
        let p = params(2, 24);
        let op = build_quantum_hamiltonian(&p, 1.2).unwrap();
        let (_, vecs) = lowest_eigenpairs(&op, 4).unwrap();
        for v in &vecs {
            let r = reflection_expectation(v);
            assert!((r.abs() - 1.0).abs() < 1e-8, "parity label {r}");
        }
    }

    #[test]
    fn min_gap_scan_p2_converges_and_is_stable() {
        let p = params(2, 64);
        let (g1, d1) = min_gap_scan(&p, (0.5, 1.5), 21).unwrap();
        let (g2, d2) = min_gap_scan(&p, (0.5, 1.5), 41).unwrap();
        assert!((d1 - d2).abs() < 1e-8, "resolution halving moved the gap: {d1} vs {d2}");
        assert!((g1 - g2).abs() < 1e-4);
        assert!(g1 > 0.8 && g1 < 1.2, "p=2 minimum near Gamma = 1, got {g1}");
    }

    #[test]
    fn min_gap_requires_interior_minimum() {
        let p = params(2, 32);
        // Gap is monotone on [2.0, 3.0]: minimum at the left endpoint.
        assert!(matches!(
            min_gap_scan(&p, (2.0, 3.0), 11),
            Err(Error::NoInteriorMinimum { .. })
        ));
    }

    #[test]
    fn gap_scaling_fit_recovers_synthetic_laws() {
        let data: Vec<(f64, f64)> =
            [64.0, 128.0, 256.0, 512.0, 1024.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(-1.0 / 3.0))).collect();
        let fit = gap_scaling_fit(&data, ScalingModel::Power).unwrap();
        assert!((fit.exponent - 1.0 / 3.0).abs() < 1e-10);
        assert!((fit.amplitude - 3.0).abs() < 1e-9);
        assert!(fit.residual_norm < 1e-16_f64.sqrt());

        let data: Vec<(f64, f64)> =
            [16.0, 24.0, 32.0, 48.0, 64.0].iter().map(|&n: &f64| (n, 1.7 * (-0.11 * n).exp())).collect();
        let fit = gap_scaling_fit(&data, ScalingModel::Exponential).unwrap();
        assert!((fit.exponent - 0.11).abs() < 1e-10);
        assert!(gap_scaling_fit(&data[..3], ScalingModel::Power).is_err());
    }

    #[test]
    fn classical_spectrum_stationary_and_quasi_degenerate() {
        // Lowest eigenvalue is the stationary mode at 0 for every T > 0.
        for (p, n, t) in [(2, 32, 1.3), (2, 32, 0.6), (3, 64, 0.5)] {
            let pr = params(p, n);
            let s = classical_spectrum(&pr, t, 3, false).unwrap();
            assert!(s.eigenvalues[0].abs() < 1e-9, "stationary eigenvalue {}", s.eigenvalues[0]);
        }
        // p = 3 below T_c: two quasi-degenerate lowest states, with the
        // splitting shrinking as N grows at fixed T.
        let t = 0.4;
        let split = |n: usize| {
            let s = classical_spectrum(&params(3, n), t, 3, false).unwrap();
            (s.eigenvalues[1], s.eigenvalues[2])
        };
        let (l1_small, l2_small) = split(128);
        let (l1_big, _) = split(256);
        assert!(l1_small < 5e-2 * l2_small, "lambda_1 {l1_small} not << lambda_2 {l2_small}");
        assert!(l1_big < 0.5 * l1_small, "splitting did not shrink with N");
    }

    #[test]
    fn classical_gap_reopens_below_tc_for_p2() {
        // The mode the symmetric dynamics can reach is the lowest
        // reflection-even excitation (the odd well-exchange mode decouples
        // from the evolving distribution), and that gap reopens below T_c.
        let pr = params(2, 64);
        let tc = critical_temperature(&pr).unwrap();
        let gap_at = |t: f64| {
            let op = build_effective_hamiltonian(&pr, t).unwrap();
            let states = parity_resolved_states(&op, 4).unwrap();
            let parity0 = states[0].1;
            states
                .iter()
                .skip(1)
                .find(|&&(_, par)| par == parity0)
                .map(|&(e, _)| e - states[0].0)
                .expect("even excitation within the lowest four")
        };
        let near_tc = (0..=20)
            .map(|i| gap_at(0.8 * tc + 0.4 * tc * i as f64 / 20.0))
            .fold(f64::INFINITY, f64::min);
        let below = gap_at(0.5 * tc);
        assert!(below > near_tc, "gap did not reopen: {below} <= {near_tc}");
    }
}
