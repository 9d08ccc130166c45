//! Least-squares line fits shared by the spectral and analysis modules.

use crate::error::{Error, Result};

/// Ordinary least squares for `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    /// Sum of squared residuals.
    pub ssr: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
}

pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::DegenerateFit(format!("need >= 2 paired points, got {n}")));
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("x values are all identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    // Explicit residual pass: the textbook syy - slope * sxy cancels badly
    // for near-exact fits.
    let ssr: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let slope_stderr =
        if n > 2 { (ssr / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(LineFit { intercept, slope, slope_stderr, ssr, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 - 0.75 * x).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-14);
        assert!((fit.intercept - 2.5).abs() < 1e-14);
        assert!(fit.ssr < 1e-28);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
