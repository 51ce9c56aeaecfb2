//! Linear least squares on small design matrices.

use crate::error::{LabError, Result};
use nalgebra::{DMatrix, DVector};

/// Solves min ||X c - y|| for c, with columns rescaled for conditioning.
/// Returns the coefficients and the maximum absolute residual.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    let k = rows.first().map(|r| r.len()).unwrap_or(0);
    if m < k || k == 0 {
        return Err(LabError::FitFailure(format!("{m} samples for {k} unknowns")));
    }
    let mut scale = vec![0.0f64; k];
    for r in rows {
        for (j, v) in r.iter().enumerate() {
            scale[j] = scale[j].max(v.abs());
        }
    }
    for s in scale.iter_mut() {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let x = DMatrix::from_fn(m, k, |i, j| rows[i][j] / scale[j]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let sol = svd
        .solve(&yv, 1e-14)
        .map_err(|e| LabError::FitFailure(e.to_string()))?;
    let resid = (&x * &sol - &yv).amax();
    let coeffs: Vec<f64> = sol.iter().zip(&scale).map(|(c, s)| c / s).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(LabError::FitFailure("non-finite coefficients".into()));
    }
    Ok((coeffs, resid))
}

/// Slope of the least-squares line through (ln x, ln y).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![x.ln(), 1.0]).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(LabError::FitFailure("non-positive value in log-log fit".into()));
    }
    Ok(least_squares(&rows, &ly)?.0[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_line() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x, 1.0]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let (c, r) = least_squares(&rows, &y).unwrap();
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] + 2.0).abs() < 1e-12 && r < 1e-12);
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x.powf(-0.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-12);
    }
}
