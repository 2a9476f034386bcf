//! Log-log least squares, the common backend of every dimension estimate.

use serde::Serialize;

use crate::error::{Error, Result};

/// Result of a log-log regression.
///
/// `slope` and `intercept` describe the least-squares line through
/// `(ln a_i, ln o_i)`; `residual` is the RMS of the fit residuals in log
/// space; `range` records the raw abscissa values that entered the fit.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub range: Vec<f64>,
}

/// Least-squares fit of `ln(ordinates)` against `ln(abscissas)`.
///
/// Both inputs must be positive and of equal, nonzero length; at least two
/// points are needed for a line.
pub fn log_log_fit(abscissas: &[f64], ordinates: &[f64]) -> Result<DimensionFit> {
    if abscissas.len() != ordinates.len() {
        return Err(Error::invalid("abscissa/ordinate length mismatch"));
    }
    if abscissas.len() < 2 {
        return Err(Error::invalid("log-log fit needs at least two points"));
    }
    if abscissas.iter().chain(ordinates).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid("log-log fit needs positive finite inputs"));
    }

    let xs: Vec<f64> = abscissas.iter().map(|a| a.ln()).collect();
    let ys: Vec<f64> = ordinates.iter().map(|o| o.ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("log-log fit needs at least two distinct abscissas"));
    }

    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();

    Ok(DimensionFit {
        slope,
        intercept,
        residual: (ss_res / n).sqrt(),
        range: abscissas.to_vec(),
    })
}
