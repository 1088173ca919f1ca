//! Gaussian kernel density grids for external plotting.

use std::fmt::Write as _;

use crate::chain::{weighted_quantile, ChainResult};
use crate::diagnostics::ess_weights;
use crate::error::{Error, Result};
use crate::measures::Quantity;

pub const DENSITY_HEADER: &str = "quantity,x,density";
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Silverman's rule `0.9 min(sd, IQR / 1.34) n^(-1/5)`, with `n` the
/// effective sample size when the draws are weighted.
pub fn silverman_bandwidth(values: &[f64], weights: &[f64]) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values.iter().zip(weights).map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / total;
    let sd = var.sqrt();
    let iqr = weighted_quantile(values, weights, 0.75) - weighted_quantile(values, weights, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if !(spread > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let n = ess_weights(weights)?;
    Ok(0.9 * spread * n.powf(-0.2))
}

/// Weighted Gaussian KDE on `points` equally spaced values spanning the draws
/// plus three bandwidths either side.
pub fn gaussian_kde(values: &[f64], weights: &[f64], points: usize) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyChain);
    }
    if points < 2 || weights.len() != values.len() {
        return Err(Error::InvalidInput("need at least two grid points and one weight per value".into()));
    }
    let h = silverman_bandwidth(values, weights)?;
    let total: f64 = weights.iter().sum();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let norm = 1.0 / (total * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok((0..points)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            let sum: f64 = values.iter().zip(weights).map(|(v, w)| w * (-0.5 * ((x - v) / h).powi(2)).exp()).sum();
            (x, sum * norm)
        })
        .collect())
}

/// Density grids for each quantity, pooling chains with equal total weight.
pub fn density_csv(chains: &[ChainResult], quantities: &[Quantity], points: usize) -> Result<String> {
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for c in chains {
        match &c.weights {
            Some(w) => weights.extend(w.iter().copied()),
            None => weights.extend(std::iter::repeat_n(1.0 / c.len() as f64, c.len())),
        }
    }
    let mut out = format!("{DENSITY_HEADER}\n");
    for &q in quantities {
        values.clear();
        values.extend(chains.iter().flat_map(|c| c.draws.iter().map(|t| q.eval(t))));
        for (x, d) in gaussian_kde(&values, &weights, points)? {
            let _ = writeln!(out, "{q},{x:.16e},{d:.16e}");
        }
    }
    Ok(out)
}
