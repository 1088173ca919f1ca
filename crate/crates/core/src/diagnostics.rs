//! Convergence and efficiency diagnostics.

use crate::chain::ChainResult;
use crate::error::{Error, Result};
use crate::measures::Quantity;

/// Shortest series accepted by the autocorrelation and PSRF estimators.
pub const MIN_SERIES_LEN: usize = 10;

/// PSRF below this value counts as converged.
pub const PSRF_CONVERGED: f64 = 1.1;

use crate::chain::shifted_mean as mean;

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Autocorrelation-time effective sample size `n / (1 + 2 sum rho_k)`.
///
/// Autocorrelations are direct sums (biased estimator, divisor `n`) up to lag
/// `n / 2`. The sum stops before the first lag `k` with `rho_k + rho_{k+1} <= 0`.
/// The result is clamped to `(0, n]`.
pub fn ess_autocorr(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::InvalidInput(format!("ESS needs at least {MIN_SERIES_LEN} values, got {n}")));
    }
    let m = mean(series);
    let centered: Vec<f64> = series.iter().map(|x| x - m).collect();
    let c0 = centered.iter().map(|d| d * d).sum::<f64>();
    if !(c0 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let rho = |k: usize| -> f64 {
        let s: f64 = centered[..n - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum();
        s / c0
    };
    let max_lag = n / 2;
    let mut sum = 0.0;
    let mut k = 1;
    let mut rho_k = rho(1);
    while k < max_lag {
        let rho_next = rho(k + 1);
        if rho_k + rho_next <= 0.0 {
            break;
        }
        sum += rho_k;
        rho_k = rho_next;
        k += 1;
    }
    let tau = 1.0 + 2.0 * sum;
    let ess = if tau > 0.0 { n as f64 / tau } else { n as f64 };
    Ok(ess.min(n as f64))
}

/// Importance-sampling effective sample size `(sum w)^2 / sum w^2`.
pub fn ess_weights(weights: &[f64]) -> Result<f64> {
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be non-negative".into()));
    }
    // scale by the largest weight so the squares cannot overflow or underflow
    let max = weights.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::AllZeroWeights);
    }
    let (s, s2) = weights.iter().fold((0.0, 0.0), |(s, s2), &w| {
        let v = w / max;
        (s + v, s2 + v * v)
    });
    Ok((s * s / s2).clamp(1.0, weights.len() as f64))
}

/// Classic Gelman-Rubin potential scale reduction factor
/// `sqrt((n - 1)/n + B / (n W))` over `m >= 2` chains of equal length `n`.
pub fn bgr_psrf(chains: &[&[f64]]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(Error::InvalidInput("PSRF needs at least two chains".into()));
    }
    let n = chains[0].len();
    if n < MIN_SERIES_LEN || chains.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidInput(format!(
            "PSRF needs chains of equal length of at least {MIN_SERIES_LEN}"
        )));
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let grand = mean(&means);
    let between = n as f64 / (m as f64 - 1.0) * means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>();
    let within = chains.iter().map(|c| sample_variance(c)).sum::<f64>() / m as f64;
    if !(within > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let nf = n as f64;
    Ok(((nf - 1.0) / nf + between / (nf * within)).sqrt())
}

/// PSRF after splitting every chain into its two halves.
pub fn bgr_psrf_split(chains: &[&[f64]]) -> Result<f64> {
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[h..2 * h]]
        })
        .collect();
    bgr_psrf(&halves)
}

/// Effective samples per second for one quantity of one chain.
pub fn efficiency(chain: &ChainResult, quantity: Quantity) -> Result<f64> {
    if !(chain.elapsed_seconds > 0.0) {
        return Err(Error::InvalidInput("elapsed time must be positive".into()));
    }
    let values = chain.values(|t| quantity.eval(t));
    let (ess, zero_variance) = crate::chain::chain_ess(&values, chain)?;
    if zero_variance {
        return Err(Error::ZeroVariance);
    }
    Ok(ess / chain.elapsed_seconds)
}

/// Effective samples per 1000 iterations, burn-in and rejected importance
/// proposals included.
pub fn ess_per_thousand(chain: &ChainResult, quantity: Quantity) -> Result<f64> {
    let iterations = chain.iterations();
    if iterations == 0 {
        return Err(Error::EmptyChain);
    }
    let values = chain.values(|t| quantity.eval(t));
    let (ess, _) = crate::chain::chain_ess(&values, chain)?;
    Ok(1000.0 * ess / iterations as f64)
}
