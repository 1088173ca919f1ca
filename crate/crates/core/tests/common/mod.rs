//! Oracles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use attrib_bayes::chain::ChainResult;
use attrib_bayes::diagnostics::ess_autocorr;
use attrib_bayes::distributions::{sample_beta, RngStream};
use attrib_bayes::misclass::PosteriorContext;
use attrib_bayes::{BetaParams, ContingencyTable, Design, Theta};

pub fn lepto(design: Design) -> ContingencyTable {
    ContingencyTable::leptospirosis(design)
}

pub fn lepto_ctx(scale: u64) -> PosteriorContext {
    PosteriorContext::with_default_priors(lepto(Design::CrossSectional).scaled(scale)).unwrap()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Posterior mean and Monte Carlo standard error of `f`, accounting for
/// importance weights or autocorrelation as the chain requires.
pub fn mean_and_se(chain: &ChainResult, f: impl Fn(&Theta) -> f64) -> (f64, f64) {
    let values = chain.values(f);
    match &chain.weights {
        Some(w) => {
            let total: f64 = w.iter().sum();
            let m = values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / total;
            // delta-method variance of the self-normalized estimator
            let var = values.iter().zip(w).map(|(v, w)| (w / total * (v - m)).powi(2)).sum::<f64>();
            (m, var.sqrt())
        }
        None => {
            let ess = if chain.meta.sampler.is_markov() { ess_autocorr(&values).unwrap() } else { values.len() as f64 };
            (mean(&values), (variance(&values) / ess).sqrt())
        }
    }
}

/// Whether two estimates agree within `k` combined standard errors.
pub fn agree(a: (f64, f64), b: (f64, f64), k: f64) -> bool {
    (a.0 - b.0).abs() <= k * (a.1 * a.1 + b.1 * b.1).sqrt()
}

/// Posterior mean of a binomial rate under a Beta prior by midpoint-rule
/// integration of the unnormalized density on `points` cells.
pub fn grid_posterior_mean(successes: u64, trials: u64, prior: BetaParams, points: usize) -> f64 {
    let a = successes as f64 + prior.alpha - 1.0;
    let b = (trials - successes) as f64 + prior.beta - 1.0;
    let (mut mass, mut first) = (0.0, 0.0);
    for k in 0..points {
        let x = (k as f64 + 0.5) / points as f64;
        let d = (a * x.ln() + b * (1.0 - x).ln()).exp();
        mass += d;
        first += x * d;
    }
    first / mass
}

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1.0f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (d, p.clamp(0.0, 1.0))
}

/// Exact draws for the two-rates-and-a-bound shape: `a`, `b` from their
/// conjugate posteriors and `z` from its prior, kept when `z` lies between
/// `a` and `b`. Returns `f(a, b, z)` per accepted draw.
pub fn interval_rejection(
    rng: &mut RngStream,
    post_a: BetaParams,
    post_b: BetaParams,
    prior_z: BetaParams,
    n: usize,
    f: impl Fn(f64, f64, f64) -> f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (a, b, z) = (sample_beta(rng, &post_a), sample_beta(rng, &post_b), sample_beta(rng, &prior_z));
        if (a - z) * (b - z) < 0.0 {
            out.push(f(a, b, z));
        }
    }
    out
}

pub fn conjugate(prior: BetaParams, successes: u64, trials: u64) -> BetaParams {
    BetaParams { alpha: prior.alpha + successes as f64, beta: prior.beta + (trials - successes) as f64 }
}

/// PAR from case-control rates `phi1 = P(E+|D+)`, `phi2 = P(E+|D-)` and the exposure rate.
pub fn casecontrol_par_from_exposure(phi1: f64, phi2: f64, e: f64) -> f64 {
    let phi3 = (e - phi2) / (phi1 - phi2);
    let unexposed_risk = (1.0 - phi1) * phi3 / ((1.0 - phi1) * phi3 + (1.0 - phi2) * (1.0 - phi3));
    phi3 - unexposed_risk
}

/// A point drawn uniformly from `[lo, hi]^5`.
pub fn random_theta(rng: &mut RngStream, lo: f64, hi: f64) -> Theta {
    Theta::from_array(std::array::from_fn(|_| lo + (hi - lo) * rng.uniform()))
}

/// Largest violation of `|analytic - fd| <= max(1e-5, 1e-4 |analytic|)` for
/// the log-posterior gradient, by central differences with `h = 1e-6`.
pub fn gradient_violation(ctx: &PosteriorContext, theta: &Theta) -> f64 {
    let g = ctx.grad_log_posterior(theta).unwrap();
    let h = 1e-6;
    (0..5)
        .map(|i| {
            let mut up = theta.to_array();
            let mut down = up;
            up[i] += h;
            down[i] -= h;
            let fd = (ctx.log_posterior(&Theta::from_array(up)) - ctx.log_posterior(&Theta::from_array(down))) / (2.0 * h);
            (g[i] - fd).abs() / 1e-5f64.max(1e-4 * g[i].abs())
        })
        .fold(0.0, f64::max)
}

/// Largest absolute difference between the analytic Jacobian and central differences.
pub fn jacobian_error(theta: &Theta) -> f64 {
    use attrib_bayes::misclass::{eta_from_theta, jacobian_eta_theta};
    let j = jacobian_eta_theta(theta);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for c in 0..5 {
        let mut up = theta.to_array();
        let mut down = up;
        up[c] += h;
        down[c] -= h;
        let (eu, ed) = (eta_from_theta(&Theta::from_array(up)).0, eta_from_theta(&Theta::from_array(down)).0);
        for r in 0..4 {
            worst = worst.max((j[(r, c)] - (eu[r] - ed[r]) / (2.0 * h)).abs());
        }
    }
    worst
}

/// Ratio of the fourth to the largest singular value of the Jacobian; the
/// fifth is structurally zero for a 4x5 matrix.
pub fn jacobian_rank_ratio(theta: &Theta) -> f64 {
    let s = attrib_bayes::misclass::jacobian_eta_theta(theta).svd(false, false).singular_values;
    let max = s.max();
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    min / max
}
