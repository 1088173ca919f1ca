use serde::{Deserialize, Serialize};

use crate::chain::{ChainResult, SamplerKind};
use crate::distributions::{PrecisionGaussian, RngStream};
use crate::error::{Error, Result};
use crate::misclass::{fisher_weights, jacobian_eta_theta, prior_hessian_diag, HessianForm, Matrix5, PosteriorContext, Vector5};
use crate::types::Theta;

use super::{warm_start, metropolis_accept, McmcLength, Recorder};

/// How the prior curvature enters the Fisher-type precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureSign {
    /// `J'DJ - H`: the prior adds precision, as in a Laplace approximation.
    #[default]
    Subtract,
    /// `J'DJ + H`, which is indefinite along the likelihood ridge and relies
    /// on eigenvalue flooring.
    Add,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptedTuning {
    /// Proposal scale multiplying the inverse precision.
    pub c: f64,
    /// Ridge jitter added to the diagonal.
    pub tau: f64,
    pub hessian_form: HessianForm,
    pub curvature_sign: CurvatureSign,
}

impl AdaptedTuning {
    pub fn new(c: f64, tau: f64) -> Self {
        AdaptedTuning { c, tau, hessian_form: HessianForm::default(), curvature_sign: CurvatureSign::default() }
    }
}

/// Which local precision the proposal uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// `tau I + J'J`
    Jtj,
    /// `tau I + J'DJ -/+ H_prior` with `D = diag(n^2 / x_ij)`
    Fisher,
}

impl Metric {
    pub fn sampler(&self) -> SamplerKind {
        match self {
            Metric::Jtj => SamplerKind::AdaptedJtj,
            Metric::Fisher => SamplerKind::AdaptedFisher,
        }
    }
}

/// Local proposal precision at `theta`, before any flooring.
pub fn local_precision(theta: &Theta, ctx: &PosteriorContext, metric: Metric, tuning: &AdaptedTuning) -> Result<Matrix5> {
    let j = jacobian_eta_theta(theta);
    let mut m = match metric {
        Metric::Jtj => j.transpose() * j,
        Metric::Fisher => {
            let d = fisher_weights(&ctx.table);
            let mut dj = j;
            for (r, w) in d.iter().enumerate() {
                dj.row_mut(r).scale_mut(*w);
            }
            let mut m = j.transpose() * dj;
            let h = prior_hessian_diag(theta, &ctx.priors, tuning.hessian_form)?;
            let sign = match tuning.curvature_sign {
                CurvatureSign::Subtract => -1.0,
                CurvatureSign::Add => 1.0,
            };
            for (i, hi) in h.iter().enumerate() {
                m[(i, i)] += sign * hi;
            }
            m
        }
    };
    for i in 0..5 {
        m[(i, i)] += tuning.tau;
    }
    Ok(m)
}

/// Symmetrizes `m` and raises every eigenvalue to at least `floor`.
pub fn floor_eigenvalues(m: &Matrix5, floor: f64) -> Matrix5 {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let vals = eig.eigenvalues.map(|v| v.max(floor));
    eig.eigenvectors * Matrix5::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// Proposal distribution at `theta`; falls back to eigenvalue flooring at `tau`
/// when the precision is not positive definite.
pub fn local_proposal(
    theta: &Theta,
    ctx: &PosteriorContext,
    metric: Metric,
    tuning: &AdaptedTuning,
) -> Result<PrecisionGaussian<5>> {
    let m = local_precision(theta, ctx, metric, tuning)?;
    match PrecisionGaussian::new(m, tuning.c) {
        Ok(q) => Ok(q),
        Err(Error::NotPsd) => PrecisionGaussian::new(floor_eigenvalues(&m, tuning.tau), tuning.c),
        Err(e) => Err(e),
    }
}

pub(crate) fn adapted_from(
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    metric: Metric,
    tuning: &AdaptedTuning,
    length: McmcLength,
    start: Theta,
) -> Result<(ChainResult, Theta)> {
    let mut rec = Recorder::new(length);
    let mut theta = start;
    let mut x = Vector5::from(theta.to_array());
    let mut lp = ctx.log_posterior(&theta);
    let mut q = local_proposal(&theta, ctx, metric, tuning)?;
    for t in 0..length.iterations {
        let y = q.sample(rng, &x);
        let cand = Theta::from_array([y[0], y[1], y[2], y[3], y[4]]);
        let lp_new = ctx.log_posterior(&cand);
        let mut accepted = false;
        if lp_new.is_finite() {
            // a reverse proposal that cannot be formed makes the move unreachable
            if let Ok(q_new) = local_proposal(&cand, ctx, metric, tuning) {
                let delta = y - x;
                let log_ratio = lp_new - lp + q_new.ln_density(&(-delta)) - q.ln_density(&delta);
                if metropolis_accept(rng, log_ratio) {
                    theta = cand;
                    x = y;
                    lp = lp_new;
                    q = q_new;
                    accepted = true;
                }
            }
        }
        rec.record_block(t, accepted);
        rec.keep(t, theta);
    }
    Ok((rec.finish(metric.sampler(), rng.seed()), theta))
}

/// Block Metropolis-Hastings with proposal `N(theta, c (tau I + J'J)^-1)`,
/// the precision re-evaluated at every point with the Hastings correction.
pub fn adapted_rw_jtj(
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    tuning: &AdaptedTuning,
    length: McmcLength,
) -> Result<ChainResult> {
    let start = warm_start(rng, ctx)?;
    Ok(adapted_from(rng, ctx, Metric::Jtj, tuning, length, start)?.0)
}

/// As [`adapted_rw_jtj`] with the multinomial information `J'DJ` and prior curvature.
pub fn adapted_rw_fisher(
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    tuning: &AdaptedTuning,
    length: McmcLength,
) -> Result<ChainResult> {
    let start = warm_start(rng, ctx)?;
    Ok(adapted_from(rng, ctx, Metric::Fisher, tuning, length, start)?.0)
}
