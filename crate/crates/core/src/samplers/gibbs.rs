use crate::chain::{ChainResult, SamplerKind};
use crate::distributions::{sample_beta, sample_binomial, sample_dirichlet4, RngStream};
use crate::error::{Error, Result};
use crate::misclass::{CrossSectionalPriors, PosteriorContext};
use crate::types::{BetaParams, Theta};

use super::{initial_state, McmcLength, Recorder};

/// Latent split of each observed cell into correctly (`y`) and incorrectly
/// (`z`) classified subjects, indexed like the true table.
///
/// `x11 = y11 + z21`, `x12 = y12 + z22`, `x21 = y21 + z11`, `x22 = y22 + z12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentCounts {
    pub y: [u64; 4],
    pub z: [u64; 4],
}

impl LatentCounts {
    /// Observed counts implied by the split.
    pub fn observed(&self) -> [u64; 4] {
        let (y, z) = (self.y, self.z);
        [y[0] + z[2], y[1] + z[3], y[2] + z[0], y[3] + z[1]]
    }

    /// True-cell totals `y_ij + z_ij`.
    pub fn true_counts(&self) -> [u64; 4] {
        std::array::from_fn(|i| self.y[i] + self.z[i])
    }
}

/// Dirichlet parameters on `pi` equivalent to the `(p, q, e)` priors.
///
/// A `Dirichlet(a11, a12, a21, a22)` on the true table makes `p`, `q`, `e`
/// independent with `p ~ Beta(a11, a12)`, `q ~ Beta(a21, a22)` and
/// `e ~ Beta(a11 + a12, a21 + a22)`; other prior combinations have no
/// conjugate form.
pub fn dirichlet_prior(priors: &CrossSectionalPriors) -> Result<[f64; 4]> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !close(priors.e.alpha, priors.p.alpha + priors.p.beta) || !close(priors.e.beta, priors.q.alpha + priors.q.beta)
    {
        return Err(Error::InvalidInput(
            "data augmentation needs e ~ Beta(p.alpha + p.beta, q.alpha + q.beta)".into(),
        ));
    }
    Ok([priors.p.alpha, priors.p.beta, priors.q.alpha, priors.q.beta])
}

/// Draws the latent split given the true table and test accuracy.
pub fn sample_latent(rng: &mut RngStream, x: [u64; 4], pi: [f64; 4], se: f64, sp: f64) -> LatentCounts {
    let [p11, p12, p21, p22] = pi;
    let share = |hit: f64, miss: f64| if hit + miss > 0.0 { hit / (hit + miss) } else { 1.0 };
    let y11 = sample_binomial(rng, x[0], share(se * p11, (1.0 - sp) * p21));
    let y12 = sample_binomial(rng, x[1], share(se * p12, (1.0 - sp) * p22));
    let y21 = sample_binomial(rng, x[2], share(sp * p21, (1.0 - se) * p11));
    let y22 = sample_binomial(rng, x[3], share(sp * p22, (1.0 - se) * p12));
    LatentCounts { y: [y11, y12, y21, y22], z: [x[2] - y21, x[3] - y22, x[0] - y11, x[1] - y12] }
}

/// Data-augmented Gibbs sampler: latent counts, then `pi`, then `Se` and `Sp`.
pub fn gibbs_data_augmented(rng: &mut RngStream, ctx: &PosteriorContext, length: McmcLength) -> Result<ChainResult> {
    let prior_pi = dirichlet_prior(&ctx.priors)?;
    let x = ctx.table.counts();
    let mut rec = Recorder::new(length);
    let start = initial_state(rng, ctx)?;
    let (mut pi, mut se, mut sp) = (start.pi(), start.se, start.sp);
    for t in 0..length.iterations {
        let latent = sample_latent(rng, x, pi, se, sp);
        let cells = latent.true_counts();
        pi = sample_dirichlet4(rng, std::array::from_fn(|i| cells[i] as f64 + prior_pi[i]));
        let (y, z) = (latent.y, latent.z);
        se = sample_beta(
            rng,
            &BetaParams { alpha: (y[0] + y[1]) as f64 + ctx.priors.se.alpha, beta: (z[0] + z[1]) as f64 + ctx.priors.se.beta },
        );
        sp = sample_beta(
            rng,
            &BetaParams { alpha: (y[2] + y[3]) as f64 + ctx.priors.sp.alpha, beta: (z[2] + z[3]) as f64 + ctx.priors.sp.beta },
        );
        rec.record_block(t, true);
        rec.keep(t, Theta::from_pi(pi, se, sp));
    }
    Ok(rec.finish(SamplerKind::Gibbs, rng.seed()))
}
