use std::time::Instant;

use crate::chain::{AcceptanceCounts, ChainMeta, ChainResult, SamplerKind};
use crate::distributions::{sample_dirichlet4, RngStream};
use crate::error::{Error, Result};
use crate::misclass::{ln_ridge_weight, pi_from_eta, weights_from_logs, EtaVector, PosteriorContext};
use crate::types::Theta;

/// Consecutive out-of-constraint proposals tolerated before giving up.
pub const REJECTION_CAP: u64 = 1_000_000;

/// Importance sampler on the identifiable cell probabilities.
///
/// `eta` is drawn from `Dirichlet(x + 1)`, which is proportional to the
/// likelihood, and `(Se, Sp)` from their priors. Proposals whose implied `pi`
/// is not a probability table are discarded; the sampler keeps drawing until
/// `n_draws` are retained. Acceptance is retained over attempted.
pub fn importance_sampler(rng: &mut RngStream, ctx: &PosteriorContext, n_draws: usize) -> Result<ChainResult> {
    let start = Instant::now();
    let alphas = ctx.counts().map(|x| x + 1.0);
    let mut draws = Vec::with_capacity(n_draws);
    let mut ln_w = Vec::with_capacity(n_draws);
    let mut acceptance = AcceptanceCounts::default();
    let mut misses = 0;
    while draws.len() < n_draws {
        let eta = EtaVector(sample_dirichlet4(rng, alphas));
        let (se, sp) = ctx.priors.sample_test(rng);
        match pi_from_eta(&eta, se, sp) {
            Ok(pi) => {
                let theta = Theta::from_pi(pi, se, sp);
                draws.push(theta);
                ln_w.push(ln_ridge_weight(&theta, &ctx.priors));
                acceptance.record_block(true);
                misses = 0;
            }
            Err(Error::OutsideA | Error::SingularTest) => {
                acceptance.record_block(false);
                misses += 1;
                if misses >= REJECTION_CAP {
                    return Err(Error::RejectionStall { cap: REJECTION_CAP });
                }
            }
            Err(e) => return Err(e),
        }
    }
    let weights = if n_draws == 0 { Vec::new() } else { weights_from_logs(&ln_w)? };
    Ok(ChainResult {
        draws,
        weights: Some(weights),
        acceptance,
        acceptance_with_burn_in: acceptance,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        meta: ChainMeta { sampler: SamplerKind::Importance, seed: rng.seed(), burn_in: 0 },
    })
}
