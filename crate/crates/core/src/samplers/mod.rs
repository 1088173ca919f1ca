//! Posterior samplers for the cross-sectional misclassification model.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chain::{AcceptanceCounts, ChainMeta, ChainResult, SamplerKind};
use crate::distributions::{sample_dirichlet4, RngStream};
use crate::error::{Error, Result};
use crate::misclass::{pi_from_eta, EtaVector, HessianForm, PosteriorContext};
use crate::types::Theta;

pub mod adapted;
pub mod gibbs;
pub mod hmc;
pub mod importance;
pub mod random_walk;
pub mod tuning;

pub use adapted::{adapted_rw_fisher, adapted_rw_jtj, AdaptedTuning, CurvatureSign};
pub use gibbs::gibbs_data_augmented;
pub use hmc::{hmc, HmcTuning};
pub use importance::importance_sampler;
pub use random_walk::{mh_random_walk, RandomWalkTuning};

/// User-facing tuning values; unset fields fall back to per-sampler defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningParams {
    pub c: Option<f64>,
    pub tau: Option<f64>,
    pub epsilon: Option<f64>,
    pub leapfrog_steps: Option<usize>,
    pub rw_scales: Option<[f64; 5]>,
    #[serde(default)]
    pub hessian_form: HessianForm,
    #[serde(default)]
    pub curvature_sign: CurvatureSign,
}

impl TuningParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(Error::InvalidInput(format!("tuning.{name} must be positive, got {x}")))
            }
            _ => Ok(()),
        };
        positive("c", self.c)?;
        positive("tau", self.tau)?;
        positive("epsilon", self.epsilon)?;
        if self.leapfrog_steps == Some(0) {
            return Err(Error::InvalidInput("tuning.leapfrog_steps must be positive".into()));
        }
        if let Some(s) = self.rw_scales {
            for v in s {
                positive("rw_scales", Some(v))?;
            }
        }
        Ok(())
    }
}

/// Total iterations, the first `burn_in` of which are discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McmcLength {
    pub iterations: usize,
    pub burn_in: usize,
}

impl McmcLength {
    pub fn new(iterations: usize, burn_in: usize) -> Result<Self> {
        if burn_in >= iterations {
            return Err(Error::InvalidInput(format!(
                "burn-in ({burn_in}) must be smaller than the number of iterations ({iterations})"
            )));
        }
        Ok(McmcLength { iterations, burn_in })
    }

    /// Burn-in of one tenth of the run.
    pub fn with_default_burn_in(iterations: usize) -> Result<Self> {
        Self::new(iterations, iterations / 10)
    }

    pub fn retained(&self) -> usize {
        self.iterations - self.burn_in
    }
}

/// Collects retained draws and acceptance with and without burn-in.
pub(crate) struct Recorder {
    burn_in: usize,
    draws: Vec<Theta>,
    kept: AcceptanceCounts,
    all: AcceptanceCounts,
    start: Instant,
}

impl Recorder {
    pub(crate) fn new(length: McmcLength) -> Self {
        Recorder {
            burn_in: length.burn_in,
            draws: Vec::with_capacity(length.retained()),
            kept: AcceptanceCounts::default(),
            all: AcceptanceCounts::default(),
            start: Instant::now(),
        }
    }

    pub(crate) fn record(&mut self, iter: usize, component: usize, accepted: bool) {
        self.all.record(component, accepted);
        if iter >= self.burn_in {
            self.kept.record(component, accepted);
        }
    }

    pub(crate) fn record_block(&mut self, iter: usize, accepted: bool) {
        self.all.record_block(accepted);
        if iter >= self.burn_in {
            self.kept.record_block(accepted);
        }
    }

    pub(crate) fn keep(&mut self, iter: usize, theta: Theta) {
        if iter >= self.burn_in {
            self.draws.push(theta);
        }
    }

    pub(crate) fn finish(self, sampler: SamplerKind, seed: u64) -> ChainResult {
        ChainResult {
            draws: self.draws,
            weights: None,
            acceptance: self.kept,
            acceptance_with_burn_in: self.all,
            elapsed_seconds: self.start.elapsed().as_secs_f64(),
            meta: ChainMeta { sampler, seed, burn_in: self.burn_in },
        }
    }
}

const INIT_ATTEMPTS: usize = 1_000_000;

/// A starting point on the likelihood ridge: `eta ~ Dirichlet(x + 1)` and
/// `(Se, Sp)` from their priors, redrawn until they define a valid table.
///
/// Starting from a raw prior draw lets a large data set pull the chain onto
/// the mirror-image ridge with `Se + Sp < 1`, which it cannot leave.
pub fn initial_state(rng: &mut RngStream, ctx: &PosteriorContext) -> Result<Theta> {
    let alphas = ctx.counts().map(|x| x + 1.0);
    for _ in 0..INIT_ATTEMPTS {
        let eta = EtaVector(sample_dirichlet4(rng, alphas));
        let (se, sp) = ctx.priors.sample_test(rng);
        if let Ok(pi) = pi_from_eta(&eta, se, sp) {
            let theta = Theta::from_pi(pi, se, sp);
            if ctx.log_posterior(&theta).is_finite() {
                return Ok(theta);
            }
        }
    }
    Err(Error::RejectionStall { cap: INIT_ATTEMPTS as u64 })
}

/// Sweeps of the fixed-step random walk used before any Metropolis or HMC run.
pub const WARM_UP_SWEEPS: usize = 1000;
const WARM_UP_STEP: f64 = 0.05;

/// A prior draw moved towards the posterior bulk by a short fixed-step random
/// walk, so that no sampler starts stranded in a prior tail.
pub fn warm_start(rng: &mut RngStream, ctx: &PosteriorContext) -> Result<Theta> {
    let start = initial_state(rng, ctx)?;
    Ok(random_walk::pilot_scales(rng, ctx, start, WARM_UP_SWEEPS, WARM_UP_STEP).1)
}

/// Metropolis acceptance test on the log scale.
pub(crate) fn metropolis_accept(rng: &mut RngStream, log_ratio: f64) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() {
        return false;
    }
    rng.uniform_open().ln() < log_ratio
}

/// Runs one cross-sectional sampler with tuning resolved for the given data scale.
///
/// `iterations` counts retained draws for the importance sampler and total
/// iterations (burn-in included) for the Markov samplers.
pub fn run_cross_sectional(
    kind: SamplerKind,
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    tuning: &TuningParams,
    length: McmcLength,
    data_scale: u64,
) -> Result<ChainResult> {
    tuning.validate()?;
    match kind {
        SamplerKind::Importance => importance_sampler(rng, ctx, length.retained()),
        SamplerKind::RandomWalk => mh_random_walk(rng, ctx, &RandomWalkTuning::resolve(tuning), length),
        SamplerKind::Gibbs => gibbs_data_augmented(rng, ctx, length),
        SamplerKind::Hmc => {
            let t = match HmcTuning::from_params(tuning) {
                Some(t) => t,
                None => tuning::tune_hmc(rng, ctx, tuning.leapfrog_steps)?,
            };
            hmc(rng, ctx, &t, length)
        }
        SamplerKind::AdaptedJtj => {
            let t = tuning::resolve_adapted(rng, ctx, tuning, SamplerKind::AdaptedJtj, data_scale)?;
            adapted_rw_jtj(rng, ctx, &t, length)
        }
        SamplerKind::AdaptedFisher => {
            let t = tuning::resolve_adapted(rng, ctx, tuning, SamplerKind::AdaptedFisher, data_scale)?;
            adapted_rw_fisher(rng, ctx, &t, length)
        }
        other => Err(Error::InvalidInput(format!("{other} is not a cross-sectional sampler"))),
    }
}
