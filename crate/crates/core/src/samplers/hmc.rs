use crate::chain::{ChainResult, SamplerKind};
use crate::distributions::RngStream;
use crate::error::Result;
use crate::misclass::{PosteriorContext, Vector5};
use crate::types::Theta;

use super::{warm_start, metropolis_accept, McmcLength, Recorder, TuningParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmcTuning {
    pub epsilon: f64,
    pub leapfrog_steps: usize,
}

impl HmcTuning {
    pub const DEFAULT_LEAPFROG_STEPS: usize = 20;

    /// Fully specified tuning, or `None` when the step size must be searched.
    pub fn from_params(params: &TuningParams) -> Option<Self> {
        params.epsilon.map(|epsilon| HmcTuning {
            epsilon,
            leapfrog_steps: params.leapfrog_steps.unwrap_or(Self::DEFAULT_LEAPFROG_STEPS),
        })
    }
}

fn theta_of(v: &Vector5) -> Theta {
    Theta::from_array([v[0], v[1], v[2], v[3], v[4]])
}

/// Result of one leapfrog trajectory.
pub struct Trajectory {
    pub end: Theta,
    pub log_posterior: f64,
    /// `H_start - H_end`; `-inf` when the path left the support.
    pub delta_h: f64,
}

/// Integrates Hamiltonian dynamics with potential `-log posterior` and unit mass.
pub fn leapfrog(ctx: &PosteriorContext, start: &Theta, lp_start: f64, momentum: Vector5, tuning: &HmcTuning) -> Trajectory {
    let eps = tuning.epsilon;
    let rejected = Trajectory { end: *start, log_posterior: lp_start, delta_h: f64::NEG_INFINITY };
    let mut x = Vector5::from(start.to_array());
    let mut r = momentum;
    let Ok(mut grad) = ctx.grad_log_posterior(start) else {
        return rejected;
    };
    r += grad * (0.5 * eps);
    for step in 0..tuning.leapfrog_steps {
        x += r * eps;
        let theta = theta_of(&x);
        match ctx.grad_log_posterior(&theta) {
            Ok(g) => grad = g,
            Err(_) => return rejected,
        }
        let w = if step + 1 == tuning.leapfrog_steps { 0.5 } else { 1.0 };
        r += grad * (w * eps);
    }
    let end = theta_of(&x);
    let lp_end = ctx.log_posterior(&end);
    if !lp_end.is_finite() {
        return rejected;
    }
    let h_start = -lp_start + 0.5 * momentum.norm_squared();
    let h_end = -lp_end + 0.5 * r.norm_squared();
    Trajectory { end, log_posterior: lp_end, delta_h: h_start - h_end }
}

pub(crate) fn hmc_from(
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    tuning: &HmcTuning,
    length: McmcLength,
    start: Theta,
) -> (ChainResult, Theta) {
    let mut rec = Recorder::new(length);
    let mut theta = start;
    let mut lp = ctx.log_posterior(&theta);
    for t in 0..length.iterations {
        let momentum = Vector5::from_fn(|_, _| rng.standard_normal());
        let traj = leapfrog(ctx, &theta, lp, momentum, tuning);
        let accepted = traj.delta_h.is_finite() && metropolis_accept(rng, traj.delta_h);
        if accepted {
            theta = traj.end;
            lp = traj.log_posterior;
        }
        rec.record_block(t, accepted);
        rec.keep(t, theta);
    }
    (rec.finish(SamplerKind::Hmc, rng.seed()), theta)
}

/// Hamiltonian Monte Carlo with identity mass matrix. Trajectories that leave
/// the open unit cube are rejected.
pub fn hmc(rng: &mut RngStream, ctx: &PosteriorContext, tuning: &HmcTuning, length: McmcLength) -> Result<ChainResult> {
    let start = warm_start(rng, ctx)?;
    Ok(hmc_from(rng, ctx, tuning, length, start).0)
}
