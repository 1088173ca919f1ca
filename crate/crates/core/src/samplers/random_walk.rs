use crate::chain::{ChainResult, SamplerKind};
use crate::distributions::RngStream;
use crate::error::Result;
use crate::misclass::PosteriorContext;
use crate::types::Theta;

use super::{warm_start, metropolis_accept, McmcLength, Recorder, TuningParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWalkTuning {
    /// Multiplier on the per-component scale.
    pub c: f64,
    /// Per-component posterior standard deviations; estimated by a pilot run when unset.
    pub scales: Option<[f64; 5]>,
    pub pilot_iterations: usize,
    pub pilot_step: f64,
}

impl Default for RandomWalkTuning {
    fn default() -> Self {
        RandomWalkTuning { c: 2.15, scales: None, pilot_iterations: 1000, pilot_step: 0.05 }
    }
}

impl RandomWalkTuning {
    pub fn resolve(params: &TuningParams) -> Self {
        let default = Self::default();
        RandomWalkTuning { c: params.c.unwrap_or(default.c), scales: params.rw_scales, ..default }
    }
}

/// One component-wise sweep. Returns the new log posterior.
fn sweep(
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    theta: &mut Theta,
    mut lp: f64,
    steps: &[f64; 5],
    mut on_update: impl FnMut(usize, bool),
) -> f64 {
    let mut x = theta.to_array();
    for i in 0..5 {
        let old = x[i];
        x[i] = old + steps[i] * rng.standard_normal();
        let lp_new = ctx.log_posterior(&Theta::from_array(x));
        let accepted = metropolis_accept(rng, lp_new - lp);
        if accepted {
            lp = lp_new;
        } else {
            x[i] = old;
        }
        on_update(i, accepted);
    }
    *theta = Theta::from_array(x);
    lp
}

fn standard_deviations(draws: &[[f64; 5]]) -> [f64; 5] {
    let n = draws.len() as f64;
    std::array::from_fn(|i| {
        let mean = draws.iter().map(|d| d[i]).sum::<f64>() / n;
        (draws.iter().map(|d| (d[i] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    })
}

/// Estimates per-component posterior standard deviations from a pilot run
/// with a fixed isotropic step. Returns the scales and the pilot's final state.
pub fn pilot_scales(
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    start: Theta,
    iterations: usize,
    step: f64,
) -> ([f64; 5], Theta) {
    let mut theta = start;
    let mut lp = ctx.log_posterior(&theta);
    let mut draws = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        lp = sweep(rng, ctx, &mut theta, lp, &[step; 5], |_, _| {});
        draws.push(theta.to_array());
    }
    let sd = standard_deviations(&draws);
    // a component that never moved keeps the pilot step
    (sd.map(|s| if s > 0.0 { s } else { step }), theta)
}

/// Component-wise random-walk Metropolis with proposal `N(theta_i, (c sigma_i)^2)`.
pub fn mh_random_walk(
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    tuning: &RandomWalkTuning,
    length: McmcLength,
) -> Result<ChainResult> {
    let mut rec = Recorder::new(length);
    let mut theta = warm_start(rng, ctx)?;
    let scales = match tuning.scales {
        Some(s) => s,
        None => {
            let (s, end) = pilot_scales(rng, ctx, theta, tuning.pilot_iterations, tuning.pilot_step);
            theta = end;
            s
        }
    };
    let steps = scales.map(|s| tuning.c * s);
    let mut lp = ctx.log_posterior(&theta);
    for t in 0..length.iterations {
        lp = sweep(rng, ctx, &mut theta, lp, &steps, |i, acc| rec.record(t, i, acc));
        rec.keep(t, theta);
    }
    Ok(rec.finish(SamplerKind::RandomWalk, rng.seed()))
}
