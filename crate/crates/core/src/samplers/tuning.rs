//! Default tuning constants and pilot-run searches.

use crate::chain::SamplerKind;
use crate::distributions::RngStream;
use crate::error::{Error, Result};
use crate::misclass::PosteriorContext;

use super::adapted::{adapted_from, AdaptedTuning, Metric};
use super::hmc::{hmc_from, HmcTuning};
use super::{warm_start, McmcLength, TuningParams};

/// Acceptance band for random-walk type samplers.
pub const RW_BAND: (f64, f64) = (0.20, 0.50);
/// Acceptance band for HMC.
pub const HMC_BAND: (f64, f64) = (0.50, 0.75);

const PILOT_ITERATIONS: usize = 2000;
const HMC_PILOT_ITERATIONS: usize = 300;
const MAX_SEARCH_ROUNDS: usize = 30;

/// Published `(tau, c)` for the adapted samplers at data scales 1, 10 and 100.
/// Other scales use the nearest tabulated one on a log scale.
pub fn published_adapted(kind: SamplerKind, data_scale: u64) -> Result<(f64, f64)> {
    let table: [(f64, f64); 3] = match kind {
        SamplerKind::AdaptedJtj => [(0.2, 0.00075), (0.1, 0.00009), (0.005, 0.000005)],
        SamplerKind::AdaptedFisher => [(0.1, 0.5), (0.1, 0.5), (0.1, 0.3)],
        other => return Err(Error::InvalidInput(format!("{other} has no published tuning"))),
    };
    let idx = ((data_scale.max(1) as f64).log10().round() as usize).min(2);
    Ok(table[idx])
}

/// Moves a proposal scale until the pilot acceptance lands in `band`.
///
/// Larger scales must give lower acceptance. Doubles or halves until the band
/// is bracketed, then bisects on a log scale.
pub fn tune_scale(initial: f64, band: (f64, f64), mut pilot: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let target = 0.5 * (band.0 + band.1);
    let mut c = initial;
    // too-small and too-large scales seen so far
    let (mut small, mut large): (Option<f64>, Option<f64>) = (None, None);
    for _ in 0..MAX_SEARCH_ROUNDS {
        let acc = pilot(c)?;
        if (band.0..=band.1).contains(&acc) {
            return Ok(c);
        }
        if acc > target {
            small = Some(c);
        } else {
            large = Some(c);
        }
        c = match (small, large) {
            (Some(s), Some(l)) => (s * l).sqrt(),
            (Some(s), None) => s * 4.0,
            (None, Some(l)) => l / 4.0,
            (None, None) => unreachable!(),
        };
    }
    Err(Error::Untunable(format!("no scale gave acceptance in [{}, {}]", band.0, band.1)))
}

/// Adapted-sampler tuning: explicit values win, then published ones; `c` is
/// re-tuned by pilot runs only when it was not given and the pilot acceptance
/// falls outside [`RW_BAND`].
pub fn resolve_adapted(
    rng: &mut RngStream,
    ctx: &PosteriorContext,
    params: &TuningParams,
    kind: SamplerKind,
    data_scale: u64,
) -> Result<AdaptedTuning> {
    let (tau0, c0) = published_adapted(kind, data_scale)?;
    let mut tuning = AdaptedTuning {
        c: params.c.unwrap_or(c0),
        tau: params.tau.unwrap_or(tau0),
        hessian_form: params.hessian_form,
        curvature_sign: params.curvature_sign,
    };
    if params.c.is_some() {
        return Ok(tuning);
    }
    let metric = if kind == SamplerKind::AdaptedJtj { Metric::Jtj } else { Metric::Fisher };
    let mut state = warm_start(rng, ctx)?;
    let length = McmcLength::new(PILOT_ITERATIONS, PILOT_ITERATIONS / 2)?;
    tuning.c = tune_scale(tuning.c, RW_BAND, |c| {
        let t = AdaptedTuning { c, ..tuning };
        let (chain, end) = adapted_from(rng, ctx, metric, &t, length, state)?;
        state = end;
        Ok(chain.acceptance.rate(0))
    })?;
    Ok(tuning)
}

/// Searches the leapfrog step size for acceptance in [`HMC_BAND`].
///
/// Starts at 0.05 and halves until acceptance reaches the band, then bisects
/// between the last two step sizes. Fails when no step size down to `1e-5`
/// reaches the band, or when bisection cannot land inside it.
pub fn tune_hmc(rng: &mut RngStream, ctx: &PosteriorContext, leapfrog_steps: Option<usize>) -> Result<HmcTuning> {
    let steps = leapfrog_steps.unwrap_or(HmcTuning::DEFAULT_LEAPFROG_STEPS);
    let mut state = warm_start(rng, ctx)?;
    let length = McmcLength::new(HMC_PILOT_ITERATIONS, HMC_PILOT_ITERATIONS / 3)?;
    let mut pilot = |epsilon: f64| {
        let t = HmcTuning { epsilon, leapfrog_steps: steps };
        let (chain, end) = hmc_from(rng, ctx, &t, length, state);
        state = end;
        chain.acceptance.rate(0)
    };
    let (lo, hi) = HMC_BAND;
    let mut eps = 0.05;
    let mut too_large: Option<f64> = None;
    while eps >= 1e-5 {
        let acc = pilot(eps);
        if acc >= lo {
            if acc <= hi {
                return Ok(HmcTuning { epsilon: eps, leapfrog_steps: steps });
            }
            // overshot the band: bisect between eps and the previous step size
            let Some(mut big) = too_large else { break };
            let mut small = eps;
            for _ in 0..10 {
                let mid = (small * big).sqrt();
                let acc = pilot(mid);
                if (lo..=hi).contains(&acc) {
                    return Ok(HmcTuning { epsilon: mid, leapfrog_steps: steps });
                }
                if acc > hi {
                    small = mid;
                } else {
                    big = mid;
                }
            }
            break;
        }
        too_large = Some(eps);
        eps *= 0.5;
    }
    Err(Error::Untunable(format!("HMC acceptance never entered [{lo}, {hi}] with {steps} leapfrog steps")))
}
