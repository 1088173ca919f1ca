//! Sampler output and posterior summaries.

use std::fmt;
use std::str::FromStr;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::types::Theta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SamplerKind {
    CaseControlClosedForm,
    CaseControlConstrainedGibbs,
    CohortClosedForm,
    CohortConstrainedGibbs,
    Importance,
    RandomWalk,
    Gibbs,
    Hmc,
    AdaptedJtj,
    AdaptedFisher,
    LimitingPosterior,
}

impl SamplerKind {
    /// Samplers for the cross-sectional misclassification model.
    pub const CROSS_SECTIONAL: [SamplerKind; 6] = [
        SamplerKind::Importance,
        SamplerKind::RandomWalk,
        SamplerKind::Gibbs,
        SamplerKind::Hmc,
        SamplerKind::AdaptedFisher,
        SamplerKind::AdaptedJtj,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::CaseControlClosedForm => "case_control_closed_form",
            SamplerKind::CaseControlConstrainedGibbs => "case_control_constrained_gibbs",
            SamplerKind::CohortClosedForm => "cohort_closed_form",
            SamplerKind::CohortConstrainedGibbs => "cohort_constrained_gibbs",
            SamplerKind::Importance => "importance",
            SamplerKind::RandomWalk => "random_walk",
            SamplerKind::Gibbs => "gibbs",
            SamplerKind::Hmc => "hmc",
            SamplerKind::AdaptedJtj => "adapted_jtj",
            SamplerKind::AdaptedFisher => "adapted_fisher",
            SamplerKind::LimitingPosterior => "limiting_posterior",
        }
    }

    /// Whether draws carry importance weights.
    pub fn is_weighted(&self) -> bool {
        matches!(self, SamplerKind::Importance | SamplerKind::LimitingPosterior)
    }

    /// Whether one accept/reject decision moves all parameters at once.
    pub fn is_blockwise(&self) -> bool {
        !matches!(self, SamplerKind::RandomWalk)
    }

    /// Whether the draws form a Markov chain (and so carry autocorrelation).
    pub fn is_markov(&self) -> bool {
        matches!(
            self,
            SamplerKind::CaseControlConstrainedGibbs
                | SamplerKind::CohortConstrainedGibbs
                | SamplerKind::RandomWalk
                | SamplerKind::Gibbs
                | SamplerKind::Hmc
                | SamplerKind::AdaptedJtj
                | SamplerKind::AdaptedFisher
        )
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const ALL: [SamplerKind; 11] = [
            SamplerKind::CaseControlClosedForm,
            SamplerKind::CaseControlConstrainedGibbs,
            SamplerKind::CohortClosedForm,
            SamplerKind::CohortConstrainedGibbs,
            SamplerKind::Importance,
            SamplerKind::RandomWalk,
            SamplerKind::Gibbs,
            SamplerKind::Hmc,
            SamplerKind::AdaptedJtj,
            SamplerKind::AdaptedFisher,
            SamplerKind::LimitingPosterior,
        ];
        ALL.into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown sampler '{s}'")))
    }
}

/// Per-parameter acceptance bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AcceptanceCounts {
    pub accepted: [u64; 5],
    pub attempted: [u64; 5],
}

impl AcceptanceCounts {
    pub fn record(&mut self, component: usize, accepted: bool) {
        self.attempted[component] += 1;
        if accepted {
            self.accepted[component] += 1;
        }
    }

    pub fn record_block(&mut self, accepted: bool) {
        for k in 0..5 {
            self.record(k, accepted);
        }
    }

    /// All attempts accepted, as for direct samplers.
    pub fn all_accepted(n: u64) -> Self {
        AcceptanceCounts { accepted: [n; 5], attempted: [n; 5] }
    }

    pub fn rate(&self, component: usize) -> f64 {
        if self.attempted[component] == 0 {
            f64::NAN
        } else {
            self.accepted[component] as f64 / self.attempted[component] as f64
        }
    }

    pub fn rates(&self) -> [f64; 5] {
        std::array::from_fn(|k| self.rate(k))
    }

    pub fn merge(&mut self, other: &AcceptanceCounts) {
        for k in 0..5 {
            self.accepted[k] += other.accepted[k];
            self.attempted[k] += other.attempted[k];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainMeta {
    pub sampler: SamplerKind,
    pub seed: u64,
    pub burn_in: usize,
}

/// Output of one sampler run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    /// Retained draws, burn-in excluded.
    pub draws: Vec<Theta>,
    /// Normalized importance weights, one per draw.
    pub weights: Option<Vec<f64>>,
    /// Acceptance over the retained iterations.
    pub acceptance: AcceptanceCounts,
    /// Acceptance over every iteration including burn-in.
    pub acceptance_with_burn_in: AcceptanceCounts,
    pub elapsed_seconds: f64,
    pub meta: ChainMeta,
}

impl ChainResult {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn values(&self, f: impl Fn(&Theta) -> f64) -> Vec<f64> {
        self.draws.iter().map(f).collect()
    }

    /// Iterations spent, burn-in included. Every importance proposal counts,
    /// whether or not it was retained.
    pub fn iterations(&self) -> u64 {
        self.acceptance_with_burn_in.attempted[0]
    }
}

/// Rescales `weights` to sum to one.
pub fn normalize_weights(weights: &mut [f64]) -> Result<()> {
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput("importance weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(())
}

/// Posterior mean, equal-tailed 95% interval and efficiency of one quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ess: f64,
    pub psrf: Option<f64>,
    pub ess_per_second: f64,
    /// Set when the series was constant and `ess` fell back to the draw count.
    pub zero_variance: bool,
}

pub const CI_LOW: f64 = 0.025;
pub const CI_HIGH: f64 = 0.975;

/// Quantile of sorted data by linear interpolation between order statistics:
/// `h = (n - 1) u`, result `x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h])`.
pub fn quantile_sorted(sorted: &[f64], u: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * u.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Weighted analogue of [`quantile_sorted`].
///
/// Each point of positive weight sits at the plotting position
/// `(C_k - w_k/2 - w_1/2) / (1 - w_1/2 - w_n/2)` where `C_k` is the cumulative
/// weight; with equal weights this is exactly `(k - 1)/(n - 1)`. Zero-weight
/// points are dropped.
pub fn weighted_quantile(values: &[f64], weights: &[f64], u: f64) -> f64 {
    let mut pairs: Vec<(f64, f64)> =
        values.iter().copied().zip(weights.iter().copied()).filter(|&(_, w)| w > 0.0).collect();
    assert!(!pairs.is_empty(), "weighted quantile needs a positive weight");
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    if n == 1 {
        return pairs[0].0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let w_first = pairs[0].1 / total;
    let w_last = pairs[n - 1].1 / total;
    let denom = 1.0 - 0.5 * (w_first + w_last);
    let u = u.clamp(0.0, 1.0);
    let mut cumulative = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for &(x, w) in &pairs {
        let w = w / total;
        cumulative += w;
        let position = ((cumulative - 0.5 * w - 0.5 * w_first) / denom).clamp(0.0, 1.0);
        if position >= u {
            return match prev {
                None => x,
                Some((px, pp)) if position > pp => px + (u - pp) / (position - pp) * (x - px),
                Some(_) => x,
            };
        }
        prev = Some((x, position));
    }
    pairs[n - 1].0
}

/// Arithmetic mean computed about the first value, exact for constant input.
pub(crate) fn shifted_mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

fn all_equal(weights: &[f64]) -> bool {
    weights.windows(2).all(|w| w[0] == w[1])
}

/// Mean and equal-tailed 95% credible interval of `values`, optionally weighted.
///
/// Identical weights take the unweighted path so both agree bit for bit.
pub fn mean_and_interval(values: &[f64], weights: Option<&[f64]>) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyChain);
    }
    match weights {
        Some(w) if !all_equal(w) => {
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                return Err(Error::AllZeroWeights);
            }
            let x0 = values[0];
            let shift = values.iter().zip(w).filter(|(_, &wi)| wi > 0.0).map(|(x, wi)| (x - x0) * wi).sum::<f64>();
            let mean = x0 + shift / total;
            Ok((mean, weighted_quantile(values, w, CI_LOW), weighted_quantile(values, w, CI_HIGH)))
        }
        Some(w) if w.first().is_some_and(|&w0| !(w0 > 0.0)) => Err(Error::AllZeroWeights),
        _ => {
            let mean = shifted_mean(values);
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            Ok((mean, quantile_sorted(&sorted, CI_LOW), quantile_sorted(&sorted, CI_HIGH)))
        }
    }
}

/// Summarizes `transform` over the draws of one chain.
pub fn summarize(chain: &ChainResult, transform: impl Fn(&Theta) -> f64) -> Result<PosteriorSummary> {
    let values = chain.values(transform);
    let (mean, ci_low, ci_high) = mean_and_interval(&values, chain.weights.as_deref())?;
    let (ess, zero_variance) = chain_ess(&values, chain)?;
    let ess_per_second = if chain.elapsed_seconds > 0.0 { ess / chain.elapsed_seconds } else { f64::NAN };
    Ok(PosteriorSummary { mean, ci_low, ci_high, ess, psrf: None, ess_per_second, zero_variance })
}

/// ESS of one chain's values: weight based for weighted chains, autocorrelation
/// based for Markov chains, and the draw count for independent draws.
pub(crate) fn chain_ess(values: &[f64], chain: &ChainResult) -> Result<(f64, bool)> {
    if let Some(w) = &chain.weights {
        return Ok((diagnostics::ess_weights(w)?, false));
    }
    if !chain.meta.sampler.is_markov() {
        return Ok((values.len() as f64, false));
    }
    if values.len() < diagnostics::MIN_SERIES_LEN {
        return Ok((values.len() as f64, false));
    }
    match diagnostics::ess_autocorr(values) {
        Ok(ess) => Ok((ess, false)),
        Err(Error::ZeroVariance) => Ok((values.len() as f64, true)),
        Err(e) => Err(e),
    }
}

/// Pools several chains of the same sampler: mean and interval over all draws,
/// ESS summed over chains, PSRF across chains when there are at least two
/// Markov chains of equal length.
pub fn summarize_chains(chains: &[ChainResult], transform: impl Fn(&Theta) -> f64 + Copy) -> Result<PosteriorSummary> {
    if chains.is_empty() || chains.iter().all(|c| c.is_empty()) {
        return Err(Error::EmptyChain);
    }
    if chains.len() == 1 {
        return summarize(&chains[0], transform);
    }
    let per_chain: Vec<Vec<f64>> = chains.iter().map(|c| c.values(transform)).collect();
    let values: Vec<f64> = per_chain.iter().flatten().copied().collect();
    let weighted = chains.iter().any(|c| c.weights.is_some());
    let (mean, ci_low, ci_high) = if weighted {
        // each chain's weights sum to one; give every chain equal total mass
        let mut pooled = Vec::with_capacity(values.len());
        for c in chains {
            match &c.weights {
                Some(w) => pooled.extend(w.iter().copied()),
                None => pooled.extend(std::iter::repeat_n(1.0 / c.len() as f64, c.len())),
            }
        }
        mean_and_interval(&values, Some(&pooled))?
    } else {
        mean_and_interval(&values, None)?
    };
    let mut ess = 0.0;
    let mut seconds = 0.0;
    let mut zero_variance = false;
    for (c, v) in chains.iter().zip(&per_chain) {
        let (e, z) = chain_ess(v, c)?;
        ess += e;
        zero_variance |= z;
        seconds += c.elapsed_seconds;
    }
    let markov = chains.iter().all(|c| c.meta.sampler.is_markov());
    let equal_len = per_chain.windows(2).all(|w| w[0].len() == w[1].len());
    let psrf = if markov && equal_len && per_chain[0].len() >= diagnostics::MIN_SERIES_LEN {
        let refs: Vec<&[f64]> = per_chain.iter().map(|v| v.as_slice()).collect();
        diagnostics::bgr_psrf(&refs).ok()
    } else {
        None
    };
    let ess_per_second = if seconds > 0.0 { ess / seconds } else { f64::NAN };
    Ok(PosteriorSummary { mean, ci_low, ci_high, ess, psrf, ess_per_second, zero_variance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_from(values: &[f64], weights: Option<Vec<f64>>) -> ChainResult {
        ChainResult {
            draws: values.iter().map(|&v| Theta { p: v, q: 0.0, e: 0.5, se: 1.0, sp: 1.0 }).collect(),
            weights,
            acceptance: AcceptanceCounts::all_accepted(values.len() as u64),
            acceptance_with_burn_in: AcceptanceCounts::all_accepted(values.len() as u64),
            elapsed_seconds: 1.0,
            meta: ChainMeta { sampler: SamplerKind::CohortClosedForm, seed: 0, burn_in: 0 },
        }
    }

    #[test]
    fn constant_chain() {
        let s = summarize(&chain_from(&[0.3; 50], None), |t| t.p).unwrap();
        assert_eq!((s.mean, s.ci_low, s.ci_high), (0.3, 0.3, 0.3));
    }

    #[test]
    fn hundred_point_sequence() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let s = summarize(&chain_from(&values, None), |t| t.p).unwrap();
        assert!((s.mean - 0.505).abs() < 1e-12);
        // h = 99 * 0.025 = 2.475 -> 0.03 + 0.475 * 0.01
        assert!((s.ci_low - 0.03475).abs() < 1e-12);
        // h = 99 * 0.975 = 96.525 -> 0.97 + 0.525 * 0.01
        assert!((s.ci_high - 0.97525).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_draw_is_ignored() {
        let s = summarize(&chain_from(&[0.0, 1.0], Some(vec![1.0, 0.0])), |t| t.p).unwrap();
        assert_eq!((s.mean, s.ci_low, s.ci_high), (0.0, 0.0, 0.0));
    }

    #[test]
    fn equal_weights_match_unweighted_exactly() {
        let values: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 / 101.0).collect();
        let w = vec![1.0 / 37.0; 37];
        let a = mean_and_interval(&values, None).unwrap();
        let b = mean_and_interval(&values, Some(&w)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weighted_quantile_reduces_to_order_statistics() {
        // nearly equal weights must land close to the unweighted rule
        let values: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let mut w = vec![1.0; 100];
        w[50] = 1.0 + 1e-9;
        let q = weighted_quantile(&values, &w, 0.025);
        assert!((q - 0.03475).abs() < 1e-8);
    }

    #[test]
    fn weighted_quantile_is_monotone_in_u() {
        let values = [0.5, 0.1, 0.9, 0.3, 0.7];
        let w = [0.1, 3.0, 0.2, 1.0, 0.5];
        let mut last = f64::NEG_INFINITY;
        for i in 0..=100 {
            let q = weighted_quantile(&values, &w, i as f64 / 100.0);
            assert!(q >= last);
            last = q;
        }
        assert_eq!(weighted_quantile(&values, &w, 0.0), 0.1);
        assert_eq!(weighted_quantile(&values, &w, 1.0), 0.9);
    }

    #[test]
    fn empty_chain_errors() {
        assert_eq!(summarize(&chain_from(&[], None), |t| t.p), Err(Error::EmptyChain));
    }

    #[test]
    fn normalize_rejects_bad_weights() {
        assert_eq!(normalize_weights(&mut [0.0, 0.0]), Err(Error::AllZeroWeights));
        assert!(normalize_weights(&mut [1.0, -1.0]).is_err());
        let mut w = [1.0, 3.0];
        normalize_weights(&mut w).unwrap();
        assert_eq!(w, [0.25, 0.75]);
    }
}
