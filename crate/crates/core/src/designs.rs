//! Posterior samplers for case-control and cohort studies.
//!
//! In both designs one of the three population quantities is not estimable
//! from the data, so a prior is placed either on disease prevalence
//! `phi3 = P(D+)` or on the exposure rate `e = P(E+)`. One placement gives a
//! product of independent Beta posteriors; the other induces an interval
//! constraint that is handled by a two-block Gibbs sampler.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chain::{AcceptanceCounts, ChainMeta, ChainResult, SamplerKind};
use crate::distributions::{sample_beta, sample_truncated_beta, RngStream};
use crate::error::{Error, Result};
use crate::types::{BetaParams, ContingencyTable, Design, PopulationParams, Theta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignParam {
    /// `P(E+|D+)`
    Phi1,
    /// `P(E+|D-)`
    Phi2,
    /// `P(D+)`
    Phi3,
    /// `P(E+)`
    E,
    /// `P(D+|E+)`
    P,
    /// `P(D+|E-)`
    Q,
}

impl DesignParam {
    pub fn name(&self) -> &'static str {
        match self {
            DesignParam::Phi1 => "phi1",
            DesignParam::Phi2 => "phi2",
            DesignParam::Phi3 => "phi3",
            DesignParam::E => "e",
            DesignParam::P => "p",
            DesignParam::Q => "q",
        }
    }
}

/// Which unidentified quantity carries the informative prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorTarget {
    #[serde(alias = "disease")]
    DiseasePrevalence,
    #[serde(alias = "exposure")]
    ExposureRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignPriorSpec {
    pub priors: BTreeMap<DesignParam, BetaParams>,
    pub target: PriorTarget,
}

impl DesignPriorSpec {
    pub fn new(target: PriorTarget) -> Self {
        DesignPriorSpec { priors: BTreeMap::new(), target }
    }

    pub fn with(mut self, param: DesignParam, prior: BetaParams) -> Self {
        self.priors.insert(param, prior);
        self
    }

    /// Parameters that need a prior for the given design and prior placement.
    pub fn required(design: Design, target: PriorTarget) -> Result<&'static [DesignParam]> {
        use DesignParam::*;
        match (design, target) {
            (Design::CaseControl, PriorTarget::DiseasePrevalence) => Ok(&[Phi1, Phi2, Phi3]),
            (Design::CaseControl, PriorTarget::ExposureRate) => Ok(&[Phi1, Phi2, E]),
            (Design::Cohort, PriorTarget::ExposureRate) => Ok(&[P, Q, E]),
            (Design::Cohort, PriorTarget::DiseasePrevalence) => Ok(&[P, Q, Phi3]),
            (Design::CrossSectional, _) => {
                Err(Error::InvalidInput("cross-sectional data uses the misclassification model".into()))
            }
        }
    }

    pub fn get(&self, param: DesignParam) -> Result<BetaParams> {
        self.priors
            .get(&param)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("missing prior for {}", param.name())))
    }

    pub fn validate(&self, design: Design) -> Result<()> {
        for &param in Self::required(design, self.target)? {
            self.get(param)?.validate()?;
        }
        Ok(())
    }
}

/// Case-control parametrization: the two exposure rates and disease prevalence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiCaseControl {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

impl PhiCaseControl {
    pub fn new(phi1: f64, phi2: f64, phi3: f64) -> Result<Self> {
        PopulationParams::new(phi1, phi2, phi3)?;
        Ok(PhiCaseControl { phi1, phi2, phi3 })
    }

    /// Disease prevalence implied by an exposure rate,
    /// `phi3 = (e - phi2) / (phi1 - phi2)`, which must lie in [0, 1].
    pub fn from_exposure(phi1: f64, phi2: f64, e: f64) -> Result<Self> {
        if phi1 == phi2 {
            return Err(Error::InvalidInput("phi1 = phi2 leaves P(D+) undetermined".into()));
        }
        let phi3 = (e - phi2) / (phi1 - phi2);
        if !(0.0..=1.0).contains(&phi3) {
            return Err(Error::InvalidInput(format!(
                "e = {e} lies outside [min(phi1, phi2), max(phi1, phi2)]"
            )));
        }
        Ok(PhiCaseControl { phi1, phi2, phi3 })
    }

    /// `e = phi1 phi3 + phi2 (1 - phi3)`.
    pub fn exposure(&self) -> f64 {
        self.phi1 * self.phi3 + self.phi2 * (1.0 - self.phi3)
    }

    /// `(p, q, e)` by Bayes' rule.
    pub fn population(&self) -> PopulationParams {
        let (f1, f2, f3) = (self.phi1, self.phi2, self.phi3);
        let e = self.exposure();
        let p = ratio(f1 * f3, f1 * f3 + f2 * (1.0 - f3));
        let q = ratio((1.0 - f1) * f3, (1.0 - f1) * f3 + (1.0 - f2) * (1.0 - f3));
        PopulationParams { p, q, e }
    }

    /// PAR written directly in terms of `phi`, without passing through `(p, q, e)`.
    pub fn par(&self) -> f64 {
        let (f1, f2, f3) = (self.phi1, self.phi2, self.phi3);
        f1 * f3
            - ratio(
                (1.0 - f1) * f3 * (f1 * f3 + f2 * (1.0 - f3)),
                (1.0 - f1) * f3 + (1.0 - f2) * (1.0 - f3),
            )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsOptions {
    pub burn_in: usize,
    /// Maximum consecutive rejections in the joint redraw step.
    pub rejection_cap: u64,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions { burn_in: 1_000, rejection_cap: 1_000_000 }
    }
}

fn require_design(table: &ContingencyTable, design: Design, spec: &DesignPriorSpec, target: PriorTarget) -> Result<()> {
    if table.design != design {
        return Err(Error::InvalidInput(format!("expected a {design:?} table, got {:?}", table.design)));
    }
    if spec.target != target {
        return Err(Error::InvalidInput(format!("sampler requires the prior on {target:?}")));
    }
    spec.validate(design)
}

fn posterior(prior: BetaParams, successes: u64, trials: u64) -> BetaParams {
    BetaParams { alpha: prior.alpha + successes as f64, beta: prior.beta + (trials - successes) as f64 }
}

fn direct_result(draws: Vec<Theta>, sampler: SamplerKind, seed: u64, start: Instant) -> ChainResult {
    let n = draws.len() as u64;
    ChainResult {
        draws,
        weights: None,
        acceptance: AcceptanceCounts::all_accepted(n),
        acceptance_with_burn_in: AcceptanceCounts::all_accepted(n),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        meta: ChainMeta { sampler, seed, burn_in: 0 },
    }
}

/// Case-control study with a prior on disease prevalence: independent
/// conjugate draws of `(phi1, phi2)` and prior draws of `phi3`.
pub fn casecontrol_closed_form(
    rng: &mut RngStream,
    table: &ContingencyTable,
    spec: &DesignPriorSpec,
    n_draws: usize,
) -> Result<ChainResult> {
    require_design(table, Design::CaseControl, spec, PriorTarget::DiseasePrevalence)?;
    let start = Instant::now();
    let post1 = posterior(spec.get(DesignParam::Phi1)?, table.x11, table.n1());
    let post2 = posterior(spec.get(DesignParam::Phi2)?, table.x12, table.n2());
    let prior3 = spec.get(DesignParam::Phi3)?;
    let draws = (0..n_draws)
        .map(|_| {
            let phi = PhiCaseControl {
                phi1: sample_beta(rng, &post1),
                phi2: sample_beta(rng, &post2),
                phi3: sample_beta(rng, &prior3),
            };
            Theta::perfect_test(phi.population())
        })
        .collect();
    Ok(direct_result(draws, SamplerKind::CaseControlClosedForm, rng.seed(), start))
}

/// Cohort study with a prior on the exposure rate: independent conjugate
/// draws of `(p, q)` and prior draws of `e`.
pub fn cohort_closed_form(
    rng: &mut RngStream,
    table: &ContingencyTable,
    spec: &DesignPriorSpec,
    n_draws: usize,
) -> Result<ChainResult> {
    require_design(table, Design::Cohort, spec, PriorTarget::ExposureRate)?;
    let start = Instant::now();
    let post_p = posterior(spec.get(DesignParam::P)?, table.x11, table.m1());
    let post_q = posterior(spec.get(DesignParam::Q)?, table.x21, table.m2());
    let prior_e = spec.get(DesignParam::E)?;
    let draws = (0..n_draws)
        .map(|_| {
            let p = sample_beta(rng, &post_p);
            let q = sample_beta(rng, &post_q);
            let e = sample_beta(rng, &prior_e);
            Theta::perfect_test(PopulationParams { p, q, e })
        })
        .collect();
    Ok(direct_result(draws, SamplerKind::CohortClosedForm, rng.seed(), start))
}

/// Two identified rates `(a, b)` and an unidentified quantity `z` that must lie
/// between them. Both constrained designs reduce to this shape.
struct IntervalGibbs {
    post_a: BetaParams,
    post_b: BetaParams,
    prior_z: BetaParams,
    opts: GibbsOptions,
}

impl IntervalGibbs {
    fn initial(&self, rng: &mut RngStream) -> Result<(f64, f64)> {
        for _ in 0..self.opts.rejection_cap {
            let a = sample_beta(rng, &self.post_a);
            let b = sample_beta(rng, &self.post_b);
            if a != b {
                return Ok((a, b));
            }
        }
        Err(Error::RejectionStall { cap: self.opts.rejection_cap })
    }

    /// One sweep: `z` from its truncated prior, then `(a, b)` jointly redrawn
    /// until they straddle `z`.
    fn sweep(&self, rng: &mut RngStream, a: f64, b: f64) -> Result<(f64, f64, f64)> {
        let z = sample_truncated_beta(rng, &self.prior_z, a.min(b), a.max(b))?;
        for _ in 0..self.opts.rejection_cap {
            let a_new = sample_beta(rng, &self.post_a);
            let b_new = sample_beta(rng, &self.post_b);
            if (a_new - z) * (b_new - z) < 0.0 {
                return Ok((a_new, b_new, z));
            }
        }
        Err(Error::RejectionStall { cap: self.opts.rejection_cap })
    }

    fn run(
        &self,
        rng: &mut RngStream,
        n_draws: usize,
        to_theta: impl Fn(f64, f64, f64) -> Theta,
        sampler: SamplerKind,
    ) -> Result<ChainResult> {
        let start = Instant::now();
        let (mut a, mut b) = self.initial(rng)?;
        let mut draws = Vec::with_capacity(n_draws);
        for t in 0..self.opts.burn_in + n_draws {
            let (a_new, b_new, z) = self.sweep(rng, a, b)?;
            a = a_new;
            b = b_new;
            if t >= self.opts.burn_in {
                draws.push(to_theta(a, b, z));
            }
        }
        let total = (self.opts.burn_in + n_draws) as u64;
        Ok(ChainResult {
            draws,
            weights: None,
            acceptance: AcceptanceCounts::all_accepted(n_draws as u64),
            acceptance_with_burn_in: AcceptanceCounts::all_accepted(total),
            elapsed_seconds: start.elapsed().as_secs_f64(),
            meta: ChainMeta { sampler, seed: rng.seed(), burn_in: self.opts.burn_in },
        })
    }
}

/// Case-control study with a prior on the exposure rate.
///
/// `e` must lie between `phi1` and `phi2`; the sampler alternates an
/// inverse-cdf draw of `e` from its truncated prior with a joint rejection
/// redraw of `(phi1, phi2)` from their conjugate posteriors.
pub fn casecontrol_constrained_gibbs(
    rng: &mut RngStream,
    table: &ContingencyTable,
    spec: &DesignPriorSpec,
    n_draws: usize,
    opts: GibbsOptions,
) -> Result<ChainResult> {
    require_design(table, Design::CaseControl, spec, PriorTarget::ExposureRate)?;
    let gibbs = IntervalGibbs {
        post_a: posterior(spec.get(DesignParam::Phi1)?, table.x11, table.n1()),
        post_b: posterior(spec.get(DesignParam::Phi2)?, table.x12, table.n2()),
        prior_z: spec.get(DesignParam::E)?,
        opts,
    };
    gibbs.run(
        rng,
        n_draws,
        |phi1, phi2, e| {
            debug_assert!(phi1 != phi2);
            let phi3 = ((e - phi2) / (phi1 - phi2)).clamp(0.0, 1.0);
            Theta::perfect_test(PhiCaseControl { phi1, phi2, phi3 }.population())
        },
        SamplerKind::CaseControlConstrainedGibbs,
    )
}

/// Cohort study with a prior on disease prevalence: the mirror image of
/// [`casecontrol_constrained_gibbs`] with `phi3` constrained between `p` and `q`.
pub fn cohort_constrained_gibbs(
    rng: &mut RngStream,
    table: &ContingencyTable,
    spec: &DesignPriorSpec,
    n_draws: usize,
    opts: GibbsOptions,
) -> Result<ChainResult> {
    require_design(table, Design::Cohort, spec, PriorTarget::DiseasePrevalence)?;
    let gibbs = IntervalGibbs {
        post_a: posterior(spec.get(DesignParam::P)?, table.x11, table.m1()),
        post_b: posterior(spec.get(DesignParam::Q)?, table.x21, table.m2()),
        prior_z: spec.get(DesignParam::Phi3)?,
        opts,
    };
    gibbs.run(
        rng,
        n_draws,
        |p, q, phi3| {
            debug_assert!(p != q);
            let e = ((phi3 - q) / (p - q)).clamp(0.0, 1.0);
            Theta::perfect_test(PopulationParams { p, q, e })
        },
        SamplerKind::CohortConstrainedGibbs,
    )
}

/// Runs whichever sampler matches the table's design and the prior placement.
pub fn sample_design(
    rng: &mut RngStream,
    table: &ContingencyTable,
    spec: &DesignPriorSpec,
    n_draws: usize,
    opts: GibbsOptions,
) -> Result<ChainResult> {
    match (table.design, spec.target) {
        (Design::CaseControl, PriorTarget::DiseasePrevalence) => casecontrol_closed_form(rng, table, spec, n_draws),
        (Design::CaseControl, PriorTarget::ExposureRate) => {
            casecontrol_constrained_gibbs(rng, table, spec, n_draws, opts)
        }
        (Design::Cohort, PriorTarget::ExposureRate) => cohort_closed_form(rng, table, spec, n_draws),
        (Design::Cohort, PriorTarget::DiseasePrevalence) => cohort_constrained_gibbs(rng, table, spec, n_draws, opts),
        (Design::CrossSectional, _) => {
            Err(Error::InvalidInput("cross-sectional data uses the misclassification samplers".into()))
        }
    }
}

/// The sampler [`sample_design`] dispatches to.
pub fn design_sampler(design: Design, target: PriorTarget) -> Result<SamplerKind> {
    match (design, target) {
        (Design::CaseControl, PriorTarget::DiseasePrevalence) => Ok(SamplerKind::CaseControlClosedForm),
        (Design::CaseControl, PriorTarget::ExposureRate) => Ok(SamplerKind::CaseControlConstrainedGibbs),
        (Design::Cohort, PriorTarget::ExposureRate) => Ok(SamplerKind::CohortClosedForm),
        (Design::Cohort, PriorTarget::DiseasePrevalence) => Ok(SamplerKind::CohortConstrainedGibbs),
        (Design::CrossSectional, _) => {
            Err(Error::InvalidInput("cross-sectional data uses the misclassification samplers".into()))
        }
    }
}
