//! Cross-sectional model with an imperfect exposure test.
//!
//! The true table `pi` is observed through a test with sensitivity `Se` and
//! specificity `Sp`, so the data follow `Multinomial(n, eta)` with
//!
//! ```text
//! eta11 = Se pi11 + (1 - Sp) pi21      eta12 = Se pi12 + (1 - Sp) pi22
//! eta21 = (1 - Se) pi11 + Sp pi21      eta22 = (1 - Se) pi12 + Sp pi22
//! ```
//!
//! Five parameters `(p, q, e, Se, Sp)` map onto three free cell probabilities,
//! so the likelihood is constant along two-dimensional ridges.

use std::time::Instant;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::chain::{normalize_weights, AcceptanceCounts, ChainMeta, ChainResult, SamplerKind};
use crate::distributions::{sample_beta, RngStream};
use crate::error::{Error, Result};
use crate::types::{BetaParams, ContingencyTable, Design, Theta};

pub type Jacobian = SMatrix<f64, 4, 5>;
pub type Vector5 = SVector<f64, 5>;
pub type Matrix5 = SMatrix<f64, 5, 5>;

/// Below this `|Se + Sp - 1|` the misclassification map cannot be inverted.
pub const SINGULAR_TEST_TOL: f64 = 1e-12;

/// Observed-cell probabilities `(eta11, eta12, eta21, eta22)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaVector(pub [f64; 4]);

impl EtaVector {
    pub fn new(eta: [f64; 4]) -> Result<Self> {
        let sum: f64 = eta.iter().sum();
        if eta.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{eta:?} is not a probability vector")));
        }
        Ok(EtaVector(eta))
    }

    /// Empirical cell frequencies `x / n`.
    pub fn from_table(table: &ContingencyTable) -> Self {
        let n = table.n() as f64;
        EtaVector(table.counts().map(|x| x as f64 / n))
    }
}

pub fn eta_from_pi(pi: [f64; 4], se: f64, sp: f64) -> EtaVector {
    let [p11, p12, p21, p22] = pi;
    EtaVector([
        se * p11 + (1.0 - sp) * p21,
        se * p12 + (1.0 - sp) * p22,
        (1.0 - se) * p11 + sp * p21,
        (1.0 - se) * p12 + sp * p22,
    ])
}

pub fn eta_from_theta(theta: &Theta) -> EtaVector {
    eta_from_pi(theta.pi(), theta.se, theta.sp)
}

/// Inverts the misclassification map: two independent 2x2 systems, one per
/// true disease row, each with determinant `Se + Sp - 1`.
///
/// Returns [`Error::OutsideA`] when the solution is not a probability table.
pub fn pi_from_eta(eta: &EtaVector, se: f64, sp: f64) -> Result<[f64; 4]> {
    let det = se + sp - 1.0;
    if det.abs() <= SINGULAR_TEST_TOL {
        return Err(Error::SingularTest);
    }
    let [e11, e12, e21, e22] = eta.0;
    let pi = [
        (sp * e11 - (1.0 - sp) * e21) / det,
        (sp * e12 - (1.0 - sp) * e22) / det,
        (se * e21 - (1.0 - se) * e11) / det,
        (se * e22 - (1.0 - se) * e12) / det,
    ];
    if pi.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(pi)
    } else {
        Err(Error::OutsideA)
    }
}

/// Membership in the constraint set: `(eta, Se, Sp)` reconstructs a valid `pi`.
pub fn in_constraint_set(eta: &EtaVector, se: f64, sp: f64) -> bool {
    pi_from_eta(eta, se, sp).is_ok()
}

/// Independent Beta priors on `(p, q, e, Se, Sp)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSectionalPriors {
    pub p: BetaParams,
    pub q: BetaParams,
    pub e: BetaParams,
    pub se: BetaParams,
    pub sp: BetaParams,
}

impl Default for CrossSectionalPriors {
    fn default() -> Self {
        CrossSectionalPriors {
            p: BetaParams::uniform(),
            q: BetaParams::uniform(),
            e: BetaParams { alpha: 2.0, beta: 2.0 },
            se: BetaParams { alpha: 25.0, beta: 3.0 },
            sp: BetaParams { alpha: 30.0, beta: 1.5 },
        }
    }
}

impl CrossSectionalPriors {
    /// Priors in `Theta` component order.
    pub fn as_array(&self) -> [BetaParams; 5] {
        [self.p, self.q, self.e, self.se, self.sp]
    }

    pub fn validate(&self) -> Result<()> {
        self.as_array().iter().try_for_each(BetaParams::validate)
    }

    pub fn ln_density(&self, theta: &Theta) -> f64 {
        self.as_array().iter().zip(theta.to_array()).map(|(prior, v)| prior.ln_pdf(v)).sum()
    }

    /// Draws `(Se, Sp)` from their priors.
    pub fn sample_test(&self, rng: &mut RngStream) -> (f64, f64) {
        (sample_beta(rng, &self.se), sample_beta(rng, &self.sp))
    }
}

/// Unnormalized log importance weight of a point on the ridge through `eta`
/// when `eta` and `(Se, Sp)` were proposed independently of the `(p, q, e)` prior.
///
/// The change of variables from `eta` to `(p, q, e)` contributes
/// `|Se + Sp - 1|^-2 / (e (1 - e))`. Under flat `p, q` and `e ~ Beta(2, 2)`
/// this collapses to `(Se + Sp - 1)^-2`.
pub fn ln_ridge_weight(theta: &Theta, priors: &CrossSectionalPriors) -> f64 {
    -2.0 * (theta.se + theta.sp - 1.0).abs().ln() + priors.p.ln_pdf(theta.p) + priors.q.ln_pdf(theta.q)
        + priors.e.ln_pdf(theta.e)
        - theta.e.ln()
        - (-theta.e).ln_1p()
}

/// Converts log weights to weights normalized to sum to one.
pub(crate) fn weights_from_logs(ln_weights: &[f64]) -> Result<Vec<f64>> {
    let max = ln_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::AllZeroWeights);
    }
    let mut w: Vec<f64> = ln_weights.iter().map(|lw| (lw - max).exp()).collect();
    normalize_weights(&mut w)?;
    Ok(w)
}

/// `d eta / d theta`, rows `(eta11, eta12, eta21, eta22)`, columns `(p, q, e, Se, Sp)`.
pub fn jacobian_eta_theta(theta: &Theta) -> Jacobian {
    let Theta { p, q, e, se, sp } = *theta;
    let [p11, p12, p21, p22] = theta.pi();
    // d pi / d (p, q, e)
    let dpi = SMatrix::<f64, 4, 3>::new(
        e, 0.0, p, //
        -e, 0.0, 1.0 - p, //
        0.0, 1.0 - e, -q, //
        0.0, -(1.0 - e), -(1.0 - q),
    );
    // d eta / d pi
    let mix = SMatrix::<f64, 4, 4>::new(
        se, 0.0, 1.0 - sp, 0.0, //
        0.0, se, 0.0, 1.0 - sp, //
        1.0 - se, 0.0, sp, 0.0, //
        0.0, 1.0 - se, 0.0, sp,
    );
    let mut j = Jacobian::zeros();
    j.fixed_view_mut::<4, 3>(0, 0).copy_from(&(mix * dpi));
    j.set_column(3, &SVector::<f64, 4>::new(p11, p12, -p11, -p12));
    j.set_column(4, &SVector::<f64, 4>::new(-p21, -p22, p21, p22));
    j
}

/// Which diagonal to use for the prior curvature in the Fisher-type proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianForm {
    /// `-alpha / t^2 - beta / (1 - t)^2`.
    Printed,
    /// The second derivative of the Beta log-density, `-(alpha - 1) / t^2 - (beta - 1) / (1 - t)^2`.
    #[default]
    Standard,
}

pub fn prior_hessian_diag(theta: &Theta, priors: &CrossSectionalPriors, form: HessianForm) -> Result<[f64; 5]> {
    if !theta.is_interior() {
        return Err(Error::OutOfSupport);
    }
    let offset = match form {
        HessianForm::Printed => 0.0,
        HessianForm::Standard => 1.0,
    };
    let mut h = [0.0; 5];
    for ((hi, prior), t) in h.iter_mut().zip(priors.as_array()).zip(theta.to_array()) {
        *hi = -(prior.alpha - offset) / (t * t) - (prior.beta - offset) / ((1.0 - t) * (1.0 - t));
    }
    Ok(h)
}

/// Multinomial information weights `n^2 / x_ij`; empty cells count as 0.5.
pub fn fisher_weights(table: &ContingencyTable) -> [f64; 4] {
    let n = table.n() as f64;
    table.counts().map(|x| n * n / if x == 0 { 0.5 } else { x as f64 })
}

/// Data and priors for the cross-sectional posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorContext {
    pub table: ContingencyTable,
    pub priors: CrossSectionalPriors,
    counts: [f64; 4],
}

impl PosteriorContext {
    pub fn new(table: ContingencyTable, priors: CrossSectionalPriors) -> Result<Self> {
        if table.design != Design::CrossSectional {
            return Err(Error::InvalidInput(format!(
                "the misclassification model needs a cross-sectional table, got {:?}",
                table.design
            )));
        }
        priors.validate()?;
        let counts = table.counts().map(|x| x as f64);
        Ok(PosteriorContext { table, priors, counts })
    }

    pub fn with_default_priors(table: ContingencyTable) -> Result<Self> {
        Self::new(table, CrossSectionalPriors::default())
    }

    pub fn counts(&self) -> [f64; 4] {
        self.counts
    }

    /// Multinomial log-likelihood without the multinomial coefficient.
    pub fn log_likelihood(&self, theta: &Theta) -> f64 {
        let eta = eta_from_theta(theta).0;
        let mut ll = 0.0;
        for (x, h) in self.counts.iter().zip(eta) {
            if !(h > 0.0) {
                return f64::NEG_INFINITY;
            }
            ll += x * h.ln();
        }
        ll
    }

    /// Unnormalized log posterior; `-inf` outside the open unit cube.
    pub fn log_posterior(&self, theta: &Theta) -> f64 {
        if !theta.is_interior() {
            return f64::NEG_INFINITY;
        }
        let lp = self.priors.ln_density(theta);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        lp + self.log_likelihood(theta)
    }

    pub fn grad_log_posterior(&self, theta: &Theta) -> Result<Vector5> {
        if !theta.is_interior() {
            return Err(Error::OutOfSupport);
        }
        let eta = eta_from_theta(theta).0;
        let score = SVector::<f64, 4>::from_fn(|i, _| self.counts[i] / eta[i]);
        let mut grad = jacobian_eta_theta(theta).transpose() * score;
        for (g, (prior, t)) in grad.iter_mut().zip(self.priors.as_array().iter().zip(theta.to_array())) {
            *g += (prior.alpha - 1.0) / t - (prior.beta - 1.0) / (1.0 - t);
        }
        if grad.iter().all(|g| g.is_finite()) {
            Ok(grad)
        } else {
            Err(Error::NonFiniteGradient)
        }
    }
}

/// Where the limiting posterior's ridge is anchored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RidgeAnchor {
    /// The ridge through a known parameter value.
    Theta(Theta),
    /// A fixed `eta`, by default the observed frequencies.
    Eta(EtaVector),
}

impl RidgeAnchor {
    pub fn eta(&self) -> EtaVector {
        match self {
            RidgeAnchor::Theta(theta) => eta_from_theta(theta),
            RidgeAnchor::Eta(eta) => *eta,
        }
    }
}

/// Draws from the prior restricted to the likelihood ridge through `anchor`,
/// the posterior one would obtain from unlimited data.
///
/// `(Se, Sp)` come from their priors, `pi` is solved from the fixed `eta`,
/// points outside the constraint set are discarded and the rest carry the
/// ridge importance weight. Fails after `rejection_cap` consecutive rejections.
pub fn limiting_posterior_sample(
    rng: &mut RngStream,
    anchor: RidgeAnchor,
    priors: &CrossSectionalPriors,
    n_draws: usize,
    rejection_cap: u64,
) -> Result<ChainResult> {
    priors.validate()?;
    let start = Instant::now();
    let eta = anchor.eta();
    let mut draws = Vec::with_capacity(n_draws);
    let mut ln_w = Vec::with_capacity(n_draws);
    let mut acceptance = AcceptanceCounts::default();
    let mut misses = 0u64;
    while draws.len() < n_draws {
        let (se, sp) = priors.sample_test(rng);
        match pi_from_eta(&eta, se, sp) {
            Ok(pi) => {
                let theta = Theta::from_pi(pi, se, sp);
                draws.push(theta);
                ln_w.push(ln_ridge_weight(&theta, priors));
                acceptance.record_block(true);
                misses = 0;
            }
            Err(Error::OutsideA | Error::SingularTest) => {
                acceptance.record_block(false);
                misses += 1;
                if misses >= rejection_cap {
                    return Err(Error::RejectionStall { cap: rejection_cap });
                }
            }
            Err(e) => return Err(e),
        }
    }
    let weights = weights_from_logs(&ln_w)?;
    Ok(ChainResult {
        draws,
        weights: Some(weights),
        acceptance,
        acceptance_with_burn_in: acceptance,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        meta: ChainMeta { sampler: SamplerKind::LimitingPosterior, seed: rng.seed(), burn_in: 0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Theta {
        Theta::new(0.4, 0.1, 0.3, 0.9, 0.95).unwrap()
    }

    #[test]
    fn forward_example() {
        let theta = example();
        let pi = theta.pi();
        let expected_pi = [0.12, 0.18, 0.07, 0.63];
        for (a, b) in pi.iter().zip(expected_pi) {
            assert!((a - b).abs() < 1e-15);
        }
        let eta = eta_from_theta(&theta).0;
        for (a, b) in eta.iter().zip([0.1115, 0.1935, 0.0785, 0.6165]) {
            assert!((a - b).abs() < 1e-15, "{eta:?}");
        }
        assert!((eta.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_useless_tests() {
        let theta = Theta { se: 1.0, sp: 1.0, ..example() };
        assert_eq!(eta_from_theta(&theta).0, theta.pi());
        let useless = Theta { se: 0.5, sp: 0.5, ..example() };
        let eta = eta_from_theta(&useless).0;
        assert_eq!(eta[0], eta[2]);
        assert_eq!(eta[1], eta[3]);
        assert_eq!(pi_from_eta(&EtaVector(eta), 0.5, 0.5), Err(Error::SingularTest));
    }

    #[test]
    fn inverse_examples() {
        let theta = example();
        let pi = pi_from_eta(&eta_from_theta(&theta), 0.9, 0.95).unwrap();
        for (a, b) in pi.iter().zip([0.12, 0.18, 0.07, 0.63]) {
            assert!((a - b).abs() < 1e-12);
        }
        let eta = EtaVector([0.5, 0.3, 0.1, 0.1]);
        assert_eq!(pi_from_eta(&eta, 1.0, 1.0).unwrap(), eta.0);
        // second row: (0.95 * 0.3 - 0.05 * 0.1) / 0.9 and (0.95 * 0.1 - 0.05 * 0.3) / 0.9
        let pi = pi_from_eta(&eta, 0.95, 0.95).unwrap();
        let expected = [0.47 / 0.9, 0.28 / 0.9, 0.07 / 0.9, 0.08 / 0.9];
        for (a, b) in pi.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((pi[0] - 0.52222).abs() < 1e-5 && (pi[2] - 0.07778).abs() < 1e-5);
        // a test this poor cannot have produced so few test-negatives among the diseased
        assert_eq!(pi_from_eta(&EtaVector([0.5, 0.3, 0.01, 0.19]), 0.8, 0.8), Err(Error::OutsideA));
    }

    #[test]
    fn determinant_of_each_row_map() {
        let (se, sp) = (0.83, 0.71);
        let h = 1e-6;
        let base = |a: f64, b: f64| eta_from_pi([a, 0.0, b, 0.0], se, sp).0;
        let at = base(0.2, 0.3);
        let da = base(0.2 + h, 0.3);
        let db = base(0.2, 0.3 + h);
        let j11 = (da[0] - at[0]) / h;
        let j21 = (da[2] - at[2]) / h;
        let j12 = (db[0] - at[0]) / h;
        let j22 = (db[2] - at[2]) / h;
        assert!((j11 * j22 - j12 * j21 - (se + sp - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn jacobian_columns_sum_to_zero_and_match_differences() {
        let theta = example();
        let j = jacobian_eta_theta(&theta);
        for c in 0..5 {
            assert!(j.column(c).sum().abs() < 1e-15);
        }
        let h = 1e-7;
        for c in 0..5 {
            let mut plus = theta.to_array();
            let mut minus = theta.to_array();
            plus[c] += h;
            minus[c] -= h;
            let ep = eta_from_theta(&Theta::from_array(plus)).0;
            let em = eta_from_theta(&Theta::from_array(minus)).0;
            for r in 0..4 {
                assert!((j[(r, c)] - (ep[r] - em[r]) / (2.0 * h)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn jacobian_has_rank_three() {
        let sv = jacobian_eta_theta(&example()).svd(false, false).singular_values;
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!(s[2] > 1e-6 * s[0]);
        assert!(s[3] < 1e-10 * s[0]);
    }

    #[test]
    fn prior_hessian_forms() {
        let flat = CrossSectionalPriors {
            p: BetaParams::uniform(),
            q: BetaParams::uniform(),
            e: BetaParams::uniform(),
            se: BetaParams::uniform(),
            sp: BetaParams::uniform(),
        };
        let mid = Theta::new(0.5, 0.5, 0.5, 0.5, 0.5).unwrap();
        assert_eq!(prior_hessian_diag(&mid, &flat, HessianForm::Printed).unwrap(), [-8.0; 5]);
        assert_eq!(prior_hessian_diag(&mid, &flat, HessianForm::Standard).unwrap(), [0.0; 5]);
        let edge = Theta { p: 0.0, ..mid };
        assert_eq!(prior_hessian_diag(&edge, &flat, HessianForm::Printed), Err(Error::OutOfSupport));
    }

    #[test]
    fn standard_hessian_matches_second_difference() {
        let priors = CrossSectionalPriors::default();
        let theta = example();
        let h = prior_hessian_diag(&theta, &priors, HessianForm::Standard).unwrap();
        let step = 1e-4;
        for (i, prior) in priors.as_array().iter().enumerate() {
            let t = theta.to_array()[i];
            let fd = (prior.ln_pdf(t + step) - 2.0 * prior.ln_pdf(t) + prior.ln_pdf(t - step)) / (step * step);
            assert!((fd - h[i]).abs() < 1e-4 * h[i].abs().max(1.0), "{i}: {fd} vs {}", h[i]);
        }
    }

    #[test]
    fn fisher_weights_with_empty_cell() {
        let t = ContingencyTable::new(0, 10, 20, 70, Design::CrossSectional).unwrap();
        assert_eq!(fisher_weights(&t), [20_000.0, 1000.0, 500.0, 10_000.0 / 70.0]);
    }

    fn ctx() -> PosteriorContext {
        PosteriorContext::with_default_priors(ContingencyTable::leptospirosis(Design::CrossSectional)).unwrap()
    }

    #[test]
    fn log_posterior_support() {
        let c = ctx();
        assert_eq!(c.log_posterior(&Theta { e: 0.0, ..example() }), f64::NEG_INFINITY);
        assert_eq!(c.log_posterior(&Theta { se: 1.2, ..example() }), f64::NEG_INFINITY);
        assert!(c.log_posterior(&example()).is_finite());
        assert!(PosteriorContext::with_default_priors(ContingencyTable::leptospirosis(Design::Cohort)).is_err());
    }

    #[test]
    fn extra_counts_add_log_eta() {
        let a = ctx();
        let t = ContingencyTable::new(23, 26, 83, 252, Design::CrossSectional).unwrap();
        let b = PosteriorContext::with_default_priors(t).unwrap();
        let theta = example();
        let expected: f64 = eta_from_theta(&theta).0.iter().map(|h| h.ln()).sum();
        assert!((b.log_posterior(&theta) - a.log_posterior(&theta) - expected).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_differences() {
        let c = ctx();
        let theta = example();
        let g = c.grad_log_posterior(&theta).unwrap();
        let h = 1e-6;
        for i in 0..5 {
            let mut plus = theta.to_array();
            let mut minus = theta.to_array();
            plus[i] += h;
            minus[i] -= h;
            let fd = (c.log_posterior(&Theta::from_array(plus)) - c.log_posterior(&Theta::from_array(minus))) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5f64.max(1e-4 * g[i].abs()), "{i}: {fd} vs {}", g[i]);
        }
        assert_eq!(c.grad_log_posterior(&Theta { q: 1.0, ..theta }), Err(Error::OutOfSupport));
    }

    #[test]
    fn ridge_weight_reduces_under_default_priors() {
        let priors = CrossSectionalPriors::default();
        let a = example();
        let b = Theta::new(0.2, 0.7, 0.6, 0.8, 0.97).unwrap();
        let ratio = ln_ridge_weight(&a, &priors) - ln_ridge_weight(&b, &priors);
        let expected = -2.0 * (a.se + a.sp - 1.0).ln() + 2.0 * (b.se + b.sp - 1.0).ln();
        assert!((ratio - expected).abs() < 1e-12);
    }

    #[test]
    fn limiting_posterior_stays_on_ridge() {
        let mut rng = RngStream::new(11);
        let truth = example();
        let priors = CrossSectionalPriors::default();
        let chain = limiting_posterior_sample(&mut rng, RidgeAnchor::Theta(truth), &priors, 2000, 1_000_000).unwrap();
        let target = eta_from_theta(&truth).0;
        for t in &chain.draws {
            let eta = eta_from_theta(t).0;
            for (a, b) in eta.iter().zip(target) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let w = chain.weights.as_ref().unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let pars = chain.values(|t| crate::measures::par(&t.population()));
        let mean = pars.iter().sum::<f64>() / pars.len() as f64;
        let var = pars.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / pars.len() as f64;
        assert!(var > 0.0);
    }
}
