//! Seeded random-variate generation.
//!
//! Every sampler draws from an [`RngStream`], a ChaCha8 generator. Streams for
//! parallel chains are derived from `(seed, index)` through SplitMix64 so that
//! a run is fully determined by its seed regardless of thread scheduling.
//!
//! Beta and Dirichlet variates use the gamma-ratio construction. Gamma draws
//! with shape below one are produced in log space so that strongly skewed
//! priors such as Beta(1, 1000) never underflow to 0/0.

use nalgebra::{SMatrix, SVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::special::{beta_cdf, beta_inv_cdf, beta_inv_sf, beta_sf};
use crate::types::BetaParams;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic random number stream owned by a single chain.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream number `index` derived from `seed`.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self::new(Self::derive_seed(seed, index))
    }

    /// The seed used by [`RngStream::substream`].
    pub fn derive_seed(seed: u64, index: u64) -> u64 {
        splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform on (0, 1), safe to take the logarithm of.
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Logarithm of a Gamma(shape, 1) variate.
fn ln_gamma_variate(rng: &mut RngStream, shape: f64) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("shape validated by caller");
        let x: f64 = g.sample(rng);
        x.ln()
    } else {
        // Gamma(a) = Gamma(a + 1) * U^(1/a)
        let g = Gamma::new(shape + 1.0, 1.0).expect("shape validated by caller");
        let x: f64 = g.sample(rng);
        x.ln() + rng.uniform_open().ln() / shape
    }
}

pub fn sample_beta(rng: &mut RngStream, params: &BetaParams) -> f64 {
    let lx = ln_gamma_variate(rng, params.alpha);
    let ly = ln_gamma_variate(rng, params.beta);
    // x / (x + y) without leaving log space
    let d = ly - lx;
    if d > 0.0 {
        let t = (-d).exp();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + d.exp())
    }
}

pub fn sample_dirichlet(rng: &mut RngStream, alphas: &[f64]) -> Vec<f64> {
    let mut logs: Vec<f64> = alphas.iter().map(|&a| ln_gamma_variate(rng, a)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for l in logs.iter_mut() {
        *l = (*l - max).exp();
        total += *l;
    }
    logs.iter_mut().for_each(|v| *v /= total);
    logs
}

/// Fixed-size Dirichlet draw, used on the hot path of the samplers.
pub fn sample_dirichlet4(rng: &mut RngStream, alphas: [f64; 4]) -> [f64; 4] {
    let v = sample_dirichlet(rng, &alphas);
    [v[0], v[1], v[2], v[3]]
}

pub fn sample_binomial(rng: &mut RngStream, trials: u64, prob: f64) -> u64 {
    let prob = prob.clamp(0.0, 1.0);
    if trials == 0 || prob == 0.0 {
        return 0;
    }
    if prob == 1.0 {
        return trials;
    }
    Binomial::new(trials, prob).expect("probability clamped to [0, 1]").sample(rng)
}

/// Draw from Beta(alpha, beta) restricted to `[lo, hi]` by inverse-cdf sampling.
///
/// The uniform variate is placed on whichever tail of the distribution the
/// interval sits in, so intervals far into the upper tail keep full precision.
pub fn sample_truncated_beta(rng: &mut RngStream, params: &BetaParams, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) || lo < 0.0 || hi > 1.0 {
        return Err(Error::InvalidInput(format!("truncation interval [{lo}, {hi}] is not a sub-interval of [0, 1]")));
    }
    let cdf_hi = beta_cdf(hi, params);
    let sf_lo = beta_sf(lo, params);
    let x = if cdf_hi <= 0.5 {
        let cdf_lo = beta_cdf(lo, params);
        let mass = cdf_hi - cdf_lo;
        if mass < 1e-300 {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        beta_inv_cdf(cdf_lo + rng.uniform() * mass, params)
    } else if sf_lo <= 0.5 {
        let sf_hi = beta_sf(hi, params);
        let mass = sf_lo - sf_hi;
        if mass < 1e-300 {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        beta_inv_sf(sf_hi + rng.uniform() * mass, params)
    } else {
        let cdf_lo = beta_cdf(lo, params);
        beta_inv_cdf(cdf_lo + rng.uniform() * (cdf_hi - cdf_lo), params)
    };
    Ok(x.clamp(lo, hi))
}

fn standard_normal_vector<const D: usize>(rng: &mut RngStream) -> SVector<f64, D> {
    SVector::<f64, D>::from_fn(|_, _| rng.standard_normal())
}

/// Draw from a multivariate normal given its covariance matrix.
///
/// A Cholesky factorization is attempted first, then once more with `1e-12`
/// added to the diagonal. The all-zero covariance is the point mass at `mean`.
pub fn sample_mvnormal<const D: usize>(
    rng: &mut RngStream,
    mean: &SVector<f64, D>,
    covariance: &SMatrix<f64, D, D>,
) -> Result<SVector<f64, D>> {
    let scale = covariance.amax();
    if (covariance - covariance.transpose()).amax() > 1e-12 * scale.max(1.0) {
        return Err(Error::NotPsd);
    }
    if scale == 0.0 {
        return Ok(*mean);
    }
    let chol = covariance
        .cholesky()
        .or_else(|| (covariance + SMatrix::<f64, D, D>::identity() * 1e-12).cholesky())
        .ok_or(Error::NotPsd)?;
    let z = standard_normal_vector::<D>(rng);
    Ok(mean + chol.l() * z)
}

/// Gaussian `N(center, scale * precision^-1)` parametrized by its precision
/// matrix, so neither sampling nor density evaluation needs an explicit inverse.
#[derive(Debug, Clone)]
pub struct PrecisionGaussian<const D: usize> {
    l: SMatrix<f64, D, D>,
    precision: SMatrix<f64, D, D>,
    scale: f64,
    half_ln_det_precision: f64,
}

impl<const D: usize> PrecisionGaussian<D> {
    pub fn new(precision: SMatrix<f64, D, D>, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidInput(format!("proposal scale must be positive, got {scale}")));
        }
        let chol = precision.cholesky().ok_or(Error::NotPsd)?;
        let l = chol.l();
        let half_ln_det_precision = l.diagonal().iter().map(|d| d.ln()).sum();
        Ok(PrecisionGaussian { l, precision, scale, half_ln_det_precision })
    }

    /// Covariance `scale * precision^-1`, for inspection and tests.
    pub fn covariance(&self) -> SMatrix<f64, D, D> {
        let inv = self.precision.try_inverse().expect("positive definite precision is invertible");
        inv * self.scale
    }

    /// Draws `center + sqrt(scale) L^-T z`.
    pub fn sample(&self, rng: &mut RngStream, center: &SVector<f64, D>) -> SVector<f64, D> {
        let z = standard_normal_vector::<D>(rng);
        let step = self
            .l
            .transpose()
            .solve_upper_triangular(&z)
            .expect("Cholesky factor has a positive diagonal");
        center + step * self.scale.sqrt()
    }

    /// Log density at `center + delta`, dropping the `(2 pi)^(D/2)` constant.
    pub fn ln_density(&self, delta: &SVector<f64, D>) -> f64 {
        let quad = (delta.transpose() * self.precision * delta)[(0, 0)];
        self.half_ln_det_precision - 0.5 * D as f64 * self.scale.ln() - 0.5 * quad / self.scale
    }
}
