//! Regularized incomplete beta function, its inverse, and truncated draws.

use attrib_bayes::distributions::{sample_truncated_beta, RngStream};
use attrib_bayes::special::{beta_cdf, beta_inv_cdf, beta_sf};
use attrib_bayes::BetaParams;

fn main() -> attrib_bayes::Result<()> {
    let prior = BetaParams::new(30.0, 1.5)?;
    for x in [0.9, 0.99, 0.9999] {
        println!("P(Sp <= {x}) = {:.6e}, P(Sp > {x}) = {:.6e}", beta_cdf(x, &prior), beta_sf(x, &prior));
    }
    for u in [0.025, 0.5, 0.975] {
        println!("quantile {u}: {:.6}", beta_inv_cdf(u, &prior));
    }
    let mut rng = RngStream::new(3);
    let draws: Vec<f64> = (0..5).map(|_| sample_truncated_beta(&mut rng, &prior, 0.80, 0.85)).collect::<Result<_, _>>()?;
    println!("Beta(30, 1.5) truncated to [0.80, 0.85]: {draws:.4?}");
    Ok(())
}
