//! With unlimited data the posterior collapses onto the ridge of parameter
//! values sharing one set of observed-cell probabilities, but PAR stays uncertain.

use attrib_bayes::chain::summarize;
use attrib_bayes::distributions::RngStream;
use attrib_bayes::misclass::{eta_from_theta, jacobian_eta_theta, limiting_posterior_sample, CrossSectionalPriors, RidgeAnchor};
use attrib_bayes::{Quantity, Theta};

fn main() -> attrib_bayes::Result<()> {
    let truth = Theta::new(0.3, 0.25, 0.12, 0.9, 0.95)?;
    let singular = jacobian_eta_theta(&truth).svd(false, false).singular_values;
    let shown: Vec<String> = singular.iter().map(|s| format!("{s:.3e}")).collect();
    println!("singular values of d eta / d theta: {}", shown.join(", "));

    let priors = CrossSectionalPriors::default();
    let mut rng = RngStream::new(5);
    let chain = limiting_posterior_sample(&mut rng, RidgeAnchor::Theta(truth), &priors, 50_000, 1_000_000)?;
    let drift = chain
        .draws
        .iter()
        .map(|t| {
            let (a, b) = (eta_from_theta(t).0, eta_from_theta(&truth).0);
            (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    println!("largest eta deviation along the ridge: {drift:.1e}");
    for q in [Quantity::Par, Quantity::Paf] {
        let s = summarize(&chain, |t| q.eval(t))?;
        println!("{:<4} true {:.4}  limit {:.4} ({:.4}, {:.4})", q.name(), q.eval(&truth), s.mean, s.ci_low, s.ci_high);
    }
    Ok(())
}
