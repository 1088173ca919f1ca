//! Every Markov chain sampler on the same misclassification posterior.

use attrib_bayes::chain::summarize;
use attrib_bayes::diagnostics::ess_per_thousand;
use attrib_bayes::distributions::RngStream;
use attrib_bayes::misclass::PosteriorContext;
use attrib_bayes::samplers::{run_cross_sectional, McmcLength, TuningParams};
use attrib_bayes::{ContingencyTable, Design, Quantity, SamplerKind};

fn main() -> attrib_bayes::Result<()> {
    let scale = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let table = ContingencyTable::leptospirosis(Design::CrossSectional).scaled(scale);
    let ctx = PosteriorContext::with_default_priors(table)?;
    let length = McmcLength::with_default_burn_in(100_000)?;
    println!("n = {}", table.n());
    for kind in SamplerKind::CROSS_SECTIONAL.into_iter().filter(SamplerKind::is_markov) {
        let mut rng = RngStream::new(99);
        let chain = run_cross_sectional(kind, &mut rng, &ctx, &TuningParams::default(), length, scale)?;
        let par = summarize(&chain, |t| Quantity::Par.eval(t))?;
        let acc = chain.acceptance.rates().map(|r| format!("{:.1}", 100.0 * r));
        println!(
            "{:<15} PAR {:.4}  ESS/1000 {:>6.1}  acceptance % [{}]  {:.2} s",
            kind.name(),
            par.mean,
            ess_per_thousand(&chain, Quantity::Par)?,
            acc.join(", "),
            chain.elapsed_seconds
        );
    }
    Ok(())
}
