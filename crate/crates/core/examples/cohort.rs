//! Cohort data: exposure margins are fixed, so the exposure rate (or the
//! disease prevalence, which pins it down) comes from the prior.

use attrib_bayes::chain::summarize;
use attrib_bayes::designs::{sample_design, DesignParam, DesignPriorSpec, GibbsOptions, PriorTarget};
use attrib_bayes::distributions::RngStream;
use attrib_bayes::{BetaParams, ContingencyTable, Design, Quantity};

fn main() -> attrib_bayes::Result<()> {
    let table = ContingencyTable::leptospirosis(Design::Cohort);
    let specs = [
        DesignPriorSpec::new(PriorTarget::ExposureRate).with(DesignParam::E, BetaParams::new(2.0, 8.0)?),
        DesignPriorSpec::new(PriorTarget::DiseasePrevalence).with(DesignParam::Phi3, BetaParams::new(3.0, 20.0)?),
    ];
    for (k, mut spec) in specs.into_iter().enumerate() {
        spec = spec.with(DesignParam::P, BetaParams::uniform()).with(DesignParam::Q, BetaParams::uniform());
        let mut rng = RngStream::substream(7, k as u64);
        let chain = sample_design(&mut rng, &table, &spec, 40_000, GibbsOptions::default())?;
        let par = summarize(&chain, |t| Quantity::Par.eval(t))?;
        println!(
            "{:<26} PAR {:.4} ({:.4}, {:.4})  ESS {:.0}",
            chain.meta.sampler.name(),
            par.mean,
            par.ci_low,
            par.ci_high,
            par.ess
        );
    }
    Ok(())
}
