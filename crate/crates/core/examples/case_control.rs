//! Case-control data: the disease margins are fixed, so PAR needs outside
//! information on either disease prevalence or exposure.

use attrib_bayes::chain::summarize;
use attrib_bayes::designs::{casecontrol_closed_form, casecontrol_constrained_gibbs, DesignParam, DesignPriorSpec, GibbsOptions, PriorTarget};
use attrib_bayes::distributions::RngStream;
use attrib_bayes::{BetaParams, ContingencyTable, Design, Quantity};

fn report(label: &str, chain: &attrib_bayes::ChainResult) -> attrib_bayes::Result<()> {
    println!("{label}");
    for q in [Quantity::E, Quantity::Par, Quantity::Paf] {
        let s = summarize(chain, |t| q.eval(t))?;
        println!("  {:<4} {:.5}  ({:.5}, {:.5})", q.name(), s.mean, s.ci_low, s.ci_high);
    }
    Ok(())
}

fn main() -> attrib_bayes::Result<()> {
    let table = ContingencyTable::leptospirosis(Design::CaseControl);
    let mut rng = RngStream::new(2024);

    // a rare disease: P(D+) ~ Beta(1, 1000)
    let spec = DesignPriorSpec::new(PriorTarget::DiseasePrevalence)
        .with(DesignParam::Phi1, BetaParams::uniform())
        .with(DesignParam::Phi2, BetaParams::uniform())
        .with(DesignParam::Phi3, BetaParams::new(1.0, 1000.0)?);
    report("prior on disease prevalence", &casecontrol_closed_form(&mut rng, &table, &spec, 100_000)?)?;

    // the exposure rate is easier to elicit, but it constrains (phi1, phi2, phi3)
    let spec = DesignPriorSpec::new(PriorTarget::ExposureRate)
        .with(DesignParam::Phi1, BetaParams::uniform())
        .with(DesignParam::Phi2, BetaParams::uniform())
        .with(DesignParam::E, BetaParams::new(1.0, 10.0)?);
    let chain = casecontrol_constrained_gibbs(&mut rng, &table, &spec, 50_000, GibbsOptions::default())?;
    report("prior on exposure", &chain)
}
