//! Autocorrelation ESS and the Gelman-Rubin PSRF on parallel chains.

use attrib_bayes::diagnostics::{bgr_psrf, ess_autocorr};
use attrib_bayes::distributions::RngStream;
use attrib_bayes::misclass::PosteriorContext;
use attrib_bayes::samplers::{gibbs_data_augmented, McmcLength};
use attrib_bayes::{ContingencyTable, Design, Quantity};

fn main() -> attrib_bayes::Result<()> {
    let ctx = PosteriorContext::with_default_priors(ContingencyTable::leptospirosis(Design::CrossSectional))?;
    let length = McmcLength::new(20_000, 2_000)?;
    let chains = (0..4)
        .map(|k| gibbs_data_augmented(&mut RngStream::substream(17, k), &ctx, length))
        .collect::<attrib_bayes::Result<Vec<_>>>()?;
    for q in Quantity::ALL {
        let series: Vec<Vec<f64>> = chains.iter().map(|c| c.values(|t| q.eval(t))).collect();
        let refs: Vec<&[f64]> = series.iter().map(Vec::as_slice).collect();
        let ess: f64 = refs.iter().map(|s| ess_autocorr(s)).sum::<attrib_bayes::Result<f64>>()?;
        println!("{:<4} ESS {:>8.0}  PSRF {:.4}", q.name(), ess, bgr_psrf(&refs)?);
    }
    Ok(())
}
