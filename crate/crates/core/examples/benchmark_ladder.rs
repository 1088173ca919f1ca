//! A reduced sampler comparison over growing copies of the same table.

use attrib_bayes::cli::benchmark::{benchmark_text, run_benchmark, BenchmarkPlan};
use attrib_bayes::misclass::CrossSectionalPriors;
use attrib_bayes::samplers::{McmcLength, TuningParams};
use attrib_bayes::{ContingencyTable, Design, SamplerKind};

fn main() -> attrib_bayes::Result<()> {
    let plan = BenchmarkPlan {
        table: ContingencyTable::leptospirosis(Design::CrossSectional),
        priors: CrossSectionalPriors::default(),
        samplers: &SamplerKind::CROSS_SECTIONAL,
        scales: &[1, 10, 100],
        chains: 2,
        length: McmcLength::new(20_000, 2_000)?,
        tuning: TuningParams::default(),
        seed: 1,
    };
    print!("{}", benchmark_text(&run_benchmark(&plan)));
    Ok(())
}
