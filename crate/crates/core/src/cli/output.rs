//! Chain and summary files.

use std::fmt::Write as _;

use crate::chain::{summarize_chains, AcceptanceCounts, ChainMeta, ChainResult, PosteriorSummary, SamplerKind};
use crate::measures::Quantity;
use crate::types::{Design, Theta};

use super::CliError;

pub const CHAIN_HEADER: &str = "iter,chain,p,q,e,se,sp,par,paf";
pub const SUMMARY_HEADER: &str = "quantity,mean,ci_low,ci_high,ess,psrf,acc_rate";

/// Seventeen significant digits, enough to round-trip any `f64`.
fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Serializes chains in run order. The `weight` column appears only when the
/// chains carry importance weights.
pub fn chain_csv(chains: &[ChainResult]) -> String {
    let weighted = chains.iter().any(|c| c.weights.is_some());
    let mut out = String::from(CHAIN_HEADER);
    out.push_str(if weighted { ",weight\n" } else { "\n" });
    for (k, chain) in chains.iter().enumerate() {
        for (i, theta) in chain.draws.iter().enumerate() {
            let iter = chain.meta.burn_in + i;
            let _ = write!(out, "{iter},{k}");
            for v in theta.to_array() {
                let _ = write!(out, ",{}", float(v));
            }
            let _ = write!(out, ",{},{}", float(Quantity::Par.eval(theta)), float(Quantity::Paf.eval(theta)));
            if let Some(w) = &chain.weights {
                let _ = write!(out, ",{}", float(w[i]));
            }
            out.push('\n');
        }
    }
    out
}

/// Rebuilds chains from [`chain_csv`] output. Acceptance counts and timing are
/// not stored, so they come back empty.
pub fn read_chain_csv(text: &str, sampler: SamplerKind) -> Result<Vec<ChainResult>, CliError> {
    let bad = |line: usize, msg: &str| CliError::Validation(format!("chain CSV line {line}: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let weighted = match header.strip_prefix(CHAIN_HEADER) {
        Some("") => false,
        Some(",weight") => true,
        _ => return Err(bad(1, "unexpected header")),
    };
    let mut chains: Vec<(usize, Vec<Theta>, Vec<f64>)> = Vec::new();
    for (n, line) in lines.enumerate().map(|(n, l)| (n + 2, l)) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != if weighted { 10 } else { 9 } {
            return Err(bad(n, "wrong number of fields"));
        }
        let iter: usize = fields[0].parse().map_err(|_| bad(n, "bad iter"))?;
        let chain: usize = fields[1].parse().map_err(|_| bad(n, "bad chain index"))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n, "bad number"));
        let theta = Theta::from_array([num(fields[2])?, num(fields[3])?, num(fields[4])?, num(fields[5])?, num(fields[6])?]);
        if chain == chains.len() {
            chains.push((iter, Vec::new(), Vec::new()));
        } else if chain + 1 != chains.len() {
            return Err(bad(n, "chains must be stored consecutively"));
        }
        let entry = chains.last_mut().expect("pushed above");
        entry.1.push(theta);
        if weighted {
            entry.2.push(num(fields[9])?);
        }
    }
    Ok(chains
        .into_iter()
        .map(|(first_iter, draws, weights)| ChainResult {
            weights: weighted.then_some(weights),
            acceptance: AcceptanceCounts::default(),
            acceptance_with_burn_in: AcceptanceCounts::default(),
            elapsed_seconds: 0.0,
            meta: ChainMeta { sampler, seed: 0, burn_in: first_iter },
            draws,
        })
        .collect())
}

/// Quantities worth reporting for a design; designs without a test fix `Se = Sp = 1`.
pub fn reported_quantities(design: Design) -> &'static [Quantity] {
    match design {
        Design::CrossSectional => &Quantity::ALL,
        _ => &Quantity::POPULATION,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub quantity: Quantity,
    pub summary: PosteriorSummary,
    /// Acceptance over retained iterations; the component average for PAR and PAF.
    pub acc_rate: f64,
}

pub fn pooled_acceptance(chains: &[ChainResult]) -> AcceptanceCounts {
    let mut total = AcceptanceCounts::default();
    for c in chains {
        total.merge(&c.acceptance);
    }
    total
}

pub fn summary_rows(chains: &[ChainResult], quantities: &[Quantity]) -> Result<Vec<SummaryRow>, CliError> {
    let rates = pooled_acceptance(chains).rates();
    quantities
        .iter()
        .map(|&quantity| {
            let summary = summarize_chains(chains, |t| quantity.eval(t)).map_err(CliError::Sampler)?;
            let acc_rate = match quantity.theta_index() {
                Some(i) => rates[i],
                None => rates.iter().sum::<f64>() / 5.0,
            };
            Ok(SummaryRow { quantity, summary, acc_rate })
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let s = &r.summary;
        let psrf = s.psrf.map(float).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.quantity,
            float(s.mean),
            float(s.ci_low),
            float(s.ci_high),
            float(s.ess),
            psrf,
            float(r.acc_rate)
        );
    }
    out
}

pub fn summary_text(sampler: SamplerKind, chains: &[ChainResult], rows: &[SummaryRow]) -> String {
    let draws: usize = chains.iter().map(ChainResult::len).sum();
    let seconds: f64 = chains.iter().map(|c| c.elapsed_seconds).sum();
    let mut out = format!(
        "sampler {sampler}, {} chain(s), {draws} retained draws, {seconds:.3} s sampling time\n\n",
        chains.len()
    );
    let _ = writeln!(
        out,
        "{:<8} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8} {:>10}",
        "quantity", "mean", "2.5%", "97.5%", "ESS", "PSRF", "acc %", "ESS/s"
    );
    for r in rows {
        let s = &r.summary;
        let psrf = s.psrf.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<8} {:>10.5} {:>10.5} {:>10.5} {:>10.1} {:>8} {:>8.1} {:>10.1}",
            r.quantity.name(),
            s.mean,
            s.ci_low,
            s.ci_high,
            s.ess,
            psrf,
            100.0 * r.acc_rate,
            s.ess_per_second
        );
    }
    out
}
