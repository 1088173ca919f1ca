//! Sampler comparison over a ladder of data scales.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::chain::{summarize_chains, ChainResult, SamplerKind};
use crate::diagnostics::{efficiency, ess_per_thousand, PSRF_CONVERGED};
use crate::distributions::RngStream;
use crate::error::Error;
use crate::measures::Quantity;
use crate::misclass::{CrossSectionalPriors, PosteriorContext};
use crate::samplers::{run_cross_sectional, McmcLength, TuningParams};
use crate::types::ContingencyTable;

use super::output::pooled_acceptance;

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    /// Some quantity had PSRF at or above the convergence threshold.
    DidNotConverge,
    Untunable,
    Failed(String),
}

impl CellStatus {
    pub fn label(&self) -> &str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::DidNotConverge => "did not converge",
            CellStatus::Untunable => "untunable",
            CellStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCell {
    pub sampler: SamplerKind,
    pub scale: u64,
    pub status: CellStatus,
    /// Percent acceptance per component of `(p, q, e, Se, Sp)`.
    pub acceptance: [f64; 5],
    /// Mean over chains, in [`Quantity::ALL`] order.
    pub ess_per_thousand: [f64; 7],
    pub ess_per_second: [f64; 7],
    pub max_psrf: Option<f64>,
}

pub struct BenchmarkPlan<'a> {
    pub table: ContingencyTable,
    pub priors: CrossSectionalPriors,
    pub samplers: &'a [SamplerKind],
    pub scales: &'a [u64],
    pub chains: usize,
    pub length: McmcLength,
    pub tuning: TuningParams,
    pub seed: u64,
}

fn failed_cell(sampler: SamplerKind, scale: u64, err: &Error) -> BenchmarkCell {
    let status = match err {
        Error::Untunable(_) => CellStatus::Untunable,
        other => CellStatus::Failed(other.to_string()),
    };
    BenchmarkCell {
        sampler,
        scale,
        status,
        acceptance: [f64::NAN; 5],
        ess_per_thousand: [f64::NAN; 7],
        ess_per_second: [f64::NAN; 7],
        max_psrf: None,
    }
}

fn mean_over<F: Fn(&ChainResult) -> f64>(chains: &[ChainResult], f: F) -> f64 {
    chains.iter().map(f).sum::<f64>() / chains.len() as f64
}

fn assess(sampler: SamplerKind, scale: u64, chains: &[ChainResult]) -> BenchmarkCell {
    let mut max_psrf: Option<f64> = None;
    for q in Quantity::ALL {
        if let Ok(s) = summarize_chains(chains, |t| q.eval(t)) {
            if let Some(p) = s.psrf {
                max_psrf = Some(max_psrf.map_or(p, |m| m.max(p)));
            }
        }
    }
    let converged = max_psrf.is_none_or(|p| p < PSRF_CONVERGED);
    BenchmarkCell {
        sampler,
        scale,
        status: if converged { CellStatus::Ok } else { CellStatus::DidNotConverge },
        acceptance: pooled_acceptance(chains).rates().map(|r| 100.0 * r),
        ess_per_thousand: Quantity::ALL.map(|q| mean_over(chains, |c| ess_per_thousand(c, q).unwrap_or(f64::NAN))),
        ess_per_second: Quantity::ALL.map(|q| mean_over(chains, |c| efficiency(c, q).unwrap_or(f64::NAN))),
        max_psrf,
    }
}

/// Runs every `(scale, sampler)` cell. Chains of all cells share the current
/// rayon pool; failures become cell statuses rather than errors.
pub fn run_benchmark(plan: &BenchmarkPlan) -> Vec<BenchmarkCell> {
    let cells: Vec<(u64, SamplerKind)> =
        plan.scales.iter().flat_map(|&s| plan.samplers.iter().map(move |&k| (s, k))).collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|i| (0..plan.chains).map(move |c| (i, c))).collect();
    let results: Vec<Result<ChainResult, Error>> = jobs
        .par_iter()
        .map(|&(i, c)| {
            let (scale, kind) = cells[i];
            let ctx = PosteriorContext::new(plan.table.scaled(scale), plan.priors)?;
            let mut rng = RngStream::substream(RngStream::derive_seed(plan.seed, i as u64), c as u64);
            run_cross_sectional(kind, &mut rng, &ctx, &plan.tuning, plan.length, scale)
        })
        .collect();
    cells
        .iter()
        .enumerate()
        .map(|(i, &(scale, kind))| {
            let chunk = &results[i * plan.chains..(i + 1) * plan.chains];
            match chunk.iter().find_map(|r| r.as_ref().err()) {
                Some(err) => failed_cell(kind, scale, err),
                None => {
                    let chains: Vec<ChainResult> = chunk.iter().map(|r| r.clone().expect("checked")).collect();
                    assess(kind, scale, &chains)
                }
            }
        })
        .collect()
}

fn cell_values(cell: &BenchmarkCell, values: &[f64]) -> Vec<String> {
    match cell.status {
        CellStatus::Ok => values.iter().map(|v| format!("{v:.1}")).collect(),
        _ => vec![cell.status.label().to_string(); values.len()],
    }
}

fn table_csv(cells: &[BenchmarkCell], columns: &[&str], pick: impl Fn(&BenchmarkCell) -> Vec<f64>) -> String {
    let mut out = format!("scale,sampler,{}\n", columns.join(","));
    for cell in cells {
        let _ = writeln!(out, "{},{},{}", cell.scale, cell.sampler, cell_values(cell, &pick(cell)).join(","));
    }
    out
}

const THETA_COLUMNS: [&str; 5] = ["p", "q", "e", "se", "sp"];
const ALL_COLUMNS: [&str; 7] = ["p", "q", "e", "se", "sp", "par", "paf"];

pub fn acceptance_csv(cells: &[BenchmarkCell]) -> String {
    table_csv(cells, &THETA_COLUMNS, |c| c.acceptance.to_vec())
}

pub fn ess_per_thousand_csv(cells: &[BenchmarkCell]) -> String {
    table_csv(cells, &ALL_COLUMNS, |c| c.ess_per_thousand.to_vec())
}

pub fn ess_per_second_csv(cells: &[BenchmarkCell]) -> String {
    table_csv(cells, &ALL_COLUMNS, |c| c.ess_per_second.to_vec())
}

fn text_block(out: &mut String, title: &str, cells: &[BenchmarkCell], columns: &[&str], pick: impl Fn(&BenchmarkCell) -> Vec<f64>) {
    let _ = writeln!(out, "{title}");
    let mut scale = None;
    for cell in cells {
        if scale != Some(cell.scale) {
            scale = Some(cell.scale);
            let _ = write!(out, "\nscale {:<16}", cell.scale);
            for c in columns {
                let _ = write!(out, " {c:>9}");
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<22}", cell.sampler.name());
        match &cell.status {
            CellStatus::Ok => {
                for v in pick(cell) {
                    let _ = write!(out, " {v:>9.1}");
                }
            }
            CellStatus::Failed(msg) => {
                let _ = write!(out, " failed: {msg}");
            }
            other => {
                let _ = write!(out, " {}", other.label());
            }
        }
        out.push('\n');
    }
    out.push('\n');
}

pub fn benchmark_text(cells: &[BenchmarkCell]) -> String {
    let mut out = String::new();
    text_block(&mut out, "Acceptance rate (%)", cells, &THETA_COLUMNS, |c| c.acceptance.to_vec());
    text_block(&mut out, "ESS per 1000 iterations", cells, &ALL_COLUMNS, |c| c.ess_per_thousand.to_vec());
    text_block(&mut out, "ESS per second", cells, &ALL_COLUMNS, |c| c.ess_per_second.to_vec());
    out
}
