//! JSON run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

use crate::chain::SamplerKind;
use crate::designs::{design_sampler, DesignParam, DesignPriorSpec, PriorTarget};
use crate::misclass::CrossSectionalPriors;
use crate::samplers::TuningParams;
use crate::types::{BetaParams, ContingencyTable, Design, Theta};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counts {
    pub x11: u64,
    pub x12: u64,
    pub x21: u64,
    pub x22: u64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThetaConfig {
    p: f64,
    q: f64,
    e: f64,
    se: f64,
    sp: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkSection {
    samplers: Option<Vec<String>>,
    scales: Option<Vec<u64>>,
    chains: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    design: Design,
    counts: Counts,
    prior_target: Option<PriorTarget>,
    #[serde(default)]
    priors: BTreeMap<String, BetaParams>,
    sampler: Option<String>,
    iterations: usize,
    burn_in: Option<usize>,
    chains: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    tuning: TuningParams,
    output_path: Option<PathBuf>,
    data_scale: Option<u64>,
    benchmark: Option<BenchmarkSection>,
    theta_true: Option<ThetaConfig>,
}

/// Priors for the model implied by the design.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelPriors {
    Design(DesignPriorSpec),
    CrossSectional(CrossSectionalPriors),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub samplers: Vec<SamplerKind>,
    pub scales: Vec<u64>,
    pub chains: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig { samplers: SamplerKind::CROSS_SECTIONAL.to_vec(), scales: vec![1, 10, 100], chains: 2 }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Counts as given, before `data_scale` is applied.
    pub table: ContingencyTable,
    pub priors: ModelPriors,
    pub sampler: SamplerKind,
    pub iterations: usize,
    pub burn_in: usize,
    pub chains: usize,
    pub seed: Option<u64>,
    pub tuning: TuningParams,
    pub output_path: Option<PathBuf>,
    pub data_scale: u64,
    pub benchmark: BenchmarkConfig,
    pub theta_true: Option<Theta>,
}

impl RunConfig {
    /// The analysed table: counts multiplied by `data_scale`.
    pub fn data(&self) -> ContingencyTable {
        self.table.scaled(self.data_scale)
    }

    pub fn retained(&self) -> usize {
        self.iterations - self.burn_in
    }

    /// Replaces the counts, keeping the design.
    pub fn with_counts(mut self, counts: Counts) -> Result<Self, CliError> {
        self.table = table_from(counts, self.table.design)?;
        Ok(self)
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn table_from(c: Counts, design: Design) -> Result<ContingencyTable, CliError> {
    ContingencyTable::new(c.x11, c.x12, c.x21, c.x22, design).map_err(|e| invalid(e.to_string()))
}

fn cross_sectional_priors(given: &BTreeMap<String, BetaParams>) -> Result<CrossSectionalPriors, CliError> {
    let mut priors = CrossSectionalPriors::default();
    for (key, &prior) in given {
        let slot = match key.as_str() {
            "p" => &mut priors.p,
            "q" => &mut priors.q,
            "e" => &mut priors.e,
            "se" => &mut priors.se,
            "sp" => &mut priors.sp,
            other => return Err(invalid(format!("priors.{other}: not a cross_sectional parameter"))),
        };
        *slot = prior;
    }
    priors.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(priors)
}

fn design_priors(
    design: Design,
    target: PriorTarget,
    given: &BTreeMap<String, BetaParams>,
) -> Result<DesignPriorSpec, CliError> {
    let required = DesignPriorSpec::required(design, target).map_err(|e| invalid(e.to_string()))?;
    let mut spec = DesignPriorSpec::new(target);
    for (key, &prior) in given {
        let param = required
            .iter()
            .copied()
            .find(|p| p.name() == key)
            .ok_or_else(|| invalid(format!("priors.{key}: not a parameter of this design and prior_target")))?;
        spec = spec.with(param, prior);
    }
    // the prior on the unidentified quantity is never defaulted
    let informative = match target {
        PriorTarget::DiseasePrevalence => DesignParam::Phi3,
        PriorTarget::ExposureRate => DesignParam::E,
    };
    if !spec.priors.contains_key(&informative) {
        return Err(invalid(format!("priors.{} is required and has no default", informative.name())));
    }
    for &param in required {
        spec.priors.entry(param).or_insert(BetaParams::uniform());
    }
    spec.validate(design).map_err(|e| invalid(e.to_string()))?;
    Ok(spec)
}

fn benchmark_config(section: Option<BenchmarkSection>) -> Result<BenchmarkConfig, CliError> {
    let mut cfg = BenchmarkConfig::default();
    let Some(section) = section else { return Ok(cfg) };
    if let Some(names) = section.samplers {
        cfg.samplers = names
            .iter()
            .map(|n| n.parse::<SamplerKind>().map_err(|e| invalid(format!("benchmark.samplers: {e}"))))
            .collect::<Result<_, _>>()?;
        if let Some(bad) = cfg.samplers.iter().find(|k| !SamplerKind::CROSS_SECTIONAL.contains(k)) {
            return Err(invalid(format!("benchmark.samplers: {bad} is not a cross-sectional sampler")));
        }
    }
    if let Some(scales) = section.scales {
        if scales.is_empty() || scales.contains(&0) {
            return Err(invalid("benchmark.scales must be a non-empty list of integers >= 1"));
        }
        cfg.scales = scales;
    }
    if let Some(chains) = section.chains {
        if chains < 2 {
            return Err(invalid("benchmark.chains must be at least 2 for the convergence check"));
        }
        cfg.chains = chains;
    }
    Ok(cfg)
}

/// Parses and validates a configuration document, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
    let table = table_from(raw.counts, raw.design)?;

    let (priors, sampler) = match raw.design {
        Design::CrossSectional => {
            if raw.prior_target.is_some() {
                return Err(invalid("prior_target does not apply to cross_sectional data"));
            }
            let sampler = match raw.sampler.as_deref() {
                None => SamplerKind::Importance,
                Some(name) => name.parse().map_err(|e| invalid(format!("sampler: {e}")))?,
            };
            if !SamplerKind::CROSS_SECTIONAL.contains(&sampler) {
                return Err(invalid(format!("sampler {sampler} cannot fit cross_sectional data")));
            }
            (ModelPriors::CrossSectional(cross_sectional_priors(&raw.priors)?), sampler)
        }
        design => {
            let target = raw.prior_target.ok_or_else(|| invalid("prior_target is required for this design"))?;
            let expected = design_sampler(design, target).map_err(|e| invalid(e.to_string()))?;
            if let Some(name) = raw.sampler.as_deref() {
                let given: SamplerKind = name.parse().map_err(|e| invalid(format!("sampler: {e}")))?;
                if given != expected {
                    return Err(invalid(format!("sampler {given} does not match design and prior_target; use {expected}")));
                }
            }
            (ModelPriors::Design(design_priors(design, target, &raw.priors)?), expected)
        }
    };

    let burn_in = raw.burn_in.unwrap_or(if sampler.is_markov() { raw.iterations / 10 } else { 0 });
    if burn_in >= raw.iterations {
        return Err(invalid(format!("burn_in ({burn_in}) must be smaller than iterations ({})", raw.iterations)));
    }
    let chains = raw.chains.unwrap_or(1);
    if chains == 0 {
        return Err(invalid("chains must be at least 1"));
    }
    let data_scale = raw.data_scale.unwrap_or(1);
    if data_scale == 0 {
        return Err(invalid("data_scale must be at least 1"));
    }
    raw.tuning.validate().map_err(|e| invalid(e.to_string()))?;
    let theta_true = raw
        .theta_true
        .map(|t| Theta::new(t.p, t.q, t.e, t.se, t.sp).map_err(|e| invalid(format!("theta_true: {e}"))))
        .transpose()?;

    Ok(RunConfig {
        table,
        priors,
        sampler,
        iterations: raw.iterations,
        burn_in,
        chains,
        seed: raw.seed,
        tuning: raw.tuning,
        output_path: raw.output_path,
        data_scale,
        benchmark: benchmark_config(raw.benchmark)?,
        theta_true,
    })
}

/// Reads counts from a CSV with header `x11,x12,x21,x22` and one data row.
pub fn parse_counts_csv(text: &str) -> Result<Counts, CliError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').map(str::trim).collect();
    if header != ["x11", "x12", "x21", "x22"] {
        return Err(invalid("data CSV header must be x11,x12,x21,x22"));
    }
    let row = lines.next().ok_or_else(|| invalid("data CSV has no data row"))?;
    let values: Vec<u64> = row
        .split(',')
        .map(|v| v.trim().parse::<u64>().map_err(|_| invalid(format!("data CSV: '{}' is not a count", v.trim()))))
        .collect::<Result<_, _>>()?;
    if values.len() != 4 || lines.next().is_some() {
        return Err(invalid("data CSV must hold exactly one row of four counts"));
    }
    Ok(Counts { x11: values[0], x12: values[1], x21: values[2], x22: values[3] })
}
