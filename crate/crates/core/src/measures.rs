//! Population attributable risk and fraction.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::types::{PopulationParams, Theta};

/// PAR = e (p - q), equivalently P(D+) - P(D+|E-).
pub fn par(params: &PopulationParams) -> f64 {
    params.e * (params.p - params.q)
}

/// PAF = PAR / P(D+).
pub fn paf(params: &PopulationParams) -> Result<f64> {
    let pd = params.disease_prevalence();
    if pd <= 0.0 {
        return Err(Error::DegenerateDisease);
    }
    Ok(par(params) / pd)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributableMeasures {
    pub par: f64,
    pub paf: f64,
}

impl AttributableMeasures {
    pub fn from_params(params: &PopulationParams) -> Result<Self> {
        Ok(AttributableMeasures { par: par(params), paf: paf(params)? })
    }
}

/// A scalar function of a posterior draw that can be summarized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    P,
    Q,
    E,
    Se,
    Sp,
    Par,
    Paf,
}

impl Quantity {
    pub const ALL: [Quantity; 7] =
        [Quantity::P, Quantity::Q, Quantity::E, Quantity::Se, Quantity::Sp, Quantity::Par, Quantity::Paf];

    /// The quantities that vary under designs without a diagnostic test.
    pub const POPULATION: [Quantity; 5] =
        [Quantity::P, Quantity::Q, Quantity::E, Quantity::Par, Quantity::Paf];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::P => "p",
            Quantity::Q => "q",
            Quantity::E => "e",
            Quantity::Se => "se",
            Quantity::Sp => "sp",
            Quantity::Par => "par",
            Quantity::Paf => "paf",
        }
    }

    /// Index into the `Theta` array for the five model parameters.
    pub fn theta_index(&self) -> Option<usize> {
        match self {
            Quantity::P => Some(0),
            Quantity::Q => Some(1),
            Quantity::E => Some(2),
            Quantity::Se => Some(3),
            Quantity::Sp => Some(4),
            Quantity::Par | Quantity::Paf => None,
        }
    }

    /// Evaluates the quantity on one draw. PAF is NaN when P(D+) = 0.
    pub fn eval(&self, theta: &Theta) -> f64 {
        match self {
            Quantity::P => theta.p,
            Quantity::Q => theta.q,
            Quantity::E => theta.e,
            Quantity::Se => theta.se,
            Quantity::Sp => theta.sp,
            Quantity::Par => par(&theta.population()),
            Quantity::Paf => paf(&theta.population()).unwrap_or(f64::NAN),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown quantity '{s}'")))
    }
}
