//! Domain types shared across the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Which margins of the 2×2 table were fixed by the sampling design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    /// Disease margins `n1 = x11 + x21`, `n2 = x12 + x22` fixed.
    CaseControl,
    /// Exposure margins `m1 = x11 + x12`, `m2 = x21 + x22` fixed.
    Cohort,
    /// Only the grand total `n` fixed.
    CrossSectional,
}

/// Observed 2×2 counts. Rows index exposure (or test status), columns index disease.
///
/// ```text
///          D+    D-
///   E+    x11   x12
///   E-    x21   x22
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyTable {
    pub x11: u64,
    pub x12: u64,
    pub x21: u64,
    pub x22: u64,
    pub design: Design,
}

impl ContingencyTable {
    pub fn new(x11: u64, x12: u64, x21: u64, x22: u64, design: Design) -> Result<Self> {
        let table = ContingencyTable { x11, x12, x21, x22, design };
        if table.n() == 0 {
            return Err(Error::InvalidInput("table total must be at least 1".into()));
        }
        Ok(table)
    }

    /// The leptospirosis abattoir data used throughout the examples and tests.
    pub fn leptospirosis(design: Design) -> Self {
        ContingencyTable { x11: 22, x12: 25, x21: 82, x22: 251, design }
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.x11, self.x12, self.x21, self.x22]
    }

    pub fn n(&self) -> u64 {
        self.x11 + self.x12 + self.x21 + self.x22
    }

    /// Diseased total (case-control margin).
    pub fn n1(&self) -> u64 {
        self.x11 + self.x21
    }

    /// Disease-free total (case-control margin).
    pub fn n2(&self) -> u64 {
        self.x12 + self.x22
    }

    /// Exposed total (cohort margin).
    pub fn m1(&self) -> u64 {
        self.x11 + self.x12
    }

    /// Unexposed total (cohort margin).
    pub fn m2(&self) -> u64 {
        self.x21 + self.x22
    }

    /// Every cell multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        ContingencyTable {
            x11: self.x11 * factor,
            x12: self.x12 * factor,
            x21: self.x21 * factor,
            x22: self.x22 * factor,
            design: self.design,
        }
    }

    pub fn with_design(&self, design: Design) -> Self {
        ContingencyTable { design, ..*self }
    }
}

/// Hyperparameters of a Beta(alpha, beta) distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let params = BetaParams { alpha, beta };
        params.validate()?;
        Ok(params)
    }

    pub const fn uniform() -> Self {
        BetaParams { alpha: 1.0, beta: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.beta > 0.0 && self.alpha.is_finite() && self.beta.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "Beta parameters must be positive and finite, got ({}, {})",
                self.alpha, self.beta
            )))
        }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    /// Log density, `-inf` outside the open unit interval.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return f64::NEG_INFINITY;
        }
        (self.alpha - 1.0) * x.ln() + (self.beta - 1.0) * (-x).ln_1p()
            - special::ln_beta(self.alpha, self.beta)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} = {value} is not a probability")))
    }
}

/// `p = P(D+|E+)`, `q = P(D+|E-)`, `e = P(E+)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationParams {
    pub p: f64,
    pub q: f64,
    pub e: f64,
}

impl PopulationParams {
    pub fn new(p: f64, q: f64, e: f64) -> Result<Self> {
        check_unit("p", p)?;
        check_unit("q", q)?;
        check_unit("e", e)?;
        Ok(PopulationParams { p, q, e })
    }

    /// `P(D+) = p e + q (1 - e)`.
    pub fn disease_prevalence(&self) -> f64 {
        self.p * self.e + self.q * (1.0 - self.e)
    }
}

/// Full parameter vector of the cross-sectional misclassification model.
///
/// Designs without a diagnostic test store draws with `se = sp = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    pub p: f64,
    pub q: f64,
    pub e: f64,
    pub se: f64,
    pub sp: f64,
}

impl Theta {
    pub const DIM: usize = 5;
    pub const NAMES: [&'static str; 5] = ["p", "q", "e", "se", "sp"];

    pub fn new(p: f64, q: f64, e: f64, se: f64, sp: f64) -> Result<Self> {
        let theta = Theta { p, q, e, se, sp };
        for (name, v) in Self::NAMES.iter().zip(theta.to_array()) {
            check_unit(name, v)?;
        }
        Ok(theta)
    }

    /// Population parameters observed through a perfect test.
    pub fn perfect_test(params: PopulationParams) -> Self {
        Theta { p: params.p, q: params.q, e: params.e, se: 1.0, sp: 1.0 }
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Theta { p: v[0], q: v[1], e: v[2], se: v[3], sp: v[4] }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.p, self.q, self.e, self.se, self.sp]
    }

    pub fn population(&self) -> PopulationParams {
        PopulationParams { p: self.p, q: self.q, e: self.e }
    }

    /// True cell probabilities `(pe, (1-p)e, q(1-e), (1-q)(1-e))`.
    pub fn pi(&self) -> [f64; 4] {
        [
            self.p * self.e,
            (1.0 - self.p) * self.e,
            self.q * (1.0 - self.e),
            (1.0 - self.q) * (1.0 - self.e),
        ]
    }

    /// Inverse of [`Theta::pi`]; `p` or `q` is set to 0 when its row has no mass.
    pub fn from_pi(pi: [f64; 4], se: f64, sp: f64) -> Self {
        let e = pi[0] + pi[1];
        let row = |a: f64, b: f64| if a + b > 0.0 { a / (a + b) } else { 0.0 };
        Theta { p: row(pi[0], pi[1]), q: row(pi[2], pi[3]), e, se, sp }
    }

    /// True when every component lies strictly inside (0, 1).
    pub fn is_interior(&self) -> bool {
        self.to_array().iter().all(|&v| v > 0.0 && v < 1.0)
    }
}
