//! Desk-scale numerical checks of the inequalities satisfied by the objects
//! in this crate.
//!
//! Each check is a [`Criterion`] with a fixed workload and tolerance. The
//! runner records timing and reports a pass/fail verdict with a short detail
//! string. Randomized checks draw from a ChaCha stream seeded per criterion,
//! so a given seed always reproduces the same instances.

mod criteria;

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use criteria::*;

/// Default seed of the randomized checks.
pub const DEFAULT_SEED: u64 = 0x5eed_2015;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    AveragingOracle = 1,
    VariationOracle = 2,
    VariationInequalities = 3,
    GaussDecay = 4,
    NuApproximation = 5,
    MajorArcApproximation = 6,
    PhiBounds = 7,
    Lifting = 8,
    Transference = 9,
    MaximalStability = 10,
    WeylDecay = 11,
    BumpKernels = 12,
    ResidueClasses = 13,
    SingleTerm = 14,
}

impl Criterion {
    pub const ALL: [Criterion; 14] = [
        Criterion::AveragingOracle,
        Criterion::VariationOracle,
        Criterion::VariationInequalities,
        Criterion::GaussDecay,
        Criterion::NuApproximation,
        Criterion::MajorArcApproximation,
        Criterion::PhiBounds,
        Criterion::Lifting,
        Criterion::Transference,
        Criterion::MaximalStability,
        Criterion::WeylDecay,
        Criterion::BumpKernels,
        Criterion::ResidueClasses,
        Criterion::SingleTerm,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::AveragingOracle => "averaging transform vs direct",
            Criterion::VariationOracle => "variation DP vs brute force",
            Criterion::VariationInequalities => "variation inequalities",
            Criterion::GaussDecay => "Gauss sum decay",
            Criterion::NuApproximation => "m_N - nu_N decay",
            Criterion::MajorArcApproximation => "major arc approximation",
            Criterion::PhiBounds => "Phi_N quadrature and decay",
            Criterion::Lifting => "lifting identity",
            Criterion::Transference => "transference",
            Criterion::MaximalStability => "maximal constant stability",
            Criterion::WeylDecay => "Weyl sum ergodic decay",
            Criterion::BumpKernels => "bump kernel l1 bounds",
            Criterion::ResidueClasses => "residue class norms",
            Criterion::SingleTerm => "single-term property of nu",
        }
    }

    /// Wall-clock budget in seconds, where one applies.
    pub fn time_limit(self) -> Option<f64> {
        match self {
            Criterion::AveragingOracle => Some(30.0),
            Criterion::VariationOracle => Some(60.0),
            Criterion::GaussDecay => Some(300.0),
            Criterion::NuApproximation => Some(600.0),
            Criterion::MajorArcApproximation => Some(300.0),
            _ => None,
        }
    }

    pub fn run(self, seed: u64) -> CriterionReport {
        let start = Instant::now();
        let outcome = match self {
            Criterion::AveragingOracle => averaging_oracle(seed),
            Criterion::VariationOracle => variation_oracle(seed),
            Criterion::VariationInequalities => variation_inequalities(seed),
            Criterion::GaussDecay => gauss_decay(),
            Criterion::NuApproximation => nu_approximation(),
            Criterion::MajorArcApproximation => major_arc_approximation(seed),
            Criterion::PhiBounds => phi_bounds(seed),
            Criterion::Lifting => lifting(seed),
            Criterion::Transference => transference(seed),
            Criterion::MaximalStability => maximal_stability(seed),
            Criterion::WeylDecay => weyl_decay(),
            Criterion::BumpKernels => bump_kernels(seed),
            Criterion::ResidueClasses => residue_classes(seed),
            Criterion::SingleTerm => single_term(),
        };
        let elapsed = start.elapsed().as_secs_f64();
        let (mut passed, mut detail) = match outcome {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(limit) = self.time_limit() {
            if elapsed > limit {
                passed = false;
                detail.push_str(&format!("; over the {limit} s budget"));
            }
        }
        CriterionReport {
            id: self.id(),
            name: self.name().to_string(),
            passed,
            detail,
            elapsed_secs: elapsed,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02} {}", self.id(), self.name())
    }
}

/// Verdict of a single check before timing is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:02} {:<32} {} ({:.2} s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed_secs,
            self.detail
        )
    }
}

/// Named groups of criteria.
pub const SUITES: &[(&str, &[u8])] = &[
    ("averaging", &[1]),
    ("variation", &[2, 3]),
    ("gauss", &[4]),
    ("nu", &[5]),
    ("major-arc", &[6]),
    ("phi", &[7]),
    ("lifting", &[8]),
    ("transference", &[9]),
    ("maximal", &[10]),
    ("weyl", &[11]),
    ("bump", &[12]),
    ("residue", &[13]),
    ("single-term", &[14]),
    ("all", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14]),
];

pub fn suite(name: &str) -> Result<Vec<Criterion>> {
    let ids = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ids)| *ids)
        .ok_or_else(|| {
            let names: Vec<&str> = SUITES.iter().map(|(n, _)| *n).collect();
            Error::domain(format!("unknown suite {name:?}; expected one of {}", names.join(", ")))
        })?;
    Ok(ids.iter().filter_map(|&i| Criterion::from_id(i)).collect())
}

pub fn run_suite(name: &str, seed: u64) -> Result<Vec<CriterionReport>> {
    Ok(suite(name)?.into_iter().map(|c| c.run(seed)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_resolve() {
        assert_eq!(suite("all").unwrap().len(), 14);
        assert_eq!(suite("variation").unwrap(), vec![Criterion::VariationOracle, Criterion::VariationInequalities]);
        assert!(suite("nope").is_err());
        for c in Criterion::ALL {
            assert_eq!(Criterion::from_id(c.id()), Some(c));
        }
    }
}
