use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::averaging::kernel::{cube_size, for_each_cube_point};
use crate::averaging::lattice::ComplexNeumaier;
use crate::error::{Error, Result};
use crate::polymap::MultiIndexSet;
use crate::rational::{RationalPoint, TorusPoint};

/// Cap on `N^k` phase terms in one evaluation of `m_N`.
pub const DEFAULT_PHASE_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiplierKind {
    M,
    Phi,
    Nu,
    Omega,
    Lambda,
}

impl fmt::Display for MultiplierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MultiplierKind::M => "m",
            MultiplierKind::Phi => "phi",
            MultiplierKind::Nu => "nu",
            MultiplierKind::Omega => "omega",
            MultiplierKind::Lambda => "lambda",
        };
        f.write_str(s)
    }
}

/// A multiplier evaluated at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierValue {
    pub value: Complex64,
    pub at: Vec<f64>,
    pub kind: MultiplierKind,
    /// The rational center whose term produced the value, when there is one.
    pub provenance: Option<RationalPoint>,
}

/// `e(t) = exp(2πit)`.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * t)
}

pub(crate) fn mulmod(a: i128, b: i128, m: i128) -> i128 {
    (a * b).rem_euclid(m)
}

/// Exact phase tables for `<ξ, Q(y)>` with `ξ` rational.
pub(crate) struct PhaseEvaluator<'a> {
    gamma: &'a MultiIndexSet,
    nums: Vec<i128>,
    dens: Vec<i128>,
}

impl<'a> PhaseEvaluator<'a> {
    pub(crate) fn new(xi: &TorusPoint, gamma: &'a MultiIndexSet) -> Result<Self> {
        if xi.d() != gamma.d() {
            return Err(Error::contract(format!(
                "frequency has {} coordinates, Γ has d = {}",
                xi.d(),
                gamma.d()
            )));
        }
        Ok(Self {
            gamma,
            nums: xi.coords().iter().map(|c| *c.numer()).collect(),
            dens: xi.coords().iter().map(|c| *c.denom()).collect(),
        })
    }

    /// Fractional part of `<ξ, Q(y)>`.
    pub(crate) fn phase(&self, y: &[i64]) -> f64 {
        let mut total = 0.0;
        for ((g, &num), &den) in self.gamma.indices().iter().zip(&self.nums).zip(&self.dens) {
            if num == 0 {
                continue;
            }
            let mut mono: i128 = 1 % den;
            for (&base, &exp) in y.iter().zip(g) {
                let b = i128::from(base).rem_euclid(den);
                for _ in 0..exp {
                    mono = mulmod(mono, b, den);
                }
            }
            total += mulmod(num, mono, den) as f64 / den as f64;
        }
        total - total.floor()
    }
}

/// `m_N(ξ) = N^{-k} Σ_{y ∈ [1,N]^k} e(<ξ, Q(y)>)`.
pub fn multiplier_m(xi: &TorusPoint, n: u64, gamma: &MultiIndexSet) -> Result<MultiplierValue> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let total = cube_size(gamma.k(), n, DEFAULT_PHASE_CAP, "m_N phase terms N^k")?;
    let eval = PhaseEvaluator::new(xi, gamma)?;
    let mut acc = ComplexNeumaier::default();
    for_each_cube_point(gamma.k(), n, |y| {
        acc.add(e(eval.phase(y)));
        Ok(())
    })?;
    Ok(MultiplierValue {
        value: acc.value() / total as f64,
        at: xi.to_f64(),
        kind: MultiplierKind::M,
        provenance: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        let g = MultiIndexSet::build(1, 2).unwrap();
        let one = multiplier_m(&TorusPoint::zero(2), 37, &g).unwrap().value;
        assert!((one - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let half = TorusPoint::from_fractions(&[1, 0], 2).unwrap();
        assert!(multiplier_m(&half, 2, &g).unwrap().value.norm() < 1e-15);

        let xi = TorusPoint::from_f64(&[0.3, 0.7]).unwrap();
        let m1 = multiplier_m(&xi, 1, &g).unwrap().value;
        assert!((m1.norm() - 1.0).abs() < 1e-15);
        assert!((m1 - e(0.3 + 0.7)).norm() < 1e-12);
    }

    #[test]
    fn matches_float_summation() {
        let g = MultiIndexSet::build(2, 1).unwrap();
        let xi = TorusPoint::from_fractions(&[3, 17, 101], 257).unwrap();
        let x = xi.to_f64();
        let n = 9;
        let mut direct = Complex64::new(0.0, 0.0);
        for y1 in 1..=n {
            for y2 in 1..=n {
                let t = x[0] * y2 as f64 + x[1] * y1 as f64 + x[2] * (y1 * y2) as f64;
                direct += e(t);
            }
        }
        direct /= (n * n) as f64;
        assert!((multiplier_m(&xi, n as u64, &g).unwrap().value - direct).norm() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let g = MultiIndexSet::build(1, 2).unwrap();
        assert!(matches!(
            multiplier_m(&TorusPoint::zero(3), 4, &g),
            Err(Error::Contract(_))
        ));
    }

    proptest! {
        #[test]
        fn bounded_by_one(a in 0i128..1000, b in 0i128..1000, n in 1u64..200) {
            let g = MultiIndexSet::build(1, 2).unwrap();
            let xi = TorusPoint::from_fractions(&[a, b], 1000).unwrap();
            prop_assert!(multiplier_m(&xi, n, &g).unwrap().value.norm() <= 1.0 + 1e-12);
        }
    }
}
