//! Torus points with exact rational coordinates and rational centers `a/q`.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest denominator a torus coordinate may carry. Keeps every
/// `numerator * residue` product inside `i128`.
pub const MAX_DENOMINATOR: i128 = 1 << 62;

/// A point of `T^d = (R/Z)^d` with coordinates stored as reduced fractions in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    coords: Vec<Ratio<i128>>,
}

fn reduce_unit(x: Ratio<i128>) -> Ratio<i128> {
    let den = *x.denom();
    let num = x.numer().rem_euclid(den);
    Ratio::new(num, den)
}

impl TorusPoint {
    pub fn new(coords: Vec<Ratio<i128>>) -> Result<Self> {
        let coords: Vec<_> = coords.into_iter().map(reduce_unit).collect();
        if let Some(c) = coords.iter().find(|c| *c.denom() > MAX_DENOMINATOR) {
            return Err(Error::contract(format!(
                "torus coordinate {c} has a denominator above 2^62"
            )));
        }
        Ok(Self { coords })
    }

    pub fn zero(d: usize) -> Self {
        Self {
            coords: vec![Ratio::zero(); d],
        }
    }

    /// `(num_1/den, ..., num_d/den)` reduced mod 1.
    pub fn from_fractions(nums: &[i128], den: i128) -> Result<Self> {
        if den <= 0 {
            return Err(Error::domain("denominator must be positive"));
        }
        Self::new(nums.iter().map(|&n| Ratio::new(n, den)).collect())
    }

    /// Snaps each coordinate to the nearest multiple of `2^-62` after reduction mod 1.
    pub fn from_f64(x: &[f64]) -> Result<Self> {
        let mut coords = Vec::with_capacity(x.len());
        for &v in x {
            if !v.is_finite() {
                return Err(Error::domain(format!("torus coordinate {v} is not finite")));
            }
            let frac = v - v.floor();
            let num = (frac * MAX_DENOMINATOR as f64).round() as i128;
            coords.push(Ratio::new(num, MAX_DENOMINATOR));
        }
        Self::new(coords)
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Ratio<i128>] {
        &self.coords
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(ratio_to_f64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Fractional part of `<ξ, v>` for an integer vector `v`, exact per
    /// coordinate and summed in floating point.
    pub fn phase(&self, v: &[i128]) -> f64 {
        let mut total = 0.0;
        for (c, &x) in self.coords.iter().zip(v) {
            let den = *c.denom();
            let r = (c.numer() * x.rem_euclid(den)).rem_euclid(den);
            total += r as f64 / den as f64;
        }
        total - total.floor()
    }

    /// `ξ - a/q` with every coordinate lifted to `(-1/2, 1/2]`.
    pub fn offset_from(&self, center: &RationalPoint) -> Vec<Ratio<i128>> {
        self.coords
            .iter()
            .zip(&center.a)
            .map(|(c, &a)| centered(c - Ratio::new(i128::from(a), i128::from(center.q))))
            .collect()
    }

    pub fn offset_from_f64(&self, center: &RationalPoint) -> Vec<f64> {
        self.offset_from(center).iter().map(ratio_to_f64).collect()
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Representative of `x mod 1` in `(-1/2, 1/2]`.
pub fn centered(x: Ratio<i128>) -> Ratio<i128> {
    let r = reduce_unit(x);
    if r > Ratio::new(1, 2) {
        r - 1
    } else {
        r
    }
}

pub fn ratio_to_f64(x: &Ratio<i128>) -> f64 {
    // Split to keep precision when numerator and denominator are both huge.
    let (n, d) = (*x.numer(), *x.denom());
    let int = n.div_euclid(d);
    let rem = n.rem_euclid(d);
    int as f64 + rem as f64 / d as f64
}

/// `|x| <= bound` for an exact rational `x` and a float bound.
pub fn abs_le(x: &Ratio<i128>, bound: f64) -> bool {
    let ax = x.abs();
    let approx = ratio_to_f64(&ax);
    let margin = 1e-12 * bound.abs().max(f64::MIN_POSITIVE);
    if approx < bound - margin {
        return true;
    }
    if approx > bound + margin {
        return false;
    }
    match Ratio::<i128>::approximate_float(bound) {
        Some(b) => ax <= b,
        None => approx <= bound,
    }
}

/// A rational point `a/q` with numerators normalized into `1..=q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalPoint {
    pub a: Vec<i64>,
    pub q: i64,
    pub reduced: bool,
}

impl RationalPoint {
    pub fn new(a: &[i64], q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(Error::domain(format!("denominator must be positive, got {q}")));
        }
        let a: Vec<i64> = a
            .iter()
            .map(|&x| {
                let r = x.rem_euclid(q);
                if r == 0 {
                    q
                } else {
                    r
                }
            })
            .collect();
        let g = a.iter().fold(q, |g, &x| g.gcd(&x));
        Ok(Self {
            a,
            q,
            reduced: g == 1,
        })
    }

    /// The origin `0 = (1, ..., 1)/1`.
    pub fn zero(d: usize) -> Self {
        Self {
            a: vec![1; d],
            q: 1,
            reduced: true,
        }
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    /// Recomputes the reducedness flag from the fields.
    pub fn check_reduced(&self) -> bool {
        self.a.iter().fold(self.q, |g, &x| g.gcd(&x)) == 1
    }

    pub fn to_torus(&self) -> TorusPoint {
        TorusPoint::from_fractions(
            &self.a.iter().map(|&x| i128::from(x)).collect::<Vec<_>>(),
            i128::from(self.q),
        )
        .expect("denominator fits")
    }

    /// Lowest-terms representative of the same torus point.
    pub fn reduce(&self) -> Self {
        let g = self.a.iter().fold(self.q, |g, &x| g.gcd(&x));
        let a: Vec<i64> = self.a.iter().map(|&x| x / g).collect();
        Self::new(&a, self.q / g).expect("positive denominator")
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.a
            .iter()
            .map(|&x| (x % self.q) as f64 / self.q as f64)
            .collect()
    }
}

impl Ord for RationalPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.q.cmp(&other.q).then_with(|| self.a.cmp(&other.a))
    }
}

impl PartialOrd for RationalPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        write!(f, "({})/{}", parts.join(","), self.q)
    }
}

/// Floor of `log2(q)` for `q >= 1`.
pub fn level_of(q: i64) -> u32 {
    63 - q.leading_zeros()
}
