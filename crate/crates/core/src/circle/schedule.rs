//! The `λ`-dependent splitting of the dyadic averages into a full-average
//! part and an `Ω^t` part.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum Assignment {
    Zero,
    /// `A_j = M_{2^j}`.
    FullAverage,
    /// `A_j = Ω_{2^j}^t`.
    Omega { t: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSchedule {
    pub lambda: f64,
    pub epsilon: f64,
    pub delta4_hat: f64,
    pub d: usize,
    /// `None` when `λ <= 1` and every `A_j` is zero.
    pub t: Option<u64>,
    pub kappa_t: Option<u64>,
    /// The cutoff is `2^{cutoff_log2}`.
    pub cutoff_log2: Option<u64>,
    /// The cutoff in decimal.
    pub cutoff: Option<String>,
}

impl SplitSchedule {
    pub fn is_zero(&self) -> bool {
        self.t.is_none()
    }

    /// Operator used at dyadic scale `2^j`.
    pub fn assignment(&self, j: u64) -> Assignment {
        match (self.t, self.cutoff_log2) {
            (Some(t), Some(c)) => {
                if c >= 64 || j < (1u64 << c) {
                    Assignment::FullAverage
                } else {
                    Assignment::Omega { t }
                }
            }
            _ => Assignment::Zero,
        }
    }
}

/// `t = ⌊log_2(λ) / δ̂_4⌋ + 1`, `κ_t = 20 d (t + 1)`, cutoff `2^{κ_t}`.
pub fn split_schedule(lambda: f64, epsilon: f64, delta4_hat: f64, d: usize) -> Result<SplitSchedule> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain("λ must be a positive real"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain("ε must lie in (0, 1]"));
    }
    if !(delta4_hat > 0.0 && delta4_hat.is_finite()) {
        return Err(Error::domain("δ̂_4 must be positive"));
    }
    if d == 0 {
        return Err(Error::domain("d must be positive"));
    }
    let mut out = SplitSchedule {
        lambda,
        epsilon,
        delta4_hat,
        d,
        t: None,
        kappa_t: None,
        cutoff_log2: None,
        cutoff: None,
    };
    if lambda <= 1.0 {
        return Ok(out);
    }
    let t = (lambda.log2() / delta4_hat).floor() as u64 + 1;
    let kappa = 20 * d as u64 * (t + 1);
    out.t = Some(t);
    out.kappa_t = Some(kappa);
    out.cutoff_log2 = Some(kappa);
    out.cutoff = Some((BigUint::one() << kappa).to_string());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let z = split_schedule(1.0, 0.5, 1.0, 2).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.assignment(0), Assignment::Zero);

        let s = split_schedule(2.0, 0.5, 1.0, 2).unwrap();
        assert_eq!(s.t, Some(2));
        assert_eq!(s.kappa_t, Some(120));
        assert_eq!(s.cutoff.as_deref(), Some("1329227995784915872903807060280344576"));
        assert_eq!(s.assignment(u64::MAX), Assignment::FullAverage);

        let small = split_schedule(2.0, 0.5, 100.0, 1).unwrap();
        assert_eq!(small.t, Some(1));
        assert_eq!(small.cutoff_log2, Some(40));
        assert_eq!(small.assignment((1 << 40) - 1), Assignment::FullAverage);
        assert_eq!(small.assignment(1 << 40), Assignment::Omega { t: 1 });

        assert!(split_schedule(2.0, 0.0, 1.0, 2).is_err());
        assert!(split_schedule(2.0, 0.5, 0.0, 2).is_err());
    }

    proptest! {
        #[test]
        fn t_is_monotone(a in 1.0f64..1e12, b in 1.0f64..1e12, delta in 0.01f64..4.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s1 = split_schedule(lo, 1.0, delta, 2).unwrap();
            let s2 = split_schedule(hi, 1.0, delta, 2).unwrap();
            prop_assert!(s1.t.unwrap_or(0) <= s2.t.unwrap_or(0));
        }
    }
}
