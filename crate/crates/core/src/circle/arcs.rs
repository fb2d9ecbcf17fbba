//! Major and minor arcs, Dirichlet approximation and the dyadic shells used
//! in the refined decomposition.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymap::MultiIndexSet;
use crate::rational::{abs_le, level_of, RationalPoint, TorusPoint, MAX_DENOMINATOR};

/// Exponents of the major arcs: denominators `q <= N^α`, radii `N^{-|γ|+β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcParams {
    pub alpha: f64,
    pub beta: f64,
    /// Empirical decay exponent of the Gauss sums, if known.
    pub delta_hat: Option<f64>,
}

impl ArcParams {
    pub fn new(alpha: f64, beta: f64, delta_hat: Option<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!("α = {alpha} and β = {beta} must lie in (0, 1)")));
        }
        if 4.0 * (alpha + beta) >= 1.0 {
            return Err(Error::domain(format!(
                "4(α + β) = {} violates 4(α + β) < 1",
                4.0 * (alpha + beta)
            )));
        }
        if let Some(d) = delta_hat {
            if !(d > 0.0) {
                return Err(Error::domain("δ̂ must be positive"));
            }
        }
        Ok(Self { alpha, beta, delta_hat })
    }

    /// Always true once constructed.
    pub fn separation_ok(&self) -> bool {
        4.0 * (self.alpha + self.beta) < 1.0
    }

    /// `8αδ̂ <= 1`, or `None` without a `δ̂`.
    pub fn decay_ok(&self) -> Option<bool> {
        self.delta_hat.map(|d| 8.0 * self.alpha * d <= 1.0)
    }

    /// `⌊N^α⌋`, tolerant of round-off at exact powers.
    pub fn max_denominator(&self, n: u64) -> i64 {
        ((n as f64).powf(self.alpha) * (1.0 + 1e-12)).floor().max(1.0) as i64
    }

    /// `N^{-|γ|+β}` for each coordinate.
    pub fn radii(&self, n: u64, gamma: &MultiIndexSet) -> Vec<f64> {
        gamma
            .degrees()
            .iter()
            .map(|&deg| (n as f64).powf(self.beta - deg as f64))
            .collect()
    }
}

impl Default for ArcParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.1,
            delta_hat: None,
        }
    }
}

/// Best approximation `a/q` with `1 <= q <= Q` from the continued fraction of `ξ`.
///
/// Returns the last convergent with denominator at most `Q`, which satisfies
/// `|ξ - a/q| <= 1/(q(Q+1))` and `gcd(a, q) = 1`.
pub fn dirichlet_approx(xi: f64, big_q: u64) -> Result<(i64, i64)> {
    if big_q == 0 {
        return Err(Error::domain("Q must be at least 1"));
    }
    if !xi.is_finite() {
        return Err(Error::domain("ξ must be finite"));
    }
    let floor = xi.floor();
    let frac = xi - floor;
    let num = (frac * MAX_DENOMINATOR as f64).round() as i128;
    let (a, q) = convergent_below(Ratio::new(num, MAX_DENOMINATOR), i128::from(big_q));
    Ok(((a + floor as i128 * q) as i64, q as i64))
}

/// Last convergent of `x >= 0` with denominator at most `bound`.
pub fn convergent_below(x: Ratio<i128>, bound: i128) -> (i128, i128) {
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let (mut n, mut d) = (*x.numer(), *x.denom());
    loop {
        let a = n.div_euclid(d);
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > bound {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let r = n - a * d;
        if r == 0 {
            break;
        }
        (n, d) = (d, r);
    }
    (p1, q1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", content = "center", rename_all = "lowercase")]
pub enum ArcClass {
    Major(RationalPoint),
    Minor,
}

impl ArcClass {
    pub fn is_major(&self) -> bool {
        matches!(self, ArcClass::Major(_))
    }
}

/// Numerators `a ∈ [1, q]` with `|x - a/q| <= radius` on the circle, ascending.
pub(crate) fn numerator_candidates(x: &Ratio<i128>, q: i64, radius: f64) -> Vec<i64> {
    let qq = i128::from(q);
    let norm = |a: i64| if a == 0 { q } else { a };
    if radius * (q as f64) < 0.49 {
        // Only the nearest numerator can qualify.
        let scaled = x * Ratio::from_integer(qq);
        let a = scaled.round().to_integer().rem_euclid(qq) as i64;
        let delta = crate::rational::centered(x - Ratio::new(i128::from(a), qq));
        return if abs_le(&delta, radius) { vec![norm(a)] } else { Vec::new() };
    }
    let mut out: Vec<i64> = (0..q)
        .filter(|&a| {
            let delta = crate::rational::centered(x - Ratio::new(i128::from(a), qq));
            abs_le(&delta, radius)
        })
        .map(norm)
        .collect();
    out.sort_unstable();
    out
}

/// Visits the cartesian product of per-coordinate candidates lexicographically
/// and returns the first reduced vector.
fn first_reduced(q: i64, cands: &[Vec<i64>]) -> Option<Vec<i64>> {
    if cands.iter().any(|c| c.is_empty()) {
        return None;
    }
    let mut idx = vec![0usize; cands.len()];
    loop {
        let a: Vec<i64> = idx.iter().zip(cands).map(|(&i, c)| c[i]).collect();
        if a.iter().fold(q, |g, &x| g.gcd(&x)) == 1 {
            return Some(a);
        }
        let mut pos = cands.len();
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cands[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Major arc `𝔐_N(a/q)` with the smallest `q`, then lexicographically smallest `a`.
pub fn classify_arc(xi: &TorusPoint, n: u64, params: &ArcParams, gamma: &MultiIndexSet) -> Result<ArcClass> {
    if xi.d() != gamma.d() {
        return Err(Error::contract("frequency dimension differs from d"));
    }
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let radii = params.radii(n, gamma);
    for q in 1..=params.max_denominator(n) {
        let cands: Vec<Vec<i64>> = xi
            .coords()
            .iter()
            .zip(&radii)
            .map(|(x, &r)| numerator_candidates(x, q, r))
            .collect();
        if let Some(a) = first_reduced(q, &cands) {
            return Ok(ArcClass::Major(RationalPoint::new(&a, q)?));
        }
    }
    Ok(ArcClass::Minor)
}

/// Position of `ξ` relative to the shells `𝔐^u(a/q)`: `|ξ_γ - a_γ/q| <= 2^{-n|γ|-u}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShellMembership {
    /// `ξ = a/q`, inside every `𝔐^u` and hence in no `𝔑^u`.
    Center { center: RationalPoint },
    /// `ξ ∈ 𝔑^u(a/q) = 𝔐^u(a/q) \ 𝔐^{u+1}(a/q)`.
    Shell { center: RationalPoint, u: i64 },
    None,
}

/// Largest integer `m` with `x <= 2^{-m}`, for `0 < x < 2^62`.
fn neg_log2_floor(x: &Ratio<i128>) -> i64 {
    let (p, r) = (*x.numer(), *x.denom());
    let bits = |v: i128| 128 - v.leading_zeros() as i64;
    let le = |m: i64| {
        // p * 2^m <= r
        if m >= 0 {
            (p << m) <= r
        } else {
            p <= (r << (-m))
        }
    };
    let mut m = bits(r) - bits(p);
    while !le(m) {
        m -= 1;
    }
    while le(m + 1) {
        m += 1;
    }
    m
}

/// Largest `u` with `ξ ∈ 𝔐^u(a/q)` for an offset `δ = ξ - a/q`, or `None` when `δ = 0`.
pub fn shell_index(delta: &[Ratio<i128>], n: u32, gamma: &MultiIndexSet) -> Option<i64> {
    delta
        .iter()
        .zip(gamma.degrees())
        .filter(|(d, _)| !d.is_zero())
        .map(|(d, deg)| neg_log2_floor(&d.abs()) - i64::from(n) * i64::from(deg))
        .min()
}

/// Finds the center `a/q ∈ R_s` with `ξ ∈ 𝔐^{u_min}(a/q)` and reports the shell.
pub fn refine_arc_membership(
    xi: &TorusPoint,
    n: u32,
    s: u32,
    u_min: i64,
    gamma: &MultiIndexSet,
) -> Result<ShellMembership> {
    if xi.d() != gamma.d() {
        return Err(Error::contract("frequency dimension differs from d"));
    }
    if s >= 31 {
        return Err(Error::size("rational family level s", u128::from(s), 30));
    }
    let radii: Vec<f64> = gamma
        .degrees()
        .iter()
        .map(|&deg| 2f64.powf(-(f64::from(n) * f64::from(deg)) - u_min as f64))
        .collect();
    let qs: Vec<i64> = if s == 0 { vec![1] } else { ((1i64 << s)..(1i64 << (s + 1))).collect() };
    for q in qs {
        let cands: Vec<Vec<i64>> = xi
            .coords()
            .iter()
            .zip(&radii)
            .map(|(x, &r)| numerator_candidates(x, q, r))
            .collect();
        if let Some(a) = first_reduced(q, &cands) {
            let center = RationalPoint::new(&a, q)?;
            let delta = xi.offset_from(&center);
            return Ok(match shell_index(&delta, n, gamma) {
                None => ShellMembership::Center { center },
                Some(u) => ShellMembership::Shell { center, u },
            });
        }
    }
    Ok(ShellMembership::None)
}

/// Level of a center in the families `R_s`.
pub fn level_of_center(center: &RationalPoint) -> u32 {
    if center.q == 1 {
        0
    } else {
        level_of(center.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad_gamma() -> MultiIndexSet {
        MultiIndexSet::build(1, 2).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ArcParams::new(0.1, 0.1, None).is_ok());
        assert!(ArcParams::new(0.2, 0.05, None).is_err());
        assert!(ArcParams::new(0.0, 0.1, None).is_err());
        let p = ArcParams::new(0.1, 0.1, Some(0.5)).unwrap();
        assert_eq!(p.decay_ok(), Some(true));
        assert_eq!(ArcParams::new(0.1, 0.1, Some(2.0)).unwrap().decay_ok(), Some(false));
        assert_eq!(p.max_denominator(1024), 2);
    }

    #[test]
    fn dirichlet_examples() {
        assert_eq!(dirichlet_approx(0.0, 5).unwrap(), (0, 1));
        assert_eq!(dirichlet_approx(0.142857, 10).unwrap(), (1, 7));
        let x = std::f64::consts::PI - 3.0;
        let (a, q) = dirichlet_approx(x, 100).unwrap();
        assert_eq!((a, q), (1, 7));
        assert!((x - 1.0 / 7.0).abs() <= 1.0 / 707.0);
        assert!(dirichlet_approx(0.5, 0).is_err());
    }

    #[test]
    fn classify_examples() {
        let g = quad_gamma();
        let p = ArcParams::default();
        let zero = TorusPoint::zero(2);
        for n in [1u64, 7, 1024, 1 << 20] {
            assert_eq!(classify_arc(&zero, n, &p, &g).unwrap(), ArcClass::Major(RationalPoint::zero(2)));
        }
        let half = TorusPoint::from_fractions(&[1, 0], 2).unwrap();
        assert_eq!(
            classify_arc(&half, 1024, &p, &g).unwrap(),
            ArcClass::Major(RationalPoint::new(&[1, 2], 2).unwrap())
        );
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let xi = TorusPoint::from_f64(&[golden, (2.0 * golden).fract()]).unwrap();
        assert_eq!(classify_arc(&xi, 1024, &p, &g).unwrap(), ArcClass::Minor);
    }

    #[test]
    fn shell_examples() {
        let g = quad_gamma();
        let c = RationalPoint::new(&[1, 3], 3).unwrap();
        let at = refine_arc_membership(&c.to_torus(), 4, 1, -1, &g).unwrap();
        assert_eq!(at, ShellMembership::Center { center: c.clone() });

        // ξ = a/q + (2^{-n-u-1/2}, 0) lies in 𝔑^u.
        let (n, u) = (4u32, 2i64);
        let off = 2f64.powf(-(n as f64) - u as f64 - 0.5);
        let xi = TorusPoint::from_f64(&[1.0 / 3.0 + off, 0.0]).unwrap();
        // The snapped coordinate of 1/3 is not exact; use exact arithmetic instead.
        let exact = TorusPoint::new(vec![
            Ratio::new(1, 3) + Ratio::new(11, 1 << 10),
            Ratio::zero(),
        ])
        .unwrap();
        assert_eq!(
            refine_arc_membership(&exact, n, 1, 0, &g).unwrap(),
            ShellMembership::Shell { center: c.clone(), u: 2 }
        );
        match refine_arc_membership(&xi, n, 1, 0, &g).unwrap() {
            ShellMembership::Shell { center, u: got } => {
                assert_eq!(center, c);
                assert_eq!(got, u);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn neg_log2_floor_matches_definition() {
        for (p, r, m) in [(1i128, 4i128, 2i64), (1, 5, 2), (3, 8, 1), (1, 3, 1), (1, 1 << 40, 40)] {
            assert_eq!(neg_log2_floor(&Ratio::new(p, r)), m);
        }
    }

    proptest! {
        #[test]
        fn dirichlet_inequality(x in -3.0f64..3.0, big_q in 1u64..5000) {
            let (a, q) = dirichlet_approx(x, big_q).unwrap();
            prop_assert!(q >= 1 && q as u64 <= big_q);
            prop_assert_eq!(a.gcd(&q), 1);
            prop_assert!((x - a as f64 / q as f64).abs() <= 1.0 / (q as f64 * (big_q as f64 + 1.0)) + 1e-15);
        }

        #[test]
        fn major_witnesses_recheck(x in 0.0f64..1.0, y in 0.0f64..1.0, e in 1u32..20) {
            let g = quad_gamma();
            let p = ArcParams::default();
            let n = 1u64 << e;
            let xi = TorusPoint::from_f64(&[x, y]).unwrap();
            if let ArcClass::Major(c) = classify_arc(&xi, n, &p, &g).unwrap() {
                prop_assert!(c.check_reduced());
                prop_assert!(c.q <= p.max_denominator(n));
                for (d, r) in xi.offset_from(&c).iter().zip(p.radii(n, &g)) {
                    prop_assert!(abs_le(d, r));
                }
            }
        }

        #[test]
        fn shells_are_disjoint(num in 1i128..64, e in 8u32..30) {
            let g = quad_gamma();
            let c = RationalPoint::new(&[1, 2], 2).unwrap();
            let delta = Ratio::new(num, 1i128 << e);
            let xi = TorusPoint::new(vec![Ratio::new(1, 2) + delta, Ratio::new(1, 1)]).unwrap();
            if let ShellMembership::Shell { center, u } = refine_arc_membership(&xi, 2, 1, -2, &g).unwrap() {
                prop_assert_eq!(center, c);
                let radius = |u: i64| Ratio::new(1i128, 1i128 << (2 + u));
                prop_assert!(delta <= radius(u));
                prop_assert!(delta > radius(u + 1));
            }
        }
    }
}
