//! Reduced residues, Gauss sums of the canonical mapping, rational families
//! and factorial moduli.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::averaging::kernel::{cube_size, for_each_cube_point};
use crate::averaging::lattice::ComplexNeumaier;
use crate::averaging::multiplier::{e, mulmod, PhaseEvaluator};
use crate::error::{Error, Result};
use crate::polymap::MultiIndexSet;
pub use crate::rational::RationalPoint;

/// Default cap on enumerated points and on phase terms per sum.
pub const DEFAULT_ENUM_CAP: u128 = 10_000_000;

/// Default largest `t` for which `Q_t = (2^{t+1})!` is formed.
pub const DEFAULT_FACTORIAL_CAP: u32 = 3;

fn power_count(q: u64, d: usize) -> u128 {
    (0..d).fold(1u128, |acc, _| acc.saturating_mul(u128::from(q)))
}

/// Visits `a ∈ [1, q]^d` in lexicographic order.
fn for_each_numerator(q: i64, d: usize, mut f: impl FnMut(&[i64])) {
    let mut a = vec![1i64; d];
    loop {
        f(&a);
        let mut pos = d;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if a[pos] < q {
                a[pos] += 1;
                break;
            }
            a[pos] = 1;
        }
    }
}

/// `A_q = {a ∈ [1, q]^d : gcd(q, gcd(a)) = 1}` as rational points `a/q`.
pub fn reduced_residues(q: i64, d: usize) -> Result<Vec<RationalPoint>> {
    if q < 1 || d == 0 {
        return Err(Error::domain("need q >= 1 and d >= 1"));
    }
    let total = power_count(q as u64, d);
    if total > DEFAULT_ENUM_CAP {
        return Err(Error::size("residue enumeration q^d", total, DEFAULT_ENUM_CAP));
    }
    let mut out = Vec::new();
    for_each_numerator(q, d, |a| {
        if a.iter().fold(q, |g, &x| g.gcd(&x)) == 1 {
            out.push(RationalPoint {
                a: a.to_vec(),
                q,
                reduced: true,
            });
        }
    });
    Ok(out)
}

/// `G(a/q) = q^{-k} Σ_{y ∈ [1,q]^k} e(<a/q, Q(y)>)` by exact-phase summation.
pub fn gauss_sum(ap: &RationalPoint, gamma: &MultiIndexSet) -> Result<Complex64> {
    if ap.d() != gamma.d() {
        return Err(Error::contract(format!(
            "rational point has {} coordinates, Γ has d = {}",
            ap.d(),
            gamma.d()
        )));
    }
    let q = ap.q as u64;
    let total = cube_size(gamma.k(), q, DEFAULT_ENUM_CAP, "Gauss sum terms q^k")?;
    let xi = ap.to_torus();
    let eval = PhaseEvaluator::new(&xi, gamma)?;
    let mut acc = ComplexNeumaier::default();
    for_each_cube_point(gamma.k(), q, |y| {
        acc.add(e(eval.phase(y)));
        Ok(())
    })?;
    Ok(acc.value() / total as f64)
}

/// `max_{a ∈ A_q} |G(a/q)|` with its first maximizer in `(q, a)` order.
///
/// For one variable the sums over the linear coordinate are a discrete
/// Fourier transform, so each slice of fixed higher numerators costs one FFT.
pub fn max_gauss_modulus(q: i64, gamma: &MultiIndexSet) -> Result<(f64, RationalPoint)> {
    if q < 1 {
        return Err(Error::domain("q must be positive"));
    }
    let d = gamma.d();
    if q == 1 {
        let p = RationalPoint::zero(d);
        return Ok((gauss_sum(&p, gamma)?.norm(), p));
    }
    if gamma.k() != 1 {
        let mut best: Option<(f64, RationalPoint)> = None;
        for p in reduced_residues(q, d)? {
            let g = gauss_sum(&p, gamma)?.norm();
            if !matches!(&best, Some((b, _)) if g <= *b) {
                best = Some((g, p));
            }
        }
        return Ok(best.expect("A_q is nonempty"));
    }
    let total = power_count(q as u64, d).saturating_mul(q as u128);
    if total > DEFAULT_ENUM_CAP.saturating_mul(100) {
        return Err(Error::size("Gauss sum sweep q^{d+1}", total, DEFAULT_ENUM_CAP * 100));
    }
    let qq = i128::from(q);
    let fft = FftPlanner::<f64>::new().plan_fft(q as usize, FftDirection::Inverse);
    // Slices indexed by the higher numerators (a_2, ..., a_d).
    let mut slices = Vec::new();
    if d > 1 {
        for_each_numerator(q, d - 1, |rest| slices.push(rest.to_vec()));
    } else {
        slices.push(Vec::new());
    }
    let results: Vec<(f64, RationalPoint)> = slices
        .par_iter()
        .map(|rest| {
            let mut buf: Vec<Complex64> = (0..q)
                .map(|y| {
                    // Index y stands for the residue y, with y = 0 playing the role of q.
                    let yy = if y == 0 { qq } else { i128::from(y) };
                    let mut power = yy % qq;
                    let mut acc = 0i128;
                    for &a in rest {
                        power = mulmod(power, yy, qq);
                        acc = (acc + mulmod(i128::from(a), power, qq)) % qq;
                    }
                    e(acc as f64 / q as f64)
                })
                .collect();
            fft.process(&mut buf);
            let g_rest = rest.iter().fold(q, |g, &x| g.gcd(&x));
            let mut best = (-1.0f64, RationalPoint::zero(d));
            for a1 in 1..=q {
                if g_rest.gcd(&a1) != 1 {
                    continue;
                }
                let m = buf[(a1 % q) as usize].norm() / q as f64;
                if m > best.0 {
                    let mut a = vec![a1];
                    a.extend_from_slice(rest);
                    best = (m, RationalPoint { a, q, reduced: true });
                }
            }
            best
        })
        .collect();
    let mut best = (-1.0f64, RationalPoint::zero(d));
    for cand in results {
        if cand.0 > best.0 || (cand.0 == best.0 && cand.1 < best.1) {
            best = cand;
        }
    }
    Ok(best)
}

/// `R_s = {a/q : 2^s <= q < 2^{s+1}, a ∈ A_q}`, with `R_0 = {0}`.
pub fn rational_family(s: u32, gamma: &MultiIndexSet) -> Result<Vec<RationalPoint>> {
    let d = gamma.d();
    if s == 0 {
        return Ok(vec![RationalPoint::zero(d)]);
    }
    if s >= 31 {
        return Err(Error::size("rational family level s", u128::from(s), 30));
    }
    let (lo, hi) = (1i64 << s, 1i64 << (s + 1));
    let total: u128 = (lo..hi).map(|q| power_count(q as u64, d)).sum();
    if total > DEFAULT_ENUM_CAP {
        return Err(Error::size("rational family enumeration", total, DEFAULT_ENUM_CAP));
    }
    let mut out = Vec::new();
    for q in lo..hi {
        out.extend(reduced_residues(q, d)?);
    }
    Ok(out)
}

/// `Q_t = (2^{t+1})!`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorialModulus {
    pub t: u32,
    pub value: BigUint,
}

impl FactorialModulus {
    pub fn to_u64(&self) -> Option<u64> {
        self.value.to_u64()
    }

    pub fn divides(&self, q: u64) -> bool {
        q > 0 && (&self.value % BigUint::from(q)) == BigUint::from(0u32)
    }
}

pub fn factorial_modulus(t: u32) -> Result<FactorialModulus> {
    factorial_modulus_with_cap(t, DEFAULT_FACTORIAL_CAP)
}

pub fn factorial_modulus_with_cap(t: u32, cap: u32) -> Result<FactorialModulus> {
    if t > cap || t >= 20 {
        return Err(Error::size("factorial modulus index t", u128::from(t), u128::from(cap)));
    }
    let n = 1u64 << (t + 1);
    let value = (1..=n).fold(BigUint::one(), |acc, j| acc * j);
    Ok(FactorialModulus { t, value })
}

/// `{a/q : q | Q_t, q >= 2^{t+1}, a ∈ A_q}`.
pub fn divisor_family(t: u32, gamma: &MultiIndexSet) -> Result<Vec<RationalPoint>> {
    let qt = factorial_modulus(t)?
        .to_u64()
        .ok_or_else(|| Error::size("Q_t as machine integer", u128::MAX, u128::from(u64::MAX)))?;
    let d = gamma.d();
    let min_q = 1u64 << (t + 1);
    let mut divisors = Vec::new();
    let mut total: u128 = 0;
    let mut j = 1u64;
    while j * j <= qt {
        if qt % j == 0 {
            for q in [j, qt / j] {
                if q >= min_q && !divisors.contains(&q) {
                    divisors.push(q);
                    total = total.saturating_add(power_count(q, d));
                }
            }
        }
        j += 1;
    }
    if total > DEFAULT_ENUM_CAP {
        return Err(Error::size("divisor family enumeration", total, DEFAULT_ENUM_CAP));
    }
    divisors.sort_unstable();
    let mut out = Vec::new();
    for q in divisors {
        out.extend(reduced_residues(q as i64, d)?);
    }
    Ok(out)
}

/// All counts `L_m = #{y ∈ [1, Q_t]^k : Q(y) ≡ m (mod Q_t)}`, keyed by `m ∈ [0, Q_t)^d`.
pub fn residue_counts(t: u32, gamma: &MultiIndexSet) -> Result<BTreeMap<Vec<u64>, u64>> {
    let qt = factorial_modulus(t)?
        .to_u64()
        .ok_or_else(|| Error::size("Q_t as machine integer", u128::MAX, u128::from(u64::MAX)))?;
    cube_size(gamma.k(), qt, DEFAULT_ENUM_CAP, "residue count box Q_t^k")?;
    let m = i128::from(qt);
    let mut out = BTreeMap::new();
    for_each_cube_point(gamma.k(), qt, |y| {
        let key: Vec<u64> = gamma
            .indices()
            .iter()
            .map(|g| {
                let mut v = 1i128 % m;
                for (&b, &ex) in y.iter().zip(g) {
                    for _ in 0..ex {
                        v = mulmod(v, i128::from(b), m);
                    }
                }
                v as u64
            })
            .collect();
        *out.entry(key).or_insert(0) += 1;
        Ok(())
    })?;
    Ok(out)
}

/// `L_m` for one residue vector `m`, reduced mod `Q_t`.
pub fn residue_count(m: &[u64], t: u32, gamma: &MultiIndexSet) -> Result<u64> {
    if m.len() != gamma.d() {
        return Err(Error::contract("residue vector has the wrong length"));
    }
    let qt = factorial_modulus(t)?.to_u64().unwrap_or(u64::MAX);
    let key: Vec<u64> = m.iter().map(|&x| x % qt).collect();
    Ok(residue_counts(t, gamma)?.get(&key).copied().unwrap_or(0))
}

/// Log-log least-squares fit of `(scale, value)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// `-slope`.
    pub delta: f64,
}

pub fn fit_decay(pairs: &[(f64, f64)]) -> Result<DecayFit> {
    if pairs.len() < 3 {
        return Err(Error::domain("a decay fit needs at least three pairs"));
    }
    if let Some(p) = pairs.iter().find(|(s, v)| !(*s > 0.0) || !(*v > 0.0)) {
        return Err(Error::domain(format!(
            "decay fit needs positive scales and values, got {p:?}"
        )));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(s, _)| s.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("decay fit needs at least two distinct scales"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        pairs: pairs.to_vec(),
        slope,
        intercept: my - slope * mx,
        delta: -slope,
    })
}

/// [`fit_decay`] after dropping the pair with the smallest scale.
pub fn fit_decay_skip_smallest(pairs: &[(f64, f64)]) -> Result<DecayFit> {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    fit_decay(sorted.get(1..).unwrap_or(&[]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gamma12() -> MultiIndexSet {
        MultiIndexSet::build(1, 2).unwrap()
    }

    #[test]
    fn reduced_residue_examples() {
        let r = reduced_residues(1, 3).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].a, vec![1, 1, 1]);
        let a: Vec<i64> = reduced_residues(4, 1).unwrap().iter().map(|p| p.a[0]).collect();
        assert_eq!(a, vec![1, 3]);
        let r = reduced_residues(3, 2).unwrap();
        assert_eq!(r.len(), 8);
        assert!(!r.iter().any(|p| p.a == vec![3, 3]));
        assert!(r.iter().all(|p| p.check_reduced()));
    }

    #[test]
    fn gauss_examples() {
        let g = gamma12();
        assert!((gauss_sum(&RationalPoint::zero(2), &g).unwrap() - 1.0).norm() < 1e-15);
        let p = RationalPoint::new(&[2, 1], 2).unwrap();
        assert!(gauss_sum(&p, &g).unwrap().norm() < 1e-15);
        let p = RationalPoint::new(&[3, 1], 3).unwrap();
        let v = gauss_sum(&p, &g).unwrap();
        assert!((v - Complex64::new(0.0, 1.0 / 3f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn quadratic_gauss_modulus_at_primes() {
        let g = gamma12();
        for q in [3i64, 5, 7, 11, 13, 101, 257, 509] {
            for c in [1, 2, q - 1] {
                let p = RationalPoint::new(&[q, c], q).unwrap();
                let v = gauss_sum(&p, &g).unwrap().norm();
                assert!((v - (q as f64).powf(-0.5)).abs() < 1e-9, "q = {q}, c = {c}");
            }
        }
    }

    #[test]
    fn fft_maximum_matches_direct_enumeration() {
        let g = gamma12();
        for q in 1..=30i64 {
            let (fast, arg) = max_gauss_modulus(q, &g).unwrap();
            let direct = reduced_residues(q, 2)
                .unwrap()
                .iter()
                .map(|p| gauss_sum(p, &g).unwrap().norm())
                .fold(0.0, f64::max);
            assert!((fast - direct).abs() < 1e-12, "q = {q}");
            assert!((gauss_sum(&arg, &g).unwrap().norm() - fast).abs() < 1e-12);
        }
        let g3 = MultiIndexSet::build(1, 3).unwrap();
        for q in [4i64, 9, 12] {
            let (fast, _) = max_gauss_modulus(q, &g3).unwrap();
            let direct = reduced_residues(q, 3)
                .unwrap()
                .iter()
                .map(|p| gauss_sum(p, &g3).unwrap().norm())
                .fold(0.0, f64::max);
            assert!((fast - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn families() {
        let g1 = MultiIndexSet::build(1, 1).unwrap();
        assert_eq!(rational_family(0, &g1).unwrap(), vec![RationalPoint::zero(1)]);
        let r1: Vec<(i64, i64)> = rational_family(1, &g1).unwrap().iter().map(|p| (p.a[0], p.q)).collect();
        assert_eq!(r1, vec![(1, 2), (1, 3), (2, 3)]);
        let r2 = rational_family(2, &g1).unwrap();
        assert!(r2.iter().all(|p| (4..8).contains(&p.q) && p.a[0].gcd(&p.q) == 1));
        assert_eq!(r2.len(), 2 + 4 + 2 + 6);

        let g = gamma12();
        let mut seen = std::collections::HashSet::new();
        for s in 0..=3 {
            for p in rational_family(s, &g).unwrap() {
                assert!(seen.insert(p.to_torus()));
            }
        }
    }

    #[test]
    fn factorial_moduli() {
        assert_eq!(factorial_modulus(0).unwrap().to_u64(), Some(2));
        assert_eq!(factorial_modulus(1).unwrap().to_u64(), Some(24));
        assert_eq!(factorial_modulus(2).unwrap().to_u64(), Some(40320));
        assert_eq!(factorial_modulus(3).unwrap().to_u64(), Some(20_922_789_888_000));
        assert!(matches!(factorial_modulus(4), Err(Error::Size { .. })));
        for t in 0..=3 {
            let qt = factorial_modulus(t).unwrap();
            for q in 1..=(1u64 << (t + 1)) {
                assert!(qt.divides(q));
            }
            if t < 3 {
                let next = factorial_modulus(t + 1).unwrap();
                assert_eq!(&next.value % &qt.value, BigUint::from(0u32));
            }
        }
    }

    #[test]
    fn divisor_families() {
        let g1 = MultiIndexSet::build(1, 1).unwrap();
        let f0 = divisor_family(0, &g1).unwrap();
        assert_eq!(f0, vec![RationalPoint::new(&[1], 2).unwrap()]);
        let qs: std::collections::BTreeSet<i64> =
            divisor_family(1, &g1).unwrap().iter().map(|p| p.q).collect();
        assert_eq!(qs.into_iter().collect::<Vec<_>>(), vec![4, 6, 8, 12, 24]);
        assert!(divisor_family(1, &gamma12()).unwrap().iter().all(|p| 24 % p.q == 0));
    }

    #[test]
    fn residue_count_examples() {
        let g = gamma12();
        assert_eq!(residue_count(&[1, 1], 0, &g).unwrap(), 1);
        assert_eq!(residue_count(&[0, 0], 0, &g).unwrap(), 1);
        assert_eq!(residue_count(&[2, 2], 0, &g).unwrap(), 1);
        assert_eq!(residue_count(&[1, 0], 0, &g).unwrap(), 0);
        for t in 0..=1 {
            let total: u64 = residue_counts(t, &g).unwrap().values().sum();
            let qt = factorial_modulus(t).unwrap().to_u64().unwrap();
            assert_eq!(total, qt);
        }
    }

    #[test]
    fn decay_fits() {
        let pairs: Vec<(f64, f64)> = (1..8).map(|i| (2f64.powi(i), 2f64.powi(i).powf(-0.5))).collect();
        assert!((fit_decay(&pairs).unwrap().delta - 0.5).abs() < 1e-9);
        let flat: Vec<(f64, f64)> = (1..5).map(|i| (i as f64, 3.0)).collect();
        assert!(fit_decay(&flat).unwrap().delta.abs() < 1e-12);
        assert!(matches!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::Domain(_))));
        let skip = fit_decay_skip_smallest(&[(1.0, 100.0), (2.0, 0.5), (4.0, 0.25), (8.0, 0.125)]).unwrap();
        assert!((skip.slope + 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn gauss_sums_bounded(q in 1i64..60, a1 in 0i64..60, a2 in 0i64..60) {
            let p = RationalPoint::new(&[a1, a2], q).unwrap();
            prop_assert!(gauss_sum(&p, &gamma12()).unwrap().norm() <= 1.0 + 1e-12);
        }
    }
}
