//! Measure-preserving systems and the ergodic averages
//! `A_N f(x) = N^{-k} Σ_{n ∈ [1,N]^k} f(T_1^{P_1(n)} ... T_{d0}^{P_{d0}(n)} x)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::kernel::{cube_size, for_each_cube_point};
use crate::averaging::lattice::{ComplexNeumaier, LatticeFunction, LatticeValue};
use crate::averaging::multiplier::e;
use crate::averaging::ops::average_direct;
use crate::error::{Error, Result};
use crate::polymap::PolynomialMap;
use crate::variation::{variation_exact, RealSequence};

/// Cap on `N^k` terms per average.
pub const DEFAULT_TERM_CAP: u128 = 100_000_000;
/// Cap on the number of points of a cyclic space.
pub const CYCLIC_POINT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DynamicalSystem {
    /// `X = Z_{M_1} x ... x Z_{M_{d0}}` with `T_j x = x + e_j`; every point is a sample.
    CyclicShift { modulus: Vec<u64> },
    /// `X = T^{d0}` with `T_j x = x + α_j e_j`, observed at fixed sample points.
    Rotation { alpha: Vec<f64>, samples: Vec<Vec<f64>> },
}

/// Kronecker points `frac(i g)`, `i = 1..=count`, with `g` built from the
/// generalized golden ratio of dimension `d`.
pub fn kronecker_samples(d: usize, count: usize) -> Vec<Vec<f64>> {
    // Unique positive root of x^{d+1} = x + 1.
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let g: Vec<f64> = (1..=d).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
    (1..=count)
        .map(|i| g.iter().map(|&gj| (0.5 + i as f64 * gj).fract()).collect())
        .collect()
}

impl DynamicalSystem {
    pub fn cyclic(modulus: Vec<u64>) -> Result<Self> {
        if modulus.is_empty() || modulus.contains(&0) {
            return Err(Error::domain("cyclic moduli must be positive"));
        }
        let total = modulus.iter().fold(1u128, |a, &m| a.saturating_mul(u128::from(m)));
        if total > CYCLIC_POINT_CAP {
            return Err(Error::size("cyclic space points", total, CYCLIC_POINT_CAP));
        }
        Ok(Self::CyclicShift { modulus })
    }

    pub fn rotation(alpha: Vec<f64>, samples: Vec<Vec<f64>>) -> Result<Self> {
        if alpha.is_empty() || alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain("rotation angles must be finite"));
        }
        if samples.iter().any(|s| s.len() != alpha.len() || s.iter().any(|v| !v.is_finite())) {
            return Err(Error::contract("sample points must be finite and match the torus dimension"));
        }
        Ok(Self::Rotation { alpha, samples })
    }

    /// Rotation observed at `count` Kronecker points.
    pub fn rotation_with_kronecker(alpha: Vec<f64>, count: usize) -> Result<Self> {
        let d = alpha.len();
        Self::rotation(alpha, kronecker_samples(d, count))
    }

    pub fn d0(&self) -> usize {
        match self {
            Self::CyclicShift { modulus } => modulus.len(),
            Self::Rotation { alpha, .. } => alpha.len(),
        }
    }

    pub fn sample_count(&self) -> usize {
        match self {
            Self::CyclicShift { modulus } => modulus.iter().product::<u64>() as usize,
            Self::Rotation { samples, .. } => samples.len(),
        }
    }

    fn check(&self, p: &PolynomialMap) -> Result<()> {
        if p.d0() != self.d0() {
            return Err(Error::contract(format!(
                "polynomial map has d0 = {}, the system has {} transformations",
                p.d0(),
                self.d0()
            )));
        }
        Ok(())
    }
}

/// Points of a cyclic space in row-major order.
pub fn cyclic_point(modulus: &[u64], mut idx: usize) -> Vec<u64> {
    let mut out = vec![0u64; modulus.len()];
    for (slot, &m) in out.iter_mut().zip(modulus).rev() {
        *slot = idx as u64 % m;
        idx /= m as usize;
    }
    out
}

fn cyclic_index(modulus: &[u64], x: &[u64]) -> usize {
    x.iter().zip(modulus).fold(0usize, |acc, (&v, &m)| acc * m as usize + v as usize)
}

/// Functions on `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    Constant { value: Complex64 },
    /// `e(<m, x>)` on the torus and `e(Σ m_j x_j / M_j)` on a cyclic space.
    Character { freq: Vec<i64> },
    /// Indicator of one point of a cyclic space.
    Indicator { point: Vec<u64> },
    /// Values on a cyclic space in row-major order.
    Table { values: Vec<Complex64> },
}

impl Observable {
    fn check(&self, sys: &DynamicalSystem) -> Result<()> {
        let d0 = sys.d0();
        match (self, sys) {
            (Self::Constant { .. }, _) => Ok(()),
            (Self::Character { freq }, _) if freq.len() == d0 => Ok(()),
            (Self::Indicator { point }, DynamicalSystem::CyclicShift { modulus })
                if point.len() == d0 && point.iter().zip(modulus).all(|(p, m)| p < m) =>
            {
                Ok(())
            }
            (Self::Table { values }, DynamicalSystem::CyclicShift { .. }) if values.len() == sys.sample_count() => {
                Ok(())
            }
            _ => Err(Error::contract("observable does not fit the system")),
        }
    }

    fn on_cyclic(&self, modulus: &[u64], x: &[u64]) -> Complex64 {
        match self {
            Self::Constant { value } => *value,
            Self::Character { freq } => {
                let t: f64 = freq
                    .iter()
                    .zip(x.iter().zip(modulus))
                    .map(|(&m, (&v, &big))| {
                        let big = i128::from(big);
                        (i128::from(m) * i128::from(v)).rem_euclid(big) as f64 / big as f64
                    })
                    .sum();
                e(t)
            }
            Self::Indicator { point } => {
                if point.as_slice() == x {
                    Complex64::new(1.0, 0.0)
                } else {
                    <Complex64 as Zero>::zero()
                }
            }
            Self::Table { values } => values[cyclic_index(modulus, x)],
        }
    }

    fn on_torus(&self, x: &[f64]) -> Complex64 {
        match self {
            Self::Constant { value } => *value,
            Self::Character { freq } => {
                let t: f64 = freq.iter().zip(x).map(|(&m, &v)| (m as f64 * v).rem_euclid(1.0)).sum();
                e(t)
            }
            _ => unreachable!("checked against the system"),
        }
    }
}

/// Multiplicities `#{n ∈ [1,N]^k : P(n) ≡ r (mod M)}`.
fn residue_histogram(modulus: &[u64], n: u64, p: &PolynomialMap) -> Result<BTreeMap<Vec<u64>, u64>> {
    cube_size(p.k(), n, DEFAULT_TERM_CAP, "ergodic average terms N^k")?;
    let mut hist = BTreeMap::new();
    for_each_cube_point(p.k(), n, |y| {
        let v = p.eval(y)?;
        let r: Vec<u64> = v
            .iter()
            .zip(modulus)
            .map(|(&c, &m)| c.rem_euclid(i128::from(m)) as u64)
            .collect();
        *hist.entry(r).or_insert(0u64) += 1;
        Ok(())
    })?;
    Ok(hist)
}

/// `frac(c α)` for an exact integer `c`, keeping the low bits of the product.
fn rotation_phase(c: i128, alpha: f64) -> f64 {
    // Split c so each part is exact in f64, then fold products mod 1.
    let hi = (c >> 26) as f64 * 67_108_864.0;
    let lo = (c & ((1 << 26) - 1)) as f64;
    let frac = |x: f64, a: f64| {
        let p = x * a;
        let err = x.mul_add(a, -p);
        (p - p.floor()) + err
    };
    (frac(hi, alpha) + frac(lo, alpha)).rem_euclid(1.0)
}

/// `A_N f` at every sample point of the system.
pub fn ergodic_average(sys: &DynamicalSystem, f: &Observable, n: u64, p: &PolynomialMap) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    sys.check(p)?;
    f.check(sys)?;
    let total = cube_size(p.k(), n, DEFAULT_TERM_CAP, "ergodic average terms N^k")?;
    match sys {
        DynamicalSystem::CyclicShift { modulus } => {
            let hist = residue_histogram(modulus, n, p)?;
            let points = sys.sample_count();
            Ok((0..points)
                .into_par_iter()
                .map(|i| {
                    let x = cyclic_point(modulus, i);
                    let mut acc = ComplexNeumaier::default();
                    let mut z = vec![0u64; x.len()];
                    for (r, &mult) in &hist {
                        for j in 0..x.len() {
                            z[j] = (x[j] + r[j]) % modulus[j];
                        }
                        acc.add(f.on_cyclic(modulus, &z) * mult as f64);
                    }
                    acc.value() / total as f64
                })
                .collect())
        }
        DynamicalSystem::Rotation { alpha, samples } => {
            let mut shifts = Vec::with_capacity(total as usize);
            for_each_cube_point(p.k(), n, |y| {
                let v = p.eval(y)?;
                shifts.push(v.iter().zip(alpha).map(|(&c, &a)| rotation_phase(c, a)).collect::<Vec<f64>>());
                Ok(())
            })?;
            Ok(samples
                .par_iter()
                .map(|x| {
                    let mut acc = ComplexNeumaier::default();
                    let mut z = vec![0.0; x.len()];
                    for s in &shifts {
                        for j in 0..x.len() {
                            z[j] = (x[j] + s[j]).rem_euclid(1.0);
                        }
                        acc.add(f.on_torus(&z));
                    }
                    acc.value() / total as f64
                })
                .collect())
        }
    }
}

/// `A_N f` on a cyclic space with exact rational values in row-major order.
pub fn cyclic_average_rational(
    modulus: &[u64],
    values: &[Rational64],
    n: u64,
    p: &PolynomialMap,
) -> Result<Vec<Rational64>> {
    let sys = DynamicalSystem::cyclic(modulus.to_vec())?;
    sys.check(p)?;
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    if values.len() != sys.sample_count() {
        return Err(Error::contract("value table does not cover the cyclic space"));
    }
    let total = cube_size(p.k(), n, DEFAULT_TERM_CAP, "ergodic average terms N^k")?;
    let hist = residue_histogram(modulus, n, p)?;
    let mut out = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        let x = cyclic_point(modulus, i);
        let mut acc = <Rational64 as LatticeValue>::acc_zero();
        for (r, &mult) in &hist {
            let z: Vec<u64> = x.iter().zip(r).zip(modulus).map(|((&a, &b), &m)| (a + b) % m).collect();
            Rational64::accumulate(&mut acc, &values[cyclic_index(modulus, &z)], mult);
        }
        out.push(Rational64::finish(&acc, total));
    }
    Ok(out)
}

/// Outcome of comparing `A_N f` on the shift system with `M_N f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferenceReport {
    pub n: u64,
    pub points_checked: u64,
    pub max_abs_diff: f64,
    /// Points where the two values are identical.
    pub exact_matches: u64,
}

/// Runs the shift system `T_j x = x - e_j` on the box of `f` and compares
/// `A_N f` with `M_N f` at every point whose whole orbit stays in the box.
pub fn transference_check<T: LatticeValue>(
    f: &LatticeFunction<T>,
    n: u64,
    p: &PolynomialMap,
) -> Result<TransferenceReport> {
    if p.d0() != f.dim() {
        return Err(Error::contract("polynomial map and function live in different dimensions"));
    }
    let total = cube_size(p.k(), n, DEFAULT_TERM_CAP, "ergodic average terms N^k")?;
    let mut orbit: Vec<Vec<i64>> = Vec::with_capacity(total as usize);
    for_each_cube_point(p.k(), n, |y| {
        let v = p.eval(y)?;
        orbit.push(
            v.into_iter()
                .map(|c| i64::try_from(c).map_err(|_| Error::Arithmetic("orbit step exceeds 64 bits".into())))
                .collect::<Result<_>>()?,
        );
        Ok(())
    })?;
    let d = f.dim();
    let (lo, hi) = (f.lo().to_vec(), f.hi().to_vec());
    // x - P(n) stays in [lo, hi] iff x ∈ [lo + max P, hi + min P].
    let mut eval_lo = lo.clone();
    let mut eval_hi = hi.clone();
    for step in &orbit {
        for j in 0..d {
            eval_lo[j] = eval_lo[j].max(lo[j] + step[j]);
            eval_hi[j] = eval_hi[j].min(hi[j] + step[j]);
        }
    }
    if (0..d).any(|j| eval_lo[j] > eval_hi[j]) {
        return Err(Error::contract(format!(
            "box too small: every orbit of length N = {n} leaves [{lo:?}, {hi:?}]"
        )));
    }
    let reference = average_direct(f, n, p)?;
    let region = LatticeFunction::<T>::sparse(eval_lo, eval_hi)?;
    let mut report = TransferenceReport {
        n,
        points_checked: 0,
        max_abs_diff: 0.0,
        exact_matches: 0,
    };
    let mut z = vec![0i64; d];
    for x in region.box_points() {
        let mut acc = T::acc_zero();
        for step in &orbit {
            for j in 0..d {
                z[j] = x[j] - step[j];
            }
            T::accumulate(&mut acc, &f.get(&z), 1);
        }
        let dynamic = T::finish(&acc, total);
        let expected = reference.get(&x);
        let diff = (dynamic.to_complex() - expected.to_complex()).norm();
        report.points_checked += 1;
        report.max_abs_diff = report.max_abs_diff.max(diff);
        if dynamic == expected {
            report.exact_matches += 1;
        }
    }
    Ok(report)
}

/// Per-sample averages along an `N` grid with Cauchy diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageTrace {
    pub n_grid: Vec<u64>,
    pub r: f64,
    /// `values[sample][i] = A_{n_grid[i]} f(x_sample)`.
    pub values: Vec<Vec<Complex64>>,
    /// `sup |A_N - A_N'|` over grid entries from the midpoint on.
    pub tail_oscillation: Vec<f64>,
    /// The same supremum over the first half of the grid.
    pub head_oscillation: Vec<f64>,
    pub variation: Vec<f64>,
    /// Samples whose tail oscillation does not shrink relative to the head.
    pub non_cauchy: Vec<usize>,
}

fn oscillation(v: &[Complex64]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max((v[i] - v[j]).norm());
        }
    }
    best
}

/// The dyadic grid `2^lo, ..., 2^hi`.
pub fn dyadic_grid(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|j| 1u64 << j).collect()
}

pub fn convergence_report(
    sys: &DynamicalSystem,
    f: &Observable,
    p: &PolynomialMap,
    n_grid: &[u64],
    r: f64,
) -> Result<AverageTrace> {
    if n_grid.len() < 4 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("N grid must be strictly increasing with at least 4 entries"));
    }
    if !(r > 2.0) {
        return Err(Error::domain("r must exceed 2"));
    }
    let per_n: Vec<Vec<Complex64>> = n_grid
        .iter()
        .map(|&n| ergodic_average(sys, f, n, p))
        .collect::<Result<_>>()?;
    let samples = sys.sample_count();
    let mid = n_grid.len() / 2;
    let mut trace = AverageTrace {
        n_grid: n_grid.to_vec(),
        r,
        values: Vec::with_capacity(samples),
        tail_oscillation: Vec::with_capacity(samples),
        head_oscillation: Vec::with_capacity(samples),
        variation: Vec::with_capacity(samples),
        non_cauchy: Vec::new(),
    };
    let indices: Vec<i64> = n_grid.iter().map(|&n| n as i64).collect();
    for s in 0..samples {
        let seq: Vec<Complex64> = per_n.iter().map(|v| v[s]).collect();
        let tail = oscillation(&seq[mid..]);
        let head = oscillation(&seq[..=mid]);
        let v = variation_exact(&RealSequence::complex(indices.clone(), seq.clone())?, r)?.value;
        if tail > 0.0 && tail >= head {
            trace.non_cauchy.push(s);
        }
        trace.values.push(seq);
        trace.tail_oscillation.push(tail);
        trace.head_oscillation.push(head);
        trace.variation.push(v);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::multiplier::multiplier_m;
    use crate::polymap::MultiIndexSet;
    use crate::rational::TorusPoint;

    fn square() -> PolynomialMap {
        PolynomialMap::univariate(&[(2, 1)]).unwrap()
    }

    #[test]
    fn constant_averages_to_itself() {
        let one = Observable::Constant {
            value: Complex64::new(1.0, 0.0),
        };
        let sys = DynamicalSystem::cyclic(vec![7]).unwrap();
        for v in ergodic_average(&sys, &one, 9, &square()).unwrap() {
            assert_eq!(v, Complex64::new(1.0, 0.0));
        }
        let rot = DynamicalSystem::rotation_with_kronecker(vec![2f64.sqrt() - 1.0], 5).unwrap();
        for v in ergodic_average(&rot, &one, 33, &square()).unwrap() {
            assert!((v - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn cyclic_indicator_counts_square_roots() {
        let sys = DynamicalSystem::cyclic(vec![5]).unwrap();
        let f = Observable::Indicator { point: vec![0] };
        let got = ergodic_average(&sys, &f, 5, &square()).unwrap();
        for (x, v) in got.iter().enumerate() {
            let count = (1..=5u64).filter(|n| (n * n + x as u64) % 5 == 0).count();
            assert!((v.re - count as f64 / 5.0).abs() < 1e-15);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn rotation_factorizes_through_weyl_sum() {
        let alpha = 2f64.sqrt() - 1.0;
        let sys = DynamicalSystem::rotation_with_kronecker(vec![alpha], 8).unwrap();
        let f = Observable::Character { freq: vec![1] };
        let n = 300;
        let got = ergodic_average(&sys, &f, n, &square()).unwrap();
        let g = MultiIndexSet::build(1, 2).unwrap();
        let xi = TorusPoint::from_f64(&[0.0, alpha]).unwrap();
        let weyl = multiplier_m(&xi, n, &g).unwrap().value;
        let DynamicalSystem::Rotation { samples, .. } = &sys else { unreachable!() };
        for (v, x) in got.iter().zip(samples) {
            assert!((v - e(x[0]) * weyl).norm() < 1e-11);
            assert!((v.norm() - weyl.norm()).abs() < 1e-11);
        }
    }

    #[test]
    fn rational_mode_preserves_the_mean() {
        let modulus = [6u64, 4];
        let values: Vec<Rational64> = (0..24).map(|i| Rational64::new((i * 7 % 11) as i64, 3)).collect();
        let p = PolynomialMap::new(1, vec![vec![(vec![2], 1)], vec![(vec![1], 3), (vec![3], 1)]]).unwrap();
        let avg = cyclic_average_rational(&modulus, &values, 10, &p).unwrap();
        let mean = |v: &[Rational64]| v.iter().fold(<Rational64 as Zero>::zero(), |a, b| a + b) / 24;
        assert_eq!(mean(&avg), mean(&values));
    }

    #[test]
    fn balanced_cyclic_average_stabilizes() {
        let sys = DynamicalSystem::cyclic(vec![6]).unwrap();
        let f = Observable::Table {
            values: (0..6).map(|i| Complex64::new(i as f64, -(i as f64))).collect(),
        };
        let trace = convergence_report(&sys, &f, &square(), &[6, 12, 24, 48, 96], 2.5).unwrap();
        assert!(trace.tail_oscillation.iter().all(|&o| o == 0.0));
        assert!(trace.variation.iter().all(|&v| v == 0.0));
        assert!(trace.non_cauchy.is_empty());
    }

    #[test]
    fn transference_on_point_mass_and_trivial_n() {
        let p = square();
        let mut f = LatticeFunction::<f64>::zeros(vec![-40], vec![40]).unwrap();
        f.set(&[0], 1.0).unwrap();
        let r = transference_check(&f, 2, &p).unwrap();
        assert_eq!(r.exact_matches, r.points_checked);
        assert!(r.points_checked > 0);
        let r1 = transference_check(&f, 1, &p).unwrap();
        assert_eq!(r1.max_abs_diff, 0.0);
        let tiny = LatticeFunction::<f64>::zeros(vec![0], vec![3]).unwrap();
        assert!(matches!(transference_check(&tiny, 4, &p), Err(Error::Contract(_))));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let sys = DynamicalSystem::cyclic(vec![3, 3]).unwrap();
        let f = Observable::Constant { value: <Complex64 as Zero>::zero() };
        assert!(matches!(ergodic_average(&sys, &f, 2, &square()), Err(Error::Contract(_))));
    }
}
