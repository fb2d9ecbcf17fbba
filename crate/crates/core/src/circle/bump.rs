//! The cutoff `η` and its anisotropic dilates.
//!
//! `η(x) = S((1/2 - ‖x‖_∞) / (1/4))` where `S(w) = g(w) / (g(w) + g(1-w))`
//! and `g(w) = exp(-1/w)`, so `η = 1` on `‖x‖_∞ <= 1/4` and `η = 0` on
//! `‖x‖_∞ >= 1/2`.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::averaging::fourier::{unravel, CyclicFunction};
use crate::averaging::multiplier::e;
use crate::error::{Error, Result};
use crate::polymap::DegreeMatrix;

pub const INNER_RADIUS: f64 = 0.25;
pub const OUTER_RADIUS: f64 = 0.5;

fn g(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        (-1.0 / w).exp()
    }
}

/// The transition profile on `[0, 1]`: 0 at 0, 1 at 1, smooth and increasing.
pub fn profile(w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    let (a, b) = (g(w), g(1.0 - w));
    a / (a + b)
}

/// `η` as a function of the max norm `‖x‖_∞`.
pub fn bump_of_norm(norm: f64) -> f64 {
    if norm <= INNER_RADIUS {
        1.0
    } else if norm >= OUTER_RADIUS {
        0.0
    } else {
        profile((OUTER_RADIUS - norm) / (OUTER_RADIUS - INNER_RADIUS))
    }
}

/// `η(x)`.
pub fn bump(x: &[f64]) -> f64 {
    bump_of_norm(x.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// `η(B^A δ)` for an exact rational offset `δ`, a dilation base `B` and
/// degree weights `A`. The support thresholds are decided exactly.
pub fn scaled_bump(delta: &[Ratio<i128>], base: &BigUint, degrees: &DegreeMatrix) -> f64 {
    let base_f = base.to_f64().unwrap_or(f64::INFINITY);
    // Cheap float pass with a generous margin; exact arithmetic only near thresholds.
    let mut approx_norm = 0.0f64;
    for (d, &w) in delta.iter().zip(&degrees.weights) {
        let v = crate::rational::ratio_to_f64(&d.abs()) * base_f.powi(w as i32);
        approx_norm = approx_norm.max(v);
    }
    if approx_norm.is_finite() {
        if approx_norm > OUTER_RADIUS * (1.0 + 1e-9) {
            return 0.0;
        }
        if approx_norm < INNER_RADIUS * (1.0 - 1e-9) {
            return 1.0;
        }
        if approx_norm > INNER_RADIUS * (1.0 + 1e-9) && approx_norm < OUTER_RADIUS * (1.0 - 1e-9) {
            return bump_of_norm(approx_norm);
        }
    }
    let base_i = BigInt::from(base.clone());
    let mut norm = BigRational::zero();
    for (d, &w) in delta.iter().zip(&degrees.weights) {
        let num = BigInt::from(*d.numer()).abs() * num_traits::pow(base_i.clone(), w as usize);
        let v = BigRational::new(num, BigInt::from(*d.denom()));
        if v > norm {
            norm = v;
        }
    }
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    if norm <= quarter {
        1.0
    } else if norm >= half {
        0.0
    } else {
        bump_of_norm(norm.to_f64().unwrap_or(OUTER_RADIUS))
    }
}

/// Per-axis grid sizes `M_γ = base * t^{|γ|}` (rounded up to even) for sampling `η(t^A ·)`.
pub fn kernel_grid(t: f64, degrees: &DegreeMatrix, base: usize) -> Vec<usize> {
    degrees
        .weights
        .iter()
        .map(|&w| {
            let m = (base as f64 * t.max(1.0).powi(w as i32)).ceil() as usize;
            m + (m & 1)
        })
        .collect()
}

/// Samples `mult(ξ) η(t^A ξ)` at the centered frequencies of the grid and
/// returns the inverse transform `x -> ∫ e(-<ξ, x>) ... dξ` on `Z_M^d`.
fn kernel_with(
    t: f64,
    degrees: &DegreeMatrix,
    shape: &[usize],
    mult: impl Fn(&[f64]) -> Complex64,
) -> Result<CyclicFunction> {
    if !(t > 0.0) {
        return Err(Error::domain("dilation t must be positive"));
    }
    if shape.len() != degrees.weights.len() {
        return Err(Error::contract("grid shape does not match the degree matrix"));
    }
    let total: usize = shape.iter().product();
    if total > 1 << 26 {
        return Err(Error::size("bump kernel grid", total as u128, 1 << 26));
    }
    let mut spectrum = Vec::with_capacity(total);
    let mut xi = vec![0.0; shape.len()];
    let mut scaled = vec![0.0; shape.len()];
    for i in 0..total {
        let j = unravel(shape, i);
        for a in 0..shape.len() {
            let m = shape[a] as i64;
            let c = if (j[a] as i64) * 2 >= m { j[a] as i64 - m } else { j[a] as i64 };
            xi[a] = c as f64 / m as f64;
            scaled[a] = xi[a] * t.powi(degrees.weights[a] as i32);
        }
        let eta = bump(&scaled);
        spectrum.push(if eta == 0.0 { Complex64::zero() } else { mult(&xi) * eta });
    }
    CyclicFunction::from_spectrum(shape.to_vec(), spectrum)
}

/// `‖x -> ∫_{T^d} e(-<ξ,x>) η(t^A ξ) dξ‖_{ℓ^1}`, discretized on the given grid.
pub fn bump_kernel_l1(t: f64, degrees: &DegreeMatrix, shape: &[usize]) -> Result<f64> {
    let k = kernel_with(t, degrees, shape, |_| Complex64::new(1.0, 0.0))?;
    Ok(k.values.iter().map(|v| v.norm()).sum())
}

/// `ℓ^1` norm of the kernel of `(1 - e(<ξ,u>)) η(t^A ξ)`.
pub fn bump_difference_l1(t: f64, u: &[f64], degrees: &DegreeMatrix, shape: &[usize]) -> Result<f64> {
    if u.len() != degrees.weights.len() {
        return Err(Error::contract("shift has the wrong dimension"));
    }
    let k = kernel_with(t, degrees, shape, |xi| {
        let phase: f64 = xi.iter().zip(u).map(|(a, b)| a * b).sum();
        Complex64::new(1.0, 0.0) - e(phase)
    })?;
    Ok(k.values.iter().map(|v| v.norm()).sum())
}

/// `‖t^{-A} u‖_∞`.
pub fn dilated_shift_norm(t: f64, u: &[f64], degrees: &DegreeMatrix) -> f64 {
    u.iter()
        .zip(&degrees.weights)
        .map(|(v, &w)| (v / t.powi(w as i32)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymap::MultiIndexSet;
    use proptest::prelude::*;

    #[test]
    fn bump_examples() {
        assert_eq!(bump(&[0.0, 0.0]), 1.0);
        assert_eq!(bump(&[0.6, 0.0]), 0.0);
        assert_eq!(bump(&[0.25, -0.25]), 1.0);
        assert_eq!(bump(&[0.1, 0.5]), 0.0);
        let mid = bump(&[0.375, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(bump(&[0.1, -0.375]), mid);
        assert_eq!(bump(&[-0.375, 0.375]), mid);
        assert!((mid - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scaled_bump_thresholds_are_exact() {
        let a = MultiIndexSet::build(1, 2).unwrap().degree_matrix();
        let base = BigUint::from(10u32);
        // 10 * (1/40) = 1/4 exactly, 100 * (1/400) = 1/4.
        let inner = [Ratio::new(1, 40), Ratio::new(-1, 400)];
        assert_eq!(scaled_bump(&inner, &base, &a), 1.0);
        let outer = [Ratio::new(1, 20), Ratio::zero()];
        assert_eq!(scaled_bump(&outer, &base, &a), 0.0);
        let just_in = [Ratio::new(1, 20) - Ratio::new(1, 1_000_000_000_000_000), Ratio::zero()];
        let v = scaled_bump(&just_in, &base, &a);
        // The smooth tail underflows this close to the outer radius.
        assert!((0.0..1e-100).contains(&v));
        let mid = [Ratio::new(3, 80), Ratio::zero()];
        assert!((scaled_bump(&mid, &base, &a) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn huge_bases_stay_exact() {
        let a = MultiIndexSet::build(1, 2).unwrap().degree_matrix();
        let base = BigUint::from(24u32).pow(6);
        let tiny = [Ratio::new(1, 4 * 191_102_976), Ratio::zero()];
        assert_eq!(scaled_bump(&tiny, &base, &a), 1.0);
        let q = 191_102_976i128 * 191_102_976;
        let second = [Ratio::zero(), Ratio::new(1, 2 * q)];
        assert_eq!(scaled_bump(&second, &base, &a), 0.0);
    }

    #[test]
    fn kernel_mass_is_eta_at_zero() {
        // Σ_x k(x) = η(0) = 1 on any grid.
        let a = MultiIndexSet::build(1, 2).unwrap().degree_matrix();
        let shape = kernel_grid(2.0, &a, 32);
        let k = kernel_with(2.0, &a, &shape, |_| Complex64::new(1.0, 0.0)).unwrap();
        let total: Complex64 = k.values.iter().sum();
        assert!((total - 1.0).norm() < 1e-12);
        assert!(bump_kernel_l1(2.0, &a, &shape).unwrap() >= 1.0 - 1e-12);
        assert!(bump_difference_l1(2.0, &[0.0, 0.0], &a, &shape).unwrap() < 1e-12);
    }

    proptest! {
        #[test]
        fn bump_is_bounded_and_radial(x in prop::collection::vec(-1.0f64..1.0, 1..4)) {
            let v = bump(&x);
            prop_assert!((0.0..=1.0).contains(&v));
            let n = x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            prop_assert_eq!(v, bump(&[n]));
        }

        #[test]
        fn profile_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(profile(lo) <= profile(hi));
            prop_assert!((profile(a) + profile(1.0 - a) - 1.0).abs() < 1e-12);
        }
    }
}
