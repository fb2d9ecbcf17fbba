//! Transforms on cyclic grids `Z_M1 x ... x Z_Md`.
//!
//! The transform follows the sign used throughout the crate:
//! `f^(ξ) = Σ_x f(x) e(<ξ, x>)` with `e(t) = exp(2πit)`, so that averaging by
//! `K_N` multiplies the transform by `m_N`.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::averaging::kernel::KernelSource;
use crate::error::{Error, Result};
use crate::rational::TorusPoint;

/// In-place unnormalized multidimensional FFT, row-major with the last axis fastest.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len(), "shape does not match buffer");
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = 1usize;
    for axis in (0..shape.len()).rev() {
        let len = shape[axis];
        if len > 1 {
            let fft = planner.plan_fft(len, direction);
            let mut line = vec![Complex64::new(0.0, 0.0); len];
            let outer = total / (len * stride);
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * len * stride + s;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    fft.process(&mut line);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
        }
        stride *= len;
    }
}

/// A function on a cyclic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicFunction {
    pub shape: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl CyclicFunction {
    pub fn new(shape: Vec<usize>, values: Vec<Complex64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::contract("cyclic grid needs positive side lengths"));
        }
        if shape.iter().product::<usize>() != values.len() {
            return Err(Error::contract("value count does not match grid shape"));
        }
        Ok(Self { shape, values })
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> Complex64) -> Result<Self> {
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        for i in 0..total {
            values.push(f(&unravel(&shape, i)));
        }
        Self::new(shape, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: &[usize]) -> Complex64 {
        self.values[ravel(&self.shape, x)]
    }

    /// `f^(j/M)` for every frequency index `j`.
    pub fn transform(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        // rustfft's inverse direction carries the + sign.
        fft_nd(&mut data, &self.shape, FftDirection::Inverse);
        data
    }

    /// Inverts [`CyclicFunction::transform`].
    pub fn from_spectrum(shape: Vec<usize>, mut spectrum: Vec<Complex64>) -> Result<Self> {
        if shape.iter().product::<usize>() != spectrum.len() {
            return Err(Error::contract("spectrum size does not match grid shape"));
        }
        fft_nd(&mut spectrum, &shape, FftDirection::Forward);
        let scale = spectrum.len() as f64;
        spectrum.iter_mut().for_each(|v| *v /= scale);
        Self::new(shape, spectrum)
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn ravel(shape: &[usize], x: &[usize]) -> usize {
    x.iter().zip(shape).fold(0, |acc, (&v, &m)| acc * m + v)
}

pub(crate) fn unravel(shape: &[usize], mut idx: usize) -> Vec<usize> {
    let mut x = vec![0usize; shape.len()];
    for axis in (0..shape.len()).rev() {
        x[axis] = idx % shape[axis];
        idx /= shape[axis];
    }
    x
}

/// The torus point `(j_1/M_1, ..., j_d/M_d)`.
pub fn frequency(shape: &[usize], j: &[usize]) -> TorusPoint {
    TorusPoint::new(
        j.iter()
            .zip(shape)
            .map(|(&a, &m)| num_rational::Ratio::new(a as i128, m as i128))
            .collect(),
    )
    .expect("grid denominators are small")
}

/// `Π f`: keep the frequencies where `mask` holds.
pub fn fourier_project(f: &CyclicFunction, mask: impl Fn(&TorusPoint) -> bool) -> CyclicFunction {
    let mut spec = f.transform();
    for (i, v) in spec.iter_mut().enumerate() {
        if !mask(&frequency(&f.shape, &unravel(&f.shape, i))) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    CyclicFunction::from_spectrum(f.shape.clone(), spec).expect("shape preserved")
}

/// `M_N f` on the cyclic grid: `N^{-k} Σ_y f(x - P(y) mod M)`.
pub fn average_cyclic<S: KernelSource + ?Sized>(
    f: &CyclicFunction,
    n: u64,
    src: &S,
) -> Result<CyclicFunction> {
    let kernel = src.kernel(n)?;
    if kernel.dim() != f.shape.len() {
        return Err(Error::contract(format!(
            "kernel lives in dimension {}, grid in {}",
            kernel.dim(),
            f.shape.len()
        )));
    }
    let shifts: Vec<(Vec<usize>, f64)> = kernel
        .atoms
        .iter()
        .map(|(p, m)| {
            let s = p
                .iter()
                .zip(&f.shape)
                .map(|(&c, &len)| c.rem_euclid(len as i64) as usize)
                .collect();
            (s, *m as f64 / kernel.total as f64)
        })
        .collect();
    CyclicFunction::from_fn(f.shape.clone(), |x| {
        let mut acc = crate::averaging::lattice::ComplexNeumaier::default();
        for (s, w) in &shifts {
            let src_pt: Vec<usize> = x
                .iter()
                .zip(s)
                .zip(&f.shape)
                .map(|((&xi, &si), &len)| (xi + len - si) % len)
                .collect();
            acc.add(f.get(&src_pt) * *w);
        }
        acc.value()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::multiplier::multiplier_m;
    use crate::polymap::MultiIndexSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(shape: Vec<usize>, seed: u64) -> CyclicFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CyclicFunction::from_fn(shape, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .unwrap()
    }

    #[test]
    fn transform_matches_definition() {
        let f = random_grid(vec![3, 4], 1);
        let spec = f.transform();
        for i in 0..12 {
            let j = unravel(&f.shape, i);
            let mut direct = Complex64::new(0.0, 0.0);
            for xi in 0..12 {
                let x = unravel(&f.shape, xi);
                let t = j[0] as f64 * x[0] as f64 / 3.0 + j[1] as f64 * x[1] as f64 / 4.0;
                direct += f.values[xi] * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t);
            }
            assert!((spec[i] - direct).norm() < 1e-12);
        }
        let back = CyclicFunction::from_spectrum(f.shape.clone(), spec).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn projections() {
        let f = random_grid(vec![8, 8], 2);
        assert!(fourier_project(&f, |_| true).max_abs_diff(&f) < 1e-10);
        assert!(fourier_project(&f, |_| false).norm_l2() < 1e-14);

        let major = |x: &TorusPoint| x.to_f64().iter().all(|&c| c.min(1.0 - c) < 0.2);
        let a = fourier_project(&f, major);
        let b = fourier_project(&f, |x| !major(x));
        let sum = CyclicFunction::new(
            f.shape.clone(),
            a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect(),
        )
        .unwrap();
        assert!(sum.max_abs_diff(&f) < 1e-10);
        assert!(fourier_project(&a, major).max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn averaging_is_multiplication_by_m() {
        let g = MultiIndexSet::build(1, 2).unwrap();
        let f = random_grid(vec![16, 32], 3);
        for n in [1u64, 3, 7] {
            let avg = average_cyclic(&f, n, &g).unwrap();
            let lhs = avg.transform();
            let rhs = f.transform();
            for i in 0..f.len() {
                let xi = frequency(&f.shape, &unravel(&f.shape, i));
                let m = multiplier_m(&xi, n, &g).unwrap().value;
                assert!((lhs[i] - m * rhs[i]).norm() < 1e-9);
            }
        }
    }
}
