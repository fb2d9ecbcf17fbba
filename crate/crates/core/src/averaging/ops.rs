use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::averaging::fourier::fft_nd;
use crate::averaging::kernel::{KernelSource, SparseKernel};
use crate::averaging::lattice::{box_cells, LatticeFunction, LatticeValue, DENSE_CELL_CAP};
use crate::error::{Error, Result};

/// Cap on `nonzeros(f) * atoms(K_N)` for the scatter loop.
pub const SCATTER_CAP: u128 = 2_000_000_000;

/// Cap on the padded transform grid.
pub const TRANSFORM_CELL_CAP: u128 = 1 << 26;

fn shifted_box(f_lo: &[i64], f_hi: &[i64], kernel: &SparseKernel) -> Result<(Vec<i64>, Vec<i64>)> {
    let (kmin, kmax) = kernel.reach();
    let add = |a: i64, b: i64| {
        a.checked_add(b)
            .ok_or_else(|| Error::Arithmetic("output box corner exceeds 64 bits".into()))
    };
    let lo = f_lo
        .iter()
        .zip(&kmin)
        .map(|(&a, &b)| add(a, b))
        .collect::<Result<Vec<_>>>()?;
    let hi = f_hi
        .iter()
        .zip(&kmax)
        .map(|(&a, &b)| add(a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok((lo, hi))
}

fn check_dims<T>(f: &LatticeFunction<T>, kernel: &SparseKernel) -> Result<()>
where
    T: LatticeValue,
{
    if kernel.dim() != f.dim() {
        return Err(Error::contract(format!(
            "kernel lives in Z^{} but f lives in Z^{}",
            kernel.dim(),
            f.dim()
        )));
    }
    Ok(())
}

/// `M_N f(x) = N^{-k} Σ_{y ∈ [1,N]^k} f(x - P(y))` by direct summation.
///
/// The output box is the input box translated by the kernel's reach. Boxes
/// above [`DENSE_CELL_CAP`] cells are produced in sparse storage.
pub fn average_direct<T, S>(f: &LatticeFunction<T>, n: u64, src: &S) -> Result<LatticeFunction<T>>
where
    T: LatticeValue,
    S: KernelSource + ?Sized,
{
    let kernel = src.kernel(n)?;
    average_with_kernel(f, &kernel)
}

pub fn average_with_kernel<T: LatticeValue>(
    f: &LatticeFunction<T>,
    kernel: &SparseKernel,
) -> Result<LatticeFunction<T>> {
    check_dims(f, kernel)?;
    let (lo, hi) = shifted_box(f.lo(), f.hi(), kernel)?;
    let entries = f.nonzero();
    let work = entries.len() as u128 * kernel.atoms.len() as u128;
    if work > SCATTER_CAP {
        return Err(Error::size("averaging work nonzeros*atoms", work, SCATTER_CAP));
    }
    let cells = box_cells(&lo, &hi);
    let total = kernel.total;

    if cells <= DENSE_CELL_CAP {
        let mut out = LatticeFunction::<T>::zeros(lo.clone(), hi.clone())?;
        let mut acc = vec![T::acc_zero(); cells as usize];
        let mut z = vec![0i64; lo.len()];
        for (x, v) in &entries {
            for (p, mult) in &kernel.atoms {
                for j in 0..z.len() {
                    z[j] = x[j] + p[j];
                }
                T::accumulate(&mut acc[out.offset(&z)], v, *mult);
            }
        }
        for (i, a) in acc.iter().enumerate() {
            let v = T::finish(a, total);
            if !v.is_zero() {
                let p = out.point_at(i);
                out.set(&p, v)?;
            }
        }
        Ok(out)
    } else {
        let mut acc: BTreeMap<Vec<i64>, T::Acc> = BTreeMap::new();
        for (x, v) in &entries {
            for (p, mult) in &kernel.atoms {
                let z: Vec<i64> = x.iter().zip(p).map(|(a, b)| a + b).collect();
                T::accumulate(acc.entry(z).or_insert_with(T::acc_zero), v, *mult);
            }
        }
        let mut out = LatticeFunction::<T>::sparse(lo, hi)?;
        for (z, a) in acc {
            out.set(&z, T::finish(&a, total))?;
        }
        Ok(out)
    }
}

/// `M_N g(x)` at a single point for a function given by a closure.
pub fn average_at<T: LatticeValue>(g: impl Fn(&[i64]) -> T, x: &[i64], kernel: &SparseKernel) -> T {
    let mut acc = T::acc_zero();
    let mut z = vec![0i64; x.len()];
    for (p, mult) in &kernel.atoms {
        for j in 0..x.len() {
            z[j] = x[j] - p[j];
        }
        T::accumulate(&mut acc, &g(&z), *mult);
    }
    T::finish(&acc, kernel.total)
}

/// `M_N f` through a zero-padded cyclic convolution.
///
/// `padding` fixes the transform length per axis; it must cover the input
/// extent plus the kernel reach, otherwise values would wrap around.
/// Without it, the next power of two is used.
pub fn average_transform<T, S>(
    f: &LatticeFunction<T>,
    n: u64,
    src: &S,
    padding: Option<&[usize]>,
) -> Result<LatticeFunction<Complex64>>
where
    T: LatticeValue,
    S: KernelSource + ?Sized,
{
    let kernel = src.kernel(n)?;
    check_dims(f, &kernel)?;
    let (lo, hi) = shifted_box(f.lo(), f.hi(), &kernel)?;
    let (kmin, _) = kernel.reach();
    let needed: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| (h - l + 1) as usize)
        .collect();
    let shape: Vec<usize> = match padding {
        Some(p) => {
            if p.len() != needed.len() {
                return Err(Error::contract("padding has the wrong number of axes"));
            }
            if let Some(axis) = (0..p.len()).find(|&i| p[i] < needed[i]) {
                return Err(Error::contract(format!(
                    "padding {} on axis {axis} is below the required {} and would wrap around",
                    p[axis], needed[axis]
                )));
            }
            p.to_vec()
        }
        None => needed.iter().map(|n| n.next_power_of_two()).collect(),
    };
    let cells = shape.iter().fold(1u128, |a, &s| a.saturating_mul(s as u128));
    if cells > TRANSFORM_CELL_CAP {
        return Err(Error::size("transform grid", cells, TRANSFORM_CELL_CAP));
    }
    let cells = cells as usize;
    let ravel = |x: &[i64], origin: &[i64]| {
        x.iter()
            .zip(origin)
            .zip(&shape)
            .fold(0usize, |acc, ((&v, &o), &m)| acc * m + (v - o) as usize)
    };

    let mut a = vec![Complex64::new(0.0, 0.0); cells];
    for (x, v) in f.nonzero() {
        a[ravel(&x, f.lo())] = v.to_complex();
    }
    let mut b = vec![Complex64::new(0.0, 0.0); cells];
    for (p, m) in &kernel.atoms {
        b[ravel(p, &kmin)] = Complex64::new(*m as f64 / kernel.total as f64, 0.0);
    }
    fft_nd(&mut a, &shape, FftDirection::Forward);
    fft_nd(&mut b, &shape, FftDirection::Forward);
    a.par_iter_mut().zip(b.par_iter()).for_each(|(x, y)| *x *= y);
    fft_nd(&mut a, &shape, FftDirection::Inverse);
    let scale = cells as f64;

    let mut out = LatticeFunction::<Complex64>::zeros(lo.clone(), hi.clone())?;
    let out_cells = out.cells() as usize;
    for i in 0..out_cells {
        let z = out.point_at(i);
        let v = a[ravel(&z, &lo)] / scale;
        out.set(&z, v)?;
    }
    Ok(out)
}

/// `sup_{N ∈ ns} M_N f` pointwise, for nonnegative `f`.
pub fn maximal_function<S>(f: &LatticeFunction<f64>, ns: &[u64], src: &S) -> Result<LatticeFunction<f64>>
where
    S: KernelSource + Sync + ?Sized,
{
    if ns.is_empty() {
        return Err(Error::domain("the set of scales must be nonempty"));
    }
    if let Some((x, v)) = f.nonzero().into_iter().find(|(_, v)| *v < 0.0 || v.is_nan()) {
        return Err(Error::domain(format!(
            "maximal function needs f >= 0, found {v} at {x:?}"
        )));
    }
    let averages = ns
        .par_iter()
        .map(|&n| average_direct(f, n, src))
        .collect::<Result<Vec<_>>>()?;
    let d = f.dim();
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for a in &averages {
        for j in 0..d {
            lo[j] = lo[j].min(a.lo()[j]);
            hi[j] = hi[j].max(a.hi()[j]);
        }
    }
    let mut out = LatticeFunction::<f64>::zeros(lo, hi)?;
    for a in &averages {
        for (x, v) in a.nonzero() {
            if v > out.get(&x) {
                out.set(&x, v)?;
            }
        }
    }
    Ok(out)
}
