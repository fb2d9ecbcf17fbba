use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::polymap::{LiftedSystem, MultiIndexSet, PolynomialMap};

/// Default cap on `N^k`, the number of summands in one average.
pub const DEFAULT_KERNEL_CAP: u128 = 10_000_000;

/// The averaging kernel `K_N = N^{-k} Σ_{y ∈ [1,N]^k} δ_{P(y)}` with coincident atoms merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseKernel {
    pub n: u64,
    pub k: usize,
    /// `(position, multiplicity)`, sorted by position.
    pub atoms: Vec<(Vec<i64>, u64)>,
    /// `N^k`.
    pub total: u64,
}

impl SparseKernel {
    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, |(p, _)| p.len())
    }

    pub fn weight(&self, i: usize) -> Ratio<u64> {
        Ratio::new(self.atoms[i].1, self.total)
    }

    /// Sum of all weights, exactly.
    pub fn mass(&self) -> Ratio<u64> {
        Ratio::new(self.atoms.iter().map(|(_, m)| m).sum(), self.total)
    }

    /// Componentwise minimum and maximum atom position.
    pub fn reach(&self) -> (Vec<i64>, Vec<i64>) {
        let d = self.dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for (p, _) in &self.atoms {
            for j in 0..d {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        (lo, hi)
    }
}

/// Anything that can produce the kernel `K_N` of a polynomial mapping.
pub trait KernelSource {
    fn k(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn image(&self, y: &[i64]) -> Result<Vec<i128>>;

    fn kernel(&self, n: u64) -> Result<SparseKernel> {
        kernel_from(self, n, DEFAULT_KERNEL_CAP)
    }
}

impl KernelSource for MultiIndexSet {
    fn k(&self) -> usize {
        MultiIndexSet::k(self)
    }
    fn target_dim(&self) -> usize {
        self.d()
    }
    fn image(&self, y: &[i64]) -> Result<Vec<i128>> {
        self.eval_canonical(y)
    }
}

impl KernelSource for LiftedSystem {
    fn k(&self) -> usize {
        self.gamma.k()
    }
    fn target_dim(&self) -> usize {
        self.d0()
    }
    fn image(&self, y: &[i64]) -> Result<Vec<i128>> {
        self.eval(y)
    }
}

impl KernelSource for PolynomialMap {
    fn k(&self) -> usize {
        PolynomialMap::k(self)
    }
    fn target_dim(&self) -> usize {
        self.d0()
    }
    fn image(&self, y: &[i64]) -> Result<Vec<i128>> {
        self.eval(y)
    }
}

/// Iterates `y ∈ [1, n]^k` in lexicographic order.
pub(crate) fn for_each_cube_point(k: usize, n: u64, mut f: impl FnMut(&[i64]) -> Result<()>) -> Result<()> {
    let mut y = vec![1i64; k];
    loop {
        f(&y)?;
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            if (y[pos] as u64) < n {
                y[pos] += 1;
                break;
            }
            y[pos] = 1;
        }
    }
}

pub(crate) fn cube_size(k: usize, n: u64, cap: u128, what: &'static str) -> Result<u64> {
    let mut total: u128 = 1;
    for _ in 0..k {
        total = total.saturating_mul(u128::from(n));
    }
    if total > cap {
        return Err(Error::size(what, total, cap));
    }
    Ok(total as u64)
}

fn kernel_from<S: KernelSource + ?Sized>(src: &S, n: u64, cap: u128) -> Result<SparseKernel> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let k = src.k();
    let total = cube_size(k, n, cap, "kernel atoms N^k")?;
    let mut merged: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    for_each_cube_point(k, n, |y| {
        let p = src
            .image(y)?
            .into_iter()
            .map(|v| {
                i64::try_from(v).map_err(|_| {
                    Error::Arithmetic(format!("kernel atom coordinate {v} exceeds 64 bits"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        *merged.entry(p).or_insert(0) += 1;
        Ok(())
    })?;
    Ok(SparseKernel {
        n,
        k,
        atoms: merged.into_iter().collect(),
        total,
    })
}

/// `K_N` for the canonical mapping of `gamma`.
pub fn build_kernel(n: u64, gamma: &MultiIndexSet) -> Result<SparseKernel> {
    gamma.kernel(n)
}

pub fn build_kernel_with_cap<S: KernelSource + ?Sized>(
    src: &S,
    n: u64,
    cap: u128,
) -> Result<SparseKernel> {
    kernel_from(src, n, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_kernels() {
        let g = MultiIndexSet::build(1, 2).unwrap();
        let k1 = build_kernel(1, &g).unwrap();
        assert_eq!(k1.atoms, vec![(vec![1, 1], 1)]);
        assert_eq!(k1.mass(), Ratio::from_integer(1));

        let k2 = build_kernel(2, &g).unwrap();
        assert_eq!(k2.atoms, vec![(vec![1, 1], 1), (vec![2, 4], 1)]);
        assert_eq!(k2.weight(1), Ratio::new(1, 2));
    }

    #[test]
    fn merged_atoms_keep_mass() {
        // P(y1, y2) = y1 + y2 has many coincident values.
        let p = PolynomialMap::new(2, vec![vec![(vec![1, 0], 1), (vec![0, 1], 1)]]).unwrap();
        let k = p.kernel(5).unwrap();
        assert_eq!(k.atoms.len(), 9);
        assert_eq!(k.mass(), Ratio::from_integer(1));
        assert_eq!(k.atoms[4], (vec![6], 5));
        for n in 1..12 {
            let g = MultiIndexSet::build(2, 1).unwrap();
            assert_eq!(build_kernel(n, &g).unwrap().mass(), Ratio::from_integer(1));
        }
    }

    #[test]
    fn caps_and_domain() {
        let g = MultiIndexSet::build(2, 1).unwrap();
        assert!(matches!(
            build_kernel_with_cap(&g, 100, 1000),
            Err(Error::Size { requested: 10_000, .. })
        ));
        assert!(matches!(build_kernel(0, &g), Err(Error::Domain(_))));
    }
}
