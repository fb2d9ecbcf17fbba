//! r-variational seminorms and the interval decompositions used to bound them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest length accepted by [`variation_bruteforce`].
pub const BRUTEFORCE_MAX_LEN: usize = 14;

/// A finite sequence `(a_j : j ∈ A)` over a strictly increasing index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSequence {
    indices: Vec<i64>,
    values: Vec<Complex64>,
}

impl RealSequence {
    pub fn new(indices: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        Self::complex(indices, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    /// Complex sequences; differences are measured in modulus.
    pub fn complex(indices: Vec<i64>, values: Vec<Complex64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::contract("index and value lists differ in length"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("indices must be strictly increasing"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::domain("sequence values must be finite"));
        }
        Ok(Self { indices, values })
    }

    /// Values indexed by `0, 1, ..., n-1`.
    pub fn from_values(values: &[f64]) -> Self {
        Self::new((0..values.len() as i64).collect(), values.to_vec()).expect("valid indices")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Entries whose index satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(i64) -> bool) -> Self {
        let (indices, values) = self
            .indices
            .iter()
            .zip(&self.values)
            .filter(|(i, _)| keep(**i))
            .map(|(i, v)| (*i, *v))
            .unzip();
        Self { indices, values }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn value_at(&self, index: i64) -> Option<Complex64> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|p| self.values[p])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariationKind {
    /// `V_r`.
    Plain,
    /// `sup |a_j| + V_r`.
    WithSup,
    /// `V_r` over dyadic indices.
    Long,
    /// `(Σ_n V_r(A ∩ [2^n, 2^{n+1}))^r)^{1/r}`.
    Short,
}

/// A variation value with the subsequence(s) realizing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationResult {
    pub value: f64,
    pub r: f64,
    pub kind: VariationKind,
    /// One increasing index list per block (a single block except for `Short`).
    pub witness: Vec<Vec<i64>>,
    /// The `sup |a_j|` part of the value for `WithSup`, zero otherwise.
    pub sup_term: f64,
}

impl VariationResult {
    /// `Σ |a_{k_j} - a_{k_{j-1}}|^r` recomputed over the witness blocks.
    pub fn witness_power_sum(&self, a: &RealSequence) -> f64 {
        self.witness
            .iter()
            .map(|block| {
                block
                    .windows(2)
                    .map(|w| {
                        let x = a.value_at(w[0]).expect("witness index in sequence");
                        let y = a.value_at(w[1]).expect("witness index in sequence");
                        (y - x).norm().powf(self.r)
                    })
                    .sum::<f64>()
            })
            .sum()
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::domain(format!("variation exponent r must be finite and >= 1, got {r}")));
    }
    Ok(())
}

/// `(best power sum, witness positions)` by dynamic programming over endpoints.
fn dp(values: &[Complex64], r: f64) -> (f64, Vec<usize>) {
    let n = values.len();
    let mut best = vec![0.0f64; n];
    let mut len = vec![1usize; n];
    let mut prev = vec![usize::MAX; n];
    for j in 1..n {
        for i in 0..j {
            let cand = best[i] + (values[j] - values[i]).norm().powf(r);
            let cand_len = len[i] + 1;
            if cand > best[j] || (cand == best[j] && cand > 0.0 && cand_len < len[j]) {
                best[j] = cand;
                len[j] = cand_len;
                prev[j] = i;
            }
        }
    }
    let mut end = 0;
    for j in 1..n {
        if best[j] > best[end] || (best[j] == best[end] && len[j] < len[end]) {
            end = j;
        }
    }
    let mut path = vec![end];
    while prev[*path.last().expect("nonempty")] != usize::MAX {
        let p = prev[*path.last().expect("nonempty")];
        path.push(p);
    }
    path.reverse();
    (best[end], path)
}

/// `V_r` in `O(n^2)` with an optimal witness subsequence.
pub fn variation_exact(a: &RealSequence, r: f64) -> Result<VariationResult> {
    check_r(r)?;
    if a.is_empty() {
        return Err(Error::domain("variation of an empty sequence"));
    }
    let (sum, path) = dp(&a.values, r);
    let witness = if sum > 0.0 {
        path.iter().map(|&p| a.indices[p]).collect()
    } else {
        vec![a.indices[0]]
    };
    Ok(VariationResult {
        value: sum.powf(1.0 / r),
        r,
        kind: VariationKind::Plain,
        witness: vec![witness],
        sup_term: 0.0,
    })
}

/// Exhaustive maximum over all subsequences.
pub fn variation_bruteforce(a: &RealSequence, r: f64) -> Result<VariationResult> {
    check_r(r)?;
    if a.is_empty() {
        return Err(Error::domain("variation of an empty sequence"));
    }
    let n = a.len();
    if n > BRUTEFORCE_MAX_LEN {
        return Err(Error::size(
            "brute-force variation length",
            n as u128,
            BRUTEFORCE_MAX_LEN as u128,
        ));
    }
    let mut best = 0.0;
    let mut best_mask = 1u32;
    for mask in 1u32..(1 << n) {
        let picked: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s: f64 = picked
            .windows(2)
            .map(|w| (a.values[w[1]] - a.values[w[0]]).norm().powf(r))
            .sum();
        if s > best
            || (s == best && s > 0.0 && mask.count_ones() < best_mask.count_ones())
        {
            best = s;
            best_mask = mask;
        }
    }
    let witness = (0..n)
        .filter(|i| best_mask >> i & 1 == 1)
        .map(|i| a.indices[i])
        .collect();
    Ok(VariationResult {
        value: f64::powf(best, 1.0 / r),
        r,
        kind: VariationKind::Plain,
        witness: vec![witness],
        sup_term: 0.0,
    })
}

/// `sup_j |a_j| + V_r(a)`.
pub fn variation_with_sup(a: &RealSequence, r: f64) -> Result<VariationResult> {
    let mut v = variation_exact(a, r)?;
    let sup = a.sup_abs();
    v.value += sup;
    v.sup_term = sup;
    v.kind = VariationKind::WithSup;
    Ok(v)
}

/// Splits `[m, n)` greedily into the longest dyadic intervals `[j 2^i, (j+1) 2^i)`.
pub fn dyadic_decompose(m: u64, n: u64, s: u32) -> Result<Vec<(u64, u64)>> {
    if s >= 63 {
        return Err(Error::domain("s must be below 63"));
    }
    if m >= n || n > 1u64 << s {
        return Err(Error::domain(format!(
            "need 0 <= m < n <= 2^s, got m = {m}, n = {n}, s = {s}"
        )));
    }
    let mut out = Vec::new();
    let mut cur = m;
    while cur < n {
        let align = if cur == 0 { s } else { cur.trailing_zeros().min(s) };
        let mut i = align;
        while cur + (1u64 << i) > n {
            i -= 1;
        }
        out.push((cur, cur + (1u64 << i)));
        cur += 1u64 << i;
    }
    Ok(out)
}

/// Long and short variation of a sequence indexed by positive integers.
pub fn long_short_split(a: &RealSequence, r: f64) -> Result<(VariationResult, VariationResult)> {
    check_r(r)?;
    if r < 2.0 {
        return Err(Error::domain("the long/short split is defined for r >= 2"));
    }
    if a.is_empty() {
        return Err(Error::domain("variation of an empty sequence"));
    }
    if a.indices[0] < 1 {
        return Err(Error::domain("long/short split needs indices in N = {1, 2, ...}"));
    }
    let dyadic = a.restrict(|i| i > 0 && (i & (i - 1)) == 0);
    let long = if dyadic.is_empty() {
        VariationResult {
            value: 0.0,
            r,
            kind: VariationKind::Long,
            witness: vec![vec![]],
            sup_term: 0.0,
        }
    } else {
        let mut v = variation_exact(&dyadic, r)?;
        v.kind = VariationKind::Long;
        v
    };

    let last = *a.indices.last().expect("nonempty");
    let top = 63 - (last as u64).leading_zeros();
    let blocks = (0..=top)
        .into_par_iter()
        .map(|nb| {
            let (lo, hi) = (1i64 << nb, 1i64 << (nb + 1));
            let block = a.restrict(|i| lo <= i && i < hi);
            if block.is_empty() {
                Ok(None)
            } else {
                variation_exact(&block, r).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut power = 0.0;
    let mut witness = Vec::new();
    for b in blocks.into_iter().flatten() {
        power += b.value.powf(r);
        if b.value > 0.0 {
            witness.push(b.witness.into_iter().next().expect("one block"));
        }
    }
    let short = VariationResult {
        value: power.powf(1.0 / r),
        r,
        kind: VariationKind::Short,
        witness,
        sup_term: 0.0,
    };
    Ok((long, short))
}

/// A strictly increasing `u = m_0 < ... < m_h = v` with balanced gaps.
///
/// The first `(v-u) mod h` gaps are one longer than the rest.
pub fn block_partition(u: i64, v: i64, h: i64) -> Result<Vec<i64>> {
    if v <= u {
        return Err(Error::domain(format!("need u < v, got u = {u}, v = {v}")));
    }
    let len = v - u;
    if h < 1 || h > len {
        return Err(Error::domain(format!("h must lie in [1, {len}], got {h}")));
    }
    let (q, rem) = (len / h, len % h);
    let mut out = Vec::with_capacity(h as usize + 1);
    let mut cur = u;
    out.push(cur);
    for j in 0..h {
        cur += q + i64::from(j < rem);
        out.push(cur);
    }
    Ok(out)
}

/// `h = ⌈(v-u) B / (4A)⌉` clamped to `[1, v-u]`, where `A` bounds the
/// terms and `B` the consecutive differences.
pub fn select_h(u: i64, v: i64, a_bound: f64, b_bound: f64) -> Result<i64> {
    if v <= u {
        return Err(Error::domain("need u < v"));
    }
    if !(a_bound > 0.0) || !(b_bound >= 0.0) {
        return Err(Error::domain("need A > 0 and B >= 0"));
    }
    let len = v - u;
    let h = ((len as f64) * b_bound / (4.0 * a_bound)).ceil() as i64;
    Ok(h.clamp(1, len))
}
