//! Multi-index combinatorics and the canonical polynomial mapping.
//!
//! Every integer polynomial mapping `P: Z^k -> Z^d0` without constant term
//! factors as `P = L ∘ Q`, where `Q(y) = (y^γ)_{γ ∈ Γ}` is the canonical
//! mapping over all nonzero exponent vectors with entries bounded by the
//! degree, and `L` is an integer matrix built from the coefficients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `d = |Γ|`.
pub const DEFAULT_GAMMA_CAP: usize = 10_000;

/// The ordered set Γ of nonzero exponent vectors `γ ∈ [0, N0]^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    k: usize,
    degree_cap: u32,
    indices: Vec<Vec<u32>>,
}

impl MultiIndexSet {
    /// Enumerates Γ in lexicographic order, refusing sets larger than
    /// [`DEFAULT_GAMMA_CAP`].
    pub fn build(k: usize, degree_cap: u32) -> Result<Self> {
        Self::build_with_cap(k, degree_cap, DEFAULT_GAMMA_CAP)
    }

    pub fn build_with_cap(k: usize, degree_cap: u32, cap: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("number of variables k must be at least 1"));
        }
        if degree_cap == 0 {
            return Err(Error::domain("degree cap N0 must be at least 1"));
        }
        let side = u128::from(degree_cap) + 1;
        let mut total: u128 = 1;
        for _ in 0..k {
            total = total.saturating_mul(side);
        }
        let d = total - 1;
        if d > cap as u128 {
            return Err(Error::size("multi-index set Γ", d, cap as u128));
        }

        // Counting in base N0+1 with the first coordinate most significant
        // yields lexicographic order directly.
        let mut indices = Vec::with_capacity(d as usize);
        let mut current = vec![0u32; k];
        for _ in 0..d {
            let mut pos = k;
            while pos > 0 {
                pos -= 1;
                if current[pos] < degree_cap {
                    current[pos] += 1;
                    break;
                }
                current[pos] = 0;
            }
            indices.push(current.clone());
        }
        Ok(Self {
            k,
            degree_cap,
            indices,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// Cardinality `d` of Γ.
    pub fn d(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn position(&self, gamma: &[u32]) -> Option<usize> {
        self.indices
            .binary_search_by(|probe| probe.as_slice().cmp(gamma))
            .ok()
    }

    /// `|γ|` for every coordinate, in Γ order.
    pub fn degrees(&self) -> Vec<u32> {
        self.indices.iter().map(|g| g.iter().sum()).collect()
    }

    pub fn degree_matrix(&self) -> DegreeMatrix {
        DegreeMatrix {
            weights: self.degrees(),
        }
    }

    /// Evaluates the canonical mapping `Q(y) = (y^γ)_γ` exactly.
    pub fn eval_canonical(&self, y: &[i64]) -> Result<Vec<i128>> {
        if y.len() != self.k {
            return Err(Error::contract(format!(
                "point has {} coordinates, Γ expects k = {}",
                y.len(),
                self.k
            )));
        }
        self.indices.iter().map(|g| monomial(y, g)).collect()
    }
}

/// `y^γ` with overflow detection.
pub(crate) fn monomial(y: &[i64], gamma: &[u32]) -> Result<i128> {
    let mut acc: i128 = 1;
    for (&base, &exp) in y.iter().zip(gamma) {
        let p = i128::from(base)
            .checked_pow(exp)
            .ok_or_else(|| Error::Arithmetic(format!("{base}^{exp} exceeds 128-bit range")))?;
        acc = acc
            .checked_mul(p)
            .ok_or_else(|| Error::Arithmetic(format!("monomial y^{gamma:?} at y = {y:?}")))?;
    }
    Ok(acc)
}

/// The diagonal degree matrix `A` with `(A v)_γ = |γ| v_γ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeMatrix {
    pub weights: Vec<u32>,
}

impl DegreeMatrix {
    /// `t^A x`, i.e. `(t^{|γ|} x_γ)_γ`.
    pub fn scale(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        anisotropic_scale(t, self, x)
    }
}

pub fn anisotropic_scale(t: f64, a: &DegreeMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("dilation parameter must be positive, got {t}")));
    }
    if x.len() != a.weights.len() {
        return Err(Error::contract(format!(
            "vector has {} coordinates, degree matrix has {}",
            x.len(),
            a.weights.len()
        )));
    }
    Ok(x.iter()
        .zip(&a.weights)
        .map(|(&v, &w)| v * t.powi(w as i32))
        .collect())
}

/// An integer polynomial mapping `Z^k -> Z^d0` with no constant term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialMap {
    k: usize,
    components: Vec<BTreeMap<Vec<u32>, i64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MapJson {
    k: usize,
    components: Vec<ComponentJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ComponentJson {
    terms: Vec<TermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    gamma: Vec<u32>,
    coeff: i64,
}

impl PolynomialMap {
    /// Builds a map from `(γ, c)` term lists, one list per component.
    /// Repeated exponents are merged.
    pub fn new(k: usize, components: Vec<Vec<(Vec<u32>, i64)>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("number of variables k must be at least 1"));
        }
        if components.is_empty() {
            return Err(Error::domain("a polynomial map needs at least one component"));
        }
        let mut out = Vec::with_capacity(components.len());
        for terms in components {
            let mut comp = BTreeMap::new();
            for (gamma, coeff) in terms {
                if gamma.len() != k {
                    return Err(Error::contract(format!(
                        "exponent {gamma:?} has length {}, expected {k}",
                        gamma.len()
                    )));
                }
                if gamma.iter().all(|&g| g == 0) {
                    return Err(Error::domain("constant terms are not representable"));
                }
                *comp.entry(gamma).or_insert(0i64) += coeff;
            }
            comp.retain(|_, c| *c != 0);
            out.push(comp);
        }
        Ok(Self { k, components: out })
    }

    /// Single-variable, single-component map from `(power, coeff)` pairs.
    pub fn univariate(terms: &[(u32, i64)]) -> Result<Self> {
        Self::new(1, vec![terms.iter().map(|&(p, c)| (vec![p], c)).collect()])
    }

    /// Parses `{"k":1, "components":[{"terms":[{"gamma":[2],"coeff":1}]}]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MapJson = serde_json::from_str(text)?;
        Self::new(
            raw.k,
            raw.components
                .into_iter()
                .map(|c| c.terms.into_iter().map(|t| (t.gamma, t.coeff)).collect())
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let raw = MapJson {
            k: self.k,
            components: self
                .components
                .iter()
                .map(|c| ComponentJson {
                    terms: c
                        .iter()
                        .map(|(g, &coeff)| TermJson {
                            gamma: g.clone(),
                            coeff,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("map serializes")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of components `d0`.
    pub fn d0(&self) -> usize {
        self.components.len()
    }

    /// `N0`: the largest total degree among the components (at least 1).
    pub fn degree(&self) -> u32 {
        self.components
            .iter()
            .flat_map(|c| c.keys())
            .map(|g| g.iter().sum::<u32>())
            .max()
            .unwrap_or(1)
            .max(1)
    }

    pub fn coefficient(&self, j: usize, gamma: &[u32]) -> i64 {
        self.components[j].get(gamma).copied().unwrap_or(0)
    }

    /// Direct evaluation `P(y)`, independent of the canonical lift.
    pub fn eval(&self, y: &[i64]) -> Result<Vec<i128>> {
        if y.len() != self.k {
            return Err(Error::contract(format!(
                "point has {} coordinates, map expects k = {}",
                y.len(),
                self.k
            )));
        }
        self.components
            .iter()
            .map(|comp| {
                comp.iter().try_fold(0i128, |acc, (gamma, &c)| {
                    let term = monomial(y, gamma)?
                        .checked_mul(i128::from(c))
                        .ok_or_else(|| Error::Arithmetic("coefficient times monomial".into()))?;
                    acc.checked_add(term)
                        .ok_or_else(|| Error::Arithmetic("polynomial value".into()))
                })
            })
            .collect()
    }
}

/// `P` lifted to the canonical mapping: `P = L ∘ Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedSystem {
    pub gamma: MultiIndexSet,
    /// `d0 × d` integer matrix.
    pub linear_map: Vec<Vec<i64>>,
}

impl LiftedSystem {
    pub fn d0(&self) -> usize {
        self.linear_map.len()
    }

    /// `L v` in exact arithmetic.
    pub fn apply(&self, v: &[i128]) -> Result<Vec<i128>> {
        if v.len() != self.gamma.d() {
            return Err(Error::contract(format!(
                "vector has {} coordinates, lift expects d = {}",
                v.len(),
                self.gamma.d()
            )));
        }
        self.linear_map
            .iter()
            .map(|row| {
                row.iter().zip(v).try_fold(0i128, |acc, (&c, &x)| {
                    i128::from(c)
                        .checked_mul(x)
                        .and_then(|t| acc.checked_add(t))
                        .ok_or_else(|| Error::Arithmetic("linear map application".into()))
                })
            })
            .collect()
    }

    /// `L ∘ Q` evaluated at `y`.
    pub fn eval(&self, y: &[i64]) -> Result<Vec<i128>> {
        self.apply(&self.gamma.eval_canonical(y)?)
    }

    /// Checks `L Q(y) = P(y)` on every point of `[-radius, radius]^k`.
    pub fn verify_on_box(&self, map: &PolynomialMap, radius: i64) -> Result<bool> {
        let k = map.k();
        let side = (2 * radius + 1) as usize;
        let count = side.pow(k as u32);
        for idx in 0..count {
            let mut rem = idx;
            let mut y = vec![0i64; k];
            for c in y.iter_mut().rev() {
                *c = (rem % side) as i64 - radius;
                rem /= side;
            }
            if self.eval(&y)? != map.eval(&y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds Γ for the map's degree and the coefficient matrix `L`.
pub fn lift_polynomial_map(map: &PolynomialMap) -> Result<LiftedSystem> {
    let gamma = MultiIndexSet::build(map.k(), map.degree())?;
    let linear_map = (0..map.d0())
        .map(|j| {
            gamma
                .indices()
                .iter()
                .map(|g| map.coefficient(j, g))
                .collect()
        })
        .collect();
    Ok(LiftedSystem { gamma, linear_map })
}
