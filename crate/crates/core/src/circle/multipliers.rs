//! The approximating multipliers `ν_N`, `Ω_N^t`, `Λ_N^t` and the error sweeps
//! comparing them with `m_N`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::multiplier::{multiplier_m, MultiplierKind, MultiplierValue};
use crate::averaging::phi::{phi, QuadratureSpec};
use crate::circle::arcs::{classify_arc, numerator_candidates, ArcClass, ArcParams};
use crate::circle::bump::scaled_bump;
use crate::error::{Error, Result};
use crate::expsum::{factorial_modulus, gauss_sum, DEFAULT_ENUM_CAP};
use crate::polymap::MultiIndexSet;
use crate::rational::{level_of, RationalPoint, TorusPoint};

/// Largest level `s` accepted by `nu`.
pub const MAX_NU_LEVEL: u32 = 20;

/// Support radius of `η_s` along a degree-one coordinate: `(1/2) 10^{-(s+1)}`.
pub fn eta_level_radius(s: u32) -> f64 {
    0.5 * 10f64.powi(-(s as i32 + 1))
}

fn eta_base(s: u32) -> BigUint {
    BigUint::from(10u32).pow(s + 1)
}

/// `Q_{t+1}^{3d}`, the dilation base of `ρ_t`.
pub fn rho_base(t: u32, d: usize) -> Result<BigUint> {
    Ok(factorial_modulus(t + 1)?.value.pow(3 * d as u32))
}

/// One nonzero summand `G(a/q) η(δ)` of an approximating multiplier; the
/// `Φ_N(δ)` factor depends on `N` and is applied separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterTerm {
    pub level: u32,
    pub center: RationalPoint,
    pub gauss: Complex64,
    pub cutoff: f64,
    pub offset: Vec<f64>,
}

impl CenterTerm {
    pub fn evaluate(&self, n: u64, gamma: &MultiIndexSet, quad: &QuadratureSpec) -> Result<Complex64> {
        let p = phi(&self.offset, n, gamma, quad)?;
        Ok(self.gauss * p.value * self.cutoff)
    }
}

/// Centers `a/q ∈ R_s` with `η_s(ξ - a/q) != 0`, found by rounding `ξ q`.
pub fn level_terms(xi: &TorusPoint, s: u32, gamma: &MultiIndexSet) -> Result<Vec<(RationalPoint, f64)>> {
    if s > MAX_NU_LEVEL {
        return Err(Error::size("ν level s", u128::from(s), u128::from(MAX_NU_LEVEL)));
    }
    let degrees = gamma.degree_matrix();
    let base = eta_base(s);
    let radii: Vec<f64> = gamma
        .degrees()
        .iter()
        .map(|&deg| 0.5 * 10f64.powi(-((s as i32 + 1) * deg as i32)))
        .collect();
    let qs: Vec<i64> = if s == 0 { vec![1] } else { ((1i64 << s)..(1i64 << (s + 1))).collect() };
    let mut out = Vec::new();
    for q in qs {
        let mut a = Vec::with_capacity(xi.d());
        for (x, &r) in xi.coords().iter().zip(&radii) {
            match numerator_candidates(x, q, r).first() {
                Some(&c) => a.push(c),
                None => break,
            }
        }
        if a.len() != xi.d() || a.iter().fold(q, |g, &x| g.gcd(&x)) != 1 {
            continue;
        }
        let center = RationalPoint::new(&a, q)?;
        let eta = scaled_bump(&xi.offset_from(&center), &base, &degrees);
        if eta != 0.0 {
            out.push((center, eta));
        }
    }
    Ok(out)
}

/// The same set as [`level_terms`], by scanning every element of `R_s`.
pub fn level_terms_exhaustive(
    xi: &TorusPoint,
    family: &[RationalPoint],
    s: u32,
    gamma: &MultiIndexSet,
) -> Vec<(RationalPoint, f64)> {
    let degrees = gamma.degree_matrix();
    let base = eta_base(s);
    family
        .iter()
        .filter_map(|c| {
            let eta = scaled_bump(&xi.offset_from(c), &base, &degrees);
            (eta != 0.0).then(|| (c.clone(), eta))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuOptions {
    pub s_max: u32,
    /// Decay exponent used for the reported tail bound `2^{-δ̂ s_max}`.
    pub delta_hat: f64,
    pub quad: QuadratureSpec,
}

impl Default for NuOptions {
    fn default() -> Self {
        Self {
            s_max: 7,
            delta_hat: 0.5,
            quad: QuadratureSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuValue {
    pub value: MultiplierValue,
    pub terms: Vec<CenterTerm>,
    pub tail_bound: f64,
}

/// Every nonzero `ν^s` summand at `ξ` for `s <= s_max`, without the `Φ_N` factor.
pub fn nu_terms(xi: &TorusPoint, s_max: u32, gamma: &MultiIndexSet) -> Result<Vec<CenterTerm>> {
    if xi.d() != gamma.d() {
        return Err(Error::contract("frequency dimension differs from d"));
    }
    let mut out = Vec::new();
    for s in 0..=s_max {
        for (center, eta) in level_terms(xi, s, gamma)? {
            out.push(CenterTerm {
                level: s,
                gauss: gauss_sum(&center, gamma)?,
                cutoff: eta,
                offset: xi.offset_from_f64(&center),
                center,
            });
        }
    }
    Ok(out)
}

/// `Σ` of the given summands at scale `N`.
pub fn sum_terms(terms: &[CenterTerm], n: u64, gamma: &MultiIndexSet, quad: &QuadratureSpec) -> Result<Complex64> {
    let mut total = Complex64::zero();
    for t in terms {
        total += t.evaluate(n, gamma, quad)?;
    }
    Ok(total)
}

/// `ν_N(ξ) = Σ_{s <= s_max} Σ_{a/q ∈ R_s} G(a/q) Φ_N(ξ - a/q) η_s(ξ - a/q)`.
pub fn nu(xi: &TorusPoint, n: u64, opts: &NuOptions, gamma: &MultiIndexSet) -> Result<NuValue> {
    let terms = nu_terms(xi, opts.s_max, gamma)?;
    let value = sum_terms(&terms, n, gamma, &opts.quad)?;
    Ok(NuValue {
        value: MultiplierValue {
            value,
            at: xi.to_f64(),
            kind: MultiplierKind::Nu,
            provenance: terms.first().map(|t| t.center.clone()),
        },
        tail_bound: 2f64.powf(-opts.delta_hat * opts.s_max as f64),
        terms,
    })
}

fn machine_modulus(t: u32, gamma: &MultiIndexSet) -> Result<i64> {
    let qt = factorial_modulus(t)?;
    let q = qt
        .to_u64()
        .filter(|&q| q <= i64::MAX as u64)
        .ok_or_else(|| Error::size("Q_t as machine integer", u128::MAX, i64::MAX as u128))?;
    let count = (0..gamma.d()).fold(1u128, |acc, _| acc.saturating_mul(u128::from(q)));
    if count > DEFAULT_ENUM_CAP {
        return Err(Error::size("Q_t^d residues", count, DEFAULT_ENUM_CAP));
    }
    Ok(q as i64)
}

/// `Ω_N^t(ξ) = Σ_{a ∈ [1, Q_t]^d} G(a/Q_t) Φ_N(ξ - a/Q_t) ρ_t(ξ - a/Q_t)`.
pub fn omega(
    xi: &TorusPoint,
    n: u64,
    t: u32,
    gamma: &MultiIndexSet,
    quad: &QuadratureSpec,
) -> Result<MultiplierValue> {
    if xi.d() != gamma.d() {
        return Err(Error::contract("frequency dimension differs from d"));
    }
    let q = machine_modulus(t, gamma)?;
    let base = rho_base(t, gamma.d())?;
    let term = nearest_term(xi, q, &base, gamma, false)?;
    finish(xi, n, term, MultiplierKind::Omega, gamma, quad)
}

/// `Λ_N^t(ξ)`, the same sum over `a/q` with `q | Q_t`, `q >= 2^{t+1}`, `a ∈ A_q`.
pub fn lambda_mult(
    xi: &TorusPoint,
    n: u64,
    t: u32,
    gamma: &MultiIndexSet,
    quad: &QuadratureSpec,
) -> Result<MultiplierValue> {
    if xi.d() != gamma.d() {
        return Err(Error::contract("frequency dimension differs from d"));
    }
    let qt = machine_modulus(t, gamma)?;
    let base = rho_base(t, gamma.d())?;
    let min_q = 1i64 << (t + 1);
    let mut found = None;
    for q in (min_q..=qt).filter(|q| qt % q == 0) {
        if let Some(term) = nearest_term(xi, q, &base, gamma, true)? {
            found = Some(term);
            break;
        }
    }
    finish(xi, n, found, MultiplierKind::Lambda, gamma, quad)
}

/// The single `a/q` near `ξ` with `ρ_t(ξ - a/q) != 0`, if any.
fn nearest_term(
    xi: &TorusPoint,
    q: i64,
    base: &BigUint,
    gamma: &MultiIndexSet,
    need_reduced: bool,
) -> Result<Option<(RationalPoint, f64)>> {
    let qq = i128::from(q);
    let a: Vec<i64> = xi
        .coords()
        .iter()
        .map(|x| (x * Ratio::from_integer(qq)).round().to_integer().rem_euclid(qq) as i64)
        .collect();
    let center = RationalPoint::new(&a, q)?;
    if need_reduced && !center.reduced {
        return Ok(None);
    }
    let rho = scaled_bump(&xi.offset_from(&center), base, &gamma.degree_matrix());
    Ok((rho != 0.0).then_some((center, rho)))
}

fn finish(
    xi: &TorusPoint,
    n: u64,
    term: Option<(RationalPoint, f64)>,
    kind: MultiplierKind,
    gamma: &MultiIndexSet,
    quad: &QuadratureSpec,
) -> Result<MultiplierValue> {
    let (value, provenance) = match term {
        None => (Complex64::zero(), None),
        Some((center, rho)) => {
            let offset = xi.offset_from_f64(&center);
            let g = gauss_sum(&center, gamma)?;
            let p = phi(&offset, n, gamma, quad)?;
            (g * p.value * rho, Some(center))
        }
    };
    Ok(MultiplierValue {
        value,
        at: xi.to_f64(),
        kind,
        provenance,
    })
}

/// Points `ξ_i = (j_i + num/den) / side`, `j ∈ [0, side)^d`, in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub side: u64,
    pub shift_num: i64,
    pub shift_den: i64,
}

impl TorusGrid {
    pub fn new(side: u64, shift_num: i64, shift_den: i64) -> Result<Self> {
        if side == 0 || shift_den <= 0 {
            return Err(Error::domain("grid side and shift denominator must be positive"));
        }
        Ok(Self {
            side,
            shift_num,
            shift_den,
        })
    }

    /// The unshifted grid `j / side`.
    pub fn aligned(side: u64) -> Result<Self> {
        Self::new(side, 0, 1)
    }

    pub fn len(&self, d: usize) -> u128 {
        (0..d).fold(1u128, |acc, _| acc.saturating_mul(u128::from(self.side)))
    }

    pub fn is_empty(&self) -> bool {
        self.side == 0
    }

    /// Common denominator `side * shift_den` of all coordinates.
    pub fn denominator(&self) -> i128 {
        i128::from(self.side) * i128::from(self.shift_den)
    }

    pub fn point(&self, d: usize, mut idx: u128) -> Result<TorusPoint> {
        let den = self.denominator();
        let mut nums = vec![0i128; d];
        for slot in nums.iter_mut().rev() {
            let j = (idx % u128::from(self.side)) as i128;
            idx /= u128::from(self.side);
            *slot = j * i128::from(self.shift_den) + i128::from(self.shift_num);
        }
        TorusPoint::from_fractions(&nums, den)
    }

    /// All points, capped at `cap`.
    pub fn points(&self, d: usize, cap: u128) -> Result<Vec<TorusPoint>> {
        let total = self.len(d);
        if total > cap {
            return Err(Error::size("grid points", total, cap));
        }
        (0..total).map(|i| self.point(d, i)).collect()
    }

    /// Smallest `s` for which `η_s` has support radius below half the spacing.
    pub fn resolution_level(&self) -> u32 {
        let half = 0.5 / self.side as f64;
        (0..=MAX_NU_LEVEL).find(|&s| eta_level_radius(s) < half).unwrap_or(MAX_NU_LEVEL)
    }

    /// `s_max` that also reaches the level of the largest grid denominator, so
    /// every grid point that is itself a center is seen.
    pub fn recommended_s_max(&self) -> u32 {
        let den = i64::try_from(self.denominator()).unwrap_or(i64::MAX);
        self.resolution_level().max(level_of(den)).min(MAX_NU_LEVEL)
    }
}

/// What `m_N` is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum ApproxTarget {
    /// `ν_N` truncated at `s_max`.
    Nu { s_max: u32 },
    /// `G(a/q) Φ_N(ξ - a/q)` at the major-arc center of `ξ`; minor-arc points are skipped.
    MajorArc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxErrorPoint {
    pub n: u64,
    pub sup_error: f64,
    pub argmax: Vec<f64>,
    /// Grid points that entered the supremum.
    pub evaluated: u64,
}

/// Points per sweep accepted by `approx_error_grid`.
pub const GRID_POINT_CAP: u128 = 1 << 20;

/// `|m_N(ξ) - G(a/q) Φ_N(ξ - a/q)|`.
pub fn major_arc_error(
    xi: &TorusPoint,
    n: u64,
    center: &RationalPoint,
    gamma: &MultiIndexSet,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let m = multiplier_m(xi, n, gamma)?.value;
    let g = gauss_sum(center, gamma)?;
    let p = phi(&xi.offset_from_f64(center), n, gamma, quad)?.value;
    Ok((m - g * p).norm())
}

/// Sup over the grid of `|m_N - target|`, with the first maximizer in grid order.
pub fn approx_error_grid(
    n: u64,
    grid: &TorusGrid,
    target: ApproxTarget,
    gamma: &MultiIndexSet,
    params: &ArcParams,
    quad: &QuadratureSpec,
) -> Result<ApproxErrorPoint> {
    let terms = prepare_grid(grid, target, gamma, params, n)?;
    sweep_prepared(&terms, n, gamma, quad)
}

/// Grid points paired with their `N`-independent summands.
pub struct PreparedGrid {
    points: Vec<(TorusPoint, Vec<CenterTerm>)>,
}

impl PreparedGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Precomputes the summands for every grid point; for `MajorArc` the center
/// is chosen at scale `n`.
pub fn prepare_grid(
    grid: &TorusGrid,
    target: ApproxTarget,
    gamma: &MultiIndexSet,
    params: &ArcParams,
    n: u64,
) -> Result<PreparedGrid> {
    let d = gamma.d();
    if let ApproxTarget::Nu { s_max } = target {
        let need = grid.resolution_level();
        if s_max < need {
            return Err(Error::contract(format!(
                "grid of side {} needs s_max >= {need} so that η_s supports fall below half the spacing, got {s_max}",
                grid.side
            )));
        }
    }
    let points = grid.points(d, GRID_POINT_CAP)?;
    let prepared: Result<Vec<_>> = points
        .into_par_iter()
        .filter_map(|xi| match target {
            ApproxTarget::Nu { s_max } => Some(nu_terms(&xi, s_max, gamma).map(|t| (xi, t))),
            ApproxTarget::MajorArc => match classify_arc(&xi, n, params, gamma) {
                Err(e) => Some(Err(e)),
                Ok(ArcClass::Minor) => None,
                Ok(ArcClass::Major(center)) => Some(gauss_sum(&center, gamma).map(|g| {
                    let term = CenterTerm {
                        level: level_of(center.q),
                        gauss: g,
                        cutoff: 1.0,
                        offset: xi.offset_from_f64(&center),
                        center,
                    };
                    (xi, vec![term])
                })),
            },
        })
        .collect();
    Ok(PreparedGrid { points: prepared? })
}

/// `sup |m_N - Σ terms|` over a prepared grid.
pub fn sweep_prepared(
    grid: &PreparedGrid,
    n: u64,
    gamma: &MultiIndexSet,
    quad: &QuadratureSpec,
) -> Result<ApproxErrorPoint> {
    let errors: Result<Vec<f64>> = grid
        .points
        .par_iter()
        .map(|(xi, terms)| {
            let m = multiplier_m(xi, n, gamma)?.value;
            Ok((m - sum_terms(terms, n, gamma, quad)?).norm())
        })
        .collect();
    let errors = errors?;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, &e) in errors.iter().enumerate() {
        if e > best.0 {
            best = (e, i);
        }
    }
    if errors.is_empty() {
        return Ok(ApproxErrorPoint {
            n,
            sup_error: 0.0,
            argmax: Vec::new(),
            evaluated: 0,
        });
    }
    Ok(ApproxErrorPoint {
        n,
        sup_error: best.0,
        argmax: grid.points[best.1].0.to_f64(),
        evaluated: errors.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::{divisor_family, rational_family};

    fn quad_gamma() -> MultiIndexSet {
        MultiIndexSet::build(1, 2).unwrap()
    }

    #[test]
    fn nu_at_zero_and_centers() {
        let g = quad_gamma();
        let opts = NuOptions::default();
        let v = nu(&TorusPoint::zero(2), 64, &opts, &g).unwrap();
        assert!((v.value.value - 1.0).norm() < 1e-15);
        assert_eq!(v.terms.len(), 1);

        let c = RationalPoint::new(&[2, 3], 5).unwrap();
        let v = nu(&c.to_torus(), 64, &opts, &g).unwrap();
        let gs = gauss_sum(&c, &g).unwrap();
        assert_eq!(v.terms.len(), 1);
        assert_eq!(v.terms[0].level, 2);
        assert!((v.value.value - gs).norm() < 1e-14);
        assert_eq!(v.value.provenance, Some(c));
    }

    #[test]
    fn rounding_lookup_matches_exhaustive_scan() {
        let g = quad_gamma();
        let grid = TorusGrid::aligned(48).unwrap();
        for s in 0..=3 {
            let family = rational_family(s, &g).unwrap();
            for xi in grid.points(2, 1 << 20).unwrap() {
                let fast = level_terms(&xi, s, &g).unwrap();
                let slow = level_terms_exhaustive(&xi, &family, s, &g);
                assert_eq!(fast, slow);
                assert!(slow.len() <= 1);
            }
        }
    }

    #[test]
    fn omega_examples() {
        let g = quad_gamma();
        let quad = QuadratureSpec::default();
        let one = omega(&TorusPoint::zero(2), 128, 0, &g, &quad).unwrap();
        assert!((one.value - 1.0).norm() < 1e-15);
        assert_eq!(one.provenance, Some(RationalPoint::new(&[2, 2], 2).unwrap()));

        let b = RationalPoint::new(&[5, 17], 24).unwrap();
        let v = omega(&b.to_torus(), 128, 1, &g, &quad).unwrap();
        assert!((v.value - gauss_sum(&b, &g).unwrap()).norm() < 1e-14);

        let off = TorusPoint::from_f64(&[0.01, 0.0]).unwrap();
        assert_eq!(omega(&off, 128, 0, &g, &quad).unwrap().value, Complex64::zero());
        assert!(matches!(omega(&off, 128, 2, &g, &quad), Err(Error::Size { .. })));
    }

    #[test]
    fn lambda_examples() {
        let g1 = MultiIndexSet::build(1, 1).unwrap();
        let quad = QuadratureSpec::default();
        let half = TorusPoint::from_fractions(&[1], 2).unwrap();
        let v = lambda_mult(&half, 32, 0, &g1, &quad).unwrap();
        let expect = gauss_sum(&RationalPoint::new(&[1], 2).unwrap(), &g1).unwrap();
        assert!((v.value - expect).norm() < 1e-15);

        let g = quad_gamma();
        assert_eq!(lambda_mult(&TorusPoint::zero(2), 32, 1, &g, &quad).unwrap().value, Complex64::zero());
        for c in divisor_family(1, &g).unwrap().into_iter().step_by(37) {
            let v = lambda_mult(&c.to_torus(), 32, 1, &g, &quad).unwrap();
            assert!((v.value - gauss_sum(&c, &g).unwrap()).norm() < 1e-14);
            assert_eq!(v.provenance, Some(c));
        }
    }

    #[test]
    fn omega_agrees_with_nu_level_term_near_center() {
        let g = quad_gamma();
        let quad = QuadratureSpec::default();
        let c = RationalPoint::new(&[1, 1], 2).unwrap();
        let tiny = Ratio::new(1i128, 1i128 << 40);
        let xi = TorusPoint::new(vec![Ratio::new(1, 2) + tiny, Ratio::new(1, 2)]).unwrap();
        let o = omega(&xi, 256, 0, &g, &quad).unwrap();
        let terms = nu_terms(&xi, 1, &g).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].center, c);
        let n = sum_terms(&terms, 256, &g, &quad).unwrap();
        assert!((o.value - n).norm() < 1e-10);
    }

    #[test]
    fn grid_contract_and_zero_error() {
        let g = quad_gamma();
        let p = ArcParams::default();
        let quad = QuadratureSpec::default();
        let grid = TorusGrid::aligned(64).unwrap();
        assert_eq!(grid.resolution_level(), 1);
        let err = approx_error_grid(16, &grid, ApproxTarget::Nu { s_max: 0 }, &g, &p, &quad);
        assert!(matches!(err, Err(Error::Contract(_))));
        let single = TorusGrid::aligned(1).unwrap();
        let r = approx_error_grid(16, &single, ApproxTarget::Nu { s_max: 1 }, &g, &p, &quad).unwrap();
        assert!(r.sup_error < 1e-15);
        assert_eq!(r.argmax, vec![0.0, 0.0]);
        let shifted = TorusGrid::new(64, 1, 3).unwrap();
        assert_eq!(shifted.recommended_s_max(), 7);
    }
}
