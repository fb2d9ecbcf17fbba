//! The oscillatory integral `Φ_N(ξ) = ∫_{[0,1]^k} e(<ξ, Q(N y)>) dy`.
//!
//! Evaluated by composite tensor Gauss-Legendre quadrature. Each axis is cut
//! into panels so that the phase turns through at most a fixed number of
//! cycles per panel; the result is accepted once doubling the panel count
//! changes it by less than the tolerance.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::averaging::lattice::ComplexNeumaier;
use crate::averaging::multiplier::{e, MultiplierKind, MultiplierValue};
use crate::error::{Error, Result};
use crate::polymap::MultiIndexSet;

const ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Upper bound on phase cycles swept by one panel.
    pub cycles_per_panel: f64,
    /// Target absolute accuracy.
    pub tol: f64,
    /// Cap on nodes along one axis.
    pub max_nodes_per_axis: usize,
    /// Cap on tensor nodes in one evaluation.
    pub max_total_nodes: u128,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            cycles_per_panel: 1.0,
            tol: 1e-12,
            max_nodes_per_axis: 1 << 23,
            max_total_nodes: 1 << 26,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn axis_nodes(panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = rule();
    let h = 1.0 / panels as f64;
    let mut nodes = Vec::with_capacity(panels * ORDER);
    let mut weights = Vec::with_capacity(panels * ORDER);
    for p in 0..panels {
        let a = p as f64 * h;
        for i in 0..ORDER {
            nodes.push(a + 0.5 * h * (1.0 + x[i]));
            weights.push(0.5 * h * w[i]);
        }
    }
    (nodes, weights)
}

/// Integrates `e(Σ_γ c_γ y^γ)` over the unit cube with the given panel counts.
fn tensor_integral(gamma: &MultiIndexSet, coeffs: &[f64], panels: &[usize]) -> Complex64 {
    let k = gamma.k();
    let n0 = gamma.degree_cap() as usize;
    let axes: Vec<(Vec<f64>, Vec<f64>)> = panels.iter().map(|&p| axis_nodes(p)).collect();
    // powers[axis][node * (n0+1) + e] = node^e
    let powers: Vec<Vec<f64>> = axes
        .iter()
        .map(|(nodes, _)| {
            let mut out = Vec::with_capacity(nodes.len() * (n0 + 1));
            for &y in nodes {
                let mut p = 1.0;
                for _ in 0..=n0 {
                    out.push(p);
                    p *= y;
                }
            }
            out
        })
        .collect();
    let sizes: Vec<usize> = axes.iter().map(|(n, _)| n.len()).collect();
    let mut idx = vec![0usize; k];
    let mut acc = ComplexNeumaier::default();
    loop {
        let mut weight = 1.0;
        for a in 0..k {
            weight *= axes[a].1[idx[a]];
        }
        let mut phase = 0.0;
        for (g, &c) in gamma.indices().iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            let mut mono = 1.0;
            for a in 0..k {
                mono *= powers[a][idx[a] * (n0 + 1) + g[a] as usize];
            }
            phase += c * mono;
        }
        acc.add(e(phase - phase.round()) * weight);
        let mut pos = k;
        loop {
            if pos == 0 {
                return acc.value();
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sizes[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `Φ_N(ξ)` for `ξ ∈ R^d`.
pub fn phi(xi: &[f64], n: u64, gamma: &MultiIndexSet, quad: &QuadratureSpec) -> Result<MultiplierValue> {
    if xi.len() != gamma.d() {
        return Err(Error::contract(format!(
            "frequency has {} coordinates, Γ has d = {}",
            xi.len(),
            gamma.d()
        )));
    }
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("frequency must be finite"));
    }
    let at = xi.to_vec();
    if xi.iter().all(|&v| v == 0.0) {
        return Ok(MultiplierValue {
            value: Complex64::new(1.0, 0.0),
            at,
            kind: MultiplierKind::Phi,
            provenance: None,
        });
    }
    let degrees = gamma.degrees();
    let coeffs: Vec<f64> = xi
        .iter()
        .zip(&degrees)
        .map(|(&v, &deg)| v * (n as f64).powi(deg as i32))
        .collect();
    let k = gamma.k();
    // |∂_j phase| <= Σ_γ γ_j |c_γ| on the unit cube.
    let freq: Vec<f64> = (0..k)
        .map(|j| {
            gamma
                .indices()
                .iter()
                .zip(&coeffs)
                .map(|(g, c)| g[j] as f64 * c.abs())
                .sum()
        })
        .collect();
    let mut panels: Vec<usize> = freq
        .iter()
        .map(|f| ((f / quad.cycles_per_panel).ceil() as usize).max(1))
        .collect();
    // Phase round-off limits the attainable accuracy for large frequencies.
    let magnitude: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let tol = quad.tol.max(64.0 * f64::EPSILON * (1.0 + magnitude));

    let fits = |p: &[usize]| {
        let per_axis_ok = p.iter().all(|&x| x * ORDER <= quad.max_nodes_per_axis);
        let total = p.iter().fold(1u128, |a, &x| a.saturating_mul((x * ORDER) as u128));
        per_axis_ok && total <= quad.max_total_nodes
    };
    if !fits(&panels) {
        return Err(Error::Quadrature {
            tol,
            estimate: f64::NAN,
            nodes: panels.iter().max().copied().unwrap_or(0) * ORDER,
        });
    }
    let mut coarse = tensor_integral(gamma, &coeffs, &panels);
    loop {
        let finer: Vec<usize> = panels.iter().map(|p| p * 2).collect();
        if !fits(&finer) {
            return Err(Error::Quadrature {
                tol,
                estimate: f64::NAN,
                nodes: panels.iter().max().copied().unwrap_or(0) * ORDER,
            });
        }
        let fine = tensor_integral(gamma, &coeffs, &finer);
        let diff = (fine - coarse).norm();
        if diff <= tol {
            return Ok(MultiplierValue {
                value: fine,
                at,
                kind: MultiplierKind::Phi,
                provenance: None,
            });
        }
        panels = finer;
        coarse = fine;
    }
}

/// Closed form of `Φ_N` for `Γ = {(1)}`: `(e(ξN) - 1) / (2πiξN)`.
pub fn phi_linear_closed_form(xi: f64, n: u64) -> Complex64 {
    let t = xi * n as f64;
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (e(t) - 1.0) / Complex64::new(0.0, std::f64::consts::TAU * t)
}
