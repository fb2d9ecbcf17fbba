use num_complex::Complex64;
use num_rational::{Ratio, Rational64};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Criterion, Outcome};
use crate::averaging::fourier::{frequency, CyclicFunction};
use crate::averaging::kernel::KernelSource;
use crate::averaging::lattice::LatticeFunction;
use crate::averaging::multiplier::multiplier_m;
use crate::averaging::ops::{average_at, average_direct, average_transform, maximal_function};
use crate::averaging::phi::{phi, phi_linear_closed_form, QuadratureSpec};
use crate::circle::arcs::ArcParams;
use crate::circle::bump::{bump, bump_difference_l1, bump_kernel_l1, dilated_shift_norm, kernel_grid};
use crate::circle::multipliers::{
    level_terms, level_terms_exhaustive, major_arc_error, prepare_grid, sweep_prepared, ApproxTarget, TorusGrid,
};
use crate::dynamics::{dyadic_grid, ergodic_average, transference_check, DynamicalSystem, Observable};
use crate::error::Result;
use crate::expsum::{factorial_modulus, fit_decay, gauss_sum, max_gauss_modulus, rational_family, reduced_residues};
use crate::polymap::{lift_polynomial_map, MultiIndexSet, PolynomialMap};
use crate::rational::{RationalPoint, TorusPoint};
use crate::variation::{long_short_split, variation_bruteforce, variation_exact, RealSequence};

fn rng(seed: u64, c: Criterion) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ u64::from(c.id()).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn quadratic() -> Result<MultiIndexSet> {
    MultiIndexSet::build(1, 2)
}

fn done(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn averaging_oracle(seed: u64) -> Result<Outcome> {
    let g = quadratic()?;
    let mut r = rng(seed, Criterion::AveragingOracle);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = r.gen_range(1..=8u64);
        let mut f = LatticeFunction::<f64>::zeros(vec![0, 0], vec![63, 63])?;
        for _ in 0..r.gen_range(1..=40) {
            let x = [r.gen_range(0..64), r.gen_range(0..64)];
            f.set(&x, r.gen_range(-1.0..1.0))?;
        }
        let direct = average_direct(&f, n, &g)?;
        let fast = average_transform(&f, n, &g, None)?;
        if direct.lo() != fast.lo() || direct.hi() != fast.hi() {
            return done(false, format!("output boxes differ at N = {n}"));
        }
        let scale = direct.norm_sup().max(f64::MIN_POSITIVE);
        let diff = direct
            .box_points()
            .map(|x| (fast.get(&x) - direct.get(&x)).norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff / scale);
    }
    done(worst <= 1e-9, format!("200 instances, max relative error {worst:.3e} (tol 1e-9)"))
}

pub fn variation_oracle(seed: u64) -> Result<Outcome> {
    let mut r = rng(seed, Criterion::VariationOracle);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let len = r.gen_range(1..=12);
        let values: Vec<f64> = if i % 2 == 0 {
            (0..len).map(|_| r.gen_range(-1.0..1.0)).collect()
        } else {
            // Small integers produce ties between competing subsequences.
            (0..len).map(|_| f64::from(r.gen_range(-3..=3))).collect()
        };
        let seq = RealSequence::from_values(&values);
        for p in [1.0, 2.0, 2.5, 4.0] {
            let a = variation_exact(&seq, p)?.value;
            let b = variation_bruteforce(&seq, p)?.value;
            worst = worst.max((a - b).abs());
        }
    }
    done(worst <= 1e-12, format!("500 sequences x 4 exponents, max |DP - brute| {worst:.3e}"))
}

fn var(seq: &RealSequence, p: f64) -> Result<f64> {
    if seq.len() < 2 {
        return Ok(0.0);
    }
    Ok(variation_exact(seq, p)?.value)
}

fn l2(seq: &RealSequence) -> f64 {
    seq.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn dyadic_rhs(values: &[f64], s: u32) -> f64 {
    let mut total = 0.0;
    for i in 0..=s {
        let step = 1usize << i;
        let inner: f64 = (0..(1usize << (s - i)))
            .map(|j| (values[(j + 1) * step] - values[j * step]).powi(2))
            .sum();
        total += inner.sqrt();
    }
    std::f64::consts::SQRT_2 * total
}

pub fn variation_inequalities(seed: u64) -> Result<Outcome> {
    let mut r = rng(seed, Criterion::VariationInequalities);
    let exps = [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0];
    let slack = |rhs: f64| 1e-12 * (1.0 + rhs.abs());
    let mut violations: Vec<String> = Vec::new();
    let mut note = |name: &str, lhs: f64, rhs: f64| {
        if lhs > rhs + slack(rhs) && violations.len() < 5 {
            violations.push(format!("{name}: {lhs} > {rhs}"));
        }
        lhs > rhs + slack(rhs)
    };
    let mut count = 0usize;
    let mut long_short_ratio = 0.0f64;
    for _ in 0..1000 {
        let len = r.gen_range(2..=64usize);
        let values: Vec<f64> = (0..len).map(|_| r.gen_range(-1.0..1.0)).collect();
        let seq = RealSequence::new((1..=len as i64).collect(), values.clone())?;
        let vs: Vec<f64> = exps.iter().map(|&p| var(&seq, p)).collect::<Result<_>>()?;

        for w in vs.windows(2) {
            count += note("r-monotonicity", w[1], w[0]) as usize;
        }
        let sup = seq.sup_abs();
        let j0 = r.gen_range(0..len);
        let min_abs = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        for &v in &vs {
            count += note("sup bound", sup, v + values[j0].abs()) as usize;
            count += note("sup bound (best j0)", sup, v + min_abs) as usize;
        }

        let p = exps[r.gen_range(0..exps.len())];
        let mut cut = [r.gen_range(0..=len as i64 + 1), r.gen_range(0..=len as i64 + 1), r.gen_range(0..=len as i64 + 1)];
        cut.sort_unstable();
        let [u, w, v] = cut;
        if u < w && w < v {
            let whole = seq.restrict(|j| u < j && j < v);
            let left = seq.restrict(|j| u < j && j < w);
            // The term at j = w must sit in one half: with it dropped from both,
            // (1, -1, 1) split at its middle index has V_1 = 4 > 2 sup.
            let right = seq.restrict(|j| w <= j && j < v);
            let rhs = 2.0 * whole.sup_abs() + var(&left, p)? + var(&right, p)?;
            count += note("splitting", var(&whole, p)?, rhs) as usize;
        }

        let keep: Vec<bool> = (0..len).map(|_| r.gen_bool(0.5)).collect();
        let subset = seq.restrict(|j| keep[(j - 1) as usize]);
        count += note("subset", var(&subset, p)?, var(&seq, p)?) as usize;

        for (&p, &v) in exps.iter().zip(&vs) {
            if p >= 2.0 {
                count += note("l2 bound", v, 2.0 * l2(&seq)) as usize;
            }
        }

        let s = r.gen_range(0..=8u32);
        let dy: Vec<f64> = (0..=(1usize << s)).map(|_| r.gen_range(-1.0..1.0)).collect();
        let dseq = RealSequence::new((0..=(1i64 << s)).collect(), dy.clone())?;
        let rhs = dyadic_rhs(&dy, s);
        for p in [2.0, 2.5, 4.0] {
            count += note("dyadic bound", var(&dseq, p)?, rhs) as usize;
        }

        for p in [2.0, 2.5, 4.0] {
            let (long, short) = long_short_split(&seq, p)?;
            let denom = long.value + short.value;
            if denom > 0.0 {
                long_short_ratio = long_short_ratio.max(var(&seq, p)? / denom);
            }
        }
    }
    let ok = count == 0 && long_short_ratio <= 4.0;
    let mut detail = format!(
        "1000 sequences, {count} violations, long/short constant {long_short_ratio:.4} (limit 4)"
    );
    if !violations.is_empty() {
        detail.push_str(&format!("; first: {}", violations.join("; ")));
    }
    done(ok, detail)
}

fn is_prime(q: i64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

pub fn gauss_decay() -> Result<Outcome> {
    let g = quadratic()?;
    let qs: Vec<i64> = (3..=511).step_by(2).collect();
    let maxima: Vec<(f64, RationalPoint)> = qs.par_iter().map(|&q| max_gauss_modulus(q, &g)).collect::<Result<_>>()?;
    let pairs: Vec<(f64, f64)> = qs.iter().zip(&maxima).map(|(&q, (m, _))| (q as f64, *m)).collect();
    let fit = fit_decay(&pairs)?;

    // Direct summation over every reduced point for the smaller moduli.
    let mut oracle_gap = 0.0f64;
    for (&q, (m, _)) in qs.iter().zip(&maxima).take_while(|(&q, _)| q <= 41) {
        let mut best = 0.0f64;
        for a in reduced_residues(q, 2)? {
            best = best.max(gauss_sum(&a, &g)?.norm());
        }
        oracle_gap = oracle_gap.max((best - m).abs());
    }
    let mut prime_gap = 0.0f64;
    for q in qs.iter().copied().filter(|&q| is_prime(q)) {
        let v = gauss_sum(&RationalPoint::new(&[q, 1], q)?, &g)?.norm();
        prime_gap = prime_gap.max((v - (q as f64).powf(-0.5)).abs());
    }
    let ok = fit.delta >= 0.4 && oracle_gap <= 1e-9 && prime_gap <= 1e-9;
    done(
        ok,
        format!(
            "odd q <= 511: fitted delta {:.4} (min 0.4); direct-sum gap {oracle_gap:.2e}; |G - q^-1/2| at primes {prime_gap:.2e}",
            fit.delta
        ),
    )
}

pub fn nu_approximation() -> Result<Outcome> {
    let g = quadratic()?;
    let quad = QuadratureSpec::default();
    let grid = TorusGrid::new(64, 1, 3)?;
    let s_max = grid.recommended_s_max();
    let prepared = prepare_grid(&grid, ApproxTarget::Nu { s_max }, &g, &ArcParams::default(), 1)?;
    let mut pairs = Vec::new();
    for e in 4..=10u32 {
        let n = 1u64 << e;
        let point = sweep_prepared(&prepared, n, &g, &quad)?;
        pairs.push((n as f64, point.sup_error));
    }
    let errs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let positive = errs.iter().all(|&e| e > 0.0);
    let halved = errs[errs.len() - 1] <= 0.5 * errs[0];
    let slope = if positive { fit_decay(&pairs)?.slope } else { f64::NAN };
    done(
        positive && halved && slope <= -0.05,
        format!("64^2 grid, s_max {s_max}, sup errors {} slope {slope:.4} (max -0.05)", fmt_list(&errs)),
    )
}

pub fn major_arc_approximation(seed: u64) -> Result<Outcome> {
    let g = quadratic()?;
    let quad = QuadratureSpec::default();
    let mut r = rng(seed, Criterion::MajorArcApproximation);
    let halves = reduced_residues(2, 2)?;
    let instances: Vec<(RationalPoint, [f64; 2])> = (0..50)
        .map(|_| {
            let c = if r.gen_bool(0.5) {
                RationalPoint::zero(2)
            } else {
                halves.choose(&mut r).expect("nonempty").clone()
            };
            (c, [r.gen_range(-1.0..=1.0), r.gen_range(-1.0..=1.0)])
        })
        .collect();
    let degrees = g.degrees();
    let mut pairs = Vec::new();
    for e in 6..=12u32 {
        let n = 1u64 << e;
        let errors: Vec<f64> = instances
            .par_iter()
            .filter(|(c, _)| c.q as f64 <= (n as f64).powf(0.1) * (1.0 + 1e-12))
            .map(|(c, u)| {
                let theta: Vec<f64> = u
                    .iter()
                    .zip(&degrees)
                    .map(|(&v, &deg)| v * (n as f64).powf(0.1 - f64::from(deg)))
                    .collect();
                let snapped = TorusPoint::from_f64(&theta)?;
                let coords = snapped
                    .coords()
                    .iter()
                    .zip(&c.a)
                    .map(|(t, &a)| t + Ratio::new(i128::from(a), i128::from(c.q)))
                    .collect();
                major_arc_error(&TorusPoint::new(coords)?, n, c, &g, &quad)
            })
            .collect::<Result<_>>()?;
        pairs.push((n as f64, errors.iter().copied().fold(0.0, f64::max)));
    }
    let fit = fit_decay(&pairs)?;
    let errs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    done(
        fit.slope <= -0.2,
        format!("50 instances, N = 2^6..2^12, sup errors {} slope {:.4} (max -0.2)", fmt_list(&errs), fit.slope),
    )
}

pub fn phi_bounds(seed: u64) -> Result<Outcome> {
    let quad = QuadratureSpec::default();
    let mut r = rng(seed, Criterion::PhiBounds);
    let linear = MultiIndexSet::build(1, 1)?;
    let mut closed_gap = 0.0f64;
    for _ in 0..100 {
        let xi = r.gen_range(-0.5..0.5);
        let n = r.gen_range(1..=2000u64);
        let v = phi(&[xi], n, &linear, &quad)?.value;
        closed_gap = closed_gap.max((v - phi_linear_closed_form(xi, n)).norm());
    }

    let g = quadratic()?;
    let n = 64u64;
    let dirs: Vec<[f64; 2]> = (0..8)
        .map(|_| {
            let v = [r.gen_range(-1.0..1.0f64), r.gen_range(-1.0..1.0f64)];
            let m = v[0].abs().max(v[1].abs());
            [v[0] / m, v[1] / m]
        })
        .collect();
    let mut pairs = Vec::new();
    for j in 0..=16 {
        let s = 10f64.powf(j as f64 / 4.0);
        let best = dirs
            .par_iter()
            .map(|d| {
                let xi = [s * d[0] / n as f64, s * d[1] / (n * n) as f64];
                Ok(phi(&xi, n, &g, &quad)?.value.norm() * s.sqrt())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        pairs.push((s, best));
    }
    let constant = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let slope = fit_decay(&pairs)?.slope;
    done(
        closed_gap <= 1e-10 && slope <= 0.05,
        format!(
            "linear closed-form gap {closed_gap:.2e} (tol 1e-10); |Phi| * |N^A xi|^(1/2) <= {constant:.4}, trend slope {slope:.4} (max 0.05)"
        ),
    )
}

pub fn lifting(seed: u64) -> Result<Outcome> {
    let mut r = rng(seed, Criterion::Lifting);
    let p = PolynomialMap::univariate(&[(1, 3), (2, 5)])?;
    let lifted = lift_polynomial_map(&p)?;
    let radius = 4i64;
    let bound = 8 * (radius + 36) + 60;
    let mut mismatches = 0;
    for _ in 0..100 {
        let f = LatticeFunction::<Rational64>::from_fn(vec![-bound], vec![bound], |_| {
            Rational64::new(r.gen_range(-20..=20), r.gen_range(1..=6))
        })?;
        let n = r.gen_range(1..=6u64);
        let x = r.gen_range(-50..=50i64);
        let u = [r.gen_range(-radius..=radius), r.gen_range(-radius..=radius)];
        let lu = lifted.apply(&[i128::from(u[0]), i128::from(u[1])])?[0] as i64;
        let lhs = average_at(|y| f.get(y), &[x + lu], &p.kernel(n)?);
        let trunc = radius + (n * n) as i64;
        let shifted = |z: &[i64]| {
            if z.iter().all(|c| c.abs() <= trunc) {
                let l = lifted
                    .apply(&[i128::from(z[0]), i128::from(z[1])])
                    .expect("small vector")[0] as i64;
                f.get(&[x + l])
            } else {
                <Rational64 as Zero>::zero()
            }
        };
        let rhs = average_at(shifted, &u, &lifted.gamma.kernel(n)?);
        if lhs != rhs {
            mismatches += 1;
        }
    }
    done(
        mismatches == 0,
        format!("P(n) = 5n^2 + 3n, 100 rational instances, {mismatches} mismatches"),
    )
}

pub fn transference(seed: u64) -> Result<Outcome> {
    let mut r = rng(seed, Criterion::Transference);
    let maps = [
        PolynomialMap::univariate(&[(2, 1)])?,
        PolynomialMap::univariate(&[(1, 3), (2, 5)])?,
        PolynomialMap::new(1, vec![vec![(vec![1], 1)], vec![(vec![2], 1)]])?,
    ];
    let mut worst = 0.0f64;
    let mut checked = 0u64;
    for i in 0..100 {
        let p = &maps[i % maps.len()];
        let n = r.gen_range(1..=4u64);
        let report = if p.d0() == 1 {
            let lo = r.gen_range(-100..100i64);
            let f = LatticeFunction::<f64>::from_fn(vec![lo], vec![lo + 127], |_| r.gen_range(-1.0..1.0))?;
            transference_check(&f, n, p)?
        } else {
            let f = LatticeFunction::<f64>::from_fn(vec![0, 0], vec![31, 31], |_| r.gen_range(-1.0..1.0))?;
            transference_check(&f, n, p)?
        };
        worst = worst.max(report.max_abs_diff);
        checked += report.points_checked;
    }
    done(
        worst <= 1e-12,
        format!("100 instances, {checked} points, max |A_N f - M_N f| {worst:.2e} (tol 1e-12)"),
    )
}

fn maximal_ratio(f: &LatticeFunction<f64>, nmax: u64, p: &PolynomialMap) -> Result<f64> {
    let ns: Vec<u64> = (0..).map(|j| 1u64 << j).take_while(|&n| n <= nmax).collect();
    Ok(maximal_function(f, &ns, p)?.norm_lp(2.0) / f.norm_lp(2.0))
}

pub fn maximal_stability(seed: u64) -> Result<Outcome> {
    let mut r = rng(seed, Criterion::MaximalStability);
    let square = PolynomialMap::univariate(&[(2, 1)])?;
    let cubic = PolynomialMap::univariate(&[(2, 1), (3, 1_000_000)])?;
    let mut growth = 0.0f64;
    let (mut lo_ratio, mut hi_ratio) = (f64::INFINITY, 0.0f64);
    for _ in 0..50 {
        let w = r.gen_range(64..=256i64);
        let f = LatticeFunction::<f64>::from_fn(vec![0], vec![w - 1], |_| r.gen_range(0.0..1.0))?;
        let r16 = maximal_ratio(&f, 16, &square)?;
        let r64 = maximal_ratio(&f, 64, &square)?;
        let c64 = maximal_ratio(&f, 64, &cubic)?;
        growth = growth.max(r64 / r16);
        lo_ratio = lo_ratio.min(c64 / r64);
        hi_ratio = hi_ratio.max(c64 / r64);
    }
    let ok = growth <= 1.25 && lo_ratio >= 1.0 / 1.5 && hi_ratio <= 1.5;
    done(
        ok,
        format!(
            "50 functions: max R(64)/R(16) {growth:.4} (limit 1.25); R(n^2 + 10^6 n^3)/R(n^2) in [{lo_ratio:.4}, {hi_ratio:.4}] (limit 1.5x)"
        ),
    )
}

pub fn weyl_decay() -> Result<Outcome> {
    let alpha = 2f64.sqrt() - 1.0;
    let sys = DynamicalSystem::rotation_with_kronecker(vec![alpha], 4)?;
    let f = Observable::Character { freq: vec![1] };
    let p = PolynomialMap::univariate(&[(2, 1)])?;
    let g = quadratic()?;
    let xi = TorusPoint::from_f64(&[0.0, alpha])?;
    let grid = dyadic_grid(6, 13);
    let mut mods = Vec::new();
    let mut oracle_gap = 0.0f64;
    for &n in &grid {
        let values = ergodic_average(&sys, &f, n, &p)?;
        let weyl = multiplier_m(&xi, n, &g)?.value.norm();
        for v in &values {
            oracle_gap = oracle_gap.max((v.norm() - weyl).abs());
        }
        mods.push(values[0].norm());
    }
    let decreasing = mods.windows(2).filter(|w| w[1] < w[0]).count();
    let at_4096 = mods[grid.iter().position(|&n| n == 4096).expect("on grid")];
    done(
        at_4096 < 0.1 && decreasing >= 5 && oracle_gap <= 1e-9,
        format!(
            "|A_N f| for N = 2^6..2^13: {}; {decreasing}/7 decreasing steps; |A_4096 f| = {at_4096:.4}; direct-sum gap {oracle_gap:.2e}",
            fmt_list(&mods)
        ),
    )
}

pub fn bump_kernels(seed: u64) -> Result<Outcome> {
    let a = quadratic()?.degree_matrix();
    let mut r = rng(seed, Criterion::BumpKernels);
    let mut norms = Vec::new();
    for t in [1.0, 2.0, 4.0] {
        norms.push(bump_kernel_l1(t, &a, &kernel_grid(t, &a, 128))?);
    }
    let kernel_ok = norms.iter().all(|&v| v <= 1.05);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..20 {
        let t = [1.0, 2.0, 4.0][r.gen_range(0..3)];
        let u = [r.gen_range(-8.0..8.0), r.gen_range(-8.0..8.0)];
        let v = bump_difference_l1(t, &u, &a, &kernel_grid(t, &a, 128))?;
        worst_excess = worst_excess.max(v - dilated_shift_norm(t, &u, &a));
    }
    let diff_ok = worst_excess <= 0.05;
    done(
        kernel_ok && diff_ok,
        format!(
            "l1 of kernel for t = 1, 2, 4: {} (limit 1.05); difference kernels exceed |t^-A u| by at most {worst_excess:.4} (limit 0.05)",
            fmt_list(&norms)
        ),
    )
}

pub fn residue_classes(seed: u64) -> Result<Outcome> {
    let a = quadratic()?.degree_matrix();
    let q = factorial_modulus(0)?.to_u64().expect("Q_0 = 2") as usize;
    let m = 64usize;
    let shape = vec![m, m];
    let mut r = rng(seed, Criterion::ResidueClasses);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut spectrum = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let xi = frequency(&shape, &[i, j]).to_f64();
                let centered: Vec<f64> = xi.iter().map(|&v| if v > 0.5 { v - 1.0 } else { v }).collect();
                let scaled: Vec<f64> = centered
                    .iter()
                    .zip(&a.weights)
                    .map(|(&v, &w)| v * 4f64.powi(w as i32))
                    .collect();
                let c = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
                spectrum.push(c * bump(&scaled));
            }
        }
        let gfun = CyclicFunction::from_spectrum(shape.clone(), spectrum)?;
        let mut norms = vec![0.0f64; q * q];
        for x0 in 0..m {
            for x1 in 0..m {
                norms[(x0 % q) * q + x1 % q] += gfun.get(&[x0, x1]).norm_sqr();
            }
        }
        let hi = norms.iter().copied().fold(0.0, f64::max).sqrt();
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min).sqrt();
        worst = worst.max(hi / lo);
    }
    done(
        worst <= 4.0,
        format!("Q_0 = {q}, 50 band-limited functions on Z_64^2, max class-norm ratio {worst:.4} (limit 4)"),
    )
}

pub fn single_term() -> Result<Outcome> {
    let g = quadratic()?;
    let grid = TorusGrid::aligned(128)?;
    let points = grid.points(2, 1 << 20)?;
    let mut bad = 0usize;
    let mut nonempty = 0usize;
    for s in 0..=3u32 {
        let family = rational_family(s, &g)?;
        let (b, ne) = points
            .par_iter()
            .map(|xi| {
                let slow = level_terms_exhaustive(xi, &family, s, &g);
                let fast = level_terms(xi, s, &g)?;
                Ok(((slow.len() > 1 || fast != slow) as usize, (!slow.is_empty()) as usize))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold((0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
        bad += b;
        nonempty += ne;
    }
    done(
        bad == 0,
        format!("128^2 grid, s <= 3: {bad} counterexamples, {nonempty} (point, level) pairs with a term"),
    )
}
