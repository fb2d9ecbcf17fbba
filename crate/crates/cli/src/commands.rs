use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use polyergo::averaging::{average_direct, average_transform, maximal_function, multiplier_m, phi, KernelSource};
use polyergo::circle::multipliers::GRID_POINT_CAP;
use polyergo::circle::{
    classify_arc, split_schedule, lambda_mult, nu, omega, refine_arc_membership, Assignment, NuOptions,
    ShellMembership, TorusGrid,
};
use polyergo::dynamics::{convergence_report, dyadic_grid};
use polyergo::expsum::{fit_decay, gauss_sum, max_gauss_modulus, reduced_residues};
use polyergo::harness::run_suite;
use polyergo::rational::{centered, ratio_to_f64};
use polyergo::variation::{long_short_split, variation_bruteforce, variation_exact, variation_with_sup};
use polyergo::{
    lift_polynomial_map, ArcClass, ArcParams, DynamicalSystem, LatticeFunction, MultiIndexSet, Observable,
    QuadratureSpec, RealSequence, TorusPoint, VariationResult,
};

use crate::args::*;
use crate::output::{complex_cells, float, join, Run};
use crate::poly::parse_poly;
use crate::{Status, UsageError};

fn build_gamma(g: &GammaSpec) -> Result<MultiIndexSet> {
    Ok(MultiIndexSet::build(g.k, g.n0)?)
}

fn config_of(args: &impl Serialize) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(args)?)
}

fn coord_header(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}{i}")).collect()
}

fn header_refs(h: &[String]) -> Vec<&str> {
    h.iter().map(String::as_str).collect()
}

pub fn gamma(a: GammaArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "gamma", config_of(&a)?, seed)?;
    let (gamma, lifted) = match &a.poly {
        Some(spec) => {
            let p = parse_poly(spec)?;
            let lifted = lift_polynomial_map(&p)?;
            (lifted.gamma.clone(), Some((p, lifted)))
        }
        None => (build_gamma(&a.gamma)?, None),
    };
    let degrees = gamma.degrees();
    let rows = gamma
        .indices()
        .iter()
        .zip(&degrees)
        .enumerate()
        .map(|(i, (g, deg))| vec![(i + 1).to_string(), join(g, ";"), deg.to_string()]);
    run.csv(".csv", &["index", "gamma", "degree"], rows)?;
    run.result("d", gamma.d())?;
    run.result("k", gamma.k())?;
    if let Some((p, lifted)) = lifted {
        let mut header = vec!["component".to_string()];
        header.extend(gamma.indices().iter().map(|g| format!("y^{}", join(g, ";"))));
        let rows = lifted
            .linear_map
            .iter()
            .enumerate()
            .map(|(j, row)| std::iter::once((j + 1).to_string()).chain(row.iter().map(|c| c.to_string())).collect());
        run.csv(".lift.csv", &header_refs(&header), rows)?;
        run.result("polynomial", serde_json::from_str::<serde_json::Value>(&p.to_json())?)?;
    }
    run.finish()?;
    Ok(Status::Ok)
}

fn random_input(a: &AvgArgs, d: usize, seed: u64) -> Result<LatticeFunction<f64>> {
    let lo = a.lo.clone().unwrap_or_else(|| vec![0; d]);
    let hi = a.hi.clone().unwrap_or_else(|| vec![63; d]);
    if lo.len() != d || hi.len() != d {
        return Err(UsageError(format!("--lo and --hi need {d} coordinates")).into());
    }
    let mut f = LatticeFunction::<f64>::zeros(lo.clone(), hi.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..a.nonzeros {
        let x: Vec<i64> = lo.iter().zip(&hi).map(|(&l, &h)| rng.gen_range(l..=h)).collect();
        f.set(&x, rng.gen_range(-1.0..1.0))?;
    }
    Ok(f)
}

pub fn avg(a: AvgArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "avg", config_of(&a)?, seed)?;
    if a.n.is_empty() || a.n.contains(&0) {
        return Err(UsageError("--n needs positive values".into()).into());
    }
    let source: Box<dyn KernelSource + Sync> = if a.canonical {
        Box::new(build_gamma(&a.gamma)?)
    } else {
        Box::new(parse_poly(&a.poly)?)
    };
    let d = if a.canonical { build_gamma(&a.gamma)?.d() } else { parse_poly(&a.poly)?.d0() };
    let f = match &a.input {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            LatticeFunction::<f64>::read_from(BufReader::new(file))?
        }
        None => random_input(&a, d, seed)?,
    };
    if f.dim() != d {
        return Err(UsageError(format!("input has dimension {}, the mapping needs {d}", f.dim())).into());
    }
    let mut header = vec!["n".to_string()];
    header.extend(coord_header("x", d));
    header.extend(["re", "im"].map(String::from));
    let mut rows = Vec::new();
    let mut norms = Vec::new();
    for &n in &a.n {
        let out_fn: LatticeFunction<Complex64> = run.time(&format!("n={n}"), || -> Result<_> {
            Ok(match a.method {
                AvgMethod::Direct => average_direct(&f, n, source.as_ref())?.map(|v| Complex64::new(*v, 0.0)),
                AvgMethod::Transform => average_transform(&f, n, source.as_ref(), None)?,
            })
        })?;
        norms.push(json!({"n": n, "l2": out_fn.norm_lp(2.0), "sup": out_fn.norm_sup()}));
        for x in out_fn.box_points() {
            let v = out_fn.get(&x);
            let mut row = vec![n.to_string()];
            row.extend(x.iter().map(i64::to_string));
            row.extend([float(v.re), float(v.im)]);
            rows.push(row);
        }
    }
    run.csv(".csv", &header_refs(&header), rows)?;
    run.result("input_l2", f.norm_lp(2.0))?;
    run.result("norms", norms)?;
    if a.maximal {
        let abs = f.map(|v| v.abs());
        let m = run.time("maximal", || maximal_function(&abs, &a.n, source.as_ref()))?;
        let mut header = coord_header("x", d);
        header.push("value".into());
        let rows = m.box_points().map(|x| {
            let v = m.get(&x);
            x.iter().map(i64::to_string).chain(std::iter::once(float(v))).collect()
        });
        run.csv(".maximal.csv", &header_refs(&header), rows)?;
        run.result("maximal_ratio_l2", m.norm_lp(2.0) / f.norm_lp(2.0))?;
    }
    run.finish()?;
    Ok(Status::Ok)
}

fn read_sequence(path: &Path) -> Result<RealSequence> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let (mut idx, mut vals) = (Vec::new(), Vec::new());
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = || UsageError(format!("{}: line {} is not `value` or `index,value`", path.display(), line + 1));
        match rec.len() {
            1 => {
                idx.push(idx.len() as i64);
                vals.push(rec[0].parse::<f64>().map_err(|_| bad())?);
            }
            2 => {
                idx.push(rec[0].parse::<i64>().map_err(|_| bad())?);
                vals.push(rec[1].parse::<f64>().map_err(|_| bad())?);
            }
            _ => return Err(bad().into()),
        }
    }
    Ok(RealSequence::new(idx, vals)?)
}

fn witness_cell(v: &VariationResult) -> String {
    v.witness.iter().map(|b| join(b, ";")).collect::<Vec<_>>().join("|")
}

pub fn variation(a: VariationArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "variation", config_of(&a)?, seed)?;
    let seq = match &a.input {
        Some(path) => read_sequence(path)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<f64> = (0..a.len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            RealSequence::new((1..=a.len as i64).collect(), vals)?
        }
    };
    let mut results = Vec::new();
    for &r in &a.r {
        match a.mode {
            VariationMode::Exact => results.push(variation_exact(&seq, r)?),
            VariationMode::Brute => results.push(variation_bruteforce(&seq, r)?),
            VariationMode::WithSup => results.push(variation_with_sup(&seq, r)?),
            VariationMode::LongShort => {
                let (long, short) = long_short_split(&seq, r)?;
                results.push(long);
                results.push(short);
            }
        }
    }
    let rows = results
        .iter()
        .map(|v| vec![float(v.r), format!("{:?}", v.kind).to_lowercase(), float(v.value), witness_cell(v)]);
    run.csv(".csv", &["r", "kind", "value", "witness"], rows)?;
    run.result("length", seq.len())?;
    run.result("sup_abs", seq.sup_abs())?;
    run.finish()?;
    Ok(Status::Ok)
}

pub fn gauss(a: GaussArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "gauss", config_of(&a)?, seed)?;
    if a.qmin < 1 || a.qmax < a.qmin {
        return Err(UsageError("need 1 <= qmin <= qmax".into()).into());
    }
    let g = build_gamma(&a.gamma)?;
    let qs: Vec<i64> = (a.qmin..=a.qmax).collect();
    let per_q: Vec<Vec<Vec<String>>> = run.time("sums", || {
        qs.par_iter()
            .map(|&q| {
                reduced_residues(q, g.d())?
                    .iter()
                    .map(|ap| {
                        let v = gauss_sum(ap, &g)?;
                        let mut row = vec![q.to_string(), join(&ap.a, ";")];
                        row.extend(complex_cells(v));
                        Ok(row)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()
    })?;
    let count: usize = per_q.iter().map(Vec::len).sum();
    run.csv(".csv", &["q", "a", "re", "im", "abs"], per_q.into_iter().flatten())?;
    run.result("rows", count)?;
    run.finish()?;
    Ok(Status::Ok)
}

pub fn decay(a: DecayArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "decay", config_of(&a)?, seed)?;
    if a.qmin < 1 || a.qmax < a.qmin {
        return Err(UsageError("need 1 <= qmin <= qmax".into()).into());
    }
    let g = build_gamma(&a.gamma)?;
    let qs: Vec<i64> = (a.qmin..=a.qmax).filter(|q| !a.odd || q % 2 == 1).collect();
    let maxima = run.time("maxima", || {
        qs.par_iter().map(|&q| max_gauss_modulus(q, &g)).collect::<polyergo::Result<Vec<_>>>()
    })?;
    let rows = qs
        .iter()
        .zip(&maxima)
        .map(|(q, (m, ap))| vec![q.to_string(), float(*m), join(&ap.a, ";")]);
    run.csv(".csv", &["q", "max_abs", "argmax_a"], rows)?;
    let pairs: Vec<(f64, f64)> = qs.iter().zip(&maxima).map(|(&q, (m, _))| (q as f64, *m)).collect();
    let fit = fit_decay(&pairs)?;
    run.result("fit", json!({"slope": fit.slope, "intercept": fit.intercept, "delta": fit.delta}))?;
    run.result("delta_hat", fit.delta)?;
    println!("fitted delta {:.6}", fit.delta);
    run.finish()?;
    Ok(Status::Ok)
}

fn grid_points(spec: &GridSpec, d: usize) -> Result<Vec<TorusPoint>> {
    Ok(TorusGrid::new(spec.grid, spec.shift_num, spec.shift_den)?.points(d, GRID_POINT_CAP)?)
}

fn xi_cells(xi: &TorusPoint) -> Vec<String> {
    xi.to_f64().into_iter().map(float).collect()
}

pub fn arcs(a: ArcsArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "arcs", config_of(&a)?, seed)?;
    let g = build_gamma(&a.gamma)?;
    let params = ArcParams::new(a.alpha, a.beta, None)?;
    let points = grid_points(&a.grid, g.d())?;
    let rows: Vec<Vec<String>> = run.time("classify", || {
        points
            .par_iter()
            .enumerate()
            .map(|(i, xi)| {
                let mut row = vec![i.to_string()];
                row.extend(xi_cells(xi));
                match classify_arc(xi, a.n, &params, &g)? {
                    ArcClass::Major(c) => row.extend(["major".into(), c.q.to_string(), join(&c.a, ";")]),
                    ArcClass::Minor => row.extend(["minor".into(), String::new(), String::new()]),
                }
                if let Some(n) = a.shell_n {
                    row.push(match refine_arc_membership(xi, n, a.shell_s, a.u_min, &g)? {
                        ShellMembership::Center { .. } => "center".into(),
                        ShellMembership::Shell { u, .. } => u.to_string(),
                        ShellMembership::None => String::new(),
                    });
                }
                Ok(row)
            })
            .collect::<polyergo::Result<_>>()
    })?;
    let major = rows.iter().filter(|r| r[g.d() + 1] == "major").count();
    let mut header = vec!["index".to_string()];
    header.extend(coord_header("xi", g.d()));
    header.extend(["class", "q", "a"].map(String::from));
    if a.shell_n.is_some() {
        header.push("shell".into());
    }
    run.csv(".csv", &header_refs(&header), rows)?;
    run.result("major", major)?;
    run.result("minor", points.len() - major)?;
    run.result("max_denominator", params.max_denominator(a.n))?;
    run.finish()?;
    Ok(Status::Ok)
}

fn centered_f64(xi: &TorusPoint) -> Vec<f64> {
    xi.coords().iter().map(|c| ratio_to_f64(&centered(*c))).collect()
}

pub fn multiplier(a: MultiplierArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "multiplier", config_of(&a)?, seed)?;
    let g = build_gamma(&a.gamma)?;
    let quad = QuadratureSpec::default();
    let points = match &a.xi {
        Some(xi) if xi.len() == g.d() => match a.xi_den {
            Some(den) => {
                if xi.iter().any(|v| v.fract() != 0.0) {
                    return Err(UsageError("with --xi-den the --xi entries are integer numerators".into()).into());
                }
                let nums: Vec<i128> = xi.iter().map(|&v| v as i128).collect();
                vec![TorusPoint::from_fractions(&nums, i128::from(den))?]
            }
            None => vec![TorusPoint::from_f64(xi)?],
        },
        Some(xi) => return Err(UsageError(format!("--xi has {} coordinates, d = {}", xi.len(), g.d())).into()),
        None => grid_points(&a.grid, g.d())?,
    };
    let opts = NuOptions { s_max: a.s_max, ..NuOptions::default() };
    let evaluated: Vec<(Vec<String>, f64)> = run.time("evaluate", || {
        points
            .par_iter()
            .enumerate()
            .map(|(i, xi)| {
                let value = match a.kind {
                    MultiplierKindArg::M => multiplier_m(xi, a.n, &g)?,
                    MultiplierKindArg::Phi => phi(&centered_f64(xi), a.n, &g, &quad)?,
                    MultiplierKindArg::Nu => nu(xi, a.n, &opts, &g)?.value,
                    MultiplierKindArg::Omega => omega(xi, a.n, a.t, &g, &quad)?,
                    MultiplierKindArg::Lambda => lambda_mult(xi, a.n, a.t, &g, &quad)?,
                };
                let mut row = vec![i.to_string()];
                row.extend(xi_cells(xi));
                row.extend(complex_cells(value.value));
                row.push(
                    value
                        .provenance
                        .as_ref()
                        .map(|c| format!("{}/{}", join(&c.a, ";"), c.q))
                        .unwrap_or_default(),
                );
                let mut err = 0.0;
                if a.error {
                    err = (multiplier_m(xi, a.n, &g)?.value - value.value).norm();
                    row.push(float(err));
                }
                Ok((row, err))
            })
            .collect::<polyergo::Result<_>>()
    })?;
    let mut header = vec!["index".to_string()];
    header.extend(coord_header("xi", g.d()));
    header.extend(["re", "im", "abs", "center"].map(String::from));
    if a.error {
        header.push("error".into());
        let sup = evaluated.iter().map(|(_, e)| *e).fold(0.0, f64::max);
        run.result("sup_error", sup)?;
    }
    run.csv(".csv", &header_refs(&header), evaluated.into_iter().map(|(r, _)| r))?;
    run.result("points", points.len())?;
    run.finish()?;
    Ok(Status::Ok)
}

fn delta_from_manifest(path: &Path) -> Result<f64> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    v.pointer("/results/delta_hat")
        .and_then(serde_json::Value::as_f64)
        .ok_or_else(|| UsageError(format!("{} has no results.delta_hat", path.display())).into())
}

fn assignment_cell(a: Assignment) -> String {
    match a {
        Assignment::Zero => "zero".into(),
        Assignment::FullAverage => "full".into(),
        Assignment::Omega { t } => format!("omega:{t}"),
    }
}

pub fn schedule(a: ScheduleArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "schedule", config_of(&a)?, seed)?;
    let (delta, source) = match (a.delta_hat, &a.delta_manifest) {
        (Some(v), _) => (v, "flag".to_string()),
        (None, Some(p)) => (delta_from_manifest(p)?, p.display().to_string()),
        (None, None) => return Err(UsageError("give --delta-hat or --delta-manifest".into()).into()),
    };
    let d = match a.d {
        Some(d) => d,
        None => build_gamma(&a.gamma)?.d(),
    };
    let s = split_schedule(a.lambda, a.epsilon, delta, d)?;
    run.json(".json", &s)?;
    run.csv(
        ".csv",
        &["j", "assignment"],
        (0..=a.j_max).map(|j| vec![j.to_string(), assignment_cell(s.assignment(j))]),
    )?;
    run.result("delta_hat", delta)?;
    run.result("delta_hat_source", source)?;
    run.result("t", s.t)?;
    run.result("kappa_t", s.kappa_t)?;
    run.result("cutoff", &s.cutoff)?;
    run.finish()?;
    Ok(Status::Ok)
}

pub fn ergodic(a: ErgodicArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "ergodic", config_of(&a)?, seed)?;
    let p = parse_poly(&a.poly)?;
    let sys = match a.system {
        SystemKind::Rotation => DynamicalSystem::rotation_with_kronecker(a.alpha.clone(), a.samples)?,
        SystemKind::Cyclic => DynamicalSystem::cyclic(a.modulus.clone())?,
    };
    let f = match a.observable {
        ObservableKind::Character => Observable::Character { freq: a.freq.clone() },
        ObservableKind::Indicator => Observable::Indicator { point: a.point.clone() },
        ObservableKind::Constant => Observable::Constant { value: Complex64::new(1.0, 0.0) },
    };
    let grid = dyadic_grid(a.n_lo, a.n_hi);
    let trace = run.time("averages", || convergence_report(&sys, &f, &p, &grid, a.r))?;
    let mut rows = Vec::new();
    for (s, values) in trace.values.iter().enumerate() {
        for (n, v) in grid.iter().zip(values) {
            let mut row = vec![s.to_string(), n.to_string()];
            row.extend(complex_cells(*v));
            rows.push(row);
        }
    }
    run.csv(".csv", &["sample", "n", "re", "im", "abs"], rows)?;
    run.result("variation", &trace.variation)?;
    run.result("tail_oscillation", &trace.tail_oscillation)?;
    run.result("head_oscillation", &trace.head_oscillation)?;
    run.result("non_cauchy", &trace.non_cauchy)?;
    run.finish()?;
    Ok(Status::Ok)
}

pub fn verify(a: VerifyArgs, out: &Path, seed: u64) -> Result<Status> {
    let mut run = Run::new(out, "verify", config_of(&a)?, seed)?;
    let reports = run.time("suite", || run_suite(&a.suite, seed))?;
    for r in &reports {
        println!("{r}");
    }
    let rows = reports.iter().map(|r| {
        vec![
            r.id.to_string(),
            r.name.clone(),
            if r.passed { "pass" } else { "fail" }.to_string(),
            r.detail.clone(),
        ]
    });
    run.csv(".csv", &["id", "name", "verdict", "detail"], rows)?;
    run.json(".json", &reports)?;
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    run.result("failed", &failed)?;
    run.result("passed", reports.len() - failed.len())?;
    run.finish()?;
    Ok(if failed.is_empty() { Status::Ok } else { Status::ChecksFailed })
}
