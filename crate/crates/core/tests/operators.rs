use num_complex::Complex64;
use num_rational::Rational64;
use polyergo::averaging::{
    average_direct, average_transform, build_kernel, maximal_function, multiplier_m, KernelSource,
};
use polyergo::{LatticeFunction, MultiIndexSet, PolynomialMap, TorusPoint};
use proptest::prelude::*;

fn quadratic() -> MultiIndexSet {
    MultiIndexSet::build(1, 2).unwrap()
}

#[test]
fn kernel_mass_is_one() {
    let g = quadratic();
    for n in 1..=12 {
        let k = build_kernel(n, &g).unwrap();
        let mass: u64 = k.atoms.iter().map(|(_, m)| *m).sum();
        assert_eq!(mass, k.total);
        assert_eq!(k.total, n);
    }
}

#[test]
fn average_of_point_mass_spreads_over_the_image() {
    let p = PolynomialMap::univariate(&[(2, 1)]).unwrap();
    let f = LatticeFunction::point_mass(&[0], Rational64::from_integer(1));
    let avg = average_direct(&f, 4, &p).unwrap();
    // M_4 delta_0 (x) = #{n <= 4 : x = n^2} / 4.
    for x in [1, 4, 9, 16] {
        assert_eq!(avg.get(&[x]), Rational64::new(1, 4));
    }
    assert_eq!(avg.get(&[2]), Rational64::from_integer(0));
    assert_eq!(avg.sum(), Rational64::from_integer(1));
}

#[test]
fn multiplier_is_transform_of_kernel() {
    let g = quadratic();
    let n = 7;
    let k = g.kernel(n).unwrap();
    let xi = TorusPoint::from_fractions(&[3, 11], 17).unwrap();
    let direct: Complex64 = k
        .atoms
        .iter()
        .map(|(z, m)| {
            let t: f64 = xi.to_f64().iter().zip(z).map(|(a, &b)| a * b as f64).sum();
            polyergo::averaging::e(t) * (*m as f64)
        })
        .sum::<Complex64>()
        / n as f64;
    let m = multiplier_m(&xi, n, &g).unwrap().value;
    assert!((m - direct).norm() < 1e-12);
}

#[test]
fn maximal_function_dominates_each_average() {
    let p = PolynomialMap::univariate(&[(2, 1)]).unwrap();
    let f = LatticeFunction::<f64>::from_fn(vec![0], vec![40], |x| ((x[0] * 7) % 5) as f64).unwrap();
    let ns = [1, 2, 4, 8];
    let m = maximal_function(&f, &ns, &p).unwrap();
    for &n in &ns {
        let a = average_direct(&f, n, &p).unwrap();
        for x in a.box_points() {
            assert!(a.get(&x).abs() <= m.get(&x) + 1e-12);
        }
    }
}

#[test]
fn lattice_roundtrip_through_bytes() {
    let f = LatticeFunction::<f64>::from_fn(vec![-2, 3], vec![1, 5], |x| (x[0] * 10 + x[1]) as f64).unwrap();
    let mut buf = Vec::new();
    f.write_to(&mut buf).unwrap();
    let g = LatticeFunction::<f64>::read_from(&buf[..]).unwrap();
    assert_eq!(f, g);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_path_agrees_with_direct(
        vals in prop::collection::vec(-1.0f64..1.0, 1..12),
        n in 1u64..6,
    ) {
        let g = quadratic();
        let f = LatticeFunction::<f64>::from_fn(vec![0, 0], vec![3, 2], |x| {
            vals[((x[0] * 3 + x[1]) as usize) % vals.len()]
        }).unwrap();
        let a = average_direct(&f, n, &g).unwrap();
        let b = average_transform(&f, n, &g, None).unwrap();
        for x in a.box_points() {
            prop_assert!((b.get(&x) - a.get(&x)).norm() <= 1e-10);
        }
    }

    #[test]
    fn averages_are_linear_and_contract_l1(
        u in prop::collection::vec(-5i64..5, 16),
        v in prop::collection::vec(-5i64..5, 16),
        n in 1u64..8,
    ) {
        let p = PolynomialMap::univariate(&[(1, 2), (2, 1)]).unwrap();
        let mk = |w: &Vec<i64>| LatticeFunction::<Rational64>::from_fn(vec![0], vec![15], |x| {
            Rational64::from_integer(w[x[0] as usize])
        }).unwrap();
        let (f, g) = (mk(&u), mk(&v));
        let sum = LatticeFunction::<Rational64>::from_fn(vec![0], vec![15], |x| f.get(x) + g.get(x)).unwrap();
        let (af, ag, asum) = (
            average_direct(&f, n, &p).unwrap(),
            average_direct(&g, n, &p).unwrap(),
            average_direct(&sum, n, &p).unwrap(),
        );
        for x in asum.box_points() {
            prop_assert_eq!(asum.get(&x), af.get(&x) + ag.get(&x));
        }
        let fl = f.map(|r| *r.numer() as f64 / *r.denom() as f64);
        let afl = average_direct(&fl, n, &p).unwrap();
        prop_assert!(afl.norm_lp(1.0) <= fl.norm_lp(1.0) + 1e-9);
    }

    #[test]
    fn multiplier_is_bounded_and_one_at_zero(a in 0i128..97, b in 0i128..97, n in 1u64..50) {
        let g = quadratic();
        let m = multiplier_m(&TorusPoint::from_fractions(&[a, b], 97).unwrap(), n, &g).unwrap().value;
        prop_assert!(m.norm() <= 1.0 + 1e-12);
        let z = multiplier_m(&TorusPoint::zero(2), n, &g).unwrap().value;
        prop_assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
