use num_complex::Complex64;
use num_rational::Rational64;
use polyergo::dynamics::{
    convergence_report, cyclic_average_rational, dyadic_grid, ergodic_average, transference_check,
};
use polyergo::variation::{variation_exact, RealSequence};
use polyergo::{DynamicalSystem, LatticeFunction, Observable, PolynomialMap};

#[test]
fn constant_observable_is_fixed() {
    let sys = DynamicalSystem::cyclic(vec![7]).unwrap();
    let p = PolynomialMap::univariate(&[(2, 1)]).unwrap();
    let f = Observable::Constant { value: Complex64::new(2.5, -1.0) };
    for v in ergodic_average(&sys, &f, 13, &p).unwrap() {
        assert!((v - Complex64::new(2.5, -1.0)).norm() < 1e-12);
    }
}

#[test]
fn cyclic_averages_count_square_residues() {
    // Squares mod 5 hit 1 and 4 twice each and 0 once over n = 1..5.
    let p = PolynomialMap::univariate(&[(2, 1)]).unwrap();
    let mut f = vec![Rational64::from_integer(0); 5];
    f[0] = Rational64::from_integer(1);
    let avg = cyclic_average_rational(&[5], &f, 5, &p).unwrap();
    assert_eq!(avg[0], Rational64::new(1, 5));
    assert_eq!(avg[4], Rational64::new(2, 5));
    assert_eq!(avg[1], Rational64::new(2, 5));
    assert_eq!(avg[2], Rational64::from_integer(0));
}

#[test]
fn transference_matches_on_a_plane() {
    let p = PolynomialMap::new(1, vec![vec![(vec![1], 1)], vec![(vec![2], 1)]]).unwrap();
    let f = LatticeFunction::<f64>::from_fn(vec![0, 0], vec![20, 20], |x| ((x[0] * 3 + x[1] * 5) % 7) as f64).unwrap();
    let report = transference_check(&f, 3, &p).unwrap();
    assert!(report.points_checked > 0);
    assert!(report.max_abs_diff <= 1e-12);
}

#[test]
fn rotation_averages_settle() {
    let sys = DynamicalSystem::rotation_with_kronecker(vec![2f64.sqrt() - 1.0], 3).unwrap();
    let p = PolynomialMap::univariate(&[(2, 1)]).unwrap();
    let f = Observable::Character { freq: vec![1] };
    let trace = convergence_report(&sys, &f, &p, &dyadic_grid(4, 11), 2.5).unwrap();
    assert_eq!(trace.values.len(), 3);
    assert!(trace.non_cauchy.is_empty());
    for (i, row) in trace.values.iter().enumerate() {
        let seq = RealSequence::complex((0..row.len() as i64).collect(), row.clone()).unwrap();
        assert!((variation_exact(&seq, 2.5).unwrap().value - trace.variation[i]).abs() < 1e-12);
    }
}
