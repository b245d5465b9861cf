use num_complex::Complex64;
use ocft::charpoly::{moment_m1_closed, MomentQuery};
use ocft::grassmann::Multivector;
use ocft::haar::{sample_orthogonal, Estimate, RngStream};
use ocft::jacobi::{alpha_components, alpha_components_quadrature, h_closed, jacobi_quadrature, JacobiQuery};
use ocft::linalg::{
    beta, determinant, elementary_symmetric_all, log_beta, pfaffian, ComplexMatrix, RealVector,
};
use ocft::quadrature::{adaptive_gk, AdaptiveConfig};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Even order `2..=10` and a random complex skew matrix of that order.
fn skew_matrix() -> impl Strategy<Value = ComplexMatrix> {
    (1usize..=5).prop_flat_map(|h| {
        let n = 2 * h;
        prop::collection::vec(complex(), n * (n - 1) / 2).prop_map(move |w| {
            let mut a = ComplexMatrix::zeros(n, n);
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    a[(i, j)] = w[k];
                    a[(j, i)] = -w[k];
                    k += 1;
                }
            }
            a
        })
    })
}

fn square(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(), n * n).prop_map(move |w| ComplexMatrix::from_row_major(n, n, w).unwrap())
}

fn rel_close(x: Complex64, y: Complex64, rtol: f64) -> bool {
    (x - y).norm() <= rtol * x.norm().max(y.norm()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfaffian_squares_to_determinant(a in skew_matrix()) {
        let p = pfaffian(&a).unwrap();
        let d = determinant(&a).unwrap();
        prop_assert!(rel_close(p * p, d, 1e-9), "{} vs {}", p * p, d);
    }

    #[test]
    fn pfaffian_congruence((a, b) in skew_matrix().prop_flat_map(|a| {
        let n = a.rows();
        (Just(a), square(n))
    })) {
        let bab = b.matmul(&a).unwrap().matmul(&b.transpose()).unwrap();
        let lhs = pfaffian(&bab).unwrap();
        let rhs = determinant(&b).unwrap() * pfaffian(&a).unwrap();
        prop_assert!(rel_close(lhs, rhs, 1e-8), "{lhs} vs {rhs}");
    }

    #[test]
    fn pfaffian_flips_under_row_column_swap(a in skew_matrix(), i in 0usize..10, j in 0usize..10) {
        let n = a.rows();
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let perm = |k: usize| if k == i { j } else if k == j { i } else { k };
        let swapped = ComplexMatrix::from_fn(n, n, |p, q| a[(perm(p), perm(q))]);
        prop_assert!(rel_close(pfaffian(&swapped).unwrap(), -pfaffian(&a).unwrap(), 1e-10));
    }

    #[test]
    fn elementary_symmetric_generating_function(
        v in prop::collection::vec(-2.0..2.0f64, 1..8),
        t in -1.5..1.5f64,
    ) {
        let s = elementary_symmetric_all(&RealVector::new(v.clone()).unwrap());
        let series: f64 = s.iter().enumerate().map(|(l, x)| x * t.powi(l as i32)).sum();
        let product: f64 = v.iter().map(|x| 1.0 + x * t).product();
        prop_assert!((series - product).abs() <= 1e-11 * product.abs().max(1.0));
    }

    #[test]
    fn log_beta_recurrence_and_symmetry(x in 0.1..30.0f64, y in 0.1..30.0f64) {
        let b = log_beta(x, y).unwrap();
        prop_assert!((b - log_beta(y, x).unwrap()).abs() < 1e-12 * b.abs().max(1.0));
        // B(x+1, y) = B(x, y) x / (x + y)
        let shifted = log_beta(x + 1.0, y).unwrap();
        prop_assert!((shifted - (b + (x / (x + y)).ln())).abs() < 1e-11 * b.abs().max(1.0));
        if b > -600.0 {
            prop_assert!((beta(x, y).unwrap() / b.exp() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn h_matches_its_integral(a2 in 0u32..8, b in 0u32..5, x in 0.0..1.0f64) {
        let a = a2 as f64 / 2.0;
        let (v, _) = adaptive_gk(|g: f64| g.powf(2.0 * a) * (1.0 - g * g).powi(b as i32), 0.0, x, AdaptiveConfig::default()).unwrap();
        let h = h_closed(a, b, x).unwrap();
        prop_assert!((h - v).abs() <= 1e-10 * v.abs().max(1e-300), "h={h} quad={v}");
    }

    #[test]
    fn grassmann_exponential_inverts(pairs in prop::collection::vec((0u32..3, 3u32..6, complex()), 1..6)) {
        let x = Multivector::bilinear(6, pairs).unwrap();
        let prod = x.gexp().unwrap().gmul(&x.scale(Complex64::new(-1.0, 0.0)).gexp().unwrap()).unwrap();
        let one = Multivector::one(6);
        prop_assert!(prod.sub(&one).unwrap().terms().iter().all(|(_, c)| c.norm() < 1e-10));
    }

    #[test]
    fn generators_anticommute(i in 0u32..6, j in 0u32..6) {
        let a = Multivector::generator(6, i).unwrap();
        let b = Multivector::generator(6, j).unwrap();
        let sum = a.gmul(&b).unwrap().add(&b.gmul(&a).unwrap()).unwrap();
        prop_assert!(sum.is_empty() || sum.terms().iter().all(|(_, c)| c.norm() == 0.0));
    }

    #[test]
    fn haar_draws_are_orthogonal(seed in any::<u64>(), n in 1usize..8) {
        let o = sample_orthogonal(n, &mut RngStream::new(seed, 0).rng()).unwrap();
        let defect = o.matmul(&o.transpose()).unwrap().sub(&ComplexMatrix::identity(n)).unwrap().max_abs();
        prop_assert!(defect < 1e-12);
    }

    #[test]
    fn m1_moment_phase_and_permutation_invariant(
        g in prop::collection::vec(0.0..2.0f64, 1..7),
        r in 0.0..2.0f64,
        theta in 0.0..std::f64::consts::TAU,
        shift in 0usize..7,
    ) {
        let q = MomentQuery::new(Complex64::new(r, 0.0), RealVector::new(g.clone()).unwrap(), 1).unwrap();
        let mut rotated = g.clone();
        rotated.rotate_left(shift % g.len());
        let p = MomentQuery::new(Complex64::from_polar(r, theta), RealVector::new(rotated).unwrap(), 1).unwrap();
        let (x, y) = (moment_m1_closed(&q).unwrap(), moment_m1_closed(&p).unwrap());
        prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
        // leading behaviour |z|^{2N} is a lower bound
        prop_assert!(x >= r.powi(2 * g.len() as i32) * (1.0 - 1e-12));
    }

    #[test]
    fn alpha_is_antisymmetric_and_matches_integral(i in 0u32..5, j in 0u32..5, a in 0u32..3, b in 0u32..3) {
        let x = alpha_components(i, j, a, b).unwrap();
        let y = alpha_components(j, i, a, b).unwrap();
        prop_assert_eq!((x.a0, x.a1, x.a2), (-y.a0, -y.a1, -y.a2));
        let q = alpha_components_quadrature(i, j, a, b).unwrap();
        for (u, v) in [(x.a0, q.a0), (x.a1, q.a1), (x.a2, q.a2)] {
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1e-300), "{u} vs {v}");
        }
    }

    #[test]
    fn z_score_is_symmetric(m1 in complex(), m2 in complex(), s1 in 0.01..1.0f64, s2 in 0.01..1.0f64) {
        let e1 = Estimate { mean: m1, std_error: s1, samples: 10 };
        let e2 = Estimate { mean: m2, std_error: s2, samples: 10 };
        prop_assert_eq!(e1.z_score_against(&e2), e2.z_score_against(&e1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn jacobi_depends_only_on_product(
        lg in 0.2..3.0f64,
        t in 0.3..3.0f64,
        a in 0u32..3,
        b in 0u32..3,
        n in 1usize..4,
    ) {
        let c = |x: f64| Complex64::new(x, 0.0);
        let x = jacobi_quadrature(&JacobiQuery::new(c(lg), c(1.0), a, b, n).unwrap()).unwrap();
        let y = jacobi_quadrature(&JacobiQuery::new(c(lg * t), c(1.0 / t), a, b, n).unwrap()).unwrap();
        prop_assert!(rel_close(x, y, 1e-10), "{x} vs {y}");
    }
}
