use fracmom::{AtomicMeasure, ExponentVector, FracPoly, LogAtomicMeasure, ProblemPolys, Rational};
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::Signed;
use proptest::prelude::*;

type Q = Rational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn exact_measure() -> impl Strategy<Value = AtomicMeasure<Q>> {
    (1usize..3, 1u64..4).prop_flat_map(|(dim, d)| {
        prop::collection::vec(
            (
                prop::collection::vec((0i64..10, 1i64..4), dim),
                (1i64..5, 1i64..4),
            ),
            1..5,
        )
        .prop_map(move |atoms| {
            AtomicMeasure::from_roots(
                dim,
                d,
                atoms
                    .into_iter()
                    .map(|(r, (wn, wd))| {
                        (r.into_iter().map(|(n, den)| q(n, den)).collect(), q(wn, wd))
                    })
                    .collect(),
            )
            .unwrap()
        })
    })
}

fn log_measure() -> impl Strategy<Value = LogAtomicMeasure<f64>> {
    (1usize..3).prop_flat_map(|dim| {
        prop::collection::vec(
            (prop::collection::vec(-5.0f64..=5.0, dim), 0.01f64..10.0),
            1..5,
        )
        .prop_map(move |atoms| LogAtomicMeasure::new(dim, atoms).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_at_beta_zero_is_the_moment(
        (mu, nums) in exact_measure().prop_flat_map(|mu| {
            let dim = mu.dim();
            (Just(mu), prop::collection::vec(0u64..9, dim))
        }),
        polys in prop::sample::select(vec![vec![], vec!["t1 - 2"], vec!["t1^2 + 1"]]),
    ) {
        let dim = mu.dim();
        let p = ProblemPolys::new(
            dim,
            polys.iter().map(|t| fracmom::parse_fracpoly(t, dim).unwrap()).collect(),
        )
        .unwrap();
        let alpha = ExponentVector::from_numerators(&nums, mu.root_power());
        prop_assert_eq!(
            mu.delta_forward(&p, &alpha, 0).unwrap(),
            mu.moment(&alpha).unwrap()
        );
        let exact = mu.moment(&alpha).unwrap();
        let float = mu.gamma(&alpha.components().iter().map(|e| *e.numer() as f64 / *e.denom() as f64).collect::<Vec<_>>()).unwrap();
        let e = fracmom::Scalar::to_f64(&exact);
        prop_assert!((e - float).abs() <= 1e-12 * (1.0 + e.abs()));
    }

    #[test]
    fn laplace_pushforward(
        (nu, alpha) in log_measure().prop_flat_map(|nu| {
            let dim = nu.dim();
            (Just(nu), prop::collection::vec(0.0f64..=3.0, dim))
        })
    ) {
        let direct: f64 = nu
            .atoms()
            .iter()
            .map(|(s, w)| w * (-s.iter().zip(&alpha).map(|(s, a)| s * a).sum::<f64>()).exp())
            .sum();
        let pushed = nu.pushforward().gamma(&alpha).unwrap();
        prop_assert!((pushed - direct).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn gamma_is_continuous_at_atoms_in_the_box(
        (mu, alpha, eps) in (1usize..3).prop_flat_map(|dim| (
            prop::collection::vec(
                (prop::collection::vec(0.0f64..=10.0, dim), 0.1f64..5.0),
                1..5,
            )
            .prop_map(move |atoms| AtomicMeasure::<f64>::from_points(dim, atoms).unwrap()),
            prop::collection::vec(0.0f64..3.0, dim),
            prop::collection::vec(-1e-8f64..1e-8, dim),
        ))
    ) {
        let g = mu.gamma(&alpha).unwrap();
        let near: Vec<f64> = alpha.iter().zip(&eps).map(|(a, e)| (a + e).max(0.0)).collect();
        let h = mu.gamma(&near).unwrap();
        prop_assert!(g >= 0.0 && h >= 0.0);
        prop_assert!((g - h).abs() <= 1e-6 * g.abs().max(1e-300));
    }

    #[test]
    fn integrating_an_abs_square_is_non_negative(
        (mu, terms) in exact_measure().prop_flat_map(|mu| {
            let dim = mu.dim();
            (Just(mu), prop::collection::vec(
                (prop::collection::vec(0u64..6, dim), -5i64..6, -5i64..6),
                0..4,
            ))
        })
    ) {
        let d = mu.root_power();
        let f = FracPoly::from_terms(
            mu.dim(),
            terms.into_iter().map(|(nums, re, im)| {
                (ExponentVector::from_numerators(&nums, d), Complex::new(q(re, 1), q(im, 1)))
            }),
        )
        .unwrap();
        let v = mu.integrate(&f.conj_abs_square()).unwrap();
        prop_assert!(!v.re.is_negative());
        prop_assert!(num_traits::Zero::is_zero(&v.im));
    }
}
