use painleve_atlas::algebra::*;
use proptest::prelude::*;

fn vars() -> [Var; 3] {
    [Var::new("x"), Var::new("y"), Var::new("z")]
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    proptest::collection::vec(((-4i64..5, 1i64..4), (-2i32..3, -2i32..3, 0i32..3)), 0..5).prop_map(|ts| {
        let [x, y, z] = vars();
        Poly::from_terms(
            ts.into_iter().map(|((n, d), (a, b, c))| (Monomial::from_pairs([(x, a), (y, b), (z, c)]), qf(n, d))),
        )
    })
}

fn arb_monomial_map() -> impl Strategy<Value = MonomialMap> {
    proptest::collection::vec((-2i32..3, -2i32..3, -1i64..3), 3).prop_map(|rows| {
        let [x, y, z] = vars();
        let t = Var::new("t_prop");
        let s = Var::new("s_prop");
        MonomialMap::from_pairs(rows.into_iter().zip([x, y, z]).map(|((a, b, c), v)| {
            let c = if c == 0 { 1 } else { c };
            (v, Poly::term(Monomial::from_pairs([(t, a), (s, b)]), q(c)))
        }))
    })
}

fn arb_second_map() -> impl Strategy<Value = MonomialMap> {
    proptest::collection::vec((-2i32..3, 1i64..3), 2).prop_map(|rows| {
        let t = Var::new("t_prop");
        let s = Var::new("s_prop");
        let u = Var::new("u_prop");
        MonomialMap::from_pairs(
            rows.into_iter()
                .zip([t, s])
                .map(|((a, c), v)| (v, Poly::term(Monomial::from_pairs([(u, a)]), q(c)))),
        )
    })
}

proptest! {
    #[test]
    fn addition_commutes(a in arb_poly(), b in arb_poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn multiplication_distributes(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn substitution_composes(p in arb_poly(), m1 in arb_monomial_map(), m2 in arb_second_map()) {
        let lhs = p.substitute(&m1).unwrap().substitute(&m2).unwrap();
        let rhs = p.substitute(&m1.compose(&m2).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn weighted_degree_is_additive_on_quasi_homogeneous(
        ea in proptest::collection::vec((0i32..4, 0i32..4), 1..4),
        eb in proptest::collection::vec((0i32..4, 0i32..4), 1..4),
    ) {
        // Quasi-homogeneous for weights (2,3): keep terms of the first weighted degree.
        let [x, y, _] = vars();
        let w = weights_of(&[(x, 2), (y, 3)]);
        let build = |es: &[(i32, i32)]| {
            let d0 = 2 * es[0].0 + 3 * es[0].1;
            Poly::from_terms(es.iter().filter(|(a, b)| 2 * a + 3 * b == d0)
                .map(|&(a, b)| (Monomial::from_pairs([(x, a), (y, b)]), q(1))))
        };
        let a = build(&ea);
        let b = build(&eb);
        let prod = &a * &b;
        prop_assert_eq!(prod.weighted_degree(&w).unwrap(),
            a.weighted_degree(&w).unwrap() + b.weighted_degree(&w).unwrap());
    }

    #[test]
    fn rationals_stay_in_lowest_terms(n in -1000i64..1000, d in 1i64..1000, m in -1000i64..1000, e in 1i64..1000) {
        use num_integer::Integer;
        let r = qf(n, d) * qf(m, e) + qf(n, e);
        prop_assert!(r.denom() > &num_bigint::BigInt::from(0));
        prop_assert_eq!(r.numer().gcd(r.denom()), num_bigint::BigInt::from(1));
    }
}
