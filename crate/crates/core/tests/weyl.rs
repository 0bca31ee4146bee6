use painleve_atlas::algebra::{gauss_i, parse_poly, GaussQ, Var};
use painleve_atlas::catalog::System;
use painleve_atlas::charts::ChartId;
use painleve_atlas::weyl::*;
use num_traits::One;
use std::collections::BTreeMap;

fn g(s: &str) -> GRat {
    GRat::from_poly(gparse(s))
}

#[test]
fn every_generator_is_a_backlund_transformation() {
    for sys in [System::P2, System::P4] {
        let w = sys.weights();
        for a in builtin_group(sys).unwrap() {
            let r = verify_backlund(sys, &a).unwrap();
            assert!(r.holds, "{} {}", sys, a.name);
            assert!(commutes_with_zs(&a, &w), "{} {}", sys, a.name);
        }
    }
}

#[test]
fn corrupted_generators_fail() {
    let mut s1 = generator(System::P2, "s1").unwrap();
    s1.vars[1] = &g("y") - &(&s1.vars[1] - &g("y"));
    assert!(!verify_backlund(System::P2, &s1).unwrap().holds);
    let mut pi = generator(System::P2, "pi").unwrap();
    pi.params.insert(Var::param("alpha"), g("alpha"));
    assert!(!verify_backlund(System::P2, &pi).unwrap().holds);
}

#[test]
fn tabulated_sigma2_parameters_leave_a_constant_residual() {
    let r = verify_backlund(System::P4, &tabulated_sigma2()).unwrap();
    assert!(!r.holds);
    for p in &r.residual {
        assert!(!p.is_zero());
        assert!(p.vars().iter().all(|v| v.is_parameter()), "{p}");
    }
}

#[test]
fn orders_and_relations() {
    let p2 = group_relations(System::P2).unwrap();
    assert!(p2.reflections_involutive);
    assert_eq!(p2.orders, vec![("s1".into(), Some(2)), ("pi".into(), Some(2))]);
    let p4 = group_relations(System::P4).unwrap();
    assert!(p4.reflections_involutive);
    let ord: BTreeMap<_, _> = p4.orders.iter().cloned().collect();
    assert_eq!(ord["pi"], Some(3));
    // σ₁, σ₂ act as involutions on the parameters and on (x, y) up to z ↦ −z.
    assert_eq!(ord["sigma1"], Some(4));
    assert_eq!(ord["sigma2"], Some(4));
    let sq = |n: &str| {
        let a = generator(System::P4, n).unwrap();
        a.compose(&a).unwrap()
    };
    for n in ["sigma1", "sigma2"] {
        let s = sq(n);
        assert_eq!(s.vars, [g("-x"), g("-y"), g("-z")]);
        assert!(s.params.iter().all(|(p, r)| *r == GRat::var(*p)));
    }
}

#[test]
fn s1_on_the_third_chart_matches_the_display() {
    let w = System::P2.weights();
    let ca = extend_to_chart(&generator(System::P2, "s1").unwrap(), &w, ChartId::C3).unwrap();
    let d = GRat::from_poly(gparse("Y3^2 - X3 + 1/2"));
    let x = &(&g("X3") + &g("(2*alpha - 1)*Y3*eps3").try_div(&d).unwrap())
        + &g("(alpha - 1/2)^2*eps3^2").try_div(&(&d * &d)).unwrap();
    let y = &g("Y3") + &g("(alpha - 1/2)*eps3").try_div(&d).unwrap();
    assert_eq!(ca.images, [x, y, g("eps3")]);
    assert!(chart_equivariant(&ca, &w));
    let inf = infinity_action_report(&ca).unwrap();
    assert!(inf.trivial_on_infinity);
}

#[test]
fn pi_on_the_third_chart_is_minus_identity() {
    let w = System::P2.weights();
    let ca = extend_to_chart(&generator(System::P2, "pi").unwrap(), &w, ChartId::C3).unwrap();
    assert_eq!(ca.images, [g("-X3"), g("-Y3"), g("eps3")]);
    let inf = infinity_action_report(&ca).unwrap();
    assert!(!inf.trivial_on_infinity);
    assert_eq!(inf.foliation_character, Some(GaussQ::one()));
}

#[test]
fn reflections_are_trivial_at_infinity_on_every_chart() {
    for sys in [System::P2, System::P4] {
        let w = sys.weights();
        for a in builtin_group(sys).unwrap().into_iter().filter(|a| a.name.starts_with("s") && !a.name.starts_with("sigma")) {
            for c in ChartId::AT_INFINITY {
                match extend_to_chart(&a, &w, c) {
                    Ok(ca) => {
                        assert!(chart_equivariant(&ca, &w));
                        assert!(infinity_action_report(&ca).unwrap().trivial_on_infinity, "{} {} {}", sys, a.name, c);
                    }
                    Err(WeylError::NeedsRoot(2)) => {
                        assert_eq!((sys, c), (System::P2, ChartId::C1));
                        invariants_trivial_at_infinity(&a, c);
                    }
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}

fn invariants_trivial_at_infinity(a: &BirationalAction, c: ChartId) {
    let w = a.system.weights();
    let inv = extend_invariants(a, &w, c).unwrap();
    assert!(inv.len() >= 4);
    let eps = c.eps_var();
    let zero: BTreeMap<Var, GRat> = [(eps, GRat::zero())].into_iter().collect();
    for (m, img) in inv {
        let lhs = img.substitute(&zero).unwrap();
        let rhs = GRat::from_poly(painleve_atlas::algebra::GPoly::term(m.clone(), GaussQ::one())).substitute(&zero).unwrap();
        assert_eq!(lhs, rhs, "{m:?}");
    }
}

#[test]
fn p2_s1_on_the_first_chart_acts_on_invariants() {
    let a = generator(System::P2, "s1").unwrap();
    let w = System::P2.weights();
    assert!(matches!(extend_to_chart(&a, &w, ChartId::C1), Err(WeylError::NeedsRoot(2))));
    let inv = extend_invariants(&a, &w, ChartId::C1).unwrap();
    let o = orbifold_generator(System::P2, ChartId::C1).unwrap();
    let sub: BTreeMap<Var, GRat> = ChartId::C1.vars().into_iter().zip(o.images.iter().cloned()).collect();
    for (_, img) in &inv {
        assert_eq!(img.substitute(&sub).unwrap(), *img);
    }
}

#[test]
fn dynkin_automorphisms_preserve_the_boutroux_foliation() {
    let p2 = dynkin_group_at_infinity(System::P2).unwrap();
    assert_eq!(p2.order(), 2);
    assert!(p2.preserves_foliation());
    let p4 = dynkin_group_at_infinity(System::P4).unwrap();
    assert_eq!(p4.order(), 6);
    assert!(p4.non_abelian());
    assert!(p4.characters.iter().all(|c| *c == Some(GaussQ::one())));
    // The zero set X Y (X − Y − 2) = 0 of H_IV is permuted.
    let h = boutroux_hamiltonian(System::P4);
    assert_eq!(h, parse_poly("X3^2*Y3 - X3*Y3^2 - 2*X3*Y3").unwrap());
}

#[test]
fn orbifold_symmetry_of_h1() {
    let o = orbifold_generator(System::P1, ChartId::C3).unwrap();
    let i = GRat::constant(gauss_i());
    assert_eq!(o.images, [&g("-X3") * &i, g("-Y3"), &g("eps3") * &i]);
    let r = infinity_action_report(&o).unwrap();
    assert_eq!(r.foliation_character, Some(-GaussQ::one()));
    let o2 = orbifold_generator(System::P2, ChartId::C3).unwrap();
    assert_eq!(infinity_action_report(&o2).unwrap().foliation_character, Some(GaussQ::one()));
    assert!(orbifold_generator(System::P1, ChartId::C1).is_none());
}

#[test]
fn report_is_deterministic() {
    let a = serde_json::to_string(&weyl_report(System::P4).unwrap()).unwrap();
    let b = serde_json::to_string(&weyl_report(System::P4).unwrap()).unwrap();
    assert_eq!(a, b);
}
