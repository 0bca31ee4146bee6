//! Blow-up atlases against the displayed chart systems, Hamiltonians and
//! surface data; structural identities (gluing, inverse maps, chain rule)
//! are checked independently.

use painleve_atlas::algebra::{parse_poly, q, qf, MonomialMap, Poly, Var, Q};
use painleve_atlas::catalog::System;
use painleve_atlas::charts::ChartId;
use painleve_atlas::local::characteristic_index_at;
use painleve_atlas::newton_weights::Weights;
use painleve_atlas::soic::*;
use proptest::prelude::*;
use std::collections::BTreeMap;

mod common;
use common::{chart_displays, printed_hamiltonians};

fn p(s: &str) -> Poly {
    parse_poly(s).unwrap()
}

fn chart(sys: System, label: &str) -> BlowupChartMap {
    painleve_coordinates(sys).unwrap().into_iter().find(|m| m.label == label).unwrap()
}

fn atlas_chart(sys: System, label: &str) -> AtlasChart {
    soic_atlas(sys).unwrap().charts.into_iter().find(|c| c.map.label == label).unwrap()
}

fn image(m: &BlowupChartMap, name: &str) -> Poly {
    m.forward.image(Var::new(name))
}

fn assert_system(c: &AtlasChart, du: &str, dw: &str) {
    assert_eq!(c.system.rhs[0], p(du), "du/dv in {}", c.map.label);
    assert_eq!(c.system.rhs[1], p(dw), "dw/dv in {}", c.map.label);
}

#[test]
fn prechange_removes_the_first_row() {
    for sys in System::ALL {
        for (ch, point, label, _) in movable_points(sys).unwrap() {
            let pre = preblowup_change(&sys.chart_field(ch), &point).unwrap();
            let j = &pre.adjusted_jacobian;
            assert!(j[0][1].is_zero() && j[0][2].is_zero(), "{label}");
            assert!(j[1][0].is_zero() && j[2][0].is_zero() && j[2][1].is_zero(), "{label}");
            for i in 0..3 {
                assert_eq!(j[i][i], Poly::int(pre.lambdas[i]), "{label}");
            }
        }
    }
    let v = |s| p(s);
    let pts = movable_points(System::P1).unwrap();
    let pre = preblowup_change(&System::P1.chart_field(pts[0].0), &pts[0].1).unwrap();
    assert_eq!(pre.lambdas, [6, 4, 5]);
    // lower sign of u ∓ v/2 − w/2
    assert_eq!((pre.m.clone(), pre.n.clone()), (v("1/2"), v("-1/2")));
    // (2,3) entry ±1, lower sign
    assert_eq!(pre.adjusted_jacobian[1][2], v("-1"));

    let p2: Vec<_> = movable_points(System::P2).unwrap();
    let upper = p2.iter().find(|x| x.2 == "P2+").unwrap();
    assert_eq!(upper.1[0], q(-1));
    let pre = preblowup_change(&System::P2.chart_field(upper.0), &upper.1).unwrap();
    assert_eq!(pre.lambdas, [4, 2, 3]);
    assert_eq!((pre.m.clone(), pre.n.clone()), (v("-1/2"), v("-1/2 - alpha")));

    let p4 = movable_points(System::P4).unwrap();
    let expected = [
        (ChartId::C1, 0, "0", "2*kappa"),
        (ChartId::C1, 1, "-2", "2 - 2*kappa + 2*theta"),
        (ChartId::C2, 0, "0", "2*theta"),
    ];
    for ((ch, point, _, _), (ech, a0, m, n)) in p4.iter().zip(expected) {
        assert_eq!((*ch, point[0].clone()), (ech, q(a0)));
        let pre = preblowup_change(&System::P4.chart_field(*ch), point).unwrap();
        assert_eq!(pre.lambdas, [3, 1, 2]);
        assert_eq!((pre.m.clone(), pre.n.clone()), (v(m), v(n)));
    }
}

#[test]
fn painleve_coordinate_maps() {
    let m = chart(System::P1, "P1+");
    assert_eq!(image(&m, "x"), p("u3*w3^3 - 2*w3^-3 - v3*w3/2 - w3^2/2"));
    assert_eq!(image(&m, "y"), p("w3^-2"));
    let low = m.flipped().unwrap();
    assert_eq!(low.label, "P1-");
    assert_eq!(image(&low, "x"), p("u3*w3^3 + 2*w3^-3 + v3*w3/2 - w3^2/2"));

    // u₃± = xy² ± y⁴ ± zy²/2 + (1/2 ± α)y with τ = y⁻¹.
    for (label, s) in [("P2+", "1"), ("P2-", "-1")] {
        let m = chart(System::P2, label);
        let tau = MonomialMap::from_pairs([(m.cover_var, p("y^-1"))]);
        let u = m.inverse.image(Var::new("u3")).substitute(&tau).unwrap();
        let expect = p(&format!("x*y^2 + ({s})*y^4 + ({s})*z*y^2/2 + (1/2 + ({s})*alpha)*y"));
        assert_eq!(u, expect, "{label}");
        assert_eq!(image(&m, "y"), p("w3^-1"));
    }

    let p4 = |l: &str| chart(System::P4, l);
    assert_eq!((image(&p4("P4(i)"), "x"), image(&p4("P4(i)"), "y")), (p("w3^-1"), p("u3*w3^2 + 2*kappa*w3")));
    assert_eq!(image(&p4("P4(ii)"), "y"), p("w3^-1 + u3*w3^2 - 2*v3 + (2 - 2*kappa + 2*theta)*w3"));
    assert_eq!((image(&p4("P4(iii)"), "x"), image(&p4("P4(iii)"), "y")), (p("u3*w3^2 + 2*theta*w3"), p("w3^-1")));
}

#[test]
fn maps_are_invertible_and_keep_z() {
    for sys in System::ALL {
        let maps = painleve_coordinates(sys).unwrap();
        assert_eq!(maps.len(), sys.expected_families());
        for m in &maps {
            assert!(m.forward_inverse_identity().unwrap(), "{}", m.label);
            assert!(m.independent_preserved(), "{}", m.label);
            assert_eq!(image(m, "z"), p("v3"));
            assert!(gluing_consistent(m).unwrap(), "{}", m.label);
            assert_eq!(blowup_route_system(m).unwrap().rhs, transformed_system(m).unwrap().rhs, "{}", m.label);
        }
        assert!(painleve_coordinates(sys).unwrap()[0].flipped().unwrap().forward_inverse_identity().unwrap());
    }
}

#[test]
fn chart_systems_match_the_displays() {
    for (sys, label, du, dw) in chart_displays() {
        if let Some(base) = label.strip_suffix('-').filter(|_| sys == System::P1) {
            let low = chart(sys, &format!("{base}+")).flipped().unwrap();
            let s = transformed_system(&low).unwrap();
            assert_eq!((s.rhs[0].clone(), s.rhs[1].clone()), (p(du), p(dw)), "{label}");
        } else {
            assert_system(&atlas_chart(sys, label), du, dw);
        }
    }
}

#[test]
fn p2_lower_sign_is_the_symmetric_image() {
    // (x, y, α) ↦ (−x, −y, −α) exchanges the two points: (u, w, α) ↦ (−u, −w, −α).
    let up = atlas_chart(System::P2, "P2+").system;
    let low = atlas_chart(System::P2, "P2-").system;
    let sym = MonomialMap::from_pairs([(Var::new("u3"), p("-u3")), (Var::new("w3"), p("-w3")), (Var::param("alpha"), p("-alpha"))]);
    for k in 0..2 {
        assert_eq!(low.rhs[k], -up.rhs[k].substitute(&sym).unwrap());
    }
}

#[test]
fn symplectic_factors() {
    let f = |sys, l| symplectic_factor(&chart(sys, l)).unwrap();
    assert_eq!(f(System::P1, "P1+").factor, q(-2));
    for l in ["P2+", "P2-"] {
        let s = f(System::P2, l);
        assert_eq!((s.factor, s.stated_orientation, s.stated_factor), (q(-1), "dy^dx", q(1)));
    }
    assert_eq!(f(System::P4, "P4(i)").factor, q(1));
    assert_eq!(f(System::P4, "P4(ii)").factor, q(1));
    assert_eq!(f(System::P4, "P4(iii)").factor, q(-1));
}

#[test]
fn extended_symplectic_identity_with_printed_hamiltonians() {
    for (sys, label, ht) in printed_hamiltonians() {
        let m = chart(sys, label);
        let h = sys.hamiltonian();
        let ht = p(ht);
        let ok = extended_symplectic_check(&m, &h, &ht).unwrap();
        assert!(ok.holds, "{label}: residual {:?}", ok.residual);
        // additive functions of z are invisible
        let shifted = &ht + &p("v3^3 - 7*v3");
        assert!(extended_symplectic_check(&m, &h, &shifted).unwrap().holds);
        let bad = &ht + &p("u3*w3/5");
        let r = extended_symplectic_check(&m, &h, &bad).unwrap();
        assert!(!r.holds, "{label}: planted error not detected");
        assert!(!r.residual[1].is_zero() || !r.residual[2].is_zero());
        // the derived H̃ agrees up to z and generates the chart flow
        let derived = transformed_hamiltonian(&m, &h).unwrap();
        assert!(equal_up_to_z(&derived, &ht, Var::new("v3")), "{label}: {derived}");
        let s = transformed_system(&m).unwrap();
        assert_eq!(s.rhs[0], -derived.diff(Var::new("w3")));
        assert_eq!(s.rhs[1], derived.diff(Var::new("u3")));
    }
}

#[test]
fn weighted_blowup_requires_the_index_weights() {
    let pts = movable_points(System::P1).unwrap();
    let pre = preblowup_change(&System::P1.chart_field(pts[0].0), &pts[0].1).unwrap();
    let good = weighted_blowup(&pre, [6, 4, 5], 3).unwrap();
    assert!(good.is_polynomial());
    assert!(matches!(weighted_blowup(&pre, [3, 2, 5], 3), Err(SoicError::NonPolynomial { .. })));
    assert!(matches!(weighted_blowup(&pre, [6, 4, 5], 4), Err(SoicError::UnsupportedChart(4))));
}

#[test]
fn p1_surface_invariants() {
    let m = surface_invariants(SurfaceTag::P1).unwrap();
    assert!(m.relation_holds);
    assert_eq!(m.invariant, [true, true, true]);
    assert!(m.action_preserves_map);
    assert_eq!(m.action.image(Var::new("u3")), p("-u3 + v3*w3^-2 + 4*w3^-6"));
    assert_eq!(m.action.image(Var::new("w3")), p("-w3"));
    assert_eq!(m.generators[0], p("u3*(u3*w3^6 - v3*w3^4 - 4) + w3^2*v3^2/4"));
    assert_eq!(m.generators[1], p("w3^7*(u3 - v3*w3^-2/2 - 2*w3^-6)"));
    assert_eq!(m.generators[2], p("w3^2"));

    let b = surface_invariants(SurfaceTag::P1Boutroux).unwrap();
    assert!(b.relation_holds && b.action_preserves_map);
    assert_eq!(b.invariant, [true, true, true]);
    assert!(!b.relation.depends_on(Var::new("z")));
    assert_eq!(b.generators[0], p("u2*(u2*v2^6 - v2^4 - 4) + v2^2/4"));
}

#[test]
fn surface_system_needs_the_relation() {
    let r = surface_system_regularity(System::P1).unwrap();
    assert_eq!(r.raw[0], p("6 + z*W^2 + (W^3 + 4*V)*(W^3 - 2*V)/(4)*W^-1"));
    assert_eq!(r.raw[1], p("W^3/2 - V"));
    assert!(!r.regular_without_reduction);
    assert!(r.regular);
    assert_eq!(r.reduced[0].low_degree_in(Var::new("W")), Some(0));
    for sys in [System::P2, System::P4] {
        assert!(surface_system_regularity(sys).unwrap().regular);
    }
}

#[test]
fn boutroux_atlases() {
    for sys in System::ALL {
        let a = boutroux_soic_atlas(sys).unwrap();
        assert_eq!(a.charts.len(), sys.expected_families());
        assert!(a.all_polynomial());
        for c in &a.charts {
            assert!(c.map.forward_inverse_identity().unwrap(), "{}", c.map.label);
            assert_eq!(c.map.forward.image(Var::new("eps3")), p("w2"));
            assert!(gluing_consistent(&c.map).unwrap(), "{}", c.map.label);
        }
    }
    let a = boutroux_soic_atlas(System::P2).unwrap();
    for (c, s) in a.charts.iter().zip(["1", "-1"]) {
        let tau = MonomialMap::from_pairs([(c.map.cover_var, p("Y3^-1"))]);
        let u = c.map.inverse.image(Var::new("u2")).substitute(&tau).unwrap();
        assert_eq!(u, p(&format!("X3*Y3^2 + ({s})*Y3^4 + ({s})*Y3^2/2 + (1/2 + ({s})*alpha)*eps3*Y3")));
    }
    let a = boutroux_soic_atlas(System::P4).unwrap();
    let img = |i: usize, v: &str| a.charts[i].map.forward.image(Var::new(v));
    assert_eq!((img(0, "X3"), img(0, "Y3")), (p("v2^-1"), p("u2*v2^2 + 2*kappa*w2*v2")));
    assert_eq!(img(1, "Y3"), p("v2^-1 + u2*v2^2 - 2 + 2*(1 + theta - kappa)*w2*v2"));
    assert_eq!((img(2, "X3"), img(2, "Y3")), (p("u2*v2^2 + 2*theta*w2*v2"), p("v2^-1")));
}

#[test]
fn rational_two_forms() {
    let idx = |sys: System| {
        let (c, pt, _, _) = movable_points(sys).unwrap().remove(0);
        characteristic_index_at(&sys.chart_field(c), &pt).unwrap()
    };
    let r1 = rational_two_form_check(&System::P1.weights(), &idx(System::P1));
    assert!(r1.rational && r1.ratio == Some(2));
    let r2 = rational_two_form_check(&System::P2.weights(), &idx(System::P2));
    assert!(r2.rational && r2.ratio == Some(2));
    let synthetic = Weights::new(1, 1, 1, 3).unwrap();
    let r = rational_two_form_check(&synthetic, &idx(System::P1));
    assert_eq!(r.p_plus_q_mod_s, 2);
    assert!(!r.rational);
}

#[test]
fn polynomiality_pins_down_the_systems() {
    for sys in System::ALL {
        let r = polynomiality_uniqueness(sys).unwrap();
        assert!(r.unique && r.recovers_system, "{sys}: {r:?}");
    }
}

fn rat(n: i64, d: i64) -> Q {
    qf(n, d)
}

proptest! {
    /// Chain rule at random rational points: X_u u' + X_w w' + X_z = f(X, Y, z)
    /// and likewise for Y, with the chart system substituted.
    #[test]
    fn chart_systems_satisfy_the_chain_rule(
        which in 0usize..6,
        nu in -9i64..10, nv in -9i64..10, nw in 1i64..10,
        a in -5i64..6, k in -5i64..6, t in -5i64..6,
    ) {
        let all: Vec<(System, &str)> = vec![
            (System::P1, "P1+"), (System::P2, "P2+"), (System::P2, "P2-"),
            (System::P4, "P4(i)"), (System::P4, "P4(ii)"), (System::P4, "P4(iii)"),
        ];
        let (sys, label) = all[which];
        let c = atlas_chart(sys, label);
        let [u, v, w] = c.map.target_vars;
        let mut at: BTreeMap<Var, Q> = BTreeMap::new();
        at.insert(u, rat(nu, 3));
        at.insert(v, rat(nv, 2));
        at.insert(w, rat(nw, 7));
        at.insert(Var::param("alpha"), rat(a, 2));
        at.insert(Var::param("kappa"), rat(k, 3));
        at.insert(Var::param("theta"), rat(t, 5));
        let x = image(&c.map, "x");
        let y = image(&c.map, "y");
        let ode = sys.ode();
        let base: BTreeMap<Var, Q> = [
            (Var::new("x"), x.eval(&at).unwrap()),
            (Var::new("y"), y.eval(&at).unwrap()),
            (Var::new("z"), at[&v].clone()),
        ].into_iter().chain(at.iter().filter(|(k, _)| k.is_parameter()).map(|(k, v)| (*k, v.clone()))).collect();
        let du = c.system.rhs[0].eval(&at).unwrap();
        let dw = c.system.rhs[1].eval(&at).unwrap();
        for (phi, rhs) in [(&x, &ode.f), (&y, &ode.g)] {
            let lhs = phi.diff(u).eval(&at).unwrap() * du.clone()
                + phi.diff(w).eval(&at).unwrap() * dw.clone()
                + phi.diff(v).eval(&at).unwrap();
            prop_assert_eq!(lhs, rhs.eval(&base).unwrap());
        }
    }

    /// The inverse map sends forward images back at random points of the cover.
    #[test]
    fn inverse_recovers_cover_points(which in 0usize..6, nu in -9i64..10, nv in -9i64..10, nw in 1i64..10) {
        let all: Vec<(System, &str)> = vec![
            (System::P1, "P1+"), (System::P2, "P2+"), (System::P2, "P2-"),
            (System::P4, "P4(i)"), (System::P4, "P4(ii)"), (System::P4, "P4(iii)"),
        ];
        let (sys, label) = all[which];
        let m = chart(sys, label);
        let [u, v, w] = m.target_vars;
        let mut at: BTreeMap<Var, Q> = BTreeMap::new();
        at.insert(u, rat(nu, 3));
        at.insert(v, rat(nv, 2));
        at.insert(w, rat(nw, 7));
        at.insert(Var::param("alpha"), rat(1, 3));
        at.insert(Var::param("kappa"), rat(-2, 3));
        at.insert(Var::param("theta"), rat(1, 4));
        let mut base: BTreeMap<Var, Q> = at.iter().filter(|(k, _)| k.is_parameter()).map(|(k, v)| (*k, v.clone())).collect();
        for b in m.base_vars {
            base.insert(b, m.forward.image(b).eval(&at).unwrap());
        }
        base.insert(m.cover_var, at[&w].clone());
        for t in m.target_vars {
            prop_assert_eq!(m.inverse.image(t).eval(&base).unwrap(), at[&t].clone());
        }
    }
}
