//! Chart fields checked against the displayed chart equations.

use painleve_atlas::algebra::{parse_poly, Poly, RatFn};
use painleve_atlas::catalog::System;
use painleve_atlas::charts::{to_chart, transition_map, ChartId};
use painleve_atlas::newton_weights::{PlanarODE, Weights};
use num_integer::Integer;

fn p(s: &str) -> Poly {
    parse_poly(s).unwrap()
}

mod common;
use common::{autonomous, non_autonomous};

fn rat(n: &str, d: &str) -> RatFn {
    RatFn::new(p(n), p(d)).unwrap()
}

#[test]
fn autonomous_fields_match_displays() {
    for sys in System::ALL {
        for chart in ChartId::AT_INFINITY {
            let vf = sys.chart_field(chart);
            let expect = autonomous(sys, chart).map(p);
            assert_eq!(vf.components, expect, "{sys} {chart}");
        }
    }
}

#[test]
fn divided_fields_match_time_rescaled_displays() {
    let vf = System::P1.chart_field(ChartId::C2);
    assert_eq!(vf.divided(), ["(-12 - 2*Z2 + 3*X2^2)/X2", "(-2*eps2 + 4*X2*Z2)/X2", "5*eps2"].map(p));
    let vf = System::P2.chart_field(ChartId::C2);
    assert_eq!(vf.divided(), ["2*X2 - (2 + Z2 + alpha*eps2)/X2", "2*Z2 - eps2/X2", "3*eps2"].map(p));
    assert!(System::P4.chart_field(ChartId::C2).time_factor().is_one());
}

#[test]
fn non_autonomous_forms_match_displays() {
    for sys in System::ALL {
        for chart in ChartId::AT_INFINITY {
            let got = to_chart(&sys.ode(), &sys.weights(), chart).unwrap().non_autonomous();
            let expect = non_autonomous(sys, chart).map(|(n, d)| rat(n, d));
            assert_eq!(got, expect, "{sys} {chart}");
        }
    }
}

#[test]
fn infinity_restrictions() {
    assert_eq!(System::P1.chart_field(ChartId::C3).infinity_restriction(), [p("24*Y3^2 + 4"), p("4*X3")]);
    assert_eq!(System::P2.chart_field(ChartId::C3).infinity_restriction(), [p("4*Y3^3 + 2*Y3"), p("2*X3")]);
    assert_eq!(
        System::P4.chart_field(ChartId::C3).infinity_restriction(),
        [p("-X3^2 + 2*X3*Y3 + 2*X3"), p("-Y3^2 + 2*X3*Y3 - 2*Y3")]
    );
}

/// Two residue vectors generate the same cyclic action iff one is a unit
/// multiple of the other modulo k.
fn same_action(k: i64, a: [i64; 3], b: [i64; 3]) -> bool {
    (1..k).filter(|u| u.gcd(&k) == 1).any(|u| (0..3).all(|i| (u * a[i] - b[i]).mod_floor(&k) == 0))
}

#[test]
fn orbifold_actions_match_and_fields_are_equivariant() {
    // (Y1,Z1,ε1) ↦ (ωY1, ω²Z1, ωε1); (−X2, Z2, −ε2); (iX3, −Y3, −iε3).
    let expected = [(ChartId::C1, 3, [1, 2, 1]), (ChartId::C2, 2, [1, 0, 1]), (ChartId::C3, 4, [1, 2, 3])];
    for (chart, k, res) in expected {
        let vf = System::P1.chart_field(chart);
        assert_eq!(vf.orbifold_order, k);
        assert!(same_action(k, vf.orbifold_residues, res), "{chart}: {:?}", vf.orbifold_residues);
    }
    for sys in System::ALL {
        for chart in ChartId::ALL {
            assert!(sys.chart_field(chart).orbifold_action_check(), "{sys} {chart}");
        }
    }
}

#[test]
fn infinity_restriction_commutes_with_orbifold_action() {
    for sys in System::ALL {
        for chart in ChartId::AT_INFINITY {
            let vf = sys.chart_field(chart);
            let c = vf.equivariance_character().unwrap();
            let [a, b] = vf.infinity_restriction();
            for (i, comp) in [a, b].iter().enumerate() {
                for (m, _) in comp.terms() {
                    assert_eq!((vf.residue(m) - vf.orbifold_residues[i] - c).mod_floor(&vf.orbifold_order), 0);
                }
            }
        }
    }
}

fn ratios(comps: &[Poly; 3]) -> [RatFn; 2] {
    [0, 1].map(|i| RatFn::new(comps[i].clone(), comps[2].clone()).unwrap())
}

#[test]
fn transition_coherence_between_charts() {
    for sys in System::ALL {
        for (a, b) in [(ChartId::C2, ChartId::C3), (ChartId::C1, ChartId::C2), (ChartId::C3, ChartId::C1)] {
            let moved = sys.chart_field(a).change_chart(b).unwrap();
            assert_eq!(ratios(&moved.components), ratios(&sys.chart_field(b).components), "{sys} {a}->{b}");
        }
        let back = sys.chart_field(ChartId::C2).change_chart(ChartId::Orig).unwrap();
        assert_eq!(ratios(&back.components), ratios(&sys.chart_field(ChartId::Orig).components));
    }
}

#[test]
fn transition_round_trip_is_identity_up_to_deck_maps() {
    let w = Weights::new(3, 2, 4, 5).unwrap();
    for (a, b) in [(ChartId::Orig, ChartId::C2), (ChartId::C1, ChartId::C2), (ChartId::C2, ChartId::C3)] {
        let there = transition_map(&w, a, b);
        let back = transition_map(&w, b, a);
        // Going back with σ' = σ⁻¹ recovers the original coordinates.
        let mut inv = painleve_atlas::algebra::MonomialMap::new();
        inv.insert(back.sigma, Poly::var_pow(there.sigma, -1));
        let composed = back.forward.compose(&inv).unwrap().compose(&there.forward).unwrap();
        let anchor_var = a.coord(b.anchor());
        for v in a.vars() {
            let img = composed.image(v);
            if Some(v) == anchor_var {
                // This is the defining relation c = σ^(−w_k) of the cover.
                assert_eq!(img, there.inverse.image(v), "{a}->{b}: {v}");
            } else {
                assert_eq!(img, Poly::var(v), "{a}->{b}: {v}");
            }
        }
    }
}

#[test]
fn generic_user_system_round_trips() {
    let ode = PlanarODE::new(p("y^2 + z"), p("x"));
    let w = Weights::new(3, 2, 4, 5).unwrap();
    assert!(to_chart(&ode, &w, ChartId::C3).is_ok());
}
