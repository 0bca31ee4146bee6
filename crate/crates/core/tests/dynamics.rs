//! Pole-crossing integration, Boutroux flows and level sets. Pole locations
//! are checked against an independent Taylor-series oracle; everything else
//! against exact series data or closed forms.

use painleve_atlas::catalog::System;
use painleve_atlas::dynamics::*;
use painleve_atlas::weyl::boutroux_hamiltonian;
use painleve_atlas::algebra::{sym, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn no_params() -> BTreeMap<Var, C> {
    BTreeMap::new()
}

/// Radius of convergence of the Taylor series of y'' = 6y² + z, y(0) = y'(0) = 0.
/// All coefficients are nonnegative, so the nearest singularity lies on the
/// positive axis; the fivefold rotation symmetry makes only every fifth
/// coefficient nonzero, and a double pole gives c_n / c_(n+5) = z★⁵ (n+6)/(n+1).
fn p1_taylor_pole() -> f64 {
    let n = 400;
    let mut a = vec![0.0f64; n + 2];
    for k in 0..n {
        // (k+2)(k+1) a_(k+2) = 6 Σ a_i a_(k−i) + [k = 1]
        let conv: f64 = (0..=k).map(|i| a[i] * a[k - i]).sum();
        a[k + 2] = (6.0 * conv + if k == 1 { 1.0 } else { 0.0 }) / ((k + 2) as f64 * (k + 1) as f64);
    }
    let m = 3 + 5 * 70;
    let r = a[m] / a[m + 5] * (m + 6) as f64 / (m + 1) as f64;
    r.powf(0.2)
}

#[test]
fn p1_pole_matches_the_taylor_oracle() {
    let zstar = p1_taylor_pole();
    assert!((zstar - 2.6155712098636).abs() < 1e-9, "oracle {zstar}");
    let path = PathSpec::segment(c(0.0, 0.0), c(3.5, 0.0)).unwrap();
    let tr = integrate_with_switching(System::P1, &no_params(), [c(0.0, 0.0); 2], &path, &IntegratorOptions::default()).unwrap();
    assert_eq!(tr.poles.len(), 1);
    let p = &tr.poles[0];
    assert_eq!(p.order, 2);
    assert!((p.location - c(zstar, 0.0)).norm() < 1e-8, "{} vs {zstar}", p.location);
    assert_eq!(p.leading[1].exponent, -2);
    assert!((p.leading[1].coefficient - c(1.0, 0.0)).norm() < 1e-8);
    assert_eq!(p.leading[0].exponent, -3);
    assert!((p.leading[0].coefficient - c(-2.0, 0.0)).norm() < 1e-8);
}

#[test]
fn p1_negative_axis_is_pole_free() {
    let path = PathSpec::segment(c(0.0, 0.0), c(-6.0, 0.0)).unwrap();
    let tr = integrate_with_switching(System::P1, &no_params(), [c(0.0, 0.0); 2], &path, &IntegratorOptions::default()).unwrap();
    assert!(tr.poles.is_empty() && tr.junctions.is_empty());
    let ymax = tr.base_samples().iter().map(|b| b.2[1].norm()).fold(0.0, f64::max);
    assert!(ymax < 2.0, "{ymax}");
}

#[test]
fn base_chart_alone_collapses_at_the_pole() {
    let atlas = NumAtlas::new(System::P1, &no_params()).unwrap();
    let path = PathSpec::segment(c(0.0, 0.0), c(6.0, 0.0)).unwrap();
    match integrate_complex(&atlas.base, &[c(0.0, 0.0); 2], &path, &IntegratorOptions::default()) {
        Err(DynError::StepUnderflow { z, .. }) => assert!((z.re - 2.6155712).abs() < 1e-4, "{z}"),
        other => panic!("expected step underflow, got {:?}", other.map(|t| t.samples.len())),
    }
}

struct Problem {
    params: BTreeMap<Var, C>,
    init: [C; 2],
    path: PathSpec,
}

fn random_problem(sys: System, rng: &mut ChaCha8Rng) -> Problem {
    let params = sys.parameters().into_iter().map(|p| (p, c(rng.gen_range(-1.0..1.0), 0.0))).collect();
    let mut z = || c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let init = [z(), z()];
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Problem { params, init, path: PathSpec::segment(c(0.0, 0.0), C::from_polar(4.0, phi)).unwrap() }
}

#[test]
fn random_trajectories_cross_poles_faithfully() {
    let opts = IntegratorOptions::default();
    for sys in System::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut crossed = 0;
        for _ in 0..8 {
            let pr = random_problem(sys, &mut rng);
            let tr = integrate_with_switching(sys, &pr.params, pr.init, &pr.path, &opts).unwrap();
            for j in &tr.junctions {
                assert!(j.defect < 1e-12, "{sys} junction {j:?}");
            }
            if tr.poles.is_empty() {
                continue;
            }
            crossed += 1;
            for p in &tr.poles {
                assert_eq!(p.order, if sys == System::P1 { 2 } else { 1 }, "{sys}");
                let fit = laurent_refit(&tr, p, 4, 0.1).unwrap();
                assert!(fit.max_deviation < 1e-6, "{sys} refit {}", fit.max_deviation);
            }
            let back = integrate_with_switching(sys, &pr.params, [tr.final_base[0], tr.final_base[1]], &pr.path.reversed(), &opts).unwrap();
            let rt = (back.final_base[0] - pr.init[0]).norm().max((back.final_base[1] - pr.init[1]).norm());
            assert!(rt < 1e-8, "{sys} round trip {rt:e}");
            if sys == System::P1 {
                let d = hamiltonian_relation_defect(&tr, &pr.path, &opts).unwrap();
                assert!(d < 1e-8, "H defect {d:e}");
            }
        }
        assert!(crossed > 0, "{sys}: no trajectory met a pole");
    }
}

#[test]
fn p2_balances_have_opposite_residues() {
    // y ~ ±1/T at the two balances of P_II
    let mut params = BTreeMap::new();
    params.insert(sym::alpha(), c(0.3, 0.0));
    let path = PathSpec::new(vec![c(0.0, 0.0), c(3.0, 0.0), c(3.0, 3.0)]).unwrap();
    let tr = integrate_with_switching(System::P2, &params, [c(1.0, 0.0), c(1.0, 0.0)], &path, &IntegratorOptions::default()).unwrap();
    assert!(!tr.poles.is_empty());
    for p in &tr.poles {
        let r = p.leading[1].coefficient;
        let expected = if p.chart == "P2+" { 1.0 } else { -1.0 };
        assert!((r - c(expected, 0.0)).norm() < 1e-7, "{} residue {r}", p.chart);
    }
}

#[test]
fn local_integrals_are_constant_near_the_p1_pole() {
    let path = PathSpec::segment(c(0.0, 0.0), c(3.5, 0.0)).unwrap();
    let tr = integrate_with_switching(System::P1, &no_params(), [c(0.0, 0.0); 2], &path, &IntegratorOptions::default()).unwrap();
    let p = &tr.poles[0];
    let rep = local_integral_drift(&tr, p, 4, 0.3).unwrap();
    assert!(rep.samples >= 3);
    assert!(rep.drift[0] < 1e-9, "C1 drift {:e}", rep.drift[0]);
    assert!(rep.max_c1_minus_pole < 1e-8, "C1 − z★ {:e}", rep.max_c1_minus_pole);
    assert!(rep.drift[1] < 1e-6, "C2 drift {:e}", rep.drift[1]);
}

#[test]
fn boutroux_energy_is_conserved_to_fifth_order() {
    let cases = [
        (System::P1, [c(0.0, 0.0), c(0.0, 0.5)], C::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        (System::P2, [c(0.0, 0.0), c(1.0, 0.0)], c(0.0, 1.0)),
        (System::P4, [c(0.5, 0.0), c(-0.5, 0.0)], c(1.0, 0.0)),
    ];
    for (sys, init, dir) in cases {
        let base = IntegratorOptions::default();
        let d1 = boutroux_energy_drift(sys, init, dir, 10.0, &base).unwrap();
        let d2 = boutroux_energy_drift(sys, init, dir, 10.0, &base.clone().with_rtol(5e-11)).unwrap();
        assert!(d1.drift < 1e-9, "{sys} drift {:e}", d1.drift);
        assert!(d1.max_state < 100.0, "{sys} orbit escaped");
        let ratio = d1.drift / d2.drift;
        assert!((1.4..3.0).contains(&ratio), "{sys} halving ratio {ratio}");
    }
}

#[test]
fn h4_zero_set_is_the_triangle() {
    let sets = level_set_sampler(System::P4, &[0.0], [-3.1, 4.9, -4.9, 3.1], 160);
    let set = &sets[0];
    let mut on = [0usize; 3];
    let mut n = 0;
    for &(x, y) in set.points() {
        let d = [x.abs(), y.abs(), (x - y - 2.0).abs() / 2f64.sqrt()];
        let (k, m) = d.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
        assert!(*m < 2.0 * set.spacing, "({x}, {y}) is {m} from the lines");
        on[k] += 1;
        n += 1;
    }
    assert!(n > 300 && on.iter().all(|k| *k > 50), "{on:?}");
}

#[test]
fn generic_level_points_straddle_the_level() {
    for (sys, cval) in [(System::P1, 0.7), (System::P2, 0.25), (System::P4, -1.3)] {
        let h = boutroux_hamiltonian(sys);
        let eval = |x: f64, y: f64| {
            let env: HashMap<Var, C> = [(Var::new("X3"), c(x, 0.0)), (Var::new("Y3"), c(y, 0.0))].into_iter().collect();
            h.eval_c64(&env).re
        };
        let sets = level_set_sampler(sys, &[cval], [-2.0, 2.0, -2.0, 2.0], 100);
        let s = &sets[0];
        assert!(s.points().count() > 20, "{sys}");
        for &(x, y) in s.points() {
            let e = s.spacing;
            let vals = [eval(x - e, y), eval(x + e, y), eval(x, y - e), eval(x, y + e)];
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(lo <= cval && cval <= hi, "{sys} ({x}, {y})");
        }
    }
}

#[test]
fn level_set_outside_the_range_is_empty() {
    // H_IV has no real zero off its three lines inside this box
    let sets = level_set_sampler(System::P4, &[0.0], [0.5, 1.5, 0.5, 1.5], 40);
    assert!(sets[0].polylines.is_empty());
    assert!(level_set_sampler(System::P4, &[0.0], [1.0, 0.0, 0.0, 1.0], 40).is_empty());
}

#[test]
fn csv_has_one_row_per_sample() {
    let path = PathSpec::segment(c(0.0, 0.0), c(3.5, 0.0)).unwrap();
    let tr = integrate_with_switching(System::P1, &no_params(), [c(0.0, 0.0); 2], &path, &IntegratorOptions::default()).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "arc_param,re_z,im_z,chart,re_x,im_x,re_y,im_y,local_error");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), tr.base_samples().len());
    assert!(rows.iter().any(|r| r.contains(",P1+,")));
}

#[test]
fn zero_field_leaves_the_state_fixed() {
    let f = FnField { dim: 2, f: |_z: C, _y: &[C], out: &mut [C]| out.fill(c(0.0, 0.0)) };
    let path = PathSpec::new(vec![c(0.0, 0.0), c(1.0, 1.0), c(-2.0, 0.5)]).unwrap();
    let init = [c(0.3, -0.2), c(1.0, 2.0)];
    let tr = integrate_complex(&f, &init, &path, &IntegratorOptions::default()).unwrap();
    for s in &tr.samples {
        assert_eq!(s.state, init.to_vec());
    }
}

#[test]
fn invalid_options_are_rejected() {
    let mut o = IntegratorOptions::default();
    o.switch_back = o.switch_out;
    assert!(matches!(o.validate(), Err(DynError::Options(_))));
    let o = IntegratorOptions { rtol: 0.0, ..Default::default() };
    assert!(o.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // y' = λ y along a polyline: the endpoint is exp(λ Δz) y₀ regardless of the route.
    #[test]
    fn linear_flow_matches_the_exponential(lr in -1.0f64..1.0, li in -1.0f64..1.0, mx in -2.0f64..2.0, my in -2.0f64..2.0, ex in -2.0f64..2.0, ey in -2.0f64..2.0) {
        let lam = c(lr, li);
        let f = FnField { dim: 1, f: move |_z: C, y: &[C], out: &mut [C]| out[0] = lam * y[0] };
        let path = PathSpec::new(vec![c(0.0, 0.0), c(mx, my), c(ex, ey)]).unwrap();
        let tr = integrate_complex(&f, &[c(1.0, 0.0)], &path, &IntegratorOptions::default()).unwrap();
        let last = tr.samples.last().unwrap();
        let exact = (lam * c(ex, ey)).exp();
        prop_assert!((last.state[0] - exact).norm() < 1e-8 * (1.0 + exact.norm()));
        prop_assert!((last.z - c(ex, ey)).norm() < 1e-12);
    }

    // Reversal traverses the same points in the opposite order.
    #[test]
    fn reversed_path_has_mirrored_points(ax in -3.0f64..3.0, ay in -3.0f64..3.0, bx in -3.0f64..3.0, by in -3.0f64..3.0, t in 0.0f64..1.0) {
        prop_assume!((ax - bx).abs() + (ay - by).abs() > 1e-3);
        let p = PathSpec::new(vec![c(0.0, 0.0), c(ax, ay), c(bx, by)]).unwrap();
        let r = p.reversed();
        let l = p.length();
        prop_assert!((r.length() - l).abs() < 1e-12);
        prop_assert!((p.point(t * l) - r.point((1.0 - t) * l)).norm() < 1e-10);
    }
}
