//! Inhomogeneous charts of ℂP³(p,q,r,s) and the fields they carry.
//!
//! Homogeneous coordinates are (x, y, z, ε) with weights (p, q, r, s). The
//! chart anchored at index k sets that coordinate to 1; its three remaining
//! coordinates are listed in homogeneous order. Every chart change is carried
//! out on a cyclic cover: with c the old coordinate at index k we put
//! c = σ^(−w_k), rewrite the field, and descend by σ^(w_j) = N_j where j is
//! the old anchor. Descent succeeds iff all σ-exponents agree mod w_j.

use crate::algebra::{AlgebraError, Monomial, MonomialMap, Poly, RatFn, Var, Q};
use crate::newton_weights::{check_zs_invariance, PlanarODE, Weights};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartId {
    Orig,
    C1,
    C2,
    C3,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("not ℤ_s-invariant: σ-exponents {exponents:?} are not congruent mod {modulus}")]
    NotZsInvariant { exponents: Vec<i64>, modulus: i64 },
    #[error("system is not ℤ_s-invariant for weights {0}")]
    SystemNotInvariant(Weights),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl ChartId {
    pub const ALL: [ChartId; 4] = [ChartId::Orig, ChartId::C1, ChartId::C2, ChartId::C3];
    pub const AT_INFINITY: [ChartId; 3] = [ChartId::C1, ChartId::C2, ChartId::C3];

    pub fn parse(tag: &str) -> Option<ChartId> {
        match tag.to_ascii_lowercase().as_str() {
            "orig" | "c0" | "c4" => Some(ChartId::Orig),
            "c1" | "1" => Some(ChartId::C1),
            "c2" | "2" => Some(ChartId::C2),
            "c3" | "3" => Some(ChartId::C3),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ChartId::Orig => "orig",
            ChartId::C1 => "c1",
            ChartId::C2 => "c2",
            ChartId::C3 => "c3",
        }
    }

    /// Homogeneous index set to 1 in this chart.
    pub fn anchor(self) -> usize {
        match self {
            ChartId::C1 => 0,
            ChartId::C2 => 1,
            ChartId::C3 => 2,
            ChartId::Orig => 3,
        }
    }

    pub fn from_anchor(k: usize) -> ChartId {
        [ChartId::C1, ChartId::C2, ChartId::C3, ChartId::Orig][k]
    }

    fn names(self) -> [&'static str; 3] {
        match self {
            ChartId::Orig => ["x", "y", "z"],
            ChartId::C1 => ["Y1", "Z1", "eps1"],
            ChartId::C2 => ["X2", "Z2", "eps2"],
            ChartId::C3 => ["X3", "Y3", "eps3"],
        }
    }

    /// Chart variables in homogeneous order.
    pub fn vars(self) -> [Var; 3] {
        self.names().map(Var::new)
    }

    /// Homogeneous indices of the chart variables, in order.
    pub fn indices(self) -> [usize; 3] {
        let a = self.anchor();
        let mut out = [0; 3];
        let mut n = 0;
        for h in 0..4 {
            if h != a {
                out[n] = h;
                n += 1;
            }
        }
        out
    }

    /// Variable at homogeneous index `h`, none for the anchor.
    pub fn coord(self, h: usize) -> Option<Var> {
        self.indices().iter().position(|&i| i == h).map(|i| self.vars()[i])
    }

    /// Position of homogeneous index `h` among the chart variables.
    pub fn slot(self, h: usize) -> Option<usize> {
        self.indices().iter().position(|&i| i == h)
    }

    /// The coordinate playing the role of ε (z in the original chart).
    pub fn eps_var(self) -> Var {
        self.vars()[2]
    }
}

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Autonomous polynomial field on the ℂ³ lift of one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartVectorField {
    pub chart: ChartId,
    pub weights: Weights,
    pub components: [Poly; 3],
    /// The chart is ℂ³/ℤ_k with k = orbifold_order.
    pub orbifold_order: i64,
    /// ω ∈ ℤ_k acts on the chart variables by ω^(residue).
    pub orbifold_residues: [i64; 3],
}

impl ChartVectorField {
    pub fn vars(&self) -> [Var; 3] {
        self.chart.vars()
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for c in out.components.iter_mut() {
            *c = -&*c;
        }
        out
    }

    /// Monomial in the non-ε chart variables dividing the ε-component.
    ///
    /// Dividing every component by it gives the field written with the
    /// paper-style time variable; it is 1 unless the chart anchor meets the
    /// ε-component with a monomial factor (as X₂ for P_I and P_II).
    pub fn time_factor(&self) -> Monomial {
        let e = self.chart.eps_var();
        self.components[2].monomial_content().without(e).retain_dynamical()
    }

    /// The components divided by the time factor (Laurent in general).
    pub fn divided(&self) -> [Poly; 3] {
        let inv = self.time_factor().inv();
        self.components.clone().map(|c| c.mul_monomial(&inv))
    }

    /// (dA/dε, dB/dε) for the chart variables A, B.
    pub fn non_autonomous(&self) -> [RatFn; 2] {
        let den = &self.components[2];
        [0, 1].map(|i| RatFn::new(self.components[i].clone(), den.clone()).expect("ε-component is nonzero"))
    }

    /// The planar field on the infinity set {ε = 0}.
    pub fn infinity_restriction(&self) -> [Poly; 2] {
        let e = self.chart.eps_var();
        [0, 1].map(|i| self.components[i].subs(e, &Poly::zero()).expect("polynomial in ε"))
    }

    /// Applies the chart's generator ω to a monomial: the residue Σ aᵢeᵢ mod k.
    pub fn residue(&self, m: &Monomial) -> i64 {
        let vars = self.vars();
        let r: i64 = vars.iter().zip(self.orbifold_residues).map(|(v, a)| a * m.exp(*v) as i64).sum();
        r.mod_floor(&self.orbifold_order)
    }

    /// Equivariance under the chart's cyclic action, up to a character.
    ///
    /// Component i must transform like its variable times a fixed character
    /// ω^c; c absorbs the reversal of time the action may induce.
    pub fn orbifold_action_check(&self) -> bool {
        self.equivariance_character().is_some()
    }

    pub fn equivariance_character(&self) -> Option<i64> {
        let k = self.orbifold_order;
        let mut character: Option<i64> = None;
        for (i, comp) in self.components.iter().enumerate() {
            for (m, _) in comp.terms() {
                let c = (self.residue(m) - self.orbifold_residues[i]).mod_floor(&k);
                match character {
                    None => character = Some(c),
                    Some(prev) if prev != c => return None,
                    _ => {}
                }
            }
        }
        Some(character.unwrap_or(0))
    }

    /// Whether the field is polynomial in its chart variables.
    pub fn is_polynomial(&self) -> bool {
        self.components.iter().all(|c| c.terms().all(|(m, _)| m.pairs().iter().all(|&(_, e)| e >= 0)))
    }

    /// Re-derives the field in another chart.
    pub fn change_chart(&self, to: ChartId) -> Result<ChartVectorField, ChartError> {
        let comps = transform(&self.components, &self.weights, self.chart, to)?;
        Ok(build(self.weights, to, comps))
    }
}

trait RetainDynamical {
    fn retain_dynamical(self) -> Monomial;
}

impl RetainDynamical for Monomial {
    fn retain_dynamical(self) -> Monomial {
        Monomial::from_pairs(self.pairs().iter().copied().filter(|(v, _)| !v.is_parameter()))
    }
}

fn orbifold_data(w: &Weights, chart: ChartId) -> (i64, [i64; 3]) {
    let ws = w.as_array();
    let k = ws[chart.anchor()];
    (k, chart.indices().map(|h| ws[h].mod_floor(&k)))
}

fn build(weights: Weights, chart: ChartId, components: [Poly; 3]) -> ChartVectorField {
    let (orbifold_order, orbifold_residues) = orbifold_data(&weights, chart);
    ChartVectorField { chart, weights, components, orbifold_order, orbifold_residues }
}

/// The original system as the field (f, g, 1) in (x, y, z).
pub fn original_field(ode: &PlanarODE, w: &Weights) -> ChartVectorField {
    build(*w, ChartId::Orig, [ode.f.clone(), ode.g.clone(), Poly::one()])
}

/// Derives the associated polynomial field of `ode` in `chart`.
///
/// The result is fixed up to sign: common monomial and positive rational
/// content are removed. Orientation conventions for the builtin systems live
/// in [`crate::catalog`].
pub fn to_chart(ode: &PlanarODE, w: &Weights, chart: ChartId) -> Result<ChartVectorField, ChartError> {
    if !check_zs_invariance(ode, w) {
        return Err(ChartError::SystemNotInvariant(*w));
    }
    let orig = original_field(ode, w);
    if chart == ChartId::Orig {
        return Ok(orig);
    }
    orig.change_chart(chart)
}

/// Core change of chart from `from` to `to` for fields on the lifts.
fn transform(comps: &[Poly; 3], w: &Weights, from: ChartId, to: ChartId) -> Result<[Poly; 3], ChartError> {
    if from == to {
        return Ok(comps.clone());
    }
    let ws = w.as_array();
    let j = from.anchor();
    let k = to.anchor();
    let (wj, wk) = (ws[j], ws[k]);
    let sigma = Var::fresh("sigma");
    let sig = |e: i64| Monomial::var(sigma, e as i32);

    let mut subs = MonomialMap::new();
    for h in from.indices() {
        let v = from.coord(h).unwrap();
        let image = if h == k {
            Poly::term(sig(-wk), Q::one())
        } else {
            Poly::var(to.coord(h).unwrap()).mul_monomial(&sig(-ws[h]))
        };
        subs.insert(v, image);
    }
    let lifted: Vec<Poly> = comps.iter().map(|c| c.substitute(&subs)).collect::<Result<_, _>>()?;
    let fc = &lifted[from.slot(k).unwrap()];

    let mut out: Vec<Poly> = Vec::with_capacity(3);
    for h in to.indices() {
        let g = if h == j {
            fc.mul_monomial(&sig(wj + wk)).scale(&Q::from_integer((-wj).into()))
        } else {
            let fh = &lifted[from.slot(h).unwrap()];
            let nh = Poly::var(to.coord(h).unwrap());
            let a = fh.mul_monomial(&sig(ws[h])).scale(&Q::from_integer(wk.into()));
            let b = (&nh * fc).mul_monomial(&sig(wk)).scale(&Q::from_integer(ws[h].into()));
            &a - &b
        };
        out.push(g);
    }

    // Descent: σ^(w_j) becomes the to-chart coordinate at index j.
    let exps: Vec<i64> = out.iter().flat_map(|p| p.terms().map(|(m, _)| m.exp(sigma) as i64)).collect();
    let Some(&emin) = exps.iter().min() else {
        return Ok([Poly::zero(), Poly::zero(), Poly::zero()]);
    };
    if exps.iter().any(|e| (e - emin) % wj != 0) {
        let mut distinct = exps.clone();
        distinct.sort();
        distinct.dedup();
        return Err(ChartError::NotZsInvariant { exponents: distinct, modulus: wj });
    }
    let nj = to.coord(j).unwrap();
    let descended: Vec<Poly> = out
        .iter()
        .map(|p| {
            Poly::from_terms(p.terms().map(|(m, c)| {
                let e = m.exp(sigma) as i64;
                (m.without(sigma).mul(&Monomial::var(nj, ((e - emin) / wj) as i32)), c.clone())
            }))
        })
        .collect();
    Ok(clear(descended))
}

/// Removes common dynamical monomial content and positive rational content.
fn clear(comps: Vec<Poly>) -> [Poly; 3] {
    let mut content: Option<Monomial> = None;
    for p in &comps {
        if p.is_zero() {
            continue;
        }
        let m = p.monomial_content().retain_dynamical();
        content = Some(match content {
            None => m,
            Some(prev) => prev.min_with(&m),
        });
    }
    let inv = content.unwrap_or_else(Monomial::one).inv();
    let shifted: Vec<Poly> = comps.iter().map(|p| p.mul_monomial(&inv)).collect();
    let scale = rational_content(&shifted);
    let arr: [Poly; 3] = [shifted[0].clone(), shifted[1].clone(), shifted[2].clone()];
    if scale.is_zero() {
        return arr;
    }
    let inv_scale = Q::one() / scale;
    arr.map(|p| p.scale(&inv_scale))
}

/// Positive gcd of all coefficients (gcd of numerators over lcm of denominators).
fn rational_content(ps: &[Poly]) -> Q {
    let mut num = num_bigint::BigInt::zero();
    let mut den = num_bigint::BigInt::one();
    for p in ps {
        for (_, c) in p.terms() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
    }
    if num.is_zero() {
        return Q::zero();
    }
    Q::new(num.abs(), den)
}

/// Transition from chart `from` to chart `to` on the cyclic cover.
#[derive(Clone, Debug)]
pub struct Transition {
    pub from: ChartId,
    pub to: ChartId,
    /// Uniformizer σ of the w_k-fold cover.
    pub sigma: Var,
    /// Coordinates of `to` as monomials in the `from` variables and σ.
    pub forward: MonomialMap,
    /// Coordinates of `from` as monomials in the `to` variables and σ.
    pub inverse: MonomialMap,
    /// Order of the cover (w_k); σ ↦ ωσ with ω^order = 1 are the deck maps.
    pub cover_order: i64,
}

/// Exact monomial transition; the old coordinate at the new anchor is σ^(−w_k).
///
/// For from = to the maps are the identity and σ does not occur.
pub fn transition_map(w: &Weights, from: ChartId, to: ChartId) -> Transition {
    let sigma = Var::fresh("sigma");
    if from == to {
        return Transition { from, to, sigma, forward: MonomialMap::new(), inverse: MonomialMap::new(), cover_order: 1 };
    }
    let ws = w.as_array();
    let (j, k) = (from.anchor(), to.anchor());
    let sig = |e: i64| Monomial::var(sigma, e as i32);
    let mut forward = MonomialMap::new();
    let mut inverse = MonomialMap::new();
    for h in to.indices() {
        let nh = to.coord(h).unwrap();
        let image = if h == j {
            Poly::term(sig(ws[j]), Q::one())
        } else {
            Poly::var(from.coord(h).unwrap()).mul_monomial(&sig(ws[h]))
        };
        forward.insert(nh, image);
    }
    for h in from.indices() {
        let ch = from.coord(h).unwrap();
        let image = if h == k {
            Poly::term(sig(-ws[k]), Q::one())
        } else {
            Poly::var(to.coord(h).unwrap()).mul_monomial(&sig(-ws[h]))
        };
        inverse.insert(ch, image);
    }
    Transition { from, to, sigma, forward, inverse, cover_order: ws[k] }
}

/// Whether two points of the infinity set ℂP²(p,q,r) coincide, i.e. some
/// λ ≠ 0 has (λᵖa, λ^q b, λʳc) = (a', b', c'). Inputs are complex triples.
pub fn same_weighted_point(pqr: [i64; 3], a: [num_complex::Complex64; 3], b: [num_complex::Complex64; 3], tol: f64) -> bool {
    let za: Vec<bool> = a.iter().map(|v| v.norm() < tol).collect();
    let zb: Vec<bool> = b.iter().map(|v| v.norm() < tol).collect();
    if za != zb {
        return false;
    }
    let nz: Vec<usize> = (0..3).filter(|&i| !za[i]).collect();
    let Some(&i0) = nz.first() else { return true };
    // λ^(w_i0) = b/a fixes λ up to a w_i0-th root of unity; try each.
    let w0 = pqr[i0];
    let ratio = b[i0] / a[i0];
    let base = ratio.powf(1.0 / w0 as f64);
    (0..w0).any(|m| {
        let lam = base * num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / w0 as f64);
        nz.iter().all(|&i| (lam.powi(pqr[i] as i32) * a[i] - b[i]).norm() < tol * (1.0 + b[i].norm()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    fn w_pi() -> Weights {
        Weights::new(3, 2, 4, 5).unwrap()
    }

    fn p1() -> PlanarODE {
        PlanarODE::new(parse_poly("6*y^2 + z").unwrap(), parse_poly("x").unwrap())
    }

    #[test]
    fn anchors_and_variables() {
        assert_eq!(ChartId::C2.indices(), [0, 2, 3]);
        assert_eq!(ChartId::C2.coord(1), None);
        assert_eq!(ChartId::C3.coord(1), Some(Var::new("Y3")));
        assert_eq!(ChartId::Orig.eps_var(), Var::new("z"));
    }

    #[test]
    fn natural_c2_field_of_p1() {
        let vf = to_chart(&p1(), &w_pi(), ChartId::C2).unwrap();
        let expect = ["12 + 2*Z2 - 3*X2^2", "2*eps2 - 4*X2*Z2", "-5*X2*eps2"].map(|s| parse_poly(s).unwrap());
        assert_eq!(vf.components, expect);
        assert_eq!(vf.time_factor(), Monomial::var(Var::new("X2"), 1));
        assert_eq!(vf.orbifold_order, 2);
        assert_eq!(vf.orbifold_residues, [1, 0, 1]);
    }

    #[test]
    fn descent_failure_is_reported() {
        let bad = PlanarODE::new(parse_poly("y").unwrap(), parse_poly("x").unwrap());
        assert!(matches!(to_chart(&bad, &w_pi(), ChartId::C2), Err(ChartError::SystemNotInvariant(_))));
        // Bypassing the precheck exposes the descent failure itself.
        let orig = original_field(&bad, &w_pi());
        assert!(matches!(orig.change_chart(ChartId::C3), Err(ChartError::NotZsInvariant { .. })));
    }

    #[test]
    fn asymmetric_field_fails_equivariance() {
        let mut vf = to_chart(&p1(), &w_pi(), ChartId::C2).unwrap();
        assert!(vf.orbifold_action_check());
        vf.components[0] = &vf.components[0] + &parse_poly("X2").unwrap();
        assert!(!vf.orbifold_action_check());
    }

    #[test]
    fn transition_orig_to_c2() {
        let t = transition_map(&w_pi(), ChartId::Orig, ChartId::C2);
        let s = t.sigma;
        let x = Var::new("x");
        assert_eq!(t.forward.image(Var::new("X2")), Poly::var(x).mul_monomial(&Monomial::var(s, 3)));
        assert_eq!(t.forward.image(Var::new("eps2")), Poly::term(Monomial::var(s, 5), Q::one()));
        assert_eq!(t.inverse.image(Var::new("y")), Poly::term(Monomial::var(s, -2), Q::one()));
        let id = transition_map(&w_pi(), ChartId::C1, ChartId::C1);
        assert_eq!(id.forward.entries().count(), 0);
    }

    #[test]
    fn weighted_point_equivalence() {
        use num_complex::Complex64 as C;
        let p = [C::new(2.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
        let m = [C::new(-2.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
        assert!(same_weighted_point([2, 1, 2], p, p, 1e-12));
        // λ = i maps (2,0,0) to (−2,0,0) for weight 2 on the first slot.
        assert!(same_weighted_point([2, 1, 2], p, m, 1e-12));
        assert!(!same_weighted_point([3, 2, 4], [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)], p, 1e-12));
    }
}
