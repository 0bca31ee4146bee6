//! Bäcklund symmetries of P_II and P_IV as birational maps, their extension
//! to the weighted charts and their restriction to the infinity set.
//!
//! Coefficients live in ℚ(i) because σ₁, σ₂ of P_IV involve i. An action maps
//! solutions of the system with parameters a to solutions with parameters
//! μ(a); composition g∘h applies h first and evaluates g at μ_h(a).

use crate::algebra::{gauss_i, parse_poly, subs_poly_rat, AlgebraError, GPoly, GaussQ, LaurentPoly, Monomial, MonomialMap, Poly, RationalFn, Var};
use crate::catalog::System;
use crate::charts::{transition_map, ChartId};
use crate::newton_weights::Weights;
use num_traits::One;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

pub type GRat = RationalFn<GaussQ>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeylError {
    #[error("no Bäcklund group is tabulated for {0}")]
    NoGroup(System),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("the new anchor coordinate has no rational {0}-th root on the cover")]
    NeedsRoot(i64),
    #[error("image {0} does not descend from the cover to the chart")]
    NotDescending(String),
    #[error("only the Boutroux chart c3 carries the Hamiltonians at infinity")]
    NotBoutrouxChart,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, WeylError>;

/// Parse with `I` standing for the imaginary unit.
pub fn gparse(src: &str) -> GPoly {
    let p = parse_poly(src).expect("builtin expression parses");
    let i = Var::new("I");
    let g = p.to_gauss();
    if !g.depends_on(i) {
        return g;
    }
    g.substitute(&MonomialMap::from_pairs([(i, GPoly::constant(gauss_i()))])).expect("constant substitution")
}

fn gr(num: &str) -> GRat {
    GRat::from_poly(gparse(num))
}

fn gq(num: &str, den: &str) -> GRat {
    GRat::new(gparse(num), gparse(den)).expect("nonzero denominator")
}

fn poly_g(p: &Poly) -> GRat {
    GRat::from_poly(p.to_gauss())
}

/// A birational map of (x, y, z) together with a parameter map.
#[derive(Clone, Debug)]
pub struct BirationalAction {
    pub name: String,
    pub system: System,
    pub params: BTreeMap<Var, GRat>,
    /// Images of x, y, z.
    pub vars: [GRat; 3],
}

impl BirationalAction {
    pub fn identity(system: System) -> Self {
        let params = system.parameters().into_iter().map(|p| (p, GRat::var(p))).collect();
        let vars = ChartId::Orig.vars().map(GRat::var);
        BirationalAction { name: "id".into(), system, params, vars }
    }

    fn substitution(&self) -> BTreeMap<Var, GRat> {
        let mut m: BTreeMap<Var, GRat> = self.params.clone();
        for (v, img) in ChartId::Orig.vars().iter().zip(&self.vars) {
            m.insert(*v, img.clone());
        }
        m
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &BirationalAction) -> Result<BirationalAction> {
        let sub = other.substitution();
        let vars = [self.vars[0].substitute(&sub)?, self.vars[1].substitute(&sub)?, self.vars[2].substitute(&sub)?];
        let psub: BTreeMap<Var, GRat> = other.params.clone();
        let mut params = BTreeMap::new();
        for (p, img) in &self.params {
            params.insert(*p, img.substitute(&psub)?);
        }
        Ok(BirationalAction { name: format!("{}∘{}", self.name, other.name), system: self.system, params, vars })
    }

    pub fn is_identity(&self) -> bool {
        let id = BirationalAction::identity(self.system);
        self.vars == id.vars && self.params.iter().all(|(p, img)| *img == GRat::var(*p))
    }

    pub fn same_as(&self, other: &BirationalAction) -> bool {
        self.vars == other.vars && self.params == other.params
    }

    pub fn describe(&self) -> Value {
        let params: BTreeMap<String, String> = self.params.iter().map(|(p, r)| (p.name(), r.to_string())).collect();
        json!({
            "name": self.name,
            "params": params,
            "x": self.vars[0].to_string(),
            "y": self.vars[1].to_string(),
            "z": self.vars[2].to_string(),
        })
    }
}

fn action(system: System, name: &str, params: &[(&str, &str)], vars: [GRat; 3]) -> BirationalAction {
    let params = params.iter().map(|(p, img)| (Var::param(p), gr(img))).collect();
    BirationalAction { name: name.into(), system, params, vars }
}

/// Generators of the extended affine Weyl groups: s₁, π for P_II and
/// s₀, s₁, s₂, π, σ₁, σ₂ for P_IV.
pub fn builtin_group(sys: System) -> Result<Vec<BirationalAction>> {
    let (x, y, z) = (gr("x"), gr("y"), gr("z"));
    match sys {
        System::P2 => {
            let d = gparse("y^2 - x + z/2");
            let d2 = &d * &d;
            let sx = &(&x + &GRat::new(gparse("(2*alpha - 1)*y"), d.clone())?) + &GRat::new(gparse("(alpha - 1/2)^2"), d2)?;
            let sy = &y + &GRat::new(gparse("alpha - 1/2"), d)?;
            Ok(vec![
                action(sys, "s1", &[("alpha", "1 - alpha")], [sx, sy, z.clone()]),
                action(sys, "pi", &[("alpha", "-alpha")], [gr("-x"), gr("-y"), z]),
            ])
        }
        System::P4 => {
            let f0 = gq("2*(1 - kappa + theta)", "x - y - 2*z");
            Ok(vec![
                action(sys, "s0", &[("kappa", "1 + theta"), ("theta", "kappa - 1")], [&x + &f0, &y + &f0, z.clone()]),
                action(sys, "s1", &[("kappa", "-kappa"), ("theta", "theta - kappa")], [&x - &gq("2*kappa", "y"), y.clone(), z.clone()]),
                action(sys, "s2", &[("kappa", "kappa - theta"), ("theta", "-theta")], [x.clone(), &y - &gq("2*theta", "x"), z.clone()]),
                action(sys, "pi", &[("kappa", "-theta"), ("theta", "kappa - theta - 1")], [gr("-x + y + 2*z"), gr("-x"), z]),
                action(sys, "sigma1", &[("kappa", "-theta"), ("theta", "-kappa")], [gr("-I*y"), gr("-I*x"), gr("I*z")]),
                action(sys, "sigma2", &[("kappa", "1 + theta - kappa"), ("theta", "theta")], [gr("I*x"), gr("I*(x - y - 2*z)"), gr("I*z")]),
            ])
        }
        System::P1 => Err(WeylError::NoGroup(sys)),
    }
}

/// σ₂ of P_IV with the tabulated parameter images κ ↦ κ, θ ↦ κ − θ − 1.
/// The Bäcklund identity fails for it by a nonzero constant; the builtin
/// generator uses κ ↦ 1 + θ − κ, θ ↦ θ, the only images making it hold.
pub fn tabulated_sigma2() -> BirationalAction {
    action(System::P4, "sigma2", &[("kappa", "kappa"), ("theta", "kappa - theta - 1")], [gr("I*x"), gr("I*(x - y - 2*z)"), gr("I*z")])
}

pub fn generator(sys: System, name: &str) -> Result<BirationalAction> {
    builtin_group(sys)?.into_iter().find(|a| a.name == name).ok_or_else(|| WeylError::UnknownGenerator(name.into()))
}

/// Residual numerators of the Bäcklund identity D(φ) = ζ'·f(φ, μ(a)).
#[derive(Clone, Debug)]
pub struct BacklundReport {
    pub name: String,
    pub holds: bool,
    pub residual: [GPoly; 2],
}

/// Formal derivation along the source system: D = f ∂_x + g ∂_y + ∂_z.
fn derivation(r: &GRat, f: &GRat, g: &GRat) -> GRat {
    let [x, y, z] = ChartId::Orig.vars();
    &(&(&r.diff(x) * f) + &(&r.diff(y) * g)) + &r.diff(z)
}

/// Checks that the action maps the system with parameters a to the same
/// system with parameters μ(a), as an identity of rational functions.
pub fn verify_backlund(sys: System, a: &BirationalAction) -> Result<BacklundReport> {
    let ode = sys.ode();
    let (f, g) = (poly_g(&ode.f), poly_g(&ode.g));
    let zeta = derivation(&a.vars[2], &f, &g);
    let sub = a.substitution();
    let ft = subs_poly_rat(&ode.f.to_gauss(), &sub)?;
    let gt = subs_poly_rat(&ode.g.to_gauss(), &sub)?;
    let r0 = &derivation(&a.vars[0], &f, &g) - &(&zeta * &ft);
    let r1 = &derivation(&a.vars[1], &f, &g) - &(&zeta * &gt);
    let holds = r0.is_zero() && r1.is_zero();
    Ok(BacklundReport { name: a.name.clone(), holds, residual: [r0.numer().clone(), r1.numer().clone()] })
}

/// Whether the action commutes with the ℤ_s action x ↦ ω^p x, y ↦ ω^q y,
/// z ↦ ω^r z: every image is weighted-homogeneous mod s of the right weight.
pub fn commutes_with_zs(a: &BirationalAction, w: &Weights) -> bool {
    let ws = w.as_array();
    let vars = ChartId::Orig.vars();
    let weights: BTreeMap<Var, i64> = (0..3).map(|i| (vars[i], ws[i])).collect();
    (0..3).all(|i| graded_mod(&a.vars[i], &weights, ws[3]) == Some(ws[i].rem_euclid(ws[3])))
}

/// Weighted degree mod n of a rational function homogeneous mod n.
fn graded_mod<C: crate::algebra::Coeff>(r: &RationalFn<C>, weights: &BTreeMap<Var, i64>, n: i64) -> Option<i64> {
    let deg = |p: &LaurentPoly<C>| -> Option<i64> {
        let mut d: Option<i64> = None;
        for (m, _) in p.terms() {
            let e: i64 = m.pairs().iter().map(|(v, k)| weights.get(v).copied().unwrap_or(0) * *k as i64).sum();
            let e = e.rem_euclid(n);
            match d {
                None => d = Some(e),
                Some(x) if x != e => return None,
                _ => {}
            }
        }
        d.or(Some(0))
    };
    if r.is_zero() {
        return Some(0);
    }
    Some((deg(r.numer())? - deg(r.denom())?).rem_euclid(n))
}

#[derive(Clone, Debug)]
pub struct RelationsReport {
    pub system: System,
    /// Order of each generator (none if above the search bound).
    pub orders: Vec<(String, Option<usize>)>,
    /// s² = id for every reflection.
    pub reflections_involutive: bool,
    /// (g, h, order of g∘h).
    pub table: Vec<(String, String, Option<usize>)>,
}

pub fn order_of(a: &BirationalAction, bound: usize) -> Result<Option<usize>> {
    let mut p = a.clone();
    for n in 1..=bound {
        if p.is_identity() {
            return Ok(Some(n));
        }
        p = a.compose(&p)?;
    }
    Ok(None)
}

/// Orders, involutivity of the reflections and the composition table of the
/// Dynkin automorphisms.
pub fn group_relations(sys: System) -> Result<RelationsReport> {
    let gens = builtin_group(sys)?;
    let mut orders = Vec::new();
    let mut involutive = true;
    for g in &gens {
        let o = order_of(g, 12)?;
        if g.name.starts_with('s') && !g.name.starts_with("sigma") {
            involutive &= o == Some(2);
        }
        orders.push((g.name.clone(), o));
    }
    let autos: Vec<&BirationalAction> = gens.iter().filter(|g| g.name == "pi" || g.name.starts_with("sigma")).collect();
    let mut table = Vec::new();
    for g in &autos {
        for h in &autos {
            let c = g.compose(h)?;
            table.push((g.name.clone(), h.name.clone(), order_of(&c, 12)?));
        }
    }
    Ok(RelationsReport { system: sys, orders, reflections_involutive: involutive, table })
}

// ---------------------------------------------------------------------------
// Charts

/// An action written in the variables of one chart.
#[derive(Clone, Debug)]
pub struct ChartAction {
    pub name: String,
    pub system: System,
    pub chart: ChartId,
    pub params: BTreeMap<Var, GRat>,
    pub images: [GRat; 3],
}

impl ChartAction {
    pub fn is_identity(&self) -> bool {
        let v = self.chart.vars();
        (0..3).all(|i| self.images[i] == GRat::var(v[i]))
    }

    pub fn describe(&self) -> Vec<String> {
        let v = self.chart.vars();
        (0..3).map(|i| format!("{} -> {}", v[i], self.images[i])).collect()
    }
}

fn gauss_units() -> [GaussQ; 4] {
    let one = GaussQ::one();
    [one.clone(), -one, gauss_i(), -gauss_i()]
}

/// Replace σ^e by ε^(−e/s); every exponent must be a multiple of s once the
/// denominator is cleared of σ.
fn descend(r: &GRat, sigma: Var, eps: Var, s: i64) -> Option<GRat> {
    let shift = |p: &GPoly| -> Option<i64> {
        let mut res: Option<i64> = None;
        for (m, _) in p.terms() {
            let e = m.exp(sigma) as i64;
            match res {
                None => res = Some(e.rem_euclid(s)),
                Some(x) if x != e.rem_euclid(s) => return None,
                _ => {}
            }
        }
        res.or(Some(0))
    };
    let (rn, rd) = (shift(r.numer())?, shift(r.denom())?);
    if rn != rd {
        return None;
    }
    let conv = |p: &GPoly| -> GPoly {
        GPoly::from_terms(p.terms().map(|(m, c)| {
            let e = m.exp(sigma) as i64 - rd;
            let rest = m.without(sigma);
            (rest.mul(&Monomial::var(eps, (-e / s) as i32)), c.clone())
        }))
    };
    // multiply numerator and denominator by σ^(−rd)
    GRat::new(conv(r.numer()), conv(r.denom())).ok()
}

/// Conjugate the action by the chart transition on the cover and descend to
/// the chart. The image anchor coordinate fixes the new cover variable σ′;
/// it must be rational, which holds when the anchor weight is 1 or the anchor
/// is z and z ↦ c z with c a Gaussian root of unity power.
pub fn extend_to_chart(a: &BirationalAction, w: &Weights, chart: ChartId) -> Result<ChartAction> {
    if chart == ChartId::Orig {
        return Ok(ChartAction { name: a.name.clone(), system: a.system, chart, params: a.params.clone(), images: a.vars.clone() });
    }
    let ws = w.as_array();
    let t = transition_map(w, chart, ChartId::Orig);
    let sigma = t.sigma;
    let orig = ChartId::Orig.vars();
    let mut sub: BTreeMap<Var, GRat> = a.params.iter().map(|(p, _)| (*p, GRat::var(*p))).collect();
    for v in orig {
        sub.insert(v, GRat::from_poly(t.forward.image(v).to_gauss()));
    }
    let base_new: Vec<GRat> = a.vars.iter().map(|r| r.substitute(&sub)).collect::<std::result::Result<_, _>>()?;
    let k = chart.anchor();
    let wk = ws[k];
    let anchor_img = &base_new[k];
    let sigma_new = if wk == 1 {
        anchor_img.clone()
    } else {
        let sv = GRat::var(sigma);
        gauss_units()
            .into_iter()
            .map(|rho| sv.scale(&rho))
            .find(|cand| cand.pow(wk).map(|p| p == *anchor_img).unwrap_or(false))
            .ok_or(WeylError::NeedsRoot(wk))?
    };
    let eps = chart.eps_var();
    let mut images: Vec<GRat> = Vec::new();
    for h in chart.indices() {
        let img = if h == 3 { sigma_new.pow(-ws[3])? } else { &base_new[h] * &sigma_new.pow(-ws[h])? };
        let d = descend(&img, sigma, eps, ws[3]).ok_or_else(|| WeylError::NotDescending(img.to_string()))?;
        images.push(d);
    }
    Ok(ChartAction {
        name: a.name.clone(),
        system: a.system,
        chart,
        params: a.params.clone(),
        images: [images[0].clone(), images[1].clone(), images[2].clone()],
    })
}

/// Action on the ℤ_{w_k}-invariant monomials of a chart. When the anchor
/// weight exceeds 1 the chart coordinates themselves may need a root of the
/// image anchor, but invariant monomials of weighted exponent E ≡ 0 mod w_k
/// only involve (anchor image)^(E/w_k) and so stay rational.
pub fn extend_invariants(a: &BirationalAction, w: &Weights, chart: ChartId) -> Result<Vec<(Monomial, GRat)>> {
    let ws = w.as_array();
    let k = chart.anchor();
    let n = ws[k];
    let t = transition_map(w, chart, ChartId::Orig);
    let sigma = t.sigma;
    let mut sub: BTreeMap<Var, GRat> = a.params.keys().map(|p| (*p, GRat::var(*p))).collect();
    for v in ChartId::Orig.vars() {
        sub.insert(v, GRat::from_poly(t.forward.image(v).to_gauss()));
    }
    let base_new: Vec<GRat> = a.vars.iter().map(|r| r.substitute(&sub)).collect::<std::result::Result<_, _>>()?;
    let vars = chart.vars();
    let idx = chart.indices();
    let eps = chart.eps_var();
    let mut out = Vec::new();
    for e0 in 0..=n {
        for e1 in 0..=(n - e0) {
            for e2 in 0..=(n - e0 - e1) {
                let ex = [e0, e1, e2];
                let weight: i64 = (0..3).map(|i| ex[i] * ws[idx[i]]).sum();
                if weight == 0 || weight % n != 0 {
                    continue;
                }
                let mut img = base_new[k].pow(-weight / n)?;
                for i in 0..3 {
                    if idx[i] != 3 && ex[i] > 0 {
                        img = &img * &base_new[idx[i]].pow(ex[i])?;
                    }
                }
                let d = descend(&img, sigma, eps, ws[3]).ok_or_else(|| WeylError::NotDescending(img.to_string()))?;
                let m = Monomial::from_pairs((0..3).map(|i| (vars[i], ex[i] as i32)));
                out.push((m, d));
            }
        }
    }
    Ok(out)
}

/// Whether every invariant monomial is fixed on {ε = 0}.
pub fn invariants_trivial_on_infinity(inv: &[(Monomial, GRat)], chart: ChartId) -> Result<bool> {
    let zero: BTreeMap<Var, GRat> = [(chart.eps_var(), GRat::zero())].into_iter().collect();
    for (m, img) in inv {
        let own = GRat::from_poly(GPoly::term(m.clone(), GaussQ::one())).substitute(&zero)?;
        if img.substitute(&zero)? != own {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_reflection(name: &str) -> bool {
    name.starts_with('s') && !name.starts_with("sigma")
}

/// Equivariance for the orbifold action of the chart: ℤ_{w_k} acting with
/// the weights of the chart coordinates.
pub fn chart_equivariant(ca: &ChartAction, w: &Weights) -> bool {
    let ws = w.as_array();
    let k = ca.chart.anchor();
    let n = ws[k];
    let vars = ca.chart.vars();
    let idx = ca.chart.indices();
    let weights: BTreeMap<Var, i64> = (0..3).map(|i| (vars[i], ws[idx[i]])).collect();
    (0..3).all(|i| graded_mod(&ca.images[i], &weights, n) == Some(ws[idx[i]].rem_euclid(n)))
}

/// Orbifold generator of a chart, c_h ↦ ω^(w_h) c_h with ω a primitive
/// w_k-th root of unity; available when ω is Gaussian (w_k ∈ {1, 2, 4}).
pub fn orbifold_generator(sys: System, chart: ChartId) -> Option<ChartAction> {
    let w = sys.weights();
    let ws = w.as_array();
    let n = ws[chart.anchor()];
    let omega = match n {
        1 => GaussQ::one(),
        2 => -GaussQ::one(),
        4 => gauss_i(),
        _ => return None,
    };
    let pow = |e: i64| -> GaussQ {
        let mut r = GaussQ::one();
        for _ in 0..e.rem_euclid(n) {
            r = r * omega.clone();
        }
        r
    };
    let vars = chart.vars();
    let idx = chart.indices();
    let images = [0, 1, 2].map(|i| GRat::var(vars[i]).scale(&pow(ws[idx[i]])));
    let params = sys.parameters().into_iter().map(|p| (p, GRat::var(p))).collect();
    Some(ChartAction { name: format!("orbifold-{}", chart), system: sys, chart, params, images })
}

/// The autonomous Hamiltonians on {ε₃ = 0}.
pub fn boutroux_hamiltonian(sys: System) -> Poly {
    let s = match sys {
        System::P1 => "2*X3^2 - 8*Y3^3 - 4*Y3",
        System::P2 => "X3^2 - Y3^4 - Y3^2",
        System::P4 => "X3^2*Y3 - X3*Y3^2 - 2*X3*Y3",
    };
    parse_poly(s).expect("builtin Hamiltonian")
}

#[derive(Clone, Debug)]
pub struct InfinityReport {
    pub name: String,
    pub chart: ChartId,
    /// The two non-ε images at ε = 0.
    pub restricted: [GRat; 2],
    pub trivial_on_infinity: bool,
    /// c with H∘g = c·H for the Boutroux Hamiltonian, on the chart c3.
    pub foliation_character: Option<GaussQ>,
}

/// Restrict a chart action to ε = 0; for c3 certify H∘g = c·H.
pub fn infinity_action_report(ca: &ChartAction) -> Result<InfinityReport> {
    let vars = ca.chart.vars();
    let eps = ca.chart.eps_var();
    let zero: BTreeMap<Var, GRat> = [(eps, GRat::zero())].into_iter().collect();
    let r0 = ca.images[0].substitute(&zero)?;
    let r1 = ca.images[1].substitute(&zero)?;
    let trivial = r0 == GRat::var(vars[0]) && r1 == GRat::var(vars[1]);
    let foliation_character = if ca.chart == ChartId::C3 {
        let h = boutroux_hamiltonian(ca.system).to_gauss();
        let sub: BTreeMap<Var, GRat> = [(vars[0], r0.clone()), (vars[1], r1.clone())].into_iter().collect();
        let hg = subs_poly_rat(&h, &sub)?;
        hg.try_div(&GRat::from_poly(h))?.as_constant()
    } else {
        None
    };
    Ok(InfinityReport { name: ca.name.clone(), chart: ca.chart, restricted: [r0, r1], trivial_on_infinity: trivial, foliation_character })
}

#[derive(Clone, Debug)]
pub struct DynkinReport {
    pub system: System,
    /// Distinct maps of {ε₃ = 0} generated by the Dynkin automorphisms.
    pub elements: Vec<[GRat; 2]>,
    /// Characters c with H∘g = c·H, one per element (none if not a multiple).
    pub characters: Vec<Option<GaussQ>>,
}

impl DynkinReport {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn preserves_foliation(&self) -> bool {
        self.characters.iter().all(|c| c.is_some())
    }

    /// Not abelian: some pair of elements does not commute.
    pub fn non_abelian(&self) -> bool {
        let n = self.elements.len();
        (0..n).any(|i| (0..n).any(|j| compose2(&self.elements[i], &self.elements[j]) != compose2(&self.elements[j], &self.elements[i])))
    }
}

fn compose2(g: &[GRat; 2], h: &[GRat; 2]) -> [GRat; 2] {
    let v = ChartId::C3.vars();
    let sub: BTreeMap<Var, GRat> = [(v[0], h[0].clone()), (v[1], h[1].clone())].into_iter().collect();
    [g[0].substitute(&sub).expect("affine maps"), g[1].substitute(&sub).expect("affine maps")]
}

/// Group generated on {ε₃ = 0} by the restrictions of the Dynkin
/// automorphisms (π for P_II; σ₁, σ₂ for P_IV), with foliation characters.
pub fn dynkin_group_at_infinity(sys: System) -> Result<DynkinReport> {
    let w = sys.weights();
    let names: &[&str] = match sys {
        System::P2 => &["pi"],
        System::P4 => &["sigma1", "sigma2"],
        System::P1 => return Err(WeylError::NoGroup(sys)),
    };
    let mut gens = Vec::new();
    for n in names {
        let ca = extend_to_chart(&generator(sys, n)?, &w, ChartId::C3)?;
        gens.push(infinity_action_report(&ca)?.restricted);
    }
    let v = ChartId::C3.vars();
    let id = [GRat::var(v[0]), GRat::var(v[1])];
    let mut elements = vec![id];
    let mut frontier = elements.clone();
    while let Some(e) = frontier.pop() {
        for g in &gens {
            let c = compose2(g, &e);
            if !elements.contains(&c) {
                elements.push(c.clone());
                frontier.push(c);
            }
        }
        if elements.len() > 48 {
            break;
        }
    }
    let h = boutroux_hamiltonian(sys).to_gauss();
    let characters = elements
        .iter()
        .map(|e| {
            let sub: BTreeMap<Var, GRat> = [(v[0], e[0].clone()), (v[1], e[1].clone())].into_iter().collect();
            subs_poly_rat(&h, &sub).ok().and_then(|hg| hg.try_div(&GRat::from_poly(h.clone())).ok()).and_then(|r| r.as_constant())
        })
        .collect();
    Ok(DynkinReport { system: sys, elements, characters })
}

pub fn fmt_gauss(c: &GaussQ) -> String {
    GPoly::constant(c.clone()).to_string()
}

/// Summary of every generator: Bäcklund identity, ℤ_s commutation, chart
/// extensions and their behaviour at infinity.
pub fn weyl_report(sys: System) -> Result<Value> {
    let w = sys.weights();
    let mut gens = Vec::new();
    for a in builtin_group(sys)? {
        let b = verify_backlund(sys, &a)?;
        let mut charts = Vec::new();
        for c in ChartId::AT_INFINITY {
            match extend_to_chart(&a, &w, c) {
                Ok(ca) => {
                    let inf = infinity_action_report(&ca)?;
                    charts.push(json!({
                        "chart": c,
                        "map": ca.describe(),
                        "equivariant": chart_equivariant(&ca, &w),
                        "trivial_on_infinity": inf.trivial_on_infinity,
                        "foliation_character": inf.foliation_character.as_ref().map(fmt_gauss),
                    }))
                }
                Err(WeylError::NeedsRoot(n)) => {
                    let inv = extend_invariants(&a, &w, c)?;
                    charts.push(json!({
                        "chart": c,
                        "needs_root_of_unity": n,
                        "invariant_images": inv.len(),
                        "trivial_on_infinity": invariants_trivial_on_infinity(&inv, c)?,
                    }))
                }
                Err(e) => return Err(e),
            }
        }
        gens.push(json!({
            "action": a.describe(),
            "backlund": b.holds,
            "commutes_with_zs": commutes_with_zs(&a, &w),
            "charts": charts,
        }));
    }
    let rel = group_relations(sys)?;
    let dyn_ = dynkin_group_at_infinity(sys)?;
    let reflections_trivial = gens.iter().filter(|g| is_reflection(g["action"]["name"].as_str().unwrap_or(""))).all(|g| {
        g["charts"].as_array().map_or(false, |cs| cs.iter().all(|c| c["trivial_on_infinity"] == json!(true)))
    });
    let passed = gens.iter().all(|g| g["backlund"] == json!(true) && g["commutes_with_zs"] == json!(true))
        && rel.reflections_involutive
        && reflections_trivial
        && dyn_.preserves_foliation();
    Ok(json!({
        "system": sys.tag(),
        "passed": passed,
        "reflections_trivial_on_infinity": reflections_trivial,
        "generators": gens,
        "orders": rel.orders.iter().map(|(n, o)| json!({ "name": n, "order": o })).collect::<Vec<_>>(),
        "reflections_involutive": rel.reflections_involutive,
        "composition_table": rel.table.iter().map(|(g, h, r)| json!({ "g": g, "h": h, "order": r })).collect::<Vec<_>>(),
        "dynkin_at_infinity": {
            "order": dyn_.order(),
            "non_abelian": dyn_.non_abelian(),
            "preserves_foliation": dyn_.preserves_foliation(),
        },
    }))
}
