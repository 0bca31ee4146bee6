//! Weighted blow-ups at the movable points and the resulting atlases of the
//! spaces of initial conditions.
//!
//! At a movable point of chart C with characteristic index (λ₁,λ₂,λ₃) the
//! chart coordinates (a, b, ε) are first shifted and sheared,
//! a = a₀ + u + m·v + n·w, b = b₀ + v, ε = w, so that the Jacobian loses its
//! (1,2) and (1,3) entries. The weighted blow-up with weights (λ₁,λ₂,λ₃) then
//! has three charts; chart 3 (w = w₃^λ₃) carries the Painlevé coordinates
//! with z = v₃, chart 2 (v = v₂^λ₂) the Boutroux coordinates with ε₃ = w₂.
//!
//! Symplectic conventions: the base flow is x' = −H_y, y' = H_x, whose kernel
//! form is Ω = dx∧dy − dH∧dz. A chart map with constant Jacobian
//! c = ∂(x,y)/∂(u,w) pulls Ω back to c·(du∧dw − dH̃∧dz), and the chart flow is
//! u' = −H̃_w, w' = H̃_u.

use crate::algebra::{exact_linear_solve, fmt_q, AlgebraError, Monomial, MonomialMap, Poly, RatFn, Var, Q};
use crate::catalog::System;
use crate::charts::{transition_map, ChartError, ChartId, ChartVectorField};
use crate::local::{characteristic_index_at, find_fixed_points_at_infinity, CharacteristicIndex, LocalError};
use crate::newton_weights::Weights;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SoicError {
    #[error("point is not a movable fixed point: {0}")]
    NotMovable(String),
    #[error("Jacobian at the point is not upper triangular")]
    NotTriangular,
    #[error("characteristic index {0:?} is not a triple of positive integers")]
    NonIntegerIndex(Vec<String>),
    #[error("blow-up weights {weights:?} do not fit the chart weights: {reason}")]
    WeightMismatch { weights: [i64; 3], reason: String },
    #[error("{context}: not polynomial, offending part {residual}")]
    NonPolynomial { context: String, residual: String },
    #[error("Jacobian determinant of the chart map is not constant: {0}")]
    NonConstantDeterminant(String),
    #[error("chart map is not linear in the blow-up coordinate u")]
    NotLinearInU,
    #[error("integration of {0} produces a logarithm")]
    Logarithm(String),
    #[error("blow-up chart {0} is not supported here")]
    UnsupportedChart(u8),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, SoicError>;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sign {
    Upper,
    Lower,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Upper => "+",
            Sign::Lower => "-",
        }
    }
}

/// Which chart of the weighted blow-up the map lands in.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BlowupKind {
    /// Chart 3 over the original chart (x, y, z); z = v₃.
    Painleve,
    /// Chart 2 over the chart (X₃, Y₃, ε₃); ε₃ = w₂.
    Boutroux,
}

impl BlowupKind {
    fn chart_index(self) -> u8 {
        match self {
            BlowupKind::Painleve => 3,
            BlowupKind::Boutroux => 2,
        }
    }
}

fn var3(prefix: &str) -> [Var; 3] {
    ["u", "v", "w"].map(|n| Var::new(&format!("{n}{prefix}")))
}

/// Blow-up chart variables (u_k, v_k, w_k) of chart k.
pub fn blowup_vars(chart: u8) -> [Var; 3] {
    var3(&chart.to_string())
}

/// Pre-change coordinates (u, v, w).
pub fn prechange_vars() -> [Var; 3] {
    var3("")
}

fn qp(v: &Q) -> Poly {
    Poly::from_q(v.clone())
}

fn mono(v: Var, e: i64) -> Monomial {
    Monomial::var(v, e as i32)
}

/// Termwise antiderivative; `None` if a term would integrate to a logarithm.
fn integrate(p: &Poly, v: Var) -> Option<Poly> {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let e = m.exp(v);
        if e == -1 {
            return None;
        }
        out.add_term(m.mul(&Monomial::var(v, 1)), c / Q::from_integer((e + 1).into()));
    }
    Some(out)
}

/// Part of `p` with a negative exponent in some dynamical variable.
fn negative_part(p: &Poly) -> Poly {
    Poly::from_terms(
        p.terms()
            .filter(|(m, _)| m.pairs().iter().any(|(v, e)| *e < 0 && !v.is_parameter()))
            .map(|(m, c)| (m.clone(), c.clone())),
    )
}

fn require_polynomial(p: &Poly, context: &str) -> Result<()> {
    let neg = negative_part(p);
    if neg.is_zero() {
        Ok(())
    } else {
        Err(SoicError::NonPolynomial { context: context.into(), residual: neg.to_string() })
    }
}

fn subs_all(p: &Poly, map: &MonomialMap) -> Result<Poly> {
    Ok(p.substitute(map)?)
}

// ---------------------------------------------------------------------------
// Pre-blow-up change

/// The field at a movable point after the shift and the shear.
#[derive(Clone, Debug)]
pub struct PreBlowup {
    pub field: ChartVectorField,
    pub point: [Q; 3],
    pub lambdas: [i64; 3],
    /// Normalised Jacobian before the change.
    pub jacobian: [[Poly; 3]; 3],
    /// Jacobian after the change; entries (1,2) and (1,3) vanish.
    pub adjusted_jacobian: [[Poly; 3]; 3],
    /// a = a₀ + u + m v + n w.
    pub m: Poly,
    pub n: Poly,
    pub vars: [Var; 3],
    /// Field in (u, v, w), in the time of the chart field.
    pub components: [Poly; 3],
}

impl PreBlowup {
    /// Chart coordinates (a, b, ε) in terms of (u, v, w).
    pub fn change(&self) -> MonomialMap {
        let cv = self.field.vars();
        let [u, v, w] = self.vars.map(Poly::var);
        let a = &(&qp(&self.point[0]) + &u) + &(&(&self.m * &v) + &(&self.n * &w));
        let b = &qp(&self.point[1]) + &v;
        MonomialMap::from_pairs([(cv[0], a), (cv[1], b), (cv[2], w)])
    }

    /// Displayed form "a = …" of the new first coordinate.
    pub fn describe(&self) -> String {
        let cv = self.field.vars();
        let [u, v, w] = self.vars.map(Poly::var);
        let shifted = &u + &(&(&self.m * &v) + &(&self.n * &w));
        if self.point[0].is_zero() {
            format!("{} = {}", cv[0], shifted)
        } else {
            format!("{} - {} = {}", cv[0], fmt_q(&self.point[0]), shifted)
        }
    }
}

fn mat_mul(a: &[[Poly; 3]; 3], b: &[[Poly; 3]; 3]) -> [[Poly; 3]; 3] {
    let mut out: [[Poly; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            let mut s = Poly::zero();
            for k in 0..3 {
                s += &(&a[i][k] * &b[k][j]);
            }
            out[i][j] = s;
        }
    }
    out
}

fn positive_int(l: &Q) -> Option<i64> {
    (l.is_integer() && l.is_positive()).then(|| l.to_integer().to_i64()).flatten()
}

/// Shift to the movable point and shear away the (1,2) and (1,3) entries:
/// m = J₁₂/(λ₂−λ₁), n = (m·J₂₃ − J₁₃)/(λ₁−λ₃).
pub fn preblowup_change(vf: &ChartVectorField, point: &[Q; 3]) -> Result<PreBlowup> {
    let idx = characteristic_index_at(vf, point)?;
    if !idx.is_upper_triangular() {
        return Err(SoicError::NotTriangular);
    }
    let lq = idx.exact_lambdas().ok_or(LocalError::NonRationalSpectrum)?;
    let lambdas = match [0, 1, 2].map(|i| positive_int(&lq[i])) {
        [Some(a), Some(b), Some(c)] => [a, b, c],
        _ => return Err(SoicError::NonIntegerIndex(lq.iter().map(fmt_q).collect())),
    };
    if lambdas[0] == lambdas[1] || lambdas[0] == lambdas[2] {
        return Err(SoicError::NonIntegerIndex(lq.iter().map(fmt_q).collect()));
    }
    let j = &idx.jacobian;
    let m = j[0][1].scale(&(Q::one() / (&lq[1] - &lq[0])));
    let n = (&(&m * &j[1][2]) - &j[0][2]).scale(&(Q::one() / (&lq[0] - &lq[2])));
    let one = Poly::one;
    let t = [[one(), m.clone(), n.clone()], [Poly::zero(), one(), Poly::zero()], [Poly::zero(), Poly::zero(), one()]];
    let tinv = [[one(), -&m, -&n], [Poly::zero(), one(), Poly::zero()], [Poly::zero(), Poly::zero(), one()]];
    let adjusted = mat_mul(&tinv, &mat_mul(j, &t));
    debug_assert!(adjusted[0][1].is_zero() && adjusted[0][2].is_zero());

    let vars = prechange_vars();
    let mut pre = PreBlowup {
        field: vf.clone(),
        point: point.clone(),
        lambdas,
        jacobian: j.clone(),
        adjusted_jacobian: adjusted,
        m,
        n,
        vars,
        components: Default::default(),
    };
    let ch = pre.change();
    let c = vf.components.each_ref().map(|p| p.substitute(&ch));
    let [ca, cb, ce] = [c[0].clone()?, c[1].clone()?, c[2].clone()?];
    let du = &(&ca - &(&pre.m * &cb)) - &(&pre.n * &ce);
    pre.components = [du, cb, ce];
    Ok(pre)
}

// ---------------------------------------------------------------------------
// Weighted blow-up of the pre-changed field

/// A blow-up chart system: the non-independent variables as functions of the
/// independent one, plus the autonomous lift it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSystem {
    pub vars: [Var; 3],
    /// Slot of the independent variable.
    pub independent: usize,
    /// Derivatives of the two dependent variables (in slot order) with respect
    /// to the independent one.
    pub rhs: [Poly; 2],
}

impl ChartSystem {
    pub fn dependent(&self) -> [usize; 2] {
        match self.independent {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.rhs.iter().all(|p| negative_part(p).is_zero())
    }
}

/// Monomial blow-up of the (u,v,w) field in chart `chart` ∈ {1,2,3}, with the
/// independent variable v₁, w₂ or v₃. Errors unless the quotient system is
/// polynomial.
pub fn weighted_blowup(pre: &PreBlowup, weights: [i64; 3], chart: u8) -> Result<ChartSystem> {
    if !(1..=3).contains(&chart) {
        return Err(SoicError::UnsupportedChart(chart));
    }
    let e = (chart - 1) as usize;
    let t = blowup_vars(chart);
    let mut sub = MonomialMap::new();
    for i in 0..3 {
        let img = if i == e {
            Poly::term(mono(t[e], weights[e]), Q::one())
        } else {
            Poly::var(t[i]).mul_monomial(&mono(t[e], weights[i]))
        };
        sub.insert(pre.vars[i], img);
    }
    let f: Vec<Poly> = pre.components.iter().map(|p| p.substitute(&sub)).collect::<std::result::Result<_, _>>()?;
    let le = Q::from_integer(weights[e].into());
    // ṫ_e = t_e^{1−λ_e} ẏ_e / λ_e,  ṫ_i = t_e^{−λ_i} ẏ_i − (λ_i/λ_e) t_i t_e^{−λ_e} ẏ_e.
    let mut lift: [Poly; 3] = Default::default();
    for i in 0..3 {
        lift[i] = if i == e {
            f[e].mul_monomial(&mono(t[e], 1 - weights[e])).scale(&(Q::one() / le.clone()))
        } else {
            let li = Q::from_integer(weights[i].into());
            &f[i].mul_monomial(&mono(t[e], -weights[i]))
                - &(&Poly::var(t[i]) * &f[e].mul_monomial(&mono(t[e], -weights[e]))).scale(&(li / le.clone()))
        };
    }
    let independent = if chart == 2 { 2 } else { 1 };
    let sys = ChartSystem { vars: t, independent, rhs: [Poly::zero(), Poly::zero()] };
    let [a, b] = sys.dependent();
    let mut rhs: [Poly; 2] = Default::default();
    for (k, s) in [a, b].into_iter().enumerate() {
        rhs[k] = lift[s].div_exact(&lift[independent]).ok_or_else(|| SoicError::NonPolynomial {
            context: format!("d{}/d{}", t[s], t[independent]),
            residual: format!("({}) / ({})", lift[s], lift[independent]),
        })?;
        require_polynomial(&rhs[k], &format!("d{}/d{}", t[s], t[independent]))?;
    }
    Ok(ChartSystem { rhs, ..sys })
}

// ---------------------------------------------------------------------------
// Composed chart maps

/// Composed map between a base chart and a blow-up chart on the cover.
#[derive(Clone, Debug)]
pub struct BlowupChartMap {
    pub system: System,
    pub label: String,
    pub kind: BlowupKind,
    /// Chart containing the movable point.
    pub source_chart: ChartId,
    pub point: [Q; 3],
    pub base_chart: ChartId,
    pub base_vars: [Var; 3],
    pub target_vars: [Var; 3],
    /// Base coordinates as Laurent polynomials in the target variables.
    pub forward: MonomialMap,
    /// Target coordinates in the base variables and the cover variable.
    pub inverse: MonomialMap,
    /// The cover variable τ equals the exceptional target coordinate, and
    /// `cover_relation.0 = cover_relation.1` holds on the cover.
    pub cover_var: Var,
    pub cover_relation: (Var, Poly),
    pub sign_branch: Option<Sign>,
    /// Whether the deck flip (u, τ) ↦ (−u, −τ) was applied after the derivation.
    pub flipped: bool,
    pub pre: PreBlowup,
}

impl BlowupChartMap {
    fn exceptional_slot(&self) -> usize {
        match self.kind {
            BlowupKind::Painleve => 2,
            BlowupKind::Boutroux => 1,
        }
    }

    /// Slot of the target variable equal to the base independent variable.
    pub fn independent_slot(&self) -> usize {
        match self.kind {
            BlowupKind::Painleve => 1,
            BlowupKind::Boutroux => 2,
        }
    }

    /// forward ∘ inverse is the identity on the cover.
    pub fn forward_inverse_identity(&self) -> Result<bool> {
        let mut ok = true;
        for (i, b) in self.base_vars.iter().enumerate() {
            let img = self.forward.image(*b).substitute(&self.inverse)?;
            let expected = if *b == self.cover_relation.0 { self.cover_relation.1.clone() } else { Poly::var(*b) };
            ok &= img == expected;
            let _ = i;
        }
        // and inverse ∘ forward on the target side
        for t in self.target_vars {
            let mut back = MonomialMap::new();
            for b in self.base_vars {
                back.insert(b, self.forward.image(b));
            }
            back.insert(self.cover_var, Poly::var(self.target_vars[self.exceptional_slot()]));
            ok &= self.inverse.image(t).substitute(&back)? == Poly::var(t);
        }
        Ok(ok)
    }

    /// The independent variable is unchanged (z = v₃ or ε₃ = w₂).
    pub fn independent_preserved(&self) -> bool {
        self.forward.image(self.base_vars[2]) == Poly::var(self.target_vars[self.independent_slot()])
    }

    /// Compose with the involution (u, τ) ↦ (−u, −τ) of the cover.
    pub fn flipped(&self) -> Result<BlowupChartMap> {
        let e = self.exceptional_slot();
        let t = self.target_vars;
        let flip = MonomialMap::from_pairs([(t[0], -Poly::var(t[0])), (t[e], -Poly::var(t[e]))]);
        let mut forward = MonomialMap::new();
        for b in self.base_vars {
            forward.insert(b, self.forward.image(b).substitute(&flip)?);
        }
        let tau = MonomialMap::from_pairs([(self.cover_var, -Poly::var(self.cover_var))]);
        let mut inverse = MonomialMap::new();
        for (i, v) in t.iter().enumerate() {
            let img = self.inverse.image(*v).substitute(&tau)?;
            inverse.insert(*v, if i == 0 || i == e { -img } else { img });
        }
        let rel = (self.cover_relation.0, self.cover_relation.1.substitute(&tau)?);
        let sign_branch = self.sign_branch.map(|s| if s == Sign::Upper { Sign::Lower } else { Sign::Upper });
        Ok(BlowupChartMap {
            forward,
            inverse,
            cover_relation: rel,
            sign_branch,
            flipped: !self.flipped,
            label: relabel(&self.label, sign_branch),
            ..self.clone()
        })
    }

    fn flip_system(&self, s: &ChartSystem) -> Result<ChartSystem> {
        if !self.flipped {
            return Ok(s.clone());
        }
        let e = self.exceptional_slot();
        let t = self.target_vars;
        let flip = MonomialMap::from_pairs([(t[0], -Poly::var(t[0])), (t[e], -Poly::var(t[e]))]);
        let dep = s.dependent();
        let mut rhs: [Poly; 2] = Default::default();
        for k in 0..2 {
            let r = s.rhs[k].substitute(&flip)?;
            rhs[k] = if dep[k] == 0 || dep[k] == e { -r } else { r };
        }
        Ok(ChartSystem { rhs, ..s.clone() })
    }

    /// Jacobian determinant ∂(B₀,B₁)/∂(t_a,t_b) of the forward map, with t_a,
    /// t_b the dependent target variables.
    pub fn jacobian_determinant(&self) -> Poly {
        let [a, b] = dependent_slots(self.independent_slot());
        let (t, f0, f1) = (self.target_vars, self.forward.image(self.base_vars[0]), self.forward.image(self.base_vars[1]));
        &(&f0.diff(t[a]) * &f1.diff(t[b])) - &(&f0.diff(t[b]) * &f1.diff(t[a]))
    }

    pub fn describe(&self) -> Vec<String> {
        self.base_vars.iter().map(|b| format!("{} = {}", b, self.forward.image(*b))).collect()
    }

    pub fn describe_inverse(&self) -> Vec<String> {
        self.target_vars.iter().map(|t| format!("{} = {}", t, self.inverse.image(*t))).collect()
    }
}

fn dependent_slots(independent: usize) -> [usize; 2] {
    match independent {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

fn relabel(label: &str, s: Option<Sign>) -> String {
    match s {
        Some(s) => format!("{}{}", label.trim_end_matches(['+', '-']), s.symbol()),
        None => label.to_string(),
    }
}

/// Compose the pre-change, the monomial blow-up and the weighted chart
/// transition into the base chart.
pub fn blowup_chart_map(sys: System, vf: &ChartVectorField, point: &[Q; 3], kind: BlowupKind, label: &str) -> Result<BlowupChartMap> {
    let pre = preblowup_change(vf, point)?;
    let w = vf.weights;
    let ws = w.as_array();
    let base_chart = match kind {
        BlowupKind::Painleve => ChartId::Orig,
        BlowupKind::Boutroux => ChartId::C3,
    };
    let src = vf.chart;
    let k = base_chart.anchor();
    let chart = kind.chart_index();
    let e = (chart - 1) as usize;
    let t = blowup_vars(chart);
    let l = pre.lambdas;
    // The exceptional pre-change coordinate is the source coordinate at
    // homogeneous index k; its weight must equal the blow-up weight.
    let needs = match kind {
        BlowupKind::Painleve => (2usize, 3usize),
        BlowupKind::Boutroux => (1usize, 2usize),
    };
    if src.slot(needs.1) != Some(needs.0) || l[e] != ws[k] {
        return Err(SoicError::WeightMismatch { weights: l, reason: format!("λ{} = {} but weight of index {} is {}", e + 1, l[e], k, ws[k]) });
    }
    if kind == BlowupKind::Boutroux && !point[1].is_zero() {
        return Err(SoicError::WeightMismatch { weights: l, reason: "Boutroux chart needs b₀ = 0".into() });
    }
    // (u, v, w) in blow-up coordinates.
    let mut blow = MonomialMap::new();
    for i in 0..3 {
        let img = if i == e {
            Poly::term(mono(t[e], l[e]), Q::one())
        } else {
            Poly::var(t[i]).mul_monomial(&mono(t[e], l[i]))
        };
        blow.insert(pre.vars[i], img);
    }
    let change = pre.change();
    let tr = transition_map(&w, src, base_chart);
    // Source coordinate at index k is σ^(−w_k) = t_e^(λ_e), so σ = t_e^(−1).
    let mut chart_sub = MonomialMap::new();
    for v in src.vars() {
        chart_sub.insert(v, change.image(v).substitute(&blow)?);
    }
    chart_sub.insert(tr.sigma, Poly::var_pow(t[e], -1));
    let base_vars = base_chart.vars();
    let mut forward = MonomialMap::new();
    for b in base_vars {
        forward.insert(b, tr.forward.image(b).substitute(&chart_sub)?);
    }

    // Inverse: base → source coordinates with the cover variable τ = t_e.
    let back = transition_map(&w, base_chart, src);
    let tau = Var::new(&format!("tau{chart}"));
    let rename = MonomialMap::from_pairs([(back.sigma, Poly::var(tau))]);
    let src_vals: Vec<Poly> = src.vars().iter().map(|v| back.forward.image(*v).substitute(&rename)).collect::<std::result::Result<_, _>>()?;
    let [a, b, eps] = [src_vals[0].clone(), src_vals[1].clone(), src_vals[2].clone()];
    let vv = &b - &qp(&point[1]);
    let ww = eps;
    let uu = &(&(&a - &qp(&point[0])) - &(&pre.m * &vv)) - &(&pre.n * &ww);
    let pre_vals = [uu, vv, ww];
    let mut inverse = MonomialMap::new();
    for i in 0..3 {
        let img = if i == e { Poly::var(tau) } else { pre_vals[i].mul_monomial(&mono(tau, -l[i])) };
        inverse.insert(t[i], img);
    }
    let anchor_var = base_chart.coord(src.anchor()).expect("source anchor is a base coordinate");
    let rel = back.inverse.image(anchor_var).substitute(&rename)?;
    let map = BlowupChartMap {
        system: sys,
        label: label.to_string(),
        kind,
        source_chart: src,
        point: point.clone(),
        base_chart,
        base_vars,
        target_vars: t,
        forward,
        inverse,
        cover_var: tau,
        cover_relation: (anchor_var, rel),
        sign_branch: None,
        flipped: false,
        pre,
    };
    if !map.independent_preserved() {
        return Err(SoicError::WeightMismatch { weights: l, reason: "independent variable is not preserved".into() });
    }
    Ok(map)
}

/// Movable points in display order with labels and sign branches.
///
/// P_I: the point X₂ = 2 (the lower sign, displayed after the deck flip in the
/// upper sign). P_II: X₂ = −1 is the upper sign, X₂ = 1 the lower. P_IV: the
/// three points labelled (i), (ii), (iii).
pub fn movable_points(sys: System) -> Result<Vec<(ChartId, [Q; 3], String, Option<Sign>)>> {
    let vfs: Vec<_> = ChartId::AT_INFINITY.iter().map(|c| sys.chart_field(*c)).collect();
    let mut pts: Vec<(ChartId, [Q; 3])> = Vec::new();
    for fp in find_fixed_points_at_infinity(&vfs) {
        if fp.is_movable() {
            let p = fp.rational().ok_or_else(|| SoicError::NotMovable(format!("{} has irrational coordinates", fp.chart)))?;
            pts.push((fp.chart, p));
        }
    }
    pts.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1[0].cmp(&b.1[0])));
    let mut out = Vec::new();
    for (i, (c, p)) in pts.into_iter().enumerate() {
        let (label, sign) = match sys {
            System::P1 => ("P1-".to_string(), Some(Sign::Lower)),
            System::P2 => {
                if p[0].is_negative() {
                    ("P2+".to_string(), Some(Sign::Upper))
                } else {
                    ("P2-".to_string(), Some(Sign::Lower))
                }
            }
            System::P4 => (format!("P4({})", ["i", "ii", "iii"][i.min(2)]), None),
        };
        out.push((c, p, label, sign));
    }
    if sys == System::P2 {
        out.sort_by_key(|x| x.3 != Some(Sign::Upper));
    }
    Ok(out)
}

fn chart_maps(sys: System, kind: BlowupKind) -> Result<Vec<BlowupChartMap>> {
    let mut out = Vec::new();
    for (c, p, label, sign) in movable_points(sys)? {
        let vf = sys.chart_field(c);
        let mut m = blowup_chart_map(sys, &vf, &p, kind, &label)?;
        m.sign_branch = sign;
        if sys == System::P1 {
            m = m.flipped()?;
        }
        out.push(m);
    }
    Ok(out)
}

/// Painlevé coordinates: one chart-3 map per movable point. P_I is reported
/// in the upper sign.
pub fn painleve_coordinates(sys: System) -> Result<Vec<BlowupChartMap>> {
    chart_maps(sys, BlowupKind::Painleve)
}

// ---------------------------------------------------------------------------
// Transformed systems

/// Base field in the base variables: (f, g, 1) in z-time for the original
/// chart, the autonomous chart field for (X₃, Y₃, ε₃).
fn base_field(map: &BlowupChartMap) -> [Poly; 3] {
    match map.base_chart {
        ChartId::Orig => {
            let ode = map.system.ode();
            [ode.f, ode.g, Poly::one()]
        }
        c => map.system.chart_field(c).components,
    }
}

/// Transport the base field through the chart map; returns the lift in the
/// base time.
pub fn lifted_field(map: &BlowupChartMap) -> Result<[Poly; 3]> {
    let det = map.jacobian_determinant();
    let d = det.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| SoicError::NonConstantDeterminant(det.to_string()))?;
    let ind = map.independent_slot();
    let [a, b] = dependent_slots(ind);
    let t = map.target_vars;
    let g = base_field(map);
    let g: Vec<Poly> = g.iter().map(|p| subs_all(p, &map.forward)).collect::<Result<_>>()?;
    let phi0 = map.forward.image(map.base_vars[0]);
    let phi1 = map.forward.image(map.base_vars[1]);
    let rate = g[2].clone();
    let r0 = &g[0] - &(&phi0.diff(t[ind]) * &rate);
    let r1 = &g[1] - &(&phi1.diff(t[ind]) * &rate);
    let inv = Q::one() / d;
    let ta = (&(&r0 * &phi1.diff(t[b])) - &(&phi0.diff(t[b]) * &r1)).scale(&inv);
    let tb = (&(&phi0.diff(t[a]) * &r1) - &(&phi1.diff(t[a]) * &r0)).scale(&inv);
    let mut out: [Poly; 3] = Default::default();
    out[a] = ta;
    out[b] = tb;
    out[ind] = rate;
    Ok(out)
}

/// The blow-up chart system obtained by transporting the base system.
pub fn transformed_system(map: &BlowupChartMap) -> Result<ChartSystem> {
    let lift = lifted_field(map)?;
    let ind = map.independent_slot();
    let [a, b] = dependent_slots(ind);
    let t = map.target_vars;
    let rhs = if lift[ind] == Poly::one() {
        [lift[a].clone(), lift[b].clone()]
    } else {
        let da = lift[a].div_exact(&lift[ind]);
        let db = lift[b].div_exact(&lift[ind]);
        match (da, db) {
            (Some(x), Some(y)) => [x, y],
            _ => {
                return Err(SoicError::NonPolynomial {
                    context: format!("d/d{} in chart {}", t[ind], map.label),
                    residual: lift[ind].to_string(),
                })
            }
        }
    };
    Ok(ChartSystem { vars: t, independent: ind, rhs })
}

/// Transported system compared with the monomial blow-up of the pre-changed
/// field (structural equality).
pub fn gluing_consistent(map: &BlowupChartMap) -> Result<bool> {
    let ind = map.independent_slot();
    let lift = lifted_field(map)?;
    let direct = weighted_lift(map)?;
    // d t_i / d t_ind agree iff lift_i · direct_ind = direct_i · lift_ind.
    let mut ok = true;
    for i in dependent_slots(ind) {
        ok &= &lift[i] * &direct[ind] == &direct[i] * &lift[ind];
    }
    Ok(ok)
}

/// Autonomous lift of the pre-changed field, in the map's (possibly flipped)
/// coordinates.
fn weighted_lift(map: &BlowupChartMap) -> Result<[Poly; 3]> {
    let pre = &map.pre;
    let chart = map.kind.chart_index();
    let e = (chart - 1) as usize;
    let t = blowup_vars(chart);
    let weights = pre.lambdas;
    let mut sub = MonomialMap::new();
    for i in 0..3 {
        let img = if i == e {
            Poly::term(mono(t[e], weights[e]), Q::one())
        } else {
            Poly::var(t[i]).mul_monomial(&mono(t[e], weights[i]))
        };
        sub.insert(pre.vars[i], img);
    }
    let f: Vec<Poly> = pre.components.iter().map(|p| p.substitute(&sub)).collect::<std::result::Result<_, _>>()?;
    let le = Q::from_integer(weights[e].into());
    let mut lift: [Poly; 3] = Default::default();
    for i in 0..3 {
        lift[i] = if i == e {
            f[e].mul_monomial(&mono(t[e], 1 - weights[e])).scale(&(Q::one() / le.clone()))
        } else {
            let li = Q::from_integer(weights[i].into());
            &f[i].mul_monomial(&mono(t[e], -weights[i]))
                - &(&Poly::var(t[i]) * &f[e].mul_monomial(&mono(t[e], -weights[e]))).scale(&(li / le.clone()))
        };
    }
    if map.flipped {
        let flip = MonomialMap::from_pairs([(t[0], -Poly::var(t[0])), (t[e], -Poly::var(t[e]))]);
        for i in 0..3 {
            let r = lift[i].substitute(&flip)?;
            lift[i] = if i == 0 || i == e { -r } else { r };
        }
    }
    Ok(lift)
}

/// Chart system through the monomial blow-up route, in the map's coordinates.
pub fn blowup_route_system(map: &BlowupChartMap) -> Result<ChartSystem> {
    let s = weighted_blowup(&map.pre, map.pre.lambdas, map.kind.chart_index())?;
    map.flip_system(&s)
}

// ---------------------------------------------------------------------------
// Symplectic structure

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticFactor {
    /// c with dx∧dy = c du∧dw (reference orientation dx∧dy).
    pub factor: Q,
    /// Orientation used by the displayed statement for this system.
    pub stated_orientation: &'static str,
    /// Factor relative to the stated orientation.
    pub stated_factor: Q,
}

/// Jacobian determinant of a Painlevé map at fixed z, certified constant.
pub fn symplectic_factor(map: &BlowupChartMap) -> Result<SymplecticFactor> {
    let det = map.jacobian_determinant();
    let c = det.as_constant().ok_or_else(|| SoicError::NonConstantDeterminant(det.to_string()))?;
    let (stated_orientation, stated_factor) = match map.system {
        System::P2 => ("dy^dx", -c.clone()),
        _ => ("dx^dy", c.clone()),
    };
    Ok(SymplecticFactor { factor: c, stated_orientation, stated_factor })
}

/// Residual coefficients of Ω − c(du∧dw − dH̃∧dz) on the (du∧dw, du∧dz,
/// dw∧dz) basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedCheck {
    pub holds: bool,
    pub factor: Q,
    pub residual: [Poly; 3],
}

/// Pulled-back Hamiltonian and the dz-coefficients A, B of the pulled-back
/// dx∧dy, for a Painlevé map.
fn pullback_parts(map: &BlowupChartMap, h: &Poly) -> Result<(Poly, Poly, Poly, Q)> {
    if map.kind != BlowupKind::Painleve {
        return Err(SoicError::UnsupportedChart(map.kind.chart_index()));
    }
    let [u, z, w] = map.target_vars;
    let x = map.forward.image(map.base_vars[0]);
    let y = map.forward.image(map.base_vars[1]);
    let hp = h.substitute(&map.forward)?;
    let c = symplectic_factor(map)?.factor;
    let a = &(&x.diff(u) * &y.diff(z)) - &(&x.diff(z) * &y.diff(u));
    let b = &(&x.diff(w) * &y.diff(z)) - &(&x.diff(z) * &y.diff(w));
    Ok((&hp.diff(u) - &a, &hp.diff(w) - &b, hp, c))
}

/// Symbolic check of dx∧dy − dH∧dz = c(du∧dw − dH̃∧dz) with z = v as a
/// coordinate. H̃ is accepted up to an additive function of z.
pub fn extended_symplectic_check(map: &BlowupChartMap, h: &Poly, h_tilde: &Poly) -> Result<ExtendedCheck> {
    let (pu, pw, _, c) = pullback_parts(map, h)?;
    let [u, _, w] = map.target_vars;
    let ru = &pu - &h_tilde.diff(u).scale(&c);
    let rw = &pw - &h_tilde.diff(w).scale(&c);
    let holds = ru.is_zero() && rw.is_zero();
    Ok(ExtendedCheck { holds, factor: c, residual: [Poly::zero(), ru, rw] })
}

/// The transformed Hamiltonian H̃ from the extended form identity, with no
/// term depending on z alone.
pub fn transformed_hamiltonian(map: &BlowupChartMap, h: &Poly) -> Result<Poly> {
    let (pu, pw, _, c) = pullback_parts(map, h)?;
    let [u, _, w] = map.target_vars;
    let inv = Q::one() / c;
    let hu = pu.scale(&inv);
    let hw = pw.scale(&inv);
    let h1 = integrate(&hu, u).ok_or_else(|| SoicError::Logarithm(hu.to_string()))?;
    let rest = &hw - &h1.diff(w);
    if rest.depends_on(u) {
        return Err(SoicError::NonPolynomial { context: "closedness of the pulled-back form".into(), residual: rest.to_string() });
    }
    let h2 = integrate(&rest, w).ok_or_else(|| SoicError::Logarithm(rest.to_string()))?;
    Ok(&h1 + &h2)
}

/// Whether `a − b` depends on z only.
pub fn equal_up_to_z(a: &Poly, b: &Poly, z: Var) -> bool {
    (a - b).vars().iter().all(|v| *v == z)
}

// ---------------------------------------------------------------------------
// Atlases

#[derive(Clone, Debug)]
pub struct AtlasChart {
    pub map: BlowupChartMap,
    pub system: ChartSystem,
    pub hamiltonian: Option<Poly>,
    pub symplectic: Option<SymplecticFactor>,
}

#[derive(Clone, Debug)]
pub struct SoicAtlas {
    pub system: System,
    pub kind: BlowupKind,
    pub base_vars: [Var; 3],
    pub base_hamiltonian: Option<Poly>,
    pub charts: Vec<AtlasChart>,
}

impl SoicAtlas {
    pub fn all_polynomial(&self) -> bool {
        self.charts.iter().all(|c| c.system.is_polynomial())
    }

    pub fn report(&self) -> Value {
        let charts: Vec<Value> = self
            .charts
            .iter()
            .map(|c| {
                let dep = c.system.dependent();
                json!({
                    "label": c.map.label,
                    "source_chart": c.map.source_chart,
                    "point": c.map.point.iter().map(fmt_q).collect::<Vec<_>>(),
                    "prechange": c.map.pre.describe(),
                    "lambdas": c.map.pre.lambdas,
                    "map": c.map.describe(),
                    "inverse": c.map.describe_inverse(),
                    "cover_relation": format!("{} = {}", c.map.cover_relation.0, c.map.cover_relation.1),
                    "system": dep.iter().zip(&c.system.rhs).map(|(i, r)| format!("d{}/d{} = {}", c.system.vars[*i], c.system.vars[c.system.independent], r)).collect::<Vec<_>>(),
                    "polynomial": c.system.is_polynomial(),
                    "hamiltonian": c.hamiltonian.as_ref().map(|h| h.to_string()),
                    "symplectic_factor": c.symplectic.as_ref().map(|s| fmt_q(&s.factor)),
                    "stated_orientation": c.symplectic.as_ref().map(|s| s.stated_orientation),
                    "stated_factor": c.symplectic.as_ref().map(|s| fmt_q(&s.stated_factor)),
                })
            })
            .collect();
        json!({
            "system": self.system.tag(),
            "coordinates": match self.kind { BlowupKind::Painleve => "painleve", BlowupKind::Boutroux => "boutroux" },
            "base_vars": self.base_vars.iter().map(|v| v.name()).collect::<Vec<_>>(),
            "base_hamiltonian": self.base_hamiltonian.as_ref().map(|h| h.to_string()),
            "all_polynomial": self.all_polynomial(),
            "charts": charts,
        })
    }
}

/// Painlevé-coordinate atlas with transformed systems, Hamiltonians and
/// symplectic factors.
pub fn soic_atlas(sys: System) -> Result<SoicAtlas> {
    let h = sys.hamiltonian();
    let mut charts = Vec::new();
    for map in painleve_coordinates(sys)? {
        let system = transformed_system(&map)?;
        let ht = transformed_hamiltonian(&map, &h)?;
        let sf = symplectic_factor(&map)?;
        charts.push(AtlasChart { map, system, hamiltonian: Some(ht), symplectic: Some(sf) });
    }
    Ok(SoicAtlas { system: sys, kind: BlowupKind::Painleve, base_vars: ChartId::Orig.vars(), base_hamiltonian: Some(h), charts })
}

/// Atlas over the Boutroux chart (X₃, Y₃, ε₃) from blow-up chart 2. The chart
/// field is autonomous; polynomiality is required of the lift (the system
/// multiplied by the ε₃-rate).
pub fn boutroux_soic_atlas(sys: System) -> Result<SoicAtlas> {
    let mut charts = Vec::new();
    for map in chart_maps(sys, BlowupKind::Boutroux)? {
        let lift = lifted_field(&map)?;
        for (i, p) in lift.iter().enumerate() {
            require_polynomial(p, &format!("lift component {} in chart {}", map.target_vars[i], map.label))?;
        }
        let [a, b] = dependent_slots(map.independent_slot());
        let system = ChartSystem { vars: map.target_vars, independent: map.independent_slot(), rhs: [lift[a].clone(), lift[b].clone()] };
        charts.push(AtlasChart { map, system, hamiltonian: None, symplectic: None });
    }
    Ok(SoicAtlas { system: sys, kind: BlowupKind::Boutroux, base_vars: ChartId::C3.vars(), base_hamiltonian: None, charts })
}

// ---------------------------------------------------------------------------
// The P_I surface

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SurfaceTag {
    P1,
    P1Boutroux,
}

impl SurfaceTag {
    pub fn parse(s: &str) -> Option<SurfaceTag> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "p1" | "pi" => Some(SurfaceTag::P1),
            "p1boutroux" | "piboutroux" => Some(SurfaceTag::P1Boutroux),
            _ => None,
        }
    }
}

/// Quotient of a ℤ₂ cover chart through its invariant generators.
#[derive(Clone, Debug)]
pub struct SurfaceModel {
    pub tag: SurfaceTag,
    pub cover_vars: [Var; 3],
    /// Invariant generators U, V, W.
    pub generators: [Poly; 3],
    pub generator_vars: [Var; 3],
    /// Relation R(U, V, W, z) = 0 (z absent for the Boutroux surface).
    pub relation: Poly,
    /// The deck action on the cover.
    pub action: MonomialMap,
    pub relation_holds: bool,
    pub invariant: [bool; 3],
    /// The action preserves every base coordinate.
    pub action_preserves_map: bool,
}

pub fn surface_vars() -> [Var; 3] {
    ["U", "V", "W"].map(Var::new)
}

/// Deck action (u, τ) ↦ (u', −τ) with u' fixed by invariance of the first base
/// coordinate, which must be affine in u.
fn induced_action(map: &BlowupChartMap) -> Result<MonomialMap> {
    let e = map.exceptional_slot();
    let t = map.target_vars;
    let x = map.forward.image(map.base_vars[0]);
    let k = x.diff(t[0]);
    if k.depends_on(t[0]) {
        return Err(SoicError::NotLinearInU);
    }
    let r = &x - &(&k * &Poly::var(t[0]));
    let neg = MonomialMap::from_pairs([(t[e], -Poly::var(t[e]))]);
    let k_neg = k.substitute(&neg)?;
    let r_neg = r.substitute(&neg)?;
    let num = &x - &r_neg;
    let u_new = num.div_exact(&k_neg).ok_or(SoicError::NotLinearInU)?;
    Ok(MonomialMap::from_pairs([(t[0], u_new), (t[e], -Poly::var(t[e]))]))
}

/// Generators U, V, W with their relation, checked on the ℤ₂ cover.
pub fn surface_invariants(tag: SurfaceTag) -> Result<SurfaceModel> {
    let (kind, relation_src) = match tag {
        SurfaceTag::P1 => (BlowupKind::Painleve, "U*W^4 + 2*z*W^3 + 4*W - V^2"),
        SurfaceTag::P1Boutroux => (BlowupKind::Boutroux, "U*W^4 + 2*W^3 + 4*W - V^2"),
    };
    let map = chart_maps(System::P1, kind)?.remove(0);
    let t = map.target_vars;
    let e = map.exceptional_slot();
    let (u, s) = (Poly::var(t[0]), Poly::var(t[e]));
    let z = Poly::var(t[1]);
    let c = |n: i64, d: i64| Poly::from_q(crate::algebra::qf(n, d));
    let m = |v: Var, k: i64| Poly::var_pow(v, k as i32);
    // Upper-sign generators; for the Boutroux chart the z-terms become 1.
    let zz = if kind == BlowupKind::Painleve { z.clone() } else { Poly::one() };
    let big_u = &(&u * &(&(&(&u * &m(t[e], 6)) - &(&zz * &m(t[e], 4))) - &c(4, 1))) + &(&c(1, 4) * &(&m(t[e], 2) * &(&zz * &zz)));
    let big_v = &(&(&u * &m(t[e], 7)) - &(&c(1, 2) * &(&zz * &m(t[e], 5)))) - &(&c(2, 1) * &s);
    let big_w = m(t[e], 2);
    let generators = [big_u, big_v, big_w];
    let action = induced_action(&map)?;
    let gv = surface_vars();
    let rel = crate::algebra::parse_poly(relation_src)?;
    let zv = crate::algebra::sym::z();
    let mut sub = MonomialMap::from_pairs([(gv[0], generators[0].clone()), (gv[1], generators[1].clone()), (gv[2], generators[2].clone())]);
    sub.insert(zv, z.clone());
    let relation_holds = rel.substitute(&sub)?.is_zero();
    let invariant = [0, 1, 2].map(|i| generators[i].substitute(&action).map(|g| g == generators[i]).unwrap_or(false));
    let mut action_preserves_map = true;
    for b in map.base_vars {
        let img = map.forward.image(b);
        action_preserves_map &= img.substitute(&action)? == img;
    }
    Ok(SurfaceModel {
        tag,
        cover_vars: t,
        generators,
        generator_vars: gv,
        relation: rel,
        action,
        relation_holds,
        invariant,
        action_preserves_map,
    })
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub tag: System,
    /// (dV/dz, dW/dz) in (V, W, z) before reduction.
    pub raw: [Poly; 2],
    /// After eliminating V² with the surface relation.
    pub reduced: [Poly; 2],
    pub regular_without_reduction: bool,
    pub regular: bool,
}

/// Replace V² by UW⁴ + 2zW³ + 4W until V has degree ≤ 1.
fn reduce_mod_relation(p: &Poly, v: Var, v2: &Poly) -> Result<Poly> {
    let mut out = Poly::zero();
    for (k, c) in p.collect(v) {
        let (q, r) = (k.div_euclid(2), k.rem_euclid(2));
        out += &(&c * &(&v2.pow(q as i64)? * &Poly::var_pow(v, r)));
    }
    Ok(out)
}

/// Regularity of the P_I system on the surface along W = 0. For P_II and P_IV
/// the blow-up charts themselves are checked for polynomiality.
pub fn surface_system_regularity(sys: System) -> Result<RegularityReport> {
    if sys != System::P1 {
        let atlas = soic_atlas(sys)?;
        let ok = atlas.all_polynomial();
        let c = &atlas.charts[0].system.rhs;
        return Ok(RegularityReport { tag: sys, raw: c.clone(), reduced: c.clone(), regular_without_reduction: ok, regular: ok });
    }
    let [x, y, z] = ChartId::Orig.vars();
    let [gu, gv, gw] = surface_vars();
    let ode = sys.ode();
    let half = Poly::from_q(crate::algebra::qf(1, 2));
    // V = x y⁻² + ½ y⁻³, W = y⁻¹.
    let vdef = &(&Poly::var(x) * &Poly::var_pow(y, -2)) + &(&half * &Poly::var_pow(y, -3));
    let wdef = Poly::var_pow(y, -1);
    let dz = |p: &Poly| -> Poly { &(&(&p.diff(x) * &ode.f) + &(&p.diff(y) * &ode.g)) + &p.diff(z) };
    let inv = MonomialMap::from_pairs([
        (x, &(&Poly::var(gv) * &Poly::var_pow(gw, -2)) - &(&half * &Poly::var(gw))),
        (y, Poly::var_pow(gw, -1)),
    ]);
    let raw = [dz(&vdef).substitute(&inv)?, dz(&wdef).substitute(&inv)?];
    let v2 = crate::algebra::parse_poly("U*W^4 + 2*z*W^3 + 4*W")?;
    let reduced = [reduce_mod_relation(&raw[0], gv, &v2)?, reduce_mod_relation(&raw[1], gv, &v2)?];
    let no_w_pole = |p: &Poly| p.low_degree_in(gw).unwrap_or(0) >= 0;
    let _ = gu;
    Ok(RegularityReport {
        tag: sys,
        regular_without_reduction: raw.iter().all(no_w_pole),
        regular: reduced.iter().all(no_w_pole),
        raw,
        reduced,
    })
}

// ---------------------------------------------------------------------------
// Rationality of the 2-forms and polynomial uniqueness

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoFormReport {
    pub p_plus_q_mod_s: i64,
    /// (λ₁+λ₂)/λ₃ when integral.
    pub ratio: Option<i64>,
    pub rational: bool,
}

/// s | p+q makes dx∧dy and dH∧dz rational on the charts; λ₃ | λ₁+λ₂ does the
/// same on the blow-up chart 3.
pub fn rational_two_form_check(w: &Weights, idx: &CharacteristicIndex) -> TwoFormReport {
    let a = w.as_array();
    let r = (a[0] + a[1]).rem_euclid(a[3]);
    let ratio = idx.exact_lambdas().and_then(|l| {
        let s = &(&l[0] + &l[1]) / &l[2];
        s.is_integer().then(|| s.to_integer().to_i64()).flatten()
    });
    TwoFormReport { p_plus_q_mod_s: r, ratio, rational: r == 0 && ratio.is_some() }
}

#[derive(Clone, Debug)]
pub struct UniquenessReport {
    pub system: System,
    pub unknowns: usize,
    pub constraints: usize,
    pub unique: bool,
    /// The unique solution is the system itself.
    pub recovers_system: bool,
}

/// Within f, g of weighted degree at most that of the system, require every
/// Painlevé chart system to be polynomial; the resulting exact linear
/// conditions on the coefficients are solved.
pub fn polynomiality_uniqueness(sys: System) -> Result<UniquenessReport> {
    let w = sys.weights();
    let wt = w.as_array();
    let [x, y, z] = ChartId::Orig.vars();
    let basis = |deg: i64| -> Vec<Monomial> {
        let mut out = Vec::new();
        for i in 0..=deg / wt[0] {
            for j in 0..=deg / wt[1] {
                for k in 0..=deg / wt[2] {
                    if i * wt[0] + j * wt[1] + k * wt[2] <= deg {
                        out.push(Monomial::from_pairs([(x, i as i32), (y, j as i32), (z, k as i32)]));
                    }
                }
            }
        }
        out
    };
    let fb = basis(w.f_degree());
    let gb = basis(w.g_degree());
    let nunk = fb.len() + gb.len();
    let maps = painleve_coordinates(sys)?;
    let mut rows: Vec<Vec<RatFn>> = Vec::new();
    let mut rhs: Vec<RatFn> = Vec::new();
    for map in &maps {
        let det = map.jacobian_determinant();
        let d = det.as_constant().ok_or_else(|| SoicError::NonConstantDeterminant(det.to_string()))?;
        let inv = Q::one() / d;
        let [u, v, ww] = map.target_vars;
        let phi0 = map.forward.image(x);
        let phi1 = map.forward.image(y);
        // u' = ((f − X_z) Y_w − X_w (g − Y_z))/D, w' = (X_u (g − Y_z) − Y_u (f − X_z))/D.
        let contrib = |fp: &Poly, gp: &Poly| -> [Poly; 2] {
            [
                (&(fp * &phi1.diff(ww)) - &(&phi0.diff(ww) * gp)).scale(&inv),
                (&(&phi0.diff(u) * gp) - &(&phi1.diff(u) * fp)).scale(&inv),
            ]
        };
        let mut cols: Vec<[Poly; 2]> = Vec::new();
        for m in &fb {
            cols.push(contrib(&Poly::term(m.clone(), Q::one()).substitute(&map.forward)?, &Poly::zero()));
        }
        for m in &gb {
            cols.push(contrib(&Poly::zero(), &Poly::term(m.clone(), Q::one()).substitute(&map.forward)?));
        }
        let c0 = contrib(&(-phi0.diff(v)), &(-phi1.diff(v)));
        for comp in 0..2 {
            let mut monos: Vec<Monomial> = Vec::new();
            for col in cols.iter().map(|c| &c[comp]).chain(std::iter::once(&c0[comp])) {
                for (m, _) in negative_part(col).terms() {
                    if !monos.contains(m) {
                        monos.push(m.clone());
                    }
                }
            }
            for m in monos {
                rows.push(cols.iter().map(|c| RatFn::from_poly(coeff_in_vars(&c[comp], &m, &[u, v, ww]))).collect());
                rhs.push(RatFn::from_poly(-coeff_in_vars(&c0[comp], &m, &[u, v, ww])));
            }
        }
    }
    let constraints = rows.len();
    let rank = crate::algebra::rank(&rows);
    let unique = rank == nunk;
    let solution = if unique { solve_overdetermined(&rows, &rhs)? } else { None };
    let ode = sys.ode();
    let mut actual: Vec<Poly> = fb.iter().map(|m| coeff_in_vars(&ode.f, m, &[x, y, z])).collect();
    actual.extend(gb.iter().map(|m| coeff_in_vars(&ode.g, m, &[x, y, z])));
    // Every monomial of the system lies in the family.
    let covered = ode.f.terms().all(|(m, _)| fb.iter().any(|b| *b == dyn_part(m, &[x, y, z])))
        && ode.g.terms().all(|(m, _)| gb.iter().any(|b| *b == dyn_part(m, &[x, y, z])));
    let recovers_system = unique
        && covered
        && solution.map(|sol| sol.iter().zip(&actual).all(|(s, a)| s.as_poly().map(|p| p == a).unwrap_or(false))).unwrap_or(false);
    Ok(UniquenessReport { system: sys, unknowns: nunk, constraints, unique, recovers_system })
}

/// Solution of a full-column-rank system, if consistent: solve on a maximal
/// independent set of rows and check the rest.
fn solve_overdetermined(a: &[Vec<RatFn>], b: &[RatFn]) -> Result<Option<Vec<RatFn>>> {
    let n = a.first().map(|r| r.len()).unwrap_or(0);
    let mut chosen: Vec<Vec<RatFn>> = Vec::new();
    let mut cb: Vec<RatFn> = Vec::new();
    for (r, br) in a.iter().zip(b) {
        if chosen.len() == n {
            break;
        }
        chosen.push(r.clone());
        if crate::algebra::rank(&chosen) < chosen.len() {
            chosen.pop();
        } else {
            cb.push(br.clone());
        }
    }
    if chosen.len() < n {
        return Ok(None);
    }
    let sol = exact_linear_solve(&chosen, &cb)?.particular().to_vec();
    for (r, br) in a.iter().zip(b) {
        let mut acc = RatFn::zero();
        for (c, s) in r.iter().zip(&sol) {
            acc = &acc + &(c * s);
        }
        if acc != *br {
            return Ok(None);
        }
    }
    Ok(Some(sol))
}

fn dyn_part(m: &Monomial, vars: &[Var]) -> Monomial {
    Monomial::from_pairs(m.pairs().iter().copied().filter(|(v, _)| vars.contains(v)))
}

/// Coefficient (a polynomial in the remaining variables) of the monomial
/// `m` in the variables `vars`.
fn coeff_in_vars(p: &Poly, m: &Monomial, vars: &[Var]) -> Poly {
    Poly::from_terms(
        p.terms()
            .filter(|(t, _)| dyn_part(t, vars) == *m)
            .map(|(t, c)| (Monomial::from_pairs(t.pairs().iter().copied().filter(|(v, _)| !vars.contains(v))), c.clone())),
    )
}
