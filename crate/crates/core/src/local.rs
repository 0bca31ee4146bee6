//! Local analysis on the infinity set {ε = 0}.
//!
//! Fixed points of the chart fields, their Jacobians, the resonance and
//! Poincaré-domain tests, the truncated linearizing transformation with its
//! pulled-back first integrals, the singular normal forms, the coefficient
//! filter characterising P_I on ℂP³(3,2,4,5) and the blow-up limits of model
//! fast-slow systems.
//!
//! Convention for the local field at a movable point p: if the ε-component is
//! ε·q, every component is multiplied by c/q with c = |q(p)/t(p)| (t the time
//! factor of the chart). The ε-equation becomes exactly ε̇ = cε, and on
//! monomial q this is the time-rescaled field of the chart displays.

use crate::algebra::univariate::{deflate, gcd, numeric_roots, rational_roots, resultant};
use crate::algebra::{
    exact_linear_solve, fmt_q, AlgebraError, Monomial, MonomialMap, Poly, RatFn, Var, Q,
};
use crate::catalog::System;
use crate::charts::{same_weighted_point, transition_map, ChartError, ChartId, ChartVectorField};
use crate::newton_weights::Weights;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalError {
    #[error("fixed point has irrational coordinates")]
    NotRational,
    #[error("the ε-component is not divisible by {0}")]
    NotInvariant(String),
    #[error("time normalisation is singular at the point: {0}")]
    DegenerateTime(String),
    #[error("Jacobian is not upper triangular")]
    NotTriangular,
    #[error("eigenvalues are not exact rationals")]
    NonRationalSpectrum,
    #[error("resonant obstruction at degree {degree} in component {component}: {monomials}")]
    ResonantObstruction { degree: usize, component: usize, monomials: String },
    #[error("linearizing correction of the second coordinate is not divisible by ε")]
    Structure,
    #[error("non-integral pull-back exponent {0}")]
    FractionalExponent(String),
    #[error("coinciding eigenvalues {0} and {1}")]
    Degenerate(String, String),
    #[error("divisor equation has non-constant time component {0}")]
    NonConstantTime(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

type Result<T> = std::result::Result<T, LocalError>;

// ---------------------------------------------------------------------------
// Fixed points

/// One fixed-point coordinate: exact rational, or a root of `relation`.
#[derive(Clone, Debug, PartialEq)]
pub enum Coord {
    Rational(Q),
    Algebraic { value: Complex64, relation: Poly },
}

impl Coord {
    pub fn value(&self) -> Complex64 {
        match self {
            Coord::Rational(q) => Complex64::new(crate::algebra::q_to_f64(q), 0.0),
            Coord::Algebraic { value, .. } => *value,
        }
    }

    pub fn as_rational(&self) -> Option<&Q> {
        match self {
            Coord::Rational(q) => Some(q),
            _ => None,
        }
    }
}

impl Serialize for Coord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Coord::Rational(q) => s.serialize_str(&fmt_q(q)),
            Coord::Algebraic { value, relation } => {
                let mut st = s.serialize_struct("Algebraic", 2)?;
                st.serialize_field("value", &[value.re, value.im])?;
                st.serialize_field("relation", &relation.to_string())?;
                st.end()
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    MovablePole,
    IrregularInfinity,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointRecord {
    pub chart: ChartId,
    pub coords: [Coord; 3],
    /// Rational, or exactly one algebraic coordinate whose relation divides
    /// both restricted components.
    pub exact: bool,
    pub classification: FixedPointKind,
    /// max |component| at the numerical value of the point.
    pub residual: f64,
    /// Every chart zero identified with this point, including `coords`.
    #[serde(skip)]
    pub representations: Vec<(ChartId, [Complex64; 3])>,
}

impl FixedPointRecord {
    pub fn rational(&self) -> Option<[Q; 3]> {
        let c = [self.coords[0].as_rational()?, self.coords[1].as_rational()?, self.coords[2].as_rational()?];
        Some(c.map(|q| q.clone()))
    }

    pub fn numeric(&self) -> [Complex64; 3] {
        [0, 1, 2].map(|i| self.coords[i].value())
    }

    pub fn is_movable(&self) -> bool {
        self.classification == FixedPointKind::MovablePole
    }

    /// Whether `(chart, point)` is one of the identified representations.
    pub fn represents(&self, weights: &Weights, chart: ChartId, point: [Complex64; 3]) -> bool {
        let pqr = pqr(weights);
        let h = homogeneous(chart, point);
        self.representations.iter().any(|(c, p)| same_weighted_point(pqr, homogeneous(*c, *p), h, 1e-8))
    }
}

fn pqr(w: &Weights) -> [i64; 3] {
    let a = w.as_array();
    [a[0], a[1], a[2]]
}

/// The point (anchor = 1) of ℂP²(p,q,r) for a chart zero with ε = 0.
fn homogeneous(chart: ChartId, p: [Complex64; 3]) -> [Complex64; 3] {
    let mut out = [Complex64::new(1.0, 0.0); 3];
    let idx = chart.indices();
    out[idx[0]] = p[0];
    out[idx[1]] = p[1];
    out
}

struct Candidate {
    chart: ChartId,
    coords: [Coord; 3],
    exact: bool,
    kind: FixedPointKind,
    residual: f64,
    order: i64,
}

impl Candidate {
    fn numeric(&self) -> [Complex64; 3] {
        [0, 1, 2].map(|i| self.coords[i].value())
    }
}

/// Rank used to pick the representative of an identified point.
///
/// Movable points prefer rational coordinates, then the smaller orbifold
/// group, then c1 < c2 < c3. Irregular points prefer the chart anchored at z,
/// which is where ε = 0 reads as z = ∞.
fn preference(c: &Candidate) -> (i64, i64, i64) {
    let irrational = if c.coords.iter().all(|x| x.as_rational().is_some()) { 0 } else { 1 };
    match c.kind {
        FixedPointKind::MovablePole => (irrational, c.order, c.chart.anchor() as i64),
        FixedPointKind::IrregularInfinity => {
            let chart_rank = match c.chart {
                ChartId::C3 => 0,
                ChartId::C2 => 1,
                _ => 2,
            };
            (chart_rank, irrational, 0)
        }
    }
}

/// Orders coordinates within one chart: larger values first.
fn coord_key(c: &Candidate) -> Vec<(f64, f64)> {
    c.numeric().iter().map(|z| (-z.re, -z.im)).collect()
}

/// All zeros on {ε = 0} of the given chart fields, identified across charts
/// and orbifold actions.
pub fn find_fixed_points_at_infinity(vfs: &[ChartVectorField]) -> Vec<FixedPointRecord> {
    let Some(first) = vfs.first() else { return vec![] };
    let pqr = pqr(&first.weights);
    let mut groups: Vec<Vec<Candidate>> = Vec::new();
    for vf in vfs.iter().filter(|v| v.chart != ChartId::Orig) {
        for c in chart_zeros(vf) {
            let h = homogeneous(c.chart, c.numeric());
            match groups.iter_mut().find(|g| same_weighted_point(pqr, homogeneous(g[0].chart, g[0].numeric()), h, 1e-8)) {
                Some(g) => g.push(c),
                None => groups.push(vec![c]),
            }
        }
    }
    let mut out: Vec<FixedPointRecord> = groups
        .into_iter()
        .map(|mut g| {
            g.sort_by(|a, b| {
                preference(a).cmp(&preference(b)).then(coord_key(a).partial_cmp(&coord_key(b)).unwrap())
            });
            let representations = g.iter().map(|c| (c.chart, c.numeric())).collect();
            let best = g.swap_remove(0);
            FixedPointRecord {
                chart: best.chart,
                coords: best.coords,
                exact: best.exact,
                classification: best.kind,
                residual: best.residual,
                representations,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        let ka = (a.classification != FixedPointKind::MovablePole, a.chart);
        let kb = (b.classification != FixedPointKind::MovablePole, b.chart);
        ka.cmp(&kb).then_with(|| {
            let na: Vec<(f64, f64)> = a.numeric().iter().map(|z| (-z.re, -z.im)).collect();
            let nb: Vec<(f64, f64)> = b.numeric().iter().map(|z| (-z.re, -z.im)).collect();
            na.partial_cmp(&nb).unwrap()
        })
    });
    out
}

fn c64_map(vars: &[Var], vals: &[Complex64]) -> HashMap<Var, Complex64> {
    vars.iter().copied().zip(vals.iter().copied()).collect()
}

fn chart_zeros(vf: &ChartVectorField) -> Vec<Candidate> {
    let [a, b, e] = vf.vars();
    let [fa, fb] = vf.infinity_restriction();
    let q_e = vf.components[2].diff(e).subs(e, &Poly::zero()).expect("polynomial field");
    let mut out = Vec::new();
    for (ca, cb, exact) in solve_pair(&fa, &fb, a, b) {
        let p = [ca.value(), cb.value()];
        let vals = c64_map(&[a, b, e], &[p[0], p[1], Complex64::new(0.0, 0.0)]);
        let residual = vf.components.iter().map(|c| c.eval_c64(&vals).norm()).fold(0.0, f64::max);
        let kind = if q_e.eval_c64(&vals).norm() > 1e-9 {
            FixedPointKind::MovablePole
        } else {
            FixedPointKind::IrregularInfinity
        };
        out.push(Candidate {
            chart: vf.chart,
            coords: [ca, cb, Coord::Rational(Q::zero())],
            exact,
            kind,
            residual,
            order: vf.orbifold_order,
        });
    }
    out
}

/// Square-free part of a univariate polynomial with rational coefficients.
fn square_free(p: &Poly, v: Var) -> Poly {
    let g = gcd(p, &p.diff(v), v);
    if g.is_zero() || g.is_constant() {
        return p.clone();
    }
    p.div_exact(&g).expect("gcd divides")
}

fn distinct_roots(p: &Poly, v: Var) -> (Vec<Q>, Vec<Complex64>) {
    if p.is_constant() {
        return (vec![], vec![]);
    }
    let sf = square_free(p, v);
    (rational_roots(&sf, v), numeric_roots(&sf, v))
}

/// Isolated common zeros of two bivariate polynomials in (a, b).
///
/// Candidates come from the two resultants; each pair is polished by Newton
/// iteration and then certified: rational pairs exactly, pairs with one
/// rational coordinate through the gcd of the restricted polynomials.
fn solve_pair(fa: &Poly, fb: &Poly, a: Var, b: Var) -> Vec<(Coord, Coord, bool)> {
    let ra = resultant(fa, fb, b);
    let rb = resultant(fa, fb, a);
    if ra.is_zero() || rb.is_zero() {
        return vec![];
    }
    let (qa, na) = distinct_roots(&ra, a);
    let (qb, nb) = distinct_roots(&rb, b);
    let vars = [a, b];
    let eval = |p: &Poly, x: Complex64, y: Complex64| p.eval_c64(&c64_map(&vars, &[x, y]));
    let (da_a, da_b, db_a, db_b) = (fa.diff(a), fa.diff(b), fb.diff(a), fb.diff(b));
    let mut found: Vec<[Complex64; 2]> = Vec::new();
    for &x0 in &na {
        for &y0 in &nb {
            let scale = 1.0 + x0.norm().powi(4) + y0.norm().powi(4);
            if eval(fa, x0, y0).norm() + eval(fb, x0, y0).norm() > 1e-6 * scale {
                continue;
            }
            let (mut x, mut y) = (x0, y0);
            for _ in 0..8 {
                let (f, g) = (eval(fa, x, y), eval(fb, x, y));
                let (j11, j12, j21, j22) = (eval(&da_a, x, y), eval(&da_b, x, y), eval(&db_a, x, y), eval(&db_b, x, y));
                let det = j11 * j22 - j12 * j21;
                if det.norm() < 1e-14 {
                    break;
                }
                x -= (j22 * f - j12 * g) / det;
                y -= (j11 * g - j21 * f) / det;
            }
            if eval(fa, x, y).norm() + eval(fb, x, y).norm() > 1e-10 * scale {
                continue;
            }
            if !found.iter().any(|p| (p[0] - x).norm() + (p[1] - y).norm() < 1e-7) {
                found.push([x, y]);
            }
        }
    }
    let rational_near = |qs: &[Q], z: Complex64| {
        qs.iter().find(|q| (Complex64::new(crate::algebra::q_to_f64(q), 0.0) - z).norm() < 1e-8).cloned()
    };
    let mut out = Vec::new();
    for [x, y] in found {
        let rx = rational_near(&qa, x);
        let ry = rational_near(&qb, y);
        match (rx, ry) {
            (Some(rx), Some(ry)) => {
                let pt: BTreeMap<Var, Q> = [(a, rx.clone()), (b, ry.clone())].into_iter().collect();
                let ok = fa.eval(&pt).map(|v| v.is_zero()).unwrap_or(false)
                    && fb.eval(&pt).map(|v| v.is_zero()).unwrap_or(false);
                out.push((Coord::Rational(rx), Coord::Rational(ry), ok));
            }
            (Some(rx), None) => {
                let (rel, ok) = algebraic_relation(fa, fb, a, &rx, b, y);
                out.push((Coord::Rational(rx), Coord::Algebraic { value: y, relation: rel }, ok));
            }
            (None, Some(ry)) => {
                let (rel, ok) = algebraic_relation(fa, fb, b, &ry, a, x);
                out.push((Coord::Algebraic { value: x, relation: rel }, Coord::Rational(ry), ok));
            }
            (None, None) => {
                let rel_a = strip_rational(&ra, a);
                let rel_b = strip_rational(&rb, b);
                out.push((
                    Coord::Algebraic { value: x, relation: rel_a },
                    Coord::Algebraic { value: y, relation: rel_b },
                    false,
                ));
            }
        }
    }
    out
}

fn strip_rational(p: &Poly, v: Var) -> Poly {
    let mut cur = square_free(p, v);
    for r in rational_roots(&cur, v) {
        cur = deflate(&cur, v, &r);
    }
    cur.primitive().1
}

/// Defining relation of the irrational coordinate `t` once `s = r` is fixed:
/// the gcd of the two restricted polynomials with its rational roots removed.
fn algebraic_relation(fa: &Poly, fb: &Poly, s: Var, r: &Q, t: Var, value: Complex64) -> (Poly, bool) {
    let pt: BTreeMap<Var, Q> = [(s, r.clone())].into_iter().collect();
    let (ga, gb) = (fa.eval_partial(&pt).unwrap(), fb.eval_partial(&pt).unwrap());
    let g = strip_rational(&gcd(&ga, &gb, t), t);
    let vals = c64_map(&[t], &[value]);
    let ok = !g.is_constant() && g.eval_c64(&vals).norm() < 1e-10 * (1.0 + value.norm().powi(g.total_degree().unwrap_or(0) as i32));
    (g, ok)
}

// ---------------------------------------------------------------------------
// Local field, Jacobian and characteristic index

/// Taylor expansion of the normalised field at a rational point, in shifted
/// coordinates that reuse the chart variable symbols.
#[derive(Clone, Debug)]
pub struct LocalField {
    pub chart: ChartId,
    pub vars: [Var; 3],
    pub point: [Q; 3],
    /// c with ε̇ = cε.
    pub scale: Q,
    pub components: [Poly; 3],
    pub degree: usize,
}

fn shift_map(vars: &[Var; 3], point: &[Q; 3]) -> MonomialMap {
    MonomialMap::from_pairs((0..3).map(|i| (vars[i], &Poly::var(vars[i]) + &Poly::from_q(point[i].clone()))))
}

fn point_map(vars: &[Var; 3], point: &[Q; 3]) -> BTreeMap<Var, Q> {
    (0..3).map(|i| (vars[i], point[i].clone())).collect()
}

/// (q, q(p), c) for the ε-component ε·q of `vf`.
fn normalisation(vf: &ChartVectorField, point: &[Q; 3]) -> Result<(Poly, Q, Q)> {
    let vars = vf.vars();
    let e = vars[2];
    let comp = &vf.components[2];
    if comp.is_zero() || comp.low_degree_in(e).unwrap_or(0) < 1 {
        return Err(LocalError::NotInvariant(e.name()));
    }
    let q = comp.mul_monomial(&Monomial::var(e, -1));
    let at = point_map(&vars, point);
    let q0 = q
        .eval_partial(&at)?
        .as_constant()
        .ok_or_else(|| LocalError::DegenerateTime("parameter-dependent ε-rate".into()))?;
    if q0.is_zero() {
        return Err(LocalError::DegenerateTime("ε-rate vanishes (irregular point)".into()));
    }
    let mut t0 = Q::one();
    for &(v, k) in vf.time_factor().pairs() {
        let val = at.get(&v).cloned().unwrap_or_else(Q::zero);
        if val.is_zero() {
            return Err(LocalError::DegenerateTime(format!("time factor vanishes through {v}")));
        }
        t0 *= num_traits::pow::pow(val, k as usize);
    }
    let c = (q0.clone() / t0).abs();
    Ok((q, q0, c))
}

fn trunc(p: &Poly, vars: &[Var; 3], n: usize) -> Poly {
    p.truncate(vars, n as i64)
}

/// Truncated 1/p for a shifted p with constant term p0 ≠ 0.
fn series_inverse(p: &Poly, p0: &Q, vars: &[Var; 3], n: usize) -> Poly {
    // 1/p = (1/p0) Σ (−r)^k with r = p/p0 − 1 free of constant terms.
    let r = &p.scale(&(Q::one() / p0.clone())) - &Poly::one();
    let mut inv = Poly::one();
    let mut term = Poly::one();
    for _ in 0..n {
        term = trunc(&(&term * &(-&r)), vars, n);
        inv = &inv + &term;
    }
    inv.scale(&(Q::one() / p0.clone()))
}

/// Local field through total degree `n` in the shifted coordinates.
pub fn local_field(vf: &ChartVectorField, point: &[Q; 3], n: usize) -> Result<LocalField> {
    let vars = vf.vars();
    let (q, q0, c) = normalisation(vf, point)?;
    let shift = shift_map(&vars, point);
    let inv = series_inverse(&q.substitute(&shift)?, &q0, &vars, n);
    let mut comps = [Poly::zero(), Poly::zero(), Poly::zero()];
    for i in 0..2 {
        let fs = vf.components[i].substitute(&shift)?;
        comps[i] = trunc(&(&fs * &inv), &vars, n).scale(&c);
    }
    comps[2] = Poly::var(vars[2]).scale(&c);
    Ok(LocalField { chart: vf.chart, vars, point: point.clone(), scale: c, components: comps, degree: n })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Eigenvalue {
    Exact(Q),
    Numeric(Complex64),
}

impl Eigenvalue {
    pub fn exact(&self) -> Option<&Q> {
        match self {
            Eigenvalue::Exact(q) => Some(q),
            _ => None,
        }
    }

    pub fn value(&self) -> Complex64 {
        match self {
            Eigenvalue::Exact(q) => Complex64::new(crate::algebra::q_to_f64(q), 0.0),
            Eigenvalue::Numeric(z) => *z,
        }
    }
}

impl Serialize for Eigenvalue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Eigenvalue::Exact(q) => s.serialize_str(&fmt_q(q)),
            Eigenvalue::Numeric(z) => [z.re, z.im].serialize(s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CharacteristicIndex {
    pub chart: ChartId,
    pub point: [Q; 3],
    /// Jacobian of the normalised local field; entries may carry parameters.
    pub jacobian: [[Poly; 3]; 3],
    pub lambdas: [Eigenvalue; 3],
}

impl CharacteristicIndex {
    pub fn exact_lambdas(&self) -> Option<[Q; 3]> {
        Some([self.lambdas[0].exact()?.clone(), self.lambdas[1].exact()?.clone(), self.lambdas[2].exact()?.clone()])
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.jacobian[1][0].is_zero() && self.jacobian[2][0].is_zero() && self.jacobian[2][1].is_zero()
    }
}

impl Serialize for CharacteristicIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let jac: Vec<Vec<String>> = self.jacobian.iter().map(|r| r.iter().map(|p| p.to_string()).collect()).collect();
        let mut st = s.serialize_struct("CharacteristicIndex", 4)?;
        st.serialize_field("chart", &self.chart)?;
        st.serialize_field("point", &self.point.iter().map(fmt_q).collect::<Vec<_>>())?;
        st.serialize_field("jacobian", &jac)?;
        st.serialize_field("lambdas", &self.lambdas)?;
        st.end()
    }
}

pub fn characteristic_index(vf: &ChartVectorField, fp: &FixedPointRecord) -> Result<CharacteristicIndex> {
    let point = fp.rational().ok_or(LocalError::NotRational)?;
    characteristic_index_at(vf, &point)
}

pub fn characteristic_index_at(vf: &ChartVectorField, point: &[Q; 3]) -> Result<CharacteristicIndex> {
    let vars = vf.vars();
    let (_, q0, c) = normalisation(vf, point)?;
    let at = point_map(&vars, point);
    let factor = c / q0;
    let mut jac: [[Poly; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            jac[i][j] = vf.components[i].diff(vars[j]).eval_partial(&at)?.scale(&factor);
        }
    }
    let lambdas = eigenvalues(&jac)?;
    Ok(CharacteristicIndex { chart: vf.chart, point: point.clone(), jacobian: jac, lambdas })
}

fn eigenvalues(j: &[[Poly; 3]; 3]) -> Result<[Eigenvalue; 3]> {
    if j[1][0].is_zero() && j[2][0].is_zero() && j[2][1].is_zero() {
        let d = [0, 1, 2].map(|i| j[i][i].as_constant());
        if let [Some(a), Some(b), Some(c)] = d {
            return Ok([Eigenvalue::Exact(a), Eigenvalue::Exact(b), Eigenvalue::Exact(c)]);
        }
        return Err(LocalError::NonRationalSpectrum);
    }
    let lam = Var::new("lambda");
    let m: Vec<Vec<Poly>> = (0..3)
        .map(|r| (0..3).map(|c| if r == c { &Poly::var(lam) - &j[r][c] } else { -&j[r][c] }).collect())
        .collect();
    let chi = crate::algebra::univariate::det(m);
    if chi.vars().iter().any(|v| *v != lam) {
        return Err(LocalError::NonRationalSpectrum);
    }
    let mut out: Vec<Eigenvalue> = Vec::new();
    let mut rest = chi.clone();
    for r in rational_roots(&chi, lam) {
        let lin = &Poly::var(lam) - &Poly::from_q(r.clone());
        let at: BTreeMap<Var, Q> = [(lam, r.clone())].into_iter().collect();
        while !rest.is_constant() && rest.eval(&at)?.is_zero() {
            out.push(Eigenvalue::Exact(r.clone()));
            rest = rest.div_exact(&lin).expect("root divides");
        }
    }
    if !rest.is_constant() {
        out.extend(numeric_roots(&rest, lam).into_iter().map(Eigenvalue::Numeric));
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

// ---------------------------------------------------------------------------
// Resonances and the Poincaré domain

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Resonance {
    /// Exponent vector with Σm ≥ 2.
    pub m: [u32; 3],
    /// Component index j with m·λ = λ_j.
    pub j: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareReport {
    pub nonresonant: bool,
    pub poincare_domain: bool,
    pub resonances: Vec<Resonance>,
    pub searched_up_to: u32,
    /// The a-priori bound is covered, so no resonance was missed.
    pub complete: bool,
}

/// Σm ≤ ⌈max λ / min λ⌉ + 1 bounds every resonance when all λ share a sign.
pub fn a_priori_resonance_bound(l: &[Q; 3]) -> Option<u32> {
    let pos = l.iter().all(|x| x.is_positive());
    let neg = l.iter().all(|x| x.is_negative());
    if !(pos || neg) {
        return None;
    }
    let abs: Vec<Q> = l.iter().map(|x| x.abs()).collect();
    let max = abs.iter().max().unwrap().clone();
    let min = abs.iter().min().unwrap().clone();
    (max / min).ceil().to_integer().to_u32().map(|b| b + 1)
}

fn poincare_domain(vals: &[Complex64]) -> bool {
    // 0 lies outside the convex hull iff some direction sees every point on
    // its positive side.
    (0..7200).any(|k| {
        let n = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 3600.0);
        vals.iter().all(|v| (v * n.conj()).re > 1e-12)
    })
}

pub fn check_poincare_conditions(idx: &CharacteristicIndex, m_bound: u32) -> Result<PoincareReport> {
    let l = idx.exact_lambdas().ok_or(LocalError::NonRationalSpectrum)?;
    let mut resonances = Vec::new();
    for total in 2..=m_bound {
        for m0 in 0..=total {
            for m1 in 0..=total - m0 {
                let m = [m0, m1, total - m0 - m1];
                let s: Q = (0..3).map(|i| l[i].clone() * Q::from_integer(m[i].into())).sum();
                for j in 0..3 {
                    if s == l[j] {
                        resonances.push(Resonance { m, j });
                    }
                }
            }
        }
    }
    let complete = a_priori_resonance_bound(&l).map(|b| m_bound >= b).unwrap_or(false);
    let vals: Vec<Complex64> = idx.lambdas.iter().map(|e| e.value()).collect();
    Ok(PoincareReport {
        nonresonant: resonances.is_empty(),
        poincare_domain: poincare_domain(&vals),
        resonances,
        searched_up_to: m_bound,
        complete,
    })
}

fn monomial_of(vars: &[Var; 3], m: &[u32; 3]) -> Monomial {
    Monomial::from_pairs((0..3).filter(|&i| m[i] > 0).map(|i| (vars[i], m[i] as i32)))
}

/// Whether the local expansion contains a monomial matching a resonance.
pub fn resonant_terms_present(vf: &ChartVectorField, fp: &FixedPointRecord, resonances: &[Resonance]) -> Result<bool> {
    let point = fp.rational().ok_or(LocalError::NotRational)?;
    resonant_terms_present_at(vf, &point, resonances)
}

pub fn resonant_terms_present_at(vf: &ChartVectorField, point: &[Q; 3], resonances: &[Resonance]) -> Result<bool> {
    let deg = resonances.iter().map(|r| r.m.iter().sum::<u32>()).max().unwrap_or(0) as usize;
    if deg == 0 {
        return Ok(false);
    }
    let vars = vf.vars();
    let expansion = divided_expansion(vf, point, deg)?;
    Ok(resonances.iter().any(|r| !expansion[r.j].coeff(&monomial_of(&vars, &r.m)).is_zero()))
}

/// Taylor expansion of the time-rescaled field (components over the time
/// factor) at `point`, in shifted coordinates.
///
/// Resonant monomials are looked up here rather than in the normalised local
/// field: dividing by the full ε-rate mixes ε into the other components and
/// creates monomials that the field itself does not contain.
pub fn divided_expansion(vf: &ChartVectorField, point: &[Q; 3], n: usize) -> Result<[Poly; 3]> {
    let vars = vf.vars();
    let shift = shift_map(&vars, point);
    let t = Poly::term(vf.time_factor(), Q::one());
    let t0 = t
        .eval(&point_map(&vars, point))?;
    if t0.is_zero() {
        return Err(LocalError::DegenerateTime("time factor vanishes at the point".into()));
    }
    let inv = series_inverse(&t.substitute(&shift)?, &t0, &vars, n);
    let mut out = [Poly::zero(), Poly::zero(), Poly::zero()];
    for i in 0..3 {
        out[i] = trunc(&(&vf.components[i].substitute(&shift)? * &inv), &vars, n);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Poincaré linearization

#[derive(Clone, Debug)]
pub struct LinearizationData {
    pub chart: ChartId,
    pub weights: Weights,
    pub point: [Q; 3],
    /// Shifted coordinates (X̂, Z, ε), named by the chart variables.
    pub vars: [Var; 3],
    pub jacobian: [[Poly; 3]; 3],
    pub lambdas: [Q; 3],
    pub field: LocalField,
    /// u = X̂ + φ₁.
    pub phi1: Poly,
    /// v = Z + ε·φ₂.
    pub phi2: Poly,
    pub n: usize,
    /// D(u) − (linear u-equation), D(v) − (linear v-equation) through degree n.
    pub residual: [Poly; 2],
}

impl LinearizationData {
    /// The linear system J·(u, v, ε) written in the chart variables.
    pub fn linear_system(&self) -> [Poly; 3] {
        linear_part(&self.jacobian, &self.vars)
    }

    pub fn u(&self) -> Poly {
        &Poly::var(self.vars[0]) + &self.phi1
    }

    pub fn v(&self) -> Poly {
        &Poly::var(self.vars[1]) + &(&Poly::var(self.vars[2]) * &self.phi2)
    }
}

fn linear_part(j: &[[Poly; 3]; 3], vars: &[Var; 3]) -> [Poly; 3] {
    [0, 1, 2].map(|i| (0..3).fold(Poly::zero(), |acc, k| &acc + &(&j[i][k] * &Poly::var(vars[k]))))
}

/// Σ field_i ∂_i f, truncated.
fn derive(field: &[Poly; 3], vars: &[Var; 3], f: &Poly, n: usize) -> Poly {
    let mut acc = Poly::zero();
    for i in 0..3 {
        let d = f.diff(vars[i]);
        if !d.is_zero() && !field[i].is_zero() {
            acc = &acc + &trunc(&(&field[i] * &d), vars, n);
        }
    }
    acc
}

fn degree_basis(vars: &[Var; 3], k: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for a in (0..=k).rev() {
        for b in (0..=k - a).rev() {
            out.push(monomial_of(vars, &[a, b, k - a - b]));
        }
    }
    out
}

/// Coefficient of a dynamical monomial, keeping parameters: `p`'s terms
/// whose chart-variable part is `m`.
fn coeff_poly(p: &Poly, vars: &[Var; 3], m: &Monomial) -> Poly {
    Poly::from_terms(
        p.terms()
            .filter(|(t, _)| vars.iter().all(|v| t.exp(*v) == m.exp(*v)))
            .map(|(t, c)| (Monomial::from_pairs(t.pairs().iter().copied().filter(|(v, _)| !vars.contains(v))), c.clone())),
    )
}

pub fn poincare_linearize(vf: &ChartVectorField, fp: &FixedPointRecord, n: usize) -> Result<LinearizationData> {
    let point = fp.rational().ok_or(LocalError::NotRational)?;
    poincare_linearize_at(vf, &point, n)
}

pub fn poincare_linearize_at(vf: &ChartVectorField, point: &[Q; 3], n: usize) -> Result<LinearizationData> {
    let idx = characteristic_index_at(vf, point)?;
    if !idx.is_upper_triangular() {
        return Err(LocalError::NotTriangular);
    }
    let lambdas = idx.exact_lambdas().ok_or(LocalError::NonRationalSpectrum)?;
    let lf = local_field(vf, point, n.max(1))?;
    let vars = lf.vars;
    let j = idx.jacobian.clone();
    let lin = linear_part(&j, &vars);
    let rest: [Poly; 3] = [0, 1, 2].map(|i| &lf.components[i] - &lin[i]);
    let mut phi = Poly::zero();
    let mut psi = Poly::zero();
    for k in 2..=n {
        let kk = k as i64;
        // v-equation: L0(ψ_k) − λ₂ψ_k = −[R·∇ψ + R₂]_k
        let known_v = (&derive(&rest, &vars, &psi, n) + &rest[1]).homogeneous_part(&vars, kk);
        let vk = homological_solve_poly(&lin, &vars, &j[1][1], &(-&known_v), k as u32, 1, &lambdas)?;
        psi = &psi + &vk;
        // u-equation: L0(φ_k) − λ₁φ_k = J₁₂ψ_k − [R·∇φ + R₁]_k
        let known_u = (&derive(&rest, &vars, &phi, n) + &rest[0]).homogeneous_part(&vars, kk);
        let rhs_u = &(&j[0][1] * &vk) - &known_u;
        let uk = homological_solve_poly(&lin, &vars, &j[0][0], &rhs_u, k as u32, 0, &lambdas)?;
        phi = &phi + &uk;
    }
    let e = vars[2];
    if psi.terms().any(|(m, _)| m.exp(e) < 1) {
        return Err(LocalError::Structure);
    }
    let phi2 = psi.mul_monomial(&Monomial::var(e, -1));
    let u = &Poly::var(vars[0]) + &phi;
    let v = &Poly::var(vars[1]) + &psi;
    let eps = Poly::var(e);
    let target_u = &(&(&j[0][0] * &u) + &(&j[0][1] * &v)) + &(&j[0][2] * &eps);
    let target_v = &(&j[1][1] * &v) + &(&j[1][2] * &eps);
    let residual = [
        trunc(&(&derive(&lf.components, &vars, &u, n) - &target_u), &vars, n),
        trunc(&(&derive(&lf.components, &vars, &v, n) - &target_v), &vars, n),
    ];
    Ok(LinearizationData {
        chart: vf.chart,
        weights: vf.weights,
        point: point.clone(),
        vars,
        jacobian: j,
        lambdas,
        field: lf,
        phi1: phi,
        phi2,
        n,
        residual,
    })
}

/// `homological_solve` for right-hand sides carrying parameters: the linear
/// system is assembled over coefficients that are polynomials in them.
fn homological_solve_poly(
    lin: &[Poly; 3],
    vars: &[Var; 3],
    lambda: &Poly,
    rhs: &Poly,
    k: u32,
    component: usize,
    lambdas: &[Q; 3],
) -> Result<Poly> {
    let basis = degree_basis(vars, k);
    let images: Vec<Poly> = basis
        .iter()
        .map(|m| {
            let p = Poly::term(m.clone(), Q::one());
            &derive(lin, vars, &p, k as usize) - &(lambda * &p)
        })
        .collect();
    let a: Vec<Vec<RatFn>> = basis
        .iter()
        .map(|row| images.iter().map(|img| RatFn::from_poly(coeff_poly(img, vars, row))).collect())
        .collect();
    let b: Vec<RatFn> = basis.iter().map(|m| RatFn::from_poly(coeff_poly(rhs, vars, m))).collect();
    let sol = match exact_linear_solve(&a, &b) {
        Ok(s) => s,
        Err(AlgebraError::Inconsistent { .. }) => {
            let lam = lambdas[component].clone();
            let names: Vec<String> = basis
                .iter()
                .filter(|m| (0..3).map(|i| lambdas[i].clone() * Q::from_integer(m.exp(vars[i]).into())).sum::<Q>() == lam)
                .map(|m| Poly::term(m.clone(), Q::one()).to_string())
                .collect();
            return Err(LocalError::ResonantObstruction { degree: k as usize, component, monomials: names.join(", ") });
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = Poly::zero();
    for (m, c) in basis.iter().zip(sol.particular()) {
        let p = c.as_poly().ok_or(LocalError::Structure)?;
        out = &out + &p.mul_monomial(m);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Local first integrals

#[derive(Clone, Debug)]
pub struct LocalIntegrals {
    /// Uniformizer of the chart cover; the chart anchor is w^(−weight).
    pub w: Var,
    /// Original variable at the chart anchor and its exponent: anchor = w^k.
    pub anchor: Var,
    pub anchor_exponent: i64,
    /// ε^(−λ₂/λ₃)(v − bε), pulled back to (x, y, z) \ anchor and w.
    pub c1: Poly,
    /// ε^(−λ₁/λ₃)(u − d(v − bε) − eε), pulled back likewise.
    pub c2: Poly,
    pub n: usize,
}

pub fn w_var() -> Var {
    Var::new("w")
}

pub fn local_integrals(lin: &LinearizationData) -> Result<LocalIntegrals> {
    let l = &lin.lambdas;
    for (i, k) in [(0, 1), (1, 2), (0, 2)] {
        if l[i] == l[k] {
            return Err(LocalError::Degenerate(fmt_q(&l[i]), fmt_q(&l[k])));
        }
    }
    let j = &lin.jacobian;
    let inv = |x: Q| Q::one() / x;
    let b = j[1][2].scale(&inv(l[2].clone() - l[1].clone()));
    let d = j[0][1].scale(&inv(l[1].clone() - l[0].clone()));
    let e = (&(&j[0][1] * &b) + &j[0][2]).scale(&inv(l[2].clone() - l[0].clone()));
    let s = Q::from_integer(lin.weights.as_array()[3].into());
    let exponent = |lam: &Q| -> Result<i32> {
        let k = s.clone() * lam.clone() / l[2].clone();
        if !k.is_integer() {
            return Err(LocalError::FractionalExponent(fmt_q(&k)));
        }
        Ok(k.to_integer().to_i32().unwrap())
    };
    let (ka, kc) = (exponent(&l[1])?, exponent(&l[0])?);
    let w = w_var();
    let t = transition_map(&lin.weights, ChartId::Orig, lin.chart);
    let to_w = |p: &Poly| p.subs(t.sigma, &Poly::var(w)).unwrap();
    let [va, vb, ve] = lin.vars;
    let pull = MonomialMap::from_pairs([
        (va, &to_w(&t.forward.image(va)) - &Poly::from_q(lin.point[0].clone())),
        (vb, &to_w(&t.forward.image(vb)) - &Poly::from_q(lin.point[1].clone())),
        (ve, to_w(&t.forward.image(ve))),
    ]);
    let eps = Poly::var(ve);
    let vt = &lin.v() - &(&b * &eps);
    let ca = vt.mul_monomial(&Monomial::var(ve, 0));
    let cc = &(&lin.u() - &(&d * &vt)) - &(&e * &eps);
    let c1 = ca.substitute(&pull)?.mul_monomial(&Monomial::var(w, -ka));
    let c2 = cc.substitute(&pull)?.mul_monomial(&Monomial::var(w, -kc));
    let k = lin.chart.anchor();
    let anchor = ChartId::Orig.vars()[k];
    let anchor_exponent = -lin.weights.as_array()[k];
    Ok(LocalIntegrals { w, anchor, anchor_exponent, c1, c2, n: lin.n })
}

// ---------------------------------------------------------------------------
// Singular normal forms

/// The linear system at a movable point, moved back to the original chart.
///
/// With ε = σ^s the new coordinates are x̃_h = N_h σ^(−w_h) and the anchor is
/// σ^(−w_k). Fractional powers are written through τ = σ⁻¹, τ^(w_k) being the
/// anchor variable, and reduced to τ-degree below w_k.
#[derive(Clone, Debug)]
pub struct SingularNormalForm {
    pub system: Option<System>,
    pub chart: ChartId,
    pub point: [Q; 3],
    /// (x̃, ỹ, z̃).
    pub vars: [Var; 3],
    pub tau: Var,
    pub tau_degree: i64,
    /// dx̃/dz̃, dỹ/dz̃.
    pub rhs: [RatFn; 2],
    /// Index (0 for x̃, 1 for ỹ) of the anchor variable.
    pub anchor: usize,
    /// Second z̃-derivative of the anchor variable.
    pub anchor_second_derivative: RatFn,
}

pub fn tilde_vars() -> [Var; 3] {
    [Var::new("xt"), Var::new("yt"), Var::new("zt")]
}

pub fn singular_normal_form_at(vf: &ChartVectorField, point: &[Q; 3]) -> Result<SingularNormalForm> {
    let idx = characteristic_index_at(vf, point)?;
    let lambdas = idx.exact_lambdas().ok_or(LocalError::NonRationalSpectrum)?;
    let ws = vf.weights.as_array();
    let k = vf.chart.anchor();
    if k > 2 {
        return Err(LocalError::NotInvariant("original chart".into()));
    }
    let vars = vf.vars();
    let sigma = Var::fresh("sigma");
    let s = ws[3];
    let eps_img = Poly::var_pow(sigma, s as i32);
    let shifted: [Poly; 3] = [0, 1, 2].map(|i| &Poly::var(vars[i]) - &Poly::from_q(point[i].clone()));
    let lin: [Poly; 2] = [0, 1].map(|i| {
        (0..3)
            .fold(Poly::zero(), |acc, c| &acc + &(&idx.jacobian[i][c] * &shifted[c]))
            .subs(vars[2], &eps_img)
            .unwrap()
    });
    let rate = lambdas[2].clone() / Q::from_integer(s.into());
    let mut coords: Vec<Poly> = Vec::new();
    let mut derivs: Vec<Poly> = Vec::new();
    for h in 0..3 {
        let wh = ws[h];
        let sig = Monomial::var(sigma, -wh as i32);
        let rw = rate.clone() * Q::from_integer(wh.into());
        if h == k {
            coords.push(Poly::term(sig.clone(), Q::one()));
            derivs.push(Poly::term(sig, -rw));
        } else {
            let slot = vf.chart.slot(h).unwrap();
            let nv = Poly::var(vars[slot]);
            coords.push(nv.mul_monomial(&sig));
            derivs.push((&lin[slot] - &nv.scale(&rw)).mul_monomial(&sig));
        }
    }
    let dz = RatFn::from_poly(derivs[2].clone());
    let ratio = |i: usize| RatFn::from_poly(derivs[i].clone()).try_div(&dz);
    let rhs_cover = [ratio(0)?, ratio(1)?];
    // Formal derivation d/dt on the cover.
    let derive_rat = |f: &RatFn| -> RatFn {
        let mut acc = f.diff(sigma) * RatFn::from_poly(Poly::var(sigma).scale(&rate));
        for slot in 0..2 {
            acc = &acc + &(f.diff(vars[slot]) * RatFn::from_poly(lin[slot].clone()));
        }
        acc
    };
    let first = ratio(k)?;
    let second = derive_rat(&first).try_div(&dz)?;
    let tv = tilde_vars();
    let tau = Var::new("tau");
    let wk = ws[k];
    let mut back: BTreeMap<Var, RatFn> = BTreeMap::new();
    back.insert(sigma, RatFn::from_poly(Poly::var_pow(tau, -1)));
    for h in 0..3 {
        if h != k {
            let slot = vf.chart.slot(h).unwrap();
            back.insert(vars[slot], RatFn::from_poly(Poly::var(tv[h]).mul_monomial(&Monomial::var(tau, -ws[h] as i32))));
        }
    }
    let reduce = |p: &Poly| -> Poly {
        Poly::from_terms(p.terms().map(|(m, c)| {
            let e = m.exp(tau) as i64;
            let (qd, r) = e.div_mod_floor(&wk);
            let rest = m.without(tau);
            (rest.mul(&Monomial::var(tv[k], qd as i32)).mul(&Monomial::var(tau, r as i32)), c.clone())
        }))
    };
    let convert = |f: &RatFn| -> Result<RatFn> {
        let g = f.substitute(&back)?;
        Ok(RatFn::new(reduce(g.numer()), reduce(g.denom()))?)
    };
    let _ = coords;
    Ok(SingularNormalForm {
        system: None,
        chart: vf.chart,
        point: point.clone(),
        vars: [tv[0], tv[1], tv[2]],
        tau,
        tau_degree: wk,
        rhs: [convert(&rhs_cover[0])?, convert(&rhs_cover[1])?],
        anchor: k,
        anchor_second_derivative: convert(&second)?,
    })
}

/// Singular normal forms at every movable fixed point of a builtin system.
pub fn singular_normal_form(sys: System) -> Result<Vec<SingularNormalForm>> {
    let fields: Vec<ChartVectorField> = ChartId::AT_INFINITY.iter().map(|&c| sys.chart_field(c)).collect();
    let mut out = Vec::new();
    for fp in find_fixed_points_at_infinity(&fields).iter().filter(|f| f.is_movable()) {
        let vf = fields.iter().find(|v| v.chart == fp.chart).unwrap();
        let mut nf = singular_normal_form_at(vf, &fp.rational().ok_or(LocalError::NotRational)?)?;
        nf.system = Some(sys);
        out.push(nf);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The coefficient filter on ℂP³(3,2,4,5)

#[derive(Clone, Debug, Serialize)]
pub struct Thm39Report {
    pub degree_bound: i64,
    /// Nonzero coefficient names surviving case (II-b).
    pub survivors: Vec<String>,
    /// (N′, δ′) and (M′, δ) forced by the constant-term requirements.
    pub n_prime_delta: (i64, i64),
    pub m_prime_delta: (i64, i64),
    /// Case (II-a) leaves no a_ijk, so ε̇ vanishes identically.
    pub case_iia_eliminated: bool,
    #[serde(serialize_with = "ser_display")]
    pub f: Poly,
    #[serde(serialize_with = "ser_display")]
    pub g: Poly,
}

fn ser_display<S: Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Unique (n, δ) with 5n + δ = target and δ ∈ {0, …, 4}.
fn split5(target: i64) -> (i64, i64) {
    target.div_mod_floor(&5)
}

/// Runs the congruence filter over all (i, j, k) with 3i + 2j + 4k ≤ bound.
pub fn thm39_filter(degree_bound: i64) -> Thm39Report {
    let (wx, wy, wz) = (3i64, 2i64, 4i64);
    let mut triples = Vec::new();
    for i in 0..=degree_bound / wx {
        for j in 0..=degree_bound / wy {
            for k in 0..=degree_bound / wz {
                if wx * i + wy * j + wz * k <= degree_bound {
                    triples.push((i, j, k));
                }
            }
        }
    }
    let deg = |t: &(i64, i64, i64)| wx * t.0 + wy * t.1 + wz * t.2;
    let b_offset = |k: i64| wz * k - 2;

    // (II-b): the b-polynomial contains ε, i.e. b₀ at n = N′ − 1.
    let (n1, delta_b) = split5(b_offset(0));
    let n_prime = n1 + 1;
    let b_surv: Vec<i64> = (0..=degree_bound / wz)
        .filter(|&k| {
            let r = b_offset(k) - delta_b;
            r.mod_floor(&5) == 0 && (-1..=n_prime).contains(&(r / 5))
        })
        .collect();
    let a_surv: Vec<(i64, i64, i64)> = triples
        .iter()
        .copied()
        .filter(|t| {
            let r = deg(t) - delta_b;
            r.mod_floor(&5) == 0 && (0..=n_prime).contains(&(r / 5))
        })
        .collect();
    // (II-a): a constant b-term forces N′ = −1 and leaves no a_ijk.
    let (n_iia, delta_iia) = split5(b_offset(0));
    let case_iia_eliminated = !triples.iter().any(|t| {
        let r = deg(t) - delta_iia;
        r.mod_floor(&5) == 0 && (0..=n_iia).contains(&(r / 5))
    });

    // g = a₁₀₀x/b₀ makes the denominator of f/g a multiple of x; its
    // constant term q₁₀₀ at m′ = M′ fixes (M′, δ).
    let (m_prime, delta_q) = split5(deg(&(1, 0, 0)));
    let q_surv: Vec<(i64, i64, i64)> = triples
        .iter()
        .copied()
        .filter(|t| t.0 == 1 && t.1 == 0)
        .filter(|t| {
            let r = deg(t) - delta_q;
            r.mod_floor(&5) == 0 && (0..=m_prime).contains(&(r / 5))
        })
        .collect();
    let p_surv: Vec<(i64, i64, i64)> = triples
        .iter()
        .copied()
        .filter(|t| {
            let r = deg(t) - 1 - delta_q;
            r.mod_floor(&5) == 0 && (-1..=m_prime).contains(&(r / 5))
        })
        .collect();

    let name3 = |c: char, t: &(i64, i64, i64)| format!("{c}{}{}{}", t.0, t.1, t.2);
    let mut survivors: Vec<String> = a_surv.iter().map(|t| name3('a', t)).collect();
    survivors.extend(b_surv.iter().map(|k| format!("b{k}")));
    survivors.extend(p_surv.iter().map(|t| name3('p', t)));
    survivors.extend(q_surv.iter().map(|t| name3('q', t)));
    survivors.sort();

    // Reassemble f and g from the survivors with unit coefficients scaled by
    // the family constants a, b, c.
    let mono = |t: &(i64, i64, i64)| {
        Monomial::from_pairs(
            [(crate::algebra::sym::x(), t.0 as i32), (crate::algebra::sym::y(), t.1 as i32), (crate::algebra::sym::z(), t.2 as i32)]
                .into_iter()
                .filter(|p| p.1 > 0),
        )
    };
    let g = a_surv.iter().fold(Poly::zero(), |acc, t| &acc + &Poly::term(mono(t), Q::one()));
    let g = &g * &Poly::var(Var::param("c"));
    let mut f = Poly::zero();
    for t in &p_surv {
        let cst = if t.1 > 0 { Var::param("a") } else { Var::param("b") };
        f = &f + &(&Poly::term(mono(t), Q::one()) * &Poly::var(cst));
    }
    Thm39Report {
        degree_bound,
        survivors,
        n_prime_delta: (n_prime, delta_b),
        m_prime_delta: (m_prime, delta_q),
        case_iia_eliminated,
        f,
        g,
    }
}

// ---------------------------------------------------------------------------
// Fast-slow blow-up limits

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FastSlowModel {
    SaddleNode,
    Transcritical,
    BogdanovTakens,
    BogdanovTakensZ2,
    BogdanovTakensZ3,
}

impl FastSlowModel {
    pub const ALL: [FastSlowModel; 5] = [
        FastSlowModel::SaddleNode,
        FastSlowModel::Transcritical,
        FastSlowModel::BogdanovTakens,
        FastSlowModel::BogdanovTakensZ2,
        FastSlowModel::BogdanovTakensZ3,
    ];

    pub fn parse(tag: &str) -> Option<FastSlowModel> {
        match tag.to_ascii_lowercase().replace('_', "-").as_str() {
            "saddle-node" | "sn" => Some(FastSlowModel::SaddleNode),
            "transcritical" => Some(FastSlowModel::Transcritical),
            "bt" | "bogdanov-takens" => Some(FastSlowModel::BogdanovTakens),
            "bt-z2" => Some(FastSlowModel::BogdanovTakensZ2),
            "bt-z3" => Some(FastSlowModel::BogdanovTakensZ3),
            _ => None,
        }
    }

    /// Blow-up weights of (fast variables, z, ε).
    pub fn default_weights(self) -> Vec<i64> {
        match self {
            FastSlowModel::SaddleNode => vec![1, 2, 3],
            FastSlowModel::Transcritical => vec![1, 1, 2],
            FastSlowModel::BogdanovTakens => vec![3, 2, 4, 5],
            FastSlowModel::BogdanovTakensZ2 => vec![2, 1, 2, 3],
            FastSlowModel::BogdanovTakensZ3 => vec![1, 1, 1, 2],
        }
    }

    /// Variables (fast…, z, ε) and the field, with ż = ε, ε̇ = 0 and every
    /// perturbation replaced by its constant term αᵢ = fᵢ(0).
    pub fn system(self) -> (Vec<Var>, Vec<Poly>) {
        let p = |s: &str| crate::algebra::parse_poly(s).unwrap();
        let (vars, f): (Vec<&str>, Vec<&str>) = match self {
            FastSlowModel::SaddleNode => (vec!["x", "z", "eps"], vec!["x^2 + z + eps*alpha1", "eps"]),
            FastSlowModel::Transcritical => (vec!["x", "z", "eps"], vec!["x^2 + z*x + eps*alpha1", "eps"]),
            FastSlowModel::BogdanovTakens => {
                (vec!["x", "y", "z", "eps"], vec!["y^2 + x*y + z + eps*alpha1", "x + eps*alpha2", "eps"])
            }
            FastSlowModel::BogdanovTakensZ2 => {
                (vec!["x", "y", "z", "eps"], vec!["y^3 - x*y^3 + z*y + eps*alpha1", "x + eps*alpha2", "eps"])
            }
            FastSlowModel::BogdanovTakensZ3 => (
                vec!["x", "y", "z", "eps"],
                vec![
                    "x^2 - y^2 - z*y + x*(x^2 + y^2) + eps*alpha1",
                    "-2*x*y + z*x + y*(x^2 + y^2) + eps*alpha2",
                    "eps",
                ],
            ),
        };
        (vars.into_iter().map(Var::new).collect(), f.into_iter().map(p).collect())
    }

    fn chart_names(self) -> Vec<&'static str> {
        match self {
            FastSlowModel::SaddleNode | FastSlowModel::Transcritical => vec!["X3", "Z3"],
            _ => vec!["X4", "Y4", "Z4"],
        }
    }
}

#[derive(Clone, Debug)]
pub struct DivisorEquation {
    pub model: FastSlowModel,
    pub weights: Vec<i64>,
    /// Chart variables (fast…, Z) on the exceptional divisor.
    pub vars: Vec<Var>,
    /// d(fast variable)/dZ for each fast variable.
    pub rhs: Vec<Poly>,
    /// Power of r divided out before setting r = 0.
    pub leading_power: i32,
}

pub fn r_var() -> Var {
    Var::new("r")
}

/// Weighted blow-up in the ε-chart (ε = r^s), leading order on {r = 0}.
pub fn fastslow_blowup_limit(model: FastSlowModel, weights: &[i64]) -> Result<DivisorEquation> {
    let (vars, field) = model.system();
    let names = model.chart_names();
    let r = r_var();
    let n = vars.len() - 1;
    let chart: Vec<Var> = names.iter().map(|s| Var::new(s)).collect();
    let mut map = MonomialMap::new();
    for i in 0..n {
        map.insert(vars[i], Poly::var(chart[i]).mul_monomial(&Monomial::var(r, weights[i] as i32)));
    }
    map.insert(vars[n], Poly::var_pow(r, weights[n] as i32));
    // r is constant because ε̇ = 0, so V̇ᵢ = r^(−wᵢ)·Fᵢ.
    let comps: Vec<Poly> = (0..n)
        .map(|i| field[i].substitute(&map).map(|p| p.mul_monomial(&Monomial::var(r, -weights[i] as i32))))
        .collect::<std::result::Result<_, _>>()?;
    let lead = comps.iter().filter_map(|c| c.low_degree_in(r)).min().unwrap_or(0);
    let limit: Vec<Poly> = comps
        .iter()
        .map(|c| c.mul_monomial(&Monomial::var(r, -lead)).subs(r, &Poly::zero()))
        .collect::<std::result::Result<_, _>>()?;
    let time = limit[n - 1].as_constant().filter(|c| !c.is_zero());
    let Some(time) = time else {
        return Err(LocalError::NonConstantTime(limit[n - 1].to_string()));
    };
    let inv = Q::one() / time;
    Ok(DivisorEquation {
        model,
        weights: weights.to_vec(),
        vars: chart,
        rhs: limit[..n - 1].iter().map(|p| p.scale(&inv)).collect(),
        leading_power: lead,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qf};

    #[test]
    fn resonance_bound() {
        assert_eq!(a_priori_resonance_bound(&[q(6), q(4), q(5)]), Some(3));
        assert_eq!(a_priori_resonance_bound(&[q(3), q(1), q(2)]), Some(4));
        assert_eq!(a_priori_resonance_bound(&[q(1), q(-1), q(2)]), None);
    }

    #[test]
    fn poincare_domain_test() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        assert!(poincare_domain(&[c(1.0, 0.0), c(2.0, 1.0), c(3.0, -1.0)]));
        assert!(!poincare_domain(&[c(1.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        assert!(!poincare_domain(&[c(1.0, 1.0), c(1.0, -1.0), c(-1.0, 0.0)]));
    }

    #[test]
    fn split_by_five() {
        assert_eq!(split5(-2), (-1, 3));
        assert_eq!(split5(3), (0, 3));
        assert_eq!(qf(3, 1), q(3));
    }
}
