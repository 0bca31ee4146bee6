//! Formal Laurent solutions at a movable pole z = z₀.
//!
//! With T = z − z₀ the ansatz is x = Σ Aₙ T^(n−p), y = Σ Bₙ T^(n−q). This
//! needs s − r = 1 so that d/dz lowers the weight by exactly one. Step n is
//! the 2×2 system (n·I − K)(Aₙ, Bₙ) = rhs with K the Kovalevskaya matrix of
//! the principal part at the balance; a singular consistent step introduces
//! a free symbol.

use crate::algebra::univariate::{rational_roots, resultant};
use crate::algebra::{exact_linear_solve, AlgebraError, LinearSolution, Monomial, MonomialMap, Poly, RatFn, Var, Q};
use crate::newton_weights::{PlanarODE, Weights};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series obstruction at n = {n}: step system is singular and inconsistent")]
    Obstruction { n: usize },
    #[error("Laurent ansatz needs s - r = 1, got weights {0}")]
    UnsupportedWeights(Weights),
    #[error("({0}, {1}) is not a leading balance")]
    NotABalance(String, String),
    #[error("step {n} is not affine in the new coefficients")]
    Nonlinear { n: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeriesSolution {
    pub p: i64,
    pub q: i64,
    pub balance: (Q, Q),
    /// Aₙ, Bₙ for n = 0..=n_max, polynomial in z₀, parameters and free symbols.
    pub a: Vec<Poly>,
    pub b: Vec<Poly>,
    pub free_indices: Vec<usize>,
    pub free_symbols: Vec<Var>,
    pub kovalevskaya: Option<usize>,
}

pub fn t_var() -> Var {
    Var::new("T")
}

pub fn z0_var() -> Var {
    Var::new("z0")
}

impl LaurentSeriesSolution {
    pub fn n_max(&self) -> usize {
        self.a.len() - 1
    }

    pub fn leading_exponents(&self) -> (i64, i64) {
        (-self.p, -self.q)
    }

    pub fn x_series(&self) -> Poly {
        series_poly(&self.a, self.p)
    }

    pub fn y_series(&self) -> Poly {
        series_poly(&self.b, self.q)
    }

    /// Coefficient of T^k in x (zero outside the computed range).
    pub fn x_coeff(&self, k: i64) -> Poly {
        coeff_at(&self.a, self.p, k)
    }

    pub fn y_coeff(&self, k: i64) -> Poly {
        coeff_at(&self.b, self.q, k)
    }

    pub fn a_rat(&self, n: usize) -> RatFn {
        RatFn::from_poly(self.a[n].clone())
    }

    pub fn b_rat(&self, n: usize) -> RatFn {
        RatFn::from_poly(self.b[n].clone())
    }
}

fn coeff_at(c: &[Poly], shift: i64, k: i64) -> Poly {
    let n = k + shift;
    if n < 0 || n as usize >= c.len() {
        Poly::zero()
    } else {
        c[n as usize].clone()
    }
}

fn series_poly(c: &[Poly], shift: i64) -> Poly {
    let t = t_var();
    let mut s = Poly::zero();
    for (n, cn) in c.iter().enumerate() {
        s = &s + &cn.mul_monomial(&Monomial::var(t, n as i32 - shift as i32));
    }
    s
}

/// Solutions (A₀, B₀) ≠ (0, 0) of −pA = f_p(A, B, 0), −qB = g_p(A, B, 0).
///
/// Only rational balances are returned, sorted lexicographically.
pub fn leading_balances(ode: &PlanarODE, w: &Weights) -> Vec<(Q, Q)> {
    let (principal, _) = ode.split(w);
    let (x, y, z) = (crate::algebra::sym::x(), crate::algebra::sym::y(), crate::algebra::sym::z());
    let a = Var::new("A_bal");
    let b = Var::new("B_bal");
    let map = MonomialMap::from_pairs([(x, Poly::var(a)), (y, Poly::var(b)), (z, Poly::zero())]);
    let pe = &principal.f.substitute(&map).unwrap() + &Poly::var(a).scale(&Q::from_integer(w.p.into()));
    let qe = &principal.g.substitute(&map).unwrap() + &Poly::var(b).scale(&Q::from_integer(w.q.into()));
    let mut out: Vec<(Q, Q)> = Vec::new();
    let mut push = |av: Q, bv: Q| {
        if !(av.is_zero() && bv.is_zero()) && !out.contains(&(av.clone(), bv.clone())) {
            out.push((av, bv));
        }
    };
    let res = resultant(&pe, &qe, a);
    if res.is_zero() {
        return out;
    }
    for bv in rational_roots(&res, b) {
        let bmap = BTreeMap::from([(b, bv.clone())]);
        let pa = pe.eval_partial(&bmap).unwrap();
        let qa = qe.eval_partial(&bmap).unwrap();
        let cands = if pa.is_zero() { rational_roots(&qa, a) } else { rational_roots(&pa, a) };
        for av in cands {
            let amap = BTreeMap::from([(a, av.clone())]);
            if pa.eval_partial(&amap).unwrap().is_zero() && qa.eval_partial(&amap).unwrap().is_zero() {
                push(av, bv.clone());
            }
        }
    }
    out.sort();
    out
}

/// K with step matrix n·I − K: K = [[p + ∂f/∂x, ∂f/∂y], [∂g/∂x, q + ∂g/∂y]] at the balance, z = 0.
pub fn kovalevskaya_matrix(ode: &PlanarODE, w: &Weights, balance: &(Q, Q)) -> [[Q; 2]; 2] {
    let (principal, _) = ode.split(w);
    let (x, y, z) = (crate::algebra::sym::x(), crate::algebra::sym::y(), crate::algebra::sym::z());
    let at = BTreeMap::from([(x, balance.0.clone()), (y, balance.1.clone()), (z, Q::zero())]);
    let ev = |p: &Poly| p.eval_partial(&at).unwrap().as_constant().unwrap_or_else(Q::zero);
    let (f, g) = (&principal.f, &principal.g);
    [
        [Q::from_integer(w.p.into()) + ev(&f.diff(x)), ev(&f.diff(y))],
        [ev(&g.diff(x)), Q::from_integer(w.q.into()) + ev(&g.diff(y))],
    ]
}

/// Default truncation order: κ + 4 when κ is known, else 12.
pub fn default_n_max(kovalevskaya: Option<usize>) -> usize {
    kovalevskaya.map(|k| k + 4).unwrap_or(12)
}

/// Keeps the terms of `p` with T-power at most `k`.
fn cut(p: &Poly, k: i64) -> Poly {
    let t = t_var();
    Poly::from_terms(p.terms().filter(|(m, _)| m.exp(t) as i64 <= k).map(|(m, c)| (m.clone(), c.clone())))
}

/// f(xs, ys, z₀ + T) through T^k, multiplying truncated factors only.
///
/// A factor with lowest power ℓ shifts everything after it by at least ℓ,
/// so partial products are cut at k minus the lows still to come.
fn eval_truncated(f: &Poly, xs: &Poly, ys: &Poly, k: i64) -> Poly {
    let (x, y, z) = (crate::algebra::sym::x(), crate::algebra::sym::y(), crate::algebra::sym::z());
    let t = t_var();
    let zs = &Poly::var(z0_var()) + &Poly::var(t);
    let low = |p: &Poly| p.low_degree_in(t).unwrap_or(0) as i64;
    let mut out = Poly::zero();
    for (m, c) in f.terms() {
        let mut factors: Vec<&Poly> = Vec::new();
        let mut rest = Monomial::one();
        for &(v, e) in m.pairs() {
            let src = if v == x {
                Some(xs)
            } else if v == y {
                Some(ys)
            } else if v == z {
                Some(&zs)
            } else {
                None
            };
            match src {
                Some(sp) => factors.extend(std::iter::repeat(sp).take(e as usize)),
                None => rest = rest.mul(&Monomial::var(v, e)),
            }
        }
        let lows: Vec<i64> = factors.iter().map(|p| low(p)).collect();
        let mut acc = Poly::term(rest, c.clone());
        for (i, fac) in factors.iter().enumerate() {
            let remaining: i64 = lows[i + 1..].iter().sum();
            let budget = k - remaining;
            let cut_f = cut(fac, budget - low(&acc));
            acc = cut(&(&acc * &cut_f), budget);
        }
        out = &out + &cut(&acc, k);
    }
    out
}

/// Residual coefficients of x' − f and y' − g at T^kx and T^ky.
fn residual_coeffs(ode: &PlanarODE, xs: &Poly, ys: &Poly, kx: i64, ky: i64) -> (Poly, Poly) {
    let t = t_var();
    let rx = &cut(&xs.diff(t), kx) - &eval_truncated(&ode.f, xs, ys, kx);
    let ry = &cut(&ys.diff(t), ky) - &eval_truncated(&ode.g, xs, ys, ky);
    (coeff_of_t(&rx, kx), coeff_of_t(&ry, ky))
}

fn residuals(ode: &PlanarODE, xs: &Poly, ys: &Poly) -> Result<(Poly, Poly), AlgebraError> {
    let (x, y, z) = (crate::algebra::sym::x(), crate::algebra::sym::y(), crate::algebra::sym::z());
    let t = t_var();
    let map = MonomialMap::from_pairs([(x, xs.clone()), (y, ys.clone()), (z, &Poly::var(z0_var()) + &Poly::var(t))]);
    let rx = &xs.diff(t) - &ode.f.substitute(&map)?;
    let ry = &ys.diff(t) - &ode.g.substitute(&map)?;
    Ok((rx, ry))
}

fn coeff_of_t(p: &Poly, k: i64) -> Poly {
    p.collect(t_var()).remove(&(k as i32)).unwrap_or_else(Poly::zero)
}

/// Computes the series through n = n_max for the given balance.
pub fn laurent_solve(
    ode: &PlanarODE,
    w: &Weights,
    balance: &(Q, Q),
    n_max: usize,
) -> Result<LaurentSeriesSolution, SeriesError> {
    if w.s - w.r != 1 {
        return Err(SeriesError::UnsupportedWeights(*w));
    }
    let (p, q) = (w.p, w.q);
    let mut a = vec![Poly::from_q(balance.0.clone())];
    let mut b = vec![Poly::from_q(balance.1.clone())];
    {
        let (cx, cy) = residual_coeffs(ode, &series_poly(&a, p), &series_poly(&b, q), -p - 1, -q - 1);
        if !cx.is_zero() || !cy.is_zero() {
            return Err(SeriesError::NotABalance(crate::algebra::fmt_q(&balance.0), crate::algebra::fmt_q(&balance.1)));
        }
    }
    let ua = Var::new("A_new");
    let ub = Var::new("B_new");
    let mut free_indices = Vec::new();
    let mut free_symbols = Vec::new();
    for n in 1..=n_max {
        let mut an = a.clone();
        an.push(Poly::var(ua));
        let mut bn = b.clone();
        bn.push(Poly::var(ub));
        let (kx, ky) = (n as i64 - p - 1, n as i64 - q - 1);
        let (cx, cy) = residual_coeffs(ode, &series_poly(&an, p), &series_poly(&bn, q), kx, ky);
        let zero = BTreeMap::from([(ua, Q::zero()), (ub, Q::zero())]);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for c in [&cx, &cy] {
            let (da, db) = (c.diff(ua), c.diff(ub));
            if da.depends_on(ua) || da.depends_on(ub) || db.depends_on(ua) || db.depends_on(ub) {
                return Err(SeriesError::Nonlinear { n });
            }
            rows.push(vec![RatFn::from_poly(da), RatFn::from_poly(db)]);
            rhs.push(-RatFn::from_poly(c.eval_partial(&zero)?));
        }
        let (na, nb) = match exact_linear_solve(&rows, &rhs) {
            Ok(LinearSolution::Unique(v)) => (to_poly(&v[0]), to_poly(&v[1])),
            Ok(LinearSolution::Free { particular, nullspace, .. }) => {
                let (pa, pb) = (to_poly(&particular[0]), to_poly(&particular[1]));
                let v = &nullspace[0];
                let (va, vb) = (to_poly(&v[0]), to_poly(&v[1]));
                free_indices.push(n);
                if nullspace.len() == 2 {
                    let (sa, sb) = (Var::new(&format!("A{n}")), Var::new(&format!("B{n}")));
                    free_symbols.extend([sa, sb]);
                    (Poly::var(sa), Poly::var(sb))
                } else if !va.is_zero() {
                    // Reparametrize so that Aₙ itself is the free symbol.
                    let s = Var::new(&format!("A{n}"));
                    free_symbols.push(s);
                    let t = (&Poly::var(s) - &pa).scale(&(Q::one() / va.as_constant().unwrap()));
                    (Poly::var(s), &pb + &(&t * &vb))
                } else {
                    let s = Var::new(&format!("B{n}"));
                    free_symbols.push(s);
                    (pa, Poly::var(s))
                }
            }
            Err(AlgebraError::Inconsistent { .. }) => return Err(SeriesError::Obstruction { n }),
            Err(e) => return Err(e.into()),
        };
        a.push(na);
        b.push(nb);
    }
    let kovalevskaya = free_indices.first().copied();
    Ok(LaurentSeriesSolution { p, q, balance: balance.clone(), a, b, free_indices, free_symbols, kovalevskaya })
}

fn to_poly(r: &RatFn) -> Poly {
    // Step matrices are constant, so every coefficient stays polynomial.
    r.as_poly().cloned().expect("constant step matrix keeps coefficients polynomial")
}

pub fn kovalevskaya_exponent(sol: &LaurentSeriesSolution) -> Option<usize> {
    sol.kovalevskaya
}

/// Lowest T-powers of the residuals of the truncated series (None if zero).
pub fn residual_valuations(ode: &PlanarODE, sol: &LaurentSeriesSolution) -> (Option<i32>, Option<i32>) {
    let (rx, ry) = residuals(ode, &sol.x_series(), &sol.y_series()).expect("polynomial system");
    (rx.low_degree_in(t_var()), ry.low_degree_in(t_var()))
}

/// All series of the system, one per rational balance.
pub fn all_series(ode: &PlanarODE, w: &Weights, n_max: usize) -> Result<Vec<LaurentSeriesSolution>, SeriesError> {
    leading_balances(ode, w).iter().map(|bal| laurent_solve(ode, w, bal, n_max)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesSummary {
    pub balance: (String, String),
    pub leading_exponents: (i64, i64),
    pub kovalevskaya: Option<usize>,
    pub a: Vec<String>,
    pub b: Vec<String>,
}

impl From<&LaurentSeriesSolution> for SeriesSummary {
    fn from(s: &LaurentSeriesSolution) -> Self {
        SeriesSummary {
            balance: (crate::algebra::fmt_q(&s.balance.0), crate::algebra::fmt_q(&s.balance.1)),
            leading_exponents: s.leading_exponents(),
            kovalevskaya: s.kovalevskaya,
            a: s.a.iter().map(|c| c.to_string()).collect(),
            b: s.b.iter().map(|c| c.to_string()).collect(),
        }
    }
}
