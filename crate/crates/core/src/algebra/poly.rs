//! Sparse multivariate Laurent polynomials.

use super::coeff::{Coeff, GaussQ, Q};
use super::error::{AlgebraError, Result};
use super::var::Var;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// A Laurent monomial: sorted `(var, exponent)` pairs, no zero exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Var, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, e: i32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, i32)>) -> Self {
        let mut m = Monomial::one();
        for (v, e) in pairs {
            m = m.mul(&Monomial::var(v, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Var, i32)] {
        &self.0
    }

    pub fn exp(&self, v: Var) -> i32 {
        self.0.iter().find(|(w, _)| *w == v).map(|p| p.1).unwrap_or(0)
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|p| p.1 as i64).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(v, e)| (v, e * k)).collect())
    }

    pub fn inv(&self) -> Monomial {
        self.pow(-1)
    }

    /// Componentwise minimum of exponents (absent variables count as 0).
    pub fn min_with(&self, other: &Monomial) -> Monomial {
        let vars: BTreeSet<Var> = self.0.iter().chain(other.0.iter()).map(|p| p.0).collect();
        Monomial::from_pairs(vars.into_iter().map(|v| (v, self.exp(v).min(other.exp(v)))))
    }

    pub fn has_negative_parameter(&self) -> Option<Var> {
        self.0.iter().find(|(v, e)| v.is_parameter() && *e < 0).map(|p| p.0)
    }

    pub fn without(&self, v: Var) -> Monomial {
        Monomial(self.0.iter().copied().filter(|p| p.0 != v).collect())
    }

    pub fn weighted(&self, w: &BTreeMap<Var, i64>) -> i64 {
        self.0.iter().map(|(v, e)| w.get(v).copied().unwrap_or(0) * *e as i64).sum()
    }

    /// Lexicographic order on exponent vectors, variables ordered by handle.
    /// A genuine monomial order on polynomials.
    pub fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(p), None) => return p.1.cmp(&0),
                (None, Some(q)) => return 0.cmp(&q.1),
                (Some(p), Some(q)) => match p.0.cmp(&q.0) {
                    Ordering::Less => return p.1.cmp(&0),
                    Ordering::Greater => return 0.cmp(&q.1),
                    Ordering::Equal => {
                        if p.1 != q.1 {
                            return p.1.cmp(&q.1);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }

    /// Graded order: total degree first, then reverse-lexicographic tie break
    /// on the pair list. Only used to pick a canonical leading term.
    pub fn grlex_cmp(&self, other: &Monomial) -> Ordering {
        self.total_degree().cmp(&other.total_degree()).then_with(|| self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else if *e < 0 {
                write!(f, "{v}^({e})")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Exact sparse Laurent polynomial with coefficients in `C`.
#[derive(Clone, PartialEq)]
pub struct LaurentPoly<C: Coeff = Q> {
    terms: BTreeMap<Monomial, C>,
}

pub type Poly = LaurentPoly<Q>;
pub type GPoly = LaurentPoly<GaussQ>;

/// Variable weights for weighted degrees; absent variables have weight 0.
pub type VarWeights = BTreeMap<Var, i64>;

impl<C: Coeff> Default for LaurentPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> LaurentPoly<C> {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn from_q(c: Q) -> Self {
        Self::constant(C::from_q(c))
    }

    pub fn int(n: i64) -> Self {
        Self::from_q(super::coeff::q(n))
    }

    pub fn var(v: Var) -> Self {
        Self::term(Monomial::var(v, 1), C::one())
    }

    /// `v^e`; panics on a negative exponent of a parameter symbol.
    pub fn var_pow(v: Var, e: i32) -> Self {
        assert!(!(v.is_parameter() && e < 0), "negative exponent on parameter {v}");
        Self::term(Monomial::var(v, e), C::one())
    }

    pub fn term(m: Monomial, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPoly { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = existing.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, C)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn as_constant(&self) -> Option<C> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    /// `Some((m, c))` when the polynomial is the single term `c*m`.
    pub fn as_monomial(&self) -> Option<(&Monomial, &C)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.pairs().iter().map(|p| p.0)).collect()
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exp(v) != 0)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect() }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> LaurentPoly<D> {
        LaurentPoly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Integer power; negative powers only for single terms.
    pub fn pow(&self, k: i64) -> Result<Self> {
        if k >= 0 {
            let mut base = self.clone();
            let mut acc = Self::one();
            let mut k = k as u64;
            while k > 0 {
                if k & 1 == 1 {
                    acc = &acc * &base;
                }
                k >>= 1;
                if k > 0 {
                    base = &base * &base;
                }
            }
            return Ok(acc);
        }
        let (m, c) = self.as_monomial().ok_or(AlgebraError::NegativePowerOfNonMonomial)?;
        if let Some(v) = m.has_negative_parameter().or_else(|| {
            m.pairs().iter().find(|(v, e)| v.is_parameter() && *e > 0).map(|p| p.0)
        }) {
            return Err(AlgebraError::ParameterNegativeExponent(v.name()));
        }
        let ck = num_traits::pow(C::one() / c.clone(), (-k) as usize);
        Ok(Self::term(m.pow(k as i32), ck))
    }

    pub fn diff(&self, v: Var) -> Self {
        Self::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.exp(v);
            if e == 0 {
                return None;
            }
            let m2 = m.mul(&Monomial::var(v, -1));
            Some((m2, c.clone() * C::from_q(super::coeff::q(e as i64))))
        }))
    }

    /// Max over terms of the weighted degree.
    pub fn weighted_degree(&self, w: &VarWeights) -> Result<i64> {
        self.terms.keys().map(|m| m.weighted(w)).max().ok_or(AlgebraError::ZeroPolynomialDegree)
    }

    pub fn min_weighted_degree(&self, w: &VarWeights) -> Result<i64> {
        self.terms.keys().map(|m| m.weighted(w)).min().ok_or(AlgebraError::ZeroPolynomialDegree)
    }

    /// Terms of exactly weighted degree `d`.
    pub fn weighted_part(&self, w: &VarWeights, d: i64) -> Self {
        Self::from_terms(
            self.terms.iter().filter(|(m, _)| m.weighted(w) == d).map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    pub fn is_quasi_homogeneous(&self, w: &VarWeights) -> bool {
        let mut degs = self.terms.keys().map(|m| m.weighted(w));
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// Keeps terms whose total degree in `vars` is at most `n`.
    pub fn truncate(&self, vars: &[Var], n: i64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| vars.iter().map(|v| m.exp(*v) as i64).sum::<i64>() <= n)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Terms whose total degree in `vars` is exactly `n`.
    pub fn homogeneous_part(&self, vars: &[Var], n: i64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| vars.iter().map(|v| m.exp(*v) as i64).sum::<i64>() == n)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Decomposes by powers of `v`: `p = Σ_k coeff_k · v^k`.
    pub fn collect(&self, v: Var) -> BTreeMap<i32, Self> {
        let mut out: BTreeMap<i32, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.exp(v)).or_default().add_term(m.without(v), c.clone());
        }
        out
    }

    pub fn degree_in(&self, v: Var) -> Option<i32> {
        self.terms.keys().map(|m| m.exp(v)).max()
    }

    pub fn low_degree_in(&self, v: Var) -> Option<i32> {
        self.terms.keys().map(|m| m.exp(v)).min()
    }

    /// Monomial gcd: componentwise minimum over all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(),
            Some(first) => it.fold(first.clone(), |acc, m| acc.min_with(m)),
        }
    }

    /// Leading term under the graded order of `Monomial::grlex_cmp`.
    pub fn leading(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().max_by(|a, b| a.0.grlex_cmp(b.0))
    }

    pub fn subs(&self, v: Var, image: &Self) -> Result<Self> {
        let mut m = MonomialMap::new();
        m.insert(v, image.clone());
        self.substitute(&m)
    }

    /// Substitutes each mapped variable by its image; unmapped variables are
    /// left unchanged.
    pub fn substitute(&self, map: &MonomialMap<C>) -> Result<Self> {
        let mut cache: HashMap<(Var, i32), Self> = HashMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut fixed = Monomial::one();
            let mut acc = Self::constant(c.clone());
            for &(v, e) in m.pairs() {
                match map.get(v) {
                    None => fixed = fixed.mul(&Monomial::var(v, e)),
                    Some(img) => {
                        let pw = match cache.get(&(v, e)) {
                            Some(p) => p.clone(),
                            None => {
                                let p = img.pow(e as i64)?;
                                cache.insert((v, e), p.clone());
                                p
                            }
                        };
                        acc = &acc * &pw;
                    }
                }
            }
            out += &acc.mul_monomial(&fixed);
        }
        if let Some(v) = out.terms.keys().find_map(|m| m.has_negative_parameter()) {
            return Err(AlgebraError::ParameterNegativeExponent(v.name()));
        }
        Ok(out)
    }

    /// Assigns exact values to some variables.
    pub fn eval_partial(&self, vals: &BTreeMap<Var, C>) -> Result<Self> {
        let map = MonomialMap::from_pairs(vals.iter().map(|(v, c)| (*v, Self::constant(c.clone()))));
        for (v, c) in vals {
            if c.is_zero() && self.low_degree_in(*v).unwrap_or(0) < 0 {
                return Err(AlgebraError::DivisionByZero);
            }
        }
        self.substitute(&map)
    }

    /// Exact evaluation at a point covering every variable.
    pub fn eval(&self, vals: &BTreeMap<Var, C>) -> Result<C> {
        let r = self.eval_partial(vals)?;
        r.as_constant().ok_or(AlgebraError::DivisionByZero)
    }

    /// Floating evaluation; missing variables evaluate to 0.
    pub fn eval_c64(&self, vals: &HashMap<Var, Complex64>) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_c64();
            for &(v, e) in m.pairs() {
                let x = vals.get(&v).copied().unwrap_or(Complex64::new(0.0, 0.0));
                t *= x.powi(e);
            }
            s += t;
        }
        s
    }

    /// Splits off the monomial content: `p = m * p'` with `p'` a polynomial
    /// not divisible by any variable.
    pub fn split_monomial(&self) -> (Monomial, Self) {
        let m = self.monomial_content();
        (m.clone(), self.mul_monomial(&m.inv()))
    }

    /// Exact quotient `self / d` in the Laurent ring, if it exists.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (ma, a) = self.split_monomial();
        let (md, dd) = d.split_monomial();
        let q = poly_div_exact(&a, &dd)?;
        Some(q.mul_monomial(&ma.mul(&md.inv())))
    }
}

/// Exact division of genuine polynomials using lexicographic leading terms.
fn poly_div_exact<C: Coeff>(a: &LaurentPoly<C>, d: &LaurentPoly<C>) -> Option<LaurentPoly<C>> {
    if let Some(c) = d.as_constant() {
        return Some(a.scale(&(C::one() / c)));
    }
    let lead = |p: &LaurentPoly<C>| {
        p.terms.iter().max_by(|a, b| a.0.lex_cmp(b.0)).map(|(m, c)| (m.clone(), c.clone()))
    };
    let (dm, dc) = lead(d)?;
    let mut rem = a.clone();
    let mut quo = LaurentPoly::zero();
    let mut guard = 0usize;
    while let Some((rm, rc)) = lead(&rem) {
        let qm = rm.mul(&dm.inv());
        if qm.pairs().iter().any(|p| p.1 < 0) {
            return None;
        }
        let qc = rc / dc.clone();
        let t = LaurentPoly::term(qm, qc);
        rem -= &(&t * d);
        quo += &t;
        guard += 1;
        if guard > 1_000_000 {
            return None;
        }
    }
    Some(quo)
}

impl LaurentPoly<Q> {
    /// Writes `p = c * p'` with `p'` having coprime integer coefficients and a
    /// positive leading coefficient (graded order).
    pub fn primitive(&self) -> (Q, Self) {
        if self.is_zero() {
            return (Q::one(), Self::zero());
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = Q::new(num_gcd, den_lcm);
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            content = -content;
        }
        let inv = Q::one() / content.clone();
        (content, self.scale(&inv))
    }

    pub fn to_gauss(&self) -> GPoly {
        self.map_coeffs(|c| GaussQ::from_q(c.clone()))
    }
}

impl LaurentPoly<GaussQ> {
    /// Real part of coefficients, if every coefficient is real.
    pub fn to_real(&self) -> Option<Poly> {
        let mut out = Poly::zero();
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c.as_q()?);
        }
        Some(out)
    }
}

// ---- operator plumbing ----

impl<C: Coeff> AddAssign<&LaurentPoly<C>> for LaurentPoly<C> {
    fn add_assign(&mut self, rhs: &LaurentPoly<C>) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<C: Coeff> SubAssign<&LaurentPoly<C>> for LaurentPoly<C> {
    fn sub_assign(&mut self, rhs: &LaurentPoly<C>) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl<C: Coeff> MulAssign<&LaurentPoly<C>> for LaurentPoly<C> {
    fn mul_assign(&mut self, rhs: &LaurentPoly<C>) {
        *self = &*self * rhs;
    }
}

impl<C: Coeff> Add for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn add(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<C: Coeff> Sub for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn sub(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<C: Coeff> Mul for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn mul(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = LaurentPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn neg(self) -> LaurentPoly<C> {
        LaurentPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl<C: Coeff> Neg for LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn neg(self) -> LaurentPoly<C> {
        -&self
    }
}

macro_rules! forward_binop {
    ($tr:ident, $f:ident) => {
        impl<C: Coeff> $tr for LaurentPoly<C> {
            type Output = LaurentPoly<C>;
            fn $f(self, rhs: LaurentPoly<C>) -> LaurentPoly<C> {
                (&self).$f(&rhs)
            }
        }
        impl<C: Coeff> $tr<&LaurentPoly<C>> for LaurentPoly<C> {
            type Output = LaurentPoly<C>;
            fn $f(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
                (&self).$f(rhs)
            }
        }
        impl<C: Coeff> $tr<LaurentPoly<C>> for &LaurentPoly<C> {
            type Output = LaurentPoly<C>;
            fn $f(self, rhs: LaurentPoly<C>) -> LaurentPoly<C> {
                self.$f(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl<C: Coeff> fmt::Debug for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

struct CoeffFmt<'a, C: Coeff>(&'a C);
impl<C: Coeff> fmt::Display for CoeffFmt<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_coeff(f)
    }
}

/// Textual form: `coef*var^exp` terms joined by ` + `, highest graded terms
/// first, rationals as `a/b`. Parsed back exactly by `parse_poly`.
impl<C: Coeff> fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ts: Vec<(&Monomial, &C)> = self.terms.iter().collect();
        ts.sort_by(|a, b| b.0.grlex_cmp(a.0).then_with(|| name_key(a.0).cmp(&name_key(b.0))));
        for (k, (m, c)) in ts.into_iter().enumerate() {
            let (neg, mag) = match c.as_q() {
                Some(r) if r.is_negative() => (true, C::from_q(-r)),
                _ => (false, c.clone()),
            };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{}", CoeffFmt(&mag))?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", CoeffFmt(&mag))?;
            }
        }
        Ok(())
    }
}

fn name_key(m: &Monomial) -> Vec<(String, i32)> {
    m.pairs().iter().map(|(v, e)| (v.name(), *e)).collect()
}

/// Variable substitution table. Variables without an entry are fixed.
#[derive(Clone, PartialEq, Debug)]
pub struct MonomialMap<C: Coeff = Q> {
    images: BTreeMap<Var, LaurentPoly<C>>,
}

impl<C: Coeff> Default for MonomialMap<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Coeff> MonomialMap<C> {
    pub fn new() -> Self {
        MonomialMap { images: BTreeMap::new() }
    }

    pub fn from_pairs(it: impl IntoIterator<Item = (Var, LaurentPoly<C>)>) -> Self {
        MonomialMap { images: it.into_iter().collect() }
    }

    pub fn insert(&mut self, v: Var, img: LaurentPoly<C>) {
        self.images.insert(v, img);
    }

    pub fn get(&self, v: Var) -> Option<&LaurentPoly<C>> {
        self.images.get(&v)
    }

    pub fn image(&self, v: Var) -> LaurentPoly<C> {
        self.images.get(&v).cloned().unwrap_or_else(|| LaurentPoly::var(v))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Var, &LaurentPoly<C>)> {
        self.images.iter()
    }

    /// The map "apply `self`, then `then`".
    pub fn compose(&self, then: &MonomialMap<C>) -> Result<MonomialMap<C>> {
        let mut out = MonomialMap::new();
        for (v, img) in &self.images {
            out.insert(*v, img.substitute(then)?);
        }
        for (v, img) in &then.images {
            if !self.images.contains_key(v) {
                out.insert(*v, img.clone());
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::coeff::{q, qf};
    use super::*;

    fn x() -> Poly {
        Poly::var(Var::new("x"))
    }
    fn y() -> Poly {
        Poly::var(Var::new("y"))
    }
    fn z() -> Poly {
        Poly::var(Var::new("z"))
    }

    #[test]
    fn arithmetic_identities() {
        let f = Poly::int(6) * y() * y() + z();
        assert_eq!(&f + &Poly::zero(), f);
        let yinv = y().pow(-2).unwrap();
        assert_eq!(yinv * y().pow(2).unwrap(), Poly::one());
        let a = Poly::var(Var::param("alpha"));
        let g = Poly::int(2) * y().pow(3).unwrap() + y() * z() + a;
        assert_eq!(&g * &Poly::one(), g);
    }

    #[test]
    fn negative_power_of_sum_is_an_error() {
        assert_eq!((x() + y()).pow(-1), Err(AlgebraError::NegativePowerOfNonMonomial));
    }

    #[test]
    fn derivatives() {
        let f = Poly::int(6) * y() * y() + z();
        assert_eq!(f.diff(Var::new("y")), Poly::int(12) * y());
        let w = Var::new("w");
        assert_eq!(Poly::var_pow(w, -2).diff(w), Poly::var_pow(w, -3).scale(&q(-2)));
        assert_eq!(x().diff(Var::new("z")), Poly::zero());
    }

    #[test]
    fn weighted_degrees_of_hamiltonians() {
        let w: VarWeights =
            [(Var::new("x"), 3), (Var::new("y"), 2), (Var::new("z"), 4)].into_iter().collect();
        let h1 = (x() * x()).scale(&qf(1, 2)) - (y() * y() * y()).scale(&q(2)) - z() * y();
        assert_eq!(h1.weighted_degree(&w), Ok(6));
        assert_eq!(Poly::int(5).weighted_degree(&w), Ok(0));
        assert_eq!(Poly::zero().weighted_degree(&w), Err(AlgebraError::ZeroPolynomialDegree));
    }

    #[test]
    fn substitution_examples() {
        let tau = Var::fresh("tau");
        let m = MonomialMap::from_pairs([(Var::new("x"), Poly::var_pow(tau, -3))]);
        assert_eq!((x() * x()).substitute(&m).unwrap(), Poly::var_pow(tau, -6));
        let f = Poly::int(6) * y() * y() + z();
        assert_eq!(f.substitute(&MonomialMap::new()).unwrap(), f);
        let w3 = Var::new("w");
        let m = MonomialMap::from_pairs([(Var::new("y"), Poly::var_pow(w3, -2))]);
        let p = (y() * y() * y()).scale(&q(2));
        assert_eq!(p.substitute(&m).unwrap(), Poly::var_pow(w3, -6).scale(&q(2)));
    }

    #[test]
    fn exact_division() {
        let a = &(x() + y()) * &(x() - y() * z());
        assert_eq!(a.div_exact(&(x() + y())), Some(x() - y() * z()));
        assert_eq!((x() + Poly::one()).div_exact(&(x() - Poly::one())), None);
        let m = y().pow(-3).unwrap();
        let b = &a * &m;
        assert_eq!(b.div_exact(&(x() - y() * z())), Some(&(x() + y()) * &m));
    }

    #[test]
    fn primitive_part() {
        let p = x().scale(&qf(-2, 3)) + y().scale(&qf(4, 9));
        let (c, pp) = p.primitive();
        assert_eq!(pp.scale(&c), p);
        assert_eq!(c, qf(2, 9));
        assert_eq!(pp, y().scale(&q(2)) - x().scale(&q(3)));
    }

    #[test]
    fn display_is_readable() {
        let p = x().scale(&qf(1, 2)) - Poly::int(3) + y().pow(-2).unwrap();
        assert_eq!(p.to_string(), "1/2*x - 3 + y^(-2)");
    }
}
