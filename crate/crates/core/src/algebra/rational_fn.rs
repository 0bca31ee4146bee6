//! Quotients of Laurent polynomials.

use super::coeff::{Coeff, Q};
use super::error::{AlgebraError, Result};
use super::poly::{LaurentPoly, Monomial};
use super::var::Var;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `numer / denom` with `denom != 0`.
///
/// Canonical form: monomial factors of the denominator in dynamical variables
/// are moved into the numerator, exact polynomial quotients are carried out,
/// and the graded-leading coefficient of the denominator is 1. Equality is
/// decided by cross-multiplication, so it never depends on cancellation.
#[derive(Clone)]
pub struct RationalFn<C: Coeff = Q> {
    numer: LaurentPoly<C>,
    denom: LaurentPoly<C>,
}

pub type RatFn = RationalFn<Q>;

impl<C: Coeff> RationalFn<C> {
    pub fn new(numer: LaurentPoly<C>, denom: LaurentPoly<C>) -> Result<Self> {
        if denom.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::normalize(numer, denom))
    }

    pub fn from_poly(p: LaurentPoly<C>) -> Self {
        RationalFn { numer: p, denom: LaurentPoly::one() }
    }

    pub fn zero() -> Self {
        Self::from_poly(LaurentPoly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(LaurentPoly::one())
    }

    pub fn constant(c: C) -> Self {
        Self::from_poly(LaurentPoly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        Self::from_poly(LaurentPoly::int(n))
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(LaurentPoly::var(v))
    }

    fn normalize(numer: LaurentPoly<C>, denom: LaurentPoly<C>) -> Self {
        if numer.is_zero() {
            return Self::zero();
        }
        // Move dynamical-variable monomial content of the denominator up.
        let content = denom.monomial_content();
        let movable = Monomial::from_pairs(
            content.pairs().iter().copied().filter(|(v, _)| !v.is_parameter()),
        );
        let mut n = numer.mul_monomial(&movable.inv());
        let mut d = denom.mul_monomial(&movable.inv());
        if let Some((m, c)) = d.as_monomial().map(|(m, c)| (m.clone(), c.clone())) {
            if m.is_one() {
                return Self::from_poly(n.scale(&(C::one() / c)));
            }
        }
        if let Some(qt) = exact(&n, &d) {
            return Self::from_poly(qt);
        }
        if let Some(dq) = exact(&d, &n) {
            // numer divides denom: 1 / (denom/numer)
            n = LaurentPoly::one();
            d = dq;
        }
        let lc = d.leading().map(|(_, c)| c.clone()).unwrap_or_else(C::one);
        let inv = C::one() / lc;
        RationalFn { numer: n.scale(&inv), denom: d.scale(&inv) }
    }

    pub fn numer(&self) -> &LaurentPoly<C> {
        &self.numer
    }

    pub fn denom(&self) -> &LaurentPoly<C> {
        &self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    /// The polynomial value when the denominator is 1.
    pub fn as_poly(&self) -> Option<&LaurentPoly<C>> {
        if self.denom == LaurentPoly::one() {
            Some(&self.numer)
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<C> {
        self.as_poly().and_then(|p| p.as_constant())
    }

    pub fn inv(&self) -> Result<Self> {
        Self::new(self.denom.clone(), self.numer.clone())
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k >= 0 {
            Ok(Self::normalize(self.numer.pow(k)?, self.denom.pow(k)?))
        } else {
            self.inv()?.pow(-k)
        }
    }

    pub fn diff(&self, v: Var) -> Self {
        let n = &(&self.numer.diff(v) * &self.denom) - &(&self.numer * &self.denom.diff(v));
        Self::normalize(n, &self.denom * &self.denom)
    }

    pub fn scale(&self, c: &C) -> Self {
        RationalFn { numer: self.numer.scale(c), denom: self.denom.clone() }
    }

    /// Substitutes rational images for variables.
    pub fn substitute(&self, map: &BTreeMap<Var, RationalFn<C>>) -> Result<Self> {
        let n = subs_poly_rat(&self.numer, map)?;
        let d = subs_poly_rat(&self.denom, map)?;
        n.try_div(&d)
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::normalize(&self.numer * &rhs.denom, &self.denom * &rhs.numer))
    }

    pub fn eval(&self, vals: &BTreeMap<Var, C>) -> Result<C> {
        let d = self.denom.eval(vals)?;
        if d.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(self.numer.eval(vals)? / d)
    }

    pub fn eval_c64(
        &self,
        vals: &std::collections::HashMap<Var, num_complex::Complex64>,
    ) -> num_complex::Complex64 {
        self.numer.eval_c64(vals) / self.denom.eval_c64(vals)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> RationalFn<D> {
        RationalFn::normalize(self.numer.map_coeffs(f), self.denom.map_coeffs(f))
    }

    pub fn depends_on(&self, v: Var) -> bool {
        // A cheap syntactic test that is exact for canonical forms in which
        // cancellation already happened; callers needing certainty diff.
        self.numer.depends_on(v) || self.denom.depends_on(v)
    }
}

/// Exact quotient that keeps parameter exponents nonnegative.
fn exact<C: Coeff>(a: &LaurentPoly<C>, b: &LaurentPoly<C>) -> Option<LaurentPoly<C>> {
    a.div_exact(b).filter(|q| q.terms().all(|(m, _)| m.has_negative_parameter().is_none()))
}

/// Substitution of rational images into a Laurent polynomial.
pub fn subs_poly_rat<C: Coeff>(
    p: &LaurentPoly<C>,
    map: &BTreeMap<Var, RationalFn<C>>,
) -> Result<RationalFn<C>> {
    let mut cache: BTreeMap<(Var, i32), RationalFn<C>> = BTreeMap::new();
    let mut acc = RationalFn::zero();
    for (m, c) in p.terms() {
        let mut fixed = Monomial::one();
        let mut t = RationalFn::constant(c.clone());
        for &(v, e) in m.pairs() {
            match map.get(&v) {
                None => fixed = fixed.mul(&Monomial::var(v, e)),
                Some(img) => {
                    let key = (v, e);
                    let pw = match cache.get(&key) {
                        Some(p) => p.clone(),
                        None => {
                            let p = img.pow(e as i64)?;
                            cache.insert(key, p.clone());
                            p
                        }
                    };
                    t = &t * &pw;
                }
            }
        }
        let t = RationalFn { numer: t.numer.mul_monomial(&fixed), denom: t.denom };
        acc = &acc + &t;
    }
    Ok(acc)
}

impl<C: Coeff> PartialEq for RationalFn<C> {
    fn eq(&self, other: &Self) -> bool {
        &self.numer * &other.denom == &other.numer * &self.denom
    }
}

impl<C: Coeff> Add for &RationalFn<C> {
    type Output = RationalFn<C>;
    fn add(self, rhs: &RationalFn<C>) -> RationalFn<C> {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.denom == rhs.denom {
            return RationalFn::normalize(&self.numer + &rhs.numer, self.denom.clone());
        }
        if let Some(k) = exact(&rhs.denom, &self.denom) {
            return RationalFn::normalize(&(&self.numer * &k) + &rhs.numer, rhs.denom.clone());
        }
        if let Some(k) = exact(&self.denom, &rhs.denom) {
            return RationalFn::normalize(&self.numer + &(&rhs.numer * &k), self.denom.clone());
        }
        RationalFn::normalize(
            &(&self.numer * &rhs.denom) + &(&rhs.numer * &self.denom),
            &self.denom * &rhs.denom,
        )
    }
}

impl<C: Coeff> Neg for &RationalFn<C> {
    type Output = RationalFn<C>;
    fn neg(self) -> RationalFn<C> {
        RationalFn { numer: -&self.numer, denom: self.denom.clone() }
    }
}

impl<C: Coeff> Neg for RationalFn<C> {
    type Output = RationalFn<C>;
    fn neg(self) -> RationalFn<C> {
        -&self
    }
}

impl<C: Coeff> Sub for &RationalFn<C> {
    type Output = RationalFn<C>;
    fn sub(self, rhs: &RationalFn<C>) -> RationalFn<C> {
        self + &(-rhs)
    }
}

impl<C: Coeff> Mul for &RationalFn<C> {
    type Output = RationalFn<C>;
    fn mul(self, rhs: &RationalFn<C>) -> RationalFn<C> {
        if self.is_zero() || rhs.is_zero() {
            return RationalFn::zero();
        }
        // Cross-cancel exact factors before multiplying out.
        let (mut n1, mut d1) = (self.numer.clone(), self.denom.clone());
        let (mut n2, mut d2) = (rhs.numer.clone(), rhs.denom.clone());
        if let Some(k) = exact(&n1, &d2) {
            n1 = k;
            d2 = LaurentPoly::one();
        }
        if let Some(k) = exact(&n2, &d1) {
            n2 = k;
            d1 = LaurentPoly::one();
        }
        RationalFn::normalize(&n1 * &n2, &d1 * &d2)
    }
}

/// Panics on division by zero; use `try_div` for a checked quotient.
impl<C: Coeff> Div for &RationalFn<C> {
    type Output = RationalFn<C>;
    fn div(self, rhs: &RationalFn<C>) -> RationalFn<C> {
        self.try_div(rhs).expect("rational function division by zero")
    }
}

macro_rules! forward_rat {
    ($tr:ident, $f:ident) => {
        impl<C: Coeff> $tr for RationalFn<C> {
            type Output = RationalFn<C>;
            fn $f(self, rhs: RationalFn<C>) -> RationalFn<C> {
                (&self).$f(&rhs)
            }
        }
        impl<C: Coeff> $tr<&RationalFn<C>> for RationalFn<C> {
            type Output = RationalFn<C>;
            fn $f(self, rhs: &RationalFn<C>) -> RationalFn<C> {
                (&self).$f(rhs)
            }
        }
    };
}

forward_rat!(Add, add);
forward_rat!(Sub, sub);
forward_rat!(Mul, mul);
forward_rat!(Div, div);

impl<C: Coeff> From<LaurentPoly<C>> for RationalFn<C> {
    fn from(p: LaurentPoly<C>) -> Self {
        Self::from_poly(p)
    }
}

impl<C: Coeff> fmt::Display for RationalFn<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == LaurentPoly::one() {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "({})/({})", self.numer, self.denom)
        }
    }
}

impl<C: Coeff> fmt::Debug for RationalFn<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coeff> Zero for RationalFn<C> {
    fn zero() -> Self {
        RationalFn::zero()
    }
    fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }
}

impl<C: Coeff> One for RationalFn<C> {
    fn one() -> Self {
        RationalFn::one()
    }
}

#[cfg(test)]
mod tests {
    use super::super::coeff::{q, qf};
    use super::super::poly::Poly;
    use super::*;

    fn v(n: &str) -> Poly {
        Poly::var(Var::new(n))
    }

    #[test]
    fn canonical_forms() {
        let x = v("x");
        let r = RatFn::new(&x * &x, &x * &Poly::int(2)).unwrap();
        assert_eq!(r.as_poly(), Some(&x.scale(&qf(1, 2))));
        let s = RatFn::new(Poly::int(3), (&x + &Poly::one()).scale(&q(3))).unwrap();
        assert_eq!(s.numer(), &Poly::one());
        assert!(RatFn::new(x.clone(), Poly::zero()).is_err());
    }

    #[test]
    fn field_operations() {
        let x = RatFn::var(Var::new("x"));
        let y = RatFn::var(Var::new("y"));
        let a = &x / &(&x + &y);
        let b = &y / &(&x + &y);
        assert_eq!(&a + &b, RatFn::one());
        let c = &(&x - &y) / &(&x + &y);
        assert_eq!(&(&c * &(&x + &y)) / &(&x - &y), RatFn::one());
    }

    #[test]
    fn quotient_rule() {
        let x = Var::new("x");
        let r = RatFn::one() / RatFn::from_poly(&v("x") + &Poly::one());
        let expect = RatFn::int(-1) / RatFn::from_poly((&v("x") + &Poly::one()).pow(2).unwrap());
        assert_eq!(r.diff(x), expect);
    }

    #[test]
    fn substitution_into_rational() {
        let x = Var::new("x");
        let y = Var::new("y");
        let f = RatFn::from_poly(v("x") * v("y"));
        let map: BTreeMap<_, _> =
            [(x, RatFn::one() / RatFn::var(y)), (y, RatFn::var(y) + RatFn::one())].into_iter().collect();
        let r = f.substitute(&map).unwrap();
        assert_eq!(r, (RatFn::var(y) + RatFn::one()) / RatFn::var(y));
    }
}
