//! Exact coefficient fields: the rationals and the Gaussian rationals.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub type Q = BigRational;
pub type GaussQ = Complex<BigRational>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// An exact field usable as the coefficient ring of `LaurentPoly`.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_q(v: Q) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Used only when printing: `a/b` for rationals, `(a+b*i)` for Gaussians.
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
    /// True when the printed form needs no parentheses as a factor.
    fn is_simple(&self) -> bool;
    /// Real rational part if the value is real.
    fn as_q(&self) -> Option<Q>;
}

impl Coeff for Q {
    fn from_q(v: Q) -> Self {
        v
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(self), 0.0)
    }
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_q(self))
    }
    fn is_simple(&self) -> bool {
        true
    }
    fn as_q(&self) -> Option<Q> {
        Some(self.clone())
    }
}

impl Coeff for GaussQ {
    fn from_q(v: Q) -> Self {
        Complex::new(v, Q::zero())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", fmt_q(&self.re))
        } else if self.re.is_zero() {
            if self.im.is_one() {
                write!(f, "I")
            } else {
                write!(f, "{}*I", fmt_q(&self.im))
            }
        } else {
            let sign = if self.im.is_negative() { "-" } else { "+" };
            write!(f, "({}{}{}*I)", fmt_q(&self.re), sign, fmt_q(&self.im.abs()))
        }
    }
    fn is_simple(&self) -> bool {
        self.im.is_zero() || self.re.is_zero()
    }
    fn as_q(&self) -> Option<Q> {
        if self.im.is_zero() {
            Some(self.re.clone())
        } else {
            None
        }
    }
}

pub fn gauss_i() -> GaussQ {
    Complex::new(Q::zero(), Q::one())
}

pub fn q_to_f64(v: &Q) -> f64 {
    match (v.numer().to_f64(), v.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Huge operands: scale down by a common power of two first.
            let shift = v.denom().bits().max(v.numer().bits()).saturating_sub(1000);
            let n = (v.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (v.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// `a/b` when not an integer, plain decimal integer otherwise.
pub fn fmt_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parses `a`, `-a`, `a/b` or a finite decimal such as `0.25` exactly.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip_digits = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{}{}", if ip_digits.is_empty() { "0" } else { ip_digits }, fp);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let v = Q::new(n, d);
        return Some(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Q::from_integer(n))
}

/// Nearest exact rational to a double (exact binary expansion).
pub fn q_from_f64(v: f64) -> Option<Q> {
    Q::from_float(v)
}
