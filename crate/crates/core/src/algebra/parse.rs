//! Parser for the textual polynomial form.
//!
//! Grammar: sums and differences of products of factors; a factor is a number
//! (`3`, `1/2` via division, `0.25`), an identifier, or a parenthesised
//! expression, optionally raised to an integer power `^k` or `^(-k)`.
//! Division is allowed by constants and single terms only.

use super::coeff::parse_q;
use super::error::{AlgebraError, Result};
use super::poly::Poly;
use super::var::Var;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn canonical_name(raw: &str) -> &str {
    match raw {
        "α" => "alpha",
        "θ" | "θ∞" | "theta_inf" => "theta",
        "κ" | "κ₀" | "kappa0" => "kappa",
        "ε" => "eps",
        other => other,
    }
}

fn resolve(name: &str) -> Var {
    let name = canonical_name(name);
    Var::lookup(name).unwrap_or_else(|| Var::new(name))
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(AlgebraError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly> {
        self.skip_ws();
        let mut acc = if self.eat('-') {
            -self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.power()?;
            } else if self.eat('/') {
                let at = self.pos;
                let d = self.power()?;
                if d.is_zero() {
                    self.pos = at;
                    return self.err("division by zero");
                }
                match d.pow(-1) {
                    Ok(inv) => acc = &acc * &inv,
                    Err(_) => {
                        self.pos = at;
                        return self.err("division by a non-monomial");
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.eat('^') {
            let at = self.pos;
            let neg_paren = self.eat('(');
            let neg = self.eat('-');
            self.skip_ws();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if start == self.pos {
                return self.err("expected integer exponent");
            }
            let k: i64 = self.src[start..self.pos].parse().map_err(|_| AlgebraError::Parse {
                pos: start,
                msg: "exponent out of range".into(),
            })?;
            if neg_paren && !self.eat(')') {
                return self.err("expected `)` after exponent");
            }
            let k = if neg { -k } else { k };
            return base.pow(k).or_else(|_| {
                self.pos = at;
                self.err("negative power of a non-monomial")
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        self.skip_ws();
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                match parse_q(&self.src[start..self.pos]) {
                    Some(v) => Ok(Poly::from_q(v)),
                    None => {
                        self.pos = start;
                        self.err("malformed number")
                    }
                }
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '#' || c == '∞' || ('₀'..='₉').contains(&c) {
                        self.pos += c.len_utf8();
                    } else {
                        break;
                    }
                }
                Ok(Poly::var(resolve(&self.src[start..self.pos])))
            }
            Some(_) => self.err("unexpected character"),
        }
    }
}

/// Parses a Laurent polynomial with rational coefficients.
pub fn parse_poly(src: &str) -> Result<Poly> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::super::coeff::qf;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_painleve_right_hand_sides() {
        let f = parse_poly("6*y^2 + z").unwrap();
        let y = Poly::var(Var::new("y"));
        assert_eq!(f, Poly::int(6) * &y * &y + Poly::var(Var::new("z")));
        let g = parse_poly("2*y^3 + y*z + alpha").unwrap();
        assert!(g.vars().contains(&Var::param("alpha")));
        let h = parse_poly("x^2/2 - 2*y^3 - z*y").unwrap();
        assert_eq!(h.coeff(&super::super::poly::Monomial::var(Var::new("x"), 2)), qf(1, 2));
    }

    #[test]
    fn reports_error_position() {
        match parse_poly("x + * y") {
            Err(AlgebraError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_poly("1/(x+y)").is_err());
    }

    #[test]
    fn greek_aliases() {
        assert_eq!(parse_poly("θ∞ + κ₀").unwrap(), parse_poly("theta + kappa").unwrap());
    }

    proptest! {
        #[test]
        fn display_round_trips(coeffs in proptest::collection::vec((-9i64..10, 1i64..5), 1..6),
                               exps in proptest::collection::vec((-3i32..4, 0i32..3), 1..6)) {
            let x = Var::new("x");
            let y = Var::new("y");
            let mut p = Poly::zero();
            for ((n, d), (ex, ey)) in coeffs.iter().zip(exps.iter()) {
                p = &p + &Poly::term(super::super::poly::Monomial::from_pairs([(x, *ex), (y, *ey)]), qf(*n, *d));
            }
            let back = parse_poly(&p.to_string()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
