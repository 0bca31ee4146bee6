//! Univariate helpers: rational roots, resultants, numerical roots.

use super::coeff::{q_to_f64, Q};
use super::poly::{Monomial, Poly};
use super::var::Var;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense coefficients `c[k]` of `v^k`; `p` must be polynomial in `v` with
/// coefficients free of `v`.
pub fn dense(p: &Poly, v: Var) -> Vec<Poly> {
    let parts = p.collect(v);
    let deg = parts.keys().copied().max().unwrap_or(0).max(0) as usize;
    let mut out = vec![Poly::zero(); deg + 1];
    for (k, c) in parts {
        assert!(k >= 0, "negative power of {v} in univariate helper");
        out[k as usize] = c;
    }
    out
}

fn from_dense(c: &[Poly], v: Var) -> Poly {
    let mut p = Poly::zero();
    for (k, ck) in c.iter().enumerate() {
        p = &p + &ck.mul_monomial(&Monomial::var(v, k as i32));
    }
    p
}

/// Determinant by fraction-free elimination with exact polynomial division.
pub fn det(mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one();
    }
    let mut sign = Poly::one();
    let mut prev = Poly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Poly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = t.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = Poly::zero();
        }
        prev = m[k][k].clone();
    }
    &sign * &m[n - 1][n - 1]
}

/// Sylvester resultant of `a` and `b` with respect to `v`.
pub fn resultant(a: &Poly, b: &Poly, v: Var) -> Poly {
    let ca = dense(a, v);
    let cb = dense(b, v);
    let (da, db) = (ca.len() - 1, cb.len() - 1);
    let n = da + db;
    if n == 0 {
        return Poly::one();
    }
    let mut m = vec![vec![Poly::zero(); n]; n];
    for r in 0..db {
        for (k, c) in ca.iter().rev().enumerate() {
            m[r][r + k] = c.clone();
        }
    }
    for r in 0..da {
        for (k, c) in cb.iter().rev().enumerate() {
            m[db + r][r + k] = c.clone();
        }
    }
    det(m)
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![];
    }
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            let e = &n / &d;
            if e != d {
                out.push(e);
            }
        }
        d += 1;
        if d > BigInt::from(10_000_000u64) {
            break;
        }
    }
    out
}

/// Exact rational roots (without multiplicity) of a univariate polynomial
/// with rational constant coefficients.
pub fn rational_roots(p: &Poly, v: Var) -> Vec<Q> {
    let c = dense(p, v);
    let mut coeffs: Vec<Q> = c.iter().map(|ci| ci.as_constant().expect("constant coefficients")).collect();
    let mut roots = Vec::new();
    while coeffs.len() > 1 && coeffs[0].is_zero() {
        coeffs.remove(0);
        if !roots.contains(&Q::zero()) {
            roots.push(Q::zero());
        }
    }
    if coeffs.len() <= 1 {
        return roots;
    }
    let lcm = coeffs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|q| (q * Q::from_integer(lcm.clone())).to_integer()).collect();
    let a0 = ints.first().unwrap();
    let an = ints.last().unwrap();
    for pn in divisors(a0) {
        for qd in divisors(an) {
            for s in [1i64, -1] {
                let cand = Q::new(&pn * BigInt::from(s), qd.clone());
                if roots.contains(&cand) {
                    continue;
                }
                let mut acc = Q::zero();
                for c in coeffs.iter().rev() {
                    acc = acc * &cand + c;
                }
                if acc.is_zero() {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots
}

/// Divides out `(v - r)` as often as it divides.
pub fn deflate(p: &Poly, v: Var, r: &Q) -> Poly {
    if r.is_zero() {
        // Division by a monomial always succeeds on Laurent polynomials.
        let k = p.low_degree_in(v).unwrap_or(0).max(0);
        return p.mul_monomial(&Monomial::var(v, -k));
    }
    let lin = &Poly::var(v) - &Poly::from_q(r.clone());
    let mut cur = p.clone();
    while let Some(qt) = cur.div_exact(&lin) {
        if cur.is_zero() {
            break;
        }
        cur = qt;
    }
    cur
}

/// All complex roots of a univariate polynomial with rational coefficients
/// (Aberth iteration followed by Newton polishing).
pub fn numeric_roots(p: &Poly, v: Var) -> Vec<Complex64> {
    let c: Vec<f64> = dense(p, v).iter().map(|ci| q_to_f64(&ci.as_constant().unwrap())).collect();
    numeric_roots_f64(&c)
}

pub fn numeric_roots_f64(c: &[f64]) -> Vec<Complex64> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().map(|x| *x == 0.0).unwrap_or(false) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return vec![];
    }
    let lead = c[n];
    let a: Vec<Complex64> = c.iter().map(|x| Complex64::new(x / lead, 0.0)).collect();
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..=n).rev() {
            dp = dp * z + p;
            p = p * z + a[k];
        }
        (p, dp)
    };
    let radius = 1.0 + a[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.7, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * radius {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zi);
            if dp.norm() > 0.0 {
                *zi -= p / dp;
            }
        }
    }
    z
}

fn q_dense(p: &Poly, v: Var) -> Vec<Q> {
    let mut c: Vec<Q> = dense(p, v).iter().map(|ci| ci.as_constant().expect("constant coefficients")).collect();
    while c.len() > 1 && c.last().map(|x| x.is_zero()).unwrap_or(false) {
        c.pop();
    }
    c
}

/// Remainder of `a` modulo a nonzero `b` (dense ascending coefficients).
fn q_rem(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let k = r.len() - 1;
        let f = r[k].clone() / lead.clone();
        for i in 0..=db {
            r[k - db + i] -= f.clone() * b[i].clone();
        }
        r.pop();
        while r.len() > 1 && r.last().map(|x| x.is_zero()).unwrap_or(false) {
            r.pop();
        }
    }
    if r.is_empty() {
        r.push(Q::zero());
    }
    r
}

/// Monic gcd of two univariate polynomials with constant rational
/// coefficients; gcd(0, 0) = 0.
pub fn gcd(a: &Poly, b: &Poly, v: Var) -> Poly {
    let mut x = q_dense(a, v);
    let mut y = q_dense(b, v);
    let is_zero = |c: &[Q]| c.iter().all(|q| q.is_zero());
    while !is_zero(&y) {
        let r = q_rem(&x, &y);
        x = y;
        y = r;
    }
    if is_zero(&x) {
        return Poly::zero();
    }
    let lead = x.last().unwrap().clone();
    let monic: Vec<Q> = x.iter().map(|c| c.clone() / lead.clone()).collect();
    poly_from_coeffs(&monic, v)
}

/// Remainder of `a` modulo a nonzero `b`.
pub fn rem(a: &Poly, b: &Poly, v: Var) -> Poly {
    poly_from_coeffs(&q_rem(&q_dense(a, v), &q_dense(b, v)), v)
}

/// Polynomial in `v` from constant rational coefficients (ascending).
pub fn poly_from_coeffs(c: &[Q], v: Var) -> Poly {
    from_dense(&c.iter().map(|q| Poly::from_q(q.clone())).collect::<Vec<_>>(), v)
}

pub fn to_f64_checked(q: &Q) -> Option<f64> {
    q.to_f64()
}

#[cfg(test)]
mod tests {
    use super::super::coeff::{q, qf};
    use super::super::parse::parse_poly;
    use super::*;

    #[test]
    fn rational_roots_of_products() {
        let t = Var::new("t_uv");
        let p = parse_poly("(2*t_uv - 1)*(t_uv + 3)*(t_uv^2 + 1)*t_uv").unwrap();
        assert_eq!(rational_roots(&p, t), vec![q(-3), q(0), qf(1, 2)]);
    }

    #[test]
    fn resultant_eliminates() {
        // x - y = 0 and x^2 - 4 = 0 => y^2 - 4
        let x = Var::new("x");
        let a = parse_poly("x - y").unwrap();
        let b = parse_poly("x^2 - 4").unwrap();
        let r = resultant(&a, &b, x);
        let (_, rp) = r.primitive();
        assert_eq!(rp, parse_poly("y^2 - 4").unwrap());
    }

    #[test]
    fn numeric_roots_of_quadratic() {
        let t = Var::new("t_uv");
        let p = parse_poly("6*t_uv^2 + 1").unwrap();
        let mut r = numeric_roots(&p, t);
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[1].im - (1.0f64 / 6.0).sqrt()).abs() < 1e-14);
        assert!(r[1].re.abs() < 1e-14);
    }

    #[test]
    fn gcd_and_remainder() {
        let t = Var::new("t_uv");
        let a = parse_poly("(t_uv^2 + 1)*(t_uv - 2)").unwrap();
        let b = parse_poly("(t_uv^2 + 1)*(3*t_uv + 1)").unwrap();
        assert_eq!(gcd(&a, &b, t), parse_poly("t_uv^2 + 1").unwrap());
        assert_eq!(rem(&a, &parse_poly("t_uv^2 + 1").unwrap(), t), Poly::zero());
        assert_eq!(rem(&parse_poly("t_uv^2").unwrap(), &parse_poly("t_uv - 3").unwrap(), t), Poly::int(9));
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m: Vec<Vec<Poly>> = [[2, 0, 1], [1, 3, 2], [1, 1, 1]]
            .iter()
            .map(|r| r.iter().map(|&v| Poly::int(v)).collect())
            .collect();
        // 2*(3-2) - 0 + 1*(1-3) = 0
        assert_eq!(det(m), Poly::zero());
    }
}
