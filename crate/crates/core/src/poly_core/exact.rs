//! Exact Gaussian-rational polynomials, used as an oracle.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::polynomial::Polynomial;
use super::xnum::{XComplex, XFloat};
use crate::error::{Error, Result};

fn bigint_to_xfloat(n: &BigInt) -> XFloat {
    let bits = n.bits();
    if bits <= 1000 {
        return XFloat::from_f64(n.to_f64().unwrap_or(0.0));
    }
    let shift = bits - 60;
    let top = (n >> shift).to_f64().unwrap_or(0.0);
    XFloat::from_f64(top) * XFloat::exp2(shift as f64)
}

pub fn rational_to_xfloat(q: &BigRational) -> XFloat {
    bigint_to_xfloat(q.numer()) / bigint_to_xfloat(q.denom())
}

/// `max(|a|, b)` for `a/b` in lowest terms; zero has height 1.
pub fn rational_height(q: &BigRational) -> BigInt {
    if q.is_zero() {
        return BigInt::one();
    }
    q.numer().abs().max(q.denom().clone())
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    if let Some((a, b)) = t.split_once('/') {
        let a = parse_rational(a)?;
        let b = parse_rational(b)?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(a / b);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mant, exp10) = match body.find(['e', 'E']) {
        Some(p) => (&body[..p], body[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = BigRational::from_integer(n);
    if scale >= 0 {
        q *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -q } else { q })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussianRational::from_ints(1, 0)
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussianRational::new(
            BigRational::from_integer(re.into()),
            BigRational::from_integer(im.into()),
        )
    }

    pub fn real(q: BigRational) -> Self {
        GaussianRational::new(q, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn height(&self) -> BigInt {
        rational_height(&self.re).max(rational_height(&self.im))
    }

    pub fn pow(&self, k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = GaussianRational::one();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    pub fn to_xcomplex(&self) -> XComplex {
        XComplex::from_parts(rational_to_xfloat(&self.re), rational_to_xfloat(&self.im))
    }

    fn fmt_rational(q: &BigRational) -> String {
        if q.is_integer() {
            q.numer().to_string()
        } else {
            format!("{}/{}", q.numer(), q.denom())
        }
    }

    /// `["p/q", "r/s"]` pair for JSON.
    pub fn to_strings(&self) -> [String; 2] {
        [Self::fmt_rational(&self.re), Self::fmt_rational(&self.im)]
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: &GaussianRational) -> GaussianRational {
        assert!(!o.is_zero(), "division by zero");
        let den = &o.re * &o.re + &o.im * &o.im;
        GaussianRational::new(
            (&self.re * &o.re + &self.im * &o.im) / &den,
            (&self.im * &o.re - &self.re * &o.im) / &den,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-&self.re, -&self.im)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = Self::fmt_rational(&self.re);
        let im = Self::fmt_rational(&self.im);
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => f.write_str(&re),
            (true, false) => write!(f, "{im}i"),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({re}{im}i)")
                } else {
                    write!(f, "({re}+{im}i)")
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExactPolynomial {
    coeffs: Vec<GaussianRational>,
}

impl ExactPolynomial {
    pub fn new(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ExactPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        ExactPolynomial { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_float(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c.to_xcomplex()).collect())
    }

    pub fn sub(&self, o: &ExactPolynomial) -> ExactPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        ExactPolynomial::new((0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }

    /// Exact `T_{n,λ}`: `c'_k = λ^{n+k} (k+n)!/k! c_{k+n}`.
    pub fn apply_op(&self, n: u64, lambda: &GaussianRational) -> ExactPolynomial {
        let n = n as usize;
        let Some(deg) = self.degree() else {
            return ExactPolynomial::zero();
        };
        if deg < n {
            return ExactPolynomial::zero();
        }
        let mut out = Vec::with_capacity(deg - n + 1);
        let mut lam_pow = lambda.pow(n as u64);
        for k in 0..=deg - n {
            let falling: BigInt = ((k + 1)..=(k + n)).fold(BigInt::one(), |a, i| a * BigInt::from(i));
            let w = GaussianRational::real(BigRational::from_integer(falling));
            out.push(&(&lam_pow * &w) * &self.coeffs[k + n]);
            lam_pow = &lam_pow * lambda;
        }
        ExactPolynomial::new(out)
    }

    /// Parses expressions such as `z`, `1+z`, `z^3/48`, `(1/2-3i)z^2 - 7`.
    pub fn parse(s: &str) -> Result<ExactPolynomial> {
        let mut p = Parser {
            chars: s.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
            src: s,
        };
        let out = p.expression()?;
        if p.pos != p.chars.len() {
            return Err(p.err());
        }
        Ok(out)
    }
}

impl fmt::Display for ExactPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut c = c.clone();
            if !first {
                if c.im.is_zero() && c.re.is_negative() {
                    f.write_str(" - ")?;
                    c = -&c;
                } else {
                    f.write_str(" + ")?;
                }
            }
            first = false;
            let zpart = match k {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{k}"),
            };
            if k == 0 {
                write!(f, "{c}")?;
            } else if c == GaussianRational::one() {
                f.write_str(&zpart)?;
            } else if c.im.is_zero() && c.re.numer().is_one() {
                write!(f, "{zpart}/{}", c.re.denom())?;
            } else {
                write!(f, "{c}*{zpart}")?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self) -> Error {
        Error::Parse(format!("cannot parse polynomial {:?} at offset {}", self.src, self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expression(&mut self) -> Result<ExactPolynomial> {
        let mut acc: Vec<GaussianRational> = Vec::new();
        let mut sign = if self.eat('-') {
            -1
        } else {
            self.eat('+');
            1
        };
        loop {
            let (k, mut c) = self.term()?;
            if sign < 0 {
                c = -&c;
            }
            if acc.len() <= k {
                acc.resize(k + 1, GaussianRational::zero());
            }
            acc[k] = &acc[k] + &c;
            if self.eat('+') {
                sign = 1;
            } else if self.eat('-') {
                sign = -1;
            } else {
                break;
            }
        }
        Ok(ExactPolynomial::new(acc))
    }

    fn number(&mut self) -> Option<String> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            let exp_sign = matches!(c, '+' | '-')
                && self.pos > start
                && matches!(self.chars[self.pos - 1], 'e' | 'E');
            if c.is_ascii_digit() || c == '.' || matches!(c, 'e' | 'E') && self.pos > start || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn integer(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err())
    }

    fn term(&mut self) -> Result<(usize, GaussianRational)> {
        let mut coef: Option<GaussianRational> = None;
        if self.eat('(') {
            let inner = self.expression()?;
            if !self.eat(')') || inner.degree().unwrap_or(0) > 0 {
                return Err(self.err());
            }
            coef = Some(inner.coeff(0));
        } else if let Some(num) = self.number() {
            let mut q = parse_rational(&num)?;
            if self.peek() == Some('/') && self.chars.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
                let d = self.integer()?;
                if d == 0 {
                    return Err(self.err());
                }
                q /= BigRational::from_integer(d.into());
            }
            coef = Some(if self.eat('i') {
                GaussianRational::new(BigRational::zero(), q)
            } else {
                GaussianRational::real(q)
            });
        } else if self.eat('i') {
            coef = Some(GaussianRational::from_ints(0, 1));
        }
        if coef.is_some() {
            self.eat('*');
        }
        let mut power = 0usize;
        let mut has_z = false;
        if self.eat('z') {
            has_z = true;
            power = 1;
            if self.eat('^') {
                power = self.integer()? as usize;
            }
        }
        if coef.is_none() && !has_z {
            return Err(self.err());
        }
        let mut c = coef.unwrap_or_else(GaussianRational::one);
        if has_z && self.eat('/') {
            let d = self.integer()?;
            if d == 0 {
                return Err(self.err());
            }
            c = &c / &GaussianRational::from_ints(d as i64, 0);
        }
        Ok((power, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn parse_forms() {
        let p = ExactPolynomial::parse("z^3/48").unwrap();
        assert_eq!(p.coeff(3), GaussianRational::real(q(1, 48)));
        let p = ExactPolynomial::parse("1 + z").unwrap();
        assert_eq!(p.degree(), Some(1));
        let p = ExactPolynomial::parse("(1/2-3i)z^2 - 7").unwrap();
        assert_eq!(p.coeff(2), GaussianRational::new(q(1, 2), q(-3, 1)));
        assert_eq!(p.coeff(0), GaussianRational::real(q(-7, 1)));
        let p = ExactPolynomial::parse("1e-6").unwrap();
        assert_eq!(p.coeff(0), GaussianRational::real(q(1, 1_000_000)));
        assert!(ExactPolynomial::parse("z^").is_err());
        assert!(ExactPolynomial::parse("").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["z^3/48", "1 + z", "(1/2-3i)*z^2 - 7", "2i", "-z"] {
            let p = ExactPolynomial::parse(s).unwrap();
            let back = ExactPolynomial::parse(&p.to_string()).unwrap();
            assert_eq!(p, back, "{s} -> {p}");
        }
    }

    #[test]
    fn exact_operator() {
        let f = ExactPolynomial::parse("z^3/48").unwrap();
        let g = f.apply_op(2, &GaussianRational::from_ints(2, 0));
        assert_eq!(g, ExactPolynomial::parse("z").unwrap());
    }

    #[test]
    fn heights() {
        assert_eq!(rational_height(&q(0, 1)), BigInt::from(1));
        assert_eq!(rational_height(&q(-3, 2)), BigInt::from(3));
        assert_eq!(rational_height(&q(1, 5)), BigInt::from(5));
    }

    #[test]
    fn huge_rational_to_float() {
        let big = num_traits::pow(BigInt::from(10u32), 400);
        let x = rational_to_xfloat(&BigRational::new(BigInt::one(), big));
        assert!((x.ln() + 400.0 * 10f64.ln()).abs() < 1e-9);
    }
}
