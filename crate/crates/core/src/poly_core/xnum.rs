//! Extended-range scalars.
//!
//! Coefficients of solution blocks carry factors like `j!/(j+m)!` and
//! `lambda^(j+m)` that leave the `f64` exponent range long before the
//! degrees used by the stage constructor. Both types below keep an `f64`
//! mantissa together with a separate `i64` binary exponent, so the dynamic
//! range is effectively unbounded while the relative precision stays at
//! `f64` level.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const LN_2_HI: f64 = std::f64::consts::LN_2;
const LN_2_LO: f64 = 2.3190468138462996e-17;
const LOG10_2_HI: f64 = std::f64::consts::LOG10_2;
const LOG10_2_LO: f64 = -2.8037281277851704e-18;
const LOG2_10_HI: f64 = std::f64::consts::LOG2_10;
const LOG2_10_LO: f64 = 1.661617516973592e-16;

/// Exponent gap beyond which the smaller addend cannot affect the sum.
const ALIGN_LIMIT: i64 = 1100;

#[inline]
fn ldexp(x: f64, e: i64) -> f64 {
    libm::ldexp(x, e.clamp(-2200, 2200) as i32)
}

/// Exact product `a*b = p + err` (both parts returned).
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `e * c` where `c = hi + lo` is a double-double constant; returns the
/// integer part and the fractional remainder of the product.
fn split_scaled(e: f64, hi: f64, lo: f64) -> (f64, f64) {
    let (p, err) = two_prod(e, hi);
    let whole = p.floor();
    let frac = (p - whole) + err + e * lo;
    let adj = frac.floor();
    (whole + adj, frac - adj)
}

/// Non-negative or signed real with an unbounded binary exponent.
///
/// Invariant: `mant == 0` (and then `exp == 0`) or `0.5 <= |mant| < 1`.
#[derive(Clone, Copy, Debug)]
pub struct XFloat {
    mant: f64,
    exp: i64,
}

impl XFloat {
    pub const ZERO: XFloat = XFloat { mant: 0.0, exp: 0 };
    pub const ONE: XFloat = XFloat { mant: 0.5, exp: 1 };

    fn normalize(mant: f64, exp: i64) -> XFloat {
        debug_assert!(mant.is_finite(), "non-finite mantissa {mant}");
        if mant == 0.0 || !mant.is_finite() {
            return XFloat::ZERO;
        }
        let (m, k) = libm::frexp(mant);
        XFloat {
            mant: m,
            exp: exp + k as i64,
        }
    }

    pub fn from_f64(x: f64) -> XFloat {
        assert!(x.is_finite(), "XFloat::from_f64 requires a finite value");
        XFloat::normalize(x, 0)
    }

    /// `e^l`, for any finite `l` (or zero when `l == -inf`).
    pub fn from_ln(l: f64) -> XFloat {
        if l == f64::NEG_INFINITY {
            return XFloat::ZERO;
        }
        assert!(l.is_finite(), "XFloat::from_ln requires a finite log");
        let e = (l / LN_2_HI).floor();
        let r = (-e).mul_add(LN_2_HI, l) - e * LN_2_LO;
        XFloat::normalize(r.exp(), e as i64)
    }

    /// `2^x` for real `x`.
    pub fn exp2(x: f64) -> XFloat {
        let e = x.floor();
        XFloat::normalize((x - e).exp2(), e as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0.0
    }

    pub fn is_sign_negative(&self) -> bool {
        self.mant < 0.0
    }

    pub fn abs(self) -> XFloat {
        XFloat {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (mut m, mut e) = (self.mant.abs(), self.exp);
        if m < std::f64::consts::FRAC_1_SQRT_2 {
            m *= 2.0;
            e -= 1;
        }
        let ef = e as f64;
        m.ln() + ef.mul_add(LN_2_HI, ef * LN_2_LO)
    }

    /// Conversion to `f64`; saturates to `±inf` or flushes to zero.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.exp > 1100 {
            return f64::INFINITY.copysign(self.mant);
        }
        if self.exp < -1200 {
            return 0.0;
        }
        ldexp(self.mant, self.exp)
    }

    /// Conversion to `f64` that never rounds a positive value down to zero
    /// and scales by `1 + slack`; used wherever a bound must stay an upper bound.
    pub fn to_f64_upper(&self, slack: f64) -> f64 {
        let v = self.to_f64();
        if v > 0.0 {
            (v * (1.0 + slack)).max(f64::MIN_POSITIVE)
        } else if self.mant > 0.0 {
            f64::MIN_POSITIVE
        } else {
            v
        }
    }

    pub fn powf(self, p: f64) -> XFloat {
        assert!(!self.is_sign_negative(), "powf of a negative XFloat");
        if self.is_zero() {
            return if p == 0.0 { XFloat::ONE } else { XFloat::ZERO };
        }
        XFloat::from_ln(self.ln() * p)
    }

    /// Integer power by repeated squaring; exact for exact powers of two.
    pub fn powi(self, mut k: u64) -> XFloat {
        let mut base = self;
        let mut acc = XFloat::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn max(self, other: XFloat) -> XFloat {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Decimal string, shortest round-trip when the value fits `f64`.
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        if self.exp.abs() < 1000 {
            return format!("{:?}", self.to_f64());
        }
        let (int_part, frac) = split_scaled(self.exp as f64, LOG10_2_HI, LOG10_2_LO);
        let mut total_frac = frac + self.mant.abs().log10();
        let mut dec_exp = int_part;
        let adj = total_frac.floor();
        total_frac -= adj;
        dec_exp += adj;
        let m10 = 10f64.powf(total_frac);
        let sign = if self.mant < 0.0 { "-" } else { "" };
        format!("{sign}{m10:.17}e{}", dec_exp as i64)
    }

    pub fn from_decimal_str(s: &str) -> Result<XFloat> {
        let t = s.trim();
        let bad = || Error::Parse(format!("invalid decimal number {s:?}"));
        let (mant_str, exp10) = match t.find(['e', 'E']) {
            Some(pos) => (
                &t[..pos],
                t[pos + 1..].parse::<i64>().map_err(|_| bad())?,
            ),
            None => (t, 0),
        };
        let m: f64 = mant_str.parse().map_err(|_| bad())?;
        if !m.is_finite() {
            return Err(bad());
        }
        if m == 0.0 {
            return Ok(XFloat::ZERO);
        }
        if exp10.abs() < 280 {
            let direct: f64 = t.parse().map_err(|_| bad())?;
            if direct.is_finite() && direct != 0.0 && direct.abs() >= f64::MIN_POSITIVE {
                return Ok(XFloat::from_f64(direct));
            }
        }
        let (int_part, frac) = split_scaled(exp10 as f64, LOG2_10_HI, LOG2_10_LO);
        let scale = XFloat::normalize(frac.exp2(), int_part as i64);
        Ok(XFloat::from_f64(m) * scale)
    }
}

impl Default for XFloat {
    fn default() -> Self {
        XFloat::ZERO
    }
}

impl From<f64> for XFloat {
    fn from(x: f64) -> Self {
        XFloat::from_f64(x)
    }
}

impl Add for XFloat {
    type Output = XFloat;
    fn add(self, rhs: XFloat) -> XFloat {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = big.exp - small.exp;
        if shift > ALIGN_LIMIT {
            return big;
        }
        XFloat::normalize(big.mant + ldexp(small.mant, -shift), big.exp)
    }
}

impl Sub for XFloat {
    type Output = XFloat;
    fn sub(self, rhs: XFloat) -> XFloat {
        self + (-rhs)
    }
}

impl Neg for XFloat {
    type Output = XFloat;
    fn neg(self) -> XFloat {
        XFloat {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

impl Mul for XFloat {
    type Output = XFloat;
    fn mul(self, rhs: XFloat) -> XFloat {
        if self.is_zero() || rhs.is_zero() {
            return XFloat::ZERO;
        }
        XFloat::normalize(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for XFloat {
    type Output = XFloat;
    fn div(self, rhs: XFloat) -> XFloat {
        assert!(!rhs.is_zero(), "XFloat division by zero");
        if self.is_zero() {
            return XFloat::ZERO;
        }
        XFloat::normalize(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl std::iter::Sum for XFloat {
    fn sum<I: Iterator<Item = XFloat>>(iter: I) -> XFloat {
        iter.fold(XFloat::ZERO, |a, b| a + b)
    }
}

impl PartialEq for XFloat {
    fn eq(&self, other: &Self) -> bool {
        self.mant == other.mant && (self.is_zero() || self.exp == other.exp)
    }
}

impl PartialOrd for XFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let sa = self.mant.partial_cmp(&0.0)?;
        let sb = other.mant.partial_cmp(&0.0)?;
        if sa != sb || sa == Ordering::Equal {
            return Some(sa.cmp(&sb));
        }
        let mag = self
            .exp
            .cmp(&other.exp)
            .then(self.mant.abs().partial_cmp(&other.mant.abs())?);
        Some(if sa == Ordering::Less {
            mag.reverse()
        } else {
            mag
        })
    }
}

impl fmt::Display for XFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

/// Complex number `(re + i im) * 2^exp` with `max(|re|, |im|)` in `[0.5, 1)`.
#[derive(Clone, Copy, Debug)]
pub struct XComplex {
    re: f64,
    im: f64,
    exp: i64,
}

impl XComplex {
    pub const ZERO: XComplex = XComplex {
        re: 0.0,
        im: 0.0,
        exp: 0,
    };
    pub const ONE: XComplex = XComplex {
        re: 0.5,
        im: 0.0,
        exp: 1,
    };

    fn normalize(re: f64, im: f64, exp: i64) -> XComplex {
        debug_assert!(re.is_finite() && im.is_finite());
        let s = re.abs().max(im.abs());
        if s == 0.0 || !s.is_finite() {
            return XComplex::ZERO;
        }
        let (_, k) = libm::frexp(s);
        XComplex {
            re: ldexp(re, -(k as i64)),
            im: ldexp(im, -(k as i64)),
            exp: exp + k as i64,
        }
    }

    pub fn new(re: f64, im: f64) -> XComplex {
        assert!(re.is_finite() && im.is_finite(), "non-finite XComplex");
        XComplex::normalize(re, im, 0)
    }

    pub fn from_real(x: XFloat) -> XComplex {
        XComplex::normalize(x.mant, 0.0, x.exp)
    }

    pub fn from_parts(re: XFloat, im: XFloat) -> XComplex {
        XComplex::from_real(re) + XComplex::from_real(im) * XComplex::new(0.0, 1.0)
    }

    /// `e^(ln_mag) * e^(2 pi i turns)`.
    pub fn from_polar_ln(ln_mag: f64, turns: f64) -> XComplex {
        if ln_mag == f64::NEG_INFINITY {
            return XComplex::ZERO;
        }
        let r = XFloat::from_ln(ln_mag);
        let t = turns - turns.round();
        let (s, c) = (std::f64::consts::TAU * t).sin_cos();
        XComplex::normalize(r.mant * c, r.mant * s, r.exp)
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    pub fn re(&self) -> XFloat {
        XFloat::normalize(self.re, self.exp)
    }

    pub fn im(&self) -> XFloat {
        XFloat::normalize(self.im, self.exp)
    }

    pub fn norm(&self) -> XFloat {
        XFloat::normalize(self.re.hypot(self.im), self.exp)
    }

    pub fn ln_abs(&self) -> f64 {
        self.norm().ln()
    }

    /// Argument in turns, in `(-0.5, 0.5]`.
    pub fn arg_turns(&self) -> f64 {
        self.im.atan2(self.re) / std::f64::consts::TAU
    }

    pub fn conj(self) -> XComplex {
        XComplex {
            re: self.re,
            im: -self.im,
            exp: self.exp,
        }
    }

    pub fn scale(self, k: XFloat) -> XComplex {
        if k.is_zero() || self.is_zero() {
            return XComplex::ZERO;
        }
        XComplex::normalize(self.re * k.mant, self.im * k.mant, self.exp + k.exp)
    }

    pub fn inv(self) -> XComplex {
        XComplex::ONE / self
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(ldexp(self.re, self.exp), ldexp(self.im, self.exp))
    }

    /// Whether `|self - other| <= rel * max(|self|, |other|)`.
    pub fn approx_eq(&self, other: &XComplex, rel: f64) -> bool {
        let d = (*self - *other).norm();
        let s = self.norm().max(other.norm());
        if s.is_zero() {
            return d.is_zero();
        }
        d <= s * XFloat::from_f64(rel)
    }
}

impl Default for XComplex {
    fn default() -> Self {
        XComplex::ZERO
    }
}

impl From<Complex64> for XComplex {
    fn from(c: Complex64) -> Self {
        XComplex::new(c.re, c.im)
    }
}

impl From<f64> for XComplex {
    fn from(x: f64) -> Self {
        XComplex::new(x, 0.0)
    }
}

impl Add for XComplex {
    type Output = XComplex;
    fn add(self, rhs: XComplex) -> XComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = big.exp - small.exp;
        if shift > ALIGN_LIMIT {
            return big;
        }
        XComplex::normalize(
            big.re + ldexp(small.re, -shift),
            big.im + ldexp(small.im, -shift),
            big.exp,
        )
    }
}

impl Sub for XComplex {
    type Output = XComplex;
    fn sub(self, rhs: XComplex) -> XComplex {
        self + (-rhs)
    }
}

impl Neg for XComplex {
    type Output = XComplex;
    fn neg(self) -> XComplex {
        XComplex {
            re: -self.re,
            im: -self.im,
            exp: self.exp,
        }
    }
}

impl Mul for XComplex {
    type Output = XComplex;
    fn mul(self, rhs: XComplex) -> XComplex {
        if self.is_zero() || rhs.is_zero() {
            return XComplex::ZERO;
        }
        XComplex::normalize(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
            self.exp + rhs.exp,
        )
    }
}

impl Div for XComplex {
    type Output = XComplex;
    fn div(self, rhs: XComplex) -> XComplex {
        assert!(!rhs.is_zero(), "XComplex division by zero");
        if self.is_zero() {
            return XComplex::ZERO;
        }
        let q = Complex64::new(self.re, self.im) / Complex64::new(rhs.re, rhs.im);
        XComplex::normalize(q.re, q.im, self.exp - rhs.exp)
    }
}

impl std::iter::Sum for XComplex {
    fn sum<I: Iterator<Item = XComplex>>(iter: I) -> XComplex {
        iter.fold(XComplex::ZERO, |a, b| a + b)
    }
}

impl PartialEq for XComplex {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im && (self.is_zero() || self.exp == other.exp)
    }
}

impl fmt::Display for XComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re(), self.im())
    }
}
