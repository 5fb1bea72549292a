//! Double-double reals, used for phases in turns where `k * theta mod 1`
//! must stay accurate for `k` up to about 10^9.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Neg, Sub};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Dd {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// `num / den` correctly rounded to about 106 bits.
    pub fn from_ratio(num: i64, den: i64) -> Dd {
        assert!(den != 0, "zero denominator");
        let q = num as f64 / den as f64;
        // num - q*den, exact while |num| and |den| stay below 2^53
        let r = (-q).mul_add(den as f64, num as f64);
        Dd::new(q, r / den as f64)
    }

    /// Square root of a non-negative integer.
    pub fn sqrt_int(d: u64) -> Dd {
        let x = d as f64;
        let s = x.sqrt();
        if s == 0.0 {
            return Dd::ZERO;
        }
        let r = (-s).mul_add(s, x);
        Dd::new(s, r / (2.0 * s))
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        Dd::new(p, e + self.lo * b)
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self - Dd::from_f64(q1).mul_f64(b);
        let q2 = r.hi / b;
        Dd::new(q1, q2)
    }

    pub fn floor(self) -> Dd {
        let fh = self.hi.floor();
        if fh == self.hi {
            Dd::new(fh, self.lo.floor())
        } else {
            Dd { hi: fh, lo: 0.0 }
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn frac(self) -> Dd {
        let f = self - self.floor();
        if f.hi >= 1.0 {
            f - Dd::from_f64(1.0)
        } else if f.hi < 0.0 {
            f + Dd::from_f64(1.0)
        } else {
            f
        }
    }

    /// `{k * self}` as a plain `f64` in `[0, 1)`.
    pub fn frac_mul(self, k: u64) -> f64 {
        let kf = k as f64;
        debug_assert!(k < (1u64 << 53), "multiplier too large for exact conversion");
        let p = self.hi * kf;
        let e = self.hi.mul_add(kf, -p);
        let whole = p.floor();
        let v = Dd::new(p - whole, e + self.lo * kf).frac();
        let x = v.to_f64();
        if x >= 1.0 {
            0.0
        } else {
            x
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (s, e) = quick_two_sum(s, e + f);
        Dd { hi: s, lo: e }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two_residual() {
        let s = Dd::sqrt_int(2);
        // (hi + lo)^2 - 2 should vanish to ~1e-31
        let sq_hi = s.hi * s.hi;
        let err = s.hi.mul_add(s.hi, -sq_hi);
        let resid = (sq_hi - 2.0) + err + 2.0 * s.hi * s.lo;
        assert!(resid.abs() < 1e-30, "{resid}");
    }

    #[test]
    fn frac_mul_large_multiplier() {
        // theta = 1/3 exactly as a double-double up to 1e-32
        let t = Dd::from_ratio(1, 3);
        let k = 3_000_000_001u64;
        let f = t.frac_mul(k);
        assert!((f - 1.0 / 3.0).abs() < 1e-12, "{f}");
    }

    #[test]
    fn frac_stays_in_unit_interval() {
        let x = Dd::new(-2.25, 1e-20);
        let f = x.frac();
        assert!(f.hi >= 0.0 && f.hi < 1.0);
        assert!((f.to_f64() - 0.75).abs() < 1e-15);
    }
}
