//! Parsing of rotation numbers: `sqrt(D)-a/b`, `(sqrt(D)-a)/b`, `sqrt(D)+a`,
//! rationals `a/b` and decimal strings.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::poly_core::exact::parse_rational;
use crate::poly_core::Dd;

fn rational_to_dd(q: &BigRational) -> Result<Dd> {
    let hi = q.to_f64().filter(|x| x.is_finite()).ok_or_else(|| Error::Parse("rational out of range".into()))?;
    let rest = q - BigRational::from_float(hi).expect("finite");
    Ok(Dd::new(hi, rest.to_f64().unwrap_or(0.0)))
}

fn parse_int(s: &str) -> Result<i64> {
    s.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad integer `{s}`")))
}

fn parse_sqrt(s: &str) -> Result<Option<(Dd, &str)>> {
    let s = s.trim_start();
    let Some(rest) = s.strip_prefix("sqrt(") else {
        return Ok(None);
    };
    let close = rest.find(')').ok_or_else(|| Error::Parse("unclosed sqrt(".into()))?;
    let d: u64 = rest[..close]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad radicand `{}`", &rest[..close])))?;
    if d >= 1 << 52 {
        return Err(Error::Parse("radicand too large".into()));
    }
    Ok(Some((Dd::sqrt_int(d), &rest[close + 1..])))
}

/// `sqrt(D) ± q` where `q` is a rational (may be empty).
fn parse_surd(s: &str) -> Result<Option<Dd>> {
    let Some((root, rest)) = parse_sqrt(s)? else {
        return Ok(None);
    };
    let rest = rest.trim();
    if rest.is_empty() {
        return Ok(Some(root));
    }
    let (sign, q) = if let Some(q) = rest.strip_prefix('-') {
        (-1, q)
    } else if let Some(q) = rest.strip_prefix('+') {
        (1, q)
    } else {
        return Err(Error::Parse(format!("unexpected `{rest}` after sqrt")));
    };
    let q = rational_to_dd(&parse_rational(q.trim())?)?;
    Ok(Some(if sign < 0 { root - q } else { root + q }))
}

/// Parses a rotation number. The value is not reduced mod 1.
pub fn parse_theta(s: &str) -> Result<Dd> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix('(') {
        let close = inner.rfind(')').ok_or_else(|| Error::Parse(format!("unbalanced `{s}`")))?;
        let num = parse_surd(&inner[..close])?
            .map(Ok)
            .unwrap_or_else(|| rational_to_dd(&parse_rational(inner[..close].trim())?))?;
        let tail = inner[close + 1..].trim();
        if tail.is_empty() {
            return Ok(num);
        }
        let den = tail
            .strip_prefix('/')
            .ok_or_else(|| Error::Parse(format!("expected `/` in `{s}`")))?;
        let b = parse_int(den)?;
        if b == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        return Ok(num.div_f64(b as f64));
    }
    if let Some(v) = parse_surd(t)? {
        return Ok(v);
    }
    rational_to_dd(&parse_rational(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        let golden = parse_theta("(sqrt(5)-1)/2").unwrap();
        assert!((golden.to_f64() - 0.618_033_988_749_894_9).abs() < 1e-16);
        let g2 = parse_theta("sqrt(5)-2").unwrap();
        assert!((g2.to_f64() - 0.236_067_977_499_789_7).abs() < 1e-16);
        let r2 = parse_theta("sqrt(2)-1").unwrap();
        assert!((r2.to_f64() - (2f64.sqrt() - 1.0)).abs() < 3e-16);
        assert_eq!(parse_theta("0.5").unwrap().to_f64(), 0.5);
        assert_eq!(parse_theta("1/3").unwrap().to_f64(), 1.0 / 3.0);
        assert!(parse_theta("sqrt(x)").is_err());
        assert!(parse_theta("(sqrt(5)-1)/0").is_err());
    }

    #[test]
    fn double_double_accuracy() {
        // {k (sqrt(2)-1)} for k = 10^9, checked against an exact integer square root
        let th = parse_theta("sqrt(2)-1").unwrap();
        let k: u64 = 1_000_000_000;
        // floor(k sqrt 2 * 10^12) via isqrt of 2 k^2 10^24
        let big = num_bigint::BigUint::from(2u32) * num_bigint::BigUint::from(k).pow(2) * num_bigint::BigUint::from(10u32).pow(24);
        let s = big.sqrt();
        let scale = num_bigint::BigUint::from(10u32).pow(12);
        let frac = (&s % &scale).to_f64().unwrap() / 1e12;
        assert!((th.frac_mul(k) - frac).abs() < 1e-11);
    }
}
