//! Logarithmic factorials and factorial ratios.

use num_bigint::BigInt;
use statrs::function::factorial::ln_factorial as statrs_ln_factorial;

use super::xnum::XFloat;

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    statrs_ln_factorial(n)
}

/// `ln(a! / b!)`. Short ranges are summed directly, long ones go through
/// log-gamma.
pub fn ln_fact_ratio(a: u64, b: u64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, -1.0) } else { (b, a, 1.0) };
    if hi - lo <= 24 {
        let mut prod = 1.0f64;
        for i in lo + 1..=hi {
            prod *= i as f64;
        }
        sign * prod.ln()
    } else {
        sign * (ln_factorial(hi) - ln_factorial(lo))
    }
}

/// `a! / b!` as an extended-range value.
pub fn fact_ratio(a: u64, b: u64) -> XFloat {
    XFloat::from_ln(ln_fact_ratio(a, b))
}

pub fn big_factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::from(1u32), |acc, i| acc * BigInt::from(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values_exact_enough() {
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        assert!((fact_ratio(2, 5).to_f64() - 2.0 / 120.0).abs() < 1e-16);
        assert_eq!(ln_fact_ratio(7, 7), 0.0);
    }

    #[test]
    fn long_ratio_matches_direct_sum() {
        let direct: f64 = (1001..=1100u64).map(|i| (i as f64).ln()).sum();
        let r = ln_fact_ratio(1100, 1000);
        assert!(((r - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn big_factorial_small() {
        assert_eq!(big_factorial(10), BigInt::from(3_628_800u32));
    }
}
