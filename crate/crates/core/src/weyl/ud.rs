//! Uniform distribution mod 1: counting function, star discrepancy and an
//! empirical test for `(θ a_n)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly_core::Dd;
use crate::sequences::SequenceSpec;

/// Number of `n <= N` with `{ω_n} ∈ [a, b)`.
pub fn counting(a: f64, b: f64, n: usize, omega: &[f64]) -> Result<u64> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::invalid(format!("need 0 <= a < b <= 1, got [{a}, {b})")));
    }
    if n < 1 || n > omega.len() {
        return Err(Error::invalid(format!("N = {n} outside 1..={}", omega.len())));
    }
    Ok(omega[..n]
        .iter()
        .map(|x| x - x.floor())
        .filter(|&f| a <= f && f < b)
        .count() as u64)
}

/// `D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N)` over the sorted parts.
pub fn discrepancy(parts: &[f64]) -> f64 {
    assert!(!parts.is_empty(), "discrepancy needs N >= 1");
    let mut x: Vec<f64> = parts.iter().map(|v| v - v.floor()).collect();
    x.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let i = i as f64 + 1.0;
            (i / n - xi).max(xi - (i - 1.0) / n)
        })
        .fold(0.0, f64::max)
}

/// `{θ a_n}` for `n = 1..=N`.
pub fn fractional_parts(theta: Dd, seq: &SequenceSpec, n: usize) -> Result<Vec<f64>> {
    let terms: Vec<u64> = seq.iter().take(n).collect();
    if terms.len() < n {
        return Err(Error::SequenceExhausted(terms.len()));
    }
    if terms.iter().any(|&k| k >= 1 << 53) {
        return Err(Error::invalid("sequence terms exceed 2^53"));
    }
    Ok(terms.par_iter().map(|&k| theta.frac_mul(k)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdReport {
    pub theta: String,
    pub theta_value: f64,
    pub sequence: String,
    pub n: usize,
    pub bins: usize,
    pub tol: f64,
    pub bin_counts: Vec<u64>,
    pub max_bin_deviation: f64,
    pub star_discrepancy: f64,
    pub pass: bool,
}

pub fn ud_test(theta_label: &str, theta: Dd, seq: &SequenceSpec, n: usize, bins: usize, tol: f64) -> Result<UdReport> {
    if bins < 2 || n < bins {
        return Err(Error::invalid(format!("need N >= bins >= 2, got N = {n}, bins = {bins}")));
    }
    let parts = fractional_parts(theta, seq, n)?;
    let bin_counts = parts
        .par_chunks(8192)
        .map(|chunk| {
            let mut c = vec![0u64; bins];
            for &x in chunk {
                c[((x * bins as f64) as usize).min(bins - 1)] += 1;
            }
            c
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let expect = 1.0 / bins as f64;
    let max_bin_deviation = bin_counts
        .iter()
        .map(|&c| (c as f64 / n as f64 - expect).abs())
        .fold(0.0, f64::max);
    let star_discrepancy = discrepancy(&parts);
    Ok(UdReport {
        theta: theta_label.to_string(),
        theta_value: theta.frac().to_f64(),
        sequence: seq.to_string(),
        n,
        bins,
        tol,
        bin_counts,
        max_bin_deviation,
        star_discrepancy,
        pass: max_bin_deviation < tol,
    })
}
