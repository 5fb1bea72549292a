//! The coverage condition `Σ_{n=1}^{N0+1} δ0/μ_n > ρ0 - 1/ρ0` and its
//! extrapolation when the budget runs out.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use statrs::function::gamma::digamma;

use super::spec::SequenceSpec;
use super::subsequence::SubsequenceSpec;
use crate::error::{BudgetReport, Error, Extrapolation, Result};

/// Terms beyond which the exact tie-break is skipped.
const EXACT_CHECK_LIMIT: usize = 20_000;

pub fn required_coverage(rho0: f64) -> f64 {
    rho0 - 1.0 / rho0
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Exact comparison `δ0 Σ_{j<=n} 1/μ_j` against `ρ0 - 1/ρ0`.
pub(crate) fn exact_cmp(terms: &[u64], delta0: f64, rho0: f64) -> std::cmp::Ordering {
    let s = terms
        .iter()
        .fold(BigRational::zero(), |acc, &t| acc + BigRational::new(BigInt::one(), BigInt::from(t)));
    let r = exact(rho0);
    let need = &r - BigRational::one() / &r;
    (exact(delta0) * s).cmp(&need)
}

/// Whether the first `n` terms already cover, with an exact tie-break
/// when the floating sum is within `1e-12` of the requirement.
pub(crate) fn covers(sub: &mut SubsequenceSpec, n: usize, delta0: f64, rho0: f64) -> Result<bool> {
    let need = required_coverage(rho0);
    let s = delta0 * sub.prefix_sum(n)?;
    if (s - need).abs() <= 1e-12 * need && n <= EXACT_CHECK_LIMIT {
        return Ok(exact_cmp(&sub.terms()[..n], delta0, rho0).is_gt());
    }
    Ok(s > need)
}

/// Estimated `log10 N` for an arithmetic subsequence `μ_n = μ1 + s(n-1)`,
/// from `Σ_{n<N} 1/(μ1 + s n) = (ψ(x+N) - ψ(x))/s`, `x = μ1/s`.
pub fn affine_log10_n0(mu1: u64, s: u64, delta0: f64, rho0: f64) -> f64 {
    affine_log10_terms(mu1 as f64, s as f64, delta0, required_coverage(rho0))
}

/// `log10` of the number of terms `c/(μ1 + s n)`, `n = 0, 1, ...`, needed
/// for the sum to exceed `need`.
pub fn affine_log10_terms(mu1: f64, s: f64, c: f64, need: f64) -> f64 {
    let x = mu1 / s;
    let t = need * s / c + digamma(x);
    if t > 40.0 {
        // ψ(y) = ln y - 1/(2y) + ..., so y ≈ e^T and x is negligible
        return t / std::f64::consts::LN_10;
    }
    let (mut lo, mut hi) = (x, x + 1.0);
    while digamma(hi) <= t {
        hi = x + 2.0 * (hi - x);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if digamma(mid) > t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi - x).ceil().max(1.0).log10()
}

/// Supremum bound `δ0 (Σ_{n<=K} 1/μ_n + K^{1-c}/(c-1))` for power bases.
pub fn power_supremum(partial_recip: f64, k: u64, c: u32, delta0: f64) -> f64 {
    debug_assert!(c >= 2);
    let tail = (k as f64).powf(1.0 - c as f64) / (c as f64 - 1.0);
    delta0 * (partial_recip + tail)
}

pub fn extrapolate(sub: &mut SubsequenceSpec, delta0: f64, rho0: f64, k: usize) -> Result<Extrapolation> {
    if let Some(step) = sub.affine_step() {
        let mu1 = sub.term(1)?;
        return Ok(Extrapolation::DivergesEventually {
            log10_n0: affine_log10_n0(mu1, step, delta0, rho0),
        });
    }
    match sub.base() {
        SequenceSpec::Power { c } if *c >= 2 => {
            let c = *c;
            let partial = sub.prefix_sum(k)?;
            Ok(Extrapolation::BoundedAbove {
                supremum: power_supremum(partial, k as u64, c, delta0),
            })
        }
        _ => Ok(Extrapolation::Unknown),
    }
}

/// Minimal `N0` with `Σ_{n=1}^{N0+1} δ0/μ_n > ρ0 - 1/ρ0`, looking at no
/// more than `cap + 1` terms.
pub fn coverage_n0(sub: &mut SubsequenceSpec, delta0: f64, rho0: f64, cap: u64) -> Result<u64> {
    if !(delta0 > 0.0) || !(rho0 > 1.0) || cap < 1 {
        return Err(Error::invalid("coverage needs delta0 > 0, rho0 > 1, cap >= 1"));
    }
    let need = required_coverage(rho0);
    let limit = cap as usize + 1;
    let mut reached = 0usize;
    for n in 1..=limit {
        match sub.ensure(n) {
            Ok(()) => {}
            Err(Error::SequenceExhausted(_)) => break,
            Err(e) => return Err(e),
        }
        reached = n;
        if covers(sub, n, delta0, rho0)? {
            return Ok(n as u64 - 1);
        }
    }
    let achieved = if reached > 0 { delta0 * sub.prefix_sum(reached)? } else { 0.0 };
    let extrapolation = if reached > 0 {
        extrapolate(sub, delta0, rho0, reached)?
    } else {
        Extrapolation::Unknown
    };
    Err(Error::BudgetExceeded(Box::new(BudgetReport {
        what: "coverage sum of delta0/mu_n".into(),
        required: need,
        achieved,
        terms: reached as u64,
        extrapolation,
    })))
}
