//! Error bounds for `‖T_{m_i,λ}(Π) - p‖` on `D̄_R`.
//!
//! Blocks before `i` have degree below `m_i` and `deg Q < m_1`, so they are
//! annihilated. The remaining error is the block's own deviation from `p`
//! plus the images of the later blocks (the tail).

use serde::{Deserialize, Serialize};

use super::pi::PiFunction;
use crate::error::{Error, Result};
use crate::poly_core::factorial::ln_factorial;
use crate::poly_core::{Dilation, Polynomial, XFloat};

pub const DEFAULT_TAIL_BLOCKS: usize = 8;

/// `1 / 2^{gap - 2}`.
pub fn analytic_tail(gap: u64) -> XFloat {
    XFloat::exp2(2.0 - gap as f64)
}

fn check_tail_precondition(pi: &PiFunction, i0: usize, lambda_abs: f64) -> Result<()> {
    if i0 >= pi.len() {
        return Err(Error::Precondition(format!("cell index {i0} out of range")));
    }
    let lim = pi.suffix_min_anchor(i0 + 1);
    if lambda_abs > lim {
        return Err(Error::Precondition(format!(
            "|lambda| = {lambda_abs} exceeds a later anchor {lim}"
        )));
    }
    Ok(())
}

/// `1/2^{m_{i0+1} - m_{i0} - 2}`, or zero for the last block.
pub fn tail_bound(pi: &PiFunction, i0: usize, lambda: &Dilation) -> Result<XFloat> {
    check_tail_precondition(pi, i0, lambda.modulus)?;
    let b = pi.blocks();
    if i0 + 1 >= b.len() {
        return Ok(XFloat::ZERO);
    }
    Ok(analytic_tail(b[i0 + 1].m0 - b[i0].m0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridTail {
    pub exact: XFloat,
    pub analytic: XFloat,
    pub blocks_summed: usize,
}

impl HybridTail {
    pub fn total(&self) -> XFloat {
        self.exact + self.analytic
    }
}

/// Exact upper norms of the next `nb` tail blocks plus the analytic bound
/// `2^{1 - (m_J - m_{i0})}` for the blocks `J = i0+nb+1, ...`.
pub fn hybrid_tail(pi: &PiFunction, i0: usize, lambda_abs: f64, nb: usize) -> Result<HybridTail> {
    check_tail_precondition(pi, i0, lambda_abs)?;
    let b = pi.blocks();
    let mu = b[i0].m0;
    let r = pi.r0();
    let last = (i0 + nb).min(b.len() - 1);
    let exact = b[i0 + 1..=last]
        .iter()
        .map(|blk| blk.image_upper_norm(mu, lambda_abs, r))
        .sum();
    let analytic = if last + 1 < b.len() {
        XFloat::exp2(1.0 - (b[last + 1].m0 - mu) as f64)
    } else {
        XFloat::ZERO
    };
    Ok(HybridTail {
        exact,
        analytic,
        blocks_summed: last - i0,
    })
}

/// Exact `Σ_{j > i0} ‖T_{m_{i0},λ}(f_j)‖` over every later block.
pub fn measured_tail(pi: &PiFunction, i0: usize, lambda_abs: f64, r: f64) -> XFloat {
    let b = pi.blocks();
    let mu = b[i0].m0;
    b[i0 + 1..]
        .iter()
        .map(|blk| blk.image_upper_norm(mu, lambda_abs, r))
        .sum()
}

/// `‖T_{m_i,λ}(f_i) - p‖` on `D̄_r`.
pub fn own_error(pi: &PiFunction, i: usize, lambda: &Dilation, p: &Polynomial, r: f64) -> XFloat {
    let blk = &pi.blocks()[i];
    if *p == blk.target {
        blk.anchor_deviation(lambda, r)
    } else {
        blk.image_sparse(blk.m0, lambda).sub(&p.to_sparse()).upper_norm(r)
    }
}

/// Local perturbation plus analytic tail. Requires
/// `λ0_i <= |λ| <= λ0_j` for every later block `j`.
pub fn pi_error_bound(pi: &PiFunction, i: usize, lambda: &Dilation, p: &Polynomial) -> Result<XFloat> {
    if i >= pi.len() {
        return Err(Error::Precondition(format!("cell index {i} out of range")));
    }
    let anchor = pi.blocks()[i].lambda0;
    if lambda.modulus < anchor {
        return Err(Error::Precondition(format!(
            "|lambda| = {} lies below the cell anchor {anchor}",
            lambda.modulus
        )));
    }
    let tail = tail_bound(pi, i, lambda)?;
    Ok(own_error(pi, i, lambda, p, pi.r0()) + tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseError {
    pub own: XFloat,
    pub exact_tail: XFloat,
    pub remainder: XFloat,
    pub blocks_summed: usize,
}

impl PointwiseError {
    pub fn total(&self) -> XFloat {
        self.own + self.exact_tail + self.remainder
    }
}

/// Rigorous `‖T_{m_i,λ}(Π) - p‖_{D̄_r}` at any non-zero `λ`.
///
/// Later blocks are grouped into runs of non-decreasing anchors. In each
/// run the first `nb` blocks are summed exactly; the rest is bounded by
///
/// `C κ^μ Σ_{v >= d} (κr)^v / v! <= 2 C κ^μ (κr)^d / d!`,
///
/// where `κ = max(1, |λ| / λ0_J)`, `d = m_J - μ`, `C = max M0 ℓ0!`, valid
/// once `d + 1 >= 2κr`. Blocks keep being summed exactly until it is.
pub fn pointwise_error(
    pi: &PiFunction,
    i: usize,
    lambda: &Dilation,
    p: &Polynomial,
    r: f64,
    nb: usize,
) -> PointwiseError {
    let b = pi.blocks();
    let mu = b[i].m0;
    let own = own_error(pi, i, lambda, p, r);
    let lam = lambda.modulus;
    let mut exact_tail = XFloat::ZERO;
    let mut remainder = XFloat::ZERO;
    let mut summed = 0usize;
    let mut j = i + 1;
    while j < b.len() {
        let (_, end, ln_c) = pi.segment_of(j);
        let mut taken = 0;
        while j < end && taken < nb {
            exact_tail = exact_tail + b[j].image_upper_norm(mu, lam, r);
            j += 1;
            taken += 1;
            summed += 1;
        }
        while j < end {
            let kappa = (lam / b[j].lambda0).max(1.0);
            let x = kappa * r;
            let d = b[j].m0 - mu;
            if (d + 1) as f64 >= 2.0 * x {
                let ln_bound = ln_c
                    + mu as f64 * kappa.ln()
                    + std::f64::consts::LN_2
                    + d as f64 * x.ln()
                    - ln_factorial(d);
                remainder = remainder + XFloat::from_ln(ln_bound);
                j = end;
                break;
            }
            exact_tail = exact_tail + b[j].image_upper_norm(mu, lam, r);
            j += 1;
            summed += 1;
        }
    }
    PointwiseError {
        own,
        exact_tail,
        remainder,
        blocks_summed: summed,
    }
}
