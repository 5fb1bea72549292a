//! Moving a witness at a positive dilation `λ0` to `λ0 e^{2πiθ0}`.
//!
//! `T_{k,λ0 e^{2πiθ}}(f)(z) = e^{2πiθk} T_{k,λ0}(f)(e^{2πiθ} z)`, so if
//! `‖T_{k,λ0}(f) - p‖ < ε1` and `|e^{2πiθk} - 1| < ε1` then
//! `‖T_{k,λ0 e^{2πiθ}}(f) - p(e^{2πiθ} ·)‖ <= |e^{2πiθk} - 1|(ε1 + M0) + ε1 < ε0`
//! whenever `ε1² + (M0+1)ε1 < ε0`.

use serde::{Deserialize, Serialize};

use crate::blocks::{pointwise_error, PiFunction, DEFAULT_TAIL_BLOCKS};
use crate::error::{Error, Result};
use crate::poly_core::{upper_norm, Dd, Dilation, Polynomial};
use crate::ROUNDING_SLACK;

/// Positive root of `x² + (M0+1)x - ε0`.
pub fn trinomial_root(m0: f64, eps0: f64) -> f64 {
    let b = m0 + 1.0;
    2.0 * eps0 / (b + (b * b + 4.0 * eps0).sqrt())
}

/// `|e^{2πi t} - 1| = 2|sin(πt)|`.
pub fn chord(turns: f64) -> f64 {
    2.0 * (std::f64::consts::PI * turns).sin().abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationWitness {
    pub theta0: f64,
    pub lambda0: f64,
    pub target: Polynomial,
    pub eps0: f64,
    pub n0: u64,
    /// Upper bound on `‖p‖` over the closed disk of radius `n0`.
    pub m0_norm: f64,
    pub rho2: f64,
    pub eps1: f64,
    /// `φ0/π` with `sin φ0 = ε1/2`.
    pub arc_half_width: f64,
    pub candidates_scanned: usize,
    pub block: usize,
    pub order: u64,
    pub frac: f64,
    pub chord: f64,
    /// `‖T_{k,λ0}(f) - p‖` at the positive dilation.
    pub base_error: f64,
    pub certified_error: f64,
    /// `base_error + chord · M0`.
    pub refined_error: f64,
    /// Direct bound at the complex dilation against the rotated target.
    pub recomputed_error: f64,
}

/// Scans the blocks in `certified` by ascending order for one whose
/// `{θ0 k}` lies in the arc `[0, w) ∪ (1-w, 1)`.
#[allow(clippy::too_many_arguments)]
pub fn rotation_witness(
    pi: &PiFunction,
    certified: &[usize],
    theta0: Dd,
    lambda0: f64,
    p: &Polynomial,
    eps0: f64,
    n0: u64,
    search_cap: usize,
) -> Result<RotationWitness> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::InvalidEps(eps0));
    }
    if !(lambda0 > 0.0) || n0 < 1 {
        return Err(Error::invalid("rotation needs lambda0 > 0 and n0 >= 1"));
    }
    if let Some(&i) = certified.iter().find(|&&i| i >= pi.len()) {
        return Err(Error::invalid(format!("block index {i} out of range")));
    }
    let r = n0 as f64;
    let m0_norm = upper_norm(p, r).to_f64_upper(ROUNDING_SLACK);
    let rho2 = trinomial_root(m0_norm, eps0);
    let eps1 = rho2 / 2.0;
    let w = (eps1 / 2.0).asin() / std::f64::consts::PI;
    let theta = theta0.frac();
    let rotated = p.rotate(theta);
    let base = Dilation::real(lambda0);

    let mut order: Vec<usize> = certified.to_vec();
    order.sort_by_key(|&i| pi.blocks()[i].m0);
    order.dedup();
    let mut best = f64::INFINITY;
    for (scanned, &i) in order.iter().take(search_cap).enumerate() {
        let k = pi.blocks()[i].m0;
        let frac = theta.frac_mul(k);
        let dist = frac.min(1.0 - frac);
        best = best.min(dist);
        if !(frac < w || frac > 1.0 - w) {
            continue;
        }
        let base_error = pointwise_error(pi, i, &base, p, r, DEFAULT_TAIL_BLOCKS)
            .total()
            .to_f64_upper(ROUNDING_SLACK);
        if base_error >= eps1 {
            continue;
        }
        let c = chord(frac);
        let certified_error = c * (eps1 + m0_norm) + eps1;
        let refined_error = base_error + c * m0_norm;
        let rot = Dilation::new(lambda0, theta)?;
        let recomputed_error = pointwise_error(pi, i, &rot, &rotated, r, DEFAULT_TAIL_BLOCKS)
            .total()
            .to_f64_upper(ROUNDING_SLACK);
        if certified_error >= eps0 || recomputed_error >= eps0 {
            return Err(Error::CertificationFailure(format!(
                "rotated error at order {k}: certified {certified_error}, recomputed {recomputed_error}, eps0 {eps0}"
            )));
        }
        return Ok(RotationWitness {
            theta0: theta.to_f64(),
            lambda0,
            target: p.clone(),
            eps0,
            n0,
            m0_norm,
            rho2,
            eps1,
            arc_half_width: w,
            candidates_scanned: scanned + 1,
            block: i,
            order: k,
            frac,
            chord: c,
            base_error,
            certified_error,
            refined_error,
            recomputed_error,
        });
    }
    Err(Error::NotFound(format!(
        "no arc hit among {} candidates (half-width {w:.3e}, best distance {best:.3e})",
        order.len().min(search_cap)
    )))
}
