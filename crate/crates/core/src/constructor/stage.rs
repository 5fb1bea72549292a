//! Building a stage `f = Q + Σ f_i` and certifying it cell by cell.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{unit_ratio_tail, Mode, StagePlan};
use crate::blocks::{analytic_tail, solve_block, PiFunction, SolutionBlock, DEFAULT_TAIL_BLOCKS};
use crate::error::{Error, Result};
use crate::poly_core::json::dec_f64;
use crate::poly_core::{Dilation, XFloat};
use crate::ROUNDING_SLACK;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub i: usize,
    #[serde(with = "dec_f64")]
    pub anchor: f64,
    #[serde(with = "dec_f64")]
    pub hi: f64,
    pub order: u64,
    /// Sup over the cell of `‖T_{μ_i,λ}(f_i) - p‖`.
    #[serde(with = "dec_f64")]
    pub own: f64,
    #[serde(with = "dec_f64")]
    pub tail: f64,
    #[serde(with = "dec_f64")]
    pub bound: f64,
    #[serde(with = "dec_f64")]
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Closeness {
    /// `Σ ‖f_i‖` on `D̄_{R0}`, bounding `‖f - Q‖`.
    #[serde(with = "dec_f64")]
    pub bound: f64,
    /// `1/2^{μ_1 - 2}`.
    #[serde(with = "dec_f64")]
    pub analytic: f64,
    #[serde(with = "dec_f64")]
    pub eps0: f64,
    #[serde(with = "dec_f64")]
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCertificate {
    pub plan: StagePlan,
    pub mode: Mode,
    /// Largest order used by a witness, `μ_{N0+1}`.
    pub m0: u64,
    pub block_offset: usize,
    #[serde(with = "dec_f64")]
    pub r0: f64,
    pub s0: u64,
    pub cells: Vec<CellRecord>,
    pub closeness: Closeness,
    #[serde(with = "dec_f64")]
    pub min_margin: f64,
    /// Error budget already granted to later additions to `f`.
    #[serde(with = "dec_f64")]
    pub perturbation_allowance: f64,
    pub deviations: Vec<String>,
    pub pass: bool,
}

impl StageCertificate {
    /// Smallest cell margin left after the perturbation allowance.
    pub fn surviving_margin(&self) -> f64 {
        self.min_margin - self.perturbation_allowance
    }

    pub fn target(&self) -> &crate::poly_core::Polynomial {
        &self.plan.params.target
    }

    pub fn rho0(&self) -> f64 {
        self.plan.params.rho0
    }

    pub(crate) fn recompute_pass(&mut self) {
        self.pass = self.surviving_margin() > 0.0 && self.closeness.margin > 0.0;
    }
}

fn up(x: XFloat) -> f64 {
    x.to_f64_upper(ROUNDING_SLACK)
}

fn certify_cell(plan: &StagePlan, blocks: &[SolutionBlock], i: usize) -> Result<CellRecord> {
    let c = &plan.constants;
    let (anchor, hi) = plan.partition.cell(i);
    let blk = &blocks[i];
    let mu = blk.m0;
    let own = if hi > anchor {
        blk.anchor_deviation(&Dilation::real(hi), c.r0)
    } else {
        XFloat::ZERO
    };
    let n = blocks.len();
    let tail = match plan.params.mode {
        Mode::Faithful => {
            let t = if i + 1 < n { analytic_tail(blocks[i + 1].m0 - mu) } else { XFloat::ZERO };
            // the inequalities of the construction: stability at ε0/2 and tail below ε0/2
            let ratio_pow = ((mu + c.ell0) as f64 * (hi / anchor).ln()).exp_m1();
            let stab = c.m1 * ratio_pow;
            let half = c.eps0 / 2.0;
            if !(stab < half) || !(t.to_f64() < half) {
                return Err(Error::CertificationFailure(format!(
                    "cell {i}: stability {stab} or tail {} not below eps0/2 = {half}",
                    t.to_f64()
                )));
            }
            t
        }
        Mode::Optimized => {
            let last = (i + DEFAULT_TAIL_BLOCKS).min(n - 1);
            let beyond = blocks.get(last + 1).map(|b| b.m0);
            let later = if i + 1 < n { &blocks[i + 1..=last] } else { &[] };
            unit_ratio_tail(later, mu, beyond, c.r0)
        }
    };
    let bound = up(own + tail);
    Ok(CellRecord {
        i,
        anchor,
        hi,
        order: mu,
        own: up(own),
        tail: up(tail),
        bound,
        margin: 1.0 / plan.params.s0 as f64 - bound,
    })
}

/// Builds the blocks and the certificate without judging it.
pub fn certify_stage(plan: &StagePlan, base: &PiFunction) -> Result<(PiFunction, StageCertificate)> {
    if plan.block_offset != base.len() {
        return Err(Error::Precondition(format!(
            "plan expects {} base blocks, base has {}",
            plan.block_offset,
            base.len()
        )));
    }
    let c = &plan.constants;
    if base.r0() < c.r0 {
        return Err(Error::Precondition(format!(
            "base radius {} below stage radius {}",
            base.r0(),
            c.r0
        )));
    }
    let target = &plan.params.target;
    let blocks: Vec<SolutionBlock> = plan
        .orders
        .iter()
        .enumerate()
        .map(|(i, &m)| solve_block(m, plan.partition.points[i], target))
        .collect::<Result<_>>()?;
    let cells: Vec<CellRecord> = (0..blocks.len())
        .into_par_iter()
        .map(|i| certify_cell(plan, &blocks, i))
        .collect::<Result<_>>()?;
    let close_bound = up(blocks.iter().map(|b| b.upper_norm(c.r0)).sum());
    let closeness = Closeness {
        bound: close_bound,
        analytic: XFloat::exp2(2.0 - blocks[0].m0 as f64).to_f64(),
        eps0: c.eps0,
        margin: c.eps0 - close_bound,
    };
    let f = base.extend(blocks)?;
    let min_margin = cells.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let mut cert = StageCertificate {
        plan: plan.clone(),
        mode: plan.params.mode,
        m0: *plan.orders.last().unwrap(),
        block_offset: plan.block_offset,
        r0: c.r0,
        s0: plan.params.s0,
        cells,
        closeness,
        min_margin,
        perturbation_allowance: 0.0,
        deviations: plan.deviations.clone(),
        pass: false,
    };
    cert.recompute_pass();
    Ok((f, cert))
}

/// [`certify_stage`], failing unless every margin is positive.
pub fn build_stage(plan: &StagePlan, base: &PiFunction) -> Result<(PiFunction, StageCertificate)> {
    let (f, cert) = certify_stage(plan, base)?;
    if !cert.pass {
        return Err(Error::CertificationFailure(format!(
            "min cell margin {}, closeness margin {}",
            cert.min_margin, cert.closeness.margin
        )));
    }
    Ok((f, cert))
}
