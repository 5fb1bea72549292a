//! Independent re-check of a certificate: at sample dilations the error of
//! the witness order is recomputed from the blocks of `f` directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stage::StageCertificate;
use crate::blocks::{pointwise_error, PiFunction, DEFAULT_TAIL_BLOCKS};
use crate::error::{Error, Result};
use crate::poly_core::{Dd, Dilation, Polynomial, SparsePoly};
use crate::sequences::locate_cell;
use crate::ROUNDING_SLACK;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub points: usize,
    pub max_observed: f64,
    pub worst_lambda: f64,
    /// `min (1/s0 - observed)`.
    pub min_margin: f64,
    /// Largest `observed / (bound + allowance)`.
    pub max_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub lambda: f64,
    pub cell: usize,
    pub order: u64,
    pub certified: f64,
    pub observed: f64,
}

/// `grid` log-spaced points of `[1/ρ0, ρ0]`, every anchor and cell midpoint,
/// and `ρ0`.
pub fn stage_lambdas(cert: &StageCertificate, grid: usize) -> Vec<f64> {
    let pts = &cert.plan.partition.points;
    let (lo, hi) = (pts[0], cert.rho0());
    let l = cert.rho0().ln();
    let mut out: Vec<f64> = if grid == 1 {
        vec![1.0]
    } else {
        (0..grid)
            .map(|j| (-l + 2.0 * l * j as f64 / (grid - 1) as f64).exp().clamp(lo, hi))
            .collect()
    };
    for i in 0..cert.cells.len() {
        let (a, b) = cert.plan.partition.cell(i);
        out.push(a);
        out.push(0.5 * (a + b));
    }
    out.push(hi);
    out
}

/// `n` uniform samples of `[1/ρ0, ρ0]`.
pub fn random_lambdas(cert: &StageCertificate, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = cert.plan.partition.points[0];
    (0..n).map(|_| rng.random_range(lo..=cert.rho0())).collect()
}

fn check_alignment(f: &PiFunction, cert: &StageCertificate) -> Result<()> {
    let blocks = f.blocks();
    if cert.block_offset + cert.cells.len() > blocks.len() {
        return Err(Error::Precondition("certificate refers to blocks missing from f".into()));
    }
    for c in &cert.cells {
        let b = &blocks[cert.block_offset + c.i];
        if b.m0 != c.order || b.lambda0 != c.anchor || b.target != *cert.target() {
            return Err(Error::Precondition(format!("block {} of f does not match cell {}", cert.block_offset + c.i, c.i)));
        }
    }
    Ok(())
}

pub fn observe(f: &PiFunction, cert: &StageCertificate, lambda: f64) -> Result<Observation> {
    let cell = locate_cell(&cert.plan.partition, lambda)?;
    let rec = &cert.cells[cell];
    let idx = cert.block_offset + cell;
    let pe = pointwise_error(f, idx, &Dilation::real(lambda), cert.target(), cert.r0, DEFAULT_TAIL_BLOCKS);
    Ok(Observation {
        lambda,
        cell,
        order: rec.order,
        certified: rec.bound + cert.perturbation_allowance,
        observed: pe.total().to_f64_upper(ROUNDING_SLACK),
    })
}

pub fn verify_points(f: &PiFunction, cert: &StageCertificate, lambdas: &[f64]) -> Result<VerifyReport> {
    check_alignment(f, cert)?;
    let obs: Vec<Observation> = lambdas
        .par_iter()
        .map(|&l| observe(f, cert, l))
        .collect::<Result<_>>()?;
    let inv_s = 1.0 / cert.s0 as f64;
    let mut rep = VerifyReport {
        points: obs.len(),
        max_observed: 0.0,
        worst_lambda: f64::NAN,
        min_margin: f64::INFINITY,
        max_ratio: 0.0,
        pass: true,
    };
    for o in &obs {
        if o.observed > o.certified * (1.0 + 4.0 * ROUNDING_SLACK) {
            return Err(Error::CertificationFailure(format!(
                "at lambda = {}: observed {} exceeds certified {} (cell {})",
                o.lambda, o.observed, o.certified, o.cell
            )));
        }
        if o.observed >= rep.max_observed {
            rep.max_observed = o.observed;
            rep.worst_lambda = o.lambda;
        }
        rep.min_margin = rep.min_margin.min(inv_s - o.observed);
        if o.certified > 0.0 {
            rep.max_ratio = rep.max_ratio.max(o.observed / o.certified);
        }
    }
    rep.pass = rep.min_margin > 0.0;
    Ok(rep)
}

pub fn verify_stage(f: &PiFunction, cert: &StageCertificate, grid: usize) -> Result<VerifyReport> {
    if grid < 1 {
        return Err(Error::invalid("verification grid must have at least one point"));
    }
    verify_points(f, cert, &stage_lambdas(cert, grid))
}

/// Largest `|T_{μ_i,λ}(f) - p|` over `g` points of `|z| = r`, using block `i`
/// and the next few. A lower estimate, for plots only.
pub fn grid_error(f: &PiFunction, i: usize, lambda: f64, p: &Polynomial, r: f64, g: usize) -> f64 {
    let b = f.blocks();
    let mu = b[i].m0;
    let d = Dilation::real(lambda);
    let last = (i + DEFAULT_TAIL_BLOCKS).min(b.len() - 1);
    let img = b[i..=last]
        .iter()
        .fold(SparsePoly::zero(), |acc, blk| acc.add(&blk.image_sparse(mu, &d)))
        .sub(&p.to_sparse());
    (0..g)
        .map(|j| img.eval_polar(r, Dd::from_ratio(j as i64, g as i64)).norm().to_f64())
        .fold(0.0, f64::max)
}
