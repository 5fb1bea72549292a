//! Sequential stages, each using the previous `f` as its base, with the
//! error budget of every earlier certificate tracked explicitly.

use serde::{Deserialize, Serialize};

use super::plan::{plan_stage, Mode, StageParams};
use super::stage::{build_stage, StageCertificate};
use super::verify::{verify_stage, VerifyReport};
use crate::blocks::{assemble_pi, PiFunction, SolutionBlock};
use crate::error::{Error, Result};
use crate::poly_core::json::dec_f64;
use crate::poly_core::{metric_with, Polynomial, XFloat};
use crate::sequences::{enumerate_targets, SequenceSpec};
use crate::ROUNDING_SLACK;

/// Default distance of a stage's first order above the previous degree.
pub const PIPELINE_OFFSET: u64 = 200;

pub fn empty_base(r0: f64) -> Result<PiFunction> {
    assemble_pi(Polynomial::zero(), Vec::new(), r0)
}

/// Bound on what `new_blocks` add to `‖T_{μ,λ}(f) - p‖` for every cell of
/// `cert`: each term is taken at `λ = ρ0` and at the largest witness order,
/// where `(λ/δ_j)^{k+m_j} R^d / d!` is largest once `d >= R`.
pub fn persistence_bound(cert: &StageCertificate, new_blocks: &[SolutionBlock]) -> Result<XFloat> {
    let mu = cert.m0;
    let r = cert.r0;
    let mut total = XFloat::ZERO;
    for b in new_blocks {
        if b.m0 < mu || ((b.m0 - mu) as f64) < r {
            return Err(Error::Precondition(format!(
                "block of order {} is too close to witness order {mu}",
                b.m0
            )));
        }
        total = total + b.image_upper_norm(mu, cert.rho0(), r);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub n0: u64,
    #[serde(with = "dec_f64")]
    pub rho0: f64,
    pub target: Polynomial,
    pub target_index: Option<u64>,
    pub s0: u64,
}

impl ScheduleEntry {
    pub fn indexed(n0: u64, rho0: f64, j: u64, s0: u64) -> ScheduleEntry {
        ScheduleEntry {
            n0,
            rho0,
            target: enumerate_targets(j).to_float(),
            target_index: Some(j),
            s0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub seq: SequenceSpec,
    pub cap: u64,
    pub persistence_offset: u64,
    /// Log-spaced points for the final re-verification.
    pub grid: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            seq: SequenceSpec::naturals(),
            cap: 1_000_000,
            persistence_offset: PIPELINE_OFFSET,
            grid: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyEntry {
    pub t: usize,
    pub metric: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub f: PiFunction,
    /// Number of blocks of `f` after each stage.
    pub stage_lengths: Vec<usize>,
    pub certificates: Vec<StageCertificate>,
    /// `consumed[t][e]`: budget stage `t` took from certificate `e`.
    pub consumed: Vec<Vec<f64>>,
    pub cauchy: Vec<CauchyEntry>,
    pub reverify: Vec<VerifyReport>,
    pub pass: bool,
}

/// `ρ(f_t, f_{t+1})` for the blocks added by stage `t + 1`.
fn stage_metric(new_blocks: &[SolutionBlock]) -> f64 {
    metric_with(|r| new_blocks.iter().map(|b| b.upper_norm(r)).sum(), 1e-12)
}

pub fn run_pipeline(schedule: &[ScheduleEntry], opts: &PipelineOptions) -> Result<PipelineReport> {
    if schedule.is_empty() {
        return Err(Error::invalid("empty schedule"));
    }
    let r_max = schedule.iter().map(|e| e.n0).max().unwrap() as f64 + 1.0 / 16.0;
    let mut f = empty_base(r_max)?;
    let mut certs: Vec<StageCertificate> = Vec::new();
    let mut consumed_all = Vec::new();
    let mut lengths = Vec::new();
    let mut cauchy = Vec::new();
    for (t0, entry) in schedule.iter().enumerate() {
        let t = t0 + 1;
        let share = 0.5f64.powi(t as i32);
        let surviving = certs.iter().map(|c| c.surviving_margin()).fold(f64::INFINITY, f64::min);
        let mut eps1 = share.min(0.5 * surviving);
        let mut offset = opts.persistence_offset;
        let mut doubled = false;
        let mut reduced = false;
        let (next, cert, consumed) = loop {
            let params = StageParams {
                n0: entry.n0,
                rho0: entry.rho0,
                target: entry.target.clone(),
                target_index: entry.target_index,
                s0: entry.s0,
                eps1,
                seq: opts.seq.clone(),
                mode: Mode::Optimized,
                cap: opts.cap,
                start_offset: offset,
                delta0: None,
            };
            let plan = plan_stage(&params, &f)?;
            let (next, cert) = build_stage(&plan, &f)?;
            let added = &next.blocks()[f.len()..];
            let consumed: Vec<f64> = certs
                .iter()
                .map(|c| persistence_bound(c, added).map(|x| x.to_f64_upper(ROUNDING_SLACK)))
                .collect::<Result<_>>()?;
            let fits = certs
                .iter()
                .zip(&consumed)
                .all(|(c, &u)| u <= share * c.surviving_margin());
            if fits {
                break (next, cert, consumed);
            }
            if !doubled {
                doubled = true;
                offset *= 2;
            } else if !reduced {
                reduced = true;
                eps1 /= 2.0;
            } else {
                return Err(Error::MarginExhausted(format!(
                    "stage {t} cannot fit under the surviving margins"
                )));
            }
        };
        for (c, u) in certs.iter_mut().zip(&consumed) {
            c.perturbation_allowance += u;
            c.recompute_pass();
        }
        let added = &next.blocks()[f.len()..];
        cauchy.push(CauchyEntry {
            t: t0,
            metric: stage_metric(added),
            bound: 0.5f64.powi(t0 as i32),
            ok: false,
        });
        consumed_all.push(consumed);
        lengths.push(next.len());
        certs.push(cert);
        f = next;
    }
    for c in &mut cauchy {
        c.ok = c.metric < c.bound;
    }
    let reverify: Vec<VerifyReport> = certs
        .iter()
        .map(|c| verify_stage(&f, c, opts.grid))
        .collect::<Result<_>>()?;
    let pass = certs.iter().all(|c| c.pass) && reverify.iter().all(|r| r.pass) && cauchy.iter().all(|c| c.ok);
    Ok(PipelineReport {
        f,
        stage_lengths: lengths,
        certificates: certs,
        consumed: consumed_all,
        cauchy,
        reverify,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_stage_matches_build() {
        let sched = [ScheduleEntry::indexed(1, 1.01, 49, 10)];
        let rep = run_pipeline(&sched, &PipelineOptions::default()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.certificates.len(), 1);
        let params = StageParams {
            eps1: 0.5,
            target_index: Some(49),
            start_offset: PIPELINE_OFFSET,
            ..StageParams::new(1, 1.01, Polynomial::from_real(&[0.0, 1.0]), 10, 0.5)
        };
        let base = empty_base(1.0625).unwrap();
        let (f, cert) = build_stage(&plan_stage(&params, &base).unwrap(), &base).unwrap();
        assert_eq!(f, rep.f);
        assert_eq!(cert, rep.certificates[0]);
    }

    #[test]
    fn two_stages_persist() {
        let sched = [ScheduleEntry::indexed(1, 1.005, 1, 10), ScheduleEntry::indexed(1, 1.005, 49, 10)];
        let rep = run_pipeline(&sched, &PipelineOptions::default()).unwrap();
        assert!(rep.pass);
        let first = &rep.certificates[0];
        assert!(first.perturbation_allowance > 0.0);
        assert!(first.perturbation_allowance <= 0.5 * first.min_margin);
        assert!(rep.cauchy.iter().all(|c| c.metric < c.bound));
        assert!(rep.reverify.iter().all(|r| r.pass));
    }

    #[test]
    fn persistence_rejects_close_orders() {
        let sched = [ScheduleEntry::indexed(1, 1.005, 1, 10)];
        let rep = run_pipeline(&sched, &PipelineOptions::default()).unwrap();
        let cert = &rep.certificates[0];
        let near = crate::blocks::solve_block(cert.m0 + 1, 1.0, cert.target()).unwrap();
        assert!(persistence_bound(cert, &[near]).is_err());
    }
}
