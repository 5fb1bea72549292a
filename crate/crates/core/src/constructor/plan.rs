//! Stage planning: every constant of the construction, the subsequence of
//! orders and the partition of `[1/ρ0, ρ0]`.

use serde::{Deserialize, Serialize};

use crate::blocks::{gamma_threshold, solve_block, PiFunction, SolutionBlock, DEFAULT_TAIL_BLOCKS};
use crate::error::{BudgetReport, Error, Extrapolation, Result};
use crate::poly_core::factorial::ln_factorial;
use crate::poly_core::{upper_norm, Polynomial, XFloat};
use crate::sequences::coverage::extrapolate;
use crate::sequences::{
    affine_log10_n0, affine_log10_terms, coverage_n0, enumerate_targets, partition_points, required_coverage,
    FinalCase, Partition, SequenceSpec, StepRule, SubsequenceSpec,
};

/// Share of `1/s0` the optimized cells aim for; the rest is margin.
pub const CELL_TARGET: f64 = 0.9;

/// Consecutive terms checked before `v1` is accepted.
const V1_STABILITY: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Faithful,
    Optimized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageParams {
    pub n0: u64,
    #[serde(with = "crate::poly_core::json::dec_f64")]
    pub rho0: f64,
    pub target: Polynomial,
    pub target_index: Option<u64>,
    pub s0: u64,
    #[serde(with = "crate::poly_core::json::dec_f64")]
    pub eps1: f64,
    pub seq: SequenceSpec,
    pub mode: Mode,
    /// Largest admissible `N0`.
    pub cap: u64,
    /// Extra distance of `μ_1` above the degree of the base function.
    pub start_offset: u64,
    /// Overrides the default `δ0` (faithful constants only).
    pub delta0: Option<f64>,
}

impl StageParams {
    pub fn new(n0: u64, rho0: f64, target: Polynomial, s0: u64, eps1: f64) -> StageParams {
        StageParams {
            n0,
            rho0,
            target,
            target_index: None,
            s0,
            eps1,
            seq: SequenceSpec::naturals(),
            mode: Mode::Optimized,
            cap: 1_000_000,
            start_offset: 0,
            delta0: None,
        }
    }

    /// Target `p_j` from the fixed enumeration.
    pub fn with_target_index(n0: u64, rho0: f64, j: u64, s0: u64, eps1: f64) -> StageParams {
        let mut p = StageParams::new(n0, rho0, enumerate_targets(j).to_float(), s0, eps1);
        p.target_index = Some(j);
        p
    }
}

/// The constants fixed at the start of the construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub eps0: f64,
    /// Radius `R0 = n0 + 1/16`.
    pub r0: f64,
    /// `max |β_j|`.
    pub m0: f64,
    /// `M0 Σ_{j<=ℓ0} R0^j`.
    pub m1: f64,
    /// `Σ |β_j| R0^j <= M1`.
    pub m1_tight: f64,
    pub ell0: u64,
    pub delta0: f64,
    pub v0: u64,
    pub v1: u64,
    pub v2: u64,
    pub v3: f64,
}

fn validate(params: &StageParams) -> Result<()> {
    if params.n0 < 1 {
        return Err(Error::invalid("disk index n0 must be at least 1"));
    }
    if !(params.rho0 > 1.0 && params.rho0.is_finite()) {
        return Err(Error::invalid(format!("rho0 must exceed 1, got {}", params.rho0)));
    }
    if params.s0 < 1 {
        return Err(Error::invalid("s0 must be at least 1"));
    }
    if !(params.eps1 > 0.0) {
        return Err(Error::invalid(format!("eps1 must be positive, got {}", params.eps1)));
    }
    if params.target.is_zero() {
        return Err(Error::ZeroTarget);
    }
    if params.cap < 1 {
        return Err(Error::invalid("cap must be at least 1"));
    }
    params.seq.validate()
}

/// First `v` after which `(1 + ρ0δ0/k_v)^{k_v} < 1 + ε0/4M1` holds for
/// [`V1_STABILITY`] consecutive terms.
fn scan_v1(seq: &SequenceSpec, rho0: f64, delta0: f64, rhs_ln: f64) -> u64 {
    let holds = |k: u64| (k as f64) * (rho0 * delta0 / k as f64).ln_1p() < rhs_ln;
    let mut start = 1u64;
    let mut run = 0u64;
    let mut v = 1u64;
    while run < V1_STABILITY {
        match seq.term(v) {
            Some(k) if holds(k) => run += 1,
            Some(_) => {
                run = 0;
                start = v + 1;
            }
            None => break,
        }
        v += 1;
    }
    start
}

/// Minimal `v >= 1` with `(1 + ε0/2M1)^{v/(v+ℓ0)} > 1 + ε0/4M1`.
fn scan_v0(eps0: f64, m1: f64, ell0: u64) -> u64 {
    let a = (eps0 / (2.0 * m1)).ln_1p();
    let b = (eps0 / (4.0 * m1)).ln_1p();
    let mut v = 1u64;
    while (v as f64) / ((v + ell0) as f64) * a <= b {
        v += 1;
    }
    v
}

/// Computes the constants; `deg_q` enters `v3` only when given.
pub fn constants(params: &StageParams, deg_q: Option<u64>) -> Result<Constants> {
    validate(params)?;
    let eps0 = params.eps1.min(1.0 / params.s0 as f64);
    if !(eps0 < 1.0) {
        return Err(Error::InvalidEps(eps0));
    }
    let r0 = params.n0 as f64 + 1.0 / 16.0;
    let p = &params.target;
    let ell0 = p.degree_or_zero() as u64;
    let m0 = p.max_abs_coeff().to_f64();
    let m1 = m0 * (0..=ell0).map(|j| r0.powi(j as i32)).sum::<f64>();
    let m1_tight = upper_norm(p, r0).to_f64_upper(crate::ROUNDING_SLACK);
    let rhs_ln = (eps0 / (4.0 * m1)).ln_1p();
    let limit = rhs_ln / params.rho0;
    let delta0 = params.delta0.unwrap_or(0.5 * limit);
    if !(delta0 > 0.0 && delta0 < limit) {
        return Err(Error::invalid(format!("delta0 = {delta0} outside (0, {limit})")));
    }
    let v1 = scan_v1(&params.seq, params.rho0, delta0, rhs_ln);
    let ln_c = ln_factorial(ell0) + m0.ln();
    let v2 = gamma_threshold(ln_c, params.rho0 * r0);
    let v0 = scan_v0(eps0, m1, ell0);
    let log_term = 3.0 + (1.0 / eps0).log2();
    let mut v3 = (v0.max(v1).max(v2).max(ell0) as f64).max(log_term);
    if let Some(d) = deg_q {
        v3 = v3.max(d as f64);
    }
    Ok(Constants {
        eps0,
        r0,
        m0,
        m1,
        m1_tight,
        ell0,
        delta0,
        v0,
        v1,
        v2,
        v3: v3 + 1.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagePlan {
    pub params: StageParams,
    pub constants: Constants,
    /// `M` with `μ_1 > M` relative to the floor and `μ_{n+1} - μ_n > M`.
    pub gap: u64,
    /// `μ_1` exceeds this as well.
    pub start_floor: u64,
    /// Index in the final function of this stage's first block.
    pub block_offset: usize,
    pub required_coverage: f64,
    /// `N0`; the stage has `N0 + 1` blocks.
    pub n0_index: u64,
    pub orders: Vec<u64>,
    pub partition: Partition,
    /// Per-cell tail bound used to size optimized steps.
    pub step_tails: Vec<f64>,
    /// Estimated `log10 N0` when the base is arithmetic.
    pub log10_n0_estimate: Option<f64>,
    pub deviations: Vec<String>,
}

impl StagePlan {
    pub fn cell_count(&self) -> usize {
        self.orders.len()
    }
}

/// Tail of `T_{μ,λ}` over later blocks with `|λ|` at most every later
/// anchor: exact terms for `later` plus `2^{1-(beyond-μ)}`.
pub fn unit_ratio_tail(template: &[SolutionBlock], mu: u64, beyond: Option<u64>, r: f64) -> XFloat {
    let exact: XFloat = template.iter().map(|b| b.image_upper_norm(mu, b.lambda0, r)).sum();
    let rest = beyond.map_or(XFloat::ZERO, |m| XFloat::exp2(1.0 - (m - mu) as f64));
    exact + rest
}

fn budget(what: &str, required: f64, achieved: f64, terms: u64, extrapolation: Extrapolation) -> Error {
    Error::BudgetExceeded(Box::new(BudgetReport {
        what: what.into(),
        required,
        achieved,
        terms,
        extrapolation,
    }))
}

pub fn plan_stage(params: &StageParams, base: &PiFunction) -> Result<StagePlan> {
    let faithful = params.mode == Mode::Faithful;
    if faithful && params.rho0 < 2.0 {
        return Err(Error::invalid("faithful mode needs rho0 >= 2"));
    }
    let base_deg = base.max_degree();
    let c = constants(params, faithful.then_some(base_deg))?;
    let mut deviations = Vec::new();
    if !faithful {
        deviations.push("optimized_steps".to_string());
        if params.rho0 <= 2.0 {
            deviations.push("rho0_at_most_two".to_string());
        }
        deviations.push("deg_q_in_start_floor".to_string());
    }
    deviations.push("final_block_at_last_point".to_string());

    let ln_c = ln_factorial(c.ell0) + c.m0.ln();
    let n1 = (gamma_threshold(ln_c, base.r0()).max(c.ell0) + 1).max(base.n1());
    let mut gap = c.v3.floor() as u64;
    if gap < n1 {
        deviations.push(format!("gap_raised_to_{n1}"));
        gap = n1;
    }
    let last_order = base.blocks().last().map_or(0, |b| b.m0);
    let mut start_floor = n1;
    if !base.is_empty() || !base.q().is_zero() {
        start_floor = start_floor
            .max(base_deg + params.start_offset)
            .max(last_order + n1);
    }
    let mut sub = SubsequenceSpec::new(params.seq.clone(), gap, start_floor)?;
    let need = required_coverage(params.rho0);

    let (n0_index, partition, step_tails, log10_est) = if faithful {
        let mut est = None;
        if let Some(step) = sub.affine_step() {
            let mu1 = sub.term(1)?;
            let e = affine_log10_n0(mu1, step, c.delta0, params.rho0);
            est = Some(e);
            if e > (params.cap as f64 + 1.0).log10() + 0.5 {
                let partial = c.delta0 * sub.prefix_sum(1)?;
                return Err(budget(
                    "coverage sum of delta0/mu_n (pre-estimate)",
                    need,
                    partial,
                    1,
                    Extrapolation::DivergesEventually { log10_n0: e },
                ));
            }
        }
        let n0 = coverage_n0(&mut sub, c.delta0, params.rho0, params.cap)?;
        let part = partition_points(&mut sub, c.delta0, params.rho0, n0)?;
        (n0, part, Vec::new(), est)
    } else {
        optimized_partition(params, &c, &mut sub)?
    };

    let n_blocks = partition.cell_count();
    sub.ensure(n_blocks)?;
    let orders = sub.terms()[..n_blocks].to_vec();
    Ok(StagePlan {
        params: params.clone(),
        constants: c,
        gap,
        start_floor,
        block_offset: base.len(),
        required_coverage: need,
        n0_index,
        orders,
        partition,
        step_tails,
        log10_n0_estimate: log10_est,
        deviations,
    })
}

/// Steps `a_{i+1} = a_i r_i` with `M1' (r_i^{μ_i+ℓ0} - 1)` equal to the
/// cell budget left after the tail.
fn optimized_partition(
    params: &StageParams,
    c: &Constants,
    sub: &mut SubsequenceSpec,
) -> Result<(u64, Partition, Vec<f64>, Option<f64>)> {
    let rho0 = params.rho0;
    let cell_target = CELL_TARGET / params.s0 as f64;
    let lo = 1.0 / rho0;
    let nb = DEFAULT_TAIL_BLOCKS;
    let mut points = vec![lo];
    let mut tails = Vec::new();
    let mut a = lo;
    let mut template: Vec<SolutionBlock> = Vec::new();
    let mut i = 0usize;
    let log_need = 2.0 * rho0.ln();
    let mut log_done = 0.0;
    loop {
        if i as u64 > params.cap {
            sub.ensure(1)?;
            let extrapolation = match sub.affine_step() {
                Some(s) => {
                    let step_ln = (cell_target / c.m1_tight).ln_1p();
                    Extrapolation::DivergesEventually {
                        log10_n0: affine_log10_terms((sub.term(1)? + c.ell0) as f64, s as f64, step_ln, log_need),
                    }
                }
                None => extrapolate(sub, (cell_target / c.m1_tight).ln_1p(), rho0, i)?,
            };
            return Err(budget("optimized log-coverage 2 ln rho0", log_need, log_done, i as u64, extrapolation));
        }
        sub.ensure(i + nb + 2)?;
        while template.len() < i + nb + 2 {
            let m = sub.terms()[template.len()];
            template.push(solve_block(m, 1.0, &params.target)?);
        }
        let mu = template[i].m0;
        let beyond = Some(template[i + nb + 1].m0);
        let tail = unit_ratio_tail(&template[i + 1..=i + nb], mu, beyond, c.r0).to_f64_upper(crate::ROUNDING_SLACK);
        let room = cell_target - tail;
        if !(room > 0.0) {
            return Err(Error::CertificationFailure(format!(
                "tail {tail} leaves no room below {cell_target} at order {mu}"
            )));
        }
        tails.push(tail);
        let ln_r = (1.0 - 1e-9) * (room / c.m1_tight).ln_1p() / (mu + c.ell0) as f64;
        let next = a * ln_r.exp();
        i += 1;
        log_done += ln_r;
        if next >= rho0 {
            points.push(rho0);
            break;
        }
        points.push(next);
        a = next;
    }
    let n0 = i as u64 - 1;
    let part = Partition::from_points(rho0, c.delta0, points, n0, FinalCase::Appended, StepRule::Optimized)?;
    let est = sub.affine_step().map(|s| {
        let step_ln = (cell_target / c.m1_tight).ln_1p();
        affine_log10_terms((template[0].m0 + c.ell0) as f64, s as f64, step_ln, log_need)
    });
    Ok((n0, part, tails, est))
}
