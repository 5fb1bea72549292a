//! Whether the coverage condition can be met for a given base sequence.

use serde::{Deserialize, Serialize};

use super::plan::{constants, StageParams};
use crate::error::{BudgetReport, Error, Extrapolation, Result};
use crate::sequences::{coverage_n0, divergence_report, required_coverage, DivergenceReport, SequenceSpec, SubsequenceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub sequence: String,
    pub rho0: f64,
    pub required_coverage: f64,
    pub delta0: f64,
    pub gap: u64,
    pub feasibility: Feasibility,
    /// `N0` when reached within the cap.
    pub n0: Option<u64>,
    /// Estimated `log10 N0` beyond the cap.
    pub log10_n0: Option<f64>,
    /// Upper bound on every achievable `Σ δ0/μ_n`.
    pub supremum: Option<f64>,
    pub budget: Option<BudgetReport>,
    pub divergence: DivergenceReport,
}

/// Runs the coverage scan with the default constants of `sample` on `base`.
pub fn dichotomy_probe(base: &SequenceSpec, rho0: f64, sample: &StageParams, cap: u64) -> Result<DichotomyReport> {
    let mut params = sample.clone();
    params.seq = base.clone();
    params.rho0 = rho0;
    let c = constants(&params, None)?;
    let gap = c.v3.floor() as u64;
    let mut sub = SubsequenceSpec::new(base.clone(), gap, 0)?;
    let need = required_coverage(rho0);
    let mut rep = DichotomyReport {
        sequence: base.to_string(),
        rho0,
        required_coverage: need,
        delta0: c.delta0,
        gap,
        feasibility: Feasibility::Unknown,
        n0: None,
        log10_n0: None,
        supremum: None,
        budget: None,
        divergence: divergence_report(base, cap.clamp(1, 1_000_000)),
    };
    match coverage_n0(&mut sub, c.delta0, rho0, cap) {
        Ok(n0) => {
            rep.feasibility = Feasibility::Feasible;
            rep.n0 = Some(n0);
            rep.log10_n0 = Some(((n0 + 1) as f64).log10());
        }
        Err(Error::BudgetExceeded(r)) => {
            match r.extrapolation {
                Extrapolation::DivergesEventually { log10_n0 } => {
                    rep.feasibility = Feasibility::Feasible;
                    rep.log10_n0 = Some(log10_n0);
                }
                Extrapolation::BoundedAbove { supremum } => {
                    rep.supremum = Some(supremum);
                    if supremum <= need {
                        rep.feasibility = Feasibility::Infeasible;
                    }
                }
                Extrapolation::Unknown => {}
            }
            rep.budget = Some(*r);
        }
        Err(e) => return Err(e),
    }
    Ok(rep)
}
