//! Partitions of `[1/ρ0, ρ0]` into cells `[a_i, a_{i+1})`.

use serde::{Deserialize, Serialize};

use super::coverage::{covers, exact_cmp, required_coverage};
use super::subsequence::SubsequenceSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalCase {
    /// `a_{N0+1} = ρ0`: the last cell is the single point `ρ0`.
    Exact,
    /// `a_{N0+1} < ρ0` and `a_{N0+2} = ρ0` is appended.
    Appended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `a_{i+1} - a_i = δ0 / μ_i`.
    Faithful,
    /// Per-cell steps chosen from the certified perturbation bound.
    Optimized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    #[serde(with = "crate::poly_core::json::dec_f64")]
    pub rho0: f64,
    #[serde(with = "crate::poly_core::json::dec_f64")]
    pub delta0: f64,
    pub points: Vec<f64>,
    pub n0: u64,
    pub final_case: FinalCase,
    pub step_rule: StepRule,
}

impl Partition {
    pub fn from_points(
        rho0: f64,
        delta0: f64,
        points: Vec<f64>,
        n0: u64,
        final_case: FinalCase,
        step_rule: StepRule,
    ) -> Result<Partition> {
        let p = Partition {
            rho0,
            delta0,
            points,
            n0,
            final_case,
            step_rule,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let pts = &self.points;
        if pts.is_empty() || pts[0] != 1.0 / self.rho0 || *pts.last().unwrap() != self.rho0 {
            return Err(Error::invalid("partition must run from 1/rho0 to rho0"));
        }
        if pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("partition points must increase strictly"));
        }
        Ok(())
    }

    /// Number of cells, counting the degenerate `{ρ0}` cell in the exact case.
    pub fn cell_count(&self) -> usize {
        match self.final_case {
            FinalCase::Exact => self.points.len(),
            FinalCase::Appended => self.points.len() - 1,
        }
    }

    /// `[a_i, a_{i+1}]` for cell `i` (0-based); the exact-case final cell is
    /// `[ρ0, ρ0]`.
    pub fn cell(&self, i: usize) -> (f64, f64) {
        let lo = self.points[i];
        let hi = self.points.get(i + 1).copied().unwrap_or(lo);
        (lo, hi)
    }

    pub fn final_index(&self) -> usize {
        self.cell_count() - 1
    }
}

/// `a_1 = 1/ρ0`, `a_{i+1} = a_i + δ0/μ_i` up to `a_{N0+1}`, then `ρ0`
/// appended when `a_{N0+1} < ρ0`.
pub fn partition_points(sub: &mut SubsequenceSpec, delta0: f64, rho0: f64, n0: u64) -> Result<Partition> {
    let n = n0 as usize;
    sub.ensure(n + 1)?;
    if covers(sub, n, delta0, rho0)? || !covers(sub, n + 1, delta0, rho0)? {
        return Err(Error::invalid(format!("N0 = {n0} is not the coverage index for these parameters")));
    }
    let start = 1.0 / rho0;
    let mut points = Vec::with_capacity(n + 2);
    for i in 0..=n {
        points.push(start + delta0 * sub.prefix_sum(i)?);
    }
    let s = delta0 * sub.prefix_sum(n)?;
    let need = required_coverage(rho0);
    let exact_hit = (s - need).abs() <= 1e-12 * need && exact_cmp(&sub.terms()[..n], delta0, rho0).is_eq();
    let final_case = if exact_hit {
        *points.last_mut().unwrap() = rho0;
        FinalCase::Exact
    } else {
        if *points.last().unwrap() >= rho0 {
            // rounding pushed a_{N0+1} onto ρ0 although the exact sum is short
            points.pop();
        }
        points.push(rho0);
        FinalCase::Appended
    };
    Partition::from_points(rho0, delta0, points, n0, final_case, StepRule::Faithful)
}

/// The cell containing `λ` (0-based). `λ = ρ0` maps to the final cell.
pub fn locate_cell(p: &Partition, lambda: f64) -> Result<usize> {
    let first = p.points[0];
    if !(lambda >= first && lambda <= p.rho0) {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} outside [{first}, {}]",
            p.rho0
        )));
    }
    if lambda == p.rho0 {
        return Ok(p.final_index());
    }
    Ok(p.points.partition_point(|&a| a <= lambda) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::coverage::coverage_n0;
    use crate::sequences::spec::SequenceSpec;
    use crate::sequences::subsequence::extract_subsequence;

    fn example() -> Partition {
        // μ = 2, 4, 6 with δ0 = 2 steps exactly like μ = 1, 2, 3 with δ0 = 1
        let mut s = extract_subsequence(SequenceSpec::naturals(), 1).unwrap();
        let n0 = coverage_n0(&mut s, 2.0, 2.0, 100).unwrap();
        partition_points(&mut s, 2.0, 2.0, n0).unwrap()
    }

    #[test]
    fn exact_endpoint_case() {
        let p = example();
        assert_eq!(p.points, [0.5, 1.5, 2.0]);
        assert_eq!(p.final_case, FinalCase::Exact);
        assert_eq!(p.cell_count(), 3);
    }

    #[test]
    fn locate_examples() {
        let p = example();
        assert_eq!(locate_cell(&p, 1.7).unwrap(), 1);
        assert_eq!(locate_cell(&p, 0.5).unwrap(), 0);
        assert_eq!(locate_cell(&p, 2.0).unwrap(), 2);
        assert!(locate_cell(&p, 2.1).is_err());
        assert!(locate_cell(&p, 0.4).is_err());
    }

    #[test]
    fn appended_case_and_consistency() {
        let mut s = extract_subsequence(SequenceSpec::naturals(), 2).unwrap();
        let n0 = coverage_n0(&mut s, 0.3, 1.4, 1000).unwrap();
        let p = partition_points(&mut s, 0.3, 1.4, n0).unwrap();
        assert_eq!(p.final_case, FinalCase::Appended);
        assert_eq!(p.points.len() as u64, n0 + 2);
        assert_eq!(locate_cell(&p, 1.4).unwrap(), p.points.len() - 2);
        assert!(partition_points(&mut s, 0.3, 1.4, n0 + 1).is_err());
        if n0 > 0 {
            assert!(partition_points(&mut s, 0.3, 1.4, n0 - 1).is_err());
        }
    }
}
