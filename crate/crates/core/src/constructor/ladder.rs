//! Extra blocks anchored at one positive dilation, giving many certified
//! orders at that dilation for rotation transfer.

use serde::{Deserialize, Serialize};

use super::pipeline::persistence_bound;
use super::stage::StageCertificate;
use crate::blocks::{gap_floor, solve_block, PiFunction, SolutionBlock};
use crate::error::{Error, Result};
use crate::poly_core::Polynomial;
use crate::ROUNDING_SLACK;

pub const DEFAULT_LADDER_LEN: usize = 1024;
/// Distance of the first added order above the degree of `f`.
pub const DEFAULT_PERSISTENCE_OFFSET: u64 = 800;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub f: PiFunction,
    /// Indices in `f` of the added blocks.
    pub indices: Vec<usize>,
    pub lambda0: f64,
    /// Allowance granted to each certificate.
    pub consumed: Vec<f64>,
}

/// Appends `count` blocks `(m, λ0, p)` above `f` and charges their effect
/// to every certificate in `certs`.
pub fn witness_ladder(
    f: &PiFunction,
    certs: &mut [StageCertificate],
    p: &Polynomial,
    lambda0: f64,
    count: usize,
    offset: u64,
) -> Result<Ladder> {
    if count < 1 {
        return Err(Error::invalid("ladder needs at least one block"));
    }
    let probe = solve_block(1, lambda0, p)?;
    let mut all: Vec<SolutionBlock> = f.blocks().to_vec();
    all.push(probe);
    let n1 = gap_floor(f.q(), &all, f.r0()).max(f.n1());
    let last = f.blocks().last().map_or(0, |b| b.m0);
    let start = (f.max_degree() + offset).max(last + n1 + 1);
    let blocks: Vec<SolutionBlock> = (0..count as u64)
        .map(|v| solve_block(start + v * (n1 + 1), lambda0, p))
        .collect::<Result<_>>()?;
    let consumed: Vec<f64> = certs
        .iter()
        .map(|c| persistence_bound(c, &blocks).map(|x| x.to_f64_upper(ROUNDING_SLACK)))
        .collect::<Result<_>>()?;
    for (c, u) in certs.iter_mut().zip(&consumed) {
        c.perturbation_allowance += u;
        c.recompute_pass();
        if !c.pass {
            return Err(Error::MarginExhausted(format!("ladder consumes {u}, more than the surviving margin")));
        }
    }
    let first = f.len();
    let g = f.extend(blocks)?;
    Ok(Ladder {
        indices: (first..g.len()).collect(),
        f: g,
        lambda0,
        consumed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::pointwise_error;
    use crate::constructor::{build_stage, empty_base, plan_stage, verify_stage, StageParams};
    use crate::poly_core::Dilation;

    #[test]
    fn ladder_orders_and_errors() {
        let z = Polynomial::from_real(&[0.0, 1.0]);
        let base = empty_base(1.0625).unwrap();
        let plan = plan_stage(&StageParams::new(1, 1.01, z.clone(), 10, 0.25), &base).unwrap();
        let (f, cert) = build_stage(&plan, &base).unwrap();
        let mut certs = vec![cert];
        let lad = witness_ladder(&f, &mut certs, &z, 1.0, 16, DEFAULT_PERSISTENCE_OFFSET).unwrap();
        assert_eq!(lad.indices.len(), 16);
        assert!(lad.f.blocks()[lad.indices[0]].m0 >= f.max_degree() + DEFAULT_PERSISTENCE_OFFSET);
        for &i in &lad.indices {
            let e = pointwise_error(&lad.f, i, &Dilation::real(1.0), &z, 1.0, 8).total();
            assert!(e.to_f64() < 1e-3);
        }
        assert!(certs[0].perturbation_allowance > 0.0);
        assert!(verify_stage(&lad.f, &certs[0], 50).unwrap().pass);
    }
}
