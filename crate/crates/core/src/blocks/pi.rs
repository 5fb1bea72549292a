//! `Π = Q + Σ f_i`, a base polynomial plus solution blocks with gapped orders.

use serde::{Deserialize, Serialize};

use super::block::{SolutionBlock, MATERIALIZE_LIMIT};
use crate::error::{Error, Result};
use crate::poly_core::factorial::ln_factorial;
use crate::poly_core::{upper_norm, Polynomial, XFloat};

/// Minimal `v0` with `exp(ln_c) (2R)^v / v! < 1` for every `v >= v0`.
///
/// Scans forward until the sequence is below one and already decreasing,
/// then reports one past the last offending index.
pub fn gamma_threshold(ln_c: f64, r: f64) -> u64 {
    let ln_2r = (2.0 * r).ln();
    let mut last_bad = 0u64;
    let mut v = 1u64;
    loop {
        let ln_g = ln_c + v as f64 * ln_2r - ln_factorial(v);
        if ln_g >= 0.0 {
            last_bad = v;
        } else if 2.0 * r <= (v + 1) as f64 {
            return last_bad + 1;
        }
        v += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiFunction {
    #[serde(rename = "Q")]
    q: Polynomial,
    blocks: Vec<SolutionBlock>,
    #[serde(rename = "R0", with = "crate::poly_core::json::dec_f64")]
    r0: f64,
    #[serde(rename = "N1")]
    n1: u64,
    #[serde(skip)]
    cache: Cache,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Cache {
    /// `suffix_min[i] = min_{j >= i} λ0_j`.
    suffix_min: Vec<f64>,
    /// Start indices of maximal runs of non-decreasing anchors.
    segments: Vec<usize>,
    /// Per segment, `max ln(M0 ℓ0!)` over its blocks.
    segment_ln_c: Vec<f64>,
}

/// `N1 = max{N0', deg Q, ℓ0} + 1` over all block targets.
pub fn gap_floor(q: &Polynomial, blocks: &[SolutionBlock], r0: f64) -> u64 {
    let mut m = q.degree_or_zero() as u64;
    let mut seen: Vec<(f64, u64)> = Vec::new();
    for b in blocks {
        let key = (b.ln_tail_constant(), b.ell0());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        m = m.max(gamma_threshold(key.0, r0)).max(key.1);
    }
    m + 1
}

/// Validates the gap hypothesis and builds `Π`.
pub fn assemble_pi(q: Polynomial, blocks: Vec<SolutionBlock>, r0: f64) -> Result<PiFunction> {
    if !(r0 > 1.0) {
        return Err(Error::invalid(format!("R0 must exceed 1, got {r0}")));
    }
    let n1 = gap_floor(&q, &blocks, r0);
    PiFunction::with_floor(q, blocks, r0, n1)
}

impl PiFunction {
    /// Builds `Π` with a given gap floor, which must be at least the one
    /// [`gap_floor`] computes.
    pub fn with_floor(q: Polynomial, blocks: Vec<SolutionBlock>, r0: f64, n1: u64) -> Result<PiFunction> {
        let need = gap_floor(&q, &blocks, r0);
        if n1 < need {
            return Err(Error::invalid(format!("gap floor {n1} below required {need}")));
        }
        if let Some(first) = blocks.first() {
            if q.degree().is_some_and(|d| d as u64 >= first.m0) {
                return Err(Error::DegreeViolation(format!(
                    "deg Q = {} is not below m1 = {}",
                    q.degree_or_zero(),
                    first.m0
                )));
            }
            if first.m0 <= n1 {
                return Err(Error::GapViolation(format!("m1 = {} is not above N1 = {n1}", first.m0)));
            }
        }
        for (i, w) in blocks.windows(2).enumerate() {
            if w[1].m0 <= w[0].m0 || w[1].m0 - w[0].m0 <= n1 {
                return Err(Error::GapViolation(format!(
                    "orders m{} = {}, m{} = {} leave a gap of at most N1 = {n1}",
                    i + 1,
                    w[0].m0,
                    i + 2,
                    w[1].m0
                )));
            }
        }
        let mut pi = PiFunction {
            q,
            blocks,
            r0,
            n1,
            cache: Cache::default(),
        };
        pi.rebuild_cache();
        Ok(pi)
    }

    fn rebuild_cache(&mut self) {
        let n = self.blocks.len();
        let mut suffix_min = vec![f64::INFINITY; n + 1];
        for i in (0..n).rev() {
            suffix_min[i] = suffix_min[i + 1].min(self.blocks[i].lambda0);
        }
        let mut segments = Vec::new();
        for i in 0..n {
            if i == 0 || self.blocks[i].lambda0 < self.blocks[i - 1].lambda0 {
                segments.push(i);
            }
        }
        let segment_ln_c = segments
            .iter()
            .enumerate()
            .map(|(s, &start)| {
                let end = segments.get(s + 1).copied().unwrap_or(n);
                self.blocks[start..end]
                    .iter()
                    .map(|b| b.ln_tail_constant())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        self.cache = Cache {
            suffix_min,
            segments,
            segment_ln_c,
        };
    }

    /// Re-derives caches after deserialisation and re-validates.
    pub fn revalidated(self) -> Result<PiFunction> {
        PiFunction::with_floor(self.q, self.blocks, self.r0, self.n1)
    }

    pub fn q(&self) -> &Polynomial {
        &self.q
    }

    pub fn blocks(&self) -> &[SolutionBlock] {
        &self.blocks
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `min_{j >= i} λ0_j`, infinite past the end.
    pub fn suffix_min_anchor(&self, i: usize) -> f64 {
        self.cache.suffix_min.get(i).copied().unwrap_or(f64::INFINITY)
    }

    /// `(start, end, ln C)` for the anchor-monotone segment containing `i`.
    pub fn segment_of(&self, i: usize) -> (usize, usize, f64) {
        let segs = &self.cache.segments;
        let s = segs.partition_point(|&st| st <= i) - 1;
        let end = segs.get(s + 1).copied().unwrap_or(self.blocks.len());
        (segs[s], end, self.cache.segment_ln_c[s])
    }

    pub fn max_degree(&self) -> u64 {
        let qd = self.q.degree_or_zero() as u64;
        self.blocks.iter().map(|b| b.degree()).max().unwrap_or(0).max(qd)
    }

    /// Index of the block with operator order `m`.
    pub fn index_of_order(&self, m: u64) -> Option<usize> {
        self.blocks.binary_search_by_key(&m, |b| b.m0).ok()
    }

    /// `Σ_i ‖f_i‖` on `D̄_r` (the blocks only, without `Q`).
    pub fn blocks_upper_norm(&self, r: f64) -> XFloat {
        self.blocks.iter().map(|b| b.upper_norm(r)).sum()
    }

    /// `‖Π‖` upper bound on `D̄_r`.
    pub fn upper_norm(&self, r: f64) -> XFloat {
        upper_norm(&self.q, r) + self.blocks_upper_norm(r)
    }

    /// Appends blocks, re-validating the gap hypothesis.
    pub fn extend(&self, more: Vec<SolutionBlock>) -> Result<PiFunction> {
        let mut blocks = self.blocks.clone();
        blocks.extend(more);
        let n1 = gap_floor(&self.q, &blocks, self.r0).max(self.n1);
        PiFunction::with_floor(self.q.clone(), blocks, self.r0, n1)
    }

    pub fn materialize(&self) -> Result<Polynomial> {
        let d = self.max_degree();
        if d > MATERIALIZE_LIMIT {
            return Err(Error::MaterializationLimit(d));
        }
        let mut acc = self.q.clone();
        for b in &self.blocks {
            acc = &acc + &b.materialize()?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::block::solve_block;

    fn one() -> Polynomial {
        Polynomial::from_real(&[1.0])
    }

    #[test]
    fn threshold_for_constant_target() {
        // 2.4^v / v!: 2.4, 2.88, 2.30, 1.38, 0.66, ... so N0' = 5
        assert_eq!(gamma_threshold(0.0, 1.2), 5);
        let b = solve_block(20, 1.0, &one()).unwrap();
        let pi = assemble_pi(Polynomial::zero(), vec![b], 1.2).unwrap();
        assert_eq!(pi.n1(), 6);
        assert_eq!(pi.len(), 1);
    }

    #[test]
    fn degree_violation() {
        let q = Polynomial::monomial(25, crate::XComplex::ONE);
        let b = solve_block(20, 1.0, &one()).unwrap();
        assert!(matches!(assemble_pi(q, vec![b], 1.2), Err(Error::DegreeViolation(_))));
    }

    #[test]
    fn gap_violation() {
        let bs = vec![solve_block(20, 1.0, &one()).unwrap(), solve_block(25, 1.1, &one()).unwrap()];
        assert!(matches!(assemble_pi(Polynomial::zero(), bs, 1.2), Err(Error::GapViolation(_))));
        let bs = vec![solve_block(5, 1.0, &one()).unwrap()];
        assert!(matches!(assemble_pi(Polynomial::zero(), bs, 1.2), Err(Error::GapViolation(_))));
    }

    #[test]
    fn segments_follow_anchor_runs() {
        let p = one();
        let bs = vec![
            solve_block(10, 0.9, &p).unwrap(),
            solve_block(20, 1.0, &p).unwrap(),
            solve_block(30, 0.95, &p).unwrap(),
            solve_block(40, 0.95, &p).unwrap(),
        ];
        let pi = assemble_pi(Polynomial::zero(), bs, 1.2).unwrap();
        assert_eq!(pi.segment_of(1).0, 0);
        assert_eq!(pi.segment_of(1).1, 2);
        assert_eq!(pi.segment_of(3), (2, 4, 0.0));
        assert_eq!(pi.suffix_min_anchor(1), 0.95);
        assert_eq!(pi.index_of_order(30), Some(2));
    }

    #[test]
    fn json_round_trip() {
        let bs = vec![solve_block(10, 0.9, &one()).unwrap(), solve_block(20, 1.0, &one()).unwrap()];
        let pi = assemble_pi(Polynomial::zero(), bs, 1.2).unwrap();
        let s = serde_json::to_string(&pi).unwrap();
        assert!(s.contains("\"N1\":6") && s.contains("\"R0\":\"1.2\""));
        let back: PiFunction = serde_json::from_str(&s).unwrap();
        let back = back.revalidated().unwrap();
        assert_eq!(back, pi);
    }
}
