//! Greedy gap subsequences: `μ_1 > M`, `μ_{n+1} - μ_n > M`.

use serde::{Deserialize, Serialize};

use super::spec::SequenceSpec;
use super::sum::NeumaierSum;
use crate::error::{Error, Result};

/// Memoised subsequence. Appending is single-writer (`&mut self`); readers
/// take a snapshot with [`SubsequenceSpec::terms`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsequenceSpec {
    base: SequenceSpec,
    gap: u64,
    /// Extra lower bound on `μ_1` (default 0).
    floor: u64,
    #[serde(skip)]
    terms: Vec<u64>,
    #[serde(skip)]
    prefix: Vec<NeumaierSum>,
    #[serde(skip)]
    next_pos: u64,
}

/// `μ_1 = ` first base term `> M`, then `μ_{n+1} = ` first base term `> μ_n + M`.
pub fn extract_subsequence(base: SequenceSpec, gap: u64) -> Result<SubsequenceSpec> {
    SubsequenceSpec::new(base, gap, 0)
}

impl SubsequenceSpec {
    pub fn new(base: SequenceSpec, gap: u64, floor: u64) -> Result<SubsequenceSpec> {
        if gap < 1 {
            return Err(Error::invalid("subsequence gap M must be at least 1"));
        }
        base.validate()?;
        Ok(SubsequenceSpec {
            base,
            gap,
            floor,
            terms: Vec::new(),
            prefix: vec![NeumaierSum::new()],
            next_pos: 1,
        })
    }

    pub fn base(&self) -> &SequenceSpec {
        &self.base
    }

    pub fn gap(&self) -> u64 {
        self.gap
    }

    pub fn floor(&self) -> u64 {
        self.floor
    }

    /// First base index `>= from` whose term exceeds `bound`.
    fn first_above(&self, bound: u64, from: u64) -> Option<(u64, u64)> {
        let guess = match &self.base {
            SequenceSpec::Affine { a, b } => {
                let need = bound as i128 - *b as i128;
                if need < 0 {
                    1
                } else {
                    (need / *a as i128 + 1) as u64
                }
            }
            SequenceSpec::Power { c } => {
                let r = (bound as f64).powf(1.0 / *c as f64).floor() as u64;
                r.saturating_sub(1).max(1)
            }
            SequenceSpec::Explicit { .. } => from,
        };
        let mut n = guess.max(from);
        loop {
            let t = self.base.term(n)?;
            if t > bound {
                return Some((n, t));
            }
            n += 1;
        }
    }

    /// Makes sure the first `n` terms are memoised.
    pub fn ensure(&mut self, n: usize) -> Result<()> {
        if self.prefix.is_empty() {
            self.prefix.push(NeumaierSum::new());
        }
        while self.terms.len() < n {
            let bound = match self.terms.last() {
                None => self.gap.max(self.floor),
                Some(&last) => last
                    .checked_add(self.gap)
                    .ok_or(Error::SequenceExhausted(self.terms.len()))?,
            };
            let (pos, t) = self
                .first_above(bound, self.next_pos.max(1))
                .ok_or(Error::SequenceExhausted(self.terms.len()))?;
            self.next_pos = pos + 1;
            self.terms.push(t);
            let mut s = *self.prefix.last().unwrap();
            s.add(1.0 / t as f64);
            self.prefix.push(s);
        }
        Ok(())
    }

    /// `μ_n`, 1-based.
    pub fn term(&mut self, n: usize) -> Result<u64> {
        assert!(n >= 1, "subsequence is indexed from 1");
        self.ensure(n)?;
        Ok(self.terms[n - 1])
    }

    /// `Σ_{j <= n} 1/μ_j`, compensated.
    pub fn prefix_sum(&mut self, n: usize) -> Result<f64> {
        self.ensure(n)?;
        Ok(self.prefix[n].value())
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    /// For affine bases the selected terms are exactly arithmetic:
    /// `μ_n = μ_1 + s (n - 1)` with `s = a (⌊M/a⌋ + 1)`.
    pub fn affine_step(&self) -> Option<u64> {
        match self.base {
            SequenceSpec::Affine { a, .. } => Some(a * (self.gap / a + 1)),
            SequenceSpec::Power { c: 1 } => Some(self.gap + 1),
            _ => None,
        }
    }
}
