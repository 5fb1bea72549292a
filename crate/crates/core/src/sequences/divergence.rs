//! Partial sums of `Σ 1/k_n` and, for closed forms, whether the series diverges.

use serde::{Deserialize, Serialize};

use super::spec::SequenceSpec;
use super::sum::NeumaierSum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Divergent,
    Convergent { limit_bound: f64 },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub sequence: String,
    pub cap: u64,
    /// `(n, Σ_{m<=n} 1/k_m)` at powers of ten and at the last term reached.
    pub partial_sums: Vec<(u64, f64)>,
    pub classification: Classification,
}

/// `ζ(c)` from above: `Σ_{n<=K} n^{-c} + K^{1-c}/(c-1)`.
pub fn zeta_upper(c: u32) -> f64 {
    let k = 100_000u64;
    let s: NeumaierSum = (1..=k).map(|n| (n as f64).powi(-(c as i32))).collect();
    s.value() + (k as f64).powf(1.0 - c as f64) / (c as f64 - 1.0)
}

pub fn divergence_report(base: &SequenceSpec, cap: u64) -> DivergenceReport {
    assert!(cap >= 1, "cap must be at least 1");
    let mut sum = NeumaierSum::new();
    let mut partial = Vec::new();
    let mut next_mark = 1u64;
    let mut last = 0u64;
    for (i, k) in base.iter().take(cap as usize).enumerate() {
        let n = i as u64 + 1;
        sum.add(1.0 / k as f64);
        last = n;
        if n == next_mark {
            partial.push((n, sum.value()));
            next_mark = next_mark.saturating_mul(10);
        }
    }
    if partial.last().map(|p| p.0) != Some(last) && last > 0 {
        partial.push((last, sum.value()));
    }
    let classification = match base.exponent() {
        Some(1) => Classification::Divergent,
        Some(c) => Classification::Convergent { limit_bound: zeta_upper(c) },
        None => Classification::Unknown,
    };
    DivergenceReport {
        sequence: base.to_string(),
        cap,
        partial_sums: partial,
        classification,
    }
}
