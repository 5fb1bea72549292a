//! A fixed enumeration `p_1, p_2, ...` of the non-zero polynomials with
//! Gaussian-rational coefficients.
//!
//! Order, outermost first:
//! 1. level `L = deg + H`, where `H` is the largest coefficient height and
//!    the height of `a/b` (lowest terms) is `max(|a|, b)`, with `h(0) = 1`;
//!    the height of `x + iy` is `max(h(x), h(y))`;
//! 2. degree, ascending;
//! 3. coefficient tuples `(c_0, ..., c_d)` lexicographically, `c_0` most
//!    significant, each coefficient ranked in the list below.
//!
//! Rationals are ranked by height, then `|value|`, then positive first.
//! Gaussian rationals are ranked by height, then the rank of the imaginary
//! part, then the rank of the real part. So the list starts
//! `0, 1, -1, i, 1+i, -1+i, -i, ...` and `p_1 = 1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::poly_core::exact::{ExactPolynomial, GaussianRational};

fn rationals_of_height(h: u64) -> Vec<BigRational> {
    if h == 1 {
        return vec![BigRational::zero(), BigRational::from_integer(1.into()), BigRational::from_integer((-1).into())];
    }
    let mut pos: Vec<BigRational> = Vec::new();
    for a in 1..h {
        if a.gcd(&h) == 1 {
            pos.push(BigRational::new(BigInt::from(a), BigInt::from(h)));
            pos.push(BigRational::new(BigInt::from(h), BigInt::from(a)));
        }
    }
    pos.sort();
    pos.into_iter().flat_map(|q| [q.clone(), -q]).collect()
}

/// Gaussian rationals of height at most `h`, in rank order.
fn gaussians_up_to(h: u64) -> Vec<GaussianRational> {
    let mut rats: Vec<BigRational> = Vec::new();
    let mut out = Vec::new();
    for level in 1..=h {
        let start = rats.len();
        rats.extend(rationals_of_height(level));
        for (iy, y) in rats.iter().enumerate() {
            for (ix, x) in rats.iter().enumerate() {
                if ix >= start || iy >= start {
                    out.push(GaussianRational::new(x.clone(), y.clone()));
                }
            }
        }
    }
    out
}

fn gaussian_count(h: u64) -> u128 {
    if h == 0 {
        0
    } else {
        gaussians_up_to(h).len() as u128
    }
}

/// Number of polynomials with degree exactly `d` and height exactly `h`.
fn block_count(d: u64, h: u64) -> u128 {
    let g = gaussian_count(h);
    let gp = gaussian_count(h - 1);
    let full = g.saturating_pow(d as u32).saturating_mul(g - 1);
    let lower = if gp == 0 { 0 } else { gp.saturating_pow(d as u32).saturating_mul(gp - 1) };
    full.saturating_sub(lower)
}

/// Sequential enumerator over `p_1, p_2, ...`.
pub struct TargetEnumerator {
    level: u64,
    degree: u64,
    list: Vec<GaussianRational>,
    below: usize,
    idx: Vec<usize>,
    fresh: bool,
}

impl Default for TargetEnumerator {
    fn default() -> Self {
        TargetEnumerator::new()
    }
}

impl TargetEnumerator {
    pub fn new() -> Self {
        let mut e = TargetEnumerator {
            level: 1,
            degree: 0,
            list: Vec::new(),
            below: 0,
            idx: Vec::new(),
            fresh: true,
        };
        e.enter_block();
        e
    }

    fn enter_block(&mut self) {
        let h = self.level - self.degree;
        self.list = gaussians_up_to(h);
        self.below = if h > 1 { gaussians_up_to(h - 1).len() } else { 0 };
        self.idx = vec![0; self.degree as usize + 1];
        self.fresh = true;
    }

    fn next_block(&mut self) {
        if self.degree + 1 < self.level {
            self.degree += 1;
        } else {
            self.level += 1;
            self.degree = 0;
        }
        self.enter_block();
    }

    fn advance(&mut self) -> bool {
        let g = self.list.len();
        for k in (0..self.idx.len()).rev() {
            self.idx[k] += 1;
            if self.idx[k] < g {
                return true;
            }
            self.idx[k] = 0;
        }
        false
    }

    fn accept(&self) -> bool {
        *self.idx.last().unwrap() != 0 && self.idx.iter().any(|&i| i >= self.below)
    }

    /// Skips `n` polynomials, jumping over whole `(degree, height)` blocks.
    fn skip_n(&mut self, mut n: u128) {
        while self.fresh && n > 0 {
            let c = block_count(self.degree, self.level - self.degree);
            if n < c {
                break;
            }
            n -= c;
            self.next_block();
        }
        for _ in 0..n {
            self.next();
        }
    }
}

impl Iterator for TargetEnumerator {
    type Item = ExactPolynomial;

    fn next(&mut self) -> Option<ExactPolynomial> {
        loop {
            let moved = if self.fresh {
                self.fresh = false;
                true
            } else {
                self.advance()
            };
            if !moved {
                self.next_block();
                continue;
            }
            if self.accept() {
                return Some(ExactPolynomial::new(self.idx.iter().map(|&i| self.list[i].clone()).collect()));
            }
        }
    }
}

/// `p_j`, 1-based.
pub fn enumerate_targets(j: u64) -> ExactPolynomial {
    assert!(j >= 1, "targets are indexed from 1");
    let mut e = TargetEnumerator::new();
    e.skip_n(j as u128 - 1);
    e.next().expect("enumeration is infinite")
}
