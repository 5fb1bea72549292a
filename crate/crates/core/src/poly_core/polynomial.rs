use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use super::dd::Dd;
use super::xnum::{XComplex, XFloat};

/// Dense polynomial with extended-range complex coefficients; index = power.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<XComplex>,
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn new(mut coeffs: Vec<XComplex>) -> Polynomial {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_real(c: &[f64]) -> Polynomial {
        Polynomial::new(c.iter().map(|&x| XComplex::new(x, 0.0)).collect())
    }

    pub fn from_complex(c: &[Complex64]) -> Polynomial {
        Polynomial::new(c.iter().map(|&x| XComplex::from(x)).collect())
    }

    pub fn constant(c: XComplex) -> Polynomial {
        Polynomial::new(vec![c])
    }

    pub fn monomial(k: usize, c: XComplex) -> Polynomial {
        let mut v = vec![XComplex::ZERO; k + 1];
        v[k] = c;
        Polynomial::new(v)
    }

    pub fn coeffs(&self) -> &[XComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> XComplex {
        self.coeffs.get(k).copied().unwrap_or(XComplex::ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn degree_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn lowest_power(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Non-zero terms `(power, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, XComplex)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, *c))
    }

    /// `max_j |β_j|`.
    pub fn max_abs_coeff(&self) -> XFloat {
        self.coeffs
            .iter()
            .map(|c| c.norm())
            .fold(XFloat::ZERO, XFloat::max)
    }

    pub fn scale(&self, s: XComplex) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `p(e^{2πiθ} z)`, multiplying coefficient `k` by `e^{2πiθk}`.
    pub fn rotate(&self, theta: Dd) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * XComplex::from_polar_ln(0.0, theta.frac_mul(k as u64)))
                .collect(),
        )
    }

    pub fn to_sparse(&self) -> SparsePoly {
        SparsePoly::from_terms(self.terms().map(|(k, c)| (k as u64, c)).collect())
    }

    pub fn to_complex64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.to_complex64()).collect()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·z")?,
                _ => write!(f, "{c}·z^{k}")?,
            }
        }
        Ok(())
    }
}

/// Sparse polynomial: sorted, merged `(power, coefficient)` pairs with no
/// zero coefficients. Block images at huge orders live here.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparsePoly {
    terms: Vec<(u64, XComplex)>,
}

impl SparsePoly {
    pub fn zero() -> SparsePoly {
        SparsePoly { terms: Vec::new() }
    }

    pub fn from_terms(mut terms: Vec<(u64, XComplex)>) -> SparsePoly {
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(u64, XComplex)> = Vec::with_capacity(terms.len());
        for (k, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == k => last.1 = last.1 + c,
                _ => out.push((k, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        SparsePoly { terms: out }
    }

    pub fn terms(&self) -> &[(u64, XComplex)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.last().map(|t| t.0)
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        let mut t = self.terms.clone();
        t.extend_from_slice(&other.terms);
        SparsePoly::from_terms(t)
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        let mut t = self.terms.clone();
        t.extend(other.terms.iter().map(|&(k, c)| (k, -c)));
        SparsePoly::from_terms(t)
    }

    /// `Σ |c_k| R^k`.
    pub fn upper_norm(&self, r: f64) -> XFloat {
        assert!(r > 0.0, "radius must be positive");
        let ln_r = r.ln();
        self.terms
            .iter()
            .map(|&(k, c)| c.norm() * XFloat::from_ln(k as f64 * ln_r))
            .sum()
    }

    /// Evaluation at `z = r e^{2πi t}` given as polar data.
    pub fn eval_polar(&self, r: f64, turns: Dd) -> XComplex {
        let ln_r = if r > 0.0 { r.ln() } else { f64::NEG_INFINITY };
        self.terms
            .iter()
            .map(|&(k, c)| {
                if k == 0 {
                    c
                } else {
                    c * XComplex::from_polar_ln(k as f64 * ln_r, turns.frac_mul(k))
                }
            })
            .sum()
    }

    /// Dense form; callers are responsible for keeping the degree modest.
    pub fn to_dense(&self) -> Polynomial {
        let n = self.degree().map_or(0, |d| d as usize + 1);
        let mut v = vec![XComplex::ZERO; n];
        for &(k, c) in &self.terms {
            v[k as usize] = c;
        }
        Polynomial::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_canonical() {
        let p = Polynomial::from_real(&[0.0, 0.0, 0.0]);
        assert!(p.is_zero());
        assert_eq!(p, Polynomial::zero());
        assert_eq!(p.degree(), None);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Polynomial::from_real(&[1.0, 2.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        let q = &p - &Polynomial::from_real(&[0.0, 2.0]);
        assert_eq!(q.degree(), Some(0));
    }

    #[test]
    fn sparse_merges_and_drops() {
        let s = SparsePoly::from_terms(vec![
            (5, XComplex::new(1.0, 0.0)),
            (2, XComplex::new(2.0, 0.0)),
            (5, XComplex::new(-1.0, 0.0)),
        ]);
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.degree(), Some(2));
    }

    #[test]
    fn rotation_by_quarter_turn() {
        // p = z, rotated by 1/4 turn gives i z
        let p = Polynomial::from_real(&[0.0, 1.0]);
        let q = p.rotate(Dd::from_ratio(1, 4));
        let c = q.coeff(1).to_complex64();
        assert!(c.re.abs() < 1e-15 && (c.im - 1.0).abs() < 1e-15);
    }
}
