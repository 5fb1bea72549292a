//! The operator `T_{n,λ}(f)(z) = λ^n f^(n)(λz)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dd::Dd;
use super::factorial::fact_ratio;
use super::polynomial::Polynomial;
use super::xnum::{XComplex, XFloat};
use crate::error::{Error, Result};

/// Order `n` and dilation `λ = modulus · e^{2πi phase}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub order: u64,
    pub modulus: f64,
    /// Phase in turns, `[0, 1)`, carried in double-double.
    pub phase: Dd,
}

impl OperatorSpec {
    pub fn new(order: u64, modulus: f64, phase: Dd) -> Result<OperatorSpec> {
        if order < 1 {
            return Err(Error::invalid("operator order must be at least 1"));
        }
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(Error::invalid(format!("dilation modulus must be positive, got {modulus}")));
        }
        let phase = phase.frac();
        Ok(OperatorSpec { order, modulus, phase })
    }

    pub fn real(order: u64, lambda: f64) -> Result<OperatorSpec> {
        OperatorSpec::new(order, lambda, Dd::ZERO)
    }

    pub fn from_complex(order: u64, lambda: Complex64) -> Result<OperatorSpec> {
        let turns = lambda.arg() / std::f64::consts::TAU;
        OperatorSpec::new(order, lambda.norm(), Dd::from_f64(turns))
    }

    pub fn dilation(&self) -> Dilation {
        Dilation { modulus: self.modulus, phase: self.phase }
    }

    pub fn lambda(&self) -> XComplex {
        XComplex::from_polar_ln(self.modulus.ln(), self.phase.to_f64())
    }

    /// `λ^j` computed in polar form.
    pub fn lambda_pow(&self, j: u64) -> XComplex {
        XComplex::from_polar_ln(j as f64 * self.modulus.ln(), self.phase.frac_mul(j))
    }
}

/// A non-zero complex dilation `modulus · e^{2πi phase}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dilation {
    pub modulus: f64,
    pub phase: Dd,
}

impl Dilation {
    pub fn real(lambda: f64) -> Dilation {
        assert!(lambda > 0.0 && lambda.is_finite(), "real dilation must be positive");
        Dilation { modulus: lambda, phase: Dd::ZERO }
    }

    pub fn new(modulus: f64, phase: Dd) -> Result<Dilation> {
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(Error::invalid(format!("dilation modulus must be positive, got {modulus}")));
        }
        Ok(Dilation { modulus, phase: phase.frac() })
    }

    pub fn from_complex(lambda: Complex64) -> Result<Dilation> {
        Dilation::new(lambda.norm(), Dd::from_f64(lambda.arg() / std::f64::consts::TAU))
    }

    pub fn is_real(&self) -> bool {
        self.phase.hi == 0.0 && self.phase.lo == 0.0
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, std::f64::consts::TAU * self.phase.to_f64())
    }
}

/// Coefficient route: `c'_k = λ^{n+k} (k+n)!/k! c_{k+n}`.
pub fn apply_op(spec: &OperatorSpec, f: &Polynomial) -> Polynomial {
    let n = spec.order as usize;
    let Some(deg) = f.degree() else {
        return Polynomial::zero();
    };
    if deg < n {
        return Polynomial::zero();
    }
    let out = (0..=deg - n)
        .map(|k| {
            let c = f.coeff(k + n);
            if c.is_zero() {
                return XComplex::ZERO;
            }
            let w = fact_ratio((k + n) as u64, k as u64);
            (c * spec.lambda_pow((k + n) as u64)).scale(w)
        })
        .collect();
    Polynomial::new(out)
}

/// Derivative route: differentiate `n` times, dilate, then scale by `λ^n`.
pub fn apply_op_by_derivatives(spec: &OperatorSpec, f: &Polynomial) -> Polynomial {
    let mut c: Vec<XComplex> = f.coeffs().to_vec();
    for _ in 0..spec.order {
        if c.is_empty() {
            break;
        }
        c = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &ck)| ck.scale(XFloat::from_f64(k as f64)))
            .collect();
    }
    let lam = spec.lambda();
    let mut pow = XComplex::ONE;
    for ck in c.iter_mut() {
        *ck = *ck * pow;
        pow = pow * lam;
    }
    let mut lam_n = XComplex::ONE;
    for _ in 0..spec.order {
        lam_n = lam_n * lam;
    }
    Polynomial::new(c.into_iter().map(|ck| ck * lam_n).collect())
}

/// Both routes, for cross-checking.
pub fn apply_op_both(spec: &OperatorSpec, f: &Polynomial) -> (Polynomial, Polynomial) {
    (apply_op_by_derivatives(spec, f), apply_op(spec, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Polynomial, b: &Polynomial, rel: f64) -> bool {
        let n = a.coeffs().len().max(b.coeffs().len());
        (0..n).all(|k| a.coeff(k).approx_eq(&b.coeff(k), rel))
    }

    #[test]
    fn identity_dilation_first_derivative() {
        let f = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        let g = apply_op(&OperatorSpec::real(1, 1.0).unwrap(), &f);
        assert!(close(&g, &Polynomial::from_real(&[0.0, 2.0]), 1e-15));
    }

    #[test]
    fn second_order_at_two() {
        // f = z^3/48, f'' = z/8, 4 * (2z)/8 = z
        let f = Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0 / 48.0]);
        let s = OperatorSpec::real(2, 2.0).unwrap();
        let (a, b) = apply_op_both(&s, &f);
        let z = Polynomial::from_real(&[0.0, 1.0]);
        assert!(close(&a, &z, 1e-14));
        assert!(close(&b, &z, 1e-14));
    }

    #[test]
    fn order_above_degree_vanishes() {
        let f = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        let s = OperatorSpec::real(3, 1.0).unwrap();
        assert!(apply_op(&s, &f).is_zero());
        assert!(apply_op_by_derivatives(&s, &f).is_zero());
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(OperatorSpec::real(0, 1.0).is_err());
        assert!(OperatorSpec::real(1, 0.0).is_err());
        assert!(OperatorSpec::real(1, -2.0).is_err());
    }

    #[test]
    fn phase_normalised() {
        let s = OperatorSpec::new(1, 1.0, Dd::from_f64(1.25)).unwrap();
        assert!((s.phase.to_f64() - 0.25).abs() < 1e-15);
    }
}
