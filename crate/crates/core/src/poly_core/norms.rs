//! Disk norms, evaluation and the metric of the space of entire functions.

use num_complex::Complex64;

use super::dd::Dd;
use super::polynomial::Polynomial;
use super::xnum::{XComplex, XFloat};

/// `Σ_k |c_k| R^k`, a rigorous majorant of the sup-norm on the closed disk.
pub fn upper_norm(f: &Polynomial, r: f64) -> XFloat {
    assert!(r > 0.0, "radius must be positive");
    let rx = XFloat::from_f64(r);
    let mut pow = XFloat::ONE;
    let mut acc = XFloat::ZERO;
    for c in f.coeffs() {
        if !c.is_zero() {
            acc = acc + c.norm() * pow;
        }
        pow = pow * rx;
    }
    acc
}

/// Horner evaluation in extended range.
pub fn eval(f: &Polynomial, z: Complex64) -> XComplex {
    eval_x(f, XComplex::from(z))
}

pub fn eval_x(f: &Polynomial, z: XComplex) -> XComplex {
    f.coeffs()
        .iter()
        .rev()
        .fold(XComplex::ZERO, |acc, &c| acc * z + c)
}

/// Largest `|f|` over `g` equispaced points of the circle `|z| = R`.
/// A lower bound for the sup-norm, used only for cross-checks.
pub fn grid_norm(f: &Polynomial, r: f64, g: usize) -> f64 {
    assert!(g >= 8, "grid must have at least 8 points");
    assert!(r > 0.0, "radius must be positive");
    let ln_r = r.ln();
    (0..g)
        .map(|j| {
            let t = Dd::from_ratio(j as i64, g as i64);
            let z = XComplex::from_polar_ln(ln_r, t.to_f64());
            eval_x(f, z).norm().to_f64()
        })
        .fold(0.0, f64::max)
}

/// The metric `Σ_n 2^{-n} ‖h‖_n / (1 + ‖h‖_n)` with `‖h‖_n` supplied by
/// `norm_at(n)`; truncated at the first `N` with `2^{-N} < tol`.
pub fn metric_with<F: Fn(f64) -> XFloat>(norm_at: F, tol: f64) -> f64 {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut n_terms = 1u32;
    while 0.5f64.powi(n_terms as i32) >= tol {
        n_terms += 1;
    }
    let mut sum = 0.0;
    for n in 1..=n_terms {
        let u = norm_at(n as f64);
        let q = if u.is_zero() {
            0.0
        } else {
            (u / (u + XFloat::ONE)).to_f64()
        };
        sum += 0.5f64.powi(n as i32) * q;
    }
    sum
}

/// `ρ(f, g)` with `upper_norm` standing in for the sup-norm on `D̄_n`.
pub fn metric_rho(f: &Polynomial, g: &Polynomial, tol: f64) -> f64 {
    let d = f - g;
    metric_with(|r| upper_norm(&d, r), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_upper_norm() {
        let f = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        assert_eq!(upper_norm(&f, 2.0).to_f64(), 4.0);
    }

    #[test]
    fn one_plus_z_on_unit_disk() {
        let f = Polynomial::from_real(&[1.0, 1.0]);
        assert_eq!(upper_norm(&f, 1.0).to_f64(), 2.0);
        let g = grid_norm(&f, 1.0, 360);
        assert!((1.9998..=2.0).contains(&g), "{g}");
    }

    #[test]
    fn one_minus_z_attained_at_minus_one() {
        let f = Polynomial::from_real(&[1.0, -1.0]);
        assert_eq!(upper_norm(&f, 1.0).to_f64(), 2.0);
        assert!((grid_norm(&f, 1.0, 64) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_norm_cases() {
        let z = Polynomial::from_real(&[0.0, 1.0]);
        assert!((grid_norm(&z, 3.0, 64) - 3.0).abs() < 1e-14);
        assert_eq!(grid_norm(&Polynomial::zero(), 5.0, 8), 0.0);
    }

    #[test]
    fn eval_cases() {
        let f = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let v = eval(&f, Complex64::new(0.0, 2.0)).to_complex64();
        assert!((v - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
        let g = Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0 / 48.0]);
        let w = eval(&g, Complex64::new(2.0, 0.0)).to_complex64();
        assert!((w.re - 1.0 / 6.0).abs() < 1e-15);
        assert!(eval(&Polynomial::zero(), Complex64::new(7.0, 1.0)).is_zero());
    }

    #[test]
    fn metric_constant_difference() {
        let one = Polynomial::from_real(&[1.0]);
        let r = metric_rho(&one, &Polynomial::zero(), 1e-12);
        assert!((r - 0.5).abs() < 1e-12);
        assert_eq!(metric_rho(&one, &one, 1e-12), 0.0);
    }
}
