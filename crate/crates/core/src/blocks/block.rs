//! Solution blocks: the polynomial `f` with `T_{m0,λ0}(f) = p`,
//! `f(z) = Σ_j j!/(j+m0)! · β_j / λ0^{j+m0} · z^{j+m0}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly_core::exact::{ExactPolynomial, GaussianRational};
use crate::poly_core::factorial::{ln_fact_ratio, ln_factorial};
use crate::poly_core::{upper_norm, Dilation, Polynomial, SparsePoly, XComplex, XFloat};

/// Degrees above this are never expanded into dense coefficient vectors.
pub const MATERIALIZE_LIMIT: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionBlock {
    pub m0: u64,
    #[serde(with = "crate::poly_core::json::dec_f64")]
    pub lambda0: f64,
    pub target: Polynomial,
}

/// `e^{a + 2πi t} - 1` without cancellation near zero.
pub(crate) fn expm1_polar(a: f64, turns: f64) -> XComplex {
    if a > 700.0 {
        return XComplex::from_polar_ln(a, turns) - XComplex::ONE;
    }
    let t = turns - turns.round();
    let b = std::f64::consts::TAU * t;
    let em = a.exp_m1();
    let (s, c) = b.sin_cos();
    let half = (0.5 * b).sin();
    let cosm1 = -2.0 * half * half;
    XComplex::new(em * c + cosm1, a.exp() * s)
}

pub fn solve_block(m0: u64, lambda0: f64, p: &Polynomial) -> Result<SolutionBlock> {
    if m0 < 1 {
        return Err(Error::invalid("block order m0 must be at least 1"));
    }
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::invalid(format!("anchor lambda0 must be positive, got {lambda0}")));
    }
    if p.is_zero() {
        return Err(Error::ZeroTarget);
    }
    Ok(SolutionBlock {
        m0,
        lambda0,
        target: p.clone(),
    })
}

/// Exact counterpart of [`solve_block`], for rational anchors.
pub fn solve_block_exact(m0: u64, lambda0: &BigRational, p: &ExactPolynomial) -> Result<ExactPolynomial> {
    if p.is_zero() {
        return Err(Error::ZeroTarget);
    }
    if *lambda0 <= BigRational::from_integer(0.into()) {
        return Err(Error::invalid("anchor lambda0 must be positive"));
    }
    let deg = p.degree().unwrap_or(0);
    let mut coeffs = vec![GaussianRational::zero(); deg + m0 as usize + 1];
    let inv = GaussianRational::real(BigRational::one() / lambda0);
    let mut inv_pow = inv.pow(m0);
    // j!/(j+m0)! built up incrementally from 1/m0!
    let mut ratio = BigRational::new(BigInt::one(), crate::poly_core::factorial::big_factorial(m0));
    for j in 0..=deg {
        let w = GaussianRational::real(ratio.clone());
        coeffs[j + m0 as usize] = &(&w * &inv_pow) * &p.coeff(j);
        inv_pow = &inv_pow * &inv;
        ratio *= BigRational::new(BigInt::from(j + 1), BigInt::from(j as u64 + 1 + m0));
    }
    Ok(ExactPolynomial::new(coeffs))
}

impl SolutionBlock {
    /// `ℓ0 = deg p`.
    pub fn ell0(&self) -> u64 {
        self.target.degree_or_zero() as u64
    }

    /// `N0 = m0 + ℓ0`.
    pub fn degree(&self) -> u64 {
        self.m0 + self.ell0()
    }

    /// `M0 = max |β_j|`.
    pub fn beta_max(&self) -> XFloat {
        self.target.max_abs_coeff()
    }

    /// `ln(M0 · ℓ0!)`, the constant in the factorial tail estimates.
    pub fn ln_tail_constant(&self) -> f64 {
        self.beta_max().ln() + ln_factorial(self.ell0())
    }

    /// Closed-form coefficients as `(power, ln|c|, phase in turns)`.
    pub fn closed_form(&self) -> Vec<(u64, f64, f64)> {
        let ln_l = self.lambda0.ln();
        self.target
            .terms()
            .map(|(j, b)| {
                let j = j as u64;
                let e = j + self.m0;
                (e, b.ln_abs() + ln_fact_ratio(j, e) - e as f64 * ln_l, b.arg_turns().rem_euclid(1.0))
            })
            .collect()
    }

    pub fn coeff_terms(&self) -> SparsePoly {
        let ln_l = self.lambda0.ln();
        SparsePoly::from_terms(
            self.target
                .terms()
                .map(|(j, b)| {
                    let j = j as u64;
                    let e = j + self.m0;
                    let w = XFloat::from_ln(ln_fact_ratio(j, e) - e as f64 * ln_l);
                    (e, b.scale(w))
                })
                .collect(),
        )
    }

    pub fn materialize(&self) -> Result<Polynomial> {
        if self.degree() > MATERIALIZE_LIMIT {
            return Err(Error::MaterializationLimit(self.degree()));
        }
        Ok(self.coeff_terms().to_dense())
    }

    /// `Σ |c| r^e` over the block's own coefficients.
    pub fn upper_norm(&self, r: f64) -> XFloat {
        self.coeff_terms().upper_norm(r)
    }

    /// `T_{m,λ}(f)` as sparse terms: `k! β_k (λ/λ0)^{k+m0} / (k+m0-m)!` at
    /// power `k+m0-m`.
    pub fn image_sparse(&self, m: u64, lambda: &Dilation) -> SparsePoly {
        let ln_ratio = (lambda.modulus / self.lambda0).ln();
        SparsePoly::from_terms(
            self.target
                .terms()
                .filter_map(|(k, b)| {
                    let k = k as u64;
                    let e = k + self.m0;
                    if e < m {
                        return None;
                    }
                    let d = e - m;
                    let c = XComplex::from_polar_ln(
                        e as f64 * ln_ratio + ln_fact_ratio(k, d),
                        lambda.phase.frac_mul(e),
                    );
                    Some((d, b * c))
                })
                .collect(),
        )
    }

    /// Upper norm of `T_{m,λ}(f)` on `D̄_r`, computed in log space.
    pub fn image_upper_norm(&self, m: u64, lambda_abs: f64, r: f64) -> XFloat {
        let ln_ratio = (lambda_abs / self.lambda0).ln();
        let ln_r = r.ln();
        self.target
            .terms()
            .filter_map(|(k, b)| {
                let k = k as u64;
                let e = k + self.m0;
                (e >= m).then(|| {
                    let d = e - m;
                    b.norm()
                        * XFloat::from_ln(e as f64 * ln_ratio + ln_fact_ratio(k, d) + d as f64 * ln_r)
                })
            })
            .sum()
    }

    /// `‖T_{m0,λ}(f) - p‖` on `D̄_r` for the block's own order and target,
    /// i.e. `Σ |β_k| |(λ/λ0)^{k+m0} - 1| r^k`.
    pub fn anchor_deviation(&self, lambda: &Dilation, r: f64) -> XFloat {
        let ln_ratio = (lambda.modulus / self.lambda0).ln();
        let ln_r = r.ln();
        self.target
            .terms()
            .map(|(k, b)| {
                let e = k as u64 + self.m0;
                let dev = expm1_polar(e as f64 * ln_ratio, lambda.phase.frac_mul(e));
                b.norm() * dev.norm() * XFloat::from_ln(k as f64 * ln_r)
            })
            .sum()
    }
}

/// Dense `T_{m,λ}(f)`; rejects `λ = 0`.
pub fn block_image(block: &SolutionBlock, m: u64, lambda: num_complex::Complex64) -> Result<Polynomial> {
    if lambda.norm() == 0.0 {
        return Err(Error::invalid("dilation must be non-zero"));
    }
    let d = Dilation::from_complex(lambda)?;
    let img = block.image_sparse(m, &d);
    if img.degree().unwrap_or(0) > MATERIALIZE_LIMIT {
        return Err(Error::MaterializationLimit(img.degree().unwrap_or(0)));
    }
    Ok(img.to_dense())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityInterval {
    pub lo: f64,
    pub hi: f64,
    pub m0_norm: f64,
    pub m1: f64,
    pub n0: u64,
}

impl StabilityInterval {
    /// Half-open membership `lo <= λ < hi`.
    pub fn contains(&self, lambda: f64) -> bool {
        self.lo <= lambda && lambda < self.hi
    }
}

/// `[λ0, λ0 (1 + ε0/M1)^{1/N0})` with `M1 = M0 Σ_{j≤ℓ0} R0^j`.
pub fn stability_interval(block: &SolutionBlock, eps0: f64, r0: f64) -> Result<StabilityInterval> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::InvalidEps(eps0));
    }
    if !(r0 > 1.0) {
        return Err(Error::invalid(format!("R0 must exceed 1, got {r0}")));
    }
    let m0n = block.beta_max().to_f64();
    let geo: f64 = (0..=block.ell0()).map(|j| r0.powi(j as i32)).sum();
    let m1 = m0n * geo;
    let n0 = block.degree();
    let hi = block.lambda0 * ((eps0 / m1).ln_1p() / n0 as f64).exp();
    Ok(StabilityInterval {
        lo: block.lambda0,
        hi,
        m0_norm: m0n,
        m1,
        n0,
    })
}

/// Upper norm of the difference `T_{m0,λ0}(f) - T_{m0,λ}(f)`.
pub fn stability_deviation(block: &SolutionBlock, lambda: f64, r0: f64) -> XFloat {
    block.anchor_deviation(&Dilation::real(lambda), r0)
}

/// Plain `upper_norm` of a dense difference, for tests and oracles.
pub fn dense_deviation(a: &Polynomial, b: &Polynomial, r: f64) -> XFloat {
    upper_norm(&(a - b), r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_core::{apply_op, OperatorSpec};
    use num_complex::Complex64;

    fn poly(s: &str) -> Polynomial {
        ExactPolynomial::parse(s).unwrap().to_float()
    }

    fn assert_poly_close(a: &Polynomial, b: &Polynomial, rel: f64) {
        let n = a.coeffs().len().max(b.coeffs().len());
        for k in 0..n {
            assert!(a.coeff(k).approx_eq(&b.coeff(k), rel), "coeff {k}: {} vs {}", a.coeff(k), b.coeff(k));
        }
    }

    #[test]
    fn spec_blocks() {
        let b = solve_block(1, 1.0, &poly("1")).unwrap();
        assert_poly_close(&b.materialize().unwrap(), &poly("z"), 1e-15);
        let b = solve_block(2, 2.0, &poly("z")).unwrap();
        assert_poly_close(&b.materialize().unwrap(), &poly("z^3/48"), 1e-15);
        let b = solve_block(3, 1.0, &poly("6")).unwrap();
        assert_poly_close(&b.materialize().unwrap(), &poly("z^3"), 1e-15);
    }

    #[test]
    fn rejects_zero_target() {
        assert!(matches!(solve_block(1, 1.0, &Polynomial::zero()), Err(Error::ZeroTarget)));
        assert!(solve_block(0, 1.0, &poly("1")).is_err());
        assert!(solve_block(1, 0.0, &poly("1")).is_err());
    }

    #[test]
    fn exact_solution_matches_float() {
        let p = ExactPolynomial::parse("(1/2+i)z^2 - 3").unwrap();
        let l = BigRational::new(3.into(), 2.into());
        let f = solve_block_exact(4, &l, &p).unwrap();
        let back = f.apply_op(4, &GaussianRational::real(l));
        assert_eq!(back, p);
        let fb = solve_block(4, 1.5, &p.to_float()).unwrap().materialize().unwrap();
        assert_poly_close(&fb, &f.to_float(), 1e-14);
    }

    #[test]
    fn image_examples() {
        let b = solve_block(2, 2.0, &poly("z")).unwrap();
        let img = block_image(&b, 2, Complex64::new(2.0, 0.0)).unwrap();
        assert_poly_close(&img, &poly("z"), 1e-14);
        assert!(block_image(&b, 4, Complex64::new(1.0, 0.0)).unwrap().is_zero());
        let b = solve_block(5, 1.0, &poly("1")).unwrap();
        let img = block_image(&b, 3, Complex64::new(1.0, 0.0)).unwrap();
        assert_poly_close(&img, &poly("z^2/2"), 1e-14);
        assert!(block_image(&b, 3, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn image_matches_operator_on_materialized_block() {
        let b = solve_block(6, 0.8, &poly("(1-2i)z^3 + z/5 - 4")).unwrap();
        let f = b.materialize().unwrap();
        for (m, lam) in [(6u64, Complex64::new(0.9, 0.3)), (4, Complex64::new(-1.1, 0.2)), (8, Complex64::new(2.0, 0.0))] {
            let img = block_image(&b, m, lam).unwrap();
            let op = apply_op(&OperatorSpec::from_complex(m, lam).unwrap(), &f);
            assert_poly_close(&img, &op, 1e-12);
            let un = b.image_upper_norm(m, lam.norm(), 1.7).to_f64();
            let direct = upper_norm(&op, 1.7).to_f64();
            assert!(((un - direct) / direct).abs() < 1e-12);
        }
    }

    #[test]
    fn stability_examples() {
        let b = solve_block(1, 1.0, &poly("1")).unwrap();
        let s = stability_interval(&b, 0.5, 1.5).unwrap();
        assert!((s.hi - 1.5).abs() < 1e-15);
        assert_eq!((s.m0_norm, s.m1, s.n0), (1.0, 1.0, 1));
        let b = solve_block(2, 2.0, &poly("z")).unwrap();
        let s = stability_interval(&b, 0.5, 2.0).unwrap();
        assert!((s.m1 - 3.0).abs() < 1e-15 && s.n0 == 3);
        assert!((s.hi - 2.0 * (7.0f64 / 6.0).cbrt()).abs() < 1e-14);
        for t in 0..100 {
            let lam = s.lo + (s.hi - s.lo) * t as f64 / 100.0;
            assert!(stability_deviation(&b, lam, 2.0).to_f64() < 0.5);
        }
        let tiny = stability_interval(&b, 1e-12, 2.0).unwrap();
        assert!(tiny.hi - tiny.lo < 1e-11);
        assert!(matches!(stability_interval(&b, 1.5, 2.0), Err(Error::InvalidEps(_))));
    }

    #[test]
    fn expm1_polar_small_and_large() {
        let z = expm1_polar(1e-12, 0.0).to_complex64();
        assert!((z.re - 1e-12).abs() < 1e-24);
        let w = expm1_polar(0.0, 0.5).to_complex64();
        assert!((w.re + 2.0).abs() < 1e-15 && w.im.abs() < 1e-15);
        let big = expm1_polar(800.0, 0.0);
        assert!((big.norm().ln() - 800.0).abs() < 1e-9);
    }

    #[test]
    fn huge_order_block_stays_lazy() {
        let b = solve_block(200_000, 1.05, &poly("z")).unwrap();
        assert!(matches!(b.materialize(), Err(Error::MaterializationLimit(_))));
        let cf = b.closed_form();
        assert_eq!(cf[0].0, 200_001);
        assert!(cf[0].1 < -2.0e6);
        // the anchor reproduces the target exactly
        let img = b.image_sparse(200_000, &Dilation::real(1.05));
        assert!(img.to_dense().coeff(1).approx_eq(&XComplex::ONE, 1e-10));
    }
}
