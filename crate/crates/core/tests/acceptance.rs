//! End-to-end acceptance checks. Each test prints one line to stderr,
//! outside the harness capture, so the summary shows up in plain
//! `cargo test` output.

use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypercyc::blocks::{
    assemble_pi, block_image, gap_floor, pi_error_bound, solve_block, solve_block_exact, stability_interval,
};
use hypercyc::constructor::{
    build_stage, dichotomy_probe, empty_base, plan_stage, run_pipeline, verify_stage, witness_ladder, Feasibility,
    Mode, PipelineOptions, ScheduleEntry, StageParams, DEFAULT_LADDER_LEN, DEFAULT_PERSISTENCE_OFFSET,
};
use hypercyc::poly_core::{apply_op, apply_op_both, upper_norm, Dilation, ExactPolynomial, GaussianRational};
use hypercyc::sequences::SequenceSpec;
use hypercyc::weyl::{parse_theta, rotation_witness, ud_test};
use hypercyc::{Error, Extrapolation, OperatorSpec, Polynomial, XComplex, ROUNDING_SLACK};

fn report(n: u32, name: &str, ok: bool, t: Duration, budget: Duration, detail: &str) {
    let within = if t <= budget { "within" } else { "OVER" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {n:>2} {name:<28} {} [{:.2?}, {within} {:?}] {detail}",
        if ok { "PASS" } else { "FAIL" },
        t,
        budget
    );
}

fn z() -> Polynomial {
    Polynomial::from_real(&[0.0, 1.0])
}

fn small_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let num: i64 = rng.random_range(-9..=9);
    let den: i64 = rng.random_range(1..=7);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn random_exact_poly(rng: &mut ChaCha8Rng) -> ExactPolynomial {
    loop {
        let d = rng.random_range(0..=5);
        let c: Vec<_> = (0..=d)
            .map(|_| GaussianRational::new(small_rational(rng), small_rational(rng)))
            .collect();
        let p = ExactPolynomial::new(c);
        if !p.is_zero() {
            return p;
        }
    }
}

fn rel_close(a: XComplex, b: XComplex, scale: f64, tol: f64) -> bool {
    let d = (a.to_complex64() - b.to_complex64()).norm();
    d <= tol * b.to_complex64().norm().max(scale)
}

#[test]
fn criterion_01_block_exactness() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut exact_bad = 0;
    let mut float_bad = 0;
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let m0 = rng.random_range(1..=20u64);
        let lam = BigRational::new(BigInt::from(rng.random_range(1..=100i64)), BigInt::from(rng.random_range(1..=10i64)));
        let p = random_exact_poly(&mut rng);
        let f = solve_block_exact(m0, &lam, &p).unwrap();
        if !f.apply_op(m0, &GaussianRational::real(lam.clone())).sub(&p).is_zero() {
            exact_bad += 1;
        }
        let lf = hypercyc::poly_core::exact::rational_to_xfloat(&lam).to_f64();
        let pf = p.to_float();
        let img = apply_op(&OperatorSpec::real(m0, lf).unwrap(), &solve_block(m0, lf, &pf).unwrap().materialize().unwrap());
        let scale = pf.max_abs_coeff().to_f64();
        for k in 0..=pf.degree_or_zero().max(img.degree_or_zero()) {
            let (a, b) = (img.coeff(k), pf.coeff(k));
            let d = (a.to_complex64() - b.to_complex64()).norm();
            let denom = if b.is_zero() { scale } else { b.to_complex64().norm() };
            worst = worst.max(d / denom);
            if d > 1e-10 * denom {
                float_bad += 1;
            }
        }
    }
    let ok = exact_bad == 0 && float_bad == 0;
    report(1, "block exactness", ok, t.elapsed(), Duration::from_secs(10), &format!("exact failures {exact_bad}, worst float rel {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_02_operator_routes() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for _ in 0..1000 {
        let d = rng.random_range(0..=40usize);
        let f = Polynomial::from_complex(
            &(0..=d)
                .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect::<Vec<_>>(),
        );
        let n = rng.random_range(1..=30u64);
        let lam = Complex64::from_polar(rng.random_range(0.1..3.0), rng.random_range(-3.1..3.1));
        let (a, b) = apply_op_both(&OperatorSpec::from_complex(n, lam).unwrap(), &f);
        let scale = a.max_abs_coeff().to_f64().max(b.max_abs_coeff().to_f64()) * 1e-300;
        for k in 0..=a.degree_or_zero().max(b.degree_or_zero()) {
            if !rel_close(a.coeff(k), b.coeff(k), scale, 1e-12) {
                bad += 1;
            }
        }
    }
    report(2, "operator route equivalence", bad == 0, t.elapsed(), Duration::from_secs(5), &format!("{bad} disagreements"));
    assert_eq!(bad, 0);
}

#[test]
fn criterion_03_stability_bound() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (eps0, r0) = (0.1, 1.5);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m0 = rng.random_range(1..=30u64);
        let lam0 = rng.random_range(0.2..5.0);
        let p = random_exact_poly(&mut rng).to_float();
        let blk = solve_block(m0, lam0, &p).unwrap();
        let iv = stability_interval(&blk, eps0, r0).unwrap();
        let anchor = block_image(&blk, m0, Complex64::new(lam0, 0.0)).unwrap();
        for _ in 0..100 {
            let lam = iv.lo + rng.random::<f64>() * (iv.hi - iv.lo);
            let moved = block_image(&blk, m0, Complex64::new(lam, 0.0)).unwrap();
            let dev = upper_norm(&(&moved - &anchor), r0).to_f64();
            worst = worst.max(dev / eps0);
            if dev.is_nan() || dev >= eps0 {
                violations += 1;
            }
        }
    }
    report(3, "stability bound", violations == 0, t.elapsed(), Duration::from_secs(30), &format!("{violations} violations, worst dev/eps0 {worst:.4}"));
    assert_eq!(violations, 0);
}

#[test]
fn criterion_04_block_sum_bound() {
    let t = Instant::now();
    let r0 = 1.2;
    let p = z();
    let anchors = [1.0, 1.01, 1.02, 1.03, 1.04];
    let probe: Vec<_> = anchors.iter().map(|&a| solve_block(100, a, &p).unwrap()).collect();
    let n1 = gap_floor(&Polynomial::zero(), &probe, r0);
    let blocks: Vec<_> = anchors
        .iter()
        .enumerate()
        .map(|(i, &a)| solve_block((i as u64 + 1) * (n1 + 1), a, &p).unwrap())
        .collect();
    let pi = assemble_pi(Polynomial::zero(), blocks, r0).unwrap();
    assert!(pi.max_degree() <= 200);
    let whole = pi.materialize().unwrap();
    let mut bad = 0;
    let mut tail_bad = 0;
    let mut worst = 0.0f64;
    for i in 0..pi.len() {
        let lo = anchors[i];
        let hi = anchors.get(i + 1).copied().unwrap_or(lo + 0.01);
        let m = pi.blocks()[i].m0;
        let later: Vec<_> = pi.blocks()[i + 1..].iter().map(|b| b.materialize().unwrap()).collect();
        let rest = later.iter().fold(Polynomial::zero(), |acc, b| &acc + b);
        for k in 0..50 {
            let lam = lo + (hi - lo) * k as f64 / 50.0;
            let op = OperatorSpec::real(m, lam).unwrap();
            let measured = upper_norm(&(&apply_op(&op, &whole) - &p), r0).to_f64();
            let bound = pi_error_bound(&pi, i, &Dilation::real(lam), &p).unwrap().to_f64();
            // the dense route carries its own rounding, so an absolute floor
            // covers anchors where the bound is exactly zero
            if bound > 0.0 {
                worst = worst.max(measured / bound);
            }
            if measured > bound * (1.0 + ROUNDING_SLACK) + 1e-12 {
                bad += 1;
            }
            if let Some(next) = pi.blocks().get(i + 1) {
                let tail = upper_norm(&apply_op(&op, &rest), r0).to_f64();
                let gap_bound = (2.0 - (next.m0 - m) as f64).exp2();
                if tail > gap_bound {
                    tail_bad += 1;
                }
            }
        }
    }
    let ok = bad == 0 && tail_bad == 0;
    report(4, "block sum bound", ok, t.elapsed(), Duration::from_secs(60), &format!("N1 {n1}, error violations {bad}, tail violations {tail_bad}, worst ratio {worst:.4}"));
    assert!(ok);
}

fn criterion5_stage() -> (hypercyc::blocks::PiFunction, hypercyc::constructor::StageCertificate) {
    let base = empty_base(1.0625).unwrap();
    let plan = plan_stage(&StageParams::new(1, 1.05, z(), 10, 0.25), &base).unwrap();
    build_stage(&plan, &base).unwrap()
}

#[test]
fn criterion_05_end_to_end_stage() {
    let t = Instant::now();
    let (f, cert) = criterion5_stage();
    let n0 = cert.plan.n0_index;
    let rep = verify_stage(&f, &cert, 10_000).unwrap();
    let ok = cert.pass
        && n0 <= 100_000
        && rep.pass
        && rep.max_observed < 0.1
        && rep.min_margin > 0.0
        && cert.closeness.bound < cert.plan.constants.eps0;
    report(
        5,
        "end-to-end stage",
        ok,
        t.elapsed(),
        Duration::from_secs(300),
        &format!(
            "N0 {n0}, {} points, max error {:.5}, min margin {:.2e}, closeness {:.2e} < {}",
            rep.points, rep.max_observed, rep.min_margin, cert.closeness.bound, cert.plan.constants.eps0
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_06_faithful_refusal() {
    let t = Instant::now();
    let mut prm = StageParams::new(1, 2.0, z(), 10, 0.25);
    prm.mode = Mode::Faithful;
    let (ok, detail) = match plan_stage(&prm, &empty_base(1.0625).unwrap()) {
        Err(Error::BudgetExceeded(r)) => match r.extrapolation {
            Extrapolation::DivergesEventually { log10_n0 } => (log10_n0 > 10.0, format!("estimated N0 ~ 10^{log10_n0:.1}")),
            other => (false, format!("{other:?}")),
        },
        other => (false, format!("{other:?}")),
    };
    report(6, "faithful-mode refusal", ok, t.elapsed(), Duration::from_secs(10), &detail);
    assert!(ok);
}

#[test]
fn criterion_07_dichotomy() {
    let t = Instant::now();
    let sample = StageParams::new(1, 1.5, z(), 10, 0.25);
    let sq = dichotomy_probe(&SequenceSpec::parse("n^2").unwrap(), 1.5, &sample, 100_000).unwrap();
    let n = dichotomy_probe(&SequenceSpec::parse("n").unwrap(), 1.5, &sample, 100_000).unwrap();
    let n2 = dichotomy_probe(&SequenceSpec::parse("2n").unwrap(), 1.5, &sample, 100_000).unwrap();
    let sup = sq.supremum.unwrap_or(f64::INFINITY);
    let ok = sq.feasibility == Feasibility::Infeasible
        && sq.budget.is_some()
        && sup < sq.required_coverage
        && n.feasibility == Feasibility::Feasible
        && n2.feasibility == Feasibility::Feasible;
    report(
        7,
        "dichotomy",
        ok,
        t.elapsed(),
        Duration::from_secs(10),
        &format!(
            "n^2 supremum {sup:.4e} < required {:.4}; n, 2n feasible",
            sq.required_coverage
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_weyl() {
    let t = Instant::now();
    let golden = ud_test("(sqrt(5)-1)/2", parse_theta("(sqrt(5)-1)/2").unwrap(), &SequenceSpec::naturals(), 100_000, 100, 0.001).unwrap();
    let sq = ud_test("sqrt(2)-1", parse_theta("sqrt(2)-1").unwrap(), &SequenceSpec::power(2).unwrap(), 100_000, 100, 0.01).unwrap();
    let ok = golden.pass && sq.pass;
    report(
        8,
        "weyl statistics",
        ok,
        t.elapsed(),
        Duration::from_secs(5),
        &format!("deviations {:.2e}, {:.2e}", golden.max_bin_deviation, sq.max_bin_deviation),
    );
    assert!(ok);
}

#[test]
fn criterion_09_rotation() {
    let t = Instant::now();
    let (f, cert) = criterion5_stage();
    let mut certs = vec![cert];
    let lad = witness_ladder(&f, &mut certs, &z(), 1.0, DEFAULT_LADDER_LEN, DEFAULT_PERSISTENCE_OFFSET).unwrap();
    let theta = parse_theta("sqrt(2)-1").unwrap();
    let w = rotation_witness(&lad.f, &lad.indices, theta, 1.0, &z(), 0.3, 1, 1_000_000).unwrap();
    let trinomial = w.eps1 * w.eps1 + (w.m0_norm + 1.0) * w.eps1 < w.eps0;
    let still = verify_stage(&lad.f, &certs[0], 1000).unwrap();
    let ok = w.candidates_scanned <= 1_000_000 && w.recomputed_error < 0.3 && trinomial && still.pass;
    report(
        9,
        "rotation transfer",
        ok,
        t.elapsed(),
        Duration::from_secs(60),
        &format!(
            "order {} after {} candidates, recomputed {:.4} < 0.3, eps1 {:.4}",
            w.order, w.candidates_scanned, w.recomputed_error, w.eps1
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_pipeline_persistence() {
    let t = Instant::now();
    let sched: Vec<_> = [1u64, 49, 57].iter().map(|&j| ScheduleEntry::indexed(1, 1.01, j, 10)).collect();
    let rep = run_pipeline(&sched, &PipelineOptions::default()).unwrap();
    let cauchy = rep.cauchy.iter().all(|c| c.metric < c.bound);
    let reverify = rep.reverify.len() == 3 && rep.reverify.iter().all(|r| r.pass);
    let ok = rep.pass && cauchy && reverify;
    report(
        10,
        "pipeline persistence",
        ok,
        t.elapsed(),
        Duration::from_secs(900),
        &format!(
            "stage lengths {:?}, metrics {:?}",
            rep.stage_lengths,
            rep.cauchy.iter().map(|c| format!("{:.3e}<{}", c.metric, c.bound)).collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}
