use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use hypercyc::blocks::{solve_block, solve_block_exact, PiFunction};
use hypercyc::constructor::{
    certify_stage, dichotomy_probe, empty_base, grid_error, observe, plan_stage, random_lambdas, run_pipeline,
    verify_points, verify_stage, witness_ladder, Feasibility, Mode, PipelineOptions, ScheduleEntry, StageCertificate,
    StageParams, StagePlan, VerifyReport,
};
use hypercyc::poly_core::exact::{parse_rational, rational_to_xfloat};
use hypercyc::poly_core::{apply_op, ExactPolynomial, GaussianRational};
use hypercyc::sequences::SequenceSpec;
use hypercyc::weyl::{parse_theta, rotation_witness, ud_test};
use hypercyc::{Error, OperatorSpec, Polynomial};

use crate::{
    Command, DichotomyArgs, ModeArg, Output, PipelineArgs, RotateArgs, SolveArgs, StageArgs, StageSpec, SweepArgs,
    VerifyArgs, WeylArgs,
};

pub const PASS: u8 = 0;
pub const FAIL: u8 = 1;
pub const USAGE: u8 = 2;
pub const BUDGET: u8 = 3;

#[derive(Debug)]
pub struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return USAGE;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded(_)) => BUDGET,
        Some(Error::InvalidParameter(_) | Error::InvalidEps(_) | Error::Parse(_) | Error::ZeroTarget) => USAGE,
        _ => FAIL,
    }
}

pub fn run(cmd: &Command) -> anyhow::Result<u8> {
    let config = serde_json::to_value(cmd)?;
    match cmd {
        Command::Solve(a) => solve(a, config),
        Command::Stage(a) => stage(a, config),
        Command::Pipeline(a) => pipeline(a, config),
        Command::Sweep(a) => sweep(a),
        Command::Weyl(a) => weyl(a, config),
        Command::Rotate(a) => rotate(a, config),
        Command::Dichotomy(a) => dichotomy(a, config),
        Command::Verify(a) => verify(a, config),
    }
}

fn num(s: &str) -> anyhow::Result<f64> {
    let q = parse_rational(s)?;
    let x = rational_to_xfloat(&q).to_f64();
    if !x.is_finite() {
        return Err(usage(format!("{s:?} is out of range")));
    }
    Ok(x)
}

fn write_json(out: &Output, v: &Value) -> anyhow::Result<()> {
    if let Some(path) = &out.out {
        write_json_to(path, v)?;
    }
    Ok(())
}

fn write_json_to<T: Serialize>(path: &Path, v: &T) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn budget_artifact(out: &Output, config: Value, what: &str, e: &Error) -> anyhow::Result<u8> {
    if let Error::BudgetExceeded(r) = e {
        println!("budget exceeded in {what}: {r}");
        write_json(out, &json!({"config": config, "status": "budget_exceeded", "budget": r, "pass": false}))?;
    }
    Ok(BUDGET)
}

fn solve(a: &SolveArgs, config: Value) -> anyhow::Result<u8> {
    let p = ExactPolynomial::parse(&a.p)?;
    let lam = parse_rational(&a.lambda0)?;
    let (f_text, residual, f_json) = if a.float {
        let lf = num(&a.lambda0)?;
        let pf = p.to_float();
        let f = solve_block(a.m0, lf, &pf)?.materialize()?;
        let img = apply_op(&OperatorSpec::real(a.m0, lf)?, &f);
        let res = (&img - &pf).max_abs_coeff().to_f64();
        (f.to_string(), format!("{res:e}"), serde_json::to_value(&f)?)
    } else {
        let f = solve_block_exact(a.m0, &lam, &p)?;
        let res = f.apply_op(a.m0, &GaussianRational::real(lam)).sub(&p);
        (f.to_string(), res.to_string(), serde_json::to_value(&f)?)
    };
    println!("f = {f_text}");
    println!("residual = {residual}");
    let pass = a.float || residual == "0";
    write_json(
        &a.output,
        &json!({"config": config, "f": f_json, "f_text": f_text, "residual": residual, "pass": pass}),
    )?;
    Ok(if pass { PASS } else { FAIL })
}

fn stage_params(s: &StageSpec) -> anyhow::Result<StageParams> {
    let rho0 = num(&s.rho)?;
    let eps1 = num(&s.eps1)?;
    let mut p = match &s.p {
        Some(text) => StageParams::new(s.n0, rho0, ExactPolynomial::parse(text)?.to_float(), s.s0, eps1),
        None => StageParams::with_target_index(s.n0, rho0, s.target_index, s.s0, eps1),
    };
    p.seq = SequenceSpec::parse(&s.seq)?;
    p.mode = match s.mode {
        ModeArg::Optimized => Mode::Optimized,
        ModeArg::Faithful => Mode::Faithful,
    };
    p.cap = s.cap;
    p.delta0 = s.delta0.as_deref().map(num).transpose()?;
    Ok(p)
}

fn r0_for(n0: u64) -> f64 {
    n0 as f64 + 1.0 / 16.0
}

fn plan_or_budget(s: &StageSpec) -> anyhow::Result<Result<(StagePlan, PiFunction), Error>> {
    let params = stage_params(s)?;
    let base = empty_base(r0_for(params.n0))?;
    match plan_stage(&params, &base) {
        Ok(plan) => Ok(Ok((plan, base))),
        Err(e @ Error::BudgetExceeded(_)) => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

fn summarize_stage(cert: &StageCertificate) {
    println!(
        "stage: {} cells, orders {}..{}, min margin {:.6e}, closeness {:.3e} < {}",
        cert.cells.len(),
        cert.cells.first().map_or(0, |c| c.order),
        cert.m0,
        cert.min_margin,
        cert.closeness.bound,
        cert.plan.constants.eps0
    );
}

fn summarize_verify(label: &str, r: &VerifyReport) {
    println!(
        "{label}: {} points, max error {:.6e}, min margin {:.6e}, {}",
        r.points,
        r.max_observed,
        r.min_margin,
        if r.pass { "pass" } else { "FAIL" }
    );
}

fn random_check(f: &PiFunction, cert: &StageCertificate, n: usize, seed: u64) -> anyhow::Result<Option<VerifyReport>> {
    if n == 0 {
        return Ok(None);
    }
    Ok(Some(verify_points(f, cert, &random_lambdas(cert, n, seed))?))
}

fn stage(a: &StageArgs, config: Value) -> anyhow::Result<u8> {
    let (plan, base) = match plan_or_budget(&a.stage)? {
        Ok(x) => x,
        Err(e) => return budget_artifact(&a.output, config, "planning", &e),
    };
    let (f, cert) = certify_stage(&plan, &base)?;
    summarize_stage(&cert);
    let grid = verify_stage(&f, &cert, a.grid)?;
    summarize_verify("verify", &grid);
    let random = random_check(&f, &cert, a.random, a.seed)?;
    if let Some(r) = &random {
        summarize_verify("random", r);
    }
    let pass = cert.pass && grid.pass && random.as_ref().is_none_or(|r| r.pass);
    if let Some(path) = &a.f_out {
        write_json_to(path, &f)?;
    }
    write_json(
        &a.output,
        &json!({"config": config, "certificate": cert, "verify": grid, "verify_random": random, "pass": pass}),
    )?;
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { PASS } else { FAIL })
}

fn schedule(a: &PipelineArgs) -> anyhow::Result<Vec<ScheduleEntry>> {
    if let Some(s) = &a.schedule {
        return s
            .split(';')
            .filter(|e| !e.trim().is_empty())
            .map(|e| {
                let parts: Vec<&str> = e.split(':').map(str::trim).collect();
                let [n0, rho, j, s0] = parts[..] else {
                    return Err(usage(format!("schedule entry {e:?} is not n0:rho:j:s0")));
                };
                let int = |x: &str| x.parse::<u64>().map_err(|_| usage(format!("not an integer: {x:?}")));
                Ok(ScheduleEntry::indexed(int(n0)?, num(rho)?, int(j)?, int(s0)?))
            })
            .collect();
    }
    let rho = num(&a.rho)?;
    a.targets
        .split(',')
        .map(|j| {
            let j: u64 = j.trim().parse().map_err(|_| usage(format!("bad target index {j:?}")))?;
            Ok(ScheduleEntry::indexed(a.n0, rho, j, a.s0))
        })
        .collect()
}

fn pipeline(a: &PipelineArgs, config: Value) -> anyhow::Result<u8> {
    let sched = schedule(a)?;
    let opts = PipelineOptions {
        seq: SequenceSpec::parse(&a.seq)?,
        cap: a.cap,
        persistence_offset: a.offset,
        grid: a.grid,
    };
    let rep = match run_pipeline(&sched, &opts) {
        Ok(r) => r,
        Err(e @ Error::BudgetExceeded(_)) => return budget_artifact(&a.output, config, "pipeline", &e),
        Err(e) => return Err(e.into()),
    };
    for (t, (c, r)) in rep.certificates.iter().zip(&rep.reverify).enumerate() {
        print!("stage {}: ", t + 1);
        summarize_stage(c);
        summarize_verify("  final-f verify", r);
    }
    for c in &rep.cauchy {
        println!("rho(f_{}, f_{}) = {:.3e} < {}: {}", c.t, c.t + 1, c.metric, c.bound, c.ok);
    }
    if let Some(path) = &a.f_out {
        write_json_to(path, &rep.f)?;
    }
    write_json(
        &a.output,
        &json!({
            "config": config,
            "schedule": sched,
            "stage_lengths": rep.stage_lengths,
            "certificates": rep.certificates,
            "consumed": rep.consumed,
            "cauchy": rep.cauchy,
            "reverify": rep.reverify,
            "pass": rep.pass,
        }),
    )?;
    println!("{}", if rep.pass { "PASS" } else { "FAIL" });
    Ok(if rep.pass { PASS } else { FAIL })
}

fn load_certificate(path: &Path) -> anyhow::Result<StageCertificate> {
    let mut v = read_json(path)?;
    if let Some(inner) = v.get_mut("certificate") {
        v = inner.take();
    }
    serde_json::from_value(v).with_context(|| format!("{} holds no stage certificate", path.display()))
}

fn load_f(path: &Path) -> anyhow::Result<PiFunction> {
    let f: PiFunction = serde_json::from_value(read_json(path)?)?;
    Ok(f.revalidated()?)
}

fn sweep(a: &SweepArgs) -> anyhow::Result<u8> {
    let (f, cert) = match (&a.cert, &a.f) {
        (Some(c), Some(f)) => (load_f(f)?, load_certificate(c)?),
        _ => {
            let (plan, base) = plan_or_budget(&a.stage)?.map_err(anyhow::Error::from)?;
            certify_stage(&plan, &base)?
        }
    };
    if a.grid < 2 {
        return Err(usage("sweep needs --grid >= 2"));
    }
    let l = cert.rho0().ln();
    let lo = cert.plan.partition.points[0];
    let inv_s = 1.0 / cert.s0 as f64;
    let sink: Box<dyn Write> = match &a.csv {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["lambda", "cell", "order", "certified_bound", "grid_error", "margin"])?;
    let mut ok = true;
    for j in 0..a.grid {
        let lam = (-l + 2.0 * l * j as f64 / (a.grid - 1) as f64).exp().clamp(lo, cert.rho0());
        let o = observe(&f, &cert, lam)?;
        let g = grid_error(&f, cert.block_offset + o.cell, lam, cert.target(), cert.r0, a.samples);
        let margin = inv_s - o.certified;
        ok &= margin > 0.0 && o.observed <= o.certified * (1.0 + 4.0 * hypercyc::ROUNDING_SLACK);
        w.write_record([
            format!("{lam:?}"),
            o.cell.to_string(),
            o.order.to_string(),
            format!("{:?}", o.certified),
            format!("{g:?}"),
            format!("{margin:?}"),
        ])?;
    }
    w.flush()?;
    Ok(if ok { PASS } else { FAIL })
}

fn weyl(a: &WeylArgs, config: Value) -> anyhow::Result<u8> {
    let theta = parse_theta(&a.theta)?;
    let seq = SequenceSpec::parse(&a.seq)?;
    let rep = ud_test(&a.theta, theta, &seq, a.n, a.bins, num(&a.tol)?)?;
    println!(
        "theta = {} ({:.17}), seq {}, N = {}: max bin deviation {:.3e} (tol {}), star discrepancy {:.3e}, {}",
        rep.theta,
        rep.theta_value,
        rep.sequence,
        rep.n,
        rep.max_bin_deviation,
        rep.tol,
        rep.star_discrepancy,
        if rep.pass { "pass" } else { "FAIL" }
    );
    write_json(&a.output, &json!({"config": config, "report": rep, "pass": rep.pass}))?;
    Ok(if rep.pass { PASS } else { FAIL })
}

fn rotate(a: &RotateArgs, config: Value) -> anyhow::Result<u8> {
    let (plan, base) = match plan_or_budget(&a.stage)? {
        Ok(x) => x,
        Err(e) => return budget_artifact(&a.output, config, "planning", &e),
    };
    let (f, cert) = certify_stage(&plan, &base)?;
    summarize_stage(&cert);
    let lambda0 = num(&a.lambda0)?;
    let eps0 = num(&a.eps0)?;
    let target = cert.target().clone();
    let mut certs = vec![cert];
    let lad = witness_ladder(&f, &mut certs, &target, lambda0, a.ladder, a.offset)?;
    let theta = parse_theta(&a.theta)?;
    let w = rotation_witness(&lad.f, &lad.indices, theta, lambda0, &target, eps0, a.stage.n0, a.search_cap)?;
    let reverify = verify_stage(&lad.f, &certs[0], 1000)?;
    summarize_verify("stage after ladder", &reverify);
    println!(
        "witness: order {} (block {}), {{theta k}} = {:.6}, after {} candidates; rotated error {:.6e} < {}",
        w.order, w.block, w.frac, w.candidates_scanned, w.recomputed_error, w.eps0
    );
    let pass = w.recomputed_error < eps0 && reverify.pass;
    write_json(
        &a.output,
        &json!({
            "config": config,
            "certificate": certs[0],
            "ladder": {"lambda0": lad.lambda0, "first": lad.indices.first(), "count": lad.indices.len(), "consumed": lad.consumed},
            "witness": w,
            "reverify": reverify,
            "pass": pass,
        }),
    )?;
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { PASS } else { FAIL })
}

fn dichotomy(a: &DichotomyArgs, config: Value) -> anyhow::Result<u8> {
    let seq = SequenceSpec::parse(&a.seq)?;
    let rho = num(&a.rho)?;
    let z = Polynomial::from_real(&[0.0, 1.0]);
    let sample = StageParams::new(1, rho, z, a.s0, num(&a.eps1)?);
    let rep = dichotomy_probe(&seq, rho, &sample, a.cap)?;
    println!(
        "sequence {}, rho0 = {}: required coverage {:.6}, delta0 = {:.6e}, {:?}",
        rep.sequence, rep.rho0, rep.required_coverage, rep.delta0, rep.feasibility
    );
    if let Some(n0) = rep.n0 {
        println!("N0 = {n0}");
    }
    if let Some(l) = rep.log10_n0 {
        println!("N0 ~ 10^{l:.2}");
    }
    if let Some(s) = rep.supremum {
        println!("attainable supremum {s:.6e} < required {:.6}", rep.required_coverage);
    }
    let pass = rep.feasibility == Feasibility::Feasible;
    write_json(&a.output, &json!({"config": config, "report": rep, "pass": pass}))?;
    Ok(match rep.feasibility {
        Feasibility::Feasible => PASS,
        _ if rep.budget.is_some() => BUDGET,
        _ => FAIL,
    })
}

fn verify(a: &VerifyArgs, config: Value) -> anyhow::Result<u8> {
    let cert = load_certificate(&a.cert)?;
    let f = load_f(&a.f)?;
    let grid = verify_stage(&f, &cert, a.grid)?;
    summarize_verify("verify", &grid);
    let random = random_check(&f, &cert, a.random, a.seed)?;
    if let Some(r) = &random {
        summarize_verify("random", r);
    }
    let pass = cert.pass && grid.pass && random.as_ref().is_none_or(|r| r.pass);
    write_json(&a.output, &json!({"config": config, "verify": grid, "verify_random": random, "pass": pass}))?;
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { PASS } else { FAIL })
}
