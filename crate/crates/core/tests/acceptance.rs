//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is printed even
//! when every criterion passes. The process fails if a criterion fails that
//! is not listed in [`KNOWN_FAILURES`], or if a criterion cannot be evaluated.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use mhdbl_core::config::RunConfig;
use mhdbl_core::lp::{besov_norm, DyadicPartition};
use mhdbl_core::run::{build_simulation, simulate};
use mhdbl_core::scenario::{default_shape, derived_exponents, initial_data_standard, FarField, Params};
use mhdbl_core::solver::checkpoint::{decode, encode, load};
use mhdbl_core::solver::{kappa_rescale_map, Model, SimConfig, Simulation, WeightBranch};
use mhdbl_core::verify::{
    audit_summary, fit_decay, poincare_check_refined, run_suite, sup_constants, theta_report, SuiteReport,
};
use mhdbl_core::grid::GridSpec;

const SEED: u64 = 20261016;

/// Criteria expected to fail, with the reason recorded in the README.
const KNOWN_FAILURES: &[u32] = &[4, 5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn suite(name: &str) -> SuiteReport {
    run_suite(name, SEED).expect("suite runs").remove(0)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = poincare_check_refined(40.0, 2001, |y| (-y * y / 4.0).exp(), 0.0, 1.0).expect("gaussian case");
    let exact = PI.sqrt() / 2.0;
    let equality = (g.lhs - exact).abs() < 1e-6 && (g.rhs_basic - exact).abs() < 1e-6;
    let report = suite("poincare");
    let random = report.checks.iter().find(|c| c.name == "random_mixtures").expect("random cases");
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        equality && report.pass && elapsed < 10.0,
        format!(
            "gaussian lhs {:.9} rhs {:.9} (exact {exact:.9}); random {}; {elapsed:.2} s",
            g.lhs, g.rhs_basic, random.measured
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let s = sup_constants();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (s.sup1 - 0.541044).abs() <= 1e-5 && (s.sup2 - 0.886227).abs() <= 1e-7 && elapsed < 1.0;
    outcome(pass, format!("sup1 {:.8} at y = {:.6}, sup2 {:.9}; {elapsed:.3} s", s.sup1, s.argmax1, s.sup2))
}

fn criterion_3() -> Outcome {
    let e = common::heat_errors(512, 20.0, 1e-3);
    let ratio = e.ratio();
    outcome(
        e.exact < 1e-4 && (3.5..=4.5).contains(&ratio),
        format!(
            "max error at t = 1: {:.3e}; temporal errors {:.3e} / {:.3e}, ratio {ratio:.3}",
            e.exact, e.semi.0, e.semi.1
        ),
    )
}

struct LongRun {
    sim: Simulation,
    seconds: f64,
    stopped: Option<String>,
}

fn long_run(text: &str) -> LongRun {
    let cfg = RunConfig::parse(text).expect("acceptance config");
    let start = Instant::now();
    let mut sim = build_simulation(&cfg).expect("simulation builds");
    let stopped = sim.run_until(cfg.t_final).err().map(|e| format!("run stopped at t = {:.3}: {e}", sim.state.t));
    LongRun {
        sim,
        seconds: start.elapsed().as_secs_f64(),
        stopped,
    }
}

fn stopped(run: &LongRun) -> Option<Outcome> {
    run.stopped.clone().map(|detail| outcome(false, detail))
}

fn criterion_4(run: &LongRun) -> Outcome {
    if let Some(o) = stopped(run) {
        return o;
    }
    let l = derived_exponents(1.0).unwrap().l_kappa.unwrap();
    let ub = fit_decay(&run.sim.series, "norm_ub", (10.0, 100.0)).expect("ub fit");
    let gh = fit_decay(&run.sim.series, "norm_gh", (10.0, 100.0)).expect("gh fit");
    let (ub_bound, gh_bound) = (-(0.5 + l) + 0.07, -(1.0 + l) + 0.10);
    let pass = ub.exponent <= ub_bound && gh.exponent <= gh_bound && ub.stderr < 0.02 && gh.stderr < 0.02;
    outcome(
        pass,
        format!(
            "(u,b) exponent {:.4} ± {:.4} (bound {ub_bound:.2}); (G,H) exponent {:.4} ± {:.4} (bound {gh_bound:.2}); run {:.0} s",
            ub.exponent, ub.stderr, gh.exponent, gh.stderr, run.seconds
        ),
    )
}

fn criterion_5(run: &LongRun) -> Outcome {
    if let Some(o) = stopped(run) {
        return o;
    }
    let p = run.sim.params();
    let r = theta_report(&run.sim.series, p.delta, p.lambda);
    let pass = r.tail_fraction <= 0.02 && r.within_bound && r.gh_integral_tail_fraction <= 0.05;
    outcome(
        pass,
        format!(
            "theta(100) {:.4e}, (theta(100) - theta(50))/theta(100) {:.4} (limit 0.02); bound {:.3}; (G,H) integral tail share {:.4} (limit 0.05)",
            r.theta_final, r.tail_fraction, r.theta_bound, r.gh_integral_tail_fraction
        ),
    )
}

fn criterion_6(run: &LongRun) -> Outcome {
    if let Some(o) = stopped(run) {
        return o;
    }
    let ell = derived_exponents(1.5).unwrap().ell_kappa.unwrap();
    let ub = fit_decay(&run.sim.series, "norm_ub", (10.0, 100.0)).expect("ub fit");
    let bound = -(0.5 + ell) + 0.07;
    outcome(
        ub.exponent <= bound && ub.stderr < 0.02,
        format!(
            "kappa = 1.5, (u,b) exponent {:.4} ± {:.4} (bound {bound:.4}, ell = {ell:.4}); run {:.0} s",
            ub.exponent, ub.stderr, run.seconds
        ),
    )
}

fn criterion_7() -> Outcome {
    let kappa: f64 = 2.0;
    let grid = GridSpec::new(2.0 * PI, 32, 40.0, 321).unwrap();
    let bar = GridSpec::new(2.0 * PI, 32, 40.0 / kappa.sqrt(), 321).unwrap();
    let params = Params::new(kappa, 1e-3, 0.1, 1.0).unwrap();
    let (u0, b0, _) = initial_data_standard(&grid, &params, &default_shape(&grid), 0.5).unwrap();
    let mut config = SimConfig::new(kappa);
    config.weight = WeightBranch::PsiKappa;
    let mut sim = Simulation::new(Model::new(params, grid, FarField::trivial()).unwrap(), config, u0.clone(), b0.clone()).unwrap();
    let conj = params.with_diffusivities(1.0 / kappa, 1.0).unwrap();
    let map = |f| kappa_rescale_map(f, kappa, &bar).unwrap();
    let mut other = Simulation::new(Model::new(conj, bar, FarField::trivial()).unwrap(), config, map(&u0), map(&b0)).unwrap();
    sim.run_until(1.0).unwrap();
    other.run_until(1.0).unwrap();
    let p = DyadicPartition::build(&bar);
    let rel = |a: &mhdbl_core::grid::Field, b: &mhdbl_core::grid::Field| {
        besov_norm(&p, &a.sub(b), 0.5, 0.0, 1.0).unwrap() / besov_norm(&p, a, 0.5, 0.0, 1.0).unwrap()
    };
    let (eu, eb) = (rel(&map(&sim.state.u), &other.state.u), rel(&map(&sim.state.b), &other.state.b));
    outcome(eu < 1e-5 && eb < 1e-5, format!("relative B^(1/2,0) mismatch at t = 1: u {eu:.3e}, b {eb:.3e}"))
}

fn criterion_8(run: &LongRun) -> Outcome {
    if let Some(o) = stopped(run) {
        return o;
    }
    let a = audit_summary(&run.sim.audit, run.sim.config.dt_max, run.sim.grid().dy());
    outcome(
        a.pass,
        format!(
            "{} audited (step, pair) records, min relative slack {:.3e} (tolerance -{:.3e})",
            a.records, a.min_relative_slack, a.tolerance
        ),
    )
}

fn criterion_9() -> Outcome {
    let partition = suite("partition");
    let bony = suite("bony");
    let convexity = suite("convexity");
    let pairs: u64 = convexity
        .checks
        .iter()
        .filter(|c| c.name.starts_with("random_pairs"))
        .map(|c| c.inputs["pairs"].as_u64().unwrap_or(0))
        .sum();

    let dir = tempfile::tempdir().expect("temp dir");
    let small = |kind: &str, sub: &str| {
        RunConfig::parse(&format!(
            "scenario.kind = {kind}\ngrid.nx = 16\ngrid.ny = 129\ngrid.ymax = 20\nrun.t_final = 1\n\
             run.sample_interval = 0.25\noutput.dir = {}\n",
            dir.path().join(sub).display()
        ))
        .unwrap()
    };
    let zero = small("zero", "zero");
    simulate(&zero).expect("zero run");
    let (zsim, _) = load(&zero.checkpoint_path()).unwrap();
    let zero_exact = zsim.state.u.coeffs().iter().chain(zsim.state.b.coeffs()).all(|z| z.re == 0.0 && z.im == 0.0)
        && zsim.series.samples.iter().all(|s| s.norm_ub == 0.0 && s.norm_gh == 0.0 && s.theta == 0.0);

    let (a, b) = (small("standard", "a"), small("standard", "b"));
    simulate(&a).expect("run a");
    simulate(&b).expect("run b");
    let identical = std::fs::read(a.norms_path()).unwrap() == std::fs::read(b.norms_path()).unwrap();
    let (sim, text) = load(&a.checkpoint_path()).unwrap();
    let bytes = encode(&sim, &text);
    let round_trip = bytes == std::fs::read(a.checkpoint_path()).unwrap() && encode(&decode(&bytes).unwrap().0, &text) == bytes;

    let defect = |r: &SuiteReport| {
        r.checks
            .iter()
            .filter_map(|c| c.measured["defect"].as_f64().or(c.measured["max_relative_error"].as_f64()))
            .fold(0.0, f64::max)
    };
    let pass = partition.pass && bony.pass && convexity.pass && pairs == 200 && zero_exact && identical && round_trip;
    outcome(
        pass,
        format!(
            "partition defect {:.1e}; bony error {:.1e}; convexity {pairs} pairs pass={}; zero run exact={zero_exact}; \
             checkpoint bit-exact={round_trip}; reruns identical={identical}",
            defect(&partition),
            defect(&bony),
            convexity.pass
        ),
    )
}

const RUN_KAPPA_ONE: &str = "params.kappa = 1\nparams.epsilon = 1e-3\ngrid.nx = 64\ngrid.ny = 768\ngrid.ymax = 180\n\
                             run.t_final = 100\nrun.audit_every = 10\n";
const RUN_KAPPA_THREE_HALVES: &str = "params.kappa = 1.5\nparams.epsilon = 1e-3\ngrid.nx = 64\ngrid.ny = 768\n\
                                      grid.ymax = 230\nrun.t_final = 100\nrun.weight = psi_kappa\n\
                                      scenario.far_field = trivial\n";

fn main() {
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |n: u32, o: Outcome| {
        println!("{} criterion {n}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o));
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    let run = long_run(RUN_KAPPA_ONE);
    report(4, criterion_4(&run));
    report(5, criterion_5(&run));
    let run_k = long_run(RUN_KAPPA_THREE_HALVES);
    report(6, criterion_6(&run_k));
    report(7, criterion_7());
    report(8, criterion_8(&run));
    report(9, criterion_9());

    let unexpected: Vec<u32> = results
        .iter()
        .filter(|(n, o)| !o.pass && !KNOWN_FAILURES.contains(n))
        .map(|(n, _)| *n)
        .collect();
    let recovered: Vec<u32> = results
        .iter()
        .filter(|(n, o)| o.pass && KNOWN_FAILURES.contains(n))
        .map(|(n, _)| *n)
        .collect();
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if !recovered.is_empty() {
        println!("acceptance: criteria {recovered:?} are listed as known failures but now pass");
    }
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
