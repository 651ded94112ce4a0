//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its PASS/FAIL line even when the run succeeds.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use nfpassoc::channel::{fspl_db, p_los_at_elevation, path_loss_at, ChannelEnv};
use nfpassoc::exact::{brute_force, solve_bnb_exact, solve_lp_relaxation, BnbConfig};
use nfpassoc::gap_bound::{relaxed_assign, solve_relaxed_bnb, u1_bound};
use nfpassoc::greedy::{solve_cmdms, solve_mdmds};
use nfpassoc::harness::{
    complexity_ladder, generate_scenario, instance_for, loglog_slope, run_experiment, timing_benchmark, ExperimentKind,
    ExperimentSpec, HarnessConfig, SolverKind,
};
use nfpassoc::model::{check_constraints, check_feasible, ConstraintSet};
use nfpassoc::scenario::coverage_radius;
use nfpassoc::synthetic::random_instance;
use nfpassoc::{Limits, ProblemInstance, Solution};

/// Relative tolerance of every value comparison below.
const REL_TOL: f64 = 1e-9;
const ORACLE_BUDGET_S: f64 = 60.0;
const SCENARIOS: usize = 100;
const SINGLE_SOLVE_BUDGET_S: f64 = 0.05;
const MAX_LADDER_SLOPE: f64 = 2.3;
const P_LOS_0: f64 = 0.02188;
const P_LOS_90: f64 = 0.99997;
const P_LOS_TOL: f64 = 1e-4;
const FSPL_300M_DB: f64 = 88.00;
const FSPL_TOL_DB: f64 = 0.02;
const INVERSION_TOL_DB: f64 = 0.01;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn geq(a: f64, b: f64) -> bool {
    a >= b - REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn harness_instance(config: &HarnessConfig, seed: u64, limits: impl Fn(usize, f64) -> Limits) -> ProblemInstance {
    let doc = generate_scenario(config, seed).expect("scenario");
    let total: f64 = doc.rates_bps.iter().sum();
    instance_for(config, &doc, limits(doc.scenario.nfp_positions.len(), total)).expect("instance")
}

fn relaxed_copy(instance: &ProblemInstance) -> ProblemInstance {
    let l = instance.limits();
    let total: f64 = (0..instance.n_sc())
        .map(|i| (0..instance.n_d()).map(|j| instance.rate(i, j)).fold(0.0, f64::max))
        .sum();
    let limits = Limits {
        backhaul_rate: 2.0 * total + 1.0,
        nfp_bandwidth: l.nfp_bandwidth.clone(),
        nfp_links: vec![instance.n_sc(); instance.n_d()],
        sinr_min: l.sinr_min,
    };
    instance.with_limits(limits).expect("relaxed limits")
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let config = BnbConfig::default();
    let mut mismatches = Vec::new();
    for seed in 0..100u64 {
        let n_sc = 2 + (seed % 7) as usize;
        let n_d = 1 + (seed % 3) as usize;
        let inst = random_instance(1000 + seed, n_sc, n_d);
        let bnb = solve_bnb_exact(&inst, &config).map_err(|e| e.to_string())?;
        let brute = brute_force(&inst).map_err(|e| e.to_string())?;
        if bnb.sum_rate != brute.sum_rate {
            mismatches.push(format!("seed {seed}: bnb {} brute {}", bnb.sum_rate, brute.sum_rate));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if !mismatches.is_empty() {
        return Err(mismatches.join("; "));
    }
    if elapsed >= ORACLE_BUDGET_S {
        return Err(format!("took {elapsed:.1}s"));
    }
    Ok(format!("100 instances equal, {elapsed:.2}s"))
}

/// 120 synthetic instances up to 12×3 plus 80 geometric ones at 30×3 with
/// limits from binding to slack.
fn mixed_instances() -> Vec<ProblemInstance> {
    let mut out = Vec::new();
    for k in 0..120u64 {
        let (n_sc, n_d) = if k < 60 {
            (2 + (k % 5) as usize, 1 + (k % 2) as usize)
        } else {
            (7 + (k % 6) as usize, 2 + (k % 2) as usize)
        };
        out.push(random_instance(5000 + k, n_sc, n_d));
    }
    let config = HarnessConfig::default();
    for k in 0..80u64 {
        let fraction = 0.2 + 0.15 * (k % 8) as f64;
        let bandwidth = [0.2e9, 0.6e9, 1.0e9, 5e9][(k % 4) as usize];
        let links = [6, 8, 12, 30][(k / 4 % 4) as usize];
        out.push(harness_instance(&config, 700 + k, |n_d, total| {
            Limits::uniform(n_d, fraction * total, bandwidth, links, config.limits.sinr_min_linear())
        }));
    }
    out
}

fn bound_chain() -> Outcome {
    let config = BnbConfig::default();
    let mut violations = Vec::new();
    let mut small = 0;
    let instances = mixed_instances();
    for (k, inst) in instances.iter().enumerate() {
        let exact = solve_bnb_exact(inst, &config).map_err(|e| e.to_string())?;
        let lp = solve_lp_relaxation(inst);
        let gap = solve_relaxed_bnb(inst);
        let relaxed = relaxed_assign(inst);
        let u1 = u1_bound(inst);
        let mut check = |ok: bool, what: &str| {
            if !ok {
                violations.push(format!("#{k} {}x{}: {what}", inst.n_sc(), inst.n_d()));
            }
        };
        check(geq(lp.objective, exact.sum_rate), "LP < exact");
        check(geq(gap.sum_rate, exact.sum_rate), "relaxed B&B < exact");
        check(geq(relaxed.u0, u1), "U0 < U1");
        check(geq(u1, gap.sum_rate), "U1 < relaxed B&B");
        if inst.n_sc() <= 6 && inst.n_d() <= 2 {
            small += 1;
            let brute = brute_force(&relaxed_copy(inst)).map_err(|e| e.to_string())?;
            check(geq(u1, brute.sum_rate), "U1 < relaxed brute force");
            check(close(gap.sum_rate, brute.sum_rate), "relaxed B&B != relaxed brute force");
        }
    }
    if violations.is_empty() {
        Ok(format!("{} instances, {small} with relaxed brute force", instances.len()))
    } else {
        Err(violations.join("; "))
    }
}

fn feasibility() -> Outcome {
    let config = BnbConfig::default();
    let harness = HarnessConfig::default();
    let mut violations = Vec::new();
    let mut checked = 0;
    for k in 0..500u64 {
        let inst = if k % 5 == 4 {
            let fraction = 0.3 + 0.1 * (k % 9) as f64;
            let bandwidth = [0.3e9, 0.6e9, 1.5e9][(k % 3) as usize];
            harness_instance(&harness, 2000 + k, |n_d, total| {
                Limits::uniform(n_d, fraction * total, bandwidth, 5 + (k % 10) as usize, harness.limits.sinr_min_linear())
            })
        } else {
            random_instance(9000 + k, 1 + (k % 10) as usize, 1 + (k % 3) as usize)
        };
        let binary: [(&str, Solution, ConstraintSet); 4] = [
            ("mdmds", solve_mdmds(&inst), ConstraintSet::ALL),
            ("cmdms", solve_cmdms(&inst), ConstraintSet::ALL),
            ("bnb", solve_bnb_exact(&inst, &config).map_err(|e| e.to_string())?, ConstraintSet::ALL),
            // The relaxed solver answers the problem without backhaul and link limits.
            ("gap_bnb", solve_relaxed_bnb(&inst), ConstraintSet::RELAXED),
        ];
        for (name, sol, set) in binary {
            let report = check_constraints(&inst, &sol.assignment, set).map_err(|e| e.to_string())?;
            if !report.feasible {
                violations.push(format!("#{k} {name}: {report}"));
            }
            checked += 1;
        }
        let lp = solve_lp_relaxation(&inst);
        let report = check_feasible(&inst, &lp.assignment).map_err(|e| e.to_string())?;
        if !report.feasible {
            violations.push(format!("#{k} lp: {report}"));
        }
        checked += 1;
    }
    if violations.is_empty() {
        Ok(format!("{checked} solutions feasible"))
    } else {
        Err(violations.join("; "))
    }
}

fn rate_sweep_spec() -> ExperimentSpec {
    let config = HarnessConfig::default();
    let mut spec = ExperimentSpec::new(ExperimentKind::RateSweep, &config);
    spec.sweep_values = (1..=7).map(|k| k as f64 / 5.0).collect();
    spec.scenarios_per_point = SCENARIOS;
    spec
}

fn plateau(outcome: &nfpassoc::harness::ExperimentOutcome, spec: &ExperimentSpec) -> Outcome {
    let mut problems = Vec::new();
    if !outcome.failures.is_empty() {
        problems.push(format!("{} failed runs", outcome.failures.len()));
    }
    for &solver in &spec.solver_set {
        let means: Vec<(f64, f64)> = spec
            .sweep_values
            .iter()
            .map(|&v| (v, outcome.row(v, solver).map_or(f64::NAN, |r| r.mean_sum_rate)))
            .collect();
        for w in means.windows(2) {
            if w[1].0 <= 1.0 + REL_TOL && !geq(w[1].1, w[0].1) {
                problems.push(format!("{solver} decreases from R_r={} to {}", w[0].0, w[1].0));
            }
        }
        let at_one = means.iter().find(|(v, _)| close(*v, 1.0)).map(|m| m.1).unwrap_or(f64::NAN);
        for &(v, m) in means.iter().filter(|(v, _)| *v >= 1.0 - REL_TOL) {
            if !close(m, at_one) {
                problems.push(format!("{solver} mean at R_r={v} is {m}, at 1 is {at_one}"));
            }
        }
    }
    for solver in [SolverKind::Bnb, SolverKind::Mdmds, SolverKind::Cmdms] {
        for &v in spec.sweep_values.iter().filter(|v| **v >= 1.0 - REL_TOL) {
            let short = outcome.values(v, solver).iter().filter(|r| r.associated != 30).count();
            if short > 0 {
                problems.push(format!("{solver} leaves SCs unassociated in {short} scenarios at R_r={v}"));
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{} solvers over {} points", spec.solver_set.len(), spec.sweep_values.len()))
    } else {
        Err(problems.join("; "))
    }
}

fn gap_invariance(outcome: &nfpassoc::harness::ExperimentOutcome, spec: &ExperimentSpec) -> Outcome {
    let reference = outcome.values(spec.sweep_values[0], SolverKind::GapBnb);
    if reference.len() != spec.scenarios_per_point {
        return Err(format!("{} of {} scenarios recorded", reference.len(), spec.scenarios_per_point));
    }
    let mut problems = Vec::new();
    for &v in &spec.sweep_values[1..] {
        let values = outcome.values(v, SolverKind::GapBnb);
        if values.len() != reference.len() {
            problems.push(format!("R_r={v}: {} scenarios recorded", values.len()));
            continue;
        }
        for (a, b) in reference.iter().zip(&values) {
            if a.sum_rate != b.sum_rate {
                problems.push(format!("scenario {} differs at R_r={v}: {} vs {}", a.scenario_index, a.sum_rate, b.sum_rate));
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{} scenarios identical across {} points", reference.len(), spec.sweep_values.len()))
    } else {
        Err(problems.join("; "))
    }
}

fn bandwidth_tightness() -> Outcome {
    let config = HarnessConfig::default();
    let mut spec = ExperimentSpec::new(ExperimentKind::BandwidthSweep, &config);
    spec.scenarios_per_point = SCENARIOS;
    spec.solver_set = vec![SolverKind::Bnb, SolverKind::GapBnb];
    let outcome = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    if !outcome.failures.is_empty() {
        problems.push(format!("{} failed runs", outcome.failures.len()));
    }
    let mut compared = 0;
    for &v in &spec.sweep_values {
        let exact = outcome.values(v, SolverKind::Bnb);
        let gap = outcome.values(v, SolverKind::GapBnb);
        if exact.len() != SCENARIOS || gap.len() != SCENARIOS {
            problems.push(format!("B={v}: {} / {} scenarios recorded", exact.len(), gap.len()));
            continue;
        }
        for (e, g) in exact.iter().zip(&gap) {
            compared += 1;
            if !e.proven || !g.proven || !close(e.sum_rate, g.sum_rate) {
                problems.push(format!("B={v} scenario {}: bnb {} gap_bnb {}", e.scenario_index, e.sum_rate, g.sum_rate));
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{compared} scenario pairs equal"))
    } else {
        Err(problems.join("; "))
    }
}

fn timing_ordering() -> Outcome {
    let config = HarnessConfig::default();
    let mut spec = ExperimentSpec::new(ExperimentKind::Timing, &config);
    spec.sweep_values = vec![2.3e9];
    spec.scenarios_per_point = SCENARIOS;
    spec.base_config.limits.nfp_bandwidth_hz = 0.6e9;
    spec.base_config.limits.nfp_links = 8;
    spec.solver_set = vec![SolverKind::Mdmds, SolverKind::Cmdms, SolverKind::Bnb];
    let rows = timing_benchmark(&spec).map_err(|e| e.to_string())?;
    let mean = |s: SolverKind| rows.iter().find(|r| r.solver_name == s.name()).map(|r| r.mean_wall_time);
    let bnb = mean(SolverKind::Bnb).ok_or("no bnb row")?;
    let mut problems = Vec::new();
    let mut detail = format!("bnb {bnb:.3e}s");
    let probe = harness_instance(&config, config.run.base_seed, |n_d, _| Limits::uniform(n_d, 2.3e9, 0.6e9, 8, config.limits.sinr_min_linear()));
    if (probe.n_sc(), probe.n_d()) != (30, 3) {
        problems.push(format!("single-solve instance is {}x{}", probe.n_sc(), probe.n_d()));
    }
    for solver in [SolverKind::Mdmds, SolverKind::Cmdms] {
        let m = mean(solver).ok_or("no greedy row")?;
        if m >= bnb {
            problems.push(format!("{solver} mean {m:.3e}s not below bnb {bnb:.3e}s"));
        }
        let start = Instant::now();
        let sol = match solver {
            SolverKind::Mdmds => solve_mdmds(&probe),
            _ => solve_cmdms(&probe),
        };
        let single = start.elapsed().as_secs_f64();
        std::hint::black_box(sol);
        if single >= SINGLE_SOLVE_BUDGET_S {
            problems.push(format!("{solver} single solve took {single:.3e}s"));
        }
        detail.push_str(&format!(", {solver} {m:.3e}s (single {single:.3e}s)"));
    }
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(problems.join("; "))
    }
}

fn complexity_envelope() -> Outcome {
    let sizes = [10, 20, 40, 80];
    let greedy = [SolverKind::Mdmds, SolverKind::Cmdms];
    let points = complexity_ladder(&HarnessConfig::default(), &sizes, 20, 200, &greedy).map_err(|e| e.to_string())?;
    let mut slopes = Vec::new();
    let mut problems = Vec::new();
    for solver in greedy {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|p| p.solver_name == solver.name())
            .map(|p| (p.n_sc as f64, p.mean_wall_time))
            .unzip();
        let slope = loglog_slope(&xs, &ys);
        if slope.is_nan() || slope > MAX_LADDER_SLOPE {
            problems.push(format!("{solver} slope {slope:.3}"));
        }
        slopes.push(format!("{solver} slope {slope:.3}"));
    }
    if problems.is_empty() {
        Ok(slopes.join(", "))
    } else {
        Err(problems.join("; "))
    }
}

fn channel_points() -> Outcome {
    let env = ChannelEnv::default();
    let mut problems = Vec::new();
    let p0 = p_los_at_elevation(0.0, &env);
    let p90 = p_los_at_elevation(90.0, &env);
    let fspl = fspl_db(300.0, &env);
    if (p0 - P_LOS_0).abs() > P_LOS_TOL {
        problems.push(format!("p_los(0) = {p0}"));
    }
    if (p90 - P_LOS_90).abs() > P_LOS_TOL {
        problems.push(format!("p_los(90) = {p90}"));
    }
    if (fspl - FSPL_300M_DB).abs() > FSPL_TOL_DB {
        problems.push(format!("FSPL(300 m) = {fspl}"));
    }
    let mut worst: f64 = 0.0;
    for h in [200.0, 300.0, 400.0, 500.0, 600.0] {
        for pl_max in [112.0, 118.0] {
            let radius = coverage_radius(h, pl_max, &env).map_err(|e| e.to_string())?;
            let pl = path_loss_at(radius, h, &env).map_err(|e| e.to_string())?;
            worst = worst.max((pl - pl_max).abs());
        }
    }
    if worst > INVERSION_TOL_DB {
        problems.push(format!("coverage inversion off by {worst} dB"));
    }
    if problems.is_empty() {
        Ok(format!("p_los(0)={p0:.5}, p_los(90)={p90:.5}, FSPL={fspl:.4} dB, inversion error {worst:.2e} dB"))
    } else {
        Err(problems.join("; "))
    }
}

fn greedy_gap_report() -> Outcome {
    let config = HarnessConfig::default();
    let mut spec = ExperimentSpec::new(ExperimentKind::Timing, &config);
    spec.scenarios_per_point = SCENARIOS;
    spec.solver_set = vec![SolverKind::Mdmds, SolverKind::Cmdms, SolverKind::Bnb];
    spec.output_path = Some(PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_greedy_gap.csv"));
    let outcome = run_experiment(&spec).map_err(|e| e.to_string())?;
    let gap = |s: SolverKind| {
        outcome
            .row(spec.sweep_values[0], s)
            .and_then(|r| r.mean_gap_to_exact)
            .map_or("n/a".to_string(), |g| format!("{:.4}%", 100.0 * g))
    };
    Ok(format!(
        "reported only: mean gap to exact mdmds {}, cmdms {} (csv {})",
        gap(SolverKind::Mdmds),
        gap(SolverKind::Cmdms),
        spec.output_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
    ))
}

fn main() -> ExitCode {
    let spec = rate_sweep_spec();
    let rate_outcome = run_experiment(&spec);
    let criteria: Vec<Criterion> = vec![
        ("bnb matches brute force", Box::new(oracle_equivalence)),
        ("bound dominance chain", Box::new(bound_chain)),
        ("every solution feasible", Box::new(feasibility)),
        ("rate sweep plateau", Box::new(|| match &rate_outcome {
            Ok(o) => plateau(o, &spec),
            Err(e) => Err(e.to_string()),
        })),
        ("relaxed bound invariant in R_r", Box::new(|| match &rate_outcome {
            Ok(o) => gap_invariance(o, &spec),
            Err(e) => Err(e.to_string()),
        })),
        ("bandwidth sweep tightness", Box::new(bandwidth_tightness)),
        ("greedy faster than exact", Box::new(timing_ordering)),
        ("greedy complexity envelope", Box::new(complexity_envelope)),
        ("channel point checks", Box::new(channel_points)),
        ("greedy-vs-exact gap", Box::new(greedy_gap_report)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
