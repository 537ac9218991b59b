use std::fs;
use std::path::Path;

use ashlwb_core::dykstra::reference_projection;
use ashlwb_core::operators::{shlwb_project_with_stats, SHLWB_MAX_ITER};
use ashlwb_core::oracles::{
    analytic_two_ball, ball_grid, brute_force_pair, dini_monotonicity_check, fix_set_audit,
    uniqueness_certificate, OUTSIDE_MARGIN,
};
use ashlwb_core::report::{write_trace_csv, RunSummary};
use ashlwb_core::sets::CONTAINMENT_TOL;
use ashlwb_core::solver::feasible_point;
use ashlwb_core::{
    extract_best_pair, run_ashlwb, run_cheney_goldstein, Error, FamilyLabel, Point, Problem,
    ProblemFile, SteeringSchedule, Terminal,
};
use serde_json::json;

use crate::{FamilyArg, Overrides};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_MAX_SWEEPS: u8 = 2;
pub const EXIT_MAX_ITER: u8 = 3;
pub const EXIT_DISAGREE: u8 = 4;

/// Largest gap spread tolerated by `compare`.
const AGREEMENT_TOL: f64 = 1e-2;
const DINI_K: usize = 50;
const DINI_MAX_POINTS: usize = 625;
const SCHEDULE_PREFIX: usize = 100_000;

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    match e {
        Error::MaxIterExceeded { gap, .. } => {
            eprintln!("last gap: {gap:e}");
            EXIT_MAX_ITER
        }
        _ => EXIT_INVALID,
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(&e.into()),
        }
    };
}

fn load(path: &Path, ov: Option<&Overrides>) -> Result<ProblemFile, Error> {
    let mut pf = ProblemFile::read(path)?;
    if let Some(ov) = ov {
        let mut opts = pf.options.unwrap_or_default();
        if let Some(n) = ov.max_sweeps {
            opts.max_sweeps = n;
        }
        if let Some(t) = ov.tol {
            opts.pair_gap_tol = t;
        }
        pf.options = Some(opts);
        if let Some(s) = &ov.schedule {
            let [c, k0, p] = s[..] else {
                return Err(Error::InvalidSchedule("--schedule takes c,k0,p".into()));
            };
            let sched = SteeringSchedule::new(c, k0, p)?;
            pf.family_a.schedule = Some(sched);
            pf.family_b.schedule = Some(sched);
        }
        if let Some(seed) = ov.seed {
            pf.seed = Some(seed);
        }
    }
    Ok(pf)
}

fn start_point(problem: &Problem, ov: &Overrides) -> Result<Point, Error> {
    match &ov.x0 {
        Some(v) => {
            let p = Point::new(v.clone())?;
            p.check_dim(problem.dim())?;
            Ok(p)
        }
        None => Ok(Point::zeros(problem.dim())),
    }
}

fn print_json(v: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("reports serialize")
    );
}

pub fn run(path: &Path, ov: &Overrides, out: Option<&Path>) -> u8 {
    let problem = tri!(load(path, Some(ov)).and_then(|pf| pf.to_problem()));
    let x0 = tri!(start_point(&problem, ov));
    let trace = tri!(run_ashlwb(&problem, &x0));
    let pair = tri!(extract_best_pair(&trace, &problem));
    let summary = RunSummary::new(&trace, &pair);
    if trace.start_projected {
        eprintln!(
            "warning: x0 lies outside B[0, {}] and was projected onto it",
            problem.rho
        );
    }
    if let Some(dir) = out {
        tri!(fs::create_dir_all(dir));
        let file = tri!(fs::File::create(dir.join("trace.csv")));
        tri!(write_trace_csv(
            &trace,
            problem.dim(),
            std::io::BufWriter::new(file)
        ));
        tri!(fs::write(
            dir.join("summary.json"),
            summary.to_json() + "\n"
        ));
    }
    println!("{}", summary.to_json());
    match trace.terminal {
        Terminal::Converged => EXIT_OK,
        Terminal::MaxSweeps => EXIT_MAX_SWEEPS,
    }
}

pub fn project(path: &Path, family: FamilyArg, point: &[f64], tol: f64) -> u8 {
    let problem = tri!(load(path, None).and_then(|pf| pf.to_problem()));
    let label = match family {
        FamilyArg::A => FamilyLabel::A,
        FamilyArg::B => FamilyLabel::B,
    };
    let fam = problem.family(label);
    let x = tri!(Point::new(point.to_vec()));
    tri!(x.check_dim(problem.dim()));
    let outcome = tri!(shlwb_project_with_stats(fam, &x, tol, SHLWB_MAX_ITER));
    let mut members = Vec::new();
    for (i, s) in fam.sets().iter().enumerate() {
        members.push(json!({ "index": i, "residual": tri!(s.distance_to(&outcome.point)) }));
    }
    print_json(&json!({
        "family": label,
        "point": outcome.point,
        "iterations": outcome.iterations,
        "last_step": outcome.gap,
        "members": members,
    }));
    EXIT_OK
}

pub fn check(path: &Path, seed: Option<u64>) -> u8 {
    let mut pf = tri!(load(path, None));
    if seed.is_some() {
        pf.seed = seed;
    }
    let problem = match pf.to_problem() {
        Ok(p) => p,
        Err(e) => {
            print_json(&json!({ "pass": false, "validation": e.to_string() }));
            return fail(&e);
        }
    };

    let mut mandatory = true;
    let mut schedules = serde_json::Map::new();
    let mut dini = serde_json::Map::new();
    let mut fix = serde_json::Map::new();
    let n = problem.dim();
    let per_axis = (1..=5usize)
        .rev()
        .find(|k| k.pow(n as u32) <= DINI_MAX_POINTS)
        .unwrap_or(1);
    let grid = ball_grid(n, problem.rho, per_axis);

    for label in [FamilyLabel::A, FamilyLabel::B] {
        let fam = problem.family(label);
        let key = label.to_string();

        let sched = fam.schedule().validate(SCHEDULE_PREFIX);
        mandatory &= sched.all_pass();
        schedules.insert(
            key.clone(),
            serde_json::to_value(&sched).expect("reports serialize"),
        );

        let report = tri!(dini_monotonicity_check(fam, &grid, DINI_K));
        dini.insert(
            key.clone(),
            json!({
                "grid_points": report.grid_points,
                "comparisons": report.comparisons,
                "violations": report.violations.len(),
                "final_sup": report.sup_profile.last(),
                "pass": report.pass,
            }),
        );

        let mut inside = vec![tri!(feasible_point(fam, label))];
        let mut outside = Vec::new();
        for x in &grid {
            if tri!(fam.max_violation(x)) > OUTSIDE_MARGIN {
                outside.push(x.clone());
            }
            let y = tri!(reference_projection(fam.sets(), x));
            if tri!(fam.contains(&y, CONTAINMENT_TOL)) {
                inside.push(y);
            }
        }
        let mut audits = Vec::new();
        for q in [0, 3, 10] {
            let r = tri!(fix_set_audit(fam, q, &inside, &outside));
            mandatory &= r.pass;
            audits.push(r);
        }
        fix.insert(
            key,
            serde_json::to_value(&audits).expect("reports serialize"),
        );
    }

    let cert = uniqueness_certificate(&problem);
    print_json(&json!({
        "pass": mandatory,
        "validation": "ok",
        "rho": problem.rho,
        "schedules": schedules,
        "fix_set": fix,
        "advisory": {
            "uniqueness": cert,
            "dini": dini,
        },
    }));
    if mandatory {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

pub fn oracle(path: &Path, resolution: f64) -> u8 {
    let problem = tri!(load(path, None).and_then(|pf| pf.to_problem()));
    let grid = tri!(brute_force_pair(&problem, resolution));
    print_json(&json!({
        "oracle": grid,
        "analytic": analytic_two_ball(&problem),
    }));
    EXIT_OK
}

pub fn compare(path: &Path, ov: &Overrides, resolution: f64) -> u8 {
    let problem = tri!(load(path, Some(ov)).and_then(|pf| pf.to_problem()));
    let x0 = tri!(start_point(&problem, ov));

    let trace = tri!(run_ashlwb(&problem, &x0));
    let ashlwb = tri!(extract_best_pair(&trace, &problem));
    let baseline = tri!(run_cheney_goldstein(
        &problem,
        &x0,
        problem.options.reference_tol,
        10_000
    ));
    let oracle = match brute_force_pair(&problem, resolution) {
        Ok(o) => Some(o),
        Err(Error::DimensionTooLarge(_)) => None,
        Err(e) => return fail(&e),
    };

    println!(
        "{:<16} {:>12} {:>12} {:>10}  pair",
        "method", "gap", "residual", "iters"
    );
    let fmt_pair = |a: &Point, b: &Point| format!("{:?} {:?}", a.as_slice(), b.as_slice());
    for (name, p) in [("a-s-hlwb", &ashlwb), ("cheney-goldstein", &baseline)] {
        println!(
            "{:<16} {:>12.8} {:>12.3e} {:>10}  {}",
            name,
            p.gap,
            p.residuals.max(),
            p.iterations,
            fmt_pair(&p.a, &p.b)
        );
    }
    let mut gaps = vec![ashlwb.gap, baseline.gap];
    match &oracle {
        Some(o) => {
            println!(
                "{:<16} {:>12.8} {:>12} {:>10}  {}",
                "oracle",
                o.gap,
                "-",
                "-",
                fmt_pair(&o.pair.0, &o.pair.1)
            );
            gaps.push(o.gap);
        }
        None => println!("{:<16} skipped (dimension > 3)", "oracle"),
    }
    let spread = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - gaps.iter().copied().fold(f64::INFINITY, f64::min);
    println!("terminal: {:?}", trace.terminal);
    println!("gap spread: {spread:.3e} (tolerance {AGREEMENT_TOL:e})");
    if spread <= AGREEMENT_TOL {
        EXIT_OK
    } else {
        println!("solvers disagree");
        EXIT_DISAGREE
    }
}
