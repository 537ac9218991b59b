//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs as a plain binary so the verdict lines are always printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ashlwb_core::instances::{box_vs_box, lens, two_ball};
use ashlwb_core::operators::{sweep, SHLWB_MAX_ITER};
use ashlwb_core::oracles::{
    analytic_two_ball, ball_grid, brute_force_pair, dini_monotonicity_check, fix_set_audit,
    product_convergence_profile, sample_family, separation_check, sup_residual,
    uniqueness_certificate, Verdict,
};
use ashlwb_core::{
    apply_m_hat, apply_q_hat, extract_best_pair, run_ashlwb, run_cheney_goldstein, shlwb_project,
    ConvexSet, Family, FamilyLabel, Point, SweepOperator, Terminal,
};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn p(v: &[f64]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

fn problems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems")
}

/// Uniform points of `B[0, rho]` in dimension `dim`.
fn ball_points(dim: usize, rho: f64, n: usize, seed: u64) -> Vec<Point> {
    let ball = Family::uniform(vec![ConvexSet::ball(vec![0.0; dim], rho).unwrap()]).unwrap();
    let mut rng = ashlwb_core::oracles::rng_from_seed(seed);
    sample_family(&ball, FamilyLabel::A, rho, n, &mut rng).unwrap()
}

fn two_ball_run() -> Outcome {
    let t = Instant::now();
    let prob = two_ball().unwrap();
    let trace = run_ashlwb(&prob, &p(&[0.0, 0.0])).unwrap();
    let pair = extract_best_pair(&trace, &prob).unwrap();
    let oracle = analytic_two_ball(&prob).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let err = pair
        .a
        .distance(&oracle.pair.0)
        .max(pair.b.distance(&oracle.pair.1));
    let gap_err = (pair.gap - oracle.gap).abs();
    let pass = trace.terminal == Terminal::Converged
        && err <= 1e-3
        && gap_err <= 1e-3
        && trace.sweeps <= 200
        && elapsed < 5.0;
    (
        pass,
        format!(
            "terminal {:?}, {} sweeps, pair error {err:.2e}, gap error {gap_err:.2e}, {elapsed:.2}s",
            trace.terminal, trace.sweeps
        ),
    )
}

fn lens_run() -> Outcome {
    let t = Instant::now();
    let prob = lens().unwrap();
    let x0 = p(&[0.0, 1.0]);
    let trace = run_ashlwb(&prob, &x0).unwrap();
    let ours = extract_best_pair(&trace, &prob).unwrap();
    let (ta, tb) = (p(&[2.0, 0.0]), p(&[4.0, 0.0]));
    let err = ours.a.distance(&ta).max(ours.b.distance(&tb));
    let oracle = brute_force_pair(&prob, 1e-2).unwrap();
    let oracle_err = oracle.pair.0.distance(&ta).max(oracle.pair.1.distance(&tb));
    let cg = run_cheney_goldstein(&prob, &x0, prob.options.reference_tol, 1000).unwrap();
    let gaps = [ours.gap, cg.gap, oracle.gap];
    let spread = gaps.iter().copied().fold(f64::MIN, f64::max)
        - gaps.iter().copied().fold(f64::MAX, f64::min);
    let pair_spread = [
        ours.a.distance(&cg.a),
        ours.b.distance(&cg.b),
        ours.a.distance(&oracle.pair.0),
        ours.b.distance(&oracle.pair.1),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let elapsed = t.elapsed().as_secs_f64();
    let pass = err <= 2e-3
        && (ours.gap - 2.0).abs() <= 2e-3
        && oracle_err <= 2e-3
        && spread <= 1e-2
        && pair_spread <= 1e-2
        && elapsed < 30.0;
    (
        pass,
        format!(
            "pair error {err:.2e}, gap {:.6}, oracle error {oracle_err:.2e}, solver gap spread {spread:.2e}, pair spread {pair_spread:.2e}, {elapsed:.2}s",
            ours.gap
        ),
    )
}

fn gap_limit() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, prob, x0) in [
        ("two-ball", two_ball().unwrap(), p(&[0.0, 0.0])),
        ("lens", lens().unwrap(), p(&[0.0, 1.0])),
    ] {
        let dist = brute_force_pair(&prob, 1e-2).unwrap().gap;
        let trace = run_ashlwb(&prob, &x0).unwrap();
        let odd = trace.odd_gaps();
        let tail = &odd[odd.len().saturating_sub(5)..];
        let worst = tail.iter().map(|g| (g - dist).abs()).fold(0.0, f64::max);
        let ok = tail.len() == 5 && worst <= 2.0 * prob.options.pair_gap_tol;
        pass &= ok;
        parts.push(format!(
            "{name} worst |gap - dist| over final 5 sweeps {worst:.2e}"
        ));
    }
    (pass, parts.join("; "))
}

fn shlwb_accuracy() -> Outcome {
    let ball = ConvexSet::ball(vec![1.0, -0.5], 1.5).unwrap();
    let fam = Family::uniform(vec![ball.clone()]).unwrap();
    let rho = ball.bounding_radius().unwrap();
    let t = Instant::now();
    let mut worst = 0.0f64;
    for anchor in ball_points(2, rho, 100, 4) {
        let y = shlwb_project(&fam, &anchor, 1e-6, SHLWB_MAX_ITER).unwrap();
        worst = worst.max(y.distance(&ball.project(&anchor).unwrap()));
    }
    (
        worst <= 1e-4,
        format!(
            "100 anchors in B[0,{rho:.3}], worst error {worst:.2e}, {:.2}s",
            t.elapsed().as_secs_f64()
        ),
    )
}

fn operator_suite() -> Outcome {
    let t = Instant::now();
    let mut violations = Vec::new();
    let mut checks = 0usize;

    // projections: nonexpansive, idempotent, variational inequality
    let sets = [
        ConvexSet::ball(vec![1.0, -0.5], 1.5).unwrap(),
        ConvexSet::half_space(vec![1.0, 2.0], 0.5).unwrap(),
        ConvexSet::hyperplane(vec![-1.0, 1.0], 0.3).unwrap(),
        ConvexSet::aabb(vec![-1.0, 0.0], vec![0.5, 2.0]).unwrap(),
        ConvexSet::ellipsoid(vec![0.5, 0.5], vec![2.0, 0.7]).unwrap(),
    ];
    let xs = ball_points(2, 6.0, 1000, 1);
    let ys = ball_points(2, 6.0, 1000, 2);
    for (si, s) in sets.iter().enumerate() {
        let inner: Vec<Point> = ys.iter().map(|y| s.project(y).unwrap()).collect();
        for (x, y) in xs.iter().zip(&ys) {
            let (px, py) = (s.project(x).unwrap(), s.project(y).unwrap());
            checks += 2;
            if px.distance(&py) > x.distance(y) + 1e-10 {
                violations.push(format!("set {si}: projection expands"));
            }
            if s.project(&px).unwrap().distance(&px) > 1e-10 {
                violations.push(format!("set {si}: projection not idempotent"));
            }
        }
        for x in xs.iter().take(50) {
            let px = s.project(x).unwrap();
            let r = x - &px;
            for y in &inner {
                checks += 1;
                if (y - &px).dot(&r) > 1e-9 {
                    violations.push(format!("set {si}: variational inequality"));
                }
            }
        }
    }

    // M̂, Q̂ and the solver sweep on the desk families
    let desk = [two_ball().unwrap(), lens().unwrap(), box_vs_box().unwrap()];
    for (pi, prob) in desk.iter().enumerate() {
        let xs = ball_points(2, prob.rho, 1000, 10 + pi as u64);
        let ys = ball_points(2, prob.rho, 1000, 20 + pi as u64);
        for fam in [&prob.family_a, &prob.family_b] {
            for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
                let tau = fam.schedule().tau(i % 50);
                let q = i % 30;
                let pairs = [
                    (
                        apply_m_hat(fam, tau, x).unwrap(),
                        apply_m_hat(fam, tau, y).unwrap(),
                    ),
                    (
                        apply_q_hat(fam, q, x).unwrap(),
                        apply_q_hat(fam, q, y).unwrap(),
                    ),
                    (
                        sweep(fam, SweepOperator::Product, q, x, None).unwrap(),
                        sweep(fam, SweepOperator::Product, q, y, None).unwrap(),
                    ),
                ];
                for (fx, fy) in &pairs {
                    checks += 2;
                    if fx.distance(fy) > x.distance(y) + 1e-10 {
                        violations.push(format!("instance {pi}: operator expands"));
                    }
                    if fx.norm() > prob.rho + 1e-12 {
                        violations.push(format!("instance {pi}: operator leaves B[0,rho]"));
                    }
                }
            }

            // Fix(M̂) = Fix(Q̂) = ∩C on sampled points
            let mut rng = ashlwb_core::oracles::rng_from_seed(30 + pi as u64);
            let inside = sample_family(fam, FamilyLabel::A, prob.rho, 200, &mut rng).unwrap();
            let outside: Vec<Point> = xs
                .iter()
                .filter(|x| fam.max_violation(x).unwrap() > 1e-3)
                .cloned()
                .collect();
            for q in [0, 3, 10] {
                checks += inside.len() + outside.len();
                if !fix_set_audit(fam, q, &inside, &outside).unwrap().pass {
                    violations.push(format!("instance {pi}: Q̂ fixed-point audit, q = {q}"));
                }
            }
            checks += inside.len() + outside.len();
            for x in &inside {
                if apply_m_hat(fam, 0.3, x).unwrap().distance(x) > 1e-9 {
                    violations.push(format!("instance {pi}: M̂ moves an inside point"));
                }
            }
            for x in &outside {
                if apply_m_hat(fam, 0.3, x).unwrap().distance(x) == 0.0 {
                    violations.push(format!("instance {pi}: M̂ fixes an outside point"));
                }
            }
        }

        // every recorded iterate, inner steps included, stays in B[0,rho]
        let mut prob = prob.clone();
        prob.options.record_inner_steps = true;
        for x0 in ball_points(2, prob.rho, 5, 40 + pi as u64) {
            let trace = run_ashlwb(&prob, &x0).unwrap();
            checks += trace.iterates.len() + trace.inner.len();
            if trace
                .iterates
                .iter()
                .chain(&trace.inner)
                .any(|e| e.x.norm() > prob.rho + 1e-12)
            {
                violations.push(format!("instance {pi}: iterate outside B[0,rho]"));
            }
        }
    }

    let elapsed = t.elapsed().as_secs_f64();
    let pass = violations.is_empty() && elapsed < 60.0;
    let first = violations
        .first()
        .map(|v| format!(" (first: {v})"))
        .unwrap_or_default();
    (
        pass,
        format!(
            "{checks} checks, {} violations{first}, {elapsed:.2}s",
            violations.len()
        ),
    )
}

fn dini() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, prob) in [("two-ball", two_ball().unwrap()), ("lens", lens().unwrap())] {
        let grid = ball_grid(2, prob.rho, 21);
        for (label, fam) in [("A", &prob.family_a), ("B", &prob.family_b)] {
            let r = dini_monotonicity_check(fam, &grid, 50).unwrap();
            pass &= r.pass;
            parts.push(format!("{name}/{label} {} violations", r.violations.len()));
        }
    }
    let prob = lens().unwrap();
    let grid = ball_grid(2, prob.rho, 21);
    for (label, fam) in [("A", &prob.family_a), ("B", &prob.family_b)] {
        let sup = sup_residual(fam, &grid, 500).unwrap();
        pass &= sup < 0.05;
        parts.push(format!("lens/{label} sup residual at k=500 {sup:.4}"));
    }
    let prof = product_convergence_profile(&prob, &grid, &[10, 50, 100, 500]).unwrap();
    parts.push(format!(
        "lens product sup at k=500 {:.4} (largest increase {:.1e})",
        prof.sup.last().unwrap(),
        prof.max_increase
    ));
    (pass, parts.join("; "))
}

fn uniqueness() -> Outcome {
    let lens_cert = uniqueness_certificate(&lens().unwrap());
    let prob = box_vs_box().unwrap();
    let box_cert = uniqueness_certificate(&prob);
    let trace = run_ashlwb(&prob, &p(&[0.0, 0.0])).unwrap();
    let pair = extract_best_pair(&trace, &prob).unwrap();
    let sep = separation_check(&prob, (&pair.a, &pair.b), 1000).unwrap();
    let pass = lens_cert.verdict == Verdict::UniqueGuaranteed
        && box_cert.verdict == Verdict::NotGuaranteed
        && sep.pass;
    (
        pass,
        format!(
            "lens {:?}, box-vs-box {:?} (terminal {:?} after {} sweeps), separation {} (worst margins {:.2e}, {:.2e})",
            lens_cert.verdict,
            box_cert.verdict,
            trace.terminal,
            trace.sweeps,
            if sep.pass { "passes" } else { "fails" },
            sep.a_side.worst_margin,
            sep.b_side.worst_margin
        ),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ashlwb");
    let file = problems_dir().join("lens.json");
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}"));
        let res = Command::new(bin)
            .arg("run")
            .arg(&file)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        outputs.push((
            res.status.code(),
            res.stdout,
            std::fs::read(out.join("trace.csv")).unwrap(),
            std::fs::read(out.join("summary.json")).unwrap(),
        ));
    }
    let same = outputs[0] == outputs[1];
    let pass = same && outputs[0].0 == Some(0);
    (
        pass,
        format!(
            "exit {:?}, stdout/trace.csv/summary.json identical: {same} ({} trace bytes)",
            outputs[0].0,
            outputs[0].2.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("two-ball pair", two_ball_run),
        ("lens pair and solver agreement", lens_run),
        ("gap limit", gap_limit),
        ("S-HLWB projection accuracy", shlwb_accuracy),
        ("operator invariants", operator_suite),
        ("Dini monotonicity and uniform convergence", dini),
        ("uniqueness certificate and separation", uniqueness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {name}: {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
