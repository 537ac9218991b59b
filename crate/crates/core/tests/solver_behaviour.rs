use ashlwb_core::instances::{box_vs_box, lens, two_ball};
use ashlwb_core::oracles::brute_force_pair;
use ashlwb_core::{
    distance_estimate, extract_best_pair, run_ashlwb, run_cheney_goldstein, ConvexSet, Family,
    Point, Problem, SolverOptions, Terminal,
};

fn p(v: &[f64]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

#[test]
fn lens_pair_and_gap() {
    let prob = lens().unwrap();
    let trace = run_ashlwb(&prob, &p(&[0.0, 1.0])).unwrap();
    assert_eq!(trace.terminal, Terminal::Converged);
    let pair = extract_best_pair(&trace, &prob).unwrap();
    assert!(pair.a.distance(&p(&[2.0, 0.0])) < 1e-3, "{pair:?}");
    assert!(pair.b.distance(&p(&[4.0, 0.0])) < 1e-3, "{pair:?}");
    assert!((pair.gap - 2.0).abs() < 1e-3);
    assert!(pair.residuals.max() <= prob.options.fixed_point_tol);
}

#[test]
fn every_iterate_stays_in_bounding_ball() {
    for prob in [two_ball().unwrap(), lens().unwrap(), box_vs_box().unwrap()] {
        let mut prob = prob;
        prob.options.record_inner_steps = true;
        let trace = run_ashlwb(&prob, &p(&[-1.0, 3.0])).unwrap();
        for e in trace.iterates.iter().chain(&trace.inner) {
            assert!(e.x.norm() <= prob.rho + 1e-12, "{e:?}");
        }
    }
}

#[test]
fn near_fixed_start_settles_quickly() {
    let prob = two_ball().unwrap();
    let trace = run_ashlwb(&prob, &p(&[1.0, 0.0])).unwrap();
    assert_eq!(trace.terminal, Terminal::Converged);
    let odd: Vec<&Point> = trace
        .iterates
        .iter()
        .skip(1)
        .step_by(2)
        .map(|e| &e.x)
        .collect();
    // the start is a fixed point of the first A sweep
    assert_eq!(odd[0], &p(&[1.0, 0.0]));
    let steps: Vec<f64> = odd.windows(2).map(|w| w[0].distance(w[1])).collect();
    assert!(
        steps[7..].iter().all(|&s| s <= prob.options.pair_gap_tol),
        "{steps:?}"
    );
}

#[test]
fn swap_symmetry() {
    for prob in [two_ball().unwrap(), lens().unwrap()] {
        let x0 = p(&[0.3, -0.2]);
        let fwd = extract_best_pair(&run_ashlwb(&prob, &x0).unwrap(), &prob).unwrap();
        let sw = prob.swapped();
        let back = extract_best_pair(&run_ashlwb(&sw, &x0).unwrap(), &sw)
            .unwrap()
            .swapped();
        assert!(fwd.a.distance(&back.a) < 1e-3 && fwd.b.distance(&back.b) < 1e-3);
    }
}

#[test]
fn baseline_lens_and_agreement() {
    let prob = lens().unwrap();
    let x0 = p(&[0.0, 1.0]);
    let cg = run_cheney_goldstein(&prob, &x0, 1e-6, 1000).unwrap();
    assert!(cg.a.distance(&p(&[2.0, 0.0])) < 1e-3);
    assert!(cg.b.distance(&p(&[4.0, 0.0])) < 1e-3);
    let ours = extract_best_pair(&run_ashlwb(&prob, &x0).unwrap(), &prob).unwrap();
    assert!(cg.a.distance(&ours.a) < 1e-3 && cg.b.distance(&ours.b) < 1e-3);
}

#[test]
fn distance_estimate_lens() {
    assert!((distance_estimate(&lens().unwrap()).unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn parallel_boxes_still_terminate() {
    let prob = box_vs_box().unwrap();
    let trace = run_ashlwb(&prob, &p(&[0.0, 0.0])).unwrap();
    let pair = extract_best_pair(&trace, &prob).unwrap();
    assert!((pair.gap - 2.0).abs() < 1e-3);
    assert!((pair.a[0] - 1.0).abs() < 1e-3 && (pair.b[0] - 3.0).abs() < 1e-3);
}

/// In three dimensions: unit ball against a ball cut by a half-space.
#[test]
fn three_dimensional_instance() {
    let a = Family::uniform(vec![ConvexSet::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap()]).unwrap();
    let b = Family::uniform(vec![
        ConvexSet::ball(vec![3.0, 0.0, 0.0], 1.0).unwrap(),
        ConvexSet::half_space(vec![-1.0, 0.0, 0.0], -2.5).unwrap(),
    ])
    .unwrap();
    let prob = Problem::new(a, b, SolverOptions::default(), 0).unwrap();
    let pair = extract_best_pair(&run_ashlwb(&prob, &p(&[0.0, 0.0, 0.0])).unwrap(), &prob).unwrap();
    assert!(pair.a.distance(&p(&[1.0, 0.0, 0.0])) < 1e-3, "{pair:?}");
    assert!(pair.b.distance(&p(&[2.5, 0.0, 0.0])) < 1e-3, "{pair:?}");
    let oracle = brute_force_pair(&prob, 0.05).unwrap();
    assert!((oracle.gap - pair.gap).abs() < 1e-3);
}
