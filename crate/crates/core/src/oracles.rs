//! Independent oracles and lemma-level checks.
//!
//! Reference projections here come from Dykstra's algorithm, so none of the
//! checks route through the S-HLWB code they are auditing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dykstra::reference_projection;
use crate::error::{Error, FamilyLabel, Result};
use crate::operators::{apply_q_hat, Family};
use crate::point::Point;
use crate::sets::CONTAINMENT_TOL;
use crate::solver::{distance_estimate, IterationTrace, Phase, Problem};

/// Slack of the Dini monotonicity comparisons.
pub const DINI_SLACK: f64 = 1e-9;
/// Slack of the half-space inequality in [`separation_check`].
pub const SEPARATION_SLACK: f64 = 1e-6;
/// Step along `b - a` of the boundary witness.
pub const WITNESS_STEP: f64 = 1e-3;
/// Rejections tolerated per family before sampling gives up.
pub const MAX_REJECTIONS: usize = 1_000_000;
/// Alternating-projection rounds of the grid polish.
pub const POLISH_ROUNDS: usize = 100;
/// Minimum violation margin of an `outside` audit point.
pub const OUTSIDE_MARGIN: f64 = 1e-3;
/// Largest move of an `inside` audit point.
pub const INSIDE_FIX_TOL: f64 = 1e-9;

/// Deterministic generator for all sampling steps.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleMethod {
    GridPolish,
    AnalyticTwoBall,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub pair: (Point, Point),
    pub gap: f64,
    pub method: OracleMethod,
    /// Grid spacing; 0 for the analytic formula.
    pub resolution: f64,
    /// Gap of the best grid pair before polishing.
    pub grid_gap: Option<f64>,
}

/// Closed form for two single-ball families:
/// `a = c_A + r_A u`, `b = c_B - r_B u`, `u = (c_B - c_A)/‖c_B - c_A‖`.
pub fn analytic_two_ball(problem: &Problem) -> Option<OracleResult> {
    use crate::sets::ConvexSet::Ball;
    let (
        Ball {
            center: ca,
            radius: ra,
        },
        Ball {
            center: cb,
            radius: rb,
        },
    ) = (single(&problem.family_a)?, single(&problem.family_b)?)
    else {
        return None;
    };
    let d = ca.distance(cb);
    if d <= ra + rb {
        return None;
    }
    let u = &(cb - ca) * (1.0 / d);
    let a = ca + &(&u * *ra);
    let b = cb - &(&u * *rb);
    Some(OracleResult {
        gap: d - ra - rb,
        pair: (a, b),
        method: OracleMethod::AnalyticTwoBall,
        resolution: 0.0,
        grid_gap: None,
    })
}

fn single(f: &Family) -> Option<&crate::sets::ConvexSet> {
    match f.sets() {
        [s] => Some(s),
        _ => None,
    }
}

/// Grid search for the closest feasible pair, then alternating-projection polish.
///
/// Grid points are the lattice `-ρ + i·resolution` inside `B[0, ρ]` and inside
/// the bounding box of each family; a point is feasible when every member
/// contains it within `resolution`. Only boundary points (feasible with an
/// infeasible axis neighbour) enter the pairwise comparison. The polish runs
/// [`POLISH_ROUNDS`] rounds of `u <- P_A(v)`, `v <- P_B(u)` from the grid pair.
pub fn brute_force_pair(problem: &Problem, resolution: f64) -> Result<OracleResult> {
    let n = problem.dim();
    if n > 3 {
        return Err(Error::DimensionTooLarge(n));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::Parse(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let ua = boundary_grid(problem, FamilyLabel::A, resolution)?;
    let ub = boundary_grid(problem, FamilyLabel::B, resolution)?;

    let mut best = (f64::INFINITY, 0, 0);
    for (i, u) in ua.chunks_exact(n).enumerate() {
        for (j, v) in ub.chunks_exact(n).enumerate() {
            let d2: f64 = u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum();
            if d2 < best.0 {
                best = (d2, i, j);
            }
        }
    }
    let grid_gap = best.0.sqrt();
    let mut v = Point::new(ub[best.2 * n..(best.2 + 1) * n].to_vec())?;
    let mut u = Point::new(ua[best.1 * n..(best.1 + 1) * n].to_vec())?;
    let (sa, sb) = (problem.family_a.sets(), problem.family_b.sets());
    for _ in 0..POLISH_ROUNDS {
        u = reference_projection(sa, &v)?;
        v = reference_projection(sb, &u)?;
    }
    Ok(OracleResult {
        gap: u.distance(&v),
        pair: (u, v),
        method: OracleMethod::GridPolish,
        resolution,
        grid_gap: Some(grid_gap),
    })
}

/// Flattened coordinates of the boundary grid points of one family.
fn boundary_grid(problem: &Problem, label: FamilyLabel, h: f64) -> Result<Vec<f64>> {
    let fam = problem.family(label);
    let n = fam.dim();
    let rho = problem.rho;
    let mut lo = vec![-rho; n];
    let mut hi = vec![rho; n];
    for s in fam.sets() {
        if let Some((l, u)) = s.bounding_box() {
            for d in 0..n {
                lo[d] = lo[d].max(l[d] - h);
                hi[d] = hi[d].min(u[d] + h);
            }
        }
    }
    // lattice index range per axis
    let steps = (2.0 * rho / h).floor() as i64;
    let mut range = Vec::with_capacity(n);
    for d in 0..n {
        let i0 = ((lo[d] + rho) / h).ceil().max(0.0) as i64;
        let i1 = (((hi[d] + rho) / h).floor() as i64).min(steps);
        if i1 < i0 {
            return Err(Error::NoFeasiblePoint(label));
        }
        range.push((i0, i1));
    }
    let coord = |i: i64| -rho + i as f64 * h;
    let feasible = |idx: &[i64], buf: &mut Vec<f64>| -> bool {
        buf.clear();
        buf.extend(idx.iter().map(|&i| coord(i)));
        let norm2: f64 = buf.iter().map(|c| c * c).sum();
        norm2 <= rho * rho && fam.sets().iter().all(|s| s.contains_slice(buf, h))
    };

    let mut out = Vec::new();
    let mut any_feasible = false;
    let mut idx: Vec<i64> = range.iter().map(|r| r.0).collect();
    let mut buf = Vec::with_capacity(n);
    let mut nb = idx.clone();
    loop {
        if feasible(&idx, &mut buf) {
            any_feasible = true;
            let point = buf.clone();
            let mut boundary = false;
            'axes: for d in 0..n {
                for delta in [-1, 1] {
                    nb.copy_from_slice(&idx);
                    nb[d] += delta;
                    if !feasible(&nb, &mut buf) {
                        boundary = true;
                        break 'axes;
                    }
                }
            }
            if boundary {
                out.extend_from_slice(&point);
            }
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == n {
                return if any_feasible {
                    Ok(out)
                } else {
                    Err(Error::NoFeasiblePoint(label))
                };
            }
            idx[d] += 1;
            if idx[d] <= range[d].1 {
                break;
            }
            idx[d] = range[d].0;
            d += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    UniqueGuaranteed,
    NotGuaranteed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCertificate {
    pub all_strictly_convex: bool,
    pub positive_distance: bool,
    pub distance_attained: bool,
    /// The distance estimate, when it could be computed.
    pub distance: Option<f64>,
    pub verdict: Verdict,
}

/// Sufficient condition for a unique best pair: every member strictly convex,
/// both intersections bounded, and a positive distance between them.
pub fn uniqueness_certificate(problem: &Problem) -> UniquenessCertificate {
    let all_strictly_convex = problem
        .family_a
        .sets()
        .iter()
        .chain(problem.family_b.sets())
        .all(|s| s.is_strictly_convex());
    let distance = distance_estimate(problem).ok();
    let positive_distance = distance.is_some_and(|d| d > problem.options.disjointness_tol);
    let distance_attained = problem.rho.is_finite();
    let verdict = if all_strictly_convex && positive_distance && distance_attained {
        Verdict::UniqueGuaranteed
    } else {
        Verdict::NotGuaranteed
    };
    UniquenessCertificate {
        all_strictly_convex,
        positive_distance,
        distance_attained,
        distance,
        verdict,
    }
}

/// Rejection-samples `count` points of `∩ C_ℓ` with the ball `B[0, rho]` as proposal.
pub fn sample_family<R: Rng>(
    family: &Family,
    label: FamilyLabel,
    rho: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    let n = family.dim();
    let mut out = Vec::with_capacity(count);
    let mut rejections = 0;
    let mut buf = vec![0.0; n];
    while out.len() < count {
        for c in buf.iter_mut() {
            *c = rng.random_range(-rho..=rho);
        }
        let in_ball = buf.iter().map(|c| c * c).sum::<f64>() <= rho * rho;
        if in_ball && family.sets().iter().all(|s| s.contains_slice(&buf, 0.0)) {
            out.push(Point::new(buf.clone())?);
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::SamplingFailure(label, rejections));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideReport {
    pub samples: usize,
    /// Smallest `⟨y - a, a - b⟩` over the samples (for B, with the roles exchanged).
    pub worst_margin: f64,
    pub violations: usize,
    /// `a + t(b - a)` lies outside the family's intersection.
    pub witness_outside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub a_side: SideReport,
    pub b_side: SideReport,
    pub pass: bool,
}

/// Checks that A lies in `{y : ⟨y - a, a - b⟩ >= 0}` and B in
/// `{y : ⟨y - b, b - a⟩ >= 0}` on sampled points, and that the points
/// `a + t(b - a)`, `b + t(a - b)` leave A and B respectively.
pub fn separation_check(
    problem: &Problem,
    pair: (&Point, &Point),
    samples: usize,
) -> Result<SeparationReport> {
    let (a, b) = pair;
    a.check_dim(problem.dim())?;
    b.check_dim(problem.dim())?;
    if a.distance(b) <= f64::EPSILON {
        return Err(Error::PreconditionGapZero);
    }
    let mut rng = rng_from_seed(problem.seed);
    let t = WITNESS_STEP.min(0.5);
    let mut side = |label: FamilyLabel, p: &Point, q: &Point| -> Result<SideReport> {
        let fam = problem.family(label);
        let normal = p - q;
        let ys = sample_family(fam, label, problem.rho, samples, &mut rng)?;
        let mut worst = f64::INFINITY;
        let mut violations = 0;
        for y in &ys {
            let m = (y - p).dot(&normal);
            worst = worst.min(m);
            if m < -SEPARATION_SLACK {
                violations += 1;
            }
        }
        let witness = p.lerp(q, t);
        Ok(SideReport {
            samples,
            worst_margin: worst,
            violations,
            witness_outside: !fam.contains(&witness, 0.0)?,
        })
    };
    let a_side = side(FamilyLabel::A, a, b)?;
    let b_side = side(FamilyLabel::B, b, a)?;
    let pass = a_side.violations == 0
        && b_side.violations == 0
        && a_side.witness_outside
        && b_side.witness_outside;
    Ok(SeparationReport {
        a_side,
        b_side,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiniViolation {
    pub point: usize,
    pub k: usize,
    pub r_k: f64,
    pub r_next: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiniReport {
    pub k_max: usize,
    pub grid_points: usize,
    pub comparisons: usize,
    pub violations: Vec<DiniViolation>,
    /// `sup_profile[k - 1] = max_x r_k(x)` for `k = 1..=K+1`.
    pub sup_profile: Vec<f64>,
    pub max_sup: f64,
    pub note: Option<String>,
    pub pass: bool,
}

/// `r_k(x) = ‖Q̂_{k-1}(x) - T(x)‖` with `T` the projection onto the intersection;
/// checks `r_{k+1}(x) <= r_k(x) + 1e-9` for `k = 2..=K` at every grid point.
pub fn dini_monotonicity_check(
    family: &Family,
    grid: &[Point],
    k_max: usize,
) -> Result<DiniReport> {
    let mut sup_profile = vec![0.0f64; k_max + 1];
    let mut violations = Vec::new();
    let mut comparisons = 0;
    for (i, x) in grid.iter().enumerate() {
        let t = reference_projection(family.sets(), x)?;
        let mut r = Vec::with_capacity(k_max + 1);
        for k in 1..=k_max + 1 {
            let rk = apply_q_hat(family, k - 1, x)?.distance(&t);
            sup_profile[k - 1] = sup_profile[k - 1].max(rk);
            r.push(rk);
        }
        for k in 2..=k_max {
            comparisons += 1;
            let (rk, rn) = (r[k - 1], r[k]);
            if rn > rk + DINI_SLACK {
                violations.push(DiniViolation {
                    point: i,
                    k,
                    r_k: rk,
                    r_next: rn,
                });
            }
        }
    }
    let max_sup = sup_profile.iter().copied().fold(0.0, f64::max);
    Ok(DiniReport {
        k_max,
        grid_points: grid.len(),
        comparisons,
        pass: violations.is_empty(),
        violations,
        sup_profile,
        max_sup,
        note: (comparisons == 0).then(|| "no comparisons".to_string()),
    })
}

/// `max_x ‖Q̂_k(x) - P_C(x)‖` over the grid.
pub fn sup_residual(family: &Family, grid: &[Point], k: usize) -> Result<f64> {
    let mut sup = 0.0f64;
    for x in grid {
        let t = reference_projection(family.sets(), x)?;
        sup = sup.max(apply_q_hat(family, k, x)?.distance(&t));
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductProfile {
    pub ks: Vec<usize>,
    /// `max_x ‖Q̂_{B,k} Q̂_{A,k}(x) - P_B P_A(x)‖` for each `k`.
    pub sup: Vec<f64>,
    /// Largest increase between consecutive entries.
    pub max_increase: f64,
}

/// Uniform distance between the sweep product and `P_B P_A` on the grid.
pub fn product_convergence_profile(
    problem: &Problem,
    grid: &[Point],
    ks: &[usize],
) -> Result<ProductProfile> {
    let (fa, fb) = (&problem.family_a, &problem.family_b);
    let mut refs = Vec::with_capacity(grid.len());
    for x in grid {
        let pa = reference_projection(fa.sets(), x)?;
        refs.push(reference_projection(fb.sets(), &pa)?);
    }
    let mut sup = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut s = 0.0f64;
        for (x, r) in grid.iter().zip(&refs) {
            let y = apply_q_hat(fb, k, &apply_q_hat(fa, k, x)?)?;
            s = s.max(y.distance(r));
        }
        sup.push(s);
    }
    let max_increase = sup
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ProductProfile {
        ks: ks.to_vec(),
        sup,
        max_increase,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixSetReport {
    pub q: usize,
    pub inside_max_move: f64,
    pub outside_min_move: f64,
    pub pass: bool,
}

/// `Q̂_q` fixes every `inside` point and moves every `outside` point.
pub fn fix_set_audit(
    family: &Family,
    q: usize,
    inside: &[Point],
    outside: &[Point],
) -> Result<FixSetReport> {
    for (i, x) in inside.iter().enumerate() {
        if !family.contains(x, CONTAINMENT_TOL)? {
            return Err(Error::MisclassifiedPoint {
                index: i,
                reason: "inside point is not in the intersection".into(),
            });
        }
    }
    for (i, x) in outside.iter().enumerate() {
        if family.max_violation(x)? <= OUTSIDE_MARGIN {
            return Err(Error::MisclassifiedPoint {
                index: inside.len() + i,
                reason: format!("outside point violates no member by more than {OUTSIDE_MARGIN}"),
            });
        }
    }
    let mut inside_max_move = 0.0f64;
    for x in inside {
        inside_max_move = inside_max_move.max(apply_q_hat(family, q, x)?.distance(x));
    }
    let mut outside_min_move = f64::INFINITY;
    for x in outside {
        outside_min_move = outside_min_move.min(apply_q_hat(family, q, x)?.distance(x));
    }
    Ok(FixSetReport {
        q,
        inside_max_move,
        outside_min_move,
        pass: inside_max_move <= INSIDE_FIX_TOL && outside_min_move > 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma2Report {
    pub tail_len: usize,
    pub diameter: f64,
    pub dist_oracle: f64,
    /// `max_z ‖z - P_A z‖ - dist_oracle` over the tail.
    pub max_excess: f64,
    /// `min_z ‖z - P_A z‖ - dist_oracle` over the tail.
    pub min_excess: f64,
    pub pass: bool,
}

/// Tail of the even iterates (up to the last 10): its diameter is at most
/// `10 · pair_gap_tol` and each point `z` has `‖z - P_A z‖ <= dist + 10 · pair_gap_tol`.
pub fn lemma2_surjectivity_probe(
    problem: &Problem,
    trace: &IterationTrace,
    dist_oracle: f64,
) -> Result<Lemma2Report> {
    let evens: Vec<&Point> = trace
        .iterates
        .iter()
        .filter(|e| e.phase == Phase::B)
        .map(|e| &e.x)
        .collect();
    if evens.len() < 2 {
        return Err(Error::TraceTooShort("need at least two B iterates"));
    }
    let tail = &evens[evens.len().saturating_sub(10)..];
    let mut diameter = 0.0f64;
    for (i, p) in tail.iter().enumerate() {
        for q in &tail[i + 1..] {
            diameter = diameter.max(p.distance(q));
        }
    }
    let (mut max_excess, mut min_excess) = (f64::NEG_INFINITY, f64::INFINITY);
    for z in tail {
        let pa = reference_projection(problem.family_a.sets(), z)?;
        let e = z.distance(&pa) - dist_oracle;
        max_excess = max_excess.max(e);
        min_excess = min_excess.min(e);
    }
    let bound = 10.0 * problem.options.pair_gap_tol;
    Ok(Lemma2Report {
        tail_len: tail.len(),
        diameter,
        dist_oracle,
        max_excess,
        min_excess,
        pass: diameter <= bound && max_excess <= bound,
    })
}

/// Lattice with `per_axis` points per axis over `[-rho, rho]^dim`, kept inside `B[0, rho]`.
pub fn ball_grid(dim: usize, rho: f64, per_axis: usize) -> Vec<Point> {
    let per_axis = per_axis.max(1);
    let coord = |i: usize| {
        if per_axis == 1 {
            0.0
        } else {
            -rho + 2.0 * rho * i as f64 / (per_axis - 1) as f64
        }
    };
    let total = per_axis.pow(dim as u32);
    let mut out = Vec::new();
    for mut lin in 0..total {
        let mut c = Vec::with_capacity(dim);
        for _ in 0..dim {
            c.push(coord(lin % per_axis));
            lin /= per_axis;
        }
        let p = Point::from_vec(c);
        if p.norm() <= rho * (1.0 + 1e-12) {
            out.push(p);
        }
    }
    out
}
