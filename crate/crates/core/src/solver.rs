//! Alternating S-HLWB (A-S-HLWB) and the Cheney–Goldstein baseline.

use serde::{Deserialize, Serialize};

use crate::dykstra::{dykstra_run, reference_projection};
use crate::error::{Error, FamilyLabel, Result};
use crate::operators::{shlwb_project, sweep, Family, SweepOperator, SHLWB_MAX_ITER};
use crate::point::{check_dim, project_onto_ball, Point};
use crate::sets::family_bounding_radius;

/// Worst member violation tolerated when validating that a family's intersection is nonempty.
pub const NONEMPTY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_sweeps: usize,
    pub pair_gap_tol: f64,
    pub fixed_point_tol: f64,
    pub record_inner_steps: bool,
    /// Tolerance of the S-HLWB reference projections used for residuals and the baseline.
    pub reference_tol: f64,
    pub disjointness_tol: f64,
    pub sweep: SweepOperator,
    /// Consecutive sweeps whose gap changes must all stay below `pair_gap_tol`
    /// before the residual test is tried.
    pub stable_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_sweeps: 200,
            pair_gap_tol: 1e-4,
            fixed_point_tol: 1e-4,
            record_inner_steps: false,
            reference_tol: 1e-6,
            disjointness_tol: 1e-6,
            sweep: SweepOperator::Product,
            stable_sweeps: 10,
        }
    }
}

impl SolverOptions {
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("pair_gap_tol", self.pair_gap_tol),
            ("fixed_point_tol", self.fixed_point_tol),
            ("reference_tol", self.reference_tol),
            ("disjointness_tol", self.disjointness_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parse(format!(
                    "options.{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_sweeps == 0 {
            return Err(Error::Parse("options.max_sweeps must be at least 1".into()));
        }
        if self.stable_sweeps == 0 {
            return Err(Error::Parse(
                "options.stable_sweeps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Two families, their common bounding radius and the solver options.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub family_a: Family,
    pub family_b: Family,
    pub rho: f64,
    pub options: SolverOptions,
    /// Seed for every sampling step of the verification checks.
    pub seed: u64,
}

impl Problem {
    /// Validates boundedness, nonempty intersections and disjointness.
    pub fn new(
        family_a: Family,
        family_b: Family,
        options: SolverOptions,
        seed: u64,
    ) -> Result<Self> {
        let p = Problem::new_unchecked(family_a, family_b, options, seed)?;
        for (label, fam) in [(FamilyLabel::A, &p.family_a), (FamilyLabel::B, &p.family_b)] {
            feasible_point(fam, label)?;
        }
        let d = validation_distance(&p)?;
        if d <= p.options.disjointness_tol {
            return Err(Error::NotDisjoint(d));
        }
        Ok(p)
    }

    /// Checks dimensions, options and boundedness only; the intersections may
    /// be empty or overlap.
    pub fn new_unchecked(
        family_a: Family,
        family_b: Family,
        options: SolverOptions,
        seed: u64,
    ) -> Result<Self> {
        check_dim(family_a.dim(), family_b.dim())?;
        options.check()?;
        let ra = family_bounding_radius(family_a.sets())
            .map_err(|_| Error::Unbounded(Some(FamilyLabel::A)))?;
        let rb = family_bounding_radius(family_b.sets())
            .map_err(|_| Error::Unbounded(Some(FamilyLabel::B)))?;
        Ok(Problem {
            family_a,
            family_b,
            rho: ra.max(rb),
            options,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.family_a.dim()
    }

    pub fn family(&self, label: FamilyLabel) -> &Family {
        match label {
            FamilyLabel::A => &self.family_a,
            FamilyLabel::B => &self.family_b,
        }
    }

    /// The same problem with the roles of the families exchanged.
    pub fn swapped(&self) -> Problem {
        Problem {
            family_a: self.family_b.clone(),
            family_b: self.family_a.clone(),
            ..self.clone()
        }
    }

    /// `P_A` or `P_B` by S-HLWB at `options.reference_tol`.
    pub fn project(&self, label: FamilyLabel, x: &Point) -> Result<Point> {
        shlwb_project(
            self.family(label),
            x,
            self.options.reference_tol,
            SHLWB_MAX_ITER,
        )
    }
}

/// A point of `∩ C_ℓ` found by Dykstra's algorithm from the origin, or
/// `EmptyIntersection` when none is found within [`NONEMPTY_TOL`].
pub fn feasible_point(family: &Family, label: FamilyLabel) -> Result<Point> {
    let out = dykstra_run(family.sets(), &Point::zeros(family.dim()), 1e-10, 100_000)?;
    let worst = family.max_violation(&out.point)?;
    if worst <= NONEMPTY_TOL {
        Ok(out.point)
    } else {
        Err(Error::EmptyIntersection(label, worst))
    }
}

/// Alternating projections with Dykstra inner solves; the gap of the final pair.
fn validation_distance(p: &Problem) -> Result<f64> {
    let (a_sets, b_sets) = (p.family_a.sets(), p.family_b.sets());
    let mut z = Point::zeros(p.dim());
    let mut gap = f64::INFINITY;
    for _ in 0..10_000 {
        let a = reference_projection(a_sets, &z)?;
        let z_new = reference_projection(b_sets, &a)?;
        gap = a.distance(&z_new);
        let step = z_new.distance(&z);
        z = z_new;
        if step <= 1e-12 || gap <= p.options.disjointness_tol {
            break;
        }
    }
    Ok(gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// `x^0`.
    Start,
    /// Output of a sweep over family A (odd `k`).
    A,
    /// Output of a sweep over family B (even `k >= 2`).
    B,
    /// Inner step of an A sweep.
    AInner,
    /// Inner step of a B sweep.
    BInner,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Start => "start",
            Phase::A => "A",
            Phase::B => "B",
            Phase::AInner => "A-inner",
            Phase::BInner => "B-inner",
        }
    }
}

/// One recorded iterate. For outer rows, `gap = ‖x^k - x^{k-1}‖` (0 at `k = 0`);
/// for inner rows it is the length of that inner step and `k` is the outer
/// iterate the sweep produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub k: usize,
    pub phase: Phase,
    pub sweep: usize,
    pub inner_steps: usize,
    pub gap: f64,
    pub x: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    Converged,
    MaxSweeps,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    /// Outer iterates `x^0, x^1, …` in order.
    pub iterates: Vec<TraceEntry>,
    /// Inner steps, in order, when `record_inner_steps` is set.
    pub inner: Vec<TraceEntry>,
    pub terminal: Terminal,
    /// The start point lay outside `B[0, ρ]` and was projected onto it.
    pub start_projected: bool,
    pub sweeps: usize,
}

impl IterationTrace {
    fn last_with(&self, phase: Phase) -> Option<&TraceEntry> {
        self.iterates.iter().rev().find(|e| e.phase == phase)
    }

    /// Last odd iterate (A side).
    pub fn last_a(&self) -> Option<&Point> {
        self.last_with(Phase::A).map(|e| &e.x)
    }

    /// Last even iterate after the start (B side).
    pub fn last_b(&self) -> Option<&Point> {
        self.last_with(Phase::B).map(|e| &e.x)
    }

    /// `‖x^{2r+1} - x^{2r}‖` for each sweep r.
    pub fn odd_gaps(&self) -> Vec<f64> {
        self.iterates
            .iter()
            .filter(|e| e.phase == Phase::A)
            .map(|e| e.gap)
            .collect()
    }

    /// `‖x^{2r+2} - x^{2r+1}‖` for each sweep r.
    pub fn even_gaps(&self) -> Vec<f64> {
        self.iterates
            .iter()
            .filter(|e| e.phase == Phase::B)
            .map(|e| e.gap)
            .collect()
    }
}

/// Runs Algorithm A-S-HLWB from `x0`:
/// `x^{2r+1} = S_{A,r}(x^{2r})`, `x^{2r+2} = S_{B,r}(x^{2r+1})`, where `S_{·,r}`
/// is the sweep selected by `options.sweep` with `r + 1` inner steps.
pub fn run_ashlwb(problem: &Problem, x0: &Point) -> Result<IterationTrace> {
    x0.check_dim(problem.dim())?;
    let opts = &problem.options;
    let start_projected = x0.norm() > problem.rho;
    let mut x = project_onto_ball(x0, problem.rho);

    let mut iterates = vec![TraceEntry {
        k: 0,
        phase: Phase::Start,
        sweep: 0,
        inner_steps: 0,
        gap: 0.0,
        x: x.clone(),
    }];
    let mut inner = Vec::new();
    let mut buf = Vec::new();
    let mut prev_gaps: Option<(f64, f64)> = None;
    let mut stable = 0;
    let mut terminal = Terminal::MaxSweeps;
    let mut sweeps = 0;

    for r in 0..opts.max_sweeps {
        let mut gaps = [0.0; 2];
        for (i, (fam, phase, inner_phase)) in [
            (&problem.family_a, Phase::A, Phase::AInner),
            (&problem.family_b, Phase::B, Phase::BInner),
        ]
        .into_iter()
        .enumerate()
        {
            let k = 2 * r + 1 + i;
            let rec = opts.record_inner_steps.then_some(&mut buf);
            let y = sweep(fam, opts.sweep, r, &x, rec)?;
            if opts.record_inner_steps {
                let mut prev = x.clone();
                for p in buf.drain(..) {
                    inner.push(TraceEntry {
                        k,
                        phase: inner_phase,
                        sweep: r,
                        inner_steps: r + 1,
                        gap: p.distance(&prev),
                        x: p.clone(),
                    });
                    prev = p;
                }
            }
            gaps[i] = y.distance(&x);
            iterates.push(TraceEntry {
                k,
                phase,
                sweep: r,
                inner_steps: r + 1,
                gap: gaps[i],
                x: y.clone(),
            });
            x = y;
        }
        sweeps = r + 1;

        let settled = prev_gaps.is_some_and(|(go, ge)| {
            (gaps[0] - go).abs() < opts.pair_gap_tol && (gaps[1] - ge).abs() < opts.pair_gap_tol
        });
        prev_gaps = Some((gaps[0], gaps[1]));
        stable = if settled { stable + 1 } else { 0 };
        if stable >= opts.stable_sweeps {
            let a = &iterates[iterates.len() - 2].x;
            let b = &iterates[iterates.len() - 1].x;
            if mutual_residuals_within(problem, a, b, opts.fixed_point_tol)? {
                terminal = Terminal::Converged;
                break;
            }
        }
    }

    Ok(IterationTrace {
        iterates,
        inner,
        terminal,
        start_projected,
        sweeps,
    })
}

/// `‖a - P_A b‖ <= tol` and `‖b - P_B a‖ <= tol`, with Dykstra reference projections.
fn mutual_residuals_within(problem: &Problem, a: &Point, b: &Point, tol: f64) -> Result<bool> {
    let pa = reference_projection(problem.family_a.sets(), b)?;
    if a.distance(&pa) > tol {
        return Ok(false);
    }
    let pb = reference_projection(problem.family_b.sets(), a)?;
    Ok(b.distance(&pb) <= tol)
}

/// Distances of a candidate pair to the best-pair characterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    /// `‖a - P_A a‖`
    pub a_to_a: f64,
    /// `‖b - P_B b‖`
    pub b_to_b: f64,
    /// `‖a - P_A b‖`
    pub a_to_pa_b: f64,
    /// `‖b - P_B a‖`
    pub b_to_pb_a: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.a_to_a
            .max(self.b_to_b)
            .max(self.a_to_pa_b)
            .max(self.b_to_pb_a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestPair {
    pub a: Point,
    pub b: Point,
    pub gap: f64,
    pub residuals: Residuals,
    /// Sweeps (A-S-HLWB) or outer iterations (Cheney–Goldstein).
    pub iterations: usize,
}

impl BestPair {
    fn new(problem: &Problem, a: Point, b: Point, iterations: usize) -> Result<Self> {
        let residuals = Residuals {
            a_to_a: a.distance(&problem.project(FamilyLabel::A, &a)?),
            b_to_b: b.distance(&problem.project(FamilyLabel::B, &b)?),
            a_to_pa_b: a.distance(&problem.project(FamilyLabel::A, &b)?),
            b_to_pb_a: b.distance(&problem.project(FamilyLabel::B, &a)?),
        };
        Ok(BestPair {
            gap: a.distance(&b),
            a,
            b,
            residuals,
            iterations,
        })
    }

    /// The pair with its components exchanged, for the swapped problem.
    pub fn swapped(&self) -> BestPair {
        BestPair {
            a: self.b.clone(),
            b: self.a.clone(),
            gap: self.gap,
            residuals: Residuals {
                a_to_a: self.residuals.b_to_b,
                b_to_b: self.residuals.a_to_a,
                a_to_pa_b: self.residuals.b_to_pb_a,
                b_to_pb_a: self.residuals.a_to_pa_b,
            },
            iterations: self.iterations,
        }
    }
}

/// `a` = last odd iterate, `b` = last even iterate, with S-HLWB reference residuals.
pub fn extract_best_pair(trace: &IterationTrace, problem: &Problem) -> Result<BestPair> {
    let (Some(a), Some(b)) = (trace.last_a(), trace.last_b()) else {
        return Err(Error::TraceTooShort(
            "need at least one A and one B iterate",
        ));
    };
    BestPair::new(problem, a.clone(), b.clone(), trace.sweeps)
}

/// Cheney–Goldstein iteration `z <- P_B(P_A(z))` with S-HLWB inner projections at
/// `inner_tol`, until `‖z_new - z‖ <= pair_gap_tol`. Returns `(P_A z, z)`.
pub fn run_cheney_goldstein(
    problem: &Problem,
    x0: &Point,
    inner_tol: f64,
    max_outer: usize,
) -> Result<BestPair> {
    x0.check_dim(problem.dim())?;
    let (fa, fb) = (&problem.family_a, &problem.family_b);
    let mut z = project_onto_ball(x0, problem.rho);
    let mut step = f64::INFINITY;
    for outer in 1..=max_outer {
        let a = shlwb_project(fa, &z, inner_tol, SHLWB_MAX_ITER)?;
        let z_new = shlwb_project(fb, &a, inner_tol, SHLWB_MAX_ITER)?;
        step = z_new.distance(&z);
        z = z_new;
        if step <= problem.options.pair_gap_tol {
            let a = shlwb_project(fa, &z, inner_tol, SHLWB_MAX_ITER)?;
            return BestPair::new(problem, a, z, outer);
        }
    }
    Err(Error::MaxOuterExceeded {
        outer: max_outer,
        step,
    })
}

/// `dist(A, B)` as the gap of the baseline run from the origin at `reference_tol`.
pub fn distance_estimate(problem: &Problem) -> Result<f64> {
    let x0 = Point::zeros(problem.dim());
    run_cheney_goldstein(problem, &x0, problem.options.reference_tol, 10_000).map(|p| p.gap)
}
