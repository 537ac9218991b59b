//! Simultaneous-HLWB operators.
//!
//! For a family `{C_ℓ}` with weights `w` and steering sequence `τ`:
//!
//! * `M_τ[d](x) = τ d + (1-τ) Σ w_ℓ P_ℓ(x)`: one anchored step ([`apply_m`]);
//! * `M̂_τ = τ Id + (1-τ) Σ w_ℓ P_ℓ`: the step anchored at its own input ([`apply_m_hat`]);
//! * `Q_q[d] = M_{τ_q}[d] ∘ … ∘ M_{τ_0}[d]`: fixed anchor `d` ([`apply_q`]);
//! * `Q̂_q(x) = Q_q[x](x)`: anchored at the input itself ([`apply_q_hat`]).
//!
//! `Q̂_q(x)` is the S-HLWB sequence started at its anchor, so it tends to the
//! projection of `x` onto `∩ C_ℓ`; [`shlwb_project`] runs it to a tolerance.
//! The alternating solver composes its sweeps from `M̂` steps instead; see
//! [`SweepOperator`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{check_dim, distance, Point};
use crate::schedule::SteeringSchedule;
use crate::sets::ConvexSet;

/// Default iteration cap for [`shlwb_project`].
pub const SHLWB_MAX_ITER: usize = 200_000_000;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finite family of closed convex sets with simplex weights and a steering schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    sets: Vec<ConvexSet>,
    weights: Vec<f64>,
    schedule: SteeringSchedule,
    dim: usize,
}

impl Family {
    /// `weights = None` means uniform weights.
    pub fn new(
        sets: Vec<ConvexSet>,
        weights: Option<Vec<f64>>,
        schedule: SteeringSchedule,
    ) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let dim = sets[0].validate()?;
        for s in &sets[1..] {
            check_dim(dim, s.validate()?)?;
        }
        let weights = match weights {
            None => vec![1.0 / sets.len() as f64; sets.len()],
            Some(w) => {
                if w.len() != sets.len() {
                    return Err(Error::InvalidWeights(format!(
                        "{} weights for {} sets",
                        w.len(),
                        sets.len()
                    )));
                }
                if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::InvalidWeights("weights must be positive".into()));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::InvalidWeights(format!(
                        "weights sum to {sum}, not 1"
                    )));
                }
                w
            }
        };
        schedule.check()?;
        Ok(Family {
            sets,
            weights,
            schedule,
            dim,
        })
    }

    /// Uniform weights, default schedule.
    pub fn uniform(sets: Vec<ConvexSet>) -> Result<Self> {
        Family::new(sets, None, SteeringSchedule::default())
    }

    pub fn sets(&self) -> &[ConvexSet] {
        &self.sets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn schedule(&self) -> &SteeringSchedule {
        &self.schedule
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn with_schedule(mut self, schedule: SteeringSchedule) -> Result<Self> {
        schedule.check()?;
        self.schedule = schedule;
        Ok(self)
    }

    /// True iff `x` lies in every member within `tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        x.check_dim(self.dim)?;
        Ok(self
            .sets
            .iter()
            .all(|s| s.contains_slice(x.as_slice(), tol)))
    }

    /// Largest distance from `x` to a member set.
    pub fn max_violation(&self, x: &Point) -> Result<f64> {
        let mut worst = 0.0f64;
        for s in &self.sets {
            worst = worst.max(s.distance_to(x)?);
        }
        Ok(worst)
    }

    /// `Σ w_ℓ P_ℓ(x)`, accumulated left to right.
    pub fn weighted_projection(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim)?;
        let mut ws = Workspace::new(self.dim);
        self.weighted_projection_into(x.as_slice(), &mut ws)?;
        Ok(Point::from_vec(ws.acc))
    }

    fn weighted_projection_into(&self, x: &[f64], ws: &mut Workspace) -> Result<()> {
        ws.acc.iter_mut().for_each(|a| *a = 0.0);
        for (set, w) in self.sets.iter().zip(&self.weights) {
            set.project_into(x, &mut ws.tmp)?;
            for (a, t) in ws.acc.iter_mut().zip(&ws.tmp) {
                *a += w * t;
            }
        }
        Ok(())
    }
}

struct Workspace {
    acc: Vec<f64>,
    tmp: Vec<f64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Workspace {
            acc: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::TauOutOfRange(tau))
    }
}

/// `y <- tau * anchor + (1 - tau) * Σ w P(y)` in place.
fn m_step(
    family: &Family,
    tau: f64,
    anchor: &[f64],
    y: &mut [f64],
    ws: &mut Workspace,
) -> Result<()> {
    family.weighted_projection_into(y, ws)?;
    for ((yi, a), s) in y.iter_mut().zip(anchor).zip(&ws.acc) {
        *yi = tau * a + (1.0 - tau) * s;
    }
    Ok(())
}

/// `M_τ[anchor](x) = τ anchor + (1-τ) Σ w_ℓ P_ℓ(x)`.
pub fn apply_m(family: &Family, tau: f64, anchor: &Point, x: &Point) -> Result<Point> {
    check_tau(tau)?;
    anchor.check_dim(family.dim)?;
    x.check_dim(family.dim)?;
    let mut ws = Workspace::new(family.dim);
    let mut y = x.clone();
    m_step(family, tau, anchor.as_slice(), y.as_mut_slice(), &mut ws)?;
    Ok(y)
}

/// `M̂_τ(x) = τ x + (1-τ) Σ w_ℓ P_ℓ(x)`.
pub fn apply_m_hat(family: &Family, tau: f64, x: &Point) -> Result<Point> {
    apply_m(family, tau, x, x)
}

/// `Q_q[anchor](x)`: `q + 1` steps `M_{τ_t}[anchor]`, `t = 0..=q`, all with the same anchor.
pub fn apply_q(family: &Family, q: usize, anchor: &Point, x: &Point) -> Result<Point> {
    anchor.check_dim(family.dim)?;
    x.check_dim(family.dim)?;
    let mut ws = Workspace::new(family.dim);
    let mut y = x.clone();
    for t in 0..=q {
        m_step(
            family,
            family.schedule.tau(t),
            anchor.as_slice(),
            y.as_mut_slice(),
            &mut ws,
        )?;
    }
    Ok(y)
}

/// `Q̂_q(x) = Q_q[x](x)`: the anchor is the original input at every inner
/// step, and the steering index restarts at 0 on every call.
pub fn apply_q_hat(family: &Family, q: usize, x: &Point) -> Result<Point> {
    apply_q(family, q, x, x)
}

/// How one sweep of the alternating solver composes the `q + 1` inner steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOperator {
    /// `M̂_{τ_q} ∘ … ∘ M̂_{τ_0}`: every inner step is anchored at its own input.
    /// Settles within a few dozen sweeps on the usual instances. Its limit is a
    /// point of the intersection that need not be the projection of the input.
    #[default]
    Product,
    /// [`apply_q_hat`]: every inner step is anchored at the sweep's input. Its
    /// limit is the projection, approached at rate `O(τ_q)`.
    Anchored,
}

/// Runs one sweep from `x`. When `inner` is given, every inner iterate is pushed to it.
pub fn sweep(
    family: &Family,
    op: SweepOperator,
    q: usize,
    x: &Point,
    mut inner: Option<&mut Vec<Point>>,
) -> Result<Point> {
    x.check_dim(family.dim)?;
    let mut ws = Workspace::new(family.dim);
    let mut y = x.clone();
    let mut anchor = x.as_slice().to_vec();
    for t in 0..=q {
        if op == SweepOperator::Product {
            anchor.copy_from_slice(y.as_slice());
        }
        m_step(
            family,
            family.schedule.tau(t),
            &anchor,
            y.as_mut_slice(),
            &mut ws,
        )?;
        if let Some(v) = inner.as_deref_mut() {
            v.push(y.clone());
        }
    }
    Ok(y)
}

/// Result of an S-HLWB run.
#[derive(Debug, Clone, PartialEq)]
pub struct ShlwbOutcome {
    pub point: Point,
    pub iterations: usize,
    /// Last step length `‖x^{k+1} - x^k‖`.
    pub gap: f64,
}

/// Approximates `P_{∩C_ℓ}(anchor)` by `x^{k+1} = τ_k anchor + (1-τ_k) Σ w_ℓ P_ℓ(x^k)`,
/// `x^0 = anchor`, stopping once `‖x^{k+1} - x^k‖ <= tol τ_k`.
///
/// The step length of an anchored iteration is of order `τ_k` even at the
/// limit, hence the scaled test. The final error is of order `tol`, and the
/// iteration count of order `dist(anchor, C) / tol`.
pub fn shlwb_project(family: &Family, anchor: &Point, tol: f64, max_iter: usize) -> Result<Point> {
    shlwb_project_with_stats(family, anchor, tol, max_iter).map(|o| o.point)
}

pub fn shlwb_project_with_stats(
    family: &Family,
    anchor: &Point,
    tol: f64,
    max_iter: usize,
) -> Result<ShlwbOutcome> {
    anchor.check_dim(family.dim)?;
    let mut ws = Workspace::new(family.dim);
    let a = anchor.as_slice();
    let mut x = a.to_vec();
    let mut next = vec![0.0; family.dim];
    let mut gap = f64::INFINITY;
    for k in 0..max_iter {
        let tau = family.schedule.tau(k);
        family.weighted_projection_into(&x, &mut ws)?;
        for ((n, ai), s) in next.iter_mut().zip(a).zip(&ws.acc) {
            *n = tau * ai + (1.0 - tau) * s;
        }
        gap = distance(&next, &x);
        std::mem::swap(&mut x, &mut next);
        if gap <= tol * tau {
            return Ok(ShlwbOutcome {
                point: Point::from_vec(x),
                iterations: k + 1,
                gap,
            });
        }
    }
    Err(Error::MaxIterExceeded {
        last: Point::from_vec(x),
        gap,
    })
}
