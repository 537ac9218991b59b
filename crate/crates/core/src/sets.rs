//! Elementary closed convex sets with exact (or 1-D root-find) metric projections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{check_dim, distance, dot, norm, Point};

/// Default additive slack for membership tests.
pub const CONTAINMENT_TOL: f64 = 1e-9;

const ELLIPSOID_RESIDUAL: f64 = 1e-12;
const ELLIPSOID_MAX_ITER: usize = 200;

/// One elementary closed convex subset of ℝⁿ.
///
/// The serde form is the tagged record used in problem files, e.g.
/// `{"type":"ball","center":[0,0],"radius":1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConvexSet {
    Ball {
        center: Point,
        radius: f64,
    },
    /// `{x : <normal, x> <= offset}`
    HalfSpace {
        normal: Point,
        offset: f64,
    },
    /// `{x : <normal, x> = offset}`
    Hyperplane {
        normal: Point,
        offset: f64,
    },
    Box {
        lo: Point,
        hi: Point,
    },
    /// Axis-aligned: `{x : sum_d ((x_d - c_d) / axes_d)^2 <= 1}`
    Ellipsoid {
        center: Point,
        axes: Vec<f64>,
    },
}

impl ConvexSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let s = ConvexSet::Ball {
            center: Point::new(center)?,
            radius,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn half_space(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let s = ConvexSet::HalfSpace {
            normal: Point::new(normal)?,
            offset,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn hyperplane(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let s = ConvexSet::Hyperplane {
            normal: Point::new(normal)?,
            offset,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn aabb(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let s = ConvexSet::Box {
            lo: Point::new(lo)?,
            hi: Point::new(hi)?,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn ellipsoid(center: Vec<f64>, axes: Vec<f64>) -> Result<Self> {
        let s = ConvexSet::Ellipsoid {
            center: Point::new(center)?,
            axes,
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks the descriptor describes a nonempty closed convex set and returns its dimension.
    pub fn validate(&self) -> Result<usize> {
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        let invalid = |m: &str| Err(Error::InvalidSet(m.to_string()));
        match self {
            ConvexSet::Ball { center, radius } => {
                if !finite(center.as_slice()) || center.dim() == 0 {
                    return invalid("ball center must be a nonempty finite vector");
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return invalid("ball radius must be positive");
                }
                Ok(center.dim())
            }
            ConvexSet::HalfSpace { normal, offset } | ConvexSet::Hyperplane { normal, offset } => {
                if !finite(normal.as_slice()) || normal.dim() == 0 || !offset.is_finite() {
                    return invalid("normal and offset must be finite");
                }
                if normal.norm() == 0.0 {
                    return invalid("normal must be nonzero");
                }
                Ok(normal.dim())
            }
            ConvexSet::Box { lo, hi } => {
                check_dim(lo.dim(), hi.dim())?;
                if lo.dim() == 0 || !finite(lo.as_slice()) || !finite(hi.as_slice()) {
                    return invalid("box bounds must be nonempty finite vectors");
                }
                if lo.as_slice().iter().zip(hi.as_slice()).any(|(l, h)| l > h) {
                    return invalid("box needs lo <= hi componentwise");
                }
                Ok(lo.dim())
            }
            ConvexSet::Ellipsoid { center, axes } => {
                check_dim(center.dim(), axes.len())?;
                if center.dim() == 0 || !finite(center.as_slice()) {
                    return invalid("ellipsoid center must be a nonempty finite vector");
                }
                if axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                    return invalid("ellipsoid axes must be positive");
                }
                Ok(center.dim())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } | ConvexSet::Ellipsoid { center, .. } => center.dim(),
            ConvexSet::HalfSpace { normal, .. } | ConvexSet::Hyperplane { normal, .. } => {
                normal.dim()
            }
            ConvexSet::Box { lo, .. } => lo.dim(),
        }
    }

    /// Metric projection `P_C(x)`.
    pub fn project(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim())?;
        let mut out = Point::zeros(x.dim());
        self.project_into(x.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    /// Slice form of [`ConvexSet::project`]; the caller guarantees matching lengths.
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(out.len(), x.len());
        match self {
            ConvexSet::Ball { center, radius } => {
                let c = center.as_slice();
                let d = distance(x, c);
                if d <= *radius {
                    out.copy_from_slice(x);
                } else {
                    let s = radius / d;
                    for i in 0..x.len() {
                        out[i] = c[i] + s * (x[i] - c[i]);
                    }
                }
            }
            ConvexSet::HalfSpace { normal, offset } => {
                let n = normal.as_slice();
                let excess = dot(n, x) - offset;
                if excess <= 0.0 {
                    out.copy_from_slice(x);
                } else {
                    let s = excess / dot(n, n);
                    for i in 0..x.len() {
                        out[i] = x[i] - s * n[i];
                    }
                }
            }
            ConvexSet::Hyperplane { normal, offset } => {
                let n = normal.as_slice();
                let excess = dot(n, x) - offset;
                if excess == 0.0 {
                    out.copy_from_slice(x);
                } else {
                    let s = excess / dot(n, n);
                    for i in 0..x.len() {
                        out[i] = x[i] - s * n[i];
                    }
                }
            }
            ConvexSet::Box { lo, hi } => {
                for (o, ((xi, l), h)) in out
                    .iter_mut()
                    .zip(x.iter().zip(lo.as_slice()).zip(hi.as_slice()))
                {
                    *o = xi.clamp(*l, *h);
                }
            }
            ConvexSet::Ellipsoid { center, axes } => {
                project_ellipsoid(center.as_slice(), axes, x, out)?;
            }
        }
        Ok(())
    }

    /// True iff `x` satisfies the defining inequality within additive slack `tol`.
    ///
    /// For half-spaces and hyperplanes the inequality is normalized by `‖normal‖`,
    /// so `tol` is a Euclidean distance; for ellipsoids it applies to the level
    /// function `sum_d ((x_d - c_d) / axes_d)^2`.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok(self.contains_slice(x.as_slice(), tol))
    }

    pub(crate) fn contains_slice(&self, x: &[f64], tol: f64) -> bool {
        match self {
            ConvexSet::Ball { center, radius } => distance(x, center.as_slice()) <= radius + tol,
            ConvexSet::HalfSpace { normal, offset } => {
                let n = normal.as_slice();
                (dot(n, x) - offset) / norm(n) <= tol
            }
            ConvexSet::Hyperplane { normal, offset } => {
                let n = normal.as_slice();
                ((dot(n, x) - offset) / norm(n)).abs() <= tol
            }
            ConvexSet::Box { lo, hi } => x
                .iter()
                .zip(lo.as_slice().iter().zip(hi.as_slice()))
                .all(|(xi, (l, h))| *xi >= l - tol && *xi <= h + tol),
            ConvexSet::Ellipsoid { center, axes } => {
                ellipsoid_level(center.as_slice(), axes, x) <= 1.0 + tol
            }
        }
    }

    /// `‖x - P_C(x)‖`.
    pub fn distance_to(&self, x: &Point) -> Result<f64> {
        Ok(self.project(x)?.distance(x))
    }

    pub fn is_strictly_convex(&self) -> bool {
        matches!(self, ConvexSet::Ball { .. } | ConvexSet::Ellipsoid { .. })
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(
            self,
            ConvexSet::HalfSpace { .. } | ConvexSet::Hyperplane { .. }
        )
    }

    /// Smallest `rho` with this set inside `B[0, rho]`, or `None` if unbounded.
    pub fn bounding_radius(&self) -> Option<f64> {
        match self {
            ConvexSet::Ball { center, radius } => Some(center.norm() + radius),
            ConvexSet::Box { lo, hi } => Some(
                lo.as_slice()
                    .iter()
                    .zip(hi.as_slice())
                    .map(|(l, h)| (l * l).max(h * h))
                    .sum::<f64>()
                    .sqrt(),
            ),
            ConvexSet::Ellipsoid { center, axes } => {
                Some(ellipsoid_max_norm(center.as_slice(), axes))
            }
            ConvexSet::HalfSpace { .. } | ConvexSet::Hyperplane { .. } => None,
        }
    }

    /// Axis-aligned box enclosing the set, if bounded.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            ConvexSet::Ball { center, radius } => Some((
                center.as_slice().iter().map(|c| c - radius).collect(),
                center.as_slice().iter().map(|c| c + radius).collect(),
            )),
            ConvexSet::Box { lo, hi } => Some((lo.as_slice().to_vec(), hi.as_slice().to_vec())),
            ConvexSet::Ellipsoid { center, axes } => Some((
                center
                    .as_slice()
                    .iter()
                    .zip(axes)
                    .map(|(c, a)| c - a)
                    .collect(),
                center
                    .as_slice()
                    .iter()
                    .zip(axes)
                    .map(|(c, a)| c + a)
                    .collect(),
            )),
            ConvexSet::HalfSpace { .. } | ConvexSet::Hyperplane { .. } => None,
        }
    }
}

/// Smallest radius of a ball at the origin containing every set.
///
/// Unbounded members (half-spaces, hyperplanes) are tolerated as long as at
/// least one bounded member is present: the intersection then lies inside
/// that member, and the radius covers the bounded members only.
pub fn family_bounding_radius(sets: &[ConvexSet]) -> Result<f64> {
    if sets.is_empty() {
        return Err(Error::EmptyFamily);
    }
    sets.iter()
        .filter_map(ConvexSet::bounding_radius)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        })
        .ok_or(Error::Unbounded(None))
}

fn ellipsoid_level(c: &[f64], axes: &[f64], x: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .zip(axes)
        .map(|((xi, ci), a)| {
            let t = (xi - ci) / a;
            t * t
        })
        .sum()
}

/// Solves the KKT system of `min ‖y - x‖² s.t. y in ellipsoid` through the
/// scalar multiplier equation `sum_d (a_d z_d / (a_d² + λ))² = 1`, `z = x - c`.
/// The function is convex and decreasing on `λ >= 0`, so Newton from the left
/// never overshoots; bisection guards against round-off.
fn project_ellipsoid(c: &[f64], axes: &[f64], x: &[f64], out: &mut [f64]) -> Result<()> {
    if ellipsoid_level(c, axes, x) <= 1.0 {
        out.copy_from_slice(x);
        return Ok(());
    }
    let secular = |lambda: f64| -> (f64, f64) {
        let mut f = -1.0;
        let mut df = 0.0;
        for ((xi, ci), a) in x.iter().zip(c).zip(axes) {
            let a2 = a * a;
            let q = a * (xi - ci) / (a2 + lambda);
            f += q * q;
            df -= 2.0 * q * q / (a2 + lambda);
        }
        (f, df)
    };
    let a_max = axes.iter().cloned().fold(0.0, f64::max);
    let z_norm = distance(x, c);
    let mut lo = 0.0;
    let mut hi = a_max * z_norm;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..ELLIPSOID_MAX_ITER {
        let (f, df) = secular(lambda);
        residual = f.abs();
        if residual <= ELLIPSOID_RESIDUAL {
            converged = true;
            break;
        }
        if f > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let newton = lambda - f / df;
        lambda = if df < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            // bracket exhausted at machine precision
            converged = secular(lambda).0.abs() <= 1e-9;
            break;
        }
    }
    if !converged {
        return Err(Error::EllipsoidNoConvergence {
            iterations: ELLIPSOID_MAX_ITER,
            residual,
        });
    }
    for i in 0..x.len() {
        let a2 = axes[i] * axes[i];
        out[i] = c[i] + a2 * (x[i] - c[i]) / (a2 + lambda);
    }
    Ok(())
}

/// `max ‖y‖` over the ellipsoid, via the multiplier equation of
/// `max ‖c + D u‖² s.t. ‖u‖ <= 1` with `D = diag(axes)`.
fn ellipsoid_max_norm(c: &[f64], axes: &[f64]) -> f64 {
    let a_max = axes.iter().cloned().fold(0.0, f64::max);
    let a2max = a_max * a_max;
    let is_top = |a: f64| a2max - a * a <= 1e-14 * a2max;
    let top_has_offset = c.iter().zip(axes).any(|(ci, a)| is_top(*a) && *ci != 0.0);
    let u_at = |mu: f64| -> Vec<f64> {
        c.iter()
            .zip(axes)
            .map(|(ci, a)| {
                if is_top(*a) && mu == a2max {
                    0.0
                } else {
                    a * ci / (mu - a * a)
                }
            })
            .collect()
    };
    let u = if !top_has_offset {
        // Hard case: the stationary point may sit at mu = a_max², with the
        // leftover unit-norm budget spent along the longest axes.
        let mut u = u_at(a2max);
        let used: f64 = u.iter().map(|v| v * v).sum();
        if used <= 1.0 {
            let tops = axes.iter().filter(|a| is_top(**a)).count() as f64;
            let fill = ((1.0 - used) / tops).sqrt();
            for (ui, a) in u.iter_mut().zip(axes) {
                if is_top(*a) {
                    *ui = fill;
                }
            }
            Some(u)
        } else {
            None
        }
    } else {
        None
    };
    let u = u.unwrap_or_else(|| {
        let h = |mu: f64| u_at(mu).iter().map(|v| v * v).sum::<f64>() - 1.0;
        let mut lo = a2max;
        let mut hi = a2max + a_max * norm(c) + 1e-300;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        u_at(hi)
    });
    let un = norm(&u).max(f64::MIN_POSITIVE);
    c.iter()
        .zip(axes)
        .zip(&u)
        .map(|((ci, a), ui)| {
            let y = ci + a * ui / un.max(1.0);
            y * y
        })
        .sum::<f64>()
        .sqrt()
}
