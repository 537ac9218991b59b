//! Dykstra's cyclic projection algorithm: the projection onto an intersection
//! from the projections onto its members. Converges linearly on the instances
//! used here and shares no code path with the HLWB operators, so it serves as
//! the independent reference projection.

use crate::error::{Error, Result};
use crate::point::{check_dim, Point};
use crate::sets::ConvexSet;

pub const DYKSTRA_TOL: f64 = 1e-12;
pub const DYKSTRA_MAX_CYCLES: usize = 1_000_000;

/// Outcome of a Dykstra run, converged or not.
#[derive(Debug, Clone, PartialEq)]
pub struct DykstraOutcome {
    pub point: Point,
    pub cycles: usize,
    pub converged: bool,
}

/// Runs Dykstra's algorithm from `x`, stopping when the summed squared change of
/// the correction vectors over one cycle is at most `tol²`.
pub fn dykstra_run(
    sets: &[ConvexSet],
    x: &Point,
    tol: f64,
    max_cycles: usize,
) -> Result<DykstraOutcome> {
    if sets.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let n = x.dim();
    for s in sets {
        check_dim(n, s.dim())?;
    }
    let mut y = x.as_slice().to_vec();
    let mut corr = vec![vec![0.0; n]; sets.len()];
    let mut z = vec![0.0; n];
    let mut proj = vec![0.0; n];
    for cycle in 1..=max_cycles {
        let mut change = 0.0;
        for (set, p) in sets.iter().zip(corr.iter_mut()) {
            for ((zi, yi), pi) in z.iter_mut().zip(&y).zip(p.iter()) {
                *zi = yi + pi;
            }
            set.project_into(&z, &mut proj)?;
            for ((pi, zi), qi) in p.iter_mut().zip(&z).zip(&proj) {
                let new = zi - qi;
                change += (new - *pi) * (new - *pi);
                *pi = new;
            }
            y.copy_from_slice(&proj);
        }
        if change <= tol * tol {
            return Ok(DykstraOutcome {
                point: Point::from_vec(y),
                cycles: cycle,
                converged: true,
            });
        }
    }
    Ok(DykstraOutcome {
        point: Point::from_vec(y),
        cycles: max_cycles,
        converged: false,
    })
}

/// `P_{∩ sets}(x)` by Dykstra's algorithm; errors if it does not settle.
pub fn dykstra_project(
    sets: &[ConvexSet],
    x: &Point,
    tol: f64,
    max_cycles: usize,
) -> Result<Point> {
    let out = dykstra_run(sets, x, tol, max_cycles)?;
    if out.converged {
        Ok(out.point)
    } else {
        Err(Error::DykstraNoConvergence(out.cycles))
    }
}

/// Reference projection with the default tolerance and cycle cap.
pub fn reference_projection(sets: &[ConvexSet], x: &Point) -> Result<Point> {
    dykstra_project(sets, x, DYKSTRA_TOL, DYKSTRA_MAX_CYCLES)
}
