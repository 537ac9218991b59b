//! Desk instances used by the tests, benchmarks and shipped problem files.

use crate::error::Result;
use crate::operators::Family;
use crate::sets::ConvexSet;
use crate::solver::{Problem, SolverOptions};

fn balls(spec: &[([f64; 2], f64)]) -> Result<Family> {
    Family::uniform(
        spec.iter()
            .map(|(c, r)| ConvexSet::ball(c.to_vec(), *r))
            .collect::<Result<_>>()?,
    )
}

/// `A = B[(0,0),1]`, `B = B[(4,0),1]`; best pair `((1,0),(3,0))`.
pub fn two_ball() -> Result<Problem> {
    Problem::new(
        balls(&[([0.0, 0.0], 1.0)])?,
        balls(&[([4.0, 0.0], 1.0)])?,
        SolverOptions::default(),
        0,
    )
}

/// `A = B[(0,0),2] ∩ B[(1,0),2]`, `B = B[(5,0),2] ∩ B[(6,0),2]`; best pair `((2,0),(4,0))`.
pub fn lens() -> Result<Problem> {
    Problem::new(
        balls(&[([0.0, 0.0], 2.0), ([1.0, 0.0], 2.0)])?,
        balls(&[([5.0, 0.0], 2.0), ([6.0, 0.0], 2.0)])?,
        SolverOptions::default(),
        0,
    )
}

/// Unit squares `[0,1]²` and `[3,4]×[0,1]`, each with an enclosing ball.
/// Every point pair `((1,t),(3,t))`, `t ∈ [0,1]`, is a best pair.
pub fn box_vs_box() -> Result<Problem> {
    let square = |x: f64| -> Result<Family> {
        Family::uniform(vec![
            ConvexSet::aabb(vec![x, 0.0], vec![x + 1.0, 1.0])?,
            ConvexSet::ball(vec![x + 0.5, 0.5], 1.0)?,
        ])
    };
    Problem::new(square(0.0)?, square(3.0)?, SolverOptions::default(), 0)
}
