//! Points of ℝⁿ and the handful of slice kernels the iterations are built from.

use std::ops::{Add, Index, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of ℝⁿ with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinate vectors.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// Unchecked constructor for coordinates produced by our own arithmetic.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.0, &other.0)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    /// `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        )
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        check_dim(expected, self.dim())
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Radial projection onto the closed ball `B[0, rho]`.
pub fn project_onto_ball(x: &Point, rho: f64) -> Point {
    let n = x.norm();
    if n <= rho {
        x.clone()
    } else {
        x * (rho / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            Point::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite)
        ));
        assert!(matches!(
            Point::new(vec![f64::INFINITY]),
            Err(Error::NonFinite)
        ));
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = Point::new(vec![3.0, 4.0]).unwrap();
        let b = Point::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(a.norm(), 5.0);
        assert_eq!((&a - &b).as_slice(), &[2.0, 4.0]);
        assert_eq!(a.lerp(&b, 0.5).as_slice(), &[2.0, 2.0]);
        assert!(project_onto_ball(&a, 1.0).distance(&Point::new(vec![0.6, 0.8]).unwrap()) < 1e-15);
    }
}
