//! JSON problem files.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "familyA": { "sets": [{"type": "ball", "center": [0, 0], "radius": 1}] },
//!   "familyB": { "sets": [{"type": "ball", "center": [4, 0], "radius": 1}],
//!                "weights": [1.0], "schedule": {"c": 1, "k0": 2, "p": 1} },
//!   "options": { "max_sweeps": 200 },
//!   "seed": 0
//! }
//! ```
//!
//! Unknown keys are rejected. `seed` feeds a ChaCha8 generator used by every
//! sampling step of the checks.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Family;
use crate::schedule::SteeringSchedule;
use crate::sets::ConvexSet;
use crate::solver::{Problem, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub sets: Vec<ConvexSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<SteeringSchedule>,
}

impl FamilySpec {
    pub fn build(&self, dimension: usize) -> Result<Family> {
        for s in &self.sets {
            let d = s.validate()?;
            if d != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: d,
                });
            }
        }
        Family::new(
            self.sets.clone(),
            self.weights.clone(),
            self.schedule.unwrap_or_default(),
        )
    }

    pub fn from_family(f: &Family) -> Self {
        FamilySpec {
            sets: f.sets().to_vec(),
            weights: Some(f.weights().to_vec()),
            schedule: Some(*f.schedule()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    #[serde(rename = "familyA")]
    pub family_a: FamilySpec,
    #[serde(rename = "familyB")]
    pub family_b: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<SolverOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemFile {
    /// Parses JSON text; errors carry serde's line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let pf: ProblemFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if pf.dimension == 0 {
            return Err(Error::Parse("dimension must be at least 1".into()));
        }
        Ok(pf)
    }

    pub fn read(path: &Path) -> Result<Self> {
        ProblemFile::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    pub fn from_problem(p: &Problem) -> Self {
        ProblemFile {
            dimension: p.dim(),
            family_a: FamilySpec::from_family(&p.family_a),
            family_b: FamilySpec::from_family(&p.family_b),
            options: Some(p.options),
            seed: Some(p.seed),
        }
    }

    fn families(&self) -> Result<(Family, Family)> {
        Ok((
            self.family_a.build(self.dimension)?,
            self.family_b.build(self.dimension)?,
        ))
    }

    /// Fully validated problem.
    pub fn to_problem(&self) -> Result<Problem> {
        let (a, b) = self.families()?;
        Problem::new(
            a,
            b,
            self.options.unwrap_or_default(),
            self.seed.unwrap_or(0),
        )
    }

    /// Problem with dimension, option and boundedness checks only.
    pub fn to_problem_unchecked(&self) -> Result<Problem> {
        let (a, b) = self.families()?;
        Problem::new_unchecked(
            a,
            b,
            self.options.unwrap_or_default(),
            self.seed.unwrap_or(0),
        )
    }
}
