//! Best approximation pairs between two intersections of convex sets by the
//! alternating simultaneous HLWB method, with the verification oracles.

pub mod dykstra;
pub mod error;
pub mod instances;
pub mod operators;
pub mod oracles;
pub mod point;
pub mod problem_file;
pub mod report;
pub mod schedule;
pub mod sets;
pub mod solver;

pub use error::{Error, FamilyLabel, Result};
pub use operators::{
    apply_m, apply_m_hat, apply_q, apply_q_hat, shlwb_project, Family, SweepOperator,
};
pub use point::Point;
pub use problem_file::ProblemFile;
pub use schedule::{validate_schedule, SteeringSchedule};
pub use sets::{family_bounding_radius, ConvexSet};
pub use solver::{
    distance_estimate, extract_best_pair, run_ashlwb, run_cheney_goldstein, BestPair,
    IterationTrace, Phase, Problem, SolverOptions, Terminal,
};
