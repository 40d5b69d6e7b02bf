//! Fixed-point iteration for the equation families.

mod engine;
mod family;
mod problem;

pub use engine::{
    iterate_once, residual, solve, solve_from, two_start_uniqueness_probe, IterationRecord, Monotonicity,
    ResidualReport, SolveReport, UniquenessProbe,
};
pub use family::{Family, LawMoments};
pub use problem::{
    mixture_envelope, ConditionCheck, ConditionRecord, GridConfig, Problem, ProblemSpec, ResolvedLaws,
    SolverSettings, CONDITION_TOLERANCE, ET_MARGIN,
};
