//! Exact schedulability regions for periodic tasks.
//!
//! Execution times are the unknowns: for a fixed set of periods and
//! deadlines the crate builds the set of WCET vectors that keep the task
//! set schedulable under fixed priorities or EDF, trims it to its
//! non-redundant constraints, and optimizes linear rewards over it. All
//! arithmetic is exact.

pub mod edf;
pub mod error;
pub mod experiment;
pub mod fp;
mod linalg;
pub mod lp;
pub mod model;
pub mod optimize;
pub mod rational;
pub mod region;
pub mod sim;


pub use edf::{dbf, deadline_set, edf_schedulable, h_vector, minimal_deadlines, DeadlineSet, EdfConstraint, EdfVerdict, MinimalDeadlines};
pub use error::{Error, Result};
pub use fp::{
    fp_region, fp_schedulable, fp_schedulable_arbitrary, fp_schedulable_arbitrary_with, k_vector, lehoczky_points, reduced_points, FpConstraint,
    PointSource, SchedPointSet,
};
pub use lp::{eliminate_redundant, lp_solve, LpOutcome, LpProblem, LpStatus};
pub use optimize::{max_reward_edf, max_reward_fp, FpOptimum};
pub use model::{hyperperiod, DeadlineModel, ExecVector, Task, TaskSet};

pub use rational::Rational;
pub use sim::{response_times, simulate, MissReport, Policy, Trace};
pub use region::{andor_vertices, membership, vertices, AndOrRegion, ConstraintRow, Polytope, Region, RowLabel};

