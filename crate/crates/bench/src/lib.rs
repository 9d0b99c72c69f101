//! Task sets shared by the benchmarks.

use rtctimes_core::rational::{r, ri};
use rtctimes_core::{DeadlineModel, ExecVector, TaskSet};

/// T = (2, 5, 7), D = (3, 5, 6): 49 deadlines, 5 of them irredundant.
pub fn three_tasks_arbitrary() -> TaskSet {
    TaskSet::from_periods_deadlines(
        [(ri(2), ri(3)), (ri(5), ri(5)), (ri(7), ri(6))],
        DeadlineModel::Arbitrary,
    )
    .unwrap()
}

/// Five rate-monotonic tasks with a hyperperiod of 3600.
pub fn five_tasks_dm() -> TaskSet {
    TaskSet::from_periods_deadlines(
        [
            (ri(8), ri(7)),
            (ri(15), ri(12)),
            (ri(25), ri(20)),
            (ri(36), ri(30)),
            (ri(50), ri(45)),
        ],
        DeadlineModel::Constrained,
    )
    .unwrap()
}

/// Execution times at roughly 70% utilization for [`five_tasks_dm`].
pub fn five_tasks_wcets() -> ExecVector {
    ExecVector::new(vec![ri(1), r(3, 2), ri(3), ri(4), ri(6)]).unwrap()
}
