//! Exact EDF schedulability through the demand bound function.
//!
//! A task set is EDF-schedulable iff `dbf(t) <= t` at every absolute
//! deadline `t` up to `H + max D` and total utilization is at most 1.
//! Dividing by `t` turns each instant into a row `h(t) . C <= 1`; instant
//! 0 stands for the utilization row.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::Result;
use crate::lp::eliminate_redundant;
use crate::model::{hyperperiod, ExecVector, TaskSet};
use crate::rational::{dot, Rational};
use crate::region::{ConstraintRow, Polytope, RowLabel};

/// Number of jobs of a task with relative deadline `d` and period `p`
/// whose absolute deadline falls in `[0, t]`.
fn jobs_due(t: &Rational, period: &Rational, deadline: &Rational) -> BigInt {
    let count: BigInt = (t - deadline).floor_div(period) + 1;
    if count.is_negative() {
        BigInt::zero()
    } else {
        count
    }
}

/// `dbf(t) = sum_i max(0, floor((t - D_i)/T_i) + 1) C_i`.
pub fn dbf(ts: &TaskSet, c: &ExecVector, t: &Rational) -> Result<Rational> {
    ts.check_dim(c)?;
    Ok(ts
        .tasks()
        .iter()
        .zip(c.values())
        .map(|(task, ci)| Rational::from(jobs_due(t, &task.period, &task.deadline)) * ci)
        .sum())
}

/// Absolute deadlines to test, together with the sentinel instant 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlineSet {
    /// Sorted ascending, deduplicated; the first entry is always 0.
    pub instants: Vec<Rational>,
    /// `H + max D`.
    pub horizon: Rational,
}

impl DeadlineSet {
    /// Number of positive instants.
    pub fn positive_count(&self) -> usize {
        self.instants.iter().filter(|t| t.is_positive()).count()
    }

    pub fn positive(&self) -> impl Iterator<Item = &Rational> {
        self.instants.iter().filter(|t| t.is_positive())
    }
}

/// Every `j T_i + D_i <= H + max D` (inclusive), plus 0.
pub fn deadline_set(ts: &TaskSet) -> DeadlineSet {
    let horizon = hyperperiod(ts) + ts.max_deadline();
    let mut instants = vec![Rational::zero()];
    for task in ts.tasks() {
        let mut t = task.deadline.clone();
        while t <= horizon {
            instants.push(t.clone());
            t += &task.period;
        }
    }
    instants.sort();
    instants.dedup();
    DeadlineSet { instants, horizon }
}

/// One EDF row `h(t) . C <= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdfConstraint {
    pub coeffs: Vec<Rational>,
    pub instant: Rational,
}

impl EdfConstraint {
    pub fn is_satisfied(&self, c: &ExecVector) -> bool {
        dot(&self.coeffs, c.values()) <= Rational::one()
    }

    pub fn into_row(self) -> ConstraintRow {
        ConstraintRow::new(self.coeffs, Rational::one(), RowLabel::Edf { instant: self.instant })
    }
}

/// `h_i(0) = 1/T_i`; `h_i(t) = max(0, floor((t - D_i)/T_i) + 1) / t` for `t > 0`.
pub fn h_vector(ts: &TaskSet, t: &Rational) -> EdfConstraint {
    let coeffs = if t.is_zero() {
        ts.tasks().iter().map(|task| task.period.recip()).collect()
    } else {
        ts.tasks()
            .iter()
            .map(|task| Rational::from(jobs_due(t, &task.period, &task.deadline)) / t)
            .collect()
    };
    EdfConstraint {
        coeffs,
        instant: t.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdfVerdict {
    pub schedulable: bool,
    /// Earliest violated instant (0 means utilization above 1).
    pub violated_instant: Option<Rational>,
}

/// Exact EDF test.
pub fn edf_schedulable(ts: &TaskSet, c: &ExecVector) -> Result<EdfVerdict> {
    ts.check_dim(c)?;
    let set = deadline_set(ts);
    for t in &set.instants {
        let ok = if t.is_zero() {
            h_vector(ts, t).is_satisfied(c)
        } else {
            dbf(ts, c, t)? <= *t
        };
        if !ok {
            return Ok(EdfVerdict {
                schedulable: false,
                violated_instant: Some(t.clone()),
            });
        }
    }
    Ok(EdfVerdict {
        schedulable: true,
        violated_instant: None,
    })
}

/// One row per instant of [`deadline_set`], in increasing instant order.
pub fn edf_rows(ts: &TaskSet) -> Vec<ConstraintRow> {
    deadline_set(ts)
        .instants
        .iter()
        .map(|t| h_vector(ts, t).into_row())
        .collect()
}

/// The EDF-schedulable region with every row.
pub fn edf_polytope(ts: &TaskSet) -> Result<Polytope> {
    Polytope::new(ts.len(), edf_rows(ts))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalDeadlines {
    /// The non-redundant instants, ascending; may or may not contain 0.
    pub deadlines: DeadlineSet,
    /// Their rows, in the same order.
    pub rows: Vec<ConstraintRow>,
}

impl MinimalDeadlines {
    pub fn polytope(&self) -> Result<Polytope> {
        Polytope::new(self.rows.first().map_or(0, ConstraintRow::dim), self.rows.clone())
    }
}

/// Smallest subset of the deadline set whose rows describe the same region.
pub fn minimal_deadlines(ts: &TaskSet) -> Result<MinimalDeadlines> {
    let full = deadline_set(ts);
    let mut rows = eliminate_redundant(&edf_rows(ts))?;
    rows.sort_by(|a, b| a.label.cmp(&b.label));
    let instants = rows
        .iter()
        .map(|row| match &row.label {
            RowLabel::Edf { instant } => instant.clone(),
            other => unreachable!("EDF rows carry EDF labels, got {other}"),
        })
        .collect();
    Ok(MinimalDeadlines {
        deadlines: DeadlineSet {
            instants,
            horizon: full.horizon,
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DeadlineModel;
    use crate::rational::{r, ri};

    fn ts(params: &[(i64, i64)]) -> TaskSet {
        TaskSet::from_periods_deadlines(
            params.iter().map(|&(t, d)| (ri(t), ri(d))),
            DeadlineModel::Arbitrary,
        )
        .unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| ri(x)).collect()
    }

    fn ev(v: &[Rational]) -> ExecVector {
        ExecVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn edf_pair_deadline_set() {
        let set = deadline_set(&ts(&[(4, 3), (5, 5)]));
        assert_eq!(set.horizon, ri(25));
        assert_eq!(set.instants, ints(&[0, 3, 5, 7, 10, 11, 15, 19, 20, 23, 25]));
    }

    #[test]
    fn edf_pair_h_rows() {
        let set = ts(&[(4, 3), (5, 5)]);
        assert_eq!(h_vector(&set, &ri(0)).coeffs, vec![r(1, 4), r(1, 5)]);
        assert_eq!(h_vector(&set, &ri(3)).coeffs, vec![r(1, 3), ri(0)]);
        assert_eq!(h_vector(&set, &ri(15)).coeffs, vec![r(4, 15), r(1, 5)]);
        assert_eq!(h_vector(&set, &ri(20)).coeffs, vec![r(1, 4), r(1, 5)]);
    }

    #[test]
    fn edf_pair_minimal_deadlines() {
        let m = minimal_deadlines(&ts(&[(4, 3), (5, 5)])).unwrap();
        assert_eq!(m.deadlines.instants, ints(&[3, 15]));
        assert_eq!(m.rows.len(), 2);
    }

    #[test]
    fn arbitrary_trio_minimal_deadlines() {
        let set = ts(&[(2, 3), (5, 5), (7, 6)]);
        let d = deadline_set(&set);
        assert_eq!(d.horizon, ri(76));
        assert_eq!(d.positive_count(), 49);
        let m = minimal_deadlines(&set).unwrap();
        assert_eq!(m.deadlines.instants, ints(&[0, 6, 13, 20, 55]));
    }

    #[test]
    fn single_task_keeps_one_positive_instant() {
        let m = minimal_deadlines(&ts(&[(5, 5)])).unwrap();
        assert_eq!(m.deadlines.instants, ints(&[5]));
    }

    #[test]
    fn dbf_examples() {
        let set = ts(&[(4, 3), (5, 5)]);
        let c = ev(&ints(&[1, 2]));
        assert_eq!(dbf(&set, &c, &ri(2)).unwrap(), ri(0));
        assert_eq!(dbf(&set, &c, &ri(3)).unwrap(), ri(1));
        assert_eq!(dbf(&set, &c, &ri(15)).unwrap(), ri(4 + 6));
        assert_eq!(dbf(&set, &c, &r(29, 2)).unwrap(), ri(3 + 4));
    }

    #[test]
    fn edf_pair_verdicts() {
        let set = ts(&[(4, 3), (5, 5)]);
        assert!(edf_schedulable(&set, &ev(&ints(&[3, 1]))).unwrap().schedulable);
        assert!(edf_schedulable(&set, &ev(&ints(&[0, 5]))).unwrap().schedulable);
        let v = edf_schedulable(&set, &ev(&[r(31, 10), ri(0)])).unwrap();
        assert_eq!(v.violated_instant, Some(ri(3)));
        let v = edf_schedulable(&set, &ev(&ints(&[2, 3]))).unwrap();
        assert_eq!(v.violated_instant, Some(ri(0)));
    }

    #[test]
    fn fractional_parameters() {
        let set = TaskSet::from_periods_deadlines(
            [(r(3, 2), r(1, 2)), (r(5, 2), r(5, 2))],
            DeadlineModel::Constrained,
        )
        .unwrap();
        let d = deadline_set(&set);
        assert_eq!(d.horizon, r(15, 2) + r(5, 2));
        assert!(d.instants.contains(&r(1, 2)));
        assert!(d.instants.contains(&ri(10)));
        assert!(!d.instants.contains(&r(21, 2)));
    }
}
