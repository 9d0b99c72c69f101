//! Exact fixed-priority schedulability.
//!
//! Task `i` meets its deadline under the synchronous release pattern iff
//! some point `t` in `(0, D_i]` satisfies the workload inequality
//! `C_i + sum_{l<i} ceil(t/T_l) C_l <= t`. Only finitely many points need
//! checking: every release of a higher-priority task up to `D_i` plus `D_i`
//! itself, or, under deadline-monotonic priorities, the much smaller set
//! built by [`reduced_points`].

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{total_utilization, ExecVector, TaskSet};
use crate::rational::{dot, Rational};
use crate::region::{AndOrRegion, ConstraintRow, RowLabel};

/// Which family of schedulability points to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointSource {
    /// Every higher-priority release up to the deadline, plus the deadline.
    Lehoczky,
    /// The recursive reduction; valid only for deadline-monotonic order.
    Reduced,
}

impl std::str::FromStr for PointSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lehoczky" => Ok(PointSource::Lehoczky),
            "reduced" => Ok(PointSource::Reduced),
            other => Err(format!("unknown point source {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedPointSet {
    /// 1-based task index.
    pub task: usize,
    /// Sorted ascending, deduplicated.
    pub points: Vec<Rational>,
    pub source: PointSource,
}

impl SchedPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positive(&self) -> impl Iterator<Item = &Rational> {
        self.points.iter().filter(|t| t.is_positive())
    }
}

/// Workload row `k_i(t) . C <= t` (or `k_i(t, j) . C <= t`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpConstraint {
    pub coeffs: Vec<Rational>,
    pub bound: Rational,
    pub task: usize,
    pub point: Rational,
    pub job: Option<u64>,
}

impl FpConstraint {
    pub fn is_satisfied(&self, c: &ExecVector) -> bool {
        dot(&self.coeffs, c.values()) <= self.bound
    }

    pub fn into_row(self) -> ConstraintRow {
        ConstraintRow::new(
            self.coeffs,
            self.bound,
            RowLabel::Fp {
                task: self.task,
                point: self.point,
                job: self.job,
            },
        )
    }
}

/// `(ceil(t/T_1), ..., ceil(t/T_{i-1}), j+1, 0, ..., 0)` with bound `t`.
pub fn k_vector(ts: &TaskSet, i: usize, t: &Rational, job: Option<u64>) -> Result<FpConstraint> {
    ts.check_index(i)?;
    let mut coeffs = vec![Rational::zero(); ts.len()];
    for (l, task) in ts.tasks()[..i - 1].iter().enumerate() {
        coeffs[l] = Rational::from(t.ceil_div(&task.period));
    }
    coeffs[i - 1] = Rational::from(job.unwrap_or(0) + 1);
    Ok(FpConstraint {
        coeffs,
        bound: t.clone(),
        task: i,
        point: t.clone(),
        job,
    })
}

/// `{ j T_l : l < i, j >= 0, j T_l <= D_i } ∪ {D_i}`; includes 0 whenever
/// a higher-priority task exists.
pub fn lehoczky_points(ts: &TaskSet, i: usize) -> Result<SchedPointSet> {
    let deadline = ts.task(i)?.deadline.clone();
    lehoczky_points_upto(ts, i, &deadline)
}

/// Lehoczky-style points over `[0, bound]` for task `i`.
pub fn lehoczky_points_upto(ts: &TaskSet, i: usize, bound: &Rational) -> Result<SchedPointSet> {
    ts.check_index(i)?;
    let mut points = BTreeSet::new();
    for task in &ts.tasks()[..i - 1] {
        let count = bound.floor_div(&task.period);
        let mut j = BigInt::zero();
        while j <= count {
            points.insert(Rational::from(j.clone()) * &task.period);
            j += 1;
        }
    }
    points.insert(bound.clone());
    Ok(SchedPointSet {
        task: i,
        points: points.into_iter().collect(),
        source: PointSource::Lehoczky,
    })
}

/// `P_{i-1}(t)`: start from `{t}` and, for `l = i-1` down to `1`, replace
/// every point `s` by `{floor(s/T_l) T_l, s}`. Non-positive points are
/// dropped.
pub fn reduced_points(ts: &TaskSet, i: usize, t: &Rational) -> Result<SchedPointSet> {
    ts.check_index(i)?;
    if !ts.tasks()[..i].windows(2).all(|w| w[0].deadline <= w[1].deadline) {
        return Err(Error::NotDeadlineMonotonic { task: i });
    }
    let mut points: BTreeSet<Rational> = BTreeSet::from([t.clone()]);
    for task in ts.tasks()[..i - 1].iter().rev() {
        let mut next = BTreeSet::new();
        for s in points {
            next.insert(Rational::from(s.floor_div(&task.period)) * &task.period);
            next.insert(s);
        }
        points = next;
    }
    Ok(SchedPointSet {
        task: i,
        points: points.into_iter().filter(Rational::is_positive).collect(),
        source: PointSource::Reduced,
    })
}

/// Point set for task `i` up to `bound` from the requested source.
pub fn points_for(ts: &TaskSet, i: usize, bound: &Rational, source: PointSource) -> Result<SchedPointSet> {
    match source {
        PointSource::Lehoczky => lehoczky_points_upto(ts, i, bound),
        PointSource::Reduced => reduced_points(ts, i, bound),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpVerdict {
    pub schedulable: bool,
    /// Smallest certifying point of each task checked before the verdict.
    pub witnesses: Vec<Rational>,
    /// 1-based index of the first task without a certifying point.
    pub failing_task: Option<usize>,
}

fn require_constrained(ts: &TaskSet) -> Result<()> {
    if !ts.has_constrained_deadlines() {
        return Err(Error::ArbitraryDeadlines);
    }
    Ok(())
}

/// Exact FP test for constrained deadlines.
pub fn fp_schedulable(ts: &TaskSet, c: &ExecVector, source: PointSource) -> Result<FpVerdict> {
    require_constrained(ts)?;
    ts.check_dim(c)?;
    let mut witnesses = Vec::with_capacity(ts.len());
    for i in 1..=ts.len() {
        let deadline = &ts.tasks()[i - 1].deadline;
        let points = points_for(ts, i, deadline, source)?;
        match first_certifying_point(ts, c, i, &points, None)? {
            Some(t) => witnesses.push(t),
            None => {
                return Ok(FpVerdict {
                    schedulable: false,
                    witnesses,
                    failing_task: Some(i),
                })
            }
        }
    }
    Ok(FpVerdict {
        schedulable: true,
        witnesses,
        failing_task: None,
    })
}

fn first_certifying_point(
    ts: &TaskSet,
    c: &ExecVector,
    i: usize,
    points: &SchedPointSet,
    job: Option<u64>,
) -> Result<Option<Rational>> {
    // k_i(0) . C = (j+1) C_i, so t = 0 certifies exactly the zero-demand jobs
    if c[i - 1].is_zero() {
        return Ok(Some(Rational::zero()));
    }
    for t in points.positive() {
        if k_vector(ts, i, t, job)?.is_satisfied(c) {
            return Ok(Some(t.clone()));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskBusyReport {
    pub task: usize,
    /// Length of the synchronous level-`i` busy interval.
    pub busy_period: Rational,
    /// Index of the last job of the task released inside it.
    pub last_job: u64,
    /// Certifying point of each job `0..=last_job` checked.
    pub witnesses: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArbitraryVerdict {
    pub schedulable: bool,
    pub utilization: Rational,
    pub tasks: Vec<TaskBusyReport>,
    /// `(task, job)` of the first job found late.
    pub first_failure: Option<(usize, u64)>,
}

/// Length of the level-`i` busy interval under synchronous release:
/// least fixed point of `L = sum_{l<=i} ceil(L/T_l) C_l`.
pub fn busy_period(ts: &TaskSet, c: &ExecVector, i: usize) -> Result<Rational> {
    ts.check_index(i)?;
    ts.check_dim(c)?;
    let tasks = &ts.tasks()[..i];
    let wcets = &c.values()[..i];
    let mut length: Rational = wcets.iter().sum();
    if length.is_zero() {
        return Ok(length);
    }
    loop {
        let next: Rational = tasks
            .iter()
            .zip(wcets)
            .map(|(task, ci)| Rational::from(length.ceil_div(&task.period)) * ci)
            .sum();
        if next == length {
            return Ok(length);
        }
        length = next;
    }
}

/// Exact FP test for arbitrary deadlines with known execution times.
///
/// Every job of every task inside its level-`i` busy interval is checked
/// with `k_i(t, j) . C <= t` over all higher-priority releases up to
/// `j T_i + D_i`.
pub fn fp_schedulable_arbitrary(ts: &TaskSet, c: &ExecVector) -> Result<ArbitraryVerdict> {
    fp_schedulable_arbitrary_with(ts, c, PointSource::Lehoczky)
}

/// [`fp_schedulable_arbitrary`] with a chosen point family.
///
/// `Reduced` builds `P_{i-1}(j T_i + D_i)`. For `j > 0` that set can miss
/// the only certifying instant, so the verdict is sufficient but not
/// exact; see the `reduced_points_incomplete_for_later_jobs` test.
pub fn fp_schedulable_arbitrary_with(
    ts: &TaskSet,
    c: &ExecVector,
    source: PointSource,
) -> Result<ArbitraryVerdict> {
    ts.check_dim(c)?;
    let utilization = total_utilization(ts, c)?;
    if utilization > Rational::one() {
        return Ok(ArbitraryVerdict {
            schedulable: false,
            utilization,
            tasks: Vec::new(),
            first_failure: Some((ts.len(), 0)),
        });
    }
    let mut reports = Vec::with_capacity(ts.len());
    for i in 1..=ts.len() {
        let task = &ts.tasks()[i - 1];
        let busy = busy_period(ts, c, i)?;
        let last_job = u64::try_from(busy.ceil_div(&task.period))
            .expect("busy interval job count fits in u64")
            .saturating_sub(1);
        let mut witnesses = Vec::new();
        for j in 0..=last_job {
            let bound = Rational::from(j) * &task.period + &task.deadline;
            let points = points_for(ts, i, &bound, source)?;
            match first_certifying_point(ts, c, i, &points, Some(j))? {
                Some(t) => witnesses.push(t),
                None => {
                    reports.push(TaskBusyReport {
                        task: i,
                        busy_period: busy,
                        last_job,
                        witnesses,
                    });
                    return Ok(ArbitraryVerdict {
                        schedulable: false,
                        utilization,
                        tasks: reports,
                        first_failure: Some((i, j)),
                    });
                }
            }
        }
        reports.push(TaskBusyReport {
            task: i,
            busy_period: busy,
            last_job,
            witnesses,
        });
    }
    Ok(ArbitraryVerdict {
        schedulable: true,
        utilization,
        tasks: reports,
        first_failure: None,
    })
}

/// The FP-schedulable region: for each task, the disjunction of its
/// workload rows over its positive schedulability points.
pub fn fp_region(ts: &TaskSet, source: PointSource) -> Result<AndOrRegion> {
    require_constrained(ts)?;
    let mut groups = Vec::with_capacity(ts.len());
    for i in 1..=ts.len() {
        let deadline = &ts.tasks()[i - 1].deadline;
        let points = points_for(ts, i, deadline, source)?;
        let group = points
            .positive()
            .map(|t| k_vector(ts, i, t, None).map(FpConstraint::into_row))
            .collect::<Result<Vec<_>>>()?;
        groups.push(group);
    }
    AndOrRegion::new(ts.len(), groups)
}
