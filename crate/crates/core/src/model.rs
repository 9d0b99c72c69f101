//! Periodic task model.
//!
//! Task indices in the public analysis API are 1-based and double as fixed
//! priorities: task 1 has the highest priority. Internally, slices are
//! 0-based as usual.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A periodic (or sporadic) task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    /// Worst-case execution time, if known.
    #[serde(rename = "C", default)]
    pub wcet: Option<Rational>,
    #[serde(rename = "T")]
    pub period: Rational,
    #[serde(rename = "D")]
    pub deadline: Rational,
}

impl Task {
    pub fn new(period: Rational, deadline: Rational) -> Self {
        Task {
            wcet: None,
            period,
            deadline,
        }
    }

    pub fn with_wcet(self, wcet: Rational) -> Self {
        Task {
            wcet: Some(wcet),
            ..self
        }
    }

    /// Implicit-deadline task (`D = T`).
    pub fn implicit(period: Rational) -> Self {
        Task::new(period.clone(), period)
    }

    pub fn utilization(&self) -> Option<Rational> {
        self.wcet.as_ref().map(|c| c / &self.period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeadlineModel {
    /// `D_i <= T_i` for every task.
    Constrained,
    /// No relation between deadline and period is assumed.
    Arbitrary,
}

impl std::str::FromStr for DeadlineModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "constrained" => Ok(DeadlineModel::Constrained),
            "arbitrary" => Ok(DeadlineModel::Arbitrary),
            other => Err(format!("unknown deadline model {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    NonPositivePeriod { task: usize },
    NonPositiveDeadline { task: usize },
    NegativeWcet { task: usize },
    DeadlineExceedsPeriod { task: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "task set is empty"),
            Violation::NonPositivePeriod { task } => write!(f, "T_{task} must be positive"),
            Violation::NonPositiveDeadline { task } => write!(f, "D_{task} must be positive"),
            Violation::NegativeWcet { task } => write!(f, "C_{task} must be non-negative"),
            Violation::DeadlineExceedsPeriod { task } => {
                write!(f, "D_{task} > T_{task} under the constrained-deadline model")
            }
        }
    }
}

/// Outcome of [`validate`]: structural violations plus ordering facts needed
/// by other analyses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// `D_1 <= D_2 <= ... <= D_n`.
    pub deadline_monotonic: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks raw task parameters; never fails, reports instead.
pub fn validate(tasks: &[Task], model: DeadlineModel) -> ValidationReport {
    let mut violations = Vec::new();
    if tasks.is_empty() {
        violations.push(Violation::Empty);
    }
    for (k, task) in tasks.iter().enumerate() {
        let id = k + 1;
        if !task.period.is_positive() {
            violations.push(Violation::NonPositivePeriod { task: id });
        }
        if !task.deadline.is_positive() {
            violations.push(Violation::NonPositiveDeadline { task: id });
        }
        if task.wcet.as_ref().is_some_and(Rational::is_negative) {
            violations.push(Violation::NegativeWcet { task: id });
        }
        if model == DeadlineModel::Constrained && task.deadline > task.period {
            violations.push(Violation::DeadlineExceedsPeriod { task: id });
        }
    }
    ValidationReport {
        violations,
        deadline_monotonic: is_deadline_monotonic(tasks),
    }
}

fn is_deadline_monotonic(tasks: &[Task]) -> bool {
    tasks.windows(2).all(|w| w[0].deadline <= w[1].deadline)
}

/// An ordered, validated set of tasks. Order is priority order for FP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSet {
    tasks: Vec<Task>,
    model: DeadlineModel,
}

impl TaskSet {
    pub fn new(tasks: Vec<Task>, model: DeadlineModel) -> Result<Self> {
        let report = validate(&tasks, model);
        if !report.is_valid() {
            return Err(Error::InvalidTaskSet(report));
        }
        Ok(TaskSet { tasks, model })
    }

    /// Builds a task set from `(T, D)` pairs with unknown execution times.
    pub fn from_periods_deadlines(
        params: impl IntoIterator<Item = (Rational, Rational)>,
        model: DeadlineModel,
    ) -> Result<Self> {
        TaskSet::new(
            params.into_iter().map(|(t, d)| Task::new(t, d)).collect(),
            model,
        )
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn deadline_model(&self) -> DeadlineModel {
        self.model
    }

    /// 1-based access.
    pub fn task(&self, i: usize) -> Result<&Task> {
        self.check_index(i)?;
        Ok(&self.tasks[i - 1])
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.tasks.len() {
            return Err(Error::TaskIndex {
                index: i,
                n: self.tasks.len(),
            });
        }
        Ok(())
    }

    pub fn periods(&self) -> impl Iterator<Item = &Rational> {
        self.tasks.iter().map(|t| &t.period)
    }

    pub fn deadlines(&self) -> impl Iterator<Item = &Rational> {
        self.tasks.iter().map(|t| &t.deadline)
    }

    pub fn max_deadline(&self) -> Rational {
        self.deadlines().max().cloned().expect("task set is non-empty")
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.tasks, self.model)
    }

    pub fn is_deadline_monotonic(&self) -> bool {
        is_deadline_monotonic(&self.tasks)
    }

    /// True when every deadline is within its period, whatever the declared model.
    pub fn has_constrained_deadlines(&self) -> bool {
        self.tasks.iter().all(|t| t.deadline <= t.period)
    }

    /// Same tasks with the execution times replaced by `c`.
    pub fn with_wcets(&self, c: &ExecVector) -> Result<TaskSet> {
        self.check_dim(c)?;
        let tasks = self
            .tasks
            .iter()
            .zip(c.values())
            .map(|(t, ci)| t.clone().with_wcet(ci.clone()))
            .collect();
        Ok(TaskSet {
            tasks,
            model: self.model,
        })
    }

    /// The execution-time vector stored in the task set, if complete.
    pub fn wcets(&self) -> Result<ExecVector> {
        let values = self
            .tasks
            .iter()
            .enumerate()
            .map(|(k, t)| t.wcet.clone().ok_or(Error::MissingWcet { task: k + 1 }))
            .collect::<Result<Vec<_>>>()?;
        ExecVector::new(values)
    }

    pub(crate) fn check_dim(&self, c: &ExecVector) -> Result<()> {
        if c.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: c.len(),
            });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TaskFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_task_set(None)
    }

    pub fn to_json(&self) -> String {
        let file = TaskFile {
            deadline_model: self.model,
            tasks: self.tasks.clone(),
        };
        serde_json::to_string_pretty(&file).expect("task sets always serialize")
    }
}

/// On-disk task-set document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskFile {
    pub deadline_model: DeadlineModel,
    pub tasks: Vec<Task>,
}

impl TaskFile {
    /// Validates into a [`TaskSet`], optionally overriding the declared model.
    pub fn into_task_set(self, model: Option<DeadlineModel>) -> Result<TaskSet> {
        TaskSet::new(self.tasks, model.unwrap_or(self.deadline_model))
    }
}

/// A candidate execution-time assignment `C = [C_1, ..., C_n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExecVector(Vec<Rational>);

impl ExecVector {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if let Some(neg) = values.iter().find(|v| v.is_negative()) {
            return Err(Error::NegativeWcet { value: neg.clone() });
        }
        Ok(ExecVector(values))
    }

    pub fn zeros(n: usize) -> Self {
        ExecVector(vec![Rational::zero(); n])
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }
}

impl std::ops::Index<usize> for ExecVector {
    type Output = Rational;
    fn index(&self, k: usize) -> &Rational {
        &self.0[k]
    }
}

impl fmt::Display for ExecVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// `[C_1/T_1, ..., C_n/T_n]`.
pub fn utilization_vector(ts: &TaskSet, c: &ExecVector) -> Result<Vec<Rational>> {
    ts.check_dim(c)?;
    Ok(ts
        .periods()
        .zip(c.values())
        .map(|(t, ci)| ci / t)
        .collect())
}

pub fn total_utilization(ts: &TaskSet, c: &ExecVector) -> Result<Rational> {
    Ok(utilization_vector(ts, c)?.into_iter().sum())
}

/// Least common multiple of the periods. For canonical `T_i = p_i/q_i`
/// this is `lcm(p_1..p_n) / gcd(q_1..q_n)`.
pub fn hyperperiod(ts: &TaskSet) -> Rational {
    rational_lcm(ts.periods())
}

pub(crate) fn rational_lcm<'a>(values: impl Iterator<Item = &'a Rational>) -> Rational {
    let mut numer_lcm = BigInt::one();
    let mut denom_gcd: Option<BigInt> = None;
    for v in values {
        numer_lcm = numer_lcm.lcm(v.numer());
        denom_gcd = Some(match denom_gcd {
            None => v.denom().clone(),
            Some(g) => g.gcd(v.denom()),
        });
    }
    Rational::new(numer_lcm, denom_gcd.unwrap_or_else(BigInt::one))
}
