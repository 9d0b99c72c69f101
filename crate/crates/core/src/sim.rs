//! Discrete-event simulation of the synchronous release pattern.
//!
//! Every task releases its `j`-th job at `j T_i`. The simulator runs the
//! preemptive FP (task index order) or EDF schedule exactly and reports
//! the first job that misses its deadline. It is the brute-force oracle
//! for the analytic tests.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{hyperperiod, ExecVector, TaskSet};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    Fp,
    Edf,
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fp" => Ok(Policy::Fp),
            "edf" => Ok(Policy::Edf),
            other => Err(format!("unknown policy {other:?}")),
        }
    }
}

/// One released job and its fate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    /// 1-based.
    pub task: usize,
    pub job: u64,
    pub release: Rational,
    pub deadline: Rational,
    /// `None` if the job had not finished by the horizon.
    pub completion: Option<Rational>,
}

impl Job {
    pub fn missed(&self, horizon: &Rational) -> bool {
        match &self.completion {
            Some(done) => done > &self.deadline,
            None => &self.deadline <= horizon,
        }
    }
}

/// The processor runs job `job` of task `task` over `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: Rational,
    pub end: Rational,
    pub task: usize,
    pub job: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissReport {
    pub task: usize,
    pub job: u64,
    pub deadline: Rational,
    /// `None` when the job was still unfinished at the horizon.
    pub completion: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub policy: Policy,
    pub horizon: Rational,
    /// Ordered, non-overlapping; consecutive pieces of the same job are merged.
    pub segments: Vec<Segment>,
    /// Every released job in release order (ties by task index).
    pub jobs: Vec<Job>,
    /// Earliest-deadline miss with deadline inside the horizon.
    pub first_miss: Option<MissReport>,
}

impl Trace {
    pub fn schedulable(&self) -> bool {
        self.first_miss.is_none()
    }

    /// `start,end,task,job` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("start,end,task,job\n");
        for s in &self.segments {
            writeln!(out, "{},{},{},{}", s.start, s.end, s.task, s.job).unwrap();
        }
        out
    }
}

/// `H` for FP with constrained deadlines, `H + max D` otherwise.
pub fn default_horizon(ts: &TaskSet, policy: Policy) -> Rational {
    let h = hyperperiod(ts);
    if policy == Policy::Fp && ts.has_constrained_deadlines() {
        h
    } else {
        h + ts.max_deadline()
    }
}

/// Default cap, in multiples of the smallest period.
pub const DEFAULT_PERIOD_CAP: u64 = 1_000_000;

/// Simulates over `[0, horizon)` with the default cap.
pub fn simulate(ts: &TaskSet, c: &ExecVector, policy: Policy, horizon: &Rational) -> Result<Trace> {
    simulate_capped(ts, c, policy, horizon, DEFAULT_PERIOD_CAP)
}

/// Like [`simulate`], refusing horizons longer than `period_cap` times
/// the smallest period.
pub fn simulate_capped(
    ts: &TaskSet,
    c: &ExecVector,
    policy: Policy,
    horizon: &Rational,
    period_cap: u64,
) -> Result<Trace> {
    ts.check_dim(c)?;
    if !horizon.is_positive() {
        return Err(Error::NonPositiveHorizon(horizon.clone()));
    }
    let min_period = ts
        .periods()
        .min()
        .cloned()
        .expect("task sets are never empty");
    let cap = Rational::from(period_cap) * min_period;
    if horizon > &cap {
        return Err(Error::HorizonTooLarge {
            horizon: Box::new(horizon.clone()),
            cap: Box::new(cap),
        });
    }
    Ok(Engine::new(ts, c, policy, horizon).run())
}

struct Engine<'a> {
    ts: &'a TaskSet,
    c: &'a ExecVector,
    policy: Policy,
    horizon: Rational,
    next_release: Vec<Rational>,
    next_job: Vec<u64>,
    jobs: Vec<Job>,
    /// `(index into jobs, remaining execution)`.
    pending: Vec<(usize, Rational)>,
    segments: Vec<Segment>,
}

impl<'a> Engine<'a> {
    fn new(ts: &'a TaskSet, c: &'a ExecVector, policy: Policy, horizon: &Rational) -> Self {
        Engine {
            ts,
            c,
            policy,
            horizon: horizon.clone(),
            next_release: vec![Rational::zero(); ts.len()],
            next_job: vec![0; ts.len()],
            jobs: Vec::new(),
            pending: Vec::new(),
            segments: Vec::new(),
        }
    }

    fn release_due(&mut self, now: &Rational) {
        for (i, task) in self.ts.tasks().iter().enumerate() {
            while &self.next_release[i] <= now && self.next_release[i] < self.horizon {
                let release = self.next_release[i].clone();
                let wcet = &self.c[i];
                let index = self.jobs.len();
                self.jobs.push(Job {
                    task: i + 1,
                    job: self.next_job[i],
                    deadline: &release + &task.deadline,
                    completion: wcet.is_zero().then(|| release.clone()),
                    release: release.clone(),
                });
                if !wcet.is_zero() {
                    self.pending.push((index, wcet.clone()));
                }
                self.next_job[i] += 1;
                self.next_release[i] = release + &task.period;
            }
        }
    }

    fn next_release_time(&self) -> Option<Rational> {
        self.next_release
            .iter()
            .filter(|t| **t < self.horizon)
            .min()
            .cloned()
    }

    /// Position in `pending` of the job to run.
    fn pick(&self) -> Option<usize> {
        let key = |&(index, _): &(usize, Rational)| {
            let job = &self.jobs[index];
            match self.policy {
                Policy::Fp => (None, job.task, job.job),
                Policy::Edf => (Some(job.deadline.clone()), job.task, job.job),
            }
        };
        (0..self.pending.len()).min_by_key(|&p| key(&self.pending[p]))
    }

    fn record(&mut self, start: &Rational, end: &Rational, index: usize) {
        let job = &self.jobs[index];
        if let Some(last) = self.segments.last_mut() {
            if &last.end == start && last.task == job.task && last.job == job.job {
                last.end = end.clone();
                return;
            }
        }
        self.segments.push(Segment {
            start: start.clone(),
            end: end.clone(),
            task: job.task,
            job: job.job,
        });
    }

    fn run(mut self) -> Trace {
        let mut now = Rational::zero();
        while now < self.horizon {
            self.release_due(&now);
            let upcoming = self.next_release_time();
            let Some(p) = self.pick() else {
                match upcoming {
                    Some(t) => {
                        now = t;
                        continue;
                    }
                    None => break,
                }
            };
            let (index, remaining) = self.pending[p].clone();
            let mut end = (&now + &remaining).min(self.horizon.clone());
            if let Some(t) = upcoming {
                end = end.min(t);
            }
            self.record(&now, &end, index);
            let left = remaining - (&end - &now);
            if left.is_zero() {
                self.jobs[index].completion = Some(end.clone());
                self.pending.swap_remove(p);
            } else {
                self.pending[p].1 = left;
            }
            now = end;
        }
        let first_miss = self
            .jobs
            .iter()
            .filter(|job| job.missed(&self.horizon))
            .min_by(|a, b| (&a.deadline, a.task).cmp(&(&b.deadline, b.task)))
            .map(|job| MissReport {
                task: job.task,
                job: job.job,
                deadline: job.deadline.clone(),
                completion: job.completion.clone(),
            });
        Trace {
            policy: self.policy,
            horizon: self.horizon,
            segments: self.segments,
            jobs: self.jobs,
            first_miss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseTime {
    pub task: usize,
    /// Largest `completion - release` over finished jobs.
    pub worst: Option<Rational>,
    /// Jobs still running at the horizon, excluded from `worst`.
    pub unfinished: usize,
}

/// Worst observed response time of each task.
pub fn response_times(trace: &Trace) -> Vec<ResponseTime> {
    let n = trace.jobs.iter().map(|j| j.task).max().unwrap_or(0);
    let mut out: Vec<ResponseTime> = (1..=n)
        .map(|task| ResponseTime {
            task,
            worst: None,
            unfinished: 0,
        })
        .collect();
    for job in &trace.jobs {
        let slot = &mut out[job.task - 1];
        match &job.completion {
            Some(done) => {
                let response = done - &job.release;
                if slot.worst.as_ref().is_none_or(|w| &response > w) {
                    slot.worst = Some(response);
                }
            }
            None => slot.unfinished += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DeadlineModel;
    use crate::rational::{r, ri};

    fn set(params: &[(i64, i64)]) -> TaskSet {
        TaskSet::from_periods_deadlines(
            params.iter().map(|&(t, d)| (ri(t), ri(d))),
            DeadlineModel::Arbitrary,
        )
        .unwrap()
    }

    fn ev(v: &[Rational]) -> ExecVector {
        ExecVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn fp_pair_fp_no_miss() {
        let ts = set(&[(4, 3), (100, 5)]);
        let trace = simulate(&ts, &ev(&[ri(1), ri(3)]), Policy::Fp, &ri(20)).unwrap();
        assert!(trace.schedulable());
        let rt = response_times(&trace);
        assert!(rt[1].worst.clone().unwrap() <= ri(5));
        // tau_2 runs over [1, 4) right before tau_1's second release
        assert_eq!(rt[1].worst, Some(ri(4)));
    }

    #[test]
    fn edf_pair_edf_miss_by_15() {
        let ts = set(&[(4, 3), (5, 5)]);
        let trace = simulate(&ts, &ev(&[ri(2), ri(3)]), Policy::Edf, &ri(25)).unwrap();
        let miss = trace.first_miss.unwrap();
        assert!(miss.deadline <= ri(15));
    }

    #[test]
    fn zero_execution_is_empty() {
        let ts = set(&[(2, 3), (5, 5), (7, 6)]);
        for policy in [Policy::Fp, Policy::Edf] {
            let trace = simulate(&ts, &ExecVector::zeros(3), policy, &ri(76)).unwrap();
            assert!(trace.segments.is_empty());
            assert!(trace.schedulable());
            assert_eq!(trace.to_csv(), "start,end,task,job\n");
        }
    }

    #[test]
    fn single_task_response() {
        let ts = set(&[(5, 5)]);
        let trace = simulate(&ts, &ev(&[ri(2)]), Policy::Fp, &ri(10)).unwrap();
        let rt = response_times(&trace);
        assert_eq!(rt[0].worst, Some(ri(2)));
        assert_eq!(rt[0].unfinished, 0);
        assert_eq!(trace.to_csv(), "start,end,task,job\n0,2,1,0\n5,7,1,1\n");
    }

    #[test]
    fn arbitrary_deadline_response_beyond_period() {
        // tau_1 of the arbitrary-deadline trio with C_1 > T_1: its first two jobs finish
        // later than one period after release but still by D_1 = 3
        let ts = set(&[(2, 3), (5, 5), (7, 6)]);
        let c = ev(&[r(5, 2), ri(0), ri(0)]);
        let trace = simulate(&ts, &c, Policy::Fp, &default_horizon(&ts, Policy::Fp)).unwrap();
        let first: Vec<Rational> = trace
            .jobs
            .iter()
            .filter(|j| j.task == 1)
            .take(2)
            .map(|j| j.completion.clone().unwrap() - &j.release)
            .collect();
        assert_eq!(first, vec![r(5, 2), ri(3)]);
        let miss = trace.first_miss.unwrap();
        assert_eq!((miss.task, miss.job), (1, 2));
    }

    #[test]
    fn horizon_errors() {
        let ts = set(&[(5, 5)]);
        let c = ev(&[ri(1)]);
        assert!(matches!(simulate(&ts, &c, Policy::Fp, &ri(0)), Err(Error::NonPositiveHorizon(_))));
        assert!(matches!(
            simulate_capped(&ts, &c, Policy::Fp, &ri(51), 10),
            Err(Error::HorizonTooLarge { .. })
        ));
        assert!(simulate_capped(&ts, &c, Policy::Fp, &ri(50), 10).is_ok());
    }

    #[test]
    fn unfinished_job_past_deadline_is_a_miss() {
        let ts = set(&[(2, 2), (4, 4)]);
        let trace = simulate(&ts, &ev(&[ri(1), ri(3)]), Policy::Fp, &ri(4)).unwrap();
        let miss = trace.first_miss.clone().unwrap();
        assert_eq!((miss.task, miss.job, miss.completion), (2, 0, None));
        assert_eq!(response_times(&trace)[1].unfinished, 1);
    }

    #[test]
    fn edf_ties_go_to_lower_index() {
        let ts = set(&[(4, 4), (4, 4)]);
        let trace = simulate(&ts, &ev(&[ri(1), ri(1)]), Policy::Edf, &ri(4)).unwrap();
        assert_eq!(trace.segments[0].task, 1);
        assert_eq!(trace.segments[1].task, 2);
    }

    #[test]
    fn default_horizons() {
        let constrained = set(&[(4, 3), (5, 5)]);
        assert_eq!(default_horizon(&constrained, Policy::Fp), ri(20));
        assert_eq!(default_horizon(&constrained, Policy::Edf), ri(25));
        let arbitrary = set(&[(2, 3), (5, 5), (7, 6)]);
        assert_eq!(default_horizon(&arbitrary, Policy::Fp), ri(76));
    }
}
