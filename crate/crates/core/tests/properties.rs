//! Property tests for the invariants that tie the modules together.

use proptest::prelude::*;
use rtctimes_core::edf::{dbf, deadline_set, edf_rows, edf_schedulable, minimal_deadlines};
use rtctimes_core::experiment::{evaluate_instance, DeadlineRule, ExperimentConfig};
use rtctimes_core::fp::{fp_region, fp_schedulable, PointSource};
use rtctimes_core::lp::{eliminate_redundant, lp_solve, LpProblem};
use rtctimes_core::model::hyperperiod;
use rtctimes_core::optimize::{max_reward_edf, max_reward_fp};
use rtctimes_core::rational::{r, ri};
use rtctimes_core::region::{membership, Polytope};
use rtctimes_core::sim::{default_horizon, simulate, Policy};
use rtctimes_core::{DeadlineModel, ExecVector, Rational, TaskSet};

const NUMERATORS: [i64; 10] = [2, 3, 4, 5, 6, 8, 10, 12, 15, 20];

fn task_set(max_n: usize, model: DeadlineModel, dm: bool) -> impl Strategy<Value = TaskSet> {
    let max_k: i64 = if model == DeadlineModel::Constrained { 8 } else { 16 };
    prop::collection::vec((0..NUMERATORS.len(), 1..=3i64, 1..=max_k), 1..=max_n).prop_map(move |raw| {
        let mut params: Vec<(Rational, Rational)> = raw
            .into_iter()
            .map(|(p, q, k)| {
                let t = r(NUMERATORS[p], q);
                let d = &t * &r(k, 8);
                (t, d)
            })
            .collect();
        if dm {
            params.sort_by(|a, b| a.1.cmp(&b.1));
        }
        TaskSet::from_periods_deadlines(params, model).unwrap()
    })
}

/// Execution vector with entries `k / 16` of the matching period.
fn wcets(ts: &TaskSet, raw: &[i64]) -> ExecVector {
    ExecVector::new(
        ts.periods()
            .zip(raw.iter().cycle())
            .map(|(t, &k)| t * &r(k, 16))
            .collect(),
    )
    .unwrap()
}

fn weights(n: usize, raw: &[i64]) -> Vec<Rational> {
    raw.iter().cycle().take(n).map(|&w| ri(w)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn reduced_and_lehoczky_agree_on_dm_sets(
        ts in task_set(4, DeadlineModel::Constrained, true),
        raw in prop::collection::vec(0..=10i64, 4),
    ) {
        let c = wcets(&ts, &raw);
        let a = fp_schedulable(&ts, &c, PointSource::Lehoczky).unwrap().schedulable;
        let b = fp_schedulable(&ts, &c, PointSource::Reduced).unwrap().schedulable;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fp_schedulable_implies_edf_schedulable(
        ts in task_set(4, DeadlineModel::Constrained, false),
        raw in prop::collection::vec(0..=10i64, 4),
    ) {
        let c = wcets(&ts, &raw);
        if fp_schedulable(&ts, &c, PointSource::Lehoczky).unwrap().schedulable {
            prop_assert!(edf_schedulable(&ts, &c).unwrap().schedulable);
        }
    }

    #[test]
    fn schedulability_is_monotone_in_c(
        ts in task_set(3, DeadlineModel::Constrained, false),
        raw in prop::collection::vec(0..=10i64, 3),
        shrink in 0..3usize,
    ) {
        let c = wcets(&ts, &raw);
        let mut smaller = c.values().to_vec();
        let idx = shrink % smaller.len();
        smaller[idx] = &smaller[idx] * &r(1, 2);
        let smaller = ExecVector::new(smaller).unwrap();
        if fp_schedulable(&ts, &c, PointSource::Lehoczky).unwrap().schedulable {
            prop_assert!(fp_schedulable(&ts, &smaller, PointSource::Lehoczky).unwrap().schedulable);
        }
        if edf_schedulable(&ts, &c).unwrap().schedulable {
            prop_assert!(edf_schedulable(&ts, &smaller).unwrap().schedulable);
        }
    }

    #[test]
    fn dbf_steps_only_at_deadlines(
        ts in task_set(3, DeadlineModel::Arbitrary, false),
        raw in prop::collection::vec(1..=10i64, 3),
    ) {
        let c = wcets(&ts, &raw);
        let instants = deadline_set(&ts).instants;
        for pair in instants.windows(2) {
            let lo = dbf(&ts, &c, &pair[0]).unwrap();
            let mid = dbf(&ts, &c, &((&pair[0] + &pair[1]) / ri(2))).unwrap();
            let hi = dbf(&ts, &c, &pair[1]).unwrap();
            prop_assert_eq!(&lo, &mid);
            prop_assert!(hi > mid);
        }
    }

    #[test]
    fn edf_optimum_same_over_full_and_minimal_rows(
        ts in task_set(3, DeadlineModel::Arbitrary, false),
        raw in prop::collection::vec(-2..=5i64, 3),
    ) {
        let w = weights(ts.len(), &raw);
        let reduced = max_reward_edf(&ts, &w).unwrap();
        let full = lp_solve(&LpProblem::new(w.clone(), edf_rows(&ts)).unwrap());
        prop_assert_eq!(&reduced.optimum, &full.optimum);

        let argmax = reduced.argmax.unwrap();
        prop_assert!(edf_schedulable(&ts, &argmax).unwrap().schedulable);
        if w.iter().any(Rational::is_positive) {
            let eps = r(1, 1000);
            let nudged: Vec<Rational> = argmax
                .values()
                .iter()
                .zip(&w)
                .map(|(x, wi)| (x + &(wi * &eps)).max(Rational::zero()))
                .collect();
            let poly = Polytope::new(ts.len(), edf_rows(&ts)).unwrap();
            prop_assert!(!membership(&poly, &ExecVector::new(nudged).unwrap()).unwrap());
        }
    }

    #[test]
    fn fp_optimum_dominates_every_selection(
        ts in task_set(3, DeadlineModel::Constrained, true),
        raw in prop::collection::vec(-2..=5i64, 3),
    ) {
        let w = weights(ts.len(), &raw);
        let best = max_reward_fp(&ts, &w, PointSource::Reduced).unwrap();
        let optimum = best.outcome.optimum.clone().unwrap();
        let region = fp_region(&ts, PointSource::Reduced).unwrap();
        for sel in region.selections() {
            let rows = region.selection(&sel).into_rows();
            let o = lp_solve(&LpProblem::new(w.clone(), rows).unwrap());
            prop_assert!(o.optimum.unwrap() <= optimum);
        }
        let argmax = best.outcome.argmax.unwrap();
        prop_assert!(fp_schedulable(&ts, &argmax, PointSource::Lehoczky).unwrap().schedulable);
    }

    #[test]
    fn redundancy_elimination_is_idempotent_on_edf_rows(ts in task_set(3, DeadlineModel::Arbitrary, false)) {
        let once = eliminate_redundant(&edf_rows(&ts)).unwrap();
        let twice = eliminate_redundant(&once).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn no_miss_survives_an_extra_hyperperiod(
        ts in task_set(3, DeadlineModel::Constrained, false),
        raw in prop::collection::vec(0..=8i64, 3),
        edf in any::<bool>(),
    ) {
        let policy = if edf { Policy::Edf } else { Policy::Fp };
        let c = wcets(&ts, &raw);
        let base = default_horizon(&ts, policy);
        if simulate(&ts, &c, policy, &base).unwrap().schedulable() {
            let longer = base + hyperperiod(&ts);
            prop_assert!(simulate(&ts, &c, policy, &longer).unwrap().schedulable());
        }
    }

    #[test]
    fn simulated_schedule_is_consistent(
        ts in task_set(3, DeadlineModel::Arbitrary, false),
        raw in prop::collection::vec(0..=10i64, 3),
        edf in any::<bool>(),
    ) {
        let policy = if edf { Policy::Edf } else { Policy::Fp };
        let c = wcets(&ts, &raw);
        let trace = simulate(&ts, &c, policy, &default_horizon(&ts, policy)).unwrap();
        for pair in trace.segments.windows(2) {
            prop_assert!(pair[0].end <= pair[1].start);
        }
        for job in &trace.jobs {
            let executed: Rational = trace
                .segments
                .iter()
                .filter(|s| s.task == job.task && s.job == job.job)
                .map(|s| &s.end - &s.start)
                .sum();
            let wcet = &c[job.task - 1];
            match &job.completion {
                Some(_) => prop_assert_eq!(&executed, wcet),
                None => prop_assert!(&executed < wcet),
            }
            prop_assert_eq!(&job.deadline, &(&job.release + &ts.tasks()[job.task - 1].deadline));
        }
        // work conservation: every idle gap contains no unfinished released job
        let mut cursor = Rational::zero();
        for s in trace.segments.iter().chain(std::iter::once(&rtctimes_core::sim::Segment {
            start: trace.horizon.clone(),
            end: trace.horizon.clone(),
            task: 0,
            job: 0,
        })) {
            if s.start > cursor {
                let busy = trace.jobs.iter().any(|j| {
                    j.release <= cursor && j.completion.as_ref().is_none_or(|done| done > &cursor)
                });
                prop_assert!(!busy, "idle at {} with pending work", cursor);
            }
            cursor = s.end.clone();
        }
    }

    #[test]
    fn experiment_records_reproduce(id in 0..5000u64, seed in 0..4u64) {
        let config = ExperimentConfig {
            tasks: 2,
            period_lo: 2,
            period_hi: 50,
            deadline_rule: DeadlineRule::UniformOneToT,
            samples: 1,
            seed,
        };
        let record = evaluate_instance(&config, id).unwrap();
        let again = minimal_deadlines(&record.task_set()).unwrap();
        prop_assert_eq!(again.rows.len(), record.dmin_count);
        prop_assert!(record.dmin_count <= record.d_count);
    }

    #[test]
    fn task_set_json_round_trip(ts in task_set(4, DeadlineModel::Arbitrary, false)) {
        let back = TaskSet::from_json(&ts.to_json()).unwrap();
        prop_assert_eq!(back, ts);
    }
}
