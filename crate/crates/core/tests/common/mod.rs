//! Random instances shared by the integration suites.

#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rtctimes_core::edf::{deadline_set, h_vector};
use rtctimes_core::fp::{k_vector, lehoczky_points};
use rtctimes_core::rational::{dot, r};
use rtctimes_core::{DeadlineModel, ExecVector, Rational, TaskSet};

/// Period numerators; with denominators up to 3 every hyperperiod divides 120.
const NUMERATORS: [i64; 10] = [2, 3, 4, 5, 6, 8, 10, 12, 15, 20];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_period(rng: &mut impl Rng) -> Rational {
    r(*NUMERATORS.choose(rng).unwrap(), rng.random_range(1..=3))
}

/// Random task set with `n` tasks; deadlines are `T k / 8` with `k <= 8`
/// (constrained) or `k <= 16` (arbitrary). `dm` sorts tasks by deadline.
pub fn random_task_set(rng: &mut impl Rng, n: usize, model: DeadlineModel, dm: bool) -> TaskSet {
    let max_k = match model {
        DeadlineModel::Constrained => 8,
        DeadlineModel::Arbitrary => 16,
    };
    let mut params: Vec<(Rational, Rational)> = (0..n)
        .map(|_| {
            let t = random_period(rng);
            let d = &t * &r(rng.random_range(1..=max_k), 8);
            (t, d)
        })
        .collect();
    if dm {
        params.sort_by(|a, b| a.1.cmp(&b.1));
    }
    TaskSet::from_periods_deadlines(params, model).unwrap()
}

/// Non-zero direction with entries `k / 8`, `0 <= k <= 8`.
pub fn random_direction(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    loop {
        let u: Vec<Rational> = (0..n).map(|_| r(rng.random_range(0..=8), 8)).collect();
        if u.iter().any(Rational::is_positive) {
            return u;
        }
    }
}

pub fn scaled(u: &[Rational], s: &Rational) -> ExecVector {
    ExecVector::new(u.iter().map(|x| x * s).collect()).unwrap()
}

/// Largest `s` with `s u` EDF-schedulable, straight from the row definition.
pub fn edf_boundary(ts: &TaskSet, u: &[Rational]) -> Rational {
    deadline_set(ts)
        .instants
        .iter()
        .filter_map(|t| {
            let load = dot(&h_vector(ts, t).coeffs, u);
            load.is_positive().then(|| load.recip())
        })
        .min()
        .expect("utilization row is positive along a non-zero direction")
}

/// Largest `s` with `s u` FP-schedulable (constrained deadlines), from the
/// Lehoczky points; `None` if every multiple is schedulable.
pub fn fp_boundary(ts: &TaskSet, u: &[Rational]) -> Option<Rational> {
    (1..=ts.len())
        .filter_map(|i| {
            let points = lehoczky_points(ts, i).unwrap();
            let mut best: Option<Rational> = None;
            for t in points.positive() {
                let load = dot(&k_vector(ts, i, t, None).unwrap().coeffs, u);
                if load.is_zero() {
                    return None;
                }
                let s = t / &load;
                if best.as_ref().is_none_or(|b| &s > b) {
                    best = Some(s);
                }
            }
            best
        })
        .min()
}

/// Scale factors placing probes inside, on and outside a boundary.
pub fn boundary_factors() -> Vec<Rational> {
    vec![r(1, 2), r(99, 100), r(1, 1), r(101, 100), r(2, 1)]
}
