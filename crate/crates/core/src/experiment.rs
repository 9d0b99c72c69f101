//! Random task sets versus the size of their minimal EDF deadline set.
//!
//! Each sample draws integer periods uniformly from `[lo, hi]` and integer
//! deadlines by [`DeadlineRule`], then records the hyperperiod, the size of
//! the full deadline set and the size of its irredundant subset.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::edf::{deadline_set, minimal_deadlines};
use crate::error::{Error, Result};
use crate::model::{hyperperiod, DeadlineModel, TaskSet};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeadlineRule {
    /// `D_i` uniform over the integers `1..=T_i`.
    UniformOneToT,
    /// `D_i = T_i`.
    EqualT,
}

impl std::str::FromStr for DeadlineRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform_1_to_T" | "uniform" => Ok(DeadlineRule::UniformOneToT),
            "equal_T" | "implicit" => Ok(DeadlineRule::EqualT),
            other => Err(format!("unknown deadline rule {other:?}")),
        }
    }
}

impl std::fmt::Display for DeadlineRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeadlineRule::UniformOneToT => "uniform_1_to_T",
            DeadlineRule::EqualT => "equal_T",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub tasks: usize,
    pub period_lo: u64,
    pub period_hi: u64,
    pub deadline_rule: DeadlineRule,
    pub samples: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tasks == 0 {
            return Err(Error::Config("at least one task is required".into()));
        }
        if self.period_lo < 2 {
            return Err(Error::Config(format!("period lower bound {} is below 2", self.period_lo)));
        }
        if self.period_lo > self.period_hi {
            return Err(Error::Config(format!(
                "empty period range [{}, {}]",
                self.period_lo, self.period_hi
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        Ok(())
    }

    /// Human-readable description of the random model.
    pub fn metadata(&self) -> String {
        let deadlines = match self.deadline_rule {
            DeadlineRule::UniformOneToT => "deadlines uniform integers in [1, T_i]",
            DeadlineRule::EqualT => "deadlines equal to periods",
        };
        format!(
            "tasks={}\nperiods=uniform integers in [{}, {}]\ndeadline_rule={} ({deadlines})\nsamples={}\nseed={}\nrng=ChaCha8, stream = instance id\nbuckets=floor(log2 H)\n",
            self.tasks, self.period_lo, self.period_hi, self.deadline_rule, self.samples, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentRecord {
    pub id: u64,
    pub periods: Vec<u64>,
    pub deadlines: Vec<u64>,
    pub hyperperiod: Rational,
    /// Positive instants plus the sentinel.
    pub d_count: usize,
    pub dmin_count: usize,
}

impl ExperimentRecord {
    pub fn task_set(&self) -> TaskSet {
        TaskSet::from_periods_deadlines(
            self.periods
                .iter()
                .zip(&self.deadlines)
                .map(|(&t, &d)| (Rational::from(t), Rational::from(d))),
            DeadlineModel::Constrained,
        )
        .expect("generated parameters are valid")
    }
}

/// Periods and deadlines of instance `id`; independent of every other id.
pub fn generate_instance(config: &ExperimentConfig, id: u64) -> (Vec<u64>, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(id);
    let periods: Vec<u64> = (0..config.tasks)
        .map(|_| rng.random_range(config.period_lo..=config.period_hi))
        .collect();
    let deadlines = periods
        .iter()
        .map(|&t| match config.deadline_rule {
            DeadlineRule::UniformOneToT => rng.random_range(1..=t),
            DeadlineRule::EqualT => t,
        })
        .collect();
    (periods, deadlines)
}

pub fn evaluate_instance(config: &ExperimentConfig, id: u64) -> Result<ExperimentRecord> {
    let (periods, deadlines) = generate_instance(config, id);
    let mut record = ExperimentRecord {
        id,
        periods,
        deadlines,
        hyperperiod: Rational::zero(),
        d_count: 0,
        dmin_count: 0,
    };
    let ts = record.task_set();
    record.hyperperiod = hyperperiod(&ts);
    record.d_count = deadline_set(&ts).instants.len();
    record.dmin_count = minimal_deadlines(&ts)?.rows.len();
    Ok(record)
}

/// All samples, evaluated in parallel and returned in id order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let mut records = (0..config.samples as u64)
        .into_par_iter()
        .map(|id| evaluate_instance(config, id))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| r.id);
    Ok(records)
}

fn join(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

/// `id,periods,deadlines,H,D_count,Dmin_count`; lists are `;`-separated.
pub fn records_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("id,periods,deadlines,H,D_count,Dmin_count\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.id,
            join(&r.periods),
            join(&r.deadlines),
            r.hyperperiod,
            r.d_count,
            r.dmin_count
        )
        .unwrap();
    }
    out
}

/// Maximum `|D_min|` among the records with `2^bucket <= H < 2^(bucket+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeBucket {
    pub bucket: u32,
    pub count: usize,
    pub max_dmin: usize,
    /// Lowest-id record attaining `max_dmin`.
    pub argmax_id: u64,
    pub argmax_h: Rational,
    pub argmax_d: usize,
    /// Largest `|D|` in the bucket.
    pub max_d: usize,
    /// Running maximum of `max_dmin` over this and all lower buckets.
    pub prefix_max_dmin: usize,
}

fn bucket_of(h: &Rational) -> u32 {
    let floor = h.floor();
    (floor.bits().max(1) - 1) as u32
}

/// Upper envelope over geometric buckets of ratio 2, ascending.
pub fn envelope(records: &[ExperimentRecord]) -> Vec<EnvelopeBucket> {
    let mut buckets: std::collections::BTreeMap<u32, EnvelopeBucket> = Default::default();
    for r in records {
        let b = bucket_of(&r.hyperperiod);
        let entry = buckets.entry(b).or_insert_with(|| EnvelopeBucket {
            bucket: b,
            count: 0,
            max_dmin: r.dmin_count,
            argmax_id: r.id,
            argmax_h: r.hyperperiod.clone(),
            argmax_d: r.d_count,
            max_d: 0,
            prefix_max_dmin: 0,
        });
        entry.count += 1;
        entry.max_d = entry.max_d.max(r.d_count);
        if r.dmin_count > entry.max_dmin || (r.dmin_count == entry.max_dmin && r.id < entry.argmax_id) {
            entry.max_dmin = r.dmin_count;
            entry.argmax_id = r.id;
            entry.argmax_h = r.hyperperiod.clone();
            entry.argmax_d = r.d_count;
        }
    }
    let mut running = 0;
    buckets
        .into_values()
        .map(|mut b| {
            running = running.max(b.max_dmin);
            b.prefix_max_dmin = running;
            b
        })
        .collect()
}

pub fn envelope_csv(buckets: &[EnvelopeBucket]) -> String {
    let mut out = String::from("bucket,H_lo,H_hi,count,max_Dmin,prefix_max_Dmin,argmax_id,argmax_H,argmax_D,max_D\n");
    for b in buckets {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            b.bucket,
            1u128 << b.bucket,
            1u128 << (b.bucket + 1),
            b.count,
            b.max_dmin,
            b.prefix_max_dmin,
            b.argmax_id,
            b.argmax_h,
            b.argmax_d,
            b.max_d
        )
        .unwrap();
    }
    out
}

/// Smallest `c` with `|D_min| <= c log2(H)` for every record with `H >= 2`.
pub fn fitted_log_coefficient(records: &[ExperimentRecord]) -> f64 {
    records
        .iter()
        .filter(|r| r.hyperperiod >= Rational::from(2))
        .map(|r| r.dmin_count as f64 / r.hyperperiod.to_f64().log2())
        .fold(0.0, f64::max)
}

/// `max_dmin / argmax_d` in the highest non-empty bucket.
pub fn top_bucket_ratio(buckets: &[EnvelopeBucket]) -> Option<f64> {
    buckets.last().map(|b| b.max_dmin as f64 / b.argmax_d as f64)
}
