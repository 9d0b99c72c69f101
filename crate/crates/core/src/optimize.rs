//! Linear reward maximization over the schedulable regions.

use crate::edf::minimal_deadlines;
use crate::error::{Error, Result};
use crate::fp::{fp_region, PointSource};
use crate::lp::{lp_solve, LpOutcome, LpProblem, LpStatus};
use crate::model::TaskSet;
use crate::rational::Rational;
use crate::region::{ConstraintRow, RowLabel};

/// Task count above which [`max_reward_fp`] may become slow.
pub const FP_ADVISORY_TASKS: usize = 8;

fn check_weights(ts: &TaskSet, w: &[Rational]) -> Result<()> {
    if w.len() != ts.len() {
        return Err(Error::DimensionMismatch {
            expected: ts.len(),
            got: w.len(),
        });
    }
    Ok(())
}

/// Maximizes `w . C` over the EDF region, using only the `D_min` rows.
pub fn max_reward_edf(ts: &TaskSet, w: &[Rational]) -> Result<LpOutcome> {
    check_weights(ts, w)?;
    let rows = minimal_deadlines(ts)?.rows;
    Ok(lp_solve(&LpProblem::new(w.to_vec(), rows)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpOptimum {
    pub outcome: LpOutcome,
    /// The schedulability point chosen for each task, in task order.
    pub selection: Vec<Rational>,
}

/// Maximizes `w . C` over the FP region.
///
/// Selections (one workload row per task) are explored depth-first in
/// lexicographic point order. A prefix is abandoned once the LP over its
/// rows alone cannot beat the incumbent; such a relaxation is bounded only
/// when no later task has positive weight.
pub fn max_reward_fp(ts: &TaskSet, w: &[Rational], source: PointSource) -> Result<FpOptimum> {
    check_weights(ts, w)?;
    let region = fp_region(ts, source)?;
    let groups = region.groups();
    // bounded_from[d]: a prefix of d groups gives a bounded relaxation
    let mut bounded_from = vec![true; groups.len() + 1];
    for d in (0..groups.len()).rev() {
        bounded_from[d] = bounded_from[d + 1] && !w[d].is_positive();
    }
    let mut search = Search {
        w,
        groups,
        bounded_from,
        chosen: Vec::with_capacity(groups.len()),
        best: None,
    };
    search.descend()?;
    let (outcome, picks) = search.best.expect("C = 0 is feasible for every selection");
    let selection = picks
        .iter()
        .map(|row| match &row.label {
            RowLabel::Fp { point, .. } => point.clone(),
            other => unreachable!("FP rows carry FP labels, got {other}"),
        })
        .collect();
    Ok(FpOptimum { outcome, selection })
}

struct Search<'a> {
    w: &'a [Rational],
    groups: &'a [Vec<ConstraintRow>],
    bounded_from: Vec<bool>,
    chosen: Vec<ConstraintRow>,
    best: Option<(LpOutcome, Vec<ConstraintRow>)>,
}

impl Search<'_> {
    fn incumbent(&self) -> Option<&Rational> {
        self.best.as_ref().and_then(|(o, _)| o.optimum.as_ref())
    }

    fn solve(&self) -> Result<LpOutcome> {
        Ok(lp_solve(&LpProblem::new(self.w.to_vec(), self.chosen.clone())?))
    }

    fn descend(&mut self) -> Result<()> {
        let depth = self.chosen.len();
        if depth == self.groups.len() {
            let outcome = self.solve()?;
            debug_assert_eq!(outcome.status, LpStatus::Optimal);
            let improves = match (self.incumbent(), &outcome.optimum) {
                (None, _) => true,
                (Some(best), Some(value)) => value > best,
                (Some(_), None) => false,
            };
            if improves {
                self.best = Some((outcome, self.chosen.clone()));
            }
            return Ok(());
        }
        if depth > 0 && self.bounded_from[depth] && self.incumbent().is_some() {
            let relaxed = self.solve()?;
            if let (Some(bound), Some(best)) = (&relaxed.optimum, self.incumbent()) {
                if bound <= best {
                    return Ok(());
                }
            }
        }
        for row in &self.groups[depth] {
            self.chosen.push(row.clone());
            self.descend()?;
            self.chosen.pop();
        }
        Ok(())
    }
}
