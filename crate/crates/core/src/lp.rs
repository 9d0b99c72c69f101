//! Exact rational linear programming.
//!
//! A dense two-phase tableau simplex over [`Rational`] with Bland's rule.
//! Problems are `maximize w . C` subject to `rows` and `C >= 0`, which is
//! all the schedulability regions need.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::ExecVector;
use crate::rational::{dot, Rational};
use crate::region::{ConstraintRow, RowLabel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    objective: Vec<Rational>,
    rows: Vec<ConstraintRow>,
}

impl LpProblem {
    pub fn new(objective: Vec<Rational>, rows: Vec<ConstraintRow>) -> Result<Self> {
        if let Some(row) = rows.iter().find(|row| row.dim() != objective.len()) {
            return Err(Error::DimensionMismatch {
                expected: objective.len(),
                got: row.dim(),
            });
        }
        Ok(LpProblem { objective, rows })
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub optimum: Option<Rational>,
    pub argmax: Option<ExecVector>,
    /// Labels of the rows tight at `argmax`.
    pub binding_rows: Vec<RowLabel>,
}

impl LpOutcome {
    fn without_solution(status: LpStatus) -> Self {
        LpOutcome {
            status,
            optimum: None,
            argmax: None,
            binding_rows: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves `p` exactly. Deterministic for a fixed input.
pub fn lp_solve(p: &LpProblem) -> LpOutcome {
    let a: Vec<Vec<Rational>> = p.rows.iter().map(|row| row.coeffs.clone()).collect();
    let b: Vec<Rational> = p.rows.iter().map(|row| row.bound.clone()).collect();
    match Tableau::solve(&p.objective, a, b) {
        Solved::Optimal(x) => {
            let optimum = dot(&p.objective, &x);
            let binding_rows = p
                .rows
                .iter()
                .filter(|row| row.is_tight(&x))
                .map(|row| row.label.clone())
                .collect();
            LpOutcome {
                status: LpStatus::Optimal,
                optimum: Some(optimum),
                argmax: Some(ExecVector::new(x).expect("simplex solutions are non-negative")),
                binding_rows,
            }
        }
        Solved::Infeasible => LpOutcome::without_solution(LpStatus::Infeasible),
        Solved::Unbounded => LpOutcome::without_solution(LpStatus::Unbounded),
    }
}

enum Solved {
    Optimal(Vec<Rational>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced-cost row (for maximization: optimal when all entries >= 0).
    obj: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn solve(objective: &[Rational], a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Solved {
        let n = objective.len();
        let m = a.len();
        let artificial_rows: Vec<usize> = (0..m).filter(|&i| b[i].is_negative()).collect();
        let n_art = artificial_rows.len();
        // columns: originals | one slack/surplus per row | artificials | rhs
        let art_start = n + m;
        let width = n + m + n_art;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art_k = 0;
        for (i, (coeffs, rhs)) in a.into_iter().zip(b).enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            if rhs.is_negative() {
                for (j, c) in coeffs.into_iter().enumerate() {
                    row[j] = -c;
                }
                row[n + i] = -Rational::one();
                row[art_start + art_k] = Rational::one();
                row[width] = -rhs;
                basis.push(art_start + art_k);
                art_k += 1;
            } else {
                for (j, c) in coeffs.into_iter().enumerate() {
                    row[j] = c;
                }
                row[n + i] = Rational::one();
                row[width] = rhs;
                basis.push(n + i);
            }
            rows.push(row);
        }

        let mut t = Tableau {
            rows,
            obj: vec![Rational::zero(); width + 1],
            basis,
            width,
        };

        if n_art > 0 {
            // Phase 1: maximize -(sum of artificials).
            for j in art_start..width {
                t.obj[j] = Rational::one();
            }
            for &i in &artificial_rows {
                for j in 0..=width {
                    let v = t.rows[i][j].clone();
                    t.obj[j] -= &v;
                }
            }
            let done = t.run(width);
            debug_assert!(done, "phase 1 is bounded");
            if !t.obj[width].is_zero() {
                return Solved::Infeasible;
            }
            t.drive_out_artificials(art_start);
            // Drop artificial columns.
            for row in &mut t.rows {
                let rhs = row.pop().expect("rhs");
                row.truncate(art_start);
                row.push(rhs);
            }
            t.width = art_start;
        }

        // Phase 2.
        let width = t.width;
        t.obj = vec![Rational::zero(); width + 1];
        for (j, c) in objective.iter().enumerate() {
            t.obj[j] = -c;
        }
        for i in 0..t.rows.len() {
            let bv = t.basis[i];
            if bv < n && !objective[bv].is_zero() {
                let c = objective[bv].clone();
                for j in 0..=width {
                    if !t.rows[i][j].is_zero() {
                        let delta = &c * &t.rows[i][j];
                        t.obj[j] += delta;
                    }
                }
            }
        }
        if !t.run(width) {
            return Solved::Unbounded;
        }
        let mut x = vec![Rational::zero(); n];
        for (i, &bv) in t.basis.iter().enumerate() {
            if bv < n {
                x[bv] = t.rows[i][width].clone();
            }
        }
        Solved::Optimal(x)
    }

    /// Bland's rule iterations over columns `< limit`. Returns `false` when
    /// the objective is unbounded.
    fn run(&mut self, limit: usize) -> bool {
        loop {
            let Some(enter) = (0..limit).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let rhs = self.width;
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((pivot_row, _)) = leave else {
                return false;
            };
            self.pivot(pivot_row, enter);
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.width;
        let inv = self.rows[pr][pc].recip();
        for j in 0..=width {
            if !self.rows[pr][j].is_zero() {
                self.rows[pr][j] *= &inv;
            }
        }
        let pivot_row = self.rows[pr].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == pr || row[pc].is_zero() {
                continue;
            }
            let factor = row[pc].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).take(width + 1) {
                if !p.is_zero() {
                    *x -= &(&factor * p);
                }
            }
        }
        if !self.obj[pc].is_zero() {
            let factor = self.obj[pc].clone();
            for (x, p) in self.obj.iter_mut().zip(&pivot_row).take(width + 1) {
                if !p.is_zero() {
                    *x -= &(&factor * p);
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// After a feasible phase 1, pivots zero-level artificials out of the
    /// basis and drops rows that turn out to be linearly dependent.
    fn drive_out_artificials(&mut self, art_start: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= art_start {
                match (0..art_start).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

/// Removes every row implied by the others (within `C >= 0`), including
/// weakly redundant ones. Exact duplicates are collapsed first; the
/// survivor is the one with the smallest label, with `edf:t=0` ranked after
/// every positive instant.
///
/// A row `r_j` is dropped iff `max { r_j . C : retained rows k != j, C >= 0 }`
/// does not exceed its bound.
pub fn eliminate_redundant(rows: &[ConstraintRow]) -> Result<Vec<ConstraintRow>> {
    let candidates = collapse_duplicates(rows);
    let keep = if candidates
        .iter()
        .all(|row| row.bound.is_positive() && row.coeffs.iter().all(|c| !c.is_negative()))
    {
        eliminate_with_ray_shooting(&candidates)?
    } else {
        eliminate_sequential(&candidates)?
    };
    Ok(candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(row, k)| k.then_some(row))
        .collect())
}

fn duplicate_rank(label: &RowLabel) -> (bool, &RowLabel) {
    let sentinel = matches!(label, RowLabel::Edf { instant } if instant.is_zero());
    (sentinel, label)
}

/// Keeps one row per normalized half-space, in input order.
fn collapse_duplicates(rows: &[ConstraintRow]) -> Vec<ConstraintRow> {
    let mut best: BTreeMap<(Vec<Rational>, Rational), usize> = BTreeMap::new();
    for (k, row) in rows.iter().enumerate() {
        let key = row.normalized();
        match best.get(&key) {
            Some(&prev) if duplicate_rank(&rows[prev].label) <= duplicate_rank(&row.label) => {}
            _ => {
                best.insert(key, k);
            }
        }
    }
    let mut keep: Vec<usize> = best.into_values().collect();
    keep.sort_unstable();
    keep.into_iter().map(|k| rows[k].clone()).collect()
}

/// Maximum of `rows[j]` over the others still marked alive.
fn is_redundant(rows: &[ConstraintRow], alive: &[bool], j: usize) -> Result<bool> {
    let others: Vec<ConstraintRow> = rows
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j && alive[k])
        .map(|(_, row)| row.clone())
        .collect();
    let outcome = lp_solve(&LpProblem::new(rows[j].coeffs.clone(), others)?);
    Ok(match outcome.status {
        LpStatus::Optimal => outcome.optimum.expect("optimal") <= rows[j].bound,
        LpStatus::Unbounded => false,
        // The others alone are empty: every point satisfies r_j vacuously.
        LpStatus::Infeasible => true,
    })
}

fn eliminate_sequential(rows: &[ConstraintRow]) -> Result<Vec<bool>> {
    let mut alive = vec![true; rows.len()];
    for j in 0..rows.len() {
        if is_redundant(rows, &alive, j)? {
            alive[j] = false;
        }
    }
    Ok(alive)
}

/// Redundancy removal when the origin strictly satisfies every row
/// (positive bounds, non-negative coefficients).
///
/// Keeps a set of rows already proven irredundant and, for each candidate,
/// solves a small LP over that set only. If the candidate can exceed its
/// bound there, shooting a ray from the origin towards the maximizer hits a
/// row first; when that row is hit alone it is irredundant and joins the
/// set. Ties fall back to the full LP for the candidate.
fn eliminate_with_ray_shooting(rows: &[ConstraintRow]) -> Result<Vec<bool>> {
    let m = rows.len();
    // scale every row to bound 1
    let scaled: Vec<Vec<Rational>> = rows
        .iter()
        .map(|row| row.coeffs.iter().map(|c| c / &row.bound).collect())
        .collect();
    let two = Rational::from(2);

    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Undecided,
        Kept,
        Dropped,
    }
    let mut state = vec![State::Undecided; m];
    for j in 0..m {
        if scaled[j].iter().all(Rational::is_zero) {
            state[j] = State::Dropped;
        }
    }

    for j in 0..m {
        while state[j] == State::Undecided {
            let mut lp_rows: Vec<ConstraintRow> = (0..m)
                .filter(|&k| state[k] == State::Kept)
                .map(|k| ConstraintRow::named(scaled[k].clone(), Rational::one(), "kept"))
                .collect();
            lp_rows.push(ConstraintRow::named(scaled[j].clone(), two.clone(), "cap"));
            let outcome = lp_solve(&LpProblem::new(scaled[j].clone(), lp_rows)?);
            let optimum = outcome.optimum.expect("capped probe is bounded and feasible");
            if optimum <= Rational::one() {
                state[j] = State::Dropped;
                break;
            }
            let x = outcome.argmax.expect("optimal");
            let mut best: Option<Rational> = None;
            let mut hits: Vec<usize> = Vec::new();
            for k in 0..m {
                if state[k] == State::Dropped {
                    continue;
                }
                let v = dot(&scaled[k], x.values());
                match &best {
                    Some(b) if v < *b => {}
                    Some(b) if v == *b => hits.push(k),
                    _ => {
                        best = Some(v);
                        hits = vec![k];
                    }
                }
            }
            if let [k] = hits[..] {
                state[k] = State::Kept;
            } else {
                let alive: Vec<bool> = state.iter().map(|s| *s != State::Dropped).collect();
                state[j] = if is_redundant(rows, &alive, j)? {
                    State::Dropped
                } else {
                    State::Kept
                };
            }
        }
    }
    Ok(state.into_iter().map(|s| s == State::Kept).collect())
}

/// Reference implementation of [`eliminate_redundant`] without the ray
/// shooting shortcut: one full LP per row.
pub fn eliminate_redundant_naive(rows: &[ConstraintRow]) -> Result<Vec<ConstraintRow>> {
    let candidates = collapse_duplicates(rows);
    let keep = eliminate_sequential(&candidates)?;
    Ok(candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(row, k)| k.then_some(row))
        .collect())
}
