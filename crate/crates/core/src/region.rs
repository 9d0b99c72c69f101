//! Schedulable execution-time regions.
//!
//! EDF regions are convex polytopes (a conjunction of rows); FP regions are
//! conjunctions over tasks of disjunctions over schedulability points. Both
//! live in the non-negative orthant `C >= 0`.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LpProblem, LpStatus};
use crate::model::ExecVector;
use crate::rational::{dot, Rational};

/// Where a constraint row came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowLabel {
    /// FP workload row of `task` (1-based) at point `point`, optionally for
    /// job `job` in the arbitrary-deadline form.
    Fp {
        task: usize,
        point: Rational,
        job: Option<u64>,
    },
    /// EDF demand row at absolute instant `instant` (0 is the utilization row).
    Edf { instant: Rational },
    Named(String),
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::Fp { task, point, job: None } => write!(f, "fp:task={task}:t={point}"),
            RowLabel::Fp {
                task,
                point,
                job: Some(j),
            } => write!(f, "fp:task={task}:j={j}:t={point}"),
            RowLabel::Edf { instant } => write!(f, "edf:t={instant}"),
            RowLabel::Named(name) => f.write_str(name),
        }
    }
}

/// Half-space `coeffs . C <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintRow {
    pub coeffs: Vec<Rational>,
    pub bound: Rational,
    pub label: RowLabel,
}

impl ConstraintRow {
    pub fn new(coeffs: Vec<Rational>, bound: Rational, label: RowLabel) -> Self {
        ConstraintRow { coeffs, bound, label }
    }

    pub fn named(coeffs: Vec<Rational>, bound: Rational, name: &str) -> Self {
        ConstraintRow::new(coeffs, bound, RowLabel::Named(name.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn lhs(&self, c: &[Rational]) -> Rational {
        dot(&self.coeffs, c)
    }

    pub fn is_satisfied(&self, c: &[Rational]) -> bool {
        self.lhs(c) <= self.bound
    }

    pub fn is_tight(&self, c: &[Rational]) -> bool {
        self.lhs(c) == self.bound
    }

    /// Same half-space scaled so that the bound is `1`, `-1` or `0`.
    pub(crate) fn normalized(&self) -> (Vec<Rational>, Rational) {
        let scale = if !self.bound.is_zero() {
            self.bound.abs()
        } else {
            match self.coeffs.iter().find(|c| !c.is_zero()) {
                Some(c) => c.abs(),
                None => return (self.coeffs.clone(), self.bound.clone()),
            }
        };
        (
            self.coeffs.iter().map(|c| c / &scale).collect(),
            &self.bound / &scale,
        )
    }
}

/// Common interface of the two region shapes.
pub trait Region {
    fn dim(&self) -> usize;

    /// Exact membership; the caller guarantees matching dimension.
    fn contains_unchecked(&self, c: &[Rational]) -> bool;
}

/// Exact membership test.
pub fn membership<R: Region + ?Sized>(region: &R, c: &ExecVector) -> Result<bool> {
    if c.len() != region.dim() {
        return Err(Error::DimensionMismatch {
            expected: region.dim(),
            got: c.len(),
        });
    }
    Ok(region.contains_unchecked(c.values()))
}

/// Conjunction of rows over `C >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    rows: Vec<ConstraintRow>,
}

impl Polytope {
    pub fn new(dim: usize, rows: Vec<ConstraintRow>) -> Result<Self> {
        check_rows(dim, &rows)?;
        Ok(Polytope { dim, rows })
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<ConstraintRow> {
        self.rows
    }
}

impl Region for Polytope {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains_unchecked(&self, c: &[Rational]) -> bool {
        c.iter().all(|x| !x.is_negative()) && self.rows.iter().all(|row| row.is_satisfied(c))
    }
}

/// Conjunction over groups of disjunctions over rows, within `C >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AndOrRegion {
    dim: usize,
    groups: Vec<Vec<ConstraintRow>>,
}

impl AndOrRegion {
    pub fn new(dim: usize, groups: Vec<Vec<ConstraintRow>>) -> Result<Self> {
        for group in &groups {
            if group.is_empty() {
                return Err(Error::InfeasibleRegion);
            }
            check_rows(dim, group)?;
        }
        Ok(AndOrRegion { dim, groups })
    }

    pub fn groups(&self) -> &[Vec<ConstraintRow>] {
        &self.groups
    }

    pub fn rows(&self) -> impl Iterator<Item = &ConstraintRow> {
        self.groups.iter().flatten()
    }

    /// Number of distinct selections (one row per group).
    pub fn selection_count(&self) -> usize {
        self.groups.iter().map(Vec::len).product()
    }

    /// The polytope obtained by picking `selection[g]` from group `g`.
    pub fn selection(&self, selection: &[usize]) -> Polytope {
        let rows = self
            .groups
            .iter()
            .zip(selection)
            .map(|(group, &k)| group[k].clone())
            .collect();
        Polytope {
            dim: self.dim,
            rows,
        }
    }

    /// All selections in lexicographic order.
    pub fn selections(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let sizes: Vec<usize> = self.groups.iter().map(Vec::len).collect();
        let total = self.selection_count();
        (0..total).map(move |mut code| {
            let mut sel = vec![0; sizes.len()];
            for g in (0..sizes.len()).rev() {
                sel[g] = code % sizes[g];
                code /= sizes[g];
            }
            sel
        })
    }
}

impl Region for AndOrRegion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains_unchecked(&self, c: &[Rational]) -> bool {
        c.iter().all(|x| !x.is_negative())
            && self
                .groups
                .iter()
                .all(|group| group.iter().any(|row| row.is_satisfied(c)))
    }
}

fn check_rows(dim: usize, rows: &[ConstraintRow]) -> Result<()> {
    match rows.iter().find(|row| row.dim() != dim) {
        Some(row) => Err(Error::DimensionMismatch {
            expected: dim,
            got: row.dim(),
        }),
        None => Ok(()),
    }
}

const MAX_VERTEX_DIM: usize = 3;

/// One hyperplane of the arrangement: a row boundary or the axis `C_k = 0`.
#[derive(Clone)]
struct Plane {
    coeffs: Vec<Rational>,
    rhs: Rational,
}

fn axis_planes(dim: usize) -> impl Iterator<Item = Plane> {
    (0..dim).map(move |k| {
        let mut coeffs = vec![Rational::zero(); dim];
        coeffs[k] = Rational::one();
        Plane {
            coeffs,
            rhs: Rational::zero(),
        }
    })
}

/// Intersection points of every `dim`-subset of `planes`.
fn arrangement_points(dim: usize, planes: &[Plane]) -> BTreeSet<Vec<Rational>> {
    let mut out = BTreeSet::new();
    for subset in combinations(planes.len(), dim) {
        let a = subset.iter().map(|&k| planes[k].coeffs.clone()).collect();
        let b = subset.iter().map(|&k| planes[k].rhs.clone()).collect();
        if let Some(x) = linalg::solve(a, b) {
            out.insert(x);
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

fn check_vertex_dim(dim: usize) -> Result<()> {
    if dim > MAX_VERTEX_DIM {
        return Err(Error::DimensionTooLarge(dim));
    }
    Ok(())
}

fn distinct_planes<'a>(dim: usize, rows: impl Iterator<Item = &'a ConstraintRow>) -> Vec<Plane> {
    let mut seen = BTreeSet::new();
    let mut planes = Vec::new();
    for row in rows {
        let (coeffs, rhs) = row.normalized();
        if coeffs.iter().all(Rational::is_zero) {
            continue;
        }
        if seen.insert((coeffs.clone(), rhs.clone())) {
            planes.push(Plane { coeffs, rhs });
        }
    }
    planes.extend(axis_planes(dim));
    planes
}

/// Vertex set of a bounded polytope (`n <= 3`), sorted.
pub fn vertices(region: &Polytope) -> Result<Vec<ExecVector>> {
    check_vertex_dim(region.dim)?;
    for k in 0..region.dim {
        if !region.rows.iter().any(|row| row.coeffs[k].is_positive()) {
            return Err(Error::UnboundedRegion { coord: k + 1 });
        }
    }
    let planes = distinct_planes(region.dim, region.rows.iter());
    let points: Vec<ExecVector> = arrangement_points(region.dim, &planes)
        .into_iter()
        .filter(|x| region.contains_unchecked(x))
        .map(ExecVector::new)
        .collect::<Result<_>>()?;
    if points.is_empty() {
        return Err(Error::InfeasibleRegion);
    }
    Ok(points)
}

/// Rows that are tight at one of `points`.
pub fn touching_rows<'a>(rows: &'a [ConstraintRow], points: &[ExecVector]) -> Vec<&'a ConstraintRow> {
    rows.iter()
        .filter(|row| points.iter().any(|p| row.is_tight(p.values())))
        .collect()
}

/// Corner set of a (generally non-convex) and/or region (`n <= 3`), sorted.
///
/// Candidates are the intersection points of every `n` hyperplanes drawn
/// from all rows and the coordinate axes. A member candidate is a corner
/// when the region's local cone at it is not invariant under translation
/// along any line, which also admits reflex corners that are not vertices
/// of any single selection polytope.
pub fn andor_vertices(region: &AndOrRegion) -> Result<Vec<ExecVector>> {
    check_vertex_dim(region.dim)?;
    for k in 0..region.dim {
        let bounded = region.groups.iter().any(|group| {
            group
                .iter()
                .all(|row| row.coeffs[k].is_positive() && row.coeffs.iter().all(|c| !c.is_negative()))
        });
        if !bounded {
            return Err(Error::UnboundedRegion { coord: k + 1 });
        }
    }
    let planes = distinct_planes(region.dim, region.rows());
    let mut out = Vec::new();
    let mut any_member = false;
    for x in arrangement_points(region.dim, &planes) {
        if !region.contains_unchecked(&x) {
            continue;
        }
        any_member = true;
        if is_corner(region, &x)? {
            out.push(ExecVector::new(x)?);
        }
    }
    if !any_member {
        return Err(Error::InfeasibleRegion);
    }
    Ok(out)
}

/// Local-cone corner test at a member point `x`.
fn is_corner(region: &AndOrRegion, x: &[Rational]) -> Result<bool> {
    let dim = region.dim;
    // Normals of the constraints active in every piece: tight axes.
    let mut common: Vec<Vec<Rational>> = Vec::new();
    for (k, xk) in x.iter().enumerate() {
        if xk.is_zero() {
            let mut normal = vec![Rational::zero(); dim];
            normal[k] = -Rational::one();
            common.push(normal);
        }
    }
    // Per group: tight rows, or nothing when some row holds strictly.
    let mut choices: Vec<Vec<Vec<Rational>>> = Vec::new();
    for group in &region.groups {
        if group.iter().any(|row| row.lhs(x) < row.bound) {
            continue;
        }
        let mut tight: Vec<Vec<Rational>> = group
            .iter()
            .filter(|row| row.is_tight(x))
            .map(|row| row.coeffs.clone())
            .collect();
        tight.sort();
        tight.dedup();
        choices.push(tight);
    }

    let mut pieces: Vec<Vec<Vec<Rational>>> = vec![common];
    for options in &choices {
        let mut next = Vec::with_capacity(pieces.len() * options.len());
        for piece in &pieces {
            for normal in options {
                let mut p = piece.clone();
                if !p.contains(normal) {
                    p.push(normal.clone());
                }
                next.push(p);
            }
        }
        pieces = next;
    }
    for piece in &mut pieces {
        piece.sort();
    }
    pieces.sort();
    pieces.dedup();

    // Pieces contained in another piece do not change the union.
    let mut maximal: Vec<&Vec<Vec<Rational>>> = Vec::new();
    for (i, piece) in pieces.iter().enumerate() {
        let mut dominated = false;
        for (j, other) in pieces.iter().enumerate() {
            if i != j && cone_contains(dim, other, piece)? {
                // Ties between equal cones keep the first.
                if !(cone_contains(dim, piece, other)? && i < j) {
                    dominated = true;
                    break;
                }
            }
        }
        if !dominated {
            maximal.push(piece);
        }
    }

    let stacked: Vec<Vec<Rational>> = maximal.into_iter().flatten().cloned().collect();
    Ok(linalg::rank(stacked) == dim)
}

/// Whether `{d : outer . d <= 0}` contains `{d : inner . d <= 0}`.
fn cone_contains(dim: usize, outer: &[Vec<Rational>], inner: &[Vec<Rational>]) -> Result<bool> {
    // d = p - m with p, m in [0, 1]^dim.
    let split = |a: &[Rational]| -> Vec<Rational> { a.iter().cloned().chain(a.iter().map(|v| -v)).collect() };
    let mut rows: Vec<ConstraintRow> = inner
        .iter()
        .map(|a| ConstraintRow::named(split(a), Rational::zero(), "inner"))
        .collect();
    for k in 0..2 * dim {
        let mut e = vec![Rational::zero(); 2 * dim];
        e[k] = Rational::one();
        rows.push(ConstraintRow::named(e, Rational::one(), "box"));
    }
    for a in outer {
        let outcome = lp::lp_solve(&LpProblem::new(split(a), rows.clone())?);
        match outcome.status {
            LpStatus::Optimal => {
                if outcome.optimum.expect("optimal has value").is_positive() {
                    return Ok(false);
                }
            }
            _ => unreachable!("bounded feasible cone probe"),
        }
    }
    Ok(true)
}

/// CSV dump: `label,c1,...,cn,bound`, rationals as `p/q`.
pub fn rows_to_csv<'a>(dim: usize, rows: impl IntoIterator<Item = &'a ConstraintRow>) -> String {
    let mut out = String::from("label");
    for k in 1..=dim {
        let _ = write!(out, ",c{k}");
    }
    out.push_str(",bound\n");
    for row in rows {
        let _ = write!(out, "{}", row.label);
        for c in &row.coeffs {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(out, ",{}", row.bound);
    }
    out
}

pub fn polytope_csv(region: &Polytope) -> String {
    rows_to_csv(region.dim, &region.rows)
}

pub fn andor_csv(region: &AndOrRegion) -> String {
    rows_to_csv(region.dim, region.rows())
}

pub fn polytope_svg(region: &Polytope) -> Result<String> {
    if region.dim != 2 {
        return Err(Error::SvgDimension(region.dim));
    }
    Ok(polygon_svg(&vertices(region)?))
}

pub fn andor_svg(region: &AndOrRegion) -> Result<String> {
    if region.dim != 2 {
        return Err(Error::SvgDimension(region.dim));
    }
    Ok(polygon_svg(&andor_vertices(region)?))
}

/// Orders 2-D corners around the boundary: around the origin when it is a
/// corner (regions here are star-shaped from it), else around the centroid.
pub fn boundary_order(corners: &[ExecVector]) -> Vec<ExecVector> {
    let pts: Vec<(f64, f64)> = corners
        .iter()
        .map(|v| (v[0].to_f64(), v[1].to_f64()))
        .collect();
    let origin_idx = corners.iter().position(|v| v.values().iter().all(Rational::is_zero));
    let (cx, cy) = match origin_idx {
        Some(_) => (0.0, 0.0),
        None => {
            let n = pts.len().max(1) as f64;
            (
                pts.iter().map(|p| p.0).sum::<f64>() / n,
                pts.iter().map(|p| p.1).sum::<f64>() / n,
            )
        }
    };
    let mut idx: Vec<usize> = (0..corners.len()).filter(|&k| Some(k) != origin_idx).collect();
    idx.sort_by(|&a, &b| {
        // screen axes: x = C_2, y = C_1
        let ta = (pts[a].0 - cx).atan2(pts[a].1 - cy);
        let tb = (pts[b].0 - cx).atan2(pts[b].1 - cy);
        ta.total_cmp(&tb)
    });
    origin_idx
        .into_iter()
        .chain(idx)
        .map(|k| corners[k].clone())
        .collect()
}

const SVG_SIZE: f64 = 400.0;
const SVG_MARGIN: f64 = 40.0;

/// Plain SVG document: `C_2` on the horizontal axis, `C_1` vertical.
pub fn polygon_svg(corners: &[ExecVector]) -> String {
    let ordered = boundary_order(corners);
    let extent = ordered
        .iter()
        .flat_map(|v| [v[0].to_f64(), v[1].to_f64()])
        .fold(1.0f64, f64::max);
    let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / extent;
    let to_screen = |c1: f64, c2: f64| (SVG_MARGIN + c2 * scale, SVG_SIZE - SVG_MARGIN - c1 * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        SVG_SIZE
    );
    let points: Vec<String> = ordered
        .iter()
        .map(|v| {
            let (x, y) = to_screen(v[0].to_f64(), v[1].to_f64());
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"  <polygon points="{}" fill="cyan" stroke="black" stroke-width="2"/>"#,
        points.join(" ")
    );
    let (ox, oy) = to_screen(0.0, 0.0);
    let _ = writeln!(
        out,
        r#"  <line x1="{ox}" y1="{oy}" x2="{}" y2="{oy}" stroke="black"/>"#,
        SVG_SIZE - SVG_MARGIN / 2.0
    );
    let _ = writeln!(
        out,
        r#"  <line x1="{ox}" y1="{oy}" x2="{ox}" y2="{}" stroke="black"/>"#,
        SVG_MARGIN / 2.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="{}" y="{}" font-size="14">C_2</text>"#,
        SVG_SIZE - SVG_MARGIN / 2.0 - 10.0,
        oy + 20.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="{}" y="{}" font-size="14">C_1</text>"#,
        ox - 30.0,
        SVG_MARGIN / 2.0 + 5.0
    );
    for v in &ordered {
        let (x, y) = to_screen(v[0].to_f64(), v[1].to_f64());
        let _ = writeln!(
            out,
            r#"  <circle cx="{x:.3}" cy="{y:.3}" r="3"><title>C_1={} C_2={}</title></circle>"#,
            v[0], v[1]
        );
    }
    out.push_str("</svg>\n");
    out
}
