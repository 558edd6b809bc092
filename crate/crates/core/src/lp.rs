//! Exact two-phase simplex (Bland's rule) used for every feasibility predicate.
//!
//! Only two questions are ever asked of it: does a system of linear
//! (in)equalities have a rational solution, and, for systems with strict
//! rows, is the bounded slack `s <= 1` strictly positive at the optimum of
//! `max s` subject to `a.x - s >= b` on the strict rows.

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rational::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `a.x >= b`
    Ge,
    /// `a.x > b`
    Gt,
    /// `a.x <= b`
    Le,
    /// `a.x < b`
    Lt,
    /// `a.x = b`
    Eq,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Gt | Relation::Lt)
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

/// One row `coeffs . x  (relation)  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn ge(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Ge, rhs)
    }

    pub fn gt(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Gt, rhs)
    }

    pub fn le(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Le, rhs)
    }

    pub fn lt(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Lt, rhs)
    }

    pub fn eq(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Eq, rhs)
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs = dot(&self.coeffs, x);
        self.relation.holds(&lhs, &self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible(Point),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&Point> {
        match self {
            Feasibility::Feasible(p) => Some(p),
            Feasibility::Infeasible => None,
        }
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Decide whether the system has a rational solution over free variables.
///
/// Every returned witness is re-checked against all rows before it is
/// handed back.
pub fn lp_feasible(rows: &[Constraint]) -> Result<Feasibility> {
    let first = rows.first().ok_or(Error::EmptyInput("constraint system"))?;
    let k = first.coeffs.len();
    if let Some(bad) = rows.iter().find(|r| r.coeffs.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: bad.coeffs.len(),
        });
    }

    let strict = rows.iter().any(|r| r.relation.is_strict());
    let inequalities = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    // columns: x+ (k) | x- (k) | s (0 or 1) | surplus per inequality | u (s <= 1 slack)
    let s_col = 2 * k;
    let first_surplus = 2 * k + usize::from(strict);
    let ncols = first_surplus + inequalities + usize::from(strict);

    let mut a = Vec::with_capacity(rows.len() + 1);
    let mut b = Vec::with_capacity(rows.len() + 1);
    let mut surplus = first_surplus;
    for row in rows {
        let flip = matches!(row.relation, Relation::Le | Relation::Lt);
        let mut line = vec![Rational::zero(); ncols];
        for (j, c) in row.coeffs.iter().enumerate() {
            let c = if flip { -c } else { c.clone() };
            line[k + j] = -c.clone();
            line[j] = c;
        }
        if row.relation.is_strict() {
            line[s_col] = int(-1);
        }
        if row.relation != Relation::Eq {
            line[surplus] = int(-1);
            surplus += 1;
        }
        a.push(line);
        b.push(if flip { -row.rhs.clone() } else { row.rhs.clone() });
    }
    let objective = if strict {
        let mut line = vec![Rational::zero(); ncols];
        line[s_col] = int(1);
        line[ncols - 1] = int(1);
        a.push(line);
        b.push(int(1));
        let mut c = vec![Rational::zero(); ncols];
        c[s_col] = int(1);
        Some(c)
    } else {
        None
    };

    let y = match solve_standard(a, b, objective.as_deref())? {
        Standard::Infeasible | Standard::NonPositive => return Ok(Feasibility::Infeasible),
        Standard::Solution(y) => y,
    };
    let x: Vec<Rational> = (0..k).map(|j| &y[j] - &y[k + j]).collect();
    if let Some(bad) = rows.iter().position(|r| !r.is_satisfied_by(&x)) {
        return Err(Error::InternalInconsistency(format!(
            "simplex witness violates row {bad}"
        )));
    }
    Ok(Feasibility::Feasible(Point::new(x)))
}

/// Nonnegative solution of `a y = b`, if any.
pub(crate) fn feasible_nonneg(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Result<Option<Vec<Rational>>> {
    let check = (a.clone(), b.clone());
    match solve_standard(a, b, None)? {
        Standard::Solution(y) => {
            let ok = y.iter().all(|v| !v.is_negative())
                && check.0.iter().zip(&check.1).all(|(row, rhs)| &dot(row, &y) == rhs);
            if !ok {
                return Err(Error::InternalInconsistency(
                    "nonnegative simplex witness fails verification".into(),
                ));
            }
            Ok(Some(y))
        }
        _ => Ok(None),
    }
}

enum Standard {
    Infeasible,
    /// Feasible, but the maximized objective cannot be made positive.
    NonPositive,
    Solution(Vec<Rational>),
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs of the current (minimization) objective.
    cost: Vec<Rational>,
}

enum Step {
    Optimal,
    Pivoted,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, p: usize, col: usize) {
        let piv = self.rows[p][col].clone();
        for v in self.rows[p].iter_mut() {
            if !v.is_zero() {
                *v /= &piv;
            }
        }
        self.rhs[p] /= &piv;
        let prow = self.rows[p].clone();
        let prhs = self.rhs[p].clone();
        for i in 0..self.rows.len() {
            if i == p {
                continue;
            }
            let f = self.rows[i][col].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            if !prhs.is_zero() {
                self.rhs[i] -= &f * &prhs;
            }
        }
        let f = self.cost[col].clone();
        if !f.is_zero() {
            for (v, pv) in self.cost.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[p] = col;
    }

    /// One Bland step over columns `0..limit`.
    fn step(&mut self, limit: usize) -> Step {
        let Some(col) = (0..limit).find(|&j| self.cost[j].is_negative()) else {
            return Step::Optimal;
        };
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..self.rows.len() {
            let a = &self.rows[i][col];
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / a;
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        match best {
            None => Step::Unbounded,
            Some((p, _)) => {
                self.pivot(p, col);
                Step::Pivoted
            }
        }
    }

    fn solution(&self, n: usize) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); n];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < n {
                y[j] = self.rhs[i].clone();
            }
        }
        y
    }
}

/// `y >= 0, a y = b`; when `maximize` is given, look for a solution with
/// positive objective, stopping at the first basis that has one.
fn solve_standard(
    mut a: Vec<Vec<Rational>>,
    mut b: Vec<Rational>,
    maximize: Option<&[Rational]>,
) -> Result<Standard> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    for i in 0..m {
        if b[i].is_negative() {
            b[i] = -b[i].clone();
            for v in a[i].iter_mut() {
                *v = -v.clone();
            }
        }
    }
    // Phase 1: artificial column n + i for row i.
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, row) in a.into_iter().enumerate() {
        let mut line = row;
        line.resize(width, Rational::zero());
        line[n + i] = int(1);
        rows.push(line);
    }
    let mut cost = vec![Rational::zero(); width];
    for row in &rows {
        for j in 0..n {
            if !row[j].is_zero() {
                cost[j] -= &row[j];
            }
        }
    }
    let mut t = Tableau {
        rows,
        rhs: b,
        basis: (n..n + m).collect(),
        cost,
    };
    loop {
        match t.step(width) {
            Step::Optimal => break,
            Step::Pivoted => {}
            Step::Unbounded => {
                return Err(Error::InternalInconsistency(
                    "phase-1 objective unbounded".into(),
                ))
            }
        }
    }
    let infeasibility: Rational = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&j, _)| j >= n)
        .fold(Rational::zero(), |acc, (_, v)| acc + v);
    if infeasibility.is_positive() {
        return Ok(Standard::Infeasible);
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, col);
            } else {
                t.rows.remove(i);
                t.rhs.remove(i);
                t.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    for row in t.rows.iter_mut() {
        row.truncate(n);
    }

    let Some(c) = maximize else {
        return Ok(Standard::Solution(t.solution(n)));
    };

    // Phase 2: minimize -c.y, stop as soon as c.y > 0.
    let mut cost: Vec<Rational> = c.iter().map(|v| -v).collect();
    for (i, &bj) in t.basis.iter().enumerate() {
        let cb = -&c[bj];
        if cb.is_zero() {
            continue;
        }
        for j in 0..n {
            if !t.rows[i][j].is_zero() {
                cost[j] -= &cb * &t.rows[i][j];
            }
        }
    }
    t.cost = cost;
    loop {
        let y = t.solution(n);
        if dot(c, &y).is_positive() {
            return Ok(Standard::Solution(y));
        }
        match t.step(n) {
            Step::Optimal => return Ok(Standard::NonPositive),
            Step::Pivoted => {}
            // The objective is bounded in every system built here.
            Step::Unbounded => {
                return Err(Error::InternalInconsistency(
                    "phase-2 objective unbounded".into(),
                ))
            }
        }
    }
}
