//! Points, half-spaces and the exact convexity predicates built on [`crate::lp`].

mod arrangement;

pub use arrangement::{enumerate_combinatorial_halfspaces, realizable_signatures, Signature};

use std::ops::Deref;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{dot, feasible_nonneg, lp_feasible, Constraint, Feasibility, Relation};
use crate::rational::{int, Rational};

/// A point of `Q^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(#[serde(with = "crate::rational::vec_as_strings")] Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Point(vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl Deref for Point {
    type Target = [Rational];
    fn deref(&self) -> &[Rational] {
        &self.0
    }
}

impl From<Vec<Rational>> for Point {
    fn from(v: Vec<Rational>) -> Self {
        Point(v)
    }
}

/// `<normal, x> > offset` when open, `>= offset` when closed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawHalfSpace", into = "RawHalfSpace")]
pub struct HalfSpace {
    normal: Vec<Rational>,
    offset: Rational,
    open: bool,
}

#[derive(Serialize, Deserialize)]
struct RawHalfSpace {
    #[serde(with = "crate::rational::vec_as_strings")]
    normal: Vec<Rational>,
    #[serde(with = "crate::rational::as_string")]
    offset: Rational,
    open: bool,
}

impl TryFrom<RawHalfSpace> for HalfSpace {
    type Error = Error;
    fn try_from(raw: RawHalfSpace) -> Result<Self> {
        HalfSpace::new(raw.normal, raw.offset, raw.open)
    }
}

impl From<HalfSpace> for RawHalfSpace {
    fn from(h: HalfSpace) -> Self {
        RawHalfSpace {
            normal: h.normal,
            offset: h.offset,
            open: h.open,
        }
    }
}

impl HalfSpace {
    pub fn new(normal: Vec<Rational>, offset: Rational, open: bool) -> Result<Self> {
        if normal.iter().all(Zero::is_zero) {
            return Err(Error::ZeroNormal);
        }
        Ok(Self {
            normal,
            offset,
            open,
        })
    }

    pub fn open(normal: Vec<Rational>, offset: Rational) -> Result<Self> {
        Self::new(normal, offset, true)
    }

    pub fn closed(normal: Vec<Rational>, offset: Rational) -> Result<Self> {
        Self::new(normal, offset, false)
    }

    pub fn normal(&self) -> &[Rational] {
        &self.normal
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `<normal, x> - offset`.
    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x) - &self.offset
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        let v = self.evaluate(x);
        if self.open {
            v.is_positive()
        } else {
            !v.is_negative()
        }
    }

    pub fn closure(&self) -> Self {
        Self {
            open: false,
            ..self.clone()
        }
    }

    pub fn interior(&self) -> Self {
        Self {
            open: true,
            ..self.clone()
        }
    }

    /// Set-theoretic complement: open becomes closed and vice versa.
    pub fn complement(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|c| -c).collect(),
            offset: -&self.offset,
            open: !self.open,
        }
    }

    fn as_constraint(&self, force_strict: Option<bool>) -> Constraint {
        let strict = force_strict.unwrap_or(self.open);
        let rel = if strict { Relation::Gt } else { Relation::Ge };
        Constraint::new(self.normal.clone(), rel, self.offset.clone())
    }
}

/// An ordered family `H_1, .., H_r` sharing one ambient dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<HalfSpace>", into = "Vec<HalfSpace>")]
pub struct HalfSpaceFamily {
    halfspaces: Vec<HalfSpace>,
}

impl TryFrom<Vec<HalfSpace>> for HalfSpaceFamily {
    type Error = Error;
    fn try_from(v: Vec<HalfSpace>) -> Result<Self> {
        HalfSpaceFamily::new(v)
    }
}

impl From<HalfSpaceFamily> for Vec<HalfSpace> {
    fn from(f: HalfSpaceFamily) -> Self {
        f.halfspaces
    }
}

impl HalfSpaceFamily {
    pub fn new(halfspaces: Vec<HalfSpace>) -> Result<Self> {
        let first = halfspaces.first().ok_or(Error::EmptyInput("half-space family"))?;
        let d = first.dim();
        if let Some(h) = halfspaces.iter().find(|h| h.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: h.dim(),
            });
        }
        Ok(Self { halfspaces })
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.halfspaces[0].dim()
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn iter(&self) -> std::slice::Iter<'_, HalfSpace> {
        self.halfspaces.iter()
    }

    pub fn get(&self, i: usize) -> Option<&HalfSpace> {
        self.halfspaces.get(i)
    }

    pub fn complements(&self) -> Self {
        Self {
            halfspaces: self.halfspaces.iter().map(HalfSpace::complement).collect(),
        }
    }

    pub fn closures(&self) -> Self {
        Self {
            halfspaces: self.halfspaces.iter().map(HalfSpace::closure).collect(),
        }
    }

    pub fn subfamily(&self, indices: &[usize]) -> Self {
        Self {
            halfspaces: indices.iter().map(|&i| self.halfspaces[i].clone()).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a HalfSpaceFamily {
    type Item = &'a HalfSpace;
    type IntoIter = std::slice::Iter<'a, HalfSpace>;
    fn into_iter(self) -> Self::IntoIter {
        self.halfspaces.iter()
    }
}

pub(crate) fn check_dims<'a>(points: impl IntoIterator<Item = &'a Point>) -> Result<Option<usize>> {
    let mut dim = None;
    for p in points {
        match dim {
            None => dim = Some(p.dim()),
            Some(d) if d != p.dim() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                })
            }
            _ => {}
        }
    }
    Ok(dim)
}

/// Is `0` in the convex hull of `points`?
pub fn captures_origin(points: &[Point]) -> Result<bool> {
    let d = check_dims(points)?.ok_or(Error::EmptyInput("point list"))?;
    // lambda >= 0, sum lambda = 1, sum lambda p = 0
    let mut a = vec![vec![Rational::zero(); points.len()]; d + 1];
    for (j, p) in points.iter().enumerate() {
        for k in 0..d {
            a[k][j] = p[k].clone();
        }
        a[d][j] = int(1);
    }
    let mut b = vec![Rational::zero(); d + 1];
    b[d] = int(1);
    Ok(feasible_nonneg(a, b)?.is_some())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HullIntersection {
    Intersect(Point),
    Disjoint,
    /// Some part had no points; its hull is empty.
    EmptyPart,
}

impl HullIntersection {
    pub fn intersects(&self) -> bool {
        matches!(self, HullIntersection::Intersect(_))
    }
}

/// Do the convex hulls of all parts share a point?
pub fn convex_hulls_intersect<P: AsRef<[Point]>>(parts: &[P]) -> Result<HullIntersection> {
    if parts.is_empty() {
        return Err(Error::EmptyInput("part list"));
    }
    if parts.iter().any(|p| p.as_ref().is_empty()) {
        return Ok(HullIntersection::EmptyPart);
    }
    let d = check_dims(parts.iter().flat_map(|p| p.as_ref().iter()))?.unwrap_or(0);
    let offsets: Vec<usize> = parts
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.as_ref().len();
            Some(o)
        })
        .collect();
    let nvars: usize = parts.iter().map(|p| p.as_ref().len()).sum();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, part) in parts.iter().enumerate() {
        let mut row = vec![Rational::zero(); nvars];
        for j in 0..part.as_ref().len() {
            row[offsets[k] + j] = int(1);
        }
        a.push(row);
        b.push(int(1));
    }
    // sum_j lambda_kj x_kj - sum_j lambda_0j x_0j = 0 for every later part k
    let base = parts[0].as_ref();
    for (k, part) in parts.iter().enumerate().skip(1) {
        for c in 0..d {
            let mut row = vec![Rational::zero(); nvars];
            for (j, p) in base.iter().enumerate() {
                row[j] = -p[c].clone();
            }
            for (j, p) in part.as_ref().iter().enumerate() {
                row[offsets[k] + j] = p[c].clone();
            }
            a.push(row);
            b.push(Rational::zero());
        }
    }
    match feasible_nonneg(a, b)? {
        None => Ok(HullIntersection::Disjoint),
        Some(lambda) => {
            let mut w = vec![Rational::zero(); d];
            for (j, p) in base.iter().enumerate() {
                if lambda[j].is_zero() {
                    continue;
                }
                for c in 0..d {
                    w[c] += &lambda[j] * &p[c];
                }
            }
            Ok(HullIntersection::Intersect(Point::new(w)))
        }
    }
}

/// Is `{<a_i, x> > b_i for all i}` empty? Openness flags are ignored.
pub fn open_intersection_empty(family: &HalfSpaceFamily) -> Result<bool> {
    let rows: Vec<Constraint> = family.iter().map(|h| h.as_constraint(Some(true))).collect();
    Ok(!lp_feasible(&rows)?.is_feasible())
}

/// Do the closures of the family cover all of `Q^d`?
pub fn closed_union_covers_space(family: &HalfSpaceFamily) -> Result<bool> {
    let complements = family.closures().complements();
    let rows: Vec<Constraint> = complements.iter().map(|h| h.as_constraint(None)).collect();
    Ok(!lp_feasible(&rows)?.is_feasible())
}

/// Open half-spaces `H_k` with `required[k]` strictly inside `H_k` and whose
/// common intersection is certified empty by `sum a_k = 0, sum b_k >= 0`.
///
/// Returns `None` when no such family exists with every member taking part in
/// the certificate. Needs at least two members.
pub(crate) fn disjoint_family_containing(
    dim: usize,
    required: &[Vec<&Point>],
) -> Result<Option<Vec<HalfSpace>>> {
    let m = required.len();
    if m < 2 || dim == 0 {
        return Ok(None);
    }
    let width = m * (dim + 1);
    let var_a = |k: usize, c: usize| k * (dim + 1) + c;
    let var_b = |k: usize| k * (dim + 1) + dim;
    let mut rows = Vec::new();
    for (k, pts) in required.iter().enumerate() {
        for p in pts {
            let mut coeffs = vec![Rational::zero(); width];
            for c in 0..dim {
                coeffs[var_a(k, c)] = p[c].clone();
            }
            coeffs[var_b(k)] = int(-1);
            rows.push(Constraint::gt(coeffs, Rational::zero()));
        }
    }
    for c in 0..dim {
        let mut coeffs = vec![Rational::zero(); width];
        for k in 0..m {
            coeffs[var_a(k, c)] = int(1);
        }
        rows.push(Constraint::eq(coeffs, Rational::zero()));
    }
    let mut coeffs = vec![Rational::zero(); width];
    for k in 0..m {
        coeffs[var_b(k)] = int(1);
    }
    rows.push(Constraint::ge(coeffs, Rational::zero()));

    let Feasibility::Feasible(sol) = lp_feasible(&rows)? else {
        return Ok(None);
    };
    let mut normals: Vec<Vec<Rational>> = (0..m)
        .map(|k| (0..dim).map(|c| sol[var_a(k, c)].clone()).collect())
        .collect();
    let offsets: Vec<Rational> = (0..m).map(|k| sol[var_b(k)].clone()).collect();

    let zero: Vec<usize> = (0..m)
        .filter(|&k| normals[k].iter().all(Zero::is_zero))
        .collect();
    if !zero.is_empty() {
        perturb_zero_normals(&mut normals, &offsets, &zero, required)?;
    }
    let family = normals
        .into_iter()
        .zip(offsets)
        .map(|(a, b)| HalfSpace::open(a, b))
        .collect::<Result<Vec<_>>>()?;
    for (h, pts) in family.iter().zip(required) {
        if !pts.iter().all(|p| h.contains(p)) {
            return Err(Error::InternalInconsistency(
                "disjoint family lost a required point".into(),
            ));
        }
    }
    Ok(Some(family))
}

/// Add `c_k delta e_1` (`c_k = 1, 2, ..`) to each zero normal and subtract
/// the total from one other member, so `sum a_k = 0` and `sum b_k` are
/// untouched; `delta` is small enough to keep every strict row strict.
fn perturb_zero_normals(
    normals: &mut [Vec<Rational>],
    offsets: &[Rational],
    zero: &[usize],
    required: &[Vec<&Point>],
) -> Result<()> {
    let mut min_slack: Option<Rational> = None;
    let mut max_coord = int(1);
    for (k, pts) in required.iter().enumerate() {
        for p in pts {
            let s = dot(&normals[k], p) - &offsets[k];
            if min_slack.as_ref().is_none_or(|ms| &s < ms) {
                min_slack = Some(s);
            }
            let c = p[0].abs() + int(1);
            if c > max_coord {
                max_coord = c;
            }
        }
    }
    let z = zero.len() as i64;
    let target = (0..normals.len())
        .find(|k| !zero.contains(k))
        .unwrap_or(*zero.last().unwrap());
    let mut delta = min_slack.unwrap_or_else(|| int(1)) / (max_coord * int(2 * z * (z + 1)));
    for _ in 0..64 {
        let mut trial = normals.to_vec();
        let mut total = Rational::zero();
        for (c, &k) in zero.iter().enumerate() {
            let step = &delta * int(c as i64 + 1);
            trial[k][0] += &step;
            total += step;
        }
        trial[target][0] -= total;
        if trial.iter().all(|a| a.iter().any(|c| !c.is_zero())) {
            normals.clone_from_slice(&trial);
            return Ok(());
        }
        delta /= int(2);
    }
    Err(Error::InternalInconsistency(
        "could not perturb away zero normals".into(),
    ))
}

/// Half-spaces `H_k ⊇ parts[k]` with empty intersection, for parts whose
/// hulls do not meet. `None` if the hulls do intersect.
pub fn separating_family<P: AsRef<[Point]>>(
    dim: usize,
    parts: &[P],
) -> Result<Option<HalfSpaceFamily>> {
    if let Some(d) = check_dims(parts.iter().flat_map(|p| p.as_ref().iter()))? {
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
    }
    let required: Vec<Vec<&Point>> = parts.iter().map(|p| p.as_ref().iter().collect()).collect();
    match disjoint_family_containing(dim, &required)? {
        None => Ok(None),
        Some(v) => Ok(Some(HalfSpaceFamily::new(v)?)),
    }
}
